use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use crate::numerics::ComplexMatrix;
use crate::projections::Projection;

/// Default iteration cap of a `while` loop.
pub const DEFAULT_LOOP_CAP: usize = 1000;

/// Source position (1-based). Locations never take part in AST equality.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl PartialEq for Location {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl core::fmt::Display for Location {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    H,
    X,
    Cnot,
    Swap,
    Toffoli,
    Fredkin,
    Qft,
    Iqft,
}

impl Builtin {
    pub const ALL: [Builtin; 8] =
        [Builtin::H, Builtin::X, Builtin::Cnot, Builtin::Swap, Builtin::Toffoli, Builtin::Fredkin, Builtin::Qft, Builtin::Iqft];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::H => "H",
            Builtin::X => "X",
            Builtin::Cnot => "CNOT",
            Builtin::Swap => "SWAP",
            Builtin::Toffoli => "TOFFOLI",
            Builtin::Fredkin => "FREDKIN",
            Builtin::Qft => "QFT",
            Builtin::Iqft => "IQFT",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == name)
    }

    /// Fixed arity, or `None` for the register-wide Fourier transforms.
    pub fn arity(self) -> Option<usize> {
        match self {
            Builtin::H | Builtin::X => Some(1),
            Builtin::Cnot | Builtin::Swap => Some(2),
            Builtin::Toffoli | Builtin::Fredkin => Some(3),
            Builtin::Qft | Builtin::Iqft => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateRef {
    Builtin(Builtin),
    Defined(String),
}

impl GateRef {
    pub fn name(&self) -> &str {
        match self {
            GateRef::Builtin(b) => b.name(),
            GateRef::Defined(n) => n,
        }
    }
}

/// One term `c * |bits>` of a ket sum; bits are drawn from `0 1 + -`.
#[derive(Clone, Debug, PartialEq)]
pub struct KetTerm {
    pub coeff: f64,
    pub bits: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KetSum {
    pub terms: Vec<KetTerm>,
}

impl KetSum {
    pub fn arity(&self) -> usize {
        self.terms.first().map_or(0, |t| t.bits.len())
    }
}

/// Projection expression: `span{…}`, `I[k]`, `~`, `&` (meet), `|` (join), `(x)` (tensor).
#[derive(Clone, Debug, PartialEq)]
pub enum ProjExpr {
    Span(Vec<KetSum>),
    Identity(usize),
    Not(Box<ProjExpr>),
    Meet(Box<ProjExpr>, Box<ProjExpr>),
    Join(Box<ProjExpr>, Box<ProjExpr>),
    Tensor(Box<ProjExpr>, Box<ProjExpr>),
}

/// A wire of a hand-written assertion circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Wire {
    Qubit(usize),
    /// The shared auxiliary qubit, prepared in `|0⟩` before the circuit.
    Aux,
}

/// Step of a hand-written assertion circuit.
#[derive(Clone, Debug, PartialEq)]
pub enum CircuitStep {
    Gate { gate: GateRef, wires: Vec<Wire>, location: Location },
    /// Measure the wires in the computational basis; abort unless the outcome equals `expect`.
    Check { wires: Vec<Wire>, expect: Vec<bool>, location: Location },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssertSite {
    pub id: String,
    pub qubits: Vec<usize>,
    pub expr: ProjExpr,
    /// Predicate on `qubits` (first listed = most significant).
    pub projection: Projection,
    /// Hand-written lowered form, when supplied with `via { … }`.
    pub circuit: Option<Vec<CircuitStep>>,
    pub location: Location,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Statement {
    Skip { location: Location },
    Init { qubits: Vec<usize>, location: Location },
    Unitary { gate: GateRef, qubits: Vec<usize>, location: Location },
    /// Jointly measure `qubits`; run `then_branch` when the bitstring is in `outcomes`.
    IfMeasure {
        qubits: Vec<usize>,
        outcomes: Vec<usize>,
        then_branch: Vec<Statement>,
        else_branch: Vec<Statement>,
        location: Location,
    },
    /// Repeat `body` while the joint outcome of `qubits` lies in `outcomes`.
    WhileMeasure { qubits: Vec<usize>, outcomes: Vec<usize>, body: Vec<Statement>, cap: usize, location: Location },
    Assert(AssertSite),
}

impl Statement {
    pub fn location(&self) -> Location {
        match self {
            Statement::Skip { location }
            | Statement::Init { location, .. }
            | Statement::Unitary { location, .. }
            | Statement::IfMeasure { location, .. }
            | Statement::WhileMeasure { location, .. } => *location,
            Statement::Assert(site) => site.location,
        }
    }
}

/// A parsed quantum while-program.
#[derive(Clone, Debug)]
pub struct Program {
    pub qubit_count: usize,
    /// Defined gates in declaration order.
    pub gates: Vec<(String, ComplexMatrix)>,
    pub body: Vec<Statement>,
    /// Free-form notes (for example injected mutations); printed as comments.
    pub metadata: Vec<String>,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.qubit_count == other.qubit_count && self.gates == other.gates && self.body == other.body
    }
}

impl Program {
    pub fn gate(&self, name: &str) -> Option<&ComplexMatrix> {
        self.gates.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    /// Matrix of `gate` applied to `arity` qubits; `None` for an undefined name.
    pub fn gate_matrix(&self, gate: &GateRef, arity: usize) -> Option<ComplexMatrix> {
        match gate {
            GateRef::Builtin(b) => Some(super::gates::builtin_matrix(*b, arity)),
            GateRef::Defined(name) => self.gate(name).cloned(),
        }
    }

    /// Assertion sites in program order.
    pub fn sites(&self) -> Vec<&AssertSite> {
        let mut out = Vec::new();
        collect_sites(&self.body, &mut out);
        out
    }

    pub fn site(&self, id: &str) -> Option<&AssertSite> {
        self.sites().into_iter().find(|s| s.id == id)
    }

    /// Index of a site in program order.
    pub fn site_index(&self, id: &str) -> Option<usize> {
        self.sites().iter().position(|s| s.id == id)
    }
}

fn collect_sites<'a>(body: &'a [Statement], out: &mut Vec<&'a AssertSite>) {
    for s in body {
        match s {
            Statement::Assert(site) => out.push(site),
            Statement::IfMeasure { then_branch, else_branch, .. } => {
                collect_sites(then_branch, out);
                collect_sites(else_branch, out);
            }
            Statement::WhileMeasure { body, .. } => collect_sites(body, out),
            _ => {}
        }
    }
}
