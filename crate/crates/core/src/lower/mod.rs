//! Compiling projective assertions into unitaries and single-qubit
//! computational-basis checks.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::lang::{AssertSite, Builtin, CircuitStep, GateRef, Location, Program, Statement, Wire};
use crate::numerics::{embed_operator, exact_log2, orthonormal_complement, ComplexMatrix, NumericsError, C64};
use crate::projections::{Projection, ProjectionError};

/// Tolerance for the pattern, pass-operator and decomposition checks.
pub const LOWER_TOL: f64 = 1e-8;

/// Unitaries closer than this to the identity are omitted from step lists.
const IDENTITY_SKIP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LowerError {
    #[error("rank {rank} is not a power of two")]
    RankNotPowerOfTwo { rank: usize },
    #[error("rank {rank} outside the range split accepts on {qubits} qubits")]
    RankOutOfRange { rank: usize, qubits: usize },
    #[error("rank {rank} fits without an auxiliary qubit on {qubits} qubits")]
    NotNeeded { rank: usize, qubits: usize },
    #[error("assertion `{site}`: {reason}")]
    DecompositionMismatch { site: String, reason: String },
    #[error("assertion `{site}` uses qubit q{qubit} outside its qubit list")]
    WireOutsideSite { site: String, qubit: usize },
    #[error("assertion `{site}` names unknown gate `{gate}`")]
    UnknownGate { site: String, gate: String },
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// An implementation in the computational basis: `U·P·Uᴴ` equals
/// `|0…0⟩⟨0…0|` on `measured_qubits` tensored with the identity elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct IcbForm {
    pub unitary: ComplexMatrix,
    pub measured_qubits: Vec<usize>,
    pub expected_bits: Vec<bool>,
}

/// Origin of a unitary step, used for naming and resource counting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepGate {
    /// A gate named in a hand-written circuit.
    Named(GateRef),
    /// A unitary synthesized by the compiler.
    Generated(String),
}

impl StepGate {
    pub fn name(&self) -> &str {
        match self {
            StepGate::Named(g) => g.name(),
            StepGate::Generated(n) => n,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LoweredStep {
    Apply { gate: StepGate, matrix: ComplexMatrix, wires: Vec<Wire> },
    /// Measure one wire; continue only when the result equals `expect`.
    Check { wire: Wire, expect: bool },
}

#[derive(Clone, Debug, PartialEq)]
pub enum LoweredBody {
    /// Rank-zero predicate: every execution aborts.
    AbortAlways,
    Steps(Vec<LoweredStep>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoweredAssertion {
    pub site_id: String,
    /// Program qubits of the assertion (the auxiliary qubit is extra).
    pub qubits: Vec<usize>,
    pub aux_qubits: usize,
    pub body: LoweredBody,
}

impl LoweredAssertion {
    pub fn steps(&self) -> &[LoweredStep] {
        match &self.body {
            LoweredBody::AbortAlways => &[],
            LoweredBody::Steps(s) => s,
        }
    }

    pub fn is_abort_always(&self) -> bool {
        matches!(self.body, LoweredBody::AbortAlways)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ResourceCount {
    pub h_gates: usize,
    pub cnot_gates: usize,
    pub other_1q: usize,
    pub other_2q: usize,
    pub other_3q: usize,
    pub generic_unitaries: usize,
    pub measurements: usize,
    pub aux_qubits: usize,
}

impl ResourceCount {
    /// Named gates other than H and CNOT.
    pub fn other(&self) -> usize {
        self.other_1q + self.other_2q + self.other_3q
    }
}

/// ICB form with the canonical pattern: the first `n − m` qubits measured, expecting 0.
pub fn icb(p: &Projection) -> Result<IcbForm, LowerError> {
    let n = p.qubit_count();
    let rank = p.rank();
    let m = exact_log2(rank).ok_or(LowerError::RankNotPowerOfTwo { rank })?;
    let full = p.frame().hstack(&orthonormal_complement(p.frame())?);
    let measured: Vec<usize> = (0..n - m).collect();
    Ok(IcbForm { unitary: full.adjoint(), expected_bits: vec![false; measured.len()], measured_qubits: measured })
}

/// Two projections of rank `2^{n−1}` whose meet is `p`.
pub fn split(p: &Projection) -> Result<(Projection, Projection), LowerError> {
    let n = p.qubit_count();
    let r = p.rank();
    let half = p.dimension() / 2;
    if n == 0 || r == 0 || r > half {
        return Err(LowerError::RankOutOfRange { rank: r, qubits: n });
    }
    let u = p.frame().hstack(&orthonormal_complement(p.frame())?);
    let first: Vec<usize> = (0..half).collect();
    let second: Vec<usize> = (0..r).chain(half..2 * half - r).collect();
    Ok((Projection::from_frame(u.select_columns(&first))?, Projection::from_frame(u.select_columns(&second))?))
}

/// `|0⟩⟨0| ⊗ p`, the auxiliary qubit being qubit 0 of the result.
pub fn aux_lift(p: &Projection) -> Result<Projection, LowerError> {
    let n = p.qubit_count();
    if p.rank() <= p.dimension() / 2 {
        return Err(LowerError::NotNeeded { rank: p.rank(), qubits: n });
    }
    Ok(Projection::basis_states(1, &[0]).tensor(p))
}

fn is_identity(u: &ComplexMatrix) -> bool {
    u.max_abs_diff(&ComplexMatrix::identity(u.rows())) < IDENTITY_SKIP_TOL
}

/// Lowers the predicate of `site` by the automatic pipeline, ignoring any
/// hand-written circuit.
pub fn lower_assertion(site: &AssertSite, qubit_count: usize) -> Result<LoweredAssertion, LowerError> {
    if let Some(&q) = site.qubits.iter().find(|&&q| q >= qubit_count) {
        return Err(ProjectionError::IndexOutOfRange { index: q, qubits: qubit_count }.into());
    }
    let p = &site.projection;
    let mut out =
        LoweredAssertion { site_id: site.id.clone(), qubits: site.qubits.clone(), aux_qubits: 0, body: LoweredBody::Steps(Vec::new()) };
    if p.rank() == 0 {
        out.body = LoweredBody::AbortAlways;
        return Ok(out);
    }
    if p.rank() == p.dimension() {
        return Ok(out);
    }
    let (p, aux) = if p.rank() > p.dimension() / 2 { (aux_lift(p)?, 1) } else { (p.clone(), 0) };
    out.aux_qubits = aux;
    let wire = |local: usize| -> Wire {
        if aux == 1 {
            if local == 0 {
                Wire::Aux
            } else {
                Wire::Qubit(site.qubits[local - 1])
            }
        } else {
            Wire::Qubit(site.qubits[local])
        }
    };
    let wires: Vec<Wire> = (0..p.qubit_count()).map(wire).collect();
    let name = |suffix: &str| StepGate::Generated(format!("{}_{suffix}", site.id));
    let mut steps = Vec::new();
    let push_apply = |steps: &mut Vec<LoweredStep>, gate: StepGate, u: ComplexMatrix| {
        if !is_identity(&u) {
            steps.push(LoweredStep::Apply { gate, matrix: u, wires: wires.clone() });
        }
    };
    let push_checks = |steps: &mut Vec<LoweredStep>, form: &IcbForm| {
        for (&q, &e) in form.measured_qubits.iter().zip(&form.expected_bits) {
            steps.push(LoweredStep::Check { wire: wire(q), expect: e });
        }
    };
    if exact_log2(p.rank()).is_some() {
        let form = icb(&p)?;
        push_apply(&mut steps, name("U"), form.unitary.clone());
        push_checks(&mut steps, &form);
        push_apply(&mut steps, name("Udg"), form.unitary.adjoint());
    } else {
        let (p1, p2) = split(&p)?;
        let (f1, f2) = (icb(&p1)?, icb(&p2)?);
        push_apply(&mut steps, name("U1"), f1.unitary.clone());
        push_checks(&mut steps, &f1);
        push_apply(&mut steps, name("U2U1dg"), &f2.unitary * &f1.unitary.adjoint());
        push_checks(&mut steps, &f2);
        push_apply(&mut steps, name("U2dg"), f2.unitary.adjoint());
    }
    out.body = LoweredBody::Steps(steps);
    Ok(out)
}

/// Lowers the hand-written circuit of `site` after checking it against the
/// predicate: with the auxiliary qubit starting and ending in `|0⟩`, the pass
/// branch must be a projection whose subspace contains the predicate's.
pub fn lower_circuit(site: &AssertSite, program: &Program) -> Result<Option<LoweredAssertion>, LowerError> {
    let Some(circuit) = &site.circuit else {
        return Ok(None);
    };
    let mut steps = Vec::new();
    let mut uses_aux = false;
    for step in circuit {
        let wires = match step {
            CircuitStep::Gate { wires, .. } | CircuitStep::Check { wires, .. } => wires,
        };
        for w in wires {
            match w {
                Wire::Aux => uses_aux = true,
                Wire::Qubit(q) if !site.qubits.contains(q) => {
                    return Err(LowerError::WireOutsideSite { site: site.id.clone(), qubit: *q })
                }
                _ => {}
            }
        }
        match step {
            CircuitStep::Gate { gate, wires, .. } => {
                let matrix = program
                    .gate_matrix(gate, wires.len())
                    .ok_or_else(|| LowerError::UnknownGate { site: site.id.clone(), gate: gate.name().to_string() })?;
                steps.push(LoweredStep::Apply { gate: StepGate::Named(gate.clone()), matrix, wires: wires.clone() });
            }
            CircuitStep::Check { wires, expect, .. } => {
                for (w, e) in wires.iter().zip(expect) {
                    steps.push(LoweredStep::Check { wire: *w, expect: *e });
                }
            }
        }
    }
    let lowered = LoweredAssertion {
        site_id: site.id.clone(),
        qubits: site.qubits.clone(),
        aux_qubits: uses_aux as usize,
        body: LoweredBody::Steps(steps),
    };
    let mismatch = |reason: String| LowerError::DecompositionMismatch { site: site.id.clone(), reason };
    let (m, leak) = pass_operator(&lowered);
    if leak > LOWER_TOL {
        return Err(mismatch(format!("auxiliary qubit is left excited on pass (weight {leak:.3e})")));
    }
    let herm = m.hermitian_deviation();
    let idem = (&m * &m).max_abs_diff(&m);
    if herm > LOWER_TOL || idem > LOWER_TOL {
        return Err(mismatch(format!("pass branch is not a projection (deviation {:.3e})", herm.max(idem))));
    }
    let p = site.projection.as_matrix();
    let lost = (&m * &p).max_abs_diff(&p);
    if lost > LOWER_TOL {
        return Err(mismatch(format!("circuit rejects states satisfying the predicate (deviation {lost:.3e})")));
    }
    Ok(Some(lowered))
}

/// Hand-written circuit when present, otherwise the automatic lowering.
pub fn lower_site(site: &AssertSite, program: &Program) -> Result<LoweredAssertion, LowerError> {
    match lower_circuit(site, program)? {
        Some(l) => Ok(l),
        None => lower_assertion(site, program.qubit_count),
    }
}

/// Lowers every assertion of `program` in program order.
pub fn lower_program(program: &Program) -> Result<Vec<LoweredAssertion>, LowerError> {
    program.sites().into_iter().map(|s| lower_site(s, program)).collect()
}

/// Operator of the pass branch on the assertion's qubits, with the auxiliary
/// qubit prepared in `|0⟩` and projected back onto `|0⟩`, together with the
/// Frobenius weight left on the auxiliary `|1⟩` branch.
pub fn pass_operator(lowered: &LoweredAssertion) -> (ComplexMatrix, f64) {
    let k = lowered.qubits.len();
    let a = lowered.aux_qubits;
    let total = k + a;
    let d = 1usize << k;
    if lowered.is_abort_always() {
        return (ComplexMatrix::zeros(d, d), 0.0);
    }
    let local = |w: &Wire| -> usize {
        match w {
            Wire::Aux => 0,
            Wire::Qubit(q) => a + lowered.qubits.iter().position(|x| x == q).expect("wire inside site"),
        }
    };
    let mut op = ComplexMatrix::identity(1 << total);
    for step in lowered.steps() {
        let (m, qs) = match step {
            LoweredStep::Apply { matrix, wires, .. } => (matrix.clone(), wires.iter().map(local).collect::<Vec<_>>()),
            LoweredStep::Check { wire, expect } => {
                let diag = if *expect { [0.0, 1.0] } else { [1.0, 0.0] };
                (ComplexMatrix::diag_real(&diag), vec![local(wire)])
            }
        };
        op = &embed_operator(&m, &qs, total) * &op;
    }
    if a == 0 {
        return (op, 0.0);
    }
    // aux is the most significant local qubit: block (0,0) is ⟨0|K|0⟩
    let pass = op.block(0, 0, d, d);
    let leak = op.block(d, 0, d, d).frobenius_norm();
    (pass, leak)
}

fn count_gate(count: &mut ResourceCount, gate: &StepGate, arity: usize) {
    match gate {
        StepGate::Named(GateRef::Builtin(Builtin::H)) => count.h_gates += 1,
        StepGate::Named(GateRef::Builtin(Builtin::Cnot)) => count.cnot_gates += 1,
        StepGate::Named(GateRef::Builtin(b)) if b.arity().is_some() => match arity {
            1 => count.other_1q += 1,
            2 => count.other_2q += 1,
            _ => count.other_3q += 1,
        },
        _ => count.generic_unitaries += 1,
    }
}

/// Gate, measurement and auxiliary-qubit counts of a lowered assertion. When
/// `decomposition` is given it must have the same pass branch as `lowered`,
/// and its counts are reported instead.
pub fn count_resources(
    lowered: &LoweredAssertion,
    decomposition: Option<&LoweredAssertion>,
) -> Result<ResourceCount, LowerError> {
    let target = match decomposition {
        None => lowered,
        Some(d) => {
            let (a, _) = pass_operator(lowered);
            let (b, leak) = pass_operator(d);
            let dev = a.max_abs_diff(&b);
            if d.qubits != lowered.qubits || dev > LOWER_TOL || leak > LOWER_TOL {
                return Err(LowerError::DecompositionMismatch {
                    site: lowered.site_id.clone(),
                    reason: format!("decomposition differs from the lowered form (deviation {:.3e})", dev.max(leak)),
                });
            }
            d
        }
    };
    let mut count = ResourceCount { aux_qubits: target.aux_qubits, ..ResourceCount::default() };
    for step in target.steps() {
        match step {
            LoweredStep::Apply { gate, wires, .. } => count_gate(&mut count, gate, wires.len()),
            LoweredStep::Check { .. } => count.measurements += 1,
        }
    }
    Ok(count)
}

/// Copy of `program` in which every assertion carries its lowered form as a
/// `via` circuit; compiler-generated unitaries become gate definitions.
/// A rank-zero predicate becomes `check aux expect 1`, which always fails.
pub fn emit_lowered(program: &Program, lowered: &[LoweredAssertion]) -> Program {
    let mut out = program.clone();
    let mut taken: Vec<String> = out.gates.iter().map(|(n, _)| n.clone()).collect();
    let mut circuits = Vec::new();
    for l in lowered {
        let mut steps = Vec::new();
        match &l.body {
            LoweredBody::AbortAlways => {
                steps.push(CircuitStep::Check { wires: vec![Wire::Aux], expect: vec![true], location: Location::default() })
            }
            LoweredBody::Steps(list) => {
                for s in list {
                    match s {
                        LoweredStep::Apply { gate, matrix, wires } => {
                            let gate = match gate {
                                StepGate::Named(g) => g.clone(),
                                StepGate::Generated(name) => {
                                    let mut name = name.clone();
                                    while taken.contains(&name) || Builtin::from_name(&name).is_some() {
                                        name.push('_');
                                    }
                                    taken.push(name.clone());
                                    out.gates.push((name.clone(), matrix.clone()));
                                    GateRef::Defined(name)
                                }
                            };
                            steps.push(CircuitStep::Gate { gate, wires: wires.clone(), location: Location::default() });
                        }
                        LoweredStep::Check { wire, expect } => steps.push(CircuitStep::Check {
                            wires: vec![*wire],
                            expect: vec![*expect],
                            location: Location::default(),
                        }),
                    }
                }
            }
        }
        circuits.push((l.site_id.clone(), steps));
    }
    replace_circuits(&mut out.body, &circuits);
    out
}

fn replace_circuits(body: &mut [Statement], circuits: &[(String, Vec<CircuitStep>)]) {
    for s in body {
        match s {
            Statement::Assert(site) => {
                if let Some((_, c)) = circuits.iter().find(|(id, _)| *id == site.id) {
                    site.circuit = Some(c.clone());
                }
            }
            Statement::IfMeasure { then_branch, else_branch, .. } => {
                replace_circuits(then_branch, circuits);
                replace_circuits(else_branch, circuits);
            }
            Statement::WhileMeasure { body, .. } => replace_circuits(body, circuits),
            _ => {}
        }
    }
}

/// Pattern projector of an ICB form: `|0…0⟩⟨0…0|` on the measured qubits.
pub fn pattern_projector(n: usize, form: &IcbForm) -> ComplexMatrix {
    let d = 1usize << n;
    ComplexMatrix::from_fn(d, d, |i, j| {
        let ok = i == j
            && form
                .measured_qubits
                .iter()
                .zip(&form.expected_bits)
                .all(|(&q, &e)| ((i >> (n - 1 - q)) & 1 == 1) == e);
        if ok {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}
