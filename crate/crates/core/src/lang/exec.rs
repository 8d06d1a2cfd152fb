use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::ast::*;
use crate::lower::{lower_program, LowerError, LoweredAssertion, LoweredBody, LoweredStep};
use crate::numerics::{apply_local, bit_of, norm, ComplexMatrix, C64};
use crate::rng::{shot_rng, uniform, RngCore};
use crate::states::StateVector;

/// How assertions are executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Projective measurement `{P, I − P}` on the asserted qubits.
    Direct,
    /// Compiled unitaries and single-qubit computational-basis checks.
    Lowered,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExecError {
    #[error("gate `{0}` has no matrix")]
    UnknownGate(String),
    #[error("gate `{gate}` acts on {expected} qubits, applied to {found}")]
    GateArity { gate: String, expected: usize, found: usize },
    #[error("qubit q{0} is out of range")]
    QubitOutOfRange(usize),
    #[error("loop cap must be at least 1")]
    ZeroLoopCap,
    #[error(transparent)]
    Lower(#[from] LowerError),
}

/// A lowered assertion step resolved to register indices.
#[derive(Clone, Debug)]
pub(crate) enum ExecStep {
    Apply(ComplexMatrix, Vec<usize>),
    Check(usize, bool),
}

#[derive(Clone, Debug)]
pub(crate) enum ExecSite {
    Direct { matrix: ComplexMatrix, qubits: Vec<usize> },
    AbortAlways,
    Lowered { steps: Vec<ExecStep>, uses_aux: bool },
}

/// A program prepared for execution: gate matrices resolved and, in lowered
/// mode, every assertion compiled. The auxiliary qubit, when needed, is
/// register index `qubit_count`.
#[derive(Clone, Debug)]
pub struct Executable {
    program: Program,
    mode: Mode,
    loop_cap: Option<usize>,
    lowered: Vec<LoweredAssertion>,
    site_ids: Vec<String>,
    site_index: BTreeMap<String, usize>,
    pub(crate) sites: Vec<ExecSite>,
    gates: BTreeMap<(GateRef, usize), ComplexMatrix>,
    width: usize,
}

impl Executable {
    pub fn new(program: Program, mode: Mode) -> Result<Self, ExecError> {
        let n = program.qubit_count;
        let mut gates = BTreeMap::new();
        collect_gates(&program, &program.body, &mut gates)?;
        let site_list = program.sites();
        let site_ids: Vec<String> = site_list.iter().map(|s| s.id.clone()).collect();
        let site_index = site_ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let (lowered, sites) = match mode {
            Mode::Direct => {
                let sites: Vec<ExecSite> = site_list
                    .iter()
                    .map(|s| ExecSite::Direct { matrix: s.projection.as_matrix(), qubits: s.qubits.clone() })
                    .collect();
                (Vec::new(), sites)
            }
            Mode::Lowered => {
                let lowered = lower_program(&program)?;
                let sites = lowered.iter().map(|l| resolve_lowered(l, n)).collect();
                (lowered, sites)
            }
        };
        let uses_aux = sites.iter().any(|s| matches!(s, ExecSite::Lowered { uses_aux: true, .. }));
        Ok(Self {
            width: n + uses_aux as usize,
            program,
            mode,
            loop_cap: None,
            lowered,
            site_ids,
            site_index,
            sites,
            gates,
        })
    }

    /// Caps every loop at `cap` iterations (in addition to its own cap).
    pub fn with_loop_cap(mut self, cap: usize) -> Result<Self, ExecError> {
        if cap == 0 {
            return Err(ExecError::ZeroLoopCap);
        }
        self.loop_cap = Some(cap);
        Ok(self)
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Compiled assertions in program order (empty in direct mode).
    pub fn lowered(&self) -> &[LoweredAssertion] {
        &self.lowered
    }

    /// Assertion ids in program order.
    pub fn site_ids(&self) -> &[String] {
        &self.site_ids
    }

    pub fn site_index(&self, id: &str) -> Option<usize> {
        self.site_index.get(id).copied()
    }

    /// Register width including the auxiliary qubit.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn uses_aux(&self) -> bool {
        self.width > self.program.qubit_count
    }

    pub(crate) fn gate(&self, gate: &GateRef, arity: usize) -> &ComplexMatrix {
        &self.gates[&(gate.clone(), arity)]
    }

    pub(crate) fn effective_cap(&self, cap: usize) -> usize {
        self.loop_cap.map_or(cap, |c| c.min(cap))
    }
}

fn collect_gates(
    program: &Program,
    body: &[Statement],
    out: &mut BTreeMap<(GateRef, usize), ComplexMatrix>,
) -> Result<(), ExecError> {
    let check_qubits = |qs: &[usize]| match qs.iter().find(|&&q| q >= program.qubit_count) {
        Some(&q) => Err(ExecError::QubitOutOfRange(q)),
        None => Ok(()),
    };
    for s in body {
        match s {
            Statement::Unitary { gate, qubits, .. } => {
                check_qubits(qubits)?;
                let key = (gate.clone(), qubits.len());
                if !out.contains_key(&key) {
                    let m = program
                        .gate_matrix(gate, qubits.len())
                        .ok_or_else(|| ExecError::UnknownGate(gate.name().to_string()))?;
                    if m.rows() != 1 << qubits.len() {
                        return Err(ExecError::GateArity {
                            gate: gate.name().to_string(),
                            expected: m.rows().trailing_zeros() as usize,
                            found: qubits.len(),
                        });
                    }
                    out.insert(key, m);
                }
            }
            Statement::Init { qubits, .. } => check_qubits(qubits)?,
            Statement::Assert(site) => check_qubits(&site.qubits)?,
            Statement::IfMeasure { qubits, then_branch, else_branch, .. } => {
                check_qubits(qubits)?;
                collect_gates(program, then_branch, out)?;
                collect_gates(program, else_branch, out)?;
            }
            Statement::WhileMeasure { qubits, body, .. } => {
                check_qubits(qubits)?;
                collect_gates(program, body, out)?;
            }
            Statement::Skip { .. } => {}
        }
    }
    Ok(())
}

fn resolve_lowered(l: &LoweredAssertion, n: usize) -> ExecSite {
    let index = |w: &Wire| match w {
        Wire::Aux => n,
        Wire::Qubit(q) => *q,
    };
    match &l.body {
        LoweredBody::AbortAlways => ExecSite::AbortAlways,
        LoweredBody::Steps(steps) => ExecSite::Lowered {
            steps: steps
                .iter()
                .map(|s| match s {
                    LoweredStep::Apply { matrix, wires, .. } => {
                        ExecStep::Apply(matrix.clone(), wires.iter().map(index).collect())
                    }
                    LoweredStep::Check { wire, expect } => ExecStep::Check(index(wire), *expect),
                })
                .collect(),
            uses_aux: l.aux_qubits > 0,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrajectoryStatus {
    Completed,
    /// Stopped by a failed assertion (its id).
    Aborted(String),
    LoopCapExceeded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryResult {
    pub status: TrajectoryStatus,
    /// Program-register state when execution stopped (auxiliary qubit removed).
    pub final_state: StateVector,
    /// Every `if`/`while` guard measurement: measured qubits and outcome bits.
    pub measurement_log: Vec<(Vec<usize>, Vec<bool>)>,
    /// Executions of each assertion, in program order.
    pub site_visits: Vec<u64>,
}

impl TrajectoryResult {
    /// Program-order index of the failing assertion, if any.
    pub fn aborted_site(&self, exe: &Executable) -> Option<usize> {
        match &self.status {
            TrajectoryStatus::Aborted(id) => exe.site_index(id),
            _ => None,
        }
    }
}

enum Flow {
    Continue,
    Abort(usize),
    Cap,
}

struct Run<'a, R: RngCore> {
    exe: &'a Executable,
    rng: &'a mut R,
    state: StateVector,
    log: Vec<(Vec<usize>, Vec<bool>)>,
    visits: Vec<u64>,
}

/// One sampled execution from `|0…0⟩` driven by `ChaCha8` seeded with `seed`.
pub fn run_trajectory(exe: &Executable, seed: u64) -> TrajectoryResult {
    run_trajectory_with(exe, &mut shot_rng(seed, 0))
}

/// One sampled execution from `|0…0⟩`; each measurement consumes one draw of `rng`.
pub fn run_trajectory_with<R: RngCore>(exe: &Executable, rng: &mut R) -> TrajectoryResult {
    let mut run = Run {
        exe,
        rng,
        state: StateVector::zero(exe.width),
        log: Vec::new(),
        visits: vec![0; exe.sites.len()],
    };
    let flow = run.block(&exe.program.body);
    let status = match flow {
        Flow::Continue => TrajectoryStatus::Completed,
        Flow::Abort(i) => TrajectoryStatus::Aborted(exe.site_ids[i].clone()),
        Flow::Cap => TrajectoryStatus::LoopCapExceeded,
    };
    let final_state = drop_aux(run.state, exe);
    TrajectoryResult { status, final_state, measurement_log: run.log, site_visits: run.visits }
}

fn drop_aux(state: StateVector, exe: &Executable) -> StateVector {
    if !exe.uses_aux() {
        return state;
    }
    let amps = state.into_amplitudes();
    let pick = |bit: usize| -> Vec<C64> { amps.iter().skip(bit).step_by(2).copied().collect() };
    let zero = pick(0);
    let chosen = if norm(&zero) > 0.0 { zero } else { pick(1) };
    StateVector::normalized(chosen).expect("non-zero register state")
}

fn bits_of(value: usize, width: usize) -> Vec<bool> {
    (0..width).map(|t| (value >> (width - 1 - t)) & 1 == 1).collect()
}

impl<R: RngCore> Run<'_, R> {
    fn draw(&mut self) -> f64 {
        uniform(self.rng)
    }

    fn measure(&mut self, qubits: &[usize]) -> usize {
        let u = self.draw();
        self.state.measure_computational(qubits, u).0
    }

    fn reset(&mut self, qubits: &[usize]) {
        let outcome = self.measure(qubits);
        let x = super::gates::pauli_x();
        for (t, &q) in qubits.iter().enumerate() {
            if (outcome >> (qubits.len() - 1 - t)) & 1 == 1 {
                self.state.apply(&x, &[q]);
            }
        }
    }

    fn block(&mut self, body: &[Statement]) -> Flow {
        for s in body {
            match self.statement(s) {
                Flow::Continue => {}
                other => return other,
            }
        }
        Flow::Continue
    }

    fn guard(&mut self, qubits: &[usize], outcomes: &[usize]) -> bool {
        let o = self.measure(qubits);
        self.log.push((qubits.to_vec(), bits_of(o, qubits.len())));
        outcomes.contains(&o)
    }

    fn statement(&mut self, s: &Statement) -> Flow {
        match s {
            Statement::Skip { .. } => Flow::Continue,
            Statement::Init { qubits, .. } => {
                self.reset(qubits);
                Flow::Continue
            }
            Statement::Unitary { gate, qubits, .. } => {
                let m = self.exe.gate(gate, qubits.len());
                self.state.apply(m, qubits);
                Flow::Continue
            }
            Statement::IfMeasure { qubits, outcomes, then_branch, else_branch, .. } => {
                if self.guard(qubits, outcomes) {
                    self.block(then_branch)
                } else {
                    self.block(else_branch)
                }
            }
            Statement::WhileMeasure { qubits, outcomes, body, cap, .. } => {
                let cap = self.exe.effective_cap(*cap);
                let mut iterations = 0;
                while self.guard(qubits, outcomes) {
                    if iterations == cap {
                        return Flow::Cap;
                    }
                    match self.block(body) {
                        Flow::Continue => {}
                        other => return other,
                    }
                    iterations += 1;
                }
                Flow::Continue
            }
            Statement::Assert(site) => {
                let index = self.exe.site_index(&site.id).expect("registered site");
                self.visits[index] += 1;
                self.assertion(index)
            }
        }
    }

    fn assertion(&mut self, index: usize) -> Flow {
        let exe = self.exe;
        match &exe.sites[index] {
            ExecSite::AbortAlways => Flow::Abort(index),
            ExecSite::Direct { matrix, qubits } => {
                let mut projected = self.state.amplitudes().to_vec();
                apply_local(&mut projected, exe.width, matrix, qubits);
                let p = norm(&projected).powi(2);
                if self.draw() < p {
                    let s = 1.0 / p.sqrt();
                    let amps: Vec<C64> = projected.into_iter().map(|a| a * s).collect();
                    self.state = StateVector::normalized(amps).expect("pass branch has positive weight");
                    Flow::Continue
                } else {
                    Flow::Abort(index)
                }
            }
            ExecSite::Lowered { steps, uses_aux } => {
                for step in steps {
                    match step {
                        ExecStep::Apply(m, qs) => self.state.apply(m, qs),
                        ExecStep::Check(q, expect) => {
                            let o = self.measure(&[*q]);
                            if (o == 1) != *expect {
                                return Flow::Abort(index);
                            }
                        }
                    }
                }
                if *uses_aux {
                    self.reset(&[exe.program.qubit_count]);
                }
                Flow::Continue
            }
        }
    }
}

/// Bit of basis index `i` for `qubit` in a `width`-qubit register.
#[inline]
pub(crate) fn index_bit(i: usize, qubit: usize, width: usize) -> usize {
    (i >> bit_of(qubit, width)) & 1
}

/// Joint outcome of `qubits` for basis index `i`.
pub(crate) fn index_outcome(i: usize, qubits: &[usize], width: usize) -> usize {
    qubits.iter().fold(0, |acc, &q| (acc << 1) | index_bit(i, q, width))
}
