use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::ast::Statement;
use super::exec::{index_bit, index_outcome, ExecError, ExecSite, ExecStep, Executable};
use crate::numerics::{conjugate_local, partial_trace, ComplexMatrix, C64};
use crate::states::DensityOperator;

/// Loop bodies stop unrolling once the mass still inside the loop drops below
/// this; the remainder is reported as residual.
const LOOP_MASS_FLOOR: f64 = 1e-30;

#[derive(Clone, Debug, PartialEq)]
pub struct SemanticResult {
    /// Output on the program register, scaled by the completion mass.
    pub rho_out: ComplexMatrix,
    /// Probability of aborting at each assertion, in program order.
    pub abort_mass: Vec<(String, f64)>,
    /// Mass still inside a loop when its iteration cap was reached.
    pub residual: f64,
}

impl SemanticResult {
    pub fn completion_mass(&self) -> f64 {
        self.rho_out.trace().re
    }

    pub fn abort(&self, site: &str) -> Option<f64> {
        self.abort_mass.iter().find(|(id, _)| id == site).map(|(_, m)| *m)
    }

    pub fn total_abort(&self) -> f64 {
        self.abort_mass.iter().map(|(_, m)| m).sum()
    }
}

/// Exact output of `exe` on `rho_in`: every measurement splits the density
/// operator into outcome branches, each loop is unrolled at most
/// `min(loop_cap, own cap)` times.
pub fn semantic_function(exe: &Executable, rho_in: &DensityOperator, loop_cap: usize) -> Result<SemanticResult, ExecError> {
    semantic_function_observed(exe, rho_in, loop_cap, &mut |_, _| {})
}

/// [`semantic_function`] that also reports, for every assertion execution,
/// the (unnormalized) program-register state arriving at the site.
pub fn semantic_function_observed(
    exe: &Executable,
    rho_in: &DensityOperator,
    loop_cap: usize,
    observer: &mut dyn FnMut(usize, &ComplexMatrix),
) -> Result<SemanticResult, ExecError> {
    if loop_cap == 0 {
        return Err(ExecError::ZeroLoopCap);
    }
    let n = exe.program().qubit_count;
    if rho_in.qubit_count() != n {
        return Err(ExecError::QubitOutOfRange(rho_in.qubit_count()));
    }
    let rho = if exe.uses_aux() {
        let zero = ComplexMatrix::diag_real(&[1.0, 0.0]);
        rho_in.matrix().kron(&zero)
    } else {
        rho_in.matrix().clone()
    };
    let mut sem = Sem { exe, loop_cap, abort: vec![0.0; exe.site_ids().len()], residual: 0.0, observer };
    let out = sem.block(&exe.program().body, rho);
    let rho_out = sem.reduce(&out);
    let abort_mass = exe.site_ids().iter().cloned().zip(sem.abort).collect();
    Ok(SemanticResult { rho_out, abort_mass, residual: sem.residual })
}

struct Sem<'a> {
    exe: &'a Executable,
    loop_cap: usize,
    abort: Vec<f64>,
    residual: f64,
    observer: &'a mut dyn FnMut(usize, &ComplexMatrix),
}

fn trace(rho: &ComplexMatrix) -> f64 {
    rho.trace().re
}

/// Keeps the entries `(i, j)` for which `keep(i, j)` holds.
fn mask(rho: &ComplexMatrix, keep: impl Fn(usize, usize) -> bool) -> ComplexMatrix {
    ComplexMatrix::from_fn(rho.rows(), rho.cols(), |i, j| if keep(i, j) { rho[(i, j)] } else { C64::new(0.0, 0.0) })
}

impl Sem<'_> {
    fn width(&self) -> usize {
        self.exe.width()
    }

    fn reduce(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        if self.exe.uses_aux() {
            let keep: Vec<usize> = (0..self.exe.program().qubit_count).collect();
            partial_trace(rho, self.width(), &keep).expect("register matches width")
        } else {
            rho.clone()
        }
    }

    /// Splits by the joint outcome of `qubits`: (outcomes in `set`, the rest).
    fn branch(&self, rho: &ComplexMatrix, qubits: &[usize], set: &[usize]) -> (ComplexMatrix, ComplexMatrix) {
        let w = self.width();
        let outcome = |i: usize| index_outcome(i, qubits, w);
        let inside = mask(rho, |i, j| outcome(i) == outcome(j) && set.contains(&outcome(i)));
        let outside = mask(rho, |i, j| outcome(i) == outcome(j) && !set.contains(&outcome(i)));
        (inside, outside)
    }

    fn reset(&self, rho: &ComplexMatrix, qubits: &[usize]) -> ComplexMatrix {
        let w = self.width();
        let mut out = rho.clone();
        for &q in qubits {
            let b = 1usize << crate::numerics::bit_of(q, w);
            let d = out.rows();
            let prev = out;
            out = ComplexMatrix::zeros(d, d);
            for i in (0..d).filter(|i| i & b == 0) {
                for j in (0..d).filter(|j| j & b == 0) {
                    out[(i, j)] = prev[(i, j)] + prev[(i | b, j | b)];
                }
            }
        }
        out
    }

    fn block(&mut self, body: &[Statement], mut rho: ComplexMatrix) -> ComplexMatrix {
        for s in body {
            rho = self.statement(s, rho);
        }
        rho
    }

    fn statement(&mut self, s: &Statement, mut rho: ComplexMatrix) -> ComplexMatrix {
        let w = self.width();
        match s {
            Statement::Skip { .. } => rho,
            Statement::Init { qubits, .. } => self.reset(&rho, qubits),
            Statement::Unitary { gate, qubits, .. } => {
                conjugate_local(&mut rho, w, self.exe.gate(gate, qubits.len()), qubits);
                rho
            }
            Statement::IfMeasure { qubits, outcomes, then_branch, else_branch, .. } => {
                let (yes, no) = self.branch(&rho, qubits, outcomes);
                let a = self.block(then_branch, yes);
                let b = self.block(else_branch, no);
                &a + &b
            }
            Statement::WhileMeasure { qubits, outcomes, body, cap, .. } => {
                let cap = self.exe.effective_cap(*cap).min(self.loop_cap);
                let mut done = ComplexMatrix::zeros(rho.rows(), rho.cols());
                let mut current = rho;
                let mut iterations = 0;
                loop {
                    let (inside, outside) = self.branch(&current, qubits, outcomes);
                    done = &done + &outside;
                    let mass = trace(&inside);
                    if iterations == cap || mass < LOOP_MASS_FLOOR {
                        self.residual += mass;
                        break;
                    }
                    current = self.block(body, inside);
                    iterations += 1;
                }
                done
            }
            Statement::Assert(site) => {
                let index = self.exe.site_index(&site.id).expect("registered site");
                let reduced = self.reduce(&rho);
                (self.observer)(index, &reduced);
                let before = trace(&rho);
                let after = self.assertion(index, rho);
                self.abort[index] += (before - trace(&after)).max(0.0);
                after
            }
        }
    }

    fn assertion(&mut self, index: usize, mut rho: ComplexMatrix) -> ComplexMatrix {
        let w = self.width();
        match &self.exe.sites[index] {
            ExecSite::AbortAlways => ComplexMatrix::zeros(rho.rows(), rho.cols()),
            ExecSite::Direct { matrix, qubits } => {
                conjugate_local(&mut rho, w, matrix, qubits);
                rho
            }
            ExecSite::Lowered { steps, uses_aux } => {
                for step in steps {
                    match step {
                        ExecStep::Apply(m, qs) => conjugate_local(&mut rho, w, m, qs),
                        ExecStep::Check(q, expect) => {
                            let e = *expect as usize;
                            rho = mask(&rho, |i, j| index_bit(i, *q, w) == e && index_bit(j, *q, w) == e);
                        }
                    }
                }
                if *uses_aux {
                    rho = self.reset(&rho, &[self.exe.program().qubit_count]);
                }
                rho
            }
        }
    }
}
