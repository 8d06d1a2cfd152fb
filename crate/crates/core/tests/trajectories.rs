//! Sampled trajectories against the exact semantics.

use proq_core::lang::{
    parse_program, run_trajectory, semantic_function, Executable, Mode, TrajectoryStatus,
};
use proq_core::states::{DensityOperator, StateVector};

const PROGRAM: &str = "qubits 3;
defgate G = [[0.6, 0.8], [-0.8, 0.6]];
H q0;
G q1;
if measure(q0) in {1} { X q2; H q2; } else { skip; }
assert A: ~span{|111>} on q0, q1, q2;
while measure(q1) in {1} cap 3 {
  H q1;
  CNOT q1, q2;
  assert B: span{|0>, |1>} (x) span{|+>} | I[1] (x) span{|0>} on q0, q2;
}
assert C: span{|00>, |11>} on q0, q2;
";

fn within_3_sigma(count: usize, shots: usize, p: f64) -> bool {
    let n = shots as f64;
    let sigma = (n * p * (1.0 - p)).sqrt().max(1.0);
    (count as f64 - n * p).abs() <= 3.0 * sigma
}

#[test]
fn trajectory_frequencies_match_exact_masses() {
    let shots = 20_000;
    for mode in [Mode::Direct, Mode::Lowered] {
        let exe = Executable::new(parse_program(PROGRAM).unwrap(), mode).unwrap();
        let sem = semantic_function(&exe, &DensityOperator::pure(&StateVector::zero(3)), 1000).unwrap();
        let runs: Vec<TrajectoryStatus> = (0..shots as u64).map(|s| run_trajectory(&exe, s).status).collect();
        for (id, mass) in &sem.abort_mass {
            let count = runs.iter().filter(|s| **s == TrajectoryStatus::Aborted(id.clone())).count();
            assert!(within_3_sigma(count, shots, *mass), "{mode:?} {id}: {count} vs {mass}");
        }
        let completed = runs.iter().filter(|s| **s == TrajectoryStatus::Completed).count();
        assert!(within_3_sigma(completed, shots, sem.completion_mass()), "{mode:?} completed");
        let capped = runs.iter().filter(|s| **s == TrajectoryStatus::LoopCapExceeded).count();
        assert!(within_3_sigma(capped, shots, sem.residual), "{mode:?} capped {capped} vs {}", sem.residual);
    }
}

#[test]
fn satisfied_assertions_leave_the_state_alone() {
    let with = "qubits 2; H q0; CNOT q0, q1; assert A: span{|00>, |11>} on q0, q1; assert B: span{|00> + |11>} on q0, q1; H q1;";
    let without = "qubits 2; H q0; CNOT q0, q1; H q1;";
    for mode in [Mode::Direct, Mode::Lowered] {
        let a = Executable::new(parse_program(with).unwrap(), mode).unwrap();
        let b = Executable::new(parse_program(without).unwrap(), mode).unwrap();
        for seed in 0..50 {
            let (ra, rb) = (run_trajectory(&a, seed), run_trajectory(&b, seed));
            assert_eq!(ra.status, TrajectoryStatus::Completed);
            let d: f64 = ra
                .final_state
                .amplitudes()
                .iter()
                .zip(rb.final_state.amplitudes())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(d <= 1e-9, "{d}");
        }
    }
}

#[test]
fn measurement_log_is_reproducible() {
    let exe = Executable::new(parse_program(PROGRAM).unwrap(), Mode::Lowered).unwrap();
    for seed in [0, 1, 99, u64::MAX] {
        let (a, b) = (run_trajectory(&exe, seed), run_trajectory(&exe, seed));
        assert_eq!(a.measurement_log, b.measurement_log);
        assert_eq!(a, b);
    }
}
