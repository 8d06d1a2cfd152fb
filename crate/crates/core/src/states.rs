//! Pure and mixed quantum states, state metrics and projective measurement.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::rand_core::RngCore;

use crate::numerics::{
    apply_local, bit_of, conjugate_local, exact_log2, hermitian_eig, norm, psd_sqrt_clamped, ComplexMatrix, NumericsError,
    C64, PSD_TOL, ZERO,
};
use crate::projections::Projection;
use crate::rng::uniform;

/// Tolerance on the unit norm of a state vector and the unit trace of a density operator.
pub const NORM_TOL: f64 = 1e-9;

/// Branches whose probability is below this are never sampled.
pub const BRANCH_EPS: f64 = 1e-12;

/// Tolerance for a projector family to count as resolving the identity.
pub const COMPLETENESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StateError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("not a density operator: {0}")]
    NotDensity(&'static str),
    #[error("projectors do not form a complete orthogonal family (deviation {deviation:.3e})")]
    IncompleteMeasurement { deviation: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Unit vector in `(ℂ²)^⊗n`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    qubit_count: usize,
}

impl StateVector {
    /// `|0…0⟩` on `n` qubits.
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << n];
        amplitudes[index] = C64::new(1.0, 0.0);
        Self { amplitudes, qubit_count: n }
    }

    /// Checked constructor; the length must be a power of two and the norm 1.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self, StateError> {
        let n = exact_log2(amplitudes.len()).ok_or(StateError::DimensionMismatch {
            expected: amplitudes.len().next_power_of_two(),
            found: amplitudes.len(),
        })?;
        let nrm = norm(&amplitudes);
        if !nrm.is_finite() || (nrm - 1.0).abs() > NORM_TOL {
            return Err(StateError::NotNormalized { norm: nrm });
        }
        Ok(Self { amplitudes, qubit_count: n })
    }

    /// Scales a nonzero vector to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self, StateError> {
        let nrm = norm(&amplitudes);
        if !(nrm.is_finite() && nrm > 0.0) {
            return Err(StateError::NotNormalized { norm: nrm });
        }
        amplitudes.iter_mut().for_each(|a| *a /= nrm);
        Self::new(amplitudes)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// Applies a unitary acting on `qubits`.
    pub fn apply(&mut self, op: &ComplexMatrix, qubits: &[usize]) {
        apply_local(&mut self.amplitudes, self.qubit_count, op, qubits);
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator {
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
            qubit_count: self.qubit_count,
        }
    }

    /// Probability of each bitstring outcome when `qubits` are measured jointly in
    /// the computational basis (first listed qubit = most significant bit).
    pub fn outcome_probabilities(&self, qubits: &[usize]) -> Vec<f64> {
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (idx, a) in self.amplitudes.iter().enumerate() {
            probs[self.outcome_of(idx, qubits)] += a.norm_sqr();
        }
        probs
    }

    fn outcome_of(&self, idx: usize, qubits: &[usize]) -> usize {
        qubits
            .iter()
            .fold(0, |acc, &q| (acc << 1) | ((idx >> bit_of(q, self.qubit_count)) & 1))
    }

    /// Measures `qubits` in the computational basis using the uniform draw `u`,
    /// collapses the state, and returns the outcome with its probability.
    pub fn measure_computational(&mut self, qubits: &[usize], u: f64) -> (usize, f64) {
        let probs = self.outcome_probabilities(qubits);
        let outcome = sample_index(&probs, u);
        let p = probs[outcome];
        let scale = 1.0 / p.sqrt();
        for idx in 0..self.amplitudes.len() {
            if self.outcome_of(idx, qubits) == outcome {
                self.amplitudes[idx] *= scale;
            } else {
                self.amplitudes[idx] = ZERO;
            }
        }
        (outcome, p)
    }

    /// Collapses onto `projection` (acting on `qubits`), returning the
    /// probability of that outcome. The state is left unchanged when the
    /// probability is below [`BRANCH_EPS`].
    pub fn project(&mut self, projection: &Projection, qubits: &[usize]) -> f64 {
        let mut projected = self.amplitudes.clone();
        apply_local(&mut projected, self.qubit_count, &projection.as_matrix(), qubits);
        let p = norm(&projected).powi(2);
        if p >= BRANCH_EPS {
            let s = 1.0 / p.sqrt();
            self.amplitudes = projected.into_iter().map(|a| a * s).collect();
        }
        p
    }
}

/// Index drawn from `probs` with the uniform variate `u`; entries below
/// [`BRANCH_EPS`] are excluded and the rest renormalized.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let total: f64 = probs.iter().filter(|&&p| p >= BRANCH_EPS).sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p < BRANCH_EPS {
            continue;
        }
        last = i;
        acc += p;
        if target < acc {
            return i;
        }
    }
    last
}

/// Hermitian PSD operator of unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    qubit_count: usize,
}

impl DensityOperator {
    /// Checked constructor.
    pub fn new(matrix: ComplexMatrix) -> Result<Self, StateError> {
        let n = Self::check_shape(&matrix)?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(StateError::NotDensity("trace is not 1"));
        }
        let eig = hermitian_eig(&matrix)?;
        if eig.values.last().is_some_and(|&l| l < -PSD_TOL) {
            return Err(StateError::NotDensity("negative eigenvalue"));
        }
        Ok(Self { matrix, qubit_count: n })
    }

    fn check_shape(matrix: &ComplexMatrix) -> Result<usize, StateError> {
        if !matrix.is_square() {
            return Err(StateError::DimensionMismatch { expected: matrix.rows(), found: matrix.cols() });
        }
        exact_log2(matrix.rows()).ok_or(StateError::DimensionMismatch {
            expected: matrix.rows().next_power_of_two(),
            found: matrix.rows(),
        })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(state: &StateVector) -> Self {
        state.to_density()
    }

    /// `I / 2ⁿ`.
    pub fn maximally_mixed(n: usize) -> Self {
        let d = 1usize << n;
        Self { matrix: ComplexMatrix::identity(d).scale_real(1.0 / d as f64), qubit_count: n }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// `U ρ Uᴴ` for a unitary on `qubits`.
    pub fn conjugate(&mut self, op: &ComplexMatrix, qubits: &[usize]) {
        conjugate_local(&mut self.matrix, self.qubit_count, op, qubits);
    }

    fn check_pair(&self, other: &Self) -> Result<(), StateError> {
        if self.matrix.rows() != other.matrix.rows() {
            return Err(StateError::DimensionMismatch { expected: self.matrix.rows(), found: other.matrix.rows() });
        }
        Ok(())
    }
}

/// Trace distance `½ Σ |λᵢ(ρ − σ)|`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64, StateError> {
    rho.check_pair(sigma)?;
    trace_distance_matrices(&rho.matrix, &sigma.matrix)
}

/// Trace distance for Hermitian matrices of equal size, without state checks.
pub fn trace_distance_matrices(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64, StateError> {
    let eig = hermitian_eig(&(a - b))?;
    Ok(0.5 * eig.values.iter().map(|l| l.abs()).sum::<f64>())
}

/// Fidelity `tr √(√ρ σ √ρ)`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64, StateError> {
    rho.check_pair(sigma)?;
    let s = psd_sqrt_clamped(&rho.matrix)?;
    let inner = &(&s * &sigma.matrix) * &s;
    let inner = ComplexMatrix::from_fn(inner.rows(), inner.cols(), |i, j| (inner[(i, j)] + inner[(j, i)].conj()) * 0.5);
    let eig = hermitian_eig(&inner)?;
    Ok(eig.values.iter().map(|l| l.max(0.0).sqrt()).sum())
}

/// Result of one projective measurement.
#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub outcome: usize,
    pub post_state: StateVector,
    pub probability: f64,
}

/// Samples the projective measurement `{P_m}` on `state`.
///
/// The projectors must be pairwise orthogonal and sum to the identity within
/// [`COMPLETENESS_TOL`].
pub fn measure_projective(
    state: &StateVector,
    projectors: &[Projection],
    rng: &mut impl RngCore,
) -> Result<MeasurementOutcome, StateError> {
    let d = state.amplitudes.len();
    if let Some(p) = projectors.iter().find(|p| p.dimension() != d) {
        return Err(StateError::DimensionMismatch { expected: d, found: p.dimension() });
    }
    let mut sum = ComplexMatrix::zeros(d, d);
    let mut total_rank = 0;
    for p in projectors {
        sum = &sum + &p.as_matrix();
        total_rank += p.rank();
    }
    let deviation = sum.max_abs_diff(&ComplexMatrix::identity(d));
    if deviation > COMPLETENESS_TOL || total_rank != d {
        return Err(StateError::IncompleteMeasurement { deviation });
    }
    let branches: Vec<(Vec<C64>, f64)> = projectors
        .iter()
        .map(|p| {
            let v = p.as_matrix().apply(&state.amplitudes);
            let prob = norm(&v).powi(2);
            (v, prob)
        })
        .collect();
    let probs: Vec<f64> = branches.iter().map(|b| b.1).collect();
    let outcome = sample_index(&probs, uniform(rng));
    let (v, probability) = branches.into_iter().nth(outcome).expect("outcome in range");
    let s = 1.0 / probability.sqrt();
    let post_state = StateVector { amplitudes: v.into_iter().map(|a| a * s).collect(), qubit_count: state.qubit_count };
    Ok(MeasurementOutcome { outcome, post_state, probability })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::shot_rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn plus() -> StateVector {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(vec![c(s), c(s)]).unwrap()
    }

    #[test]
    fn trace_distance_examples() {
        let z = StateVector::zero(1).to_density();
        let o = StateVector::basis(1, 1).to_density();
        assert!(trace_distance(&z, &z).unwrap().abs() < 1e-12);
        assert!((trace_distance(&z, &o).unwrap() - 1.0).abs() < 1e-12);
        let d = trace_distance(&z, &plus().to_density()).unwrap();
        assert!((d - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert!(trace_distance(&z, &StateVector::zero(2).to_density()).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let z = StateVector::zero(1).to_density();
        let o = StateVector::basis(1, 1).to_density();
        assert!((fidelity(&z, &z).unwrap() - 1.0).abs() < 1e-9);
        assert!(fidelity(&z, &o).unwrap().abs() < 1e-9);
        let f = fidelity(&z, &plus().to_density()).unwrap();
        assert!((f - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn density_checks() {
        assert!(DensityOperator::new(ComplexMatrix::diag_real(&[0.5, 0.5])).is_ok());
        assert!(DensityOperator::new(ComplexMatrix::diag_real(&[1.0, 1.0])).is_err());
        assert!(DensityOperator::new(ComplexMatrix::diag_real(&[1.5, -0.5])).is_err());
        assert!(StateVector::new(vec![c(1.0), c(1.0)]).is_err());
    }

    #[test]
    fn computational_measurement_of_plus() {
        let basis = [
            Projection::from_kets(&[vec![c(1.0), c(0.0)]], 1).unwrap(),
            Projection::from_kets(&[vec![c(0.0), c(1.0)]], 1).unwrap(),
        ];
        let mut counts = [0usize; 2];
        for i in 0..2000 {
            let m = measure_projective(&plus(), &basis, &mut shot_rng(1, i)).unwrap();
            assert!((m.probability - 0.5).abs() < 1e-12);
            counts[m.outcome] += 1;
        }
        assert!(counts[0] > 900 && counts[1] > 900);

        for i in 0..50 {
            let m = measure_projective(&StateVector::zero(1), &basis, &mut shot_rng(2, i)).unwrap();
            assert_eq!(m.outcome, 0);
            assert_eq!(m.post_state, StateVector::zero(1));
        }
    }

    #[test]
    fn bell_measurement_is_non_destructive() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::new(vec![c(s), c(0.0), c(0.0), c(s)]).unwrap();
        let p = Projection::from_kets(&[bell.amplitudes().to_vec()], 2).unwrap();
        let family = [p.clone(), p.complement()];
        for i in 0..20 {
            let m = measure_projective(&bell, &family, &mut shot_rng(3, i)).unwrap();
            assert_eq!(m.outcome, 0);
            let d = trace_distance(&m.post_state.to_density(), &bell.to_density()).unwrap();
            assert!(d < 1e-9);
        }
    }

    #[test]
    fn incomplete_family_rejected() {
        let p = Projection::from_kets(&[vec![c(1.0), c(0.0)]], 1).unwrap();
        let err = measure_projective(&plus(), &[p], &mut shot_rng(0, 0)).unwrap_err();
        assert!(matches!(err, StateError::IncompleteMeasurement { .. }));
    }

    #[test]
    fn joint_measurement_collapses() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let mut bell = StateVector::new(vec![c(s), c(0.0), c(0.0), c(s)]).unwrap();
        assert!(bell.outcome_probabilities(&[1]).iter().all(|p| (p - 0.5).abs() < 1e-12));
        let (k, p) = bell.measure_computational(&[0], 0.9);
        assert_eq!(k, 1);
        assert!((p - 0.5).abs() < 1e-12);
        assert_eq!(bell, StateVector::basis(2, 3));
    }
}
