//! Projections as closed subspaces: construction, lattice operations,
//! satisfaction and local projection.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::numerics::{
    exact_log2, hermitian_eig, local_offsets, orthonormal_columns, orthonormal_complement, partial_trace, ComplexMatrix,
    NumericsError, C64, ORTHONORMAL_TOL, PSD_TOL, RANK_TOL, ZERO,
};
use crate::states::DensityOperator;

/// Acceptance band around eigenvalue 2 of `P + Q` when computing a meet.
pub const MEET_TOL: f64 = 1e-6;

/// Threshold on `tr(Pρ)` below 1 tolerated by [`Projection::satisfies`].
pub const SATISFY_TOL: f64 = 1e-9;

/// Frobenius tolerance for subspace equality.
pub const SUBSPACE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProjectionError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("qubit index {index} out of range for {qubits} qubits")]
    IndexOutOfRange { index: usize, qubits: usize },
    #[error("qubit {0} listed twice")]
    DuplicateIndex(usize),
    #[error("operator is not positive semidefinite (eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("local projection needs at least one kept qubit")]
    EmptyKeepSet,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// A subspace of `(ℂ²)^⊗n`, stored as an orthonormal column frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    frame: ComplexMatrix,
    qubits: usize,
}

impl Projection {
    /// Projection onto the span of `kets`, each of length `2ⁿ`.
    pub fn from_kets(kets: &[Vec<C64>], n: usize) -> Result<Self, ProjectionError> {
        let d = 1usize << n;
        if let Some(k) = kets.iter().find(|k| k.len() != d) {
            return Err(ProjectionError::DimensionMismatch { expected: d, found: k.len() });
        }
        let m = ComplexMatrix::from_columns(d, kets);
        Ok(Self { frame: orthonormal_columns(&m, RANK_TOL), qubits: n })
    }

    /// Projection whose frame is `frame`; the columns must be orthonormal.
    pub fn from_frame(frame: ComplexMatrix) -> Result<Self, ProjectionError> {
        let n = exact_log2(frame.rows())
            .ok_or(ProjectionError::DimensionMismatch { expected: frame.rows().next_power_of_two(), found: frame.rows() })?;
        let deviation = frame.orthonormality_deviation();
        if deviation > ORTHONORMAL_TOL {
            return Err(NumericsError::NotOrthonormal { deviation }.into());
        }
        Ok(Self { frame, qubits: n })
    }

    /// Projection from its matrix form (Hermitian, eigenvalues near 0 or 1).
    pub fn from_matrix(p: &ComplexMatrix) -> Result<Self, ProjectionError> {
        let eig = hermitian_eig(p)?;
        let keep: Vec<usize> = eig.values.iter().enumerate().filter(|(_, &l)| l > 0.5).map(|(i, _)| i).collect();
        Self::from_frame(eig.vectors.select_columns(&keep))
    }

    /// The zero subspace.
    pub fn zero(n: usize) -> Self {
        Self { frame: ComplexMatrix::zeros(1 << n, 0), qubits: n }
    }

    /// The whole space.
    pub fn identity(n: usize) -> Self {
        Self { frame: ComplexMatrix::identity(1 << n), qubits: n }
    }

    /// Span of computational basis states given by index.
    pub fn basis_states(n: usize, indices: &[usize]) -> Self {
        let d = 1usize << n;
        let kets: Vec<Vec<C64>> = indices
            .iter()
            .map(|&i| {
                let mut v = vec![ZERO; d];
                v[i] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        Self::from_kets(&kets, n).expect("basis indices in range")
    }

    pub fn frame(&self) -> &ComplexMatrix {
        &self.frame
    }

    pub fn rank(&self) -> usize {
        self.frame.cols()
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn dimension(&self) -> usize {
        self.frame.rows()
    }

    /// `frame · frameᴴ`.
    pub fn as_matrix(&self) -> ComplexMatrix {
        &self.frame * &self.frame.adjoint()
    }

    fn check_same(&self, other: &Self) -> Result<(), ProjectionError> {
        if self.dimension() != other.dimension() {
            return Err(ProjectionError::DimensionMismatch { expected: self.dimension(), found: other.dimension() });
        }
        Ok(())
    }

    /// Subspace intersection.
    pub fn meet(&self, other: &Self) -> Result<Self, ProjectionError> {
        self.check_same(other)?;
        if self.rank() == 0 || other.rank() == 0 {
            return Ok(Self::zero(self.qubits));
        }
        let sum = &self.as_matrix() + &other.as_matrix();
        let eig = hermitian_eig(&sum)?;
        let keep: Vec<usize> = (0..eig.values.len()).filter(|&i| (eig.values[i] - 2.0).abs() < MEET_TOL).collect();
        let frame = orthonormal_columns(&eig.vectors.select_columns(&keep), RANK_TOL);
        Ok(Self { frame, qubits: self.qubits })
    }

    /// Closed span of the union.
    pub fn join(&self, other: &Self) -> Result<Self, ProjectionError> {
        self.check_same(other)?;
        let frame = orthonormal_columns(&self.frame.hstack(&other.frame), RANK_TOL);
        Ok(Self { frame, qubits: self.qubits })
    }

    /// Orthogonal complement.
    pub fn complement(&self) -> Self {
        let frame = orthonormal_complement(&self.frame).expect("frames are orthonormal by construction");
        Self { frame, qubits: self.qubits }
    }

    /// `self ⊗ other`, with `self` on the leading qubits.
    pub fn tensor(&self, other: &Self) -> Self {
        Self { frame: self.frame.kron(&other.frame), qubits: self.qubits + other.qubits }
    }

    /// Acts as `self` on `targets` (in order) and as the identity on the other
    /// qubits of an `n`-qubit register.
    pub fn embed(&self, targets: &[usize], n: usize) -> Result<Self, ProjectionError> {
        check_qubits(targets, n)?;
        if targets.len() != self.qubits {
            return Err(ProjectionError::DimensionMismatch { expected: self.qubits, found: targets.len() });
        }
        let rest: Vec<usize> = (0..n).filter(|q| !targets.contains(q)).collect();
        let target_off = local_offsets(targets, n);
        let rest_off = local_offsets(&rest, n);
        let d = 1usize << n;
        let mut columns = Vec::with_capacity(self.rank() * rest_off.len());
        for col in self.frame.columns() {
            for &r in &rest_off {
                let mut v = vec![ZERO; d];
                for (a, &t) in col.iter().zip(&target_off) {
                    v[r + t] = *a;
                }
                columns.push(v);
            }
        }
        Ok(Self { frame: ComplexMatrix::from_columns(d, &columns), qubits: n })
    }

    /// `tr(P ρ)` for a matrix of matching size.
    pub fn expectation(&self, rho: &ComplexMatrix) -> Result<f64, ProjectionError> {
        if rho.rows() != self.dimension() || rho.cols() != self.dimension() {
            return Err(ProjectionError::DimensionMismatch { expected: self.dimension(), found: rho.rows() });
        }
        let mut acc = 0.0;
        for b in self.frame.columns() {
            let rb = rho.apply(&b);
            acc += b.iter().zip(&rb).map(|(x, y)| (x.conj() * y).re).sum::<f64>();
        }
        Ok(acc)
    }

    /// `‖P ψ‖²` for an amplitude vector.
    pub fn probability(&self, amplitudes: &[C64]) -> f64 {
        self.frame.adjoint().apply(amplitudes).iter().map(|z| z.norm_sqr()).sum()
    }

    /// `ρ ⊨ P`, i.e. `tr(Pρ) ≥ 1 − 1e-9`.
    pub fn satisfies(&self, rho: &DensityOperator) -> Result<bool, ProjectionError> {
        Ok(self.expectation(rho.matrix())? >= 1.0 - SATISFY_TOL)
    }

    /// `1 − tr(Pρ)` clamped to `[0, 1]`: the abort probability of `assert(P)` on `ρ`.
    pub fn violation(&self, rho: &DensityOperator) -> Result<f64, ProjectionError> {
        Ok((1.0 - self.expectation(rho.matrix())?).clamp(0.0, 1.0))
    }

    /// True if both projections span the same subspace.
    pub fn same_subspace(&self, other: &Self) -> bool {
        if self.dimension() != other.dimension() || self.rank() != other.rank() {
            return false;
        }
        let p1 = self.as_matrix();
        let p2 = other.as_matrix();
        (&p1 * &p2).frobenius_distance(&p1) <= SUBSPACE_TOL
    }

    /// `‖(I − P) v‖`, the distance of `v` from the subspace.
    pub fn residual(&self, v: &[C64]) -> f64 {
        let coeffs = self.frame.adjoint().apply(v);
        let proj = self.frame.apply(&coeffs);
        v.iter().zip(&proj).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// `supp(tr_{other qubits}(P))` on `keep`, sorted ascending.
    pub fn local_projection(&self, keep: &[usize]) -> Result<Self, ProjectionError> {
        if keep.is_empty() {
            return Err(ProjectionError::EmptyKeepSet);
        }
        check_qubits(keep, self.qubits)?;
        let reduced = partial_trace(&self.as_matrix(), self.qubits, keep)?;
        support(&reduced)
    }
}

/// Projection onto the eigenvectors of a Hermitian PSD matrix whose eigenvalue
/// exceeds `1e-9·λ_max`.
pub fn support(m: &ComplexMatrix) -> Result<Projection, ProjectionError> {
    let eig = hermitian_eig(m)?;
    let lmax = eig.values.first().copied().unwrap_or(0.0);
    if let Some(&lmin) = eig.values.last() {
        if lmin < -PSD_TOL {
            return Err(ProjectionError::NotPsd { min_eigenvalue: lmin });
        }
    }
    let keep: Vec<usize> = (0..eig.values.len()).filter(|&i| lmax > 0.0 && eig.values[i] > RANK_TOL * lmax).collect();
    Projection::from_frame(eig.vectors.select_columns(&keep))
}

/// Support of a density operator.
pub fn support_of_state(rho: &DensityOperator) -> Result<Projection, ProjectionError> {
    support(rho.matrix())
}

fn check_qubits(qubits: &[usize], n: usize) -> Result<(), ProjectionError> {
    for (i, &q) in qubits.iter().enumerate() {
        if q >= n {
            return Err(ProjectionError::IndexOutOfRange { index: q, qubits: n });
        }
        if qubits[..i].contains(&q) {
            return Err(ProjectionError::DuplicateIndex(q));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::kron;
    use crate::states::StateVector;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn ket(bits: &str) -> Vec<C64> {
        let n = bits.len();
        let idx = usize::from_str_radix(bits, 2).unwrap();
        let mut v = vec![ZERO; 1 << n];
        v[idx] = c(1.0);
        v
    }

    fn add(a: &[C64], b: &[C64], s: f64) -> Vec<C64> {
        a.iter().zip(b).map(|(x, y)| (x + y) * s).collect()
    }

    fn bell() -> Vec<C64> {
        add(&ket("00"), &ket("11"), core::f64::consts::FRAC_1_SQRT_2)
    }

    fn proj(kets: &[Vec<C64>]) -> Projection {
        let n = kets[0].len().trailing_zeros() as usize;
        Projection::from_kets(kets, n).unwrap()
    }

    #[test]
    fn from_kets_examples() {
        assert_eq!(proj(&[bell()]).rank(), 1);
        assert_eq!(Projection::from_kets(&[], 2).unwrap().rank(), 0);
        let i2 = proj(&[ket("0"), ket("1")]);
        assert!(i2.as_matrix().max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
        assert!(Projection::from_kets(&[ket("0")], 2).is_err());
    }

    #[test]
    fn meet_examples() {
        let b = proj(&[bell()]);
        assert!(b.meet(&b).unwrap().same_subspace(&b));
        assert!(b.meet(&Projection::identity(2)).unwrap().same_subspace(&b));
        // P1 = (|00⟩⟨00| + |11⟩⟨11|) ⊗ I and P2 = |00⟩⟨00| ⊗ I + |100⟩⟨100| + |111⟩⟨111|
        let p1 = proj(&[ket("000"), ket("001"), ket("110"), ket("111")]);
        let p2 = proj(&[ket("000"), ket("001"), ket("100"), ket("111")]);
        let want = proj(&[ket("000"), ket("001"), ket("111")]);
        let m = p1.meet(&p2).unwrap();
        assert_eq!(m.rank(), 3);
        assert!(m.same_subspace(&want));
    }

    #[test]
    fn join_examples() {
        let z = proj(&[ket("0")]);
        assert!(z.join(&Projection::zero(1)).unwrap().same_subspace(&z));
        assert_eq!(z.join(&proj(&[ket("1")])).unwrap().rank(), 2);
        let plus = add(&ket("0"), &ket("1"), core::f64::consts::FRAC_1_SQRT_2);
        assert_eq!(z.join(&proj(&[plus])).unwrap().rank(), 2);
    }

    #[test]
    fn complement_examples() {
        assert!(Projection::zero(2).complement().same_subspace(&Projection::identity(2)));
        assert!(proj(&[ket("0")]).complement().same_subspace(&proj(&[ket("1")])));
        let b = proj(&[bell()]);
        let bc = b.complement();
        assert_eq!(bc.rank(), 3);
        assert!((&bc.frame().adjoint() * b.frame()).frobenius_norm() < 1e-9);
        assert!(bc.complement().same_subspace(&b));
    }

    #[test]
    fn embed_examples() {
        let z = proj(&[ket("0")]);
        let e = z.embed(&[0], 2).unwrap();
        assert_eq!(e.rank(), 2);
        assert!(e.as_matrix().max_abs_diff(&kron(&z.as_matrix(), &ComplexMatrix::identity(2))) < 1e-12);
        let o = proj(&[ket("1")]);
        let e = o.embed(&[1], 2).unwrap();
        assert!(e.as_matrix().max_abs_diff(&kron(&ComplexMatrix::identity(2), &o.as_matrix())) < 1e-12);
        assert!(matches!(z.embed(&[2], 2), Err(ProjectionError::IndexOutOfRange { .. })));
        assert!(matches!(proj(&[bell()]).embed(&[1, 1], 2), Err(ProjectionError::DuplicateIndex(1))));
    }

    #[test]
    fn satisfaction_and_violation() {
        let b = proj(&[bell()]);
        let rho = StateVector::new(bell()).unwrap().to_density();
        assert!(b.satisfies(&rho).unwrap());
        assert_eq!(b.violation(&rho).unwrap(), 0.0);
        let z = proj(&[ket("0")]);
        let one = StateVector::basis(1, 1).to_density();
        assert!(!z.satisfies(&one).unwrap());
        assert!((z.violation(&one).unwrap() - 1.0).abs() < 1e-12);
        assert!(!z.satisfies(&DensityOperator::maximally_mixed(1)).unwrap());
        let plus = StateVector::new(add(&ket("0"), &ket("1"), core::f64::consts::FRAC_1_SQRT_2)).unwrap();
        assert!((z.violation(&plus.to_density()).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn support_examples() {
        let z = proj(&[ket("0")]);
        assert!(support(&z.as_matrix()).unwrap().same_subspace(&z));
        assert_eq!(support(&DensityOperator::maximally_mixed(1).into_matrix()).unwrap().rank(), 2);
        let plus = proj(&[add(&ket("0"), &ket("1"), core::f64::consts::FRAC_1_SQRT_2)]);
        let mix = &z.as_matrix().scale_real(0.7) + &plus.as_matrix().scale_real(0.3);
        assert_eq!(support(&mix).unwrap().rank(), 2);
        assert!(matches!(support(&ComplexMatrix::diag_real(&[1.0, -0.1])), Err(ProjectionError::NotPsd { .. })));
    }

    fn local_example() -> Projection {
        // |+⟩|111⟩, |000⟩|−⟩, |0⟩(|00⟩+|11⟩)|1⟩/√2 on q1..q4
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let psi1 = add(&ket("0111"), &ket("1111"), s);
        let psi2: Vec<C64> = ket("0000").iter().zip(ket("0001")).map(|(a, b)| (a - b) * s).collect();
        let psi3 = add(&ket("0001"), &ket("0111"), s);
        proj(&[psi1, psi2, psi3])
    }

    #[test]
    fn local_projection_examples() {
        let p = local_example();
        assert_eq!(p.rank(), 3);
        let p12 = p.local_projection(&[0, 1]).unwrap();
        assert!(p12.same_subspace(&proj(&[ket("00"), ket("01"), ket("11")])));
        let p23 = p.local_projection(&[1, 2]).unwrap();
        assert!(p23.same_subspace(&proj(&[ket("00"), ket("11")])));
        let b = proj(&[bell()]);
        let wide = b.tensor(&Projection::identity(1));
        assert!(wide.local_projection(&[0, 1]).unwrap().same_subspace(&b));
        assert!(matches!(p.local_projection(&[]), Err(ProjectionError::EmptyKeepSet)));
    }
}
