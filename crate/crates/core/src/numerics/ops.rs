use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::eig::hermitian_eig;
use super::matrix::{ComplexMatrix, C64, ZERO};
use super::NumericsError;

/// Eigenvalues below this are a PSD violation; those in `[-PSD_TOL, 0)` are clamped.
pub const PSD_TOL: f64 = 1e-9;

/// Bit position in a basis-state index of `qubit` in an `n`-qubit register
/// (qubit 0 is the most significant bit).
#[inline]
pub fn bit_of(qubit: usize, n: usize) -> usize {
    n - 1 - qubit
}

/// For a local operator on `qubits`, the global index offset of every local
/// basis state (first listed qubit = most significant local bit).
pub fn local_offsets(qubits: &[usize], n: usize) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|j| {
            qubits
                .iter()
                .enumerate()
                .filter(|&(t, _)| (j >> (k - 1 - t)) & 1 == 1)
                .map(|(_, &q)| 1usize << bit_of(q, n))
                .sum()
        })
        .collect()
}

fn target_mask(qubits: &[usize], n: usize) -> usize {
    qubits.iter().map(|&q| 1usize << bit_of(q, n)).fold(0, |a, b| a | b)
}

/// Applies a `2^k × 2^k` operator acting on `qubits` to an `n`-qubit amplitude
/// vector in place. The operator need not be unitary.
pub fn apply_local(state: &mut [C64], n: usize, op: &ComplexMatrix, qubits: &[usize]) {
    let k = qubits.len();
    let local = 1usize << k;
    debug_assert_eq!(state.len(), 1usize << n);
    assert_eq!(op.rows(), local, "operator size does not match qubit count");
    let offsets = local_offsets(qubits, n);
    let mask = target_mask(qubits, n);
    let mut gathered = vec![ZERO; local];
    for base in 0..state.len() {
        if base & mask != 0 {
            continue;
        }
        for (g, off) in gathered.iter_mut().zip(&offsets) {
            *g = state[base + off];
        }
        for (r, off) in offsets.iter().enumerate() {
            state[base + off] = op.row(r).iter().zip(&gathered).map(|(a, b)| a * b).sum();
        }
    }
}

/// `ρ ← op·ρ·opᴴ` for a local operator on `qubits` of an `n`-qubit density matrix.
pub fn conjugate_local(rho: &mut ComplexMatrix, n: usize, op: &ComplexMatrix, qubits: &[usize]) {
    let d = rho.rows();
    let mut col = vec![ZERO; d];
    for j in 0..d {
        for (i, c) in col.iter_mut().enumerate() {
            *c = rho[(i, j)];
        }
        apply_local(&mut col, n, op, qubits);
        for (i, c) in col.iter().enumerate() {
            rho[(i, j)] = *c;
        }
    }
    let op_conj = ComplexMatrix::from_fn(op.rows(), op.cols(), |i, j| op[(i, j)].conj());
    let data = rho.data_mut();
    for i in 0..d {
        apply_local(&mut data[i * d..(i + 1) * d], n, &op_conj, qubits);
    }
}

/// Embeds a local operator on `qubits` into the full `2^n`-dimensional space.
pub fn embed_operator(op: &ComplexMatrix, qubits: &[usize], n: usize) -> ComplexMatrix {
    let d = 1usize << n;
    let mut out = ComplexMatrix::zeros(d, d);
    let mut col = vec![ZERO; d];
    for j in 0..d {
        col.iter_mut().for_each(|c| *c = ZERO);
        col[j] = C64::new(1.0, 0.0);
        apply_local(&mut col, n, op, qubits);
        for (i, c) in col.iter().enumerate() {
            out[(i, j)] = *c;
        }
    }
    out
}

/// Partial trace keeping the qubits in `keep` (taken in ascending order) of an
/// operator on `qubit_count` qubits.
pub fn partial_trace(a: &ComplexMatrix, qubit_count: usize, keep: &[usize]) -> Result<ComplexMatrix, NumericsError> {
    let d = 1usize << qubit_count;
    if a.rows() != d || a.cols() != d {
        return Err(NumericsError::DimensionMismatch { expected: d, found: a.rows() });
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&q| q >= qubit_count) {
        return Err(NumericsError::BadQubitSet);
    }
    let traced: Vec<usize> = (0..qubit_count).filter(|q| !kept.contains(q)).collect();
    let keep_off = local_offsets(&kept, qubit_count);
    let trace_off = local_offsets(&traced, qubit_count);
    let dk = keep_off.len();
    let mut out = ComplexMatrix::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = ZERO;
            for t in &trace_off {
                acc += a[(keep_off[i] + t, keep_off[j] + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// The unique positive semidefinite square root of a Hermitian PSD matrix.
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    let eig = hermitian_eig(a)?;
    if let Some(&min) = eig.values.last() {
        if min < -PSD_TOL {
            return Err(NumericsError::NotPsd { min_eigenvalue: min });
        }
    }
    Ok(eig.map(|l| C64::new(l.max(0.0).sqrt(), 0.0)))
}

/// `psd_sqrt` that clamps any negative eigenvalue to zero; used internally on
/// matrices that are PSD up to rounding.
pub(crate) fn psd_sqrt_clamped(a: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    let eig = hermitian_eig(a)?;
    Ok(eig.map(|l| C64::new(l.max(0.0).sqrt(), 0.0)))
}

/// Integer `log₂` when `x` is a power of two.
pub fn exact_log2(x: usize) -> Option<usize> {
    if x.is_power_of_two() {
        Some(x.trailing_zeros() as usize)
    } else {
        None
    }
}
