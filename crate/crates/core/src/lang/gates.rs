//! Built-in gate matrices (first listed qubit = most significant bit).

use core::f64::consts::{FRAC_1_SQRT_2, PI};

#[allow(unused_imports)]
use num_traits::Float;

use super::ast::Builtin;
use crate::numerics::{ComplexMatrix, C64};

pub fn hadamard() -> ComplexMatrix {
    let s = FRAC_1_SQRT_2;
    ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]])
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

/// Permutation matrix sending basis state `j` to `f(j)`.
fn permutation(dim: usize, f: impl Fn(usize) -> usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim, dim);
    for j in 0..dim {
        m[(f(j), j)] = C64::new(1.0, 0.0);
    }
    m
}

pub fn cnot() -> ComplexMatrix {
    permutation(4, |j| if j & 2 != 0 { j ^ 1 } else { j })
}

pub fn swap() -> ComplexMatrix {
    permutation(4, |j| ((j & 1) << 1) | (j >> 1))
}

pub fn toffoli() -> ComplexMatrix {
    permutation(8, |j| if j & 6 == 6 { j ^ 1 } else { j })
}

/// Controlled swap: control is the first qubit.
pub fn fredkin() -> ComplexMatrix {
    permutation(8, |j| if j & 4 != 0 { 4 | ((j & 1) << 1) | ((j >> 1) & 1) } else { j })
}

/// `|j⟩ ↦ 2^{-k/2} Σ_τ e^{±2πi jτ/2^k} |τ⟩` on `k` qubits (`+` for the forward transform).
pub fn fourier(k: usize, inverse: bool) -> ComplexMatrix {
    let dim = 1usize << k;
    let sign = if inverse { -1.0 } else { 1.0 };
    let norm = 1.0 / (dim as f64).sqrt();
    ComplexMatrix::from_fn(dim, dim, |tau, j| {
        let angle = sign * 2.0 * PI * ((j * tau) % dim) as f64 / dim as f64;
        C64::new(angle.cos() * norm, angle.sin() * norm)
    })
}

/// Matrix of a built-in gate acting on `arity` qubits.
pub fn builtin_matrix(gate: Builtin, arity: usize) -> ComplexMatrix {
    match gate {
        Builtin::H => hadamard(),
        Builtin::X => pauli_x(),
        Builtin::Cnot => cnot(),
        Builtin::Swap => swap(),
        Builtin::Toffoli => toffoli(),
        Builtin::Fredkin => fredkin(),
        Builtin::Qft => fourier(arity, false),
        Builtin::Iqft => fourier(arity, true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::kron;

    #[test]
    fn builtins_are_unitary() {
        for m in [hadamard(), pauli_x(), cnot(), swap(), toffoli(), fredkin(), fourier(3, false), fourier(2, true)] {
            assert!(m.is_unitary(1e-12));
        }
        assert!((&fourier(3, false) * &fourier(3, true)).max_abs_diff(&ComplexMatrix::identity(8)) < 1e-12);
    }

    #[test]
    fn cnot_matches_block_form() {
        let p0 = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let p1 = ComplexMatrix::diag_real(&[0.0, 1.0]);
        let want = &kron(&p0, &ComplexMatrix::identity(2)) + &kron(&p1, &pauli_x());
        assert_eq!(cnot(), want);
    }

    #[test]
    fn fredkin_swaps_targets_when_control_set() {
        let f = fredkin();
        // |101⟩ ↦ |110⟩
        assert_eq!(f[(6, 5)], C64::new(1.0, 0.0));
        assert_eq!(f[(3, 3)], C64::new(1.0, 0.0));
        // |110⟩ ↦ |111⟩ for Toffoli
        assert_eq!(toffoli()[(7, 6)], C64::new(1.0, 0.0));
    }

    #[test]
    fn single_qubit_fourier_is_hadamard() {
        assert!(fourier(1, false).max_abs_diff(&hadamard()) < 1e-15);
    }
}
