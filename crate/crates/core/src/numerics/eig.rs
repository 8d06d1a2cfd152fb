use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::matrix::{inner, norm, ComplexMatrix, C64, ZERO};
use super::NumericsError;

/// Entrywise tolerance for the Hermiticity precondition.
pub const HERMITIAN_TOL: f64 = 1e-9;

/// Relative width of an eigenvalue cluster treated as degenerate.
const CLUSTER_TOL: f64 = 1e-9;

const MAX_SWEEPS: usize = 100;

/// Spectral decomposition `a = V·diag(λ)·Vᴴ` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

impl Eigen {
    /// Rebuilds `V·diag(f(λ))·Vᴴ`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.vectors.rows();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == ZERO {
                continue;
            }
            let v = self.vectors.column(k);
            for i in 0..n {
                let vi = v[i] * w;
                for j in 0..n {
                    out[(i, j)] += vi * v[j].conj();
                }
            }
        }
        out
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Eigenvalues come back in descending order. Each eigenvector has its first
/// non-negligible component made real-positive, and degenerate eigenspaces are
/// re-expressed by projecting the standard basis in index order, so the output
/// is a deterministic function of the input.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<Eigen, NumericsError> {
    if !a.is_square() {
        return Err(NumericsError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let deviation = a.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(NumericsError::NotHermitian { deviation });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Eigen { values: Vec::new(), vectors: ComplexMatrix::zeros(0, 0) });
    }

    // symmetrize so the rotations see an exactly Hermitian input
    let mut m = ComplexMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap_or(core::cmp::Ordering::Equal).then(i.cmp(&j)));

    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut columns: Vec<Vec<C64>> = order.iter().map(|&i| v.column(i)).collect();

    canonicalize(&values, &mut columns);
    Ok(Eigen { values, vectors: ComplexMatrix::from_columns(n, &columns) })
}

/// One Jacobi rotation zeroing `m[p,q]`, accumulated into `v`.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = m[(p, q)];
    let mag = apq.norm();
    if mag < 1e-300 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let phase = apq / mag;

    // real Jacobi on [[app, mag], [mag, aqq]]
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // J = diag(1, e^{-iφ})·R with R = [[c, s], [-s, c]]
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;

    let n = m.rows();
    // M ← M·J
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * jpp + mkq * jqp;
        m[(k, q)] = mkp * jpq + mkq * jqq;
    }
    // M ← Jᴴ·M
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = jpp.conj() * mpk + jqp.conj() * mqk;
        m[(q, k)] = jpq.conj() * mpk + jqq.conj() * mqk;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
    // V ← V·J
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

fn canonicalize(values: &[f64], columns: &mut [Vec<C64>]) {
    let n = values.len();
    let spread = values.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[start] - values[end]).abs() <= CLUSTER_TOL * spread {
            end += 1;
        }
        if end - start > 1 {
            let basis = cluster_basis(&columns[start..end]);
            for (slot, b) in columns[start..end].iter_mut().zip(basis) {
                *slot = b;
            }
        }
        start = end;
    }
    for col in columns.iter_mut() {
        fix_phase(col);
    }
}

/// Canonical orthonormal basis of the span of `cluster`: project e₀, e₁, … onto
/// the span and Gram–Schmidt the survivors in index order.
fn cluster_basis(cluster: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let dim = cluster[0].len();
    let want = cluster.len();
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(want);
    for i in 0..dim {
        if out.len() == want {
            break;
        }
        // Π e_i = Σ_c c · conj(c_i)
        let mut w: Vec<C64> = (0..dim)
            .map(|r| cluster.iter().map(|c| c[r] * c[i].conj()).sum())
            .collect();
        for _ in 0..2 {
            for b in &out {
                let proj = inner(b, &w);
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= y * proj;
                }
            }
        }
        let nw = norm(&w);
        if nw > 1e-6 {
            for x in w.iter_mut() {
                *x /= nw;
            }
            out.push(w);
        }
    }
    // fall back to the raw vectors if the projection sweep lost directions
    if out.len() < want {
        return cluster.to_vec();
    }
    out
}

/// Rotates the global phase so the first component with modulus above 1e-12
/// (relative to the largest) is real and positive.
pub(crate) fn fix_phase(v: &mut [C64]) {
    let biggest = v.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if biggest == 0.0 {
        return;
    }
    if let Some(z) = v.iter().copied().find(|z| z.norm() > 1e-12 * biggest.max(1.0) && z.norm() > 1e-12) {
        let ph = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= ph;
        }
    }
}
