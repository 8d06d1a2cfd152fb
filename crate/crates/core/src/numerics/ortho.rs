use alloc::vec::Vec;


use super::matrix::{inner, norm, ComplexMatrix, C64};
use super::NumericsError;

/// Orthonormality tolerance for frames handed to [`orthonormal_complement`].
pub const ORTHONORMAL_TOL: f64 = 1e-9;

/// Pivot ties: candidates within this relative margin of the best residual are
/// resolved by lowest index.
const PIVOT_TIE: f64 = 1e-9;

/// Orthonormal basis for the column space of `m`.
///
/// Column-pivoted Gram–Schmidt: at each step the remaining column with the
/// largest residual is taken (ties go to the lowest index); directions whose
/// residual falls to `tol` times the largest input column norm are dropped.
/// The column count of the result is the numerical rank of `m`.
pub fn orthonormal_columns(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let rows = m.rows();
    let mut residuals: Vec<Vec<C64>> = m.columns();
    let scale = residuals.iter().map(|c| norm(c)).fold(0.0, f64::max);
    if scale == 0.0 {
        return ComplexMatrix::zeros(rows, 0);
    }
    let threshold = tol * scale;
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alive: Vec<bool> = residuals.iter().map(|_| true).collect();

    while basis.len() < rows {
        let Some(pick) = pick_pivot(&residuals, &alive, threshold) else {
            break;
        };
        alive[pick] = false;
        let mut q = residuals[pick].clone();
        // second orthogonalization pass against the accepted basis
        for b in &basis {
            let c = inner(b, &q);
            for (x, y) in q.iter_mut().zip(b) {
                *x -= y * c;
            }
        }
        let nq = norm(&q);
        if nq <= threshold {
            continue;
        }
        for x in q.iter_mut() {
            *x /= nq;
        }
        for (r, live) in residuals.iter_mut().zip(&alive) {
            if *live {
                let c = inner(&q, r);
                for (x, y) in r.iter_mut().zip(&q) {
                    *x -= y * c;
                }
            }
        }
        basis.push(q);
    }
    ComplexMatrix::from_columns(rows, &basis)
}

fn pick_pivot(residuals: &[Vec<C64>], alive: &[bool], threshold: f64) -> Option<usize> {
    let norms: Vec<f64> = residuals
        .iter()
        .zip(alive)
        .map(|(r, &a)| if a { norm(r) } else { -1.0 })
        .collect();
    let best = norms.iter().copied().fold(-1.0, f64::max);
    if best <= threshold {
        return None;
    }
    norms.iter().position(|&x| x >= best * (1.0 - PIVOT_TIE))
}

/// Orthonormal basis of the orthogonal complement of the column space of `b`.
///
/// `b` must have orthonormal columns. Candidates are the standard basis vectors
/// with `b` projected out; they are Gram–Schmidt'ed with the same pivoting rule
/// as [`orthonormal_columns`] until the dimensions add up.
pub fn orthonormal_complement(b: &ComplexMatrix) -> Result<ComplexMatrix, NumericsError> {
    let deviation = b.orthonormality_deviation();
    if deviation > ORTHONORMAL_TOL {
        return Err(NumericsError::NotOrthonormal { deviation });
    }
    let dim = b.rows();
    let want = dim.saturating_sub(b.cols());
    let frame = b.columns();

    let mut residuals: Vec<Vec<C64>> = (0..dim)
        .map(|i| {
            let mut e: Vec<C64> = (0..dim).map(|r| C64::new(if r == i { 1.0 } else { 0.0 }, 0.0)).collect();
            for _ in 0..2 {
                for f in &frame {
                    let c = inner(f, &e);
                    for (x, y) in e.iter_mut().zip(f) {
                        *x -= y * c;
                    }
                }
            }
            e
        })
        .collect();
    let mut alive = alloc::vec![true; dim];
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(want);

    while basis.len() < want {
        let Some(pick) = pick_pivot(&residuals, &alive, 1e-9) else {
            break;
        };
        alive[pick] = false;
        let mut q = residuals[pick].clone();
        for f in frame.iter().chain(basis.iter()) {
            let c = inner(f, &q);
            for (x, y) in q.iter_mut().zip(f) {
                *x -= y * c;
            }
        }
        let nq = norm(&q);
        for x in q.iter_mut() {
            *x /= nq;
        }
        for (r, live) in residuals.iter_mut().zip(&alive) {
            if *live {
                let c = inner(&q, r);
                for (x, y) in r.iter_mut().zip(&q) {
                    *x -= y * c;
                }
            }
        }
        basis.push(q);
    }
    Ok(ComplexMatrix::from_columns(dim, &basis))
}
