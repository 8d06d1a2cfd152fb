use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

#[allow(unused_imports)]
use num_traits::Float;

use super::CaseError;
use crate::fmt::{fmt_sig, round_sig, SIG_DIGITS};
use crate::lang::{parse_program, Program};
use crate::numerics::{hermitian_eig, orthonormal_complement, ComplexMatrix, C64};

/// The 4×4 system matrix as printed (three decimals).
pub const HHL_A: [[f64; 4]; 4] = [
    [1.951, -0.863, 0.332, -0.377],
    [-0.863, 2.239, -0.011, -0.444],
    [0.332, -0.011, 1.301, -0.634],
    [-0.377, -0.444, -0.634, 2.509],
];

/// Right-hand side as printed.
pub const HHL_B: [f64; 4] = [-0.486, -0.345, -0.494, -0.633];

/// Evolution time: with `t₀ = 2π` the phase register reads the eigenvalues directly.
pub const HHL_T0: f64 = 2.0 * core::f64::consts::PI;

/// Rotation constant of the controlled-rotation step.
pub const HHL_C: f64 = 1.0;

const EIG_TOL: f64 = 0.02;
const TARGET_EIGENVALUES: [f64; 4] = [3.0, 3.0, 1.0, 1.0];
/// Size of the phase register's range, `2^n` with `n = 2`.
const T: usize = 4;

/// Derived quantities of the HHL instance.
#[derive(Clone, Debug, PartialEq)]
pub struct HhlData {
    /// Eigenvalues of the printed matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// The printed matrix with its eigenvalues snapped to `{1, 3}`.
    pub a_ideal: ComplexMatrix,
    pub b: Vec<f64>,
    /// Normalized solution of `A_ideal x = b`; the state the program prepares.
    pub x: Vec<f64>,
    pub u_b: ComplexMatrix,
    pub u_f: ComplexMatrix,
    pub u_c: ComplexMatrix,
    pub u_x: ComplexMatrix,
    pub u_r: ComplexMatrix,
}

fn clean(x: f64) -> f64 {
    if x.abs() < 1e-14 {
        0.0
    } else {
        round_sig(x, SIG_DIGITS)
    }
}

fn rounded(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| C64::new(clean(m[(i, j)].re), clean(m[(i, j)].im)))
}

/// Unitary whose first column is `v` (unit norm, real).
fn completion(v: &[f64]) -> ComplexMatrix {
    let col = ComplexMatrix::column_vector(&v.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
    col.hstack(&orthonormal_complement(&col).expect("unit vector"))
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// HHL data for the printed instance.
pub fn hhl_data() -> Result<HhlData, CaseError> {
    build_data(&HHL_A, &HHL_B)
}

fn build_data(a: &[[f64; 4]; 4], b: &[f64; 4]) -> Result<HhlData, CaseError> {
    let rows: Vec<&[f64]> = a.iter().map(|r| r.as_slice()).collect();
    let a = ComplexMatrix::from_real_rows(&rows);
    let eig = hermitian_eig(&a).expect("symmetric matrix");
    let eigenvalues = eig.values.clone();
    if eigenvalues.iter().zip(TARGET_EIGENVALUES).any(|(l, t)| (l - t).abs() > EIG_TOL) {
        return Err(CaseError::EigenvalueMismatch { found: eigenvalues, tolerance: EIG_TOL });
    }
    let a_ideal = eig.map(|l| C64::new(l.round(), 0.0));
    let b = normalize(b);
    let inverse = eig.map(|l| C64::new(1.0 / l.round(), 0.0));
    let x = normalize(
        &inverse.apply(&b.iter().map(|&v| C64::new(v, 0.0)).collect::<Vec<_>>()).iter().map(|z| z.re).collect::<Vec<_>>(),
    );

    let u_b = completion(&b);
    let u_x = completion(&x).adjoint();

    // controlled phase evolution: block τ is exp(i A τ t₀ / T)
    let mut u_f = ComplexMatrix::zeros(4 * T, 4 * T);
    for tau in 0..T {
        let block = eig.map(|l| {
            let angle = l.round() * tau as f64 * HHL_T0 / T as f64;
            C64::new(angle.cos(), angle.sin())
        });
        for i in 0..4 {
            for j in 0..4 {
                u_f[(tau * 4 + i, tau * 4 + j)] = block[(i, j)];
            }
        }
    }

    // p-controlled rotation of r: sin(θ/2) = C / i for p = i ≥ 1
    let mut u_c = ComplexMatrix::identity(2 * T);
    for i in 1..T {
        let c = HHL_C / i as f64;
        let s = (1.0 - c * c).sqrt();
        u_c[(2 * i, 2 * i)] = C64::new(s, 0.0);
        u_c[(2 * i, 2 * i + 1)] = C64::new(-c, 0.0);
        u_c[(2 * i + 1, 2 * i)] = C64::new(c, 0.0);
        u_c[(2 * i + 1, 2 * i + 1)] = C64::new(s, 0.0);
    }

    // wires r, q (two qubits), a: flip a when r = 1 and q ≠ 0
    let u_r = ComplexMatrix::from_fn(16, 16, |i, j| {
        let (r, q) = (j >> 3, (j >> 1) & 3);
        let target = if r == 1 && q >= 1 { j ^ 1 } else { j };
        C64::new(if i == target { 1.0 } else { 0.0 }, 0.0)
    });

    Ok(HhlData { eigenvalues, a_ideal, b, x, u_b, u_f, u_c, u_x, u_r })
}

fn fmt_complex(z: C64) -> String {
    let (re, im) = (z.re, z.im);
    if im == 0.0 {
        fmt_sig(re)
    } else if re == 0.0 {
        format!("{}i", fmt_sig(im))
    } else {
        let op = if im < 0.0 { '-' } else { '+' };
        format!("{}{op}{}i", fmt_sig(re), fmt_sig(im.abs()))
    }
}

fn defgate(out: &mut String, name: &str, m: &ComplexMatrix) {
    let m = rounded(m);
    let rows: Vec<String> = (0..m.rows())
        .map(|r| {
            let entries: Vec<String> = m.row(r).iter().map(|z| fmt_complex(*z)).collect();
            format!("[{}]", entries.join(", "))
        })
        .collect();
    let _ = writeln!(out, "defgate {name} = [{}];", rows.join(",\n    "));
}

fn ket_x(x: &[f64]) -> String {
    let labels = ["00", "01", "10", "11"];
    let mut out = String::new();
    for (i, (&c, l)) in x.iter().zip(labels).enumerate() {
        let c = clean(c);
        let sep = match (i, c < 0.0) {
            (0, true) => "-",
            (0, false) => "",
            (_, true) => " - ",
            (_, false) => " + ",
        };
        let _ = write!(out, "{sep}{}*|{l}>", fmt_sig(c.abs()));
    }
    out
}

/// Text of the HHL program for `data`; matrices are written to 12 significant digits.
pub fn hhl_source(data: &HhlData) -> String {
    let mut out = String::new();
    out.push_str("# HHL for a 4x4 system (p = q0..q1, q = q2..q3, r = q4)\nqubits 5;\n");
    defgate(&mut out, "UB", &data.u_b);
    defgate(&mut out, "UF", &data.u_f);
    defgate(&mut out, "UFdg", &data.u_f.adjoint());
    defgate(&mut out, "UC", &data.u_c);
    defgate(&mut out, "UX", &data.u_x);
    defgate(&mut out, "UXdg", &data.u_x.adjoint());
    defgate(&mut out, "UR", &data.u_r);
    let x = ket_x(&data.x);
    let _ = write!(
        out,
        "\
init q0, q1, q2, q3, q4;
while measure(q4) in {{0}} cap 1000 {{
  assert P: span{{|00>}} (x) span{{|0>}} on q0, q1, q4 via {{
    check q0, q1, q4;
  }};
  init q2, q3;
  UB q2, q3;
  H q0;
  H q1;
  UF q0, q1, q2, q3;
  IQFT q0, q1;
  assert S: span{{|01>, |11>}} on q0, q1 via {{
    check q1 expect 1;
  }};
  UC q0, q1, q4;
  QFT q0, q1;
  UFdg q0, q1, q2, q3;
  H q0;
  H q1;
  assert R: span{{|00>}} (x) (span{{{x}}} (x) span{{|1>}} | I[2] (x) span{{|0>}}) on q0, q1, q2, q3, q4 via {{
    check q0, q1;
    UX q2, q3;
    UR q4, q2, q3, aux;
    check aux;
    UR q4, q2, q3, aux;
    UXdg q2, q3;
  }};
}}
assert Q: span{{{x}}} on q2, q3 via {{
  UX q2, q3;
  check q2, q3;
  UXdg q2, q3;
}};
"
    );
    out
}

/// The HHL program for the printed instance.
pub fn build_hhl() -> Result<Program, CaseError> {
    build_hhl_from(&HHL_A, &HHL_B)
}

/// The HHL program for another 4×4 instance with eigenvalues near `{1, 1, 3, 3}`.
pub fn build_hhl_from(a: &[[f64; 4]; 4], b: &[f64; 4]) -> Result<Program, CaseError> {
    let data = build_data(a, b)?;
    Ok(parse_program(&hhl_source(&data)).expect("generated program parses"))
}
