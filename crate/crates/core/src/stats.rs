//! Confidence intervals and error budgets for assertion-based debugging.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("alpha must lie strictly between 0 and 1 (got {0})")]
    BadAlpha(f64),
    #[error("at least one shot is required")]
    ZeroShots,
    #[error("invalid arguments: {0}")]
    BadArgs(&'static str),
    #[error("site {site}: only {remaining} shots remain after upstream failures, cannot form the beta shape")]
    ShapeUnderflow { site: usize, remaining: i64 },
}

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.05;

const CF_MAX_ITER: usize = 10_000;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;

/// Clopper–Pearson interval `(0, 1 − (α/2)^{1/k})` after `k` shots without failure.
pub fn cp_zero_interval(k: u64, alpha: f64) -> Result<(f64, f64), StatsError> {
    check_alpha(alpha)?;
    if k == 0 {
        return Err(StatsError::ZeroShots);
    }
    Ok((0.0, -((alpha / 2.0).ln() / k as f64).exp_m1()))
}

/// Two-sided Clopper–Pearson interval for `failures` out of `trials`.
pub fn cp_interval(failures: u64, trials: u64, alpha: f64) -> Result<(f64, f64), StatsError> {
    check_alpha(alpha)?;
    if trials == 0 {
        return Err(StatsError::ZeroShots);
    }
    if failures > trials {
        return Err(StatsError::BadArgs("more failures than trials"));
    }
    if failures == 0 {
        return cp_zero_interval(trials, alpha);
    }
    let (x, n) = (failures as f64, trials as f64);
    let lo = beta_quantile(alpha / 2.0, x, n - x + 1.0)?;
    let hi = if failures == trials { 1.0 } else { beta_quantile(1.0 - alpha / 2.0, x + 1.0, n - x)? };
    Ok((lo, hi))
}

fn check_alpha(alpha: f64) -> Result<(), StatsError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(StatsError::BadAlpha(alpha))
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

/// Continued fraction of the incomplete beta function (modified Lentz).
fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let guard = |v: f64| if v.abs() < CF_TINY { CF_TINY } else { v };
    let mut c = 1.0;
    let mut d = 1.0 / guard(1.0 - qab * x / qap);
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 / guard(1.0 + aa * d);
        c = guard(1.0 + aa / c);
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
    if x <= a / (a + b) {
        ln_front.exp() * beta_cf(x, a, b) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(1.0 - x, b, a) / b
    }
}

/// The `p`-quantile of Beta(a, b), found by bisection on the CDF.
pub fn beta_quantile(p: f64, a: f64, b: f64) -> Result<f64, StatsError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(StatsError::BadArgs("quantile level must lie in (0, 1)"));
    }
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return Err(StatsError::BadArgs("beta shapes must be positive"));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if regularized_incomplete_beta(mid, a, b) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Trace-distance and fidelity intervals after `k` passing shots through `l` assertions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Theorem1 {
    /// Upper end of `[0, d_hi]`.
    pub d_hi: f64,
    /// Lower end of `[f_lo, 1]`.
    pub f_lo: f64,
    /// `k ≥ 100·l²`, the regime where the large-`k` forms apply.
    pub well_sampled: bool,
}

/// `d_hi = (0.9 l + √l)/√k`, `f_lo = cos d_hi`.
pub fn theorem1_intervals(l: u64, k: u64) -> Result<Theorem1, StatsError> {
    if l == 0 || k == 0 {
        return Err(StatsError::BadArgs("l and k must be positive"));
    }
    let (lf, kf) = (l as f64, k as f64);
    let d_hi = (0.9 * lf + lf.sqrt()) / kf.sqrt();
    Ok(Theorem1 { d_hi, f_lo: d_hi.cos(), well_sampled: kf >= 100.0 * lf * lf })
}

/// Failure counts per assertion site, in program order, over `shots` runs.
#[derive(Clone, Debug, PartialEq)]
pub struct AssertionCounts {
    pub failures: Vec<u64>,
    pub shots: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Incorrect,
    Correct,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Incorrect => "incorrect",
            Verdict::Correct => "correct",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Interval for the error rate of one program segment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentVerdict {
    pub w_minus: f64,
    pub w_center: f64,
    pub w_plus: f64,
    pub epsilon: Option<f64>,
    /// Present when a tolerance `epsilon` was declared.
    pub verdict: Option<Verdict>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Theorem2Report {
    pub segments: Vec<SegmentVerdict>,
    /// Error parameter with which the final state approximately satisfies the last predicate.
    pub delta: f64,
}

/// Per-segment beta intervals, verdicts and the accumulated error budget δ.
///
/// Segment `m` uses Beta(k_m + 1, k − Σ_{i≤m} k_i) at levels `α/2`, `½` and
/// `1 − α/2`. A declared tolerance below `w⁻` makes the segment incorrect, one
/// above `w⁺` correct.
pub fn theorem2_report(
    counts: &AssertionCounts,
    epsilons: Option<&[f64]>,
    alpha: f64,
) -> Result<Theorem2Report, StatsError> {
    check_alpha(alpha)?;
    if counts.shots == 0 {
        return Err(StatsError::ZeroShots);
    }
    if counts.failures.is_empty() {
        return Err(StatsError::BadArgs("at least one assertion site is required"));
    }
    if let Some(eps) = epsilons {
        if eps.len() != counts.failures.len() {
            return Err(StatsError::BadArgs("one tolerance per assertion site is required"));
        }
        if eps.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(StatsError::BadArgs("tolerances must lie in [0, 1]"));
        }
    }
    let mut segments = Vec::with_capacity(counts.failures.len());
    let mut seen: u64 = 0;
    for (m, &km) in counts.failures.iter().enumerate() {
        seen = seen.saturating_add(km);
        let remaining = counts.shots as i64 - seen as i64;
        if remaining < 1 {
            return Err(StatsError::ShapeUnderflow { site: m, remaining });
        }
        let (a, b) = (km as f64 + 1.0, remaining as f64);
        let w_minus = beta_quantile(alpha / 2.0, a, b)?;
        let w_center = beta_quantile(0.5, a, b)?;
        let w_plus = beta_quantile(1.0 - alpha / 2.0, a, b)?;
        let epsilon = epsilons.map(|e| e[m]);
        let verdict = epsilon.map(|e| {
            if e < w_minus {
                Verdict::Incorrect
            } else if e > w_plus {
                Verdict::Correct
            } else {
                Verdict::Inconclusive
            }
        });
        segments.push(SegmentVerdict { w_minus, w_center, w_plus, epsilon, verdict });
    }
    let centers: f64 = segments.iter().map(|s| s.w_center.sqrt()).sum();
    let spread: f64 = segments.iter().map(|s| (s.w_plus.sqrt() - s.w_center.sqrt()).powi(2)).sum();
    Ok(Theorem2Report { segments, delta: centers + spread.sqrt() })
}

/// Gentle-measurement bounds for a projection passed with probability `1 − eps`:
/// trace distance `≤ eps + √(eps(1 − eps))`, fidelity `≥ √(1 − eps)`.
pub fn gentle_bounds(eps: f64) -> Result<(f64, f64), StatsError> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(StatsError::BadArgs("eps must lie in [0, 1]"));
    }
    Ok((eps + (eps * (1.0 - eps)).sqrt(), (1.0 - eps).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn cp_zero_examples() {
        let (lo, hi) = cp_zero_interval(100, 0.05).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.025f64.powf(0.01))).abs() < 1e-15);
        assert!((hi - 0.0362167).abs() < 1e-7);
        assert!((cp_zero_interval(1, 0.05).unwrap().1 - 0.975).abs() < 1e-15);
        let hi = cp_zero_interval(1_000_000, 0.05).unwrap().1;
        assert!((hi - 3.68887e-6).abs() < 1e-10);
        assert_eq!(cp_zero_interval(0, 0.05), Err(StatsError::ZeroShots));
        assert!(matches!(cp_zero_interval(10, 1.5), Err(StatsError::BadAlpha(_))));
    }

    #[test]
    fn cp_interval_examples() {
        assert_eq!(cp_interval(0, 100, 0.05).unwrap(), cp_zero_interval(100, 0.05).unwrap());
        let (lo, hi) = cp_interval(100, 100, 0.05).unwrap();
        assert!((lo - 0.025f64.powf(0.01)).abs() < 1e-12);
        assert_eq!(hi, 1.0);
        let (lo, hi) = cp_interval(5, 10, 0.05).unwrap();
        assert!((lo - 0.187086).abs() < 1e-6 && (hi - 0.812914).abs() < 1e-6, "{lo} {hi}");
        assert!(cp_interval(11, 10, 0.05).is_err());
    }

    #[test]
    fn beta_quantile_examples() {
        assert!((beta_quantile(0.5, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-12);
        let want = 1.0 - 0.5f64.powf(1.0 / 101.0);
        assert!((beta_quantile(0.5, 1.0, 101.0).unwrap() - want).abs() < 1e-12);
        let cp = cp_zero_interval(100, 0.05).unwrap().1;
        assert!((beta_quantile(0.975, 1.0, 100.0).unwrap() - cp).abs() < 1e-12);
        assert!(beta_quantile(0.0, 1.0, 1.0).is_err());
        assert!(beta_quantile(0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn incomplete_beta_symmetry() {
        for &(x, a, b) in &[(0.3, 2.0, 5.0), (0.8, 11.0, 90.0), (0.01, 3.0, 400.0)] {
            let lhs = regularized_incomplete_beta(x, a, b);
            let rhs = 1.0 - regularized_incomplete_beta(1.0 - x, b, a);
            assert!((lhs - rhs).abs() < 1e-12);
        }
        // I_x(2, 2) = 3x² − 2x³
        let x = 0.3;
        assert!((regularized_incomplete_beta(x, 2.0, 2.0) - (3.0 * x * x - 2.0 * x * x * x)).abs() < 1e-14);
    }

    #[test]
    fn theorem1_examples() {
        let t = theorem1_intervals(4, 10_000).unwrap();
        assert!((t.d_hi - 0.056).abs() < 1e-15);
        assert!((t.f_lo - 0.056f64.cos()).abs() < 1e-15);
        assert!((theorem1_intervals(1, 100_000_000).unwrap().d_hi - 1.9e-4).abs() < 1e-15);
        assert!((theorem1_intervals(1, 100).unwrap().d_hi - 0.19).abs() < 1e-15);
        assert!(theorem1_intervals(0, 10).is_err());
    }

    #[test]
    fn theorem2_examples() {
        let counts = AssertionCounts { failures: vec![0], shots: 100 };
        let r = theorem2_report(&counts, None, DEFAULT_ALPHA).unwrap();
        let s = r.segments[0];
        assert!((s.w_minus - 2.5315e-4).abs() < 1e-7);
        assert!((s.w_center - 6.9075e-3).abs() < 1e-6);
        assert!((s.w_plus - 0.0362167).abs() < 1e-6);
        assert!((r.delta - 0.19025).abs() < 1e-4);
        assert!((r.delta - s.w_plus.sqrt()).abs() < 1e-12);
        assert_eq!(s.verdict, None);

        let counts = AssertionCounts { failures: vec![10], shots: 100 };
        let r = theorem2_report(&counts, Some(&[0.01]), DEFAULT_ALPHA).unwrap();
        assert_eq!(r.segments[0].verdict, Some(Verdict::Incorrect));
        assert!(r.segments[0].w_minus > 0.05);

        let counts = AssertionCounts { failures: vec![0], shots: 100 };
        let r = theorem2_report(&counts, Some(&[0.5]), DEFAULT_ALPHA).unwrap();
        assert_eq!(r.segments[0].verdict, Some(Verdict::Correct));

        let counts = AssertionCounts { failures: vec![0, 101], shots: 100 };
        assert!(matches!(theorem2_report(&counts, None, DEFAULT_ALPHA), Err(StatsError::ShapeUnderflow { site: 1, .. })));
    }

    #[test]
    fn theorem2_vanishes_with_evidence() {
        let counts = AssertionCounts { failures: vec![0, 0, 0], shots: 100_000_000 };
        let r = theorem2_report(&counts, None, DEFAULT_ALPHA).unwrap();
        assert!(r.delta < 1e-3);
    }

    #[test]
    fn gentle_examples() {
        assert_eq!(gentle_bounds(0.0).unwrap(), (0.0, 1.0));
        assert_eq!(gentle_bounds(1.0).unwrap(), (1.0, 0.0));
        let (d, f) = gentle_bounds(0.01).unwrap();
        assert!((d - 0.109499).abs() < 1e-6);
        assert!((f - 0.994987).abs() < 1e-6);
        assert!(gentle_bounds(1.5).is_err());
    }
}
