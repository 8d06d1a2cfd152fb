//! Number formatting shared by the program printer and report writers.

use alloc::format;
use alloc::string::String;

/// Significant digits used for every numeric value written to text.
pub const SIG_DIGITS: usize = 12;

/// Rounds `x` to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    let digits = digits.max(1);
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// `x` rounded to [`SIG_DIGITS`] significant digits, printed in the shortest
/// form that reads back to the rounded value.
pub fn fmt_sig(x: f64) -> String {
    let r = round_sig(x, SIG_DIGITS);
    if r == 0.0 {
        return String::from("0");
    }
    let plain = format!("{}", r);
    let sci = format!("{:e}", r);
    if plain.len() <= sci.len() {
        plain
    } else {
        sci
    }
}
