//! Fixed-significant-digit number formatting shared by every writer.

use num_complex::Complex64;

/// Significant digits emitted by the JSON and CSV writers.
pub const DEFAULT_DIGITS: usize = 17;

/// Formats `x` like C's `%.{digits}g`: `digits` significant digits, trailing
/// zeros stripped, scientific notation outside `[1e-5, 10^digits)`.
///
/// The output is always a valid JSON number for finite input.
pub fn format_sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = strip_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    strip_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `re`, or `re+imi` / `re-imi` when the imaginary part is nonzero.
pub fn format_complex(z: Complex64, digits: usize) -> String {
    let re = format_sig(z.re, digits);
    if z.im == 0.0 {
        return re;
    }
    let im = format_sig(z.im.abs(), digits);
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{re}{sign}{im}i")
}

/// A float that serializes to JSON with [`DEFAULT_DIGITS`] significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig17(pub f64);

impl serde::Serialize for Sig17 {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let raw = serde_json::value::RawValue::from_string(format_sig(self.0, DEFAULT_DIGITS))
            .map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}
