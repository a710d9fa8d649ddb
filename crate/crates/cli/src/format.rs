//! Locale-independent numeric output at a fixed number of significant digits.

/// Significant digits of every number the CLI prints.
pub const PRECISION: usize = 12;

/// `x` rounded to [`PRECISION`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", PRECISION - 1, x).parse().unwrap_or(x)
}

/// C-style `%.12g`: fixed notation for decimal exponents in `-4..12`,
/// scientific otherwise, trailing zeros removed.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", PRECISION - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..PRECISION as i32).contains(&exp) {
        let decimals = (PRECISION as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(text: &str) -> &str {
    if text.contains('.') {
        text.trim_end_matches('0').trim_end_matches('.')
    } else {
        text
    }
}

/// `fmt_g` for a defined cell, empty for an undefined one.
pub fn cell(value: Option<f64>) -> String {
    value.map(fmt_g).unwrap_or_default()
}

pub(crate) fn serialize_sig<S: serde::Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*value))
}

pub(crate) fn serialize_sig_opt<S: serde::Serializer>(
    value: &Option<f64>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match value {
        Some(v) => s.serialize_f64(round_sig(*v)),
        None => s.serialize_none(),
    }
}
