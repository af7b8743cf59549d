//! Number formatting shared by the JSON and CSV emitters: every float is
//! rounded to 12 significant digits, then printed in shortest round-trip form.

use serde::Serializer;

pub const SIG_DIGITS: usize = 12;

/// Rounds to [`SIG_DIGITS`] significant decimal digits. Non-finite values pass through.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().expect("formatted float parses")
}

/// Text form of [`round_sig`]; `-inf`/`inf`/`nan` for non-finite values.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{}", round_sig(x))
    }
}

pub fn serialize_sig<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*x))
}

pub fn serialize_sig_pair<S: Serializer>(x: &(f64, f64), s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&round_sig(x.0))?;
    t.serialize_element(&round_sig(x.1))?;
    t.end()
}

pub fn serialize_sig_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_f64(round_sig(*v)),
        None => s.serialize_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_to_twelve_significant_digits() {
        assert_eq!(fmt_sig(18.5 / 24.0), "0.770833333333");
        assert_eq!(fmt_sig(0.25), "0.25");
        assert_eq!(fmt_sig(-17.333333333333332), "-17.3333333333");
        assert_eq!(fmt_sig(123456789012345.0), "123456789012000");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(f64::NEG_INFINITY), "-inf");
    }
}
