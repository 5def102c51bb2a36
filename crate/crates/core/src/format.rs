//! Lossless float formatting for reports.
//!
//! Every float leaves the crate with 17 significant digits, which is enough to
//! round-trip any `f64`. Trailing zeros are trimmed so `0.5` prints as `0.5`
//! and `3.0` as `3.0`. Very large or very small magnitudes fall back to
//! scientific notation, which is still valid JSON.

use std::io;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};
use serde_json::Value;

/// Formats `x` with 17 significant digits, trailing zeros trimmed.
pub fn fmt_f64(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.0".to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    debug_assert_eq!(digits.len(), 17);

    if (0..17).contains(&exp) {
        let split = exp as usize + 1;
        let (int_part, frac) = digits.split_at(split);
        format!("{sign}{int_part}.{}", trim_frac(frac))
    } else if (-5..0).contains(&exp) {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{}", trim_frac(&digits))
    } else {
        let (lead, rest) = digits.split_at(1);
        format!("{sign}{lead}.{}e{exp}", trim_frac(rest))
    }
}

fn trim_frac(frac: &str) -> &str {
    let t = frac.trim_end_matches('0');
    if t.is_empty() {
        "0"
    } else {
        t
    }
}

/// serde_json formatter that routes every float through [`fmt_f64`].
pub struct Sig17<F> {
    inner: F,
}

impl Sig17<CompactFormatter> {
    pub fn compact() -> Self {
        Sig17 {
            inner: CompactFormatter,
        }
    }
}

impl Sig17<PrettyFormatter<'static>> {
    pub fn pretty() -> Self {
        Sig17 {
            inner: PrettyFormatter::new(),
        }
    }
}

impl<F: Formatter> Formatter for Sig17<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn end_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_key(w)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

fn write_with<F: Formatter>(value: &Value, formatter: F) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, formatter);
    value.serialize(&mut ser).expect("serializing a Value cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Serializes through `serde_json::Value`, so object keys come out sorted.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("value is representable as JSON");
    write_with(&v, Sig17::compact())
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("value is representable as JSON");
    write_with(&v, Sig17::pretty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn short_values_stay_short() {
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(3.0), "3.0");
        assert_eq!(fmt_f64(4.0), "4.0");
        assert_eq!(fmt_f64(-0.25), "-0.25");
        assert_eq!(fmt_f64(0.0), "0.0");
        assert_eq!(fmt_f64(1234.5), "1234.5");
    }

    #[test]
    fn seventeen_digits_when_needed() {
        assert_eq!(fmt_f64(0.1), "0.10000000000000001");
        assert_eq!(fmt_f64(1.0 / 3.0), "0.33333333333333331");
    }

    #[test]
    fn extreme_magnitudes_use_exponent() {
        assert_eq!(fmt_f64(1.5e-7), "1.4999999999999999e-7");
        assert_eq!(fmt_f64(0.5f64.powi(30)), "9.3132257461547852e-10");
        assert_eq!(fmt_f64(2.0e20), "2.0e20");
    }

    #[test]
    fn json_keys_are_sorted() {
        let v = serde_json::json!({"b": 1.0, "a": 0.5});
        assert_eq!(to_json(&v), r#"{"a":0.5,"b":1.0}"#);
    }

    proptest! {
        #[test]
        fn formatting_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL) {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
            let json: f64 = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(json.to_bits(), x.to_bits());
        }
    }
}
