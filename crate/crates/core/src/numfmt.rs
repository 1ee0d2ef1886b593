//! Deterministic number formatting for reports.
//!
//! Every float that reaches a report file goes through [`format_sig10`],
//! which renders exactly ten significant digits and then trims trailing
//! zeros, like C's `%.10g`. Two runs that compute the same values therefore
//! produce byte-identical output, and values that differ only in the last
//! couple of machine bits format identically.
//!
//! [`to_json_string`] serializes a [`serde_json::Value`] with that float
//! format and sorted object keys (the `Value` map is ordered), which is what
//! the CLI relies on for byte-stable reports.

use std::io;

use serde_json::ser::{Formatter, PrettyFormatter, Serializer};
use serde_json::Value;

/// Formats `x` with ten significant digits, positional where reasonable and
/// scientific otherwise, with trailing zeros trimmed.
///
/// Non-finite values render as `null` so the result is always a valid JSON
/// token; reports are validated upstream and should never contain them.
pub fn format_sig10(x: f64) -> String {
    if !x.is_finite() {
        return "null".to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.9e}", x);
    let (mant, exp) = sci
        .split_once('e')
        .expect("float scientific notation always carries an exponent");
    let exp: i32 = exp.parse().expect("exponent is a valid integer");
    let neg = mant.starts_with('-');
    let digits: Vec<u8> = mant.bytes().filter(u8::is_ascii_digit).collect();
    debug_assert_eq!(digits.len(), 10);

    let body = if (-4..10).contains(&exp) {
        positional(&digits, exp)
    } else {
        scientific(&digits, exp)
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn trim_zeros(frac: &[u8]) -> &[u8] {
    let end = frac.iter().rposition(|&d| d != b'0').map_or(0, |i| i + 1);
    &frac[..end]
}

fn positional(digits: &[u8], exp: i32) -> String {
    let mut out = String::new();
    if exp < 0 {
        out.push_str("0.");
        for _ in 0..(-exp - 1) {
            out.push('0');
        }
        out.push_str(std::str::from_utf8(trim_zeros(digits)).unwrap());
    } else {
        let split = (exp as usize + 1).min(digits.len());
        out.push_str(std::str::from_utf8(&digits[..split]).unwrap());
        let frac = trim_zeros(&digits[split..]);
        if !frac.is_empty() {
            out.push('.');
            out.push_str(std::str::from_utf8(frac).unwrap());
        }
    }
    out
}

fn scientific(digits: &[u8], exp: i32) -> String {
    let frac = trim_zeros(&digits[1..]);
    let mut out = String::new();
    out.push(digits[0] as char);
    if !frac.is_empty() {
        out.push('.');
        out.push_str(std::str::from_utf8(frac).unwrap());
    }
    out.push('e');
    out.push_str(&exp.to_string());
    out
}

/// Pretty JSON writer that routes every float through [`format_sig10`].
struct Sig10Pretty<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for Sig10Pretty<'_> {
    fn write_f64<W: io::Write + ?Sized>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_sig10(value).as_bytes())
    }

    fn write_f32<W: io::Write + ?Sized>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        w.write_all(format_sig10(f64::from(value)).as_bytes())
    }

    fn begin_array<W: io::Write + ?Sized>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: io::Write + ?Sized>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: io::Write + ?Sized>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: io::Write + ?Sized>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: io::Write + ?Sized>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: io::Write + ?Sized>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: io::Write + ?Sized>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: io::Write + ?Sized>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: io::Write + ?Sized>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

/// Renders `value` as pretty JSON with sorted keys, ten-significant-digit
/// floats, and a trailing newline.
pub fn to_json_string(value: &Value) -> String {
    let mut buf = Vec::new();
    let fmt = Sig10Pretty {
        inner: PrettyFormatter::new(),
    };
    let mut ser = Serializer::with_formatter(&mut buf, fmt);
    serde::Serialize::serialize(value, &mut ser).expect("JSON serialization of a Value is infallible");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
