//! Stable text rendering of numbers, CSV tables and JSON documents.

use serde_json::Value;

/// Significant digits kept in every emitted number.
pub const DIGITS: usize = 12;

/// Rounds to [`DIGITS`] significant digits; `-0` becomes `0`.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", DIGITS - 1, x).parse().unwrap_or(x)
}

/// Shortest decimal form of `round_sig(x)`; scientific notation outside
/// `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(x);
    if r == 0.0 {
        return "0".into();
    }
    let a = r.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// CSV table with `,` separators and LF line endings.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        let cells: Vec<&str> = cells.iter().map(|c| c.as_ref()).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

/// JSON number rounded like [`num`]; non-finite values become strings.
pub fn jnum(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(num(x));
    }
    serde_json::Number::from_f64(round_sig(x))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Pretty JSON with a trailing newline.
pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}
