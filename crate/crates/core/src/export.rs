//! Serialization helpers shared by reports and distributions.

use serde::Serializer;

/// Formats a rate for JSON: finite values as numbers, infinity as `"inf"`.
pub fn ser_rate<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else {
        s.serialize_f64(*v)
    }
}

/// Writes rows as CSV with `\n` line endings. Fields are written verbatim.
pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Display formatting for a rate, with `inf` for infinity.
pub fn fmt_rate(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".into()
    } else {
        v.to_string()
    }
}
