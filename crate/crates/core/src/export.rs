//! Shared pieces of the CSV/JSON artifact format.
//!
//! Every CSV artifact starts with comment lines naming the artifact kind and
//! schema version and embedding the full configuration as JSON:
//!
//! ```text
//! # displearn estimates schema v1
//! # config: {...}
//! col_a,col_b,...
//! ```

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

pub const SCHEMA_VERSION: &str = "v1";

/// Writes the two header comment lines.
pub fn write_header<W: Write, C: Serialize + ?Sized>(mut w: W, kind: &str, config: &C) -> Result<()> {
    writeln!(w, "# displearn {kind} schema {SCHEMA_VERSION}")?;
    writeln!(w, "# config: {}", serde_json::to_string(config)?)?;
    Ok(())
}

/// Shortest round-trip decimal form; non-finite values as `inf`, `-inf`, `nan`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        serde_json::to_string(&x).expect("finite float")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_lines() {
        let mut buf = Vec::new();
        write_header(&mut buf, "tail", &serde_json::json!({"n_max": 14000})).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# displearn tail schema v1\n# config: {\"n_max\":14000}\n");
    }

    #[test]
    fn float_format() {
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(1e-300), "1e-300");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert_eq!(fmt_f64(f64::NAN), "nan");
        assert_eq!(fmt_f64(3.0), "3.0");
    }
}
