//! Deterministic serialization: JSON with sorted keys and every float
//! written with 17 significant digits, and the `t,rho` CSV.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use crate::error::{Error, Result};

struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", format_f64(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// `value` with 17 significant digits in scientific notation.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// Serialize `value` as compact JSON with sorted object keys.
///
/// Going through [`serde_json::Value`] sorts the keys; non-finite floats become `null`.
pub fn to_stable_json<T: Serialize>(value: &T) -> Result<String> {
    let value = serde_json::to_value(value).map_err(|e| Error::Inconsistent(format!("serialization: {e}")))?;
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, SeventeenDigits);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Inconsistent(format!("serialization: {e}")))?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Write the body profile as CSV with header `t,rho`.
pub fn write_profile_csv<W: Write>(mut out: W, rows: &[(f64, f64)]) -> io::Result<()> {
    writeln!(out, "t,rho")?;
    for (t, rho) in rows {
        writeln!(out, "{},{}", format_f64(*t), format_f64(*rho))?;
    }
    out.flush()
}
