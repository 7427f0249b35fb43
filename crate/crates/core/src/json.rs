//! Shared JSON wire formats and the fixed-precision number formatter.
//!
//! Matrices travel as `{"rows": n, "cols": m, "data": [[re, im], ...]}` with
//! row-major data. Every float is written with 17 significant digits.

use std::io;

use num_complex::Complex64;
use serde::de::{DeserializeOwned, Error as _};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Result;
use crate::matrix::ComplexMatrix;

#[derive(Serialize, Deserialize)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut data = Vec::with_capacity(self.len());
        for i in 0..self.nrows() {
            for j in 0..self.ncols() {
                let z = self[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixWire {
            rows: self.nrows(),
            cols: self.ncols(),
            data,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let wire = MatrixWire::deserialize(deserializer)?;
        let data: Vec<Complex64> = wire
            .data
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        ComplexMatrix::from_rows(wire.rows, wire.cols, &data).map_err(D::Error::custom)
    }
}

/// Formats a float with 17 significant digits (`null` for non-finite).
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes to a compact JSON string with 17-significant-digit floats.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// Parses a document, unwrapping a command envelope (`{"payload": ...}`)
/// when present so command output can be fed back as input.
pub fn from_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let value = match value {
        serde_json::Value::Object(mut map)
            if map.contains_key("payload") && map.contains_key("status") =>
        {
            map.remove("payload").unwrap_or_default()
        }
        other => other,
    };
    Ok(serde_json::from_value(value)?)
}

pub fn read_file<T: DeserializeOwned>(path: impl AsRef<std::path::Path>) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    from_str(&text)
}
