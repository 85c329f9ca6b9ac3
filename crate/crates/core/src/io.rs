//! Text formats shared by the library and the command line: numbers with
//! 17 significant digits, compact JSON, the scan CSV, matrix and measure
//! files, and function specifications.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::expr;
use crate::funcs::{builtin, RepresentingFunction};
use crate::harness::ScanRow;
use crate::measure::{induced_function, DiscreteMeasure};
use crate::spd::{HermitianMatrix, MatrixFile};

/// `v` with 17 significant digits: positional for `1e-4 ≤ |v| < 1e16`,
/// scientific otherwise. Zero prints as `0.0000000000000000`.
///
/// Seventeen digits identify every `f64` uniquely, so the text round-trips.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0.0000000000000000".into();
    }
    // exponent after rounding to 17 digits, so 9.99…95 moves up a decade
    let sci = format!("{v:.16e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-4..16).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, v)
    } else {
        sci
    }
}

/// serde_json formatter printing floats through [`fmt_f64`]. Non-finite
/// values never reach it: serde_json writes them as `null`.
#[derive(Debug, Default, Clone, Copy)]
pub struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// One-line JSON document with 17-digit floats.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Json(e.to_string()))?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json(format!("{}: {e}", path.display())))
}

fn io_error(path: &Path, e: io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

/// Reads `{"dim": n, "data": [...]}` as a symmetric matrix.
pub fn read_matrix(path: &Path) -> Result<HermitianMatrix> {
    read_json::<MatrixFile>(path)?.into_hermitian()
}

pub fn matrix_json(m: &HermitianMatrix) -> Result<String> {
    to_json(&MatrixFile::from(m))
}

/// Reads `{"atoms": [...], "weights": [...]}`; the measure is validated.
pub fn read_measure(path: &Path) -> Result<DiscreteMeasure> {
    read_json(path)
}

pub fn write_measure(path: &Path, mu: &DiscreteMeasure) -> Result<()> {
    let mut text = to_json(mu)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// `x,r,gap` rows with a header line.
pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("x,r,gap\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(row.x),
            fmt_f64(row.r),
            fmt_f64(row.gap)
        ));
    }
    out
}

/// Parses a function specification:
///
/// * `name` or `name:p1,p2` — catalog function, e.g. `power:0.5,0.5`;
/// * `expr:<text>` — expression in `x`, optionally quoted;
/// * `measure:<file>,t=<t>` — the function induced by a measure file.
pub fn parse_function(spec: &str) -> Result<RepresentingFunction> {
    let spec = spec.trim();
    if let Some(text) = spec.strip_prefix("expr:") {
        let text = strip_quotes(text.trim());
        return expr::to_function(&expr::parse(text)?);
    }
    if let Some(rest) = spec.strip_prefix("measure:") {
        let (path, t) = rest
            .rsplit_once(",t=")
            .ok_or_else(|| Error::Config(format!("`{spec}`: expected measure:<file>,t=<t>")))?;
        let t = parse_number(t, "t")?;
        return induced_function(&read_measure(Path::new(path))?, t);
    }
    let (name, params) = match spec.split_once(':') {
        Some((name, list)) => (
            name,
            list.split(',')
                .map(|p| parse_number(p, name))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => (spec, Vec::new()),
    };
    builtin(name, &params)
}

fn strip_quotes(s: &str) -> &str {
    for q in ['"', '\''] {
        if let Some(inner) = s.strip_prefix(q).and_then(|s| s.strip_suffix(q)) {
            return inner;
        }
    }
    s
}

fn parse_number(text: &str, what: &str) -> Result<f64> {
    let text = text.trim();
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Config(format!(
            "`{text}` is not a finite number (in {what})"
        ))),
    }
}
