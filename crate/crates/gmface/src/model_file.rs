//! GMFACE v1 model files.
//!
//! ```text
//! GMFACE 1
//! <m> <H> <W>
//! <w> <mu_x1> <mu_x2> <l11> <l21> <l22>     (m lines)
//! ```
//!
//! Reals are written with 17 significant digits so that reading a written
//! model reproduces every `f64` exactly. Loading validates the header, the
//! record count and every component's invariants; nothing is repaired.
//!
//! Precision tables hold `(w, μ1, μ2, a11, a12, a22)` rows, i.e. the
//! precision matrix rather than its factor, and are converted with
//! [`cholesky2`] on load.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gmface_core::{cholesky2, GaussianComponent, GmModel, SymMatrix2, Vec2};

use crate::error::{Error, ModelFileError, Result};

pub const MAGIC: &str = "GMFACE";
pub const VERSION: u32 = 1;

const FIELDS: usize = 6;

pub fn write_model(model: &GmModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: impl AsRef<Path>) -> Result<GmModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_model(&text).map_err(|e| Error::in_file(path, e))
}

pub fn encode_model(model: &GmModel) -> String {
    let mut out = String::with_capacity(64 + model.len() * 150);
    writeln!(out, "{MAGIC} {VERSION}").unwrap();
    writeln!(out, "{} {} {}", model.len(), model.height(), model.width()).unwrap();
    for c in model.components() {
        let fields = c.to_array().map(fmt_real);
        writeln!(out, "{}", fields.join(" ")).unwrap();
    }
    out
}

pub(crate) fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn err(line: usize, kind: ModelFileError) -> Error {
    Error::ModelFile { line, kind }
}

fn parse_fields<const N: usize>(line_no: usize, line: &str) -> Result<[f64; N]> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != N {
        return Err(err(
            line_no,
            ModelFileError::FieldCount {
                expected: N,
                found: parts.len(),
            },
        ));
    }
    let mut out = [0.0; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p
            .parse()
            .map_err(|_| err(line_no, ModelFileError::Number(p.to_string())))?;
    }
    Ok(out)
}

fn parse_usize(line_no: usize, s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| err(line_no, ModelFileError::Number(s.to_string())))
}

pub fn decode_model(text: &str) -> Result<GmModel> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (n, header) = lines.next().ok_or(err(1, ModelFileError::Truncated))?;
    let mut head = header.split_whitespace();
    if head.next() != Some(MAGIC) {
        return Err(err(n, ModelFileError::BadMagic { expected: MAGIC }));
    }
    match head.next() {
        Some(v) if v == VERSION.to_string() && head.next().is_none() => {}
        other => {
            return Err(err(
                n,
                ModelFileError::VersionMismatch(other.unwrap_or("<missing>").to_string()),
            ))
        }
    }

    let (n, dims) = lines.next().ok_or(err(2, ModelFileError::Truncated))?;
    let dims: Vec<&str> = dims.split_whitespace().collect();
    if dims.len() != 3 {
        return Err(err(
            n,
            ModelFileError::FieldCount {
                expected: 3,
                found: dims.len(),
            },
        ));
    }
    let m = parse_usize(n, dims[0])?;
    let height = parse_usize(n, dims[1])?;
    let width = parse_usize(n, dims[2])?;

    let records: Vec<(usize, &str)> = lines.filter(|(_, l)| !l.trim().is_empty()).collect();
    if records.len() != m {
        return Err(err(
            n,
            ModelFileError::CountMismatch {
                declared: m,
                found: records.len(),
            },
        ));
    }
    let mut comps = Vec::with_capacity(m);
    for (index, (line_no, line)) in records.into_iter().enumerate() {
        let p = parse_fields::<FIELDS>(line_no, line)?;
        let comp = GaussianComponent::from_array(p).map_err(|e| {
            err(
                line_no,
                ModelFileError::Invariant {
                    index,
                    reason: e.to_string(),
                },
            )
        })?;
        comps.push(comp);
    }
    Ok(GmModel::new(comps, height, width)?)
}

/// Parses a precision table: `#` comments, one `H W` line, then rows of
/// `w mu_x1 mu_x2 a11 a12 a22`.
pub fn decode_precision_table(text: &str) -> Result<GmModel> {
    let mut rows = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (n, dims) = rows.next().ok_or(err(1, ModelFileError::Truncated))?;
    let [h, w] = parse_fields::<2>(n, dims)?;
    if h.fract() != 0.0 || w.fract() != 0.0 || h < 1.0 || w < 1.0 {
        return Err(err(n, ModelFileError::Number(dims.to_string())));
    }
    let mut comps = Vec::new();
    for (index, (line_no, line)) in rows.enumerate() {
        let [wt, mu1, mu2, a11, a12, a22] = parse_fields::<FIELDS>(line_no, line)?;
        let chol = cholesky2(&SymMatrix2::new(a11, a12, a22)).map_err(|e| {
            err(
                line_no,
                ModelFileError::Invariant {
                    index,
                    reason: e.to_string(),
                },
            )
        })?;
        comps.push(GaussianComponent::new(wt, Vec2::new(mu1, mu2), chol));
    }
    Ok(GmModel::new(comps, h as usize, w as usize)?)
}

pub fn read_precision_table(path: impl AsRef<Path>) -> Result<GmModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    decode_precision_table(&text).map_err(|e| Error::in_file(path, e))
}

const COMMON_FACE_TABLE: &str = include_str!("../data/common_face_precision.txt");

/// The bundled 80-component common face model on a 120×120 grid.
pub fn common_face() -> GmModel {
    decode_precision_table(COMMON_FACE_TABLE).expect("bundled table is valid")
}
