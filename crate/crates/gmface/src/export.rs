//! CSV exporters for surfaces, cross sections and loss curves.
//!
//! Every file starts with a header row; reals use `.` as decimal separator
//! and 17 significant digits; records end with `\n`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use gmface_core::fit::EpochLoss;
use gmface_core::ImageGrid;

use crate::error::{Error, Result};
use crate::model_file::fmt_real;

pub const SURFACE_HEADER: &str = "r,c,x1,x2,value";
pub const SECTION_HEADER: &str = "section,r,c,x1,x2,value";
pub const HISTORY_HEADER: &str = "epoch,l2,l_inf,total";

/// Which line of the grid a cross section follows. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Section {
    Row(usize),
    Col(usize),
}

impl Section {
    fn label(self) -> String {
        match self {
            Section::Row(r) => format!("row{r}"),
            Section::Col(c) => format!("col{c}"),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn value(v: f64, invert: bool) -> f64 {
    if invert {
        1.0 - v
    } else {
        v
    }
}

fn surface_row(out: &mut String, grid: &ImageGrid, r: usize, c: usize, invert: bool) {
    let (h, w) = grid.dims();
    out.push_str(&format!(
        "{r},{c},{},{},{}\n",
        fmt_real(r as f64 / h as f64),
        fmt_real(c as f64 / w as f64),
        fmt_real(value(grid.get(r - 1, c - 1), invert)),
    ));
}

/// One row per pixel: `r,c,x1,x2,value`. With `invert`, `value = 1 − pixel`.
pub fn surface_csv(grid: &ImageGrid, invert: bool) -> String {
    let (h, w) = grid.dims();
    let mut out = String::with_capacity(h * w * 64);
    out.push_str(SURFACE_HEADER);
    out.push('\n');
    for r in 1..=h {
        for c in 1..=w {
            surface_row(&mut out, grid, r, c, invert);
        }
    }
    out
}

pub fn export_surface(grid: &ImageGrid, path: impl AsRef<Path>, invert: bool) -> Result<()> {
    write_all(path.as_ref(), surface_csv(grid, invert).as_bytes())
}

/// Rows and columns of the surface as separate series, tagged `row<r>` or
/// `col<c>` in the first column.
pub fn sections_csv(grid: &ImageGrid, sections: &[Section], invert: bool) -> Result<String> {
    let (h, w) = grid.dims();
    let mut out = String::new();
    out.push_str(SECTION_HEADER);
    out.push('\n');
    for &s in sections {
        let cells: Vec<(usize, usize)> = match s {
            Section::Row(r) if (1..=h).contains(&r) => (1..=w).map(|c| (r, c)).collect(),
            Section::Col(c) if (1..=w).contains(&c) => (1..=h).map(|r| (r, c)).collect(),
            _ => {
                return Err(Error::Csv(format!(
                    "cross section {} outside the {h}x{w} grid",
                    s.label()
                )))
            }
        };
        for (r, c) in cells {
            out.push_str(&s.label());
            out.push(',');
            surface_row(&mut out, grid, r, c, invert);
        }
    }
    Ok(out)
}

pub fn export_sections(
    grid: &ImageGrid,
    sections: &[Section],
    path: impl AsRef<Path>,
    invert: bool,
) -> Result<()> {
    let text = sections_csv(grid, sections, invert)?;
    write_all(path.as_ref(), text.as_bytes())
}

pub fn history_csv(history: &[EpochLoss]) -> Result<String> {
    if history.is_empty() {
        return Err(Error::Csv("loss history is empty".into()));
    }
    let mut out = String::with_capacity(history.len() * 80);
    out.push_str(HISTORY_HEADER);
    out.push('\n');
    for h in history {
        out.push_str(&format!(
            "{},{},{},{}\n",
            h.epoch,
            fmt_real(h.report.l2),
            fmt_real(h.report.l_inf),
            fmt_real(h.report.total)
        ));
    }
    Ok(out)
}

pub fn export_loss_history(history: &[EpochLoss], path: impl AsRef<Path>) -> Result<()> {
    let text = history_csv(history)?;
    write_all(path.as_ref(), text.as_bytes())
}

fn write_all(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = create(path)?;
    f.write_all(bytes)
        .and_then(|_| f.flush())
        .map_err(|e| Error::io(path, e))
}
