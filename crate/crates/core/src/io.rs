//! Field CSV and grid JSON formats, and atomic file writes.
//!
//! Field CSV: header `theta,lambda,value` on full S² grids and
//! `theta,value` on axisymmetric grids, one row per node in grid order.

use crate::error::{Error, Result};
use crate::sphere_grid::{build_grid, Grid, GridMetadata, GridMode, SphericalField};
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

/// Node coordinates in the CSV must match the grid to this tolerance.
const COORD_TOL: f64 = 1e-9;

/// Write via a temporary sibling file and rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Format(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn field_to_csv(field: &SphericalField) -> String {
    let grid = field.grid();
    let full = grid.mode() == GridMode::FullS2;
    let mut s = String::from(if full { "theta,lambda,value\n" } else { "theta,value\n" });
    for (p, v) in grid.nodes().iter().zip(field.values()) {
        if full {
            s.push_str(&format!("{},{},{}\n", p.theta, p.lambda, v));
        } else {
            s.push_str(&format!("{},{}\n", p.theta, v));
        }
    }
    s
}

pub fn write_field_csv(path: &Path, field: &SphericalField) -> Result<()> {
    write_atomic(path, field_to_csv(field).as_bytes())
}

/// Rows of a field CSV as (theta, lambda, value); lambda is 0 for
/// two-column files. Returns whether the file had a lambda column.
pub fn read_csv_rows(path: &Path) -> Result<(bool, Vec<[f64; 3]>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let has_lambda = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["theta", "lambda", "value"] => true,
        ["theta", "value"] => false,
        _ => {
            return Err(Error::Format(format!(
                "{}: expected header theta,lambda,value or theta,value (found {})",
                path.display(),
                header.join(",")
            )))
        }
    };
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parse = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Format(format!("{}: bad number on data row {}", path.display(), line + 1)))
        };
        rows.push(if has_lambda {
            [parse(0)?, parse(1)?, parse(2)?]
        } else {
            [parse(0)?, 0.0, parse(1)?]
        });
    }
    Ok((has_lambda, rows))
}

/// Resolution of a grid with the given node count, if one exists.
pub fn infer_resolution(mode: GridMode, nodes: usize) -> Option<usize> {
    match mode {
        GridMode::Axisymmetric => Some(nodes),
        GridMode::FullS2 => {
            // (L + 1)(2L + 2) = 2(L + 1)²
            let l1 = ((nodes / 2) as f64).sqrt().round() as usize;
            (l1 >= 1 && 2 * l1 * l1 == nodes).then(|| l1 - 1)
        }
    }
}

/// Read a field CSV onto `grid`, checking node coordinates.
pub fn read_field_csv(path: &Path, grid: &Arc<Grid>) -> Result<SphericalField> {
    let (has_lambda, rows) = read_csv_rows(path)?;
    if has_lambda != (grid.mode() == GridMode::FullS2) {
        return Err(Error::Format(format!(
            "{}: column layout does not match a {} grid",
            path.display(),
            grid.mode()
        )));
    }
    if rows.len() != grid.len() {
        return Err(Error::LengthMismatch {
            got: rows.len(),
            expected: grid.len(),
        });
    }
    for (i, (row, p)) in rows.iter().zip(grid.nodes()).enumerate() {
        if (row[0] - p.theta).abs() > COORD_TOL || (has_lambda && (row[1] - p.lambda).abs() > COORD_TOL) {
            return Err(Error::Format(format!(
                "{}: row {} at ({}, {}) does not match grid node ({}, {})",
                path.display(),
                i + 1,
                row[0],
                row[1],
                p.theta,
                p.lambda
            )));
        }
    }
    SphericalField::new(grid.clone(), rows.iter().map(|r| r[2]).collect())
}

/// Read a field CSV and build the grid it lives on from its row count.
pub fn read_field_csv_infer(path: &Path, n: usize, mode: GridMode) -> Result<SphericalField> {
    let (_, rows) = read_csv_rows(path)?;
    let res = infer_resolution(mode, rows.len()).ok_or_else(|| {
        Error::Format(format!("{}: {} rows do not form a {} grid", path.display(), rows.len(), mode))
    })?;
    let grid = build_grid(n, mode, res)?;
    read_field_csv(path, &grid)
}

pub fn write_grid_json(path: &Path, grid: &Grid) -> Result<()> {
    write_json(path, &grid.metadata())
}

pub fn read_grid_json(path: &Path) -> Result<Arc<Grid>> {
    let meta: GridMetadata = serde_json::from_str(&fs::read_to_string(path)?)?;
    meta.build()
}
