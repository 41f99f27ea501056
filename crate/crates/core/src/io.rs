//! File formats: legacy VTK (ASCII structured points), flat CSV fields,
//! PGM previews, and the `SPMR` binary phase-map container.
//!
//! All floating-point output uses the fixed `%.9e`-style rendering of
//! [`fmt_e9`] so files are byte-reproducible across runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{ScalarField, SymTensorField};
use crate::grid::{Grid, PhaseMap};
use crate::tensor::{component_names, SymTensor};

/// `SPMR` container version written by this crate.
const SPMR_VERSION: u16 = 1;

/// Render like C's `%.9e`: nine fractional digits, two-digit signed exponent.
pub fn fmt_e9(v: f64) -> String {
    let s = format!("{v:.9e}");
    let (mant, exp) = s.split_once('e').expect("exponential format");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mant}e{sign}{digits:0>2}")
}

/// Write text with path-context errors.
pub fn write_text(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::io(path, e))
}

/// Read text with path-context errors.
pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn vtk_header(name: &str, grid: &Grid) -> String {
    let (n0, n1, n2) = (
        grid.axis_len(0),
        grid.axis_len(1),
        if grid.dim() == 3 { grid.axis_len(2) } else { 1 },
    );
    let (s0, s1) = (grid.spacing(0), grid.spacing(1));
    let s2 = if grid.dim() == 3 { grid.spacing(2) } else { 1.0 };
    format!(
        "# vtk DataFile Version 3.0\n{name}\nASCII\nDATASET STRUCTURED_POINTS\n\
         DIMENSIONS {n0} {n1} {n2}\nORIGIN 0 0 0\nSPACING {} {} {}\nPOINT_DATA {}\n",
        fmt_e9(s0),
        fmt_e9(s1),
        fmt_e9(s2),
        grid.len()
    )
}

/// One scalar dataset per file, point data in storage order (axis 0 fastest,
/// which is VTK's x-fastest convention).
pub fn write_vtk_scalar(path: &Path, name: &str, field: &ScalarField) -> Result<()> {
    let grid = field.grid();
    let mut out = vtk_header(name, grid);
    let _ = write!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default\n");
    for idx in 0..grid.len() {
        let _ = writeln!(out, "{}", fmt_e9(field.at(idx)));
    }
    write_text(path, &out)
}

/// One tensor dataset per file; symmetric tensors are embedded into the full
/// 3x3 matrix VTK expects (out-of-plane entries zero in 2-D).
pub fn write_vtk_tensor(path: &Path, name: &str, field: &SymTensorField) -> Result<()> {
    let grid = field.grid();
    let dim = grid.dim();
    let mut out = vtk_header(name, grid);
    let _ = writeln!(out, "TENSORS {name} double");
    for idx in 0..grid.len() {
        let t = field.at(idx);
        for i in 0..3 {
            let mut row = [0.0; 3];
            for (j, r) in row.iter_mut().enumerate() {
                if i < dim && j < dim {
                    *r = t.get(i, j);
                }
            }
            let _ = writeln!(out, "{} {} {}", fmt_e9(row[0]), fmt_e9(row[1]), fmt_e9(row[2]));
        }
        out.push('\n');
    }
    write_text(path, &out)
}

fn index_header(dim: usize) -> &'static str {
    if dim == 2 {
        "x_index,y_index"
    } else {
        "x_index,y_index,z_index"
    }
}

/// Flat CSV of a tensor field: index columns, then one column per stored
/// component (`11,22,12` in 2-D).
pub fn write_field_csv(path: &Path, field: &SymTensorField) -> Result<()> {
    let grid = field.grid();
    let dim = grid.dim();
    let names = component_names(dim);
    let mut out = String::new();
    let _ = writeln!(out, "{},{}", index_header(dim), names.join(","));
    for idx in 0..grid.len() {
        let c = grid.coords_of(idx);
        let _ = write!(out, "{},{}", c[0], c[1]);
        if dim == 3 {
            let _ = write!(out, ",{}", c[2]);
        }
        let t = field.at(idx);
        for &v in t.components() {
            let _ = write!(out, ",{}", fmt_e9(v));
        }
        out.push('\n');
    }
    write_text(path, &out)
}

/// Flat CSV of a scalar field under the given column name.
pub fn write_scalar_csv(path: &Path, name: &str, field: &ScalarField) -> Result<()> {
    let grid = field.grid();
    let dim = grid.dim();
    let mut out = String::new();
    let _ = writeln!(out, "{},{name}", index_header(dim));
    for idx in 0..grid.len() {
        let c = grid.coords_of(idx);
        let _ = write!(out, "{},{}", c[0], c[1]);
        if dim == 3 {
            let _ = write!(out, ",{}", c[2]);
        }
        let _ = writeln!(out, ",{}", fmt_e9(field.at(idx)));
    }
    write_text(path, &out)
}

/// Re-read a tensor-field CSV written by [`write_field_csv`]. Grid extents
/// are inferred from the index columns.
pub fn read_field_csv(path: &Path) -> Result<SymTensorField> {
    let text = read_text(path)?;
    let bad = |reason: String| Error::format(path, reason);
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let dim = if cols.get(2) == Some(&"z_index") { 3 } else { 2 };
    let ncomp = crate::tensor::component_count(dim);
    if cols.len() != dim + ncomp {
        return Err(bad(format!(
            "expected {} columns for {dim}-d tensor rows, found {}",
            dim + ncomp,
            cols.len()
        )));
    }
    let mut rows: Vec<([usize; 3], Vec<f64>)> = Vec::new();
    let mut extent = [0usize; 3];
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + ncomp {
            return Err(bad(format!("line {}: wrong column count", lineno + 2)));
        }
        let mut c = [0usize; 3];
        for j in 0..dim {
            c[j] = fields[j]
                .trim()
                .parse()
                .map_err(|e| bad(format!("line {}: bad index: {e}", lineno + 2)))?;
            extent[j] = extent[j].max(c[j] + 1);
        }
        let comps: Vec<f64> = fields[dim..]
            .iter()
            .map(|f| {
                f.trim()
                    .parse()
                    .map_err(|e| bad(format!("line {}: bad value: {e}", lineno + 2)))
            })
            .collect::<Result<_>>()?;
        rows.push((c, comps));
    }
    let grid = Grid::from_dims(&extent[..dim])?;
    if rows.len() != grid.len() {
        return Err(bad(format!(
            "expected {} rows for grid {:?}, found {}",
            grid.len(),
            &extent[..dim],
            rows.len()
        )));
    }
    let mut field = SymTensorField::zeros(grid);
    for (c, comps) in rows {
        let t = SymTensor::from_components(dim, &comps);
        field.set(grid.index_of(c), &t);
    }
    Ok(field)
}

/// ASCII PGM preview of a 2-D scalar array, linearly mapped to 0..=255.
/// Row 0 of the image is the highest `y` index, so the origin sits at the
/// bottom-left like a plot.
pub fn write_pgm(path: &Path, grid: &Grid, values: &[f64]) -> Result<()> {
    if grid.dim() != 2 {
        return Err(Error::invalid("pgm preview: 2-d grids only"));
    }
    if values.len() != grid.len() {
        return Err(Error::invalid(format!(
            "pgm preview: expected {} values, got {}",
            grid.len(),
            values.len()
        )));
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let scale = if hi > lo { 255.0 / (hi - lo) } else { 0.0 };
    let (n0, n1) = (grid.axis_len(0), grid.axis_len(1));
    let mut out = format!("P2\n{n0} {n1}\n255\n");
    for i1 in (0..n1).rev() {
        let mut row = String::with_capacity(4 * n0);
        for i0 in 0..n0 {
            let v = values[grid.index_of([i0, i1, 0])];
            let g = ((v - lo) * scale).round().clamp(0.0, 255.0) as u8;
            if i0 > 0 {
                row.push(' ');
            }
            let _ = write!(row, "{g}");
        }
        out.push_str(&row);
        out.push('\n');
    }
    write_text(path, &out)
}

/// Write a phase map in the `SPMR` container: magic `SPMR`, version u16 LE,
/// dim u16 LE, per-axis u32 LE extents, then one u8 label per voxel in
/// storage order.
pub fn write_phase_binary(path: &Path, phases: &PhaseMap) -> Result<()> {
    let grid = phases.grid();
    let mut out = Vec::with_capacity(16 + grid.len());
    out.extend_from_slice(b"SPMR");
    out.extend_from_slice(&SPMR_VERSION.to_le_bytes());
    out.extend_from_slice(&(grid.dim() as u16).to_le_bytes());
    for axis in 0..grid.dim() {
        out.extend_from_slice(&(grid.axis_len(axis) as u32).to_le_bytes());
    }
    out.extend_from_slice(phases.labels());
    fs::write(path, &out).map_err(|e| Error::io(path, e))
}

/// Read an `SPMR` phase map.
pub fn read_phase_binary(path: &Path) -> Result<PhaseMap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |reason: &str| Error::format(path, reason);
    if bytes.len() < 8 || &bytes[..4] != b"SPMR" {
        return Err(bad("missing SPMR magic"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != SPMR_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let dim = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
    if !(2..=3).contains(&dim) {
        return Err(bad(&format!("dim must be 2 or 3, got {dim}")));
    }
    let header_len = 8 + 4 * dim;
    if bytes.len() < header_len {
        return Err(bad("truncated header"));
    }
    let mut dims = [0usize; 3];
    for (axis, d) in dims.iter_mut().take(dim).enumerate() {
        let off = 8 + 4 * axis;
        *d = u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as usize;
    }
    let grid = Grid::from_dims(&dims[..dim])
        .map_err(|e| bad(&format!("bad extents: {e}")))?;
    let payload = &bytes[header_len..];
    if payload.len() != grid.len() {
        return Err(bad(&format!(
            "expected {} labels, found {}",
            grid.len(),
            payload.len()
        )));
    }
    PhaseMap::new(grid, payload.to_vec()).map_err(|e| bad(&format!("bad labels: {e}")))
}

/// Phase map as label CSV (index columns + `label`).
pub fn write_phase_csv(path: &Path, phases: &PhaseMap) -> Result<()> {
    let grid = phases.grid();
    let dim = grid.dim();
    let mut out = String::new();
    let _ = writeln!(out, "{},label", index_header(dim));
    for idx in 0..grid.len() {
        let c = grid.coords_of(idx);
        let _ = write!(out, "{},{}", c[0], c[1]);
        if dim == 3 {
            let _ = write!(out, ",{}", c[2]);
        }
        let _ = writeln!(out, ",{}", phases.label(idx));
    }
    write_text(path, &out)
}

/// Read a phase map from label CSV.
pub fn read_phase_csv(path: &Path) -> Result<PhaseMap> {
    let text = read_text(path)?;
    let bad = |reason: String| Error::format(path, reason);
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    let dim = if cols.get(2) == Some(&"z_index") { 3 } else { 2 };
    if cols.len() != dim + 1 || cols.last() != Some(&"label") {
        return Err(bad("expected index columns plus a label column".into()));
    }
    let mut rows: Vec<([usize; 3], u8)> = Vec::new();
    let mut extent = [0usize; 3];
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dim + 1 {
            return Err(bad(format!("line {}: wrong column count", lineno + 2)));
        }
        let mut c = [0usize; 3];
        for j in 0..dim {
            c[j] = fields[j]
                .trim()
                .parse()
                .map_err(|e| bad(format!("line {}: bad index: {e}", lineno + 2)))?;
            extent[j] = extent[j].max(c[j] + 1);
        }
        let label: u8 = fields[dim]
            .trim()
            .parse()
            .map_err(|e| bad(format!("line {}: bad label: {e}", lineno + 2)))?;
        rows.push((c, label));
    }
    let grid = Grid::from_dims(&extent[..dim])?;
    if rows.len() != grid.len() {
        return Err(bad(format!(
            "expected {} rows for grid {:?}, found {}",
            grid.len(),
            &extent[..dim],
            rows.len()
        )));
    }
    let mut labels = vec![0u8; grid.len()];
    for (c, label) in rows {
        labels[grid.index_of(c)] = label;
    }
    PhaseMap::new(grid, labels).map_err(|e| bad(format!("bad labels: {e}")))
}
