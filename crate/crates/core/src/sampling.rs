//! Reduced frequency sets for the Green-operator step.
//!
//! A [`FrequencyMask`] is the set of Fourier frequencies retained by the
//! solver. Masks always contain the zero frequency and are closed under
//! Hermitian symmetry (`m` retained implies `-m` retained, in the mod-`N`
//! sense), so masked spectra of real fields stay spectra of real fields.
//! The retained count tracks the requested budget `round(R/100 * n)` to
//! within the one antipodal pair that may straddle the threshold.
//!
//! Two reduced constructions are provided:
//!
//! * [`radial_mask`] — geometry-independent: a low-frequency disk plus
//!   equally-angled antipodal rays, filled up by radius. Streamed in the
//!   order DC, first ray pair, disk, rays (interleaved by radius), fill, so
//!   even tiny budgets keep DC and one antipodal ray pair.
//! * [`adapted_mask`] — geometry-adapted: the frequencies with the largest
//!   Fourier amplitudes of the phase indicator, ties broken towards the
//!   lexicographically smallest centered index (which makes the choice
//!   deterministic).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::FftContext;
use crate::field::ScalarField;
use crate::grid::{Grid, PhaseMap};

/// Which frequency set a run retains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    /// Every frequency (reference solve).
    Full,
    /// Fixed radial pattern (disk + antipodal rays).
    Radial,
    /// Geometry-adapted pattern (largest indicator amplitudes).
    Adapted,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pattern::Full => "full",
            Pattern::Radial => "radial",
            Pattern::Adapted => "adapted",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Pattern> {
        match s {
            "full" => Ok(Pattern::Full),
            "radial" => Ok(Pattern::Radial),
            "adapted" => Ok(Pattern::Adapted),
            other => Err(Error::invalid(format!(
                "pattern must be full, radial or adapted, got '{other}'"
            ))),
        }
    }
}

/// Set of retained frequencies on a grid.
#[derive(Clone, Debug)]
pub struct FrequencyMask {
    grid: Grid,
    /// Retained storage positions, sorted ascending.
    retained: Vec<usize>,
    /// Dense membership flags (`dense[idx]`).
    dense: Vec<bool>,
    /// Requested fraction of frequencies (`R / 100`).
    target_fraction: f64,
    /// Set by generators when the input made the construction degenerate
    /// (e.g. adapting to a single-phase geometry).
    pub warning: Option<String>,
}

impl FrequencyMask {
    /// Build from explicit storage positions; validates range, the presence
    /// of the zero frequency and Hermitian closure.
    pub fn from_indices(
        grid: Grid,
        mut indices: Vec<usize>,
        target_fraction: f64,
    ) -> Result<FrequencyMask> {
        indices.sort_unstable();
        indices.dedup();
        if indices.last().is_some_and(|&i| i >= grid.len()) {
            return Err(Error::invalid("mask index out of range for grid"));
        }
        let mut dense = vec![false; grid.len()];
        for &i in &indices {
            dense[i] = true;
        }
        if !dense[0] {
            return Err(Error::invalid("mask must retain the zero frequency"));
        }
        for &i in &indices {
            if !dense[grid.hermitian_partner(i)] {
                let m = grid.freq_of(i);
                return Err(Error::invalid(format!(
                    "mask is not Hermitian-closed: {m:?} retained without its partner"
                )));
            }
        }
        Ok(FrequencyMask {
            grid,
            retained: indices,
            dense,
            target_fraction,
            warning: None,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Number of retained frequencies.
    pub fn len(&self) -> usize {
        self.retained.len()
    }

    pub fn is_empty(&self) -> bool {
        self.retained.is_empty()
    }

    /// True when every frequency is retained.
    pub fn is_full(&self) -> bool {
        self.retained.len() == self.grid.len()
    }

    /// Retained storage positions, ascending.
    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.dense[idx]
    }

    /// Achieved fraction of retained frequencies.
    pub fn fraction(&self) -> f64 {
        self.retained.len() as f64 / self.grid.len() as f64
    }

    /// Requested fraction (`R / 100` at construction).
    pub fn target_fraction(&self) -> f64 {
        self.target_fraction
    }
}

/// Incremental mask builder that adds antipodal pairs atomically.
struct MaskBuilder {
    grid: Grid,
    dense: Vec<bool>,
    retained: Vec<usize>,
    target: usize,
}

impl MaskBuilder {
    fn new(grid: Grid, target: usize) -> MaskBuilder {
        MaskBuilder {
            grid,
            dense: vec![false; grid.len()],
            retained: Vec::with_capacity(target + 2),
            target,
        }
    }

    fn reached_target(&self) -> bool {
        self.retained.len() >= self.target
    }

    /// Add a frequency together with its Hermitian partner. Returns whether
    /// anything new was added.
    fn add_pair(&mut self, idx: usize) -> bool {
        let mut added = false;
        for i in [idx, self.grid.hermitian_partner(idx)] {
            if !self.dense[i] {
                self.dense[i] = true;
                self.retained.push(i);
                added = true;
            }
        }
        added
    }

    fn finish(self, target_fraction: f64) -> FrequencyMask {
        let mut retained = self.retained;
        retained.sort_unstable();
        FrequencyMask {
            grid: self.grid,
            retained,
            dense: self.dense,
            target_fraction,
            warning: None,
        }
    }
}

/// Retained-count budget for a percentage `r` on `n` frequencies.
fn budget(grid: &Grid, r_percent: f64) -> Result<usize> {
    if !(r_percent > 0.0 && r_percent <= 100.0) {
        return Err(Error::invalid(format!(
            "r_percent must lie in (0, 100], got {r_percent}"
        )));
    }
    let n = grid.len();
    Ok((((r_percent / 100.0) * n as f64).round() as usize).clamp(1, n))
}

/// Mask retaining every frequency.
pub fn full_mask(grid: Grid) -> FrequencyMask {
    FrequencyMask {
        grid,
        retained: (0..grid.len()).collect(),
        dense: vec![true; grid.len()],
        target_fraction: 1.0,
        warning: None,
    }
}

/// Tunable knobs of the radial pattern. `None` picks defaults scaled to the
/// budget: the disk absorbs ~10% of it and the ray count grows so that rays
/// reaching the edge of the frequency box consume the rest.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RadialParams {
    /// Number of rays (counting both members of each antipodal pair);
    /// must be even and >= 2.
    pub rays: Option<usize>,
    /// Radius (in index units) of the fully retained low-frequency disk.
    pub disk_radius: Option<f64>,
}

impl RadialParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(rays) = self.rays {
            if rays < 2 || rays % 2 != 0 {
                return Err(Error::invalid(format!(
                    "radial.rays must be even and >= 2, got {rays}"
                )));
            }
        }
        if let Some(r0) = self.disk_radius {
            if !(r0 >= 0.0 && r0.is_finite()) {
                return Err(Error::invalid(format!(
                    "radial.disk_radius must be finite and >= 0, got {r0}"
                )));
            }
        }
        Ok(())
    }
}

/// All centered indices with `|m|^2 <= radius^2`, sorted by (radius, lex).
fn disk_indices(grid: &Grid, radius: f64) -> Vec<usize> {
    let mut out: Vec<(i64, [i64; 3], usize)> = Vec::new();
    let r = radius.max(0.0);
    let rceil = r.ceil() as i64;
    let r2 = (r * r).floor() as i64;
    let bound = |axis: usize| -> (i64, i64) {
        let n = grid.axis_len(axis) as i64;
        ((-(n / 2)).max(-rceil), ((n - 1) / 2).min(rceil))
    };
    let (lo0, hi0) = bound(0);
    let (lo1, hi1) = bound(1);
    let (lo2, hi2) = if grid.dim() == 3 { bound(2) } else { (0, 0) };
    for m0 in lo0..=hi0 {
        for m1 in lo1..=hi1 {
            for m2 in lo2..=hi2 {
                let rho2 = m0 * m0 + m1 * m1 + m2 * m2;
                if rho2 <= r2 {
                    let m = [m0, m1, m2];
                    out.push((rho2, m, grid.index_of_freq(m)));
                }
            }
        }
    }
    out.sort_unstable_by_key(|e| (e.0, e.1));
    out.into_iter().map(|(_, _, idx)| idx).collect()
}

/// Unit ray directions: one per antipodal pair (the partner is implied).
fn ray_directions(dim: usize, rays: usize) -> Vec<[f64; 3]> {
    let half = rays / 2;
    let mut dirs = Vec::with_capacity(half);
    if dim == 2 {
        // Equally spaced angles over the half circle.
        for q in 0..half {
            let theta = std::f64::consts::PI * q as f64 / half as f64;
            dirs.push([theta.cos(), theta.sin(), 0.0]);
        }
    } else {
        // Fibonacci hemisphere: near-uniform directions.
        let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
        for q in 0..half {
            let z = (q as f64 + 0.5) / half as f64; // (0, 1]
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * q as f64;
            dirs.push([rho * phi.cos(), rho * phi.sin(), z]);
        }
    }
    dirs
}

/// Fixed radial pattern: DC, one seeded ray pair, a low-frequency disk,
/// antipodal rays grown radius-by-radius, then fill by radius.
pub fn radial_mask(grid: Grid, r_percent: f64, params: &RadialParams) -> Result<FrequencyMask> {
    let target = budget(&grid, r_percent)?;
    params.validate()?;

    let dim = grid.dim();
    let disk_radius = params.disk_radius.unwrap_or_else(|| {
        let disk_target = (0.1 * target as f64).max(1.0);
        match dim {
            2 => (disk_target / std::f64::consts::PI).sqrt(),
            _ => (disk_target * 3.0 / (4.0 * std::f64::consts::PI)).cbrt(),
        }
    });
    let disk = disk_indices(&grid, disk_radius);
    let min_n = (0..dim).map(|a| grid.axis_len(a)).min().unwrap_or(2);
    let rays = params.rays.unwrap_or_else(|| {
        let remaining = target.saturating_sub(disk.len()).max(1);
        let per_ray = (min_n / 2).max(1);
        let pairs = remaining.div_ceil(2 * per_ray).max(if dim == 2 { 2 } else { 4 });
        2 * pairs.min(4096)
    });
    let dirs = ray_directions(dim, rays);

    let mut b = MaskBuilder::new(grid, target);
    b.add_pair(0); // DC (self-paired)

    // Seed one antipodal ray point pair (the first ray's first step) so even
    // a budget of 1 keeps a ray pair; the overshoot stays within the +/-2
    // cardinality bound.
    let seed = [1, 0, 0];
    if grid.freq_in_range(seed) {
        b.add_pair(grid.index_of_freq(seed));
    }

    for idx in &disk {
        if b.reached_target() {
            break;
        }
        b.add_pair(*idx);
    }

    // Grow all rays together, one radius step at a time.
    let rho_max = (0..dim)
        .map(|a| (grid.axis_len(a) as f64 / 2.0).powi(2))
        .sum::<f64>()
        .sqrt()
        .ceil() as usize
        + 1;
    'rays: for step in 1..=rho_max {
        let rho = step as f64;
        let mut any_alive = false;
        for dir in &dirs {
            let m = [
                (rho * dir[0]).round() as i64,
                (rho * dir[1]).round() as i64,
                (rho * dir[2]).round() as i64,
            ];
            if !grid.freq_in_range(m) {
                continue;
            }
            any_alive = true;
            if b.reached_target() {
                break 'rays;
            }
            b.add_pair(grid.index_of_freq(m));
        }
        if !any_alive {
            break;
        }
    }

    // Fill the remaining budget by radius (smallest frequencies first).
    if !b.reached_target() {
        let all = disk_indices(&grid, rho_max as f64 + 1.0);
        for idx in all {
            if b.reached_target() {
                break;
            }
            b.add_pair(idx);
        }
    }

    Ok(b.finish(r_percent / 100.0))
}

/// Geometry-adapted pattern: retain the frequencies with the largest Fourier
/// amplitudes of the phase indicator, antipodal pairs together, ties broken
/// towards the lexicographically smallest centered index.
pub fn adapted_mask(phases: &PhaseMap, r_percent: f64) -> Result<FrequencyMask> {
    let grid = *phases.grid();
    let target = budget(&grid, r_percent)?;

    let indicator = ScalarField::from_data(
        grid,
        phases.labels().iter().map(|&l| l as f64).collect(),
    )
    .expect("sized buffer");
    let spectrum = FftContext::new(&grid).forward_scalar(&indicator);

    let mut ranked: Vec<(f64, [i64; 3], usize)> = spectrum
        .data()
        .iter()
        .enumerate()
        .map(|(idx, c)| (c.norm(), grid.freq_of(idx), idx))
        .collect();
    ranked.sort_unstable_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("finite amplitudes")
            .then(a.1.cmp(&b.1))
    });

    let mut b = MaskBuilder::new(grid, target);
    b.add_pair(0);
    for (_, _, idx) in ranked {
        if b.reached_target() {
            break;
        }
        b.add_pair(idx);
    }
    let mut mask = b.finish(r_percent / 100.0);
    if phases.is_single_phase() {
        mask.warning = Some(
            "adapted pattern on a single-phase geometry: all non-zero amplitudes vanish, \
             falling back to the tie-break order"
                .to_string(),
        );
    }
    Ok(mask)
}

/// Reconstruction preview: the phase indicator filtered through the mask
/// (inverse transform of its masked spectrum). Quantifies how much of the
/// geometry a pattern captures before running any solve.
pub fn mask_apply_geometry_preview(phases: &PhaseMap, mask: &FrequencyMask) -> Result<ScalarField> {
    if phases.grid() != mask.grid() {
        return Err(Error::invalid(
            "mask_apply_geometry_preview: phase map and mask grids must match",
        ));
    }
    let grid = *phases.grid();
    let indicator = ScalarField::from_data(
        grid,
        phases.labels().iter().map(|&l| l as f64).collect(),
    )
    .expect("sized buffer");
    let mut ctx = FftContext::new(&grid);
    let mut spectrum = ctx.forward_scalar(&indicator);
    for (idx, v) in spectrum.data_mut().iter_mut().enumerate() {
        if !mask.contains(idx) {
            *v = num_complex::Complex64::new(0.0, 0.0);
        }
    }
    ctx.inverse_scalar(&spectrum)
}

/// Serialize a mask to the text exchange format: a commented header with the
/// grid dimensions and requested R, then one centered index per line.
pub fn mask_to_text(mask: &FrequencyMask) -> String {
    let grid = mask.grid();
    let dims: Vec<String> = grid.dims().iter().map(|n| n.to_string()).collect();
    let mut out = String::new();
    out.push_str(&format!("# grid: {}\n", dims.join(" ")));
    out.push_str(&format!("# r_percent: {}\n", mask.target_fraction() * 100.0));
    out.push_str(&format!("# retained: {}\n", mask.len()));
    for &idx in mask.retained() {
        let m = grid.freq_of(idx);
        match grid.dim() {
            2 => out.push_str(&format!("{} {}\n", m[0], m[1])),
            _ => out.push_str(&format!("{} {} {}\n", m[0], m[1], m[2])),
        }
    }
    out
}

/// Parse the text exchange format produced by [`mask_to_text`]. Validates
/// the mask invariants (zero frequency present, Hermitian closure).
pub fn mask_from_text(text: &str) -> Result<FrequencyMask> {
    let mut grid: Option<Grid> = None;
    let mut r_percent: Option<f64> = None;
    let mut indices: Vec<usize> = Vec::new();
    let bad = |line: usize, why: String| {
        Error::invalid(format!("mask text, line {}: {why}", line + 1))
    };
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(dims) = rest.strip_prefix("grid:") {
                let parsed: std::result::Result<Vec<usize>, _> =
                    dims.split_whitespace().map(str::parse).collect();
                let parsed =
                    parsed.map_err(|e| bad(lineno, format!("bad grid header: {e}")))?;
                grid = Some(Grid::from_dims(&parsed)?);
            } else if let Some(r) = rest.strip_prefix("r_percent:") {
                r_percent = Some(
                    r.trim()
                        .parse()
                        .map_err(|e| bad(lineno, format!("bad r_percent header: {e}")))?,
                );
            }
            continue;
        }
        let g = grid.ok_or_else(|| {
            bad(lineno, "frequency line before '# grid:' header".to_string())
        })?;
        let parsed: std::result::Result<Vec<i64>, _> =
            line.split_whitespace().map(str::parse).collect();
        let m = parsed.map_err(|e| bad(lineno, format!("bad frequency line: {e}")))?;
        if m.len() != g.dim() {
            return Err(bad(
                lineno,
                format!("expected {} indices, got {}", g.dim(), m.len()),
            ));
        }
        let mut m3 = [0i64; 3];
        m3[..m.len()].copy_from_slice(&m);
        if !g.freq_in_range(m3) {
            return Err(bad(lineno, format!("frequency {m3:?} out of range")));
        }
        indices.push(g.index_of_freq(m3));
    }
    let grid = grid.ok_or_else(|| Error::invalid("mask text: missing '# grid:' header"))?;
    let fraction = r_percent
        .map(|r| r / 100.0)
        .unwrap_or(indices.len() as f64 / grid.len() as f64);
    FrequencyMask::from_indices(grid, indices, fraction)
}
