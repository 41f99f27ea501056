//! Post-processing of reduced solutions: the compatibility projection and
//! the error metrics against the full-frequency reference.
//!
//! The macroscopic error compares volume-averaged stresses,
//! `||mean(sigma) - mean(sigma_ref)||_F / ||mean(sigma_ref)||_F`; the
//! microscopic error is the mean over voxels of the pointwise relative
//! Frobenius stress error. Voxels whose reference stress norm falls below
//! [`MICRO_EXCLUSION_REL`] times the field maximum are excluded from that
//! mean (the pointwise ratio is undefined there) and their count is
//! reported.

use std::fmt;
use std::time::Instant;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{FftContext, IMAG_RESIDUE_LIMIT};
use crate::field::{ScalarField, SymTensorField};
use crate::grid::PhaseMap;
use crate::materials::{reference_medium, MaterialSet};
use crate::sampling::{full_mask, Pattern};
use crate::spectral::{
    polarization_into, stress_pass, GammaOperator, SolveResult, StageTimings,
};
use crate::tensor::{component_weights, SymTensor};

/// Voxels with `||sigma_ref|| < MICRO_EXCLUSION_REL * max ||sigma_ref||`
/// are excluded from the microscopic error mean.
pub const MICRO_EXCLUSION_REL: f64 = 1e-14;

/// Whether an error was measured on the raw reduced fields or after the
/// compatibility projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PostStage {
    Raw,
    Compatibility,
}

impl fmt::Display for PostStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PostStage::Raw => "raw",
            PostStage::Compatibility => "compatibility",
        })
    }
}

impl std::str::FromStr for PostStage {
    type Err = Error;

    fn from_str(s: &str) -> Result<PostStage> {
        match s {
            "raw" => Ok(PostStage::Raw),
            "compatibility" => Ok(PostStage::Compatibility),
            other => Err(Error::invalid(format!(
                "post stage must be raw or compatibility, got '{other}'"
            ))),
        }
    }
}

/// One compatibility projection: a single fixed-point application with the
/// full frequency set, starting from the reduced solution's strain and
/// committed internal variables.
///
/// The constitutive law is re-evaluated for the projected strain, but the
/// committed internal variables are **not** advanced — this is a
/// post-processing projection, not an extra load step. Iteration counts and
/// residual history of the input are carried through unchanged.
pub fn compatibility_step(
    reduced: &SolveResult,
    phases: &PhaseMap,
    materials: &MaterialSet,
    eps_bar: &SymTensor,
) -> Result<SolveResult> {
    let start = Instant::now();
    let grid = *phases.grid();
    if reduced.strain.grid() != &grid {
        return Err(Error::invalid(
            "compatibility_step: result and phase map grids must match",
        ));
    }
    if eps_bar.dim() != grid.dim() {
        return Err(Error::invalid(
            "compatibility_step: macro tensor dimension must match the grid",
        ));
    }
    materials.validate(grid.dim())?;

    let dim = grid.dim();
    let n = grid.len();
    let m = grid.ncomp();
    let labels = phases.labels();
    let medium = reference_medium(materials);
    let gamma = GammaOperator::new(grid, medium, reduced.diff_op);
    let mask = full_mask(grid);
    let mut fft = FftContext::new(&grid);
    let mut timings = StageTimings::default();

    let mut tau = vec![0.0f64; n * m];
    let mut tau_hat = vec![Complex64::new(0.0, 0.0); n * m];
    let mut eps_hat = vec![Complex64::new(0.0, 0.0); n * m];
    let mut eps_new = vec![0.0f64; n * m];

    let t = Instant::now();
    polarization_into(
        reduced.strain.data(),
        labels,
        materials,
        reduced.plastic.as_ref(),
        &medium,
        dim,
        &mut tau,
    );
    timings.constitutive += t.elapsed();
    timings.constitutive_passes += 1;

    let t = Instant::now();
    fft.forward_raw_into(&tau, m, &mut tau_hat);
    timings.transform += t.elapsed();

    let t = Instant::now();
    gamma.apply_masked_into(&tau_hat, &mask, eps_bar, &mut eps_hat);
    timings.gamma += t.elapsed();
    timings.gamma_applies += 1;

    let t = Instant::now();
    let ratio = fft.inverse_tensor_into(&mut eps_hat, m, &mut eps_new);
    timings.transform += t.elapsed();
    if ratio > IMAG_RESIDUE_LIMIT {
        return Err(Error::ImaginaryResidue {
            ratio,
            limit: IMAG_RESIDUE_LIMIT,
        });
    }

    // Stress of the projected strain against the unchanged committed state.
    let mut plastic = reduced.plastic.clone();
    let mut stress = vec![0.0f64; n * m];
    let t = Instant::now();
    stress_pass(
        &eps_new,
        labels,
        materials,
        plastic.as_mut(),
        dim,
        false,
        &mut stress,
    );
    timings.constitutive += t.elapsed();
    timings.constitutive_passes += 1;
    timings.total = start.elapsed();

    let strain = SymTensorField::from_data(grid, eps_new)?;
    let stress = SymTensorField::from_data(grid, stress)?;
    let macro_stress = stress.volume_average();
    Ok(SolveResult {
        strain,
        stress,
        plastic,
        eps_bar: *eps_bar,
        macro_stress,
        iterations_per_step: reduced.iterations_per_step.clone(),
        residual_history: reduced.residual_history.clone(),
        converged: reduced.converged,
        timings,
        max_imag_residue: ratio.max(reduced.max_imag_residue),
        singular_frequencies: gamma.singular_frequencies(&mask),
        mask_len: n,
        mask_fraction: 1.0,
        diff_op: reduced.diff_op,
    })
}

/// Macroscopic error: relative Frobenius distance of the volume-averaged
/// stresses.
pub fn macro_error(sol: &SolveResult, reference: &SolveResult) -> Result<f64> {
    if sol.strain.grid() != reference.strain.grid() {
        return Err(Error::invalid("macro_error: grids must match"));
    }
    let denom = reference.macro_stress.frobenius_norm();
    if denom == 0.0 {
        return Err(Error::invalid(
            "macro_error: reference mean stress is zero, error undefined",
        ));
    }
    Ok(sol.macro_stress.sub(&reference.macro_stress).frobenius_norm() / denom)
}

/// Microscopic error value plus the number of voxels excluded from the mean.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MicroError {
    /// Mean over included voxels of the pointwise relative stress error.
    pub value: f64,
    /// Voxels excluded because their reference stress norm is (nearly) zero.
    pub excluded_voxels: usize,
}

/// Microscopic error: mean over voxels of
/// `||sigma - sigma_ref||_F / ||sigma_ref||_F`, with near-unloaded voxels
/// excluded (see [`MICRO_EXCLUSION_REL`]).
pub fn micro_error(sol: &SolveResult, reference: &SolveResult) -> Result<MicroError> {
    if sol.strain.grid() != reference.strain.grid() {
        return Err(Error::invalid("micro_error: grids must match"));
    }
    let grid = sol.strain.grid();
    let dim = grid.dim();
    let m = grid.ncomp();
    let w = component_weights(dim);
    let norm2 = |chunk: &[f64]| -> f64 {
        chunk
            .iter()
            .zip(w)
            .map(|(v, wc)| wc * v * v)
            .sum::<f64>()
    };
    let ref_data = reference.stress.data();
    let sol_data = sol.stress.data();
    let max_ref = ref_data
        .chunks_exact(m)
        .map(norm2)
        .fold(0.0f64, f64::max)
        .sqrt();
    if max_ref == 0.0 {
        return Err(Error::invalid(
            "micro_error: reference stress field is zero, error undefined",
        ));
    }
    let threshold = MICRO_EXCLUSION_REL * max_ref;
    let mut sum = 0.0;
    let mut included = 0usize;
    let mut excluded = 0usize;
    for (s, r) in sol_data.chunks_exact(m).zip(ref_data.chunks_exact(m)) {
        let nref = norm2(r).sqrt();
        if nref < threshold {
            excluded += 1;
            continue;
        }
        let mut d2 = 0.0;
        for ((a, b), wc) in s.iter().zip(r).zip(w) {
            let d = a - b;
            d2 += wc * d * d;
        }
        sum += d2.sqrt() / nref;
        included += 1;
    }
    Ok(MicroError {
        value: sum / included as f64,
        excluded_voxels: excluded,
    })
}

/// Per-voxel absolute difference of one stress component,
/// `|sigma_ref_ij - sigma_ij|`.
pub fn stress_difference_field(
    sol: &SolveResult,
    reference: &SolveResult,
    i: usize,
    j: usize,
) -> Result<ScalarField> {
    if sol.strain.grid() != reference.strain.grid() {
        return Err(Error::invalid("stress_difference_field: grids must match"));
    }
    let grid = *sol.strain.grid();
    if i >= grid.dim() || j >= grid.dim() {
        return Err(Error::invalid(format!(
            "stress_difference_field: component ({i},{j}) out of range for dim {}",
            grid.dim()
        )));
    }
    let c = crate::tensor::component_index(grid.dim(), i, j);
    let m = grid.ncomp();
    let data: Vec<f64> = sol
        .stress
        .data()
        .chunks_exact(m)
        .zip(reference.stress.data().chunks_exact(m))
        .map(|(s, r)| (r[c] - s[c]).abs())
        .collect();
    ScalarField::from_data(grid, data)
}

/// One row of the error report: a (pattern, R, post-stage) comparison against
/// the reference, with run statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub geometry: String,
    pub material: String,
    pub pattern: Pattern,
    pub r_percent: f64,
    pub post: PostStage,
    pub macro_error: f64,
    pub micro_error: f64,
    /// Voxels excluded from the micro-error mean (near-zero reference
    /// stress); reported in the run summary.
    pub excluded_voxels: usize,
    pub iterations: usize,
    pub seconds_total: f64,
    pub seconds_gamma: f64,
    pub seconds_constitutive: f64,
}

impl ErrorReport {
    pub const CSV_HEADER: &'static str = "geometry,material,pattern,R,post,macro_error,\
                                          micro_error,iterations,seconds_total,seconds_gamma,\
                                          seconds_constitutive";

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.geometry,
            self.material,
            self.pattern,
            self.r_percent,
            self.post,
            self.macro_error,
            self.micro_error,
            self.iterations,
            self.seconds_total,
            self.seconds_gamma,
            self.seconds_constitutive
        )
    }

    pub fn from_csv_row(line: &str) -> Result<ErrorReport> {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 11 {
            return Err(Error::invalid(format!(
                "error report row: expected 11 fields, got {}",
                parts.len()
            )));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|e| Error::invalid(format!("error report row: bad {what}: {e}")))
        };
        Ok(ErrorReport {
            geometry: parts[0].trim().to_string(),
            material: parts[1].trim().to_string(),
            pattern: parts[2].trim().parse()?,
            r_percent: num(parts[3], "R")?,
            post: parts[4].trim().parse()?,
            macro_error: num(parts[5], "macro_error")?,
            micro_error: num(parts[6], "micro_error")?,
            excluded_voxels: 0,
            iterations: num(parts[7], "iterations")? as usize,
            seconds_total: num(parts[8], "seconds_total")?,
            seconds_gamma: num(parts[9], "seconds_gamma")?,
            seconds_constitutive: num(parts[10], "seconds_constitutive")?,
        })
    }
}
