//! The basic fixed-point scheme on a (possibly reduced) frequency set.
//!
//! One iteration of the scheme on the strain field `eps`:
//!
//! 1. polarization `tau(x) = sigma(eps(x)) - C0 : eps(x)`;
//! 2. forward transform `tau_hat = F(tau)`;
//! 3. Green step `eps_hat = -Gamma : tau_hat` on the retained frequencies,
//!    `eps_hat(0) = n * eps_bar`, zero off the mask;
//! 4. inverse transform `eps = F^{-1}(eps_hat)`.
//!
//! Convergence is declared when the iterate increment
//! `||eps_i - eps_{i-1}||_2 / (sqrt(n) ||eps_bar||_F)` drops below the
//! tolerance. With plasticity the load is applied in uniform increments;
//! internal variables are committed only after a load step converges, and
//! each step warm-starts from the previous converged strain plus the uniform
//! macro increment.
//!
//! The speed-up of reduced masks comes entirely from step 3: the off-mask
//! entries of `eps_hat` are written once (they are structurally zero), the
//! Green tensors of the retained frequencies are precomputed, and only the
//! retained coefficients are touched per iteration.

mod freq;
mod gamma;

pub use freq::{continuous_frequency, frequency_vector, rotated_frequency, DiffOp};
pub use gamma::{apply_gamma_masked, gamma_hat, gamma_step, GammaOperator};

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::{FftContext, IMAG_RESIDUE_LIMIT};
use crate::field::SymTensorField;
use crate::grid::PhaseMap;
use crate::materials::{
    reference_medium, stress_voxel, MaterialSet, PlasticField, PlasticState, ReferenceMedium,
};
use crate::sampling::FrequencyMask;
use crate::tensor::{component_weights, SymTensor};

/// Solver controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveSettings {
    /// Convergence tolerance on the normalized iterate increment.
    pub tol: f64,
    /// Iteration budget per load step.
    pub max_iter: usize,
    /// Number of uniform macro-strain increments.
    pub load_steps: usize,
    /// Differential-operator symbol behind the Green operator.
    pub diff_op: DiffOp,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            tol: 1e-8,
            max_iter: 2000,
            load_steps: 1,
            diff_op: DiffOp::Rotated,
        }
    }
}

impl SolveSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::invalid(format!(
                "tol must be positive and finite, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if self.load_steps == 0 {
            return Err(Error::invalid("load_steps must be at least 1"));
        }
        Ok(())
    }
}

/// Accumulated wall-clock time per solver stage, with call counts so means
/// are well-defined.
#[derive(Clone, Copy, Debug, Default)]
pub struct StageTimings {
    pub total: Duration,
    /// Constitutive evaluations (polarization passes and stress/commit passes).
    pub constitutive: Duration,
    pub constitutive_passes: usize,
    /// Forward + inverse transforms.
    pub transform: Duration,
    /// Green-operator applications (step 3 only).
    pub gamma: Duration,
    pub gamma_applies: usize,
}

impl StageTimings {
    pub fn total_seconds(&self) -> f64 {
        self.total.as_secs_f64()
    }

    pub fn gamma_seconds(&self) -> f64 {
        self.gamma.as_secs_f64()
    }

    pub fn constitutive_seconds(&self) -> f64 {
        self.constitutive.as_secs_f64()
    }

    pub fn transform_seconds(&self) -> f64 {
        self.transform.as_secs_f64()
    }

    /// Mean wall-clock seconds of one Green-operator application.
    pub fn gamma_mean_seconds(&self) -> f64 {
        if self.gamma_applies == 0 {
            0.0
        } else {
            self.gamma.as_secs_f64() / self.gamma_applies as f64
        }
    }

    /// Mean wall-clock seconds of one constitutive pass.
    pub fn constitutive_mean_seconds(&self) -> f64 {
        if self.constitutive_passes == 0 {
            0.0
        } else {
            self.constitutive.as_secs_f64() / self.constitutive_passes as f64
        }
    }
}

/// Everything a solve produces.
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub strain: SymTensorField,
    pub stress: SymTensorField,
    /// Committed internal variables (present when any phase is plastic).
    pub plastic: Option<PlasticField>,
    /// Applied macroscopic strain (full load).
    pub eps_bar: SymTensor,
    /// Volume average of the stress field.
    pub macro_stress: SymTensor,
    /// Iterations spent in each load step.
    pub iterations_per_step: Vec<usize>,
    /// Residual history per load step.
    pub residual_history: Vec<Vec<f64>>,
    /// True when every load step met the tolerance within budget.
    pub converged: bool,
    pub timings: StageTimings,
    /// Largest imaginary residue ratio seen across inverse transforms.
    pub max_imag_residue: f64,
    /// Frequencies whose acoustic tensor was singular (Green tensor zeroed).
    pub singular_frequencies: Vec<[i64; 3]>,
    /// Retained frequencies of the mask that produced this result.
    pub mask_len: usize,
    /// Achieved fraction of retained frequencies.
    pub mask_fraction: f64,
    /// Differential-operator symbol the run used (post-processing reuses it).
    pub diff_op: DiffOp,
}

impl SolveResult {
    /// Total iterations across load steps.
    pub fn total_iterations(&self) -> usize {
        self.iterations_per_step.iter().sum()
    }

    /// Residual reached at the end of the last executed load step.
    pub fn final_residual(&self) -> f64 {
        self.residual_history
            .last()
            .and_then(|h| h.last())
            .copied()
            .unwrap_or(f64::NAN)
    }
}

/// Normalized iterate increment between two raw strain buffers:
/// `||new - old||_2 / (sqrt(n) ||eps_bar||_F)`.
fn residual_raw(new: &[f64], old: &[f64], dim: usize, n: usize, eps_bar: &SymTensor) -> f64 {
    let w = component_weights(dim);
    let m = w.len();
    let mut acc = 0.0;
    for (a, b) in new.chunks_exact(m).zip(old.chunks_exact(m)) {
        for ((x, y), wc) in a.iter().zip(b).zip(w) {
            let d = x - y;
            acc += wc * d * d;
        }
    }
    acc.sqrt() / ((n as f64).sqrt() * eps_bar.frobenius_norm())
}

/// Normalized iterate increment `||new - old||_2 / (sqrt(n) ||eps_bar||_F)`,
/// the quantity compared against the solver tolerance.
pub fn convergence_residual(
    eps_new: &SymTensorField,
    eps_prev: &SymTensorField,
    eps_bar: &SymTensor,
) -> Result<f64> {
    if eps_new.grid() != eps_prev.grid() {
        return Err(Error::invalid("convergence_residual: grids must match"));
    }
    if eps_bar.dim() != eps_new.grid().dim() {
        return Err(Error::invalid(
            "convergence_residual: macro tensor dimension must match the grid",
        ));
    }
    if eps_bar.frobenius_norm() == 0.0 {
        return Err(Error::invalid(
            "convergence_residual: normalization undefined for a zero macro strain",
        ));
    }
    Ok(residual_raw(
        eps_new.data(),
        eps_prev.data(),
        eps_new.grid().dim(),
        eps_new.grid().len(),
        eps_bar,
    ))
}

/// Polarization pass: `tau(x) = sigma(eps(x), state(x)) - C0 : eps(x)`,
/// parallel over voxels. Raw-slice variant shared by the solver and the
/// compatibility step.
pub(crate) fn polarization_into(
    eps: &[f64],
    labels: &[u8],
    materials: &MaterialSet,
    plastic: Option<&PlasticField>,
    medium: &ReferenceMedium,
    dim: usize,
    out: &mut [f64],
) {
    let m = crate::tensor::component_count(dim);
    out.par_chunks_mut(m)
        .enumerate()
        .for_each(|(idx, tau)| {
            let eps_x = SymTensor::from_components(dim, &eps[idx * m..(idx + 1) * m]);
            let state = plastic.map_or_else(PlasticState::virgin, |p| p.at(idx));
            let (sigma, _, _) = stress_voxel(&eps_x, materials.model(labels[idx]), &state);
            // tau = sigma - lambda0 tr(eps) I - 2 mu0 eps
            let lt = medium.lambda0 * eps_x.trace();
            for (c, slot) in tau.iter_mut().enumerate() {
                *slot = sigma.components()[c] - 2.0 * medium.mu0 * eps[idx * m + c];
                if c < dim {
                    *slot -= lt;
                }
            }
        });
}

/// Stress pass: evaluate the constitutive response everywhere; when `commit`
/// is set, write the updated internal variables back.
pub(crate) fn stress_pass(
    eps: &[f64],
    labels: &[u8],
    materials: &MaterialSet,
    plastic: Option<&mut PlasticField>,
    dim: usize,
    commit: bool,
    out: &mut [f64],
) {
    let m = crate::tensor::component_count(dim);
    match plastic {
        None => {
            out.par_chunks_mut(m).enumerate().for_each(|(idx, sig)| {
                let eps_x = SymTensor::from_components(dim, &eps[idx * m..(idx + 1) * m]);
                let (sigma, _, _) =
                    stress_voxel(&eps_x, materials.model(labels[idx]), &PlasticState::virgin());
                sig.copy_from_slice(sigma.components());
            });
        }
        Some(p) if commit => {
            let (eps_p, acc) = p.raw_mut();
            out.par_chunks_mut(m)
                .zip(eps_p.par_chunks_mut(6))
                .zip(acc.par_iter_mut())
                .enumerate()
                .for_each(|(idx, ((sig, ep), a))| {
                    let eps_x = SymTensor::from_components(dim, &eps[idx * m..(idx + 1) * m]);
                    let state = PlasticState {
                        eps_p: SymTensor::from_components(3, ep),
                        eps_p_acc: *a,
                    };
                    let (sigma, new_state, _) =
                        stress_voxel(&eps_x, materials.model(labels[idx]), &state);
                    sig.copy_from_slice(sigma.components());
                    ep.copy_from_slice(new_state.eps_p.components());
                    *a = new_state.eps_p_acc;
                });
        }
        Some(p) => {
            let p = &*p;
            out.par_chunks_mut(m).enumerate().for_each(|(idx, sig)| {
                let eps_x = SymTensor::from_components(dim, &eps[idx * m..(idx + 1) * m]);
                let (sigma, _, _) =
                    stress_voxel(&eps_x, materials.model(labels[idx]), &p.at(idx));
                sig.copy_from_slice(sigma.components());
            });
        }
    }
}

/// Run the basic scheme for a macroscopic strain `eps_bar` on the retained
/// frequencies of `mask`.
///
/// Non-convergence within the iteration budget is not an error: the result
/// carries `converged = false` together with the partial fields (internal
/// variables of the failed step are not committed). Hard failures
/// (non-finite iterates, inconsistent inputs) are errors.
pub fn basic_scheme_solve(
    phases: &PhaseMap,
    materials: &MaterialSet,
    eps_bar: &SymTensor,
    mask: &FrequencyMask,
    settings: &SolveSettings,
) -> Result<SolveResult> {
    let start = Instant::now();
    let grid = *phases.grid();
    settings.validate()?;
    materials.validate(grid.dim())?;
    if eps_bar.dim() != grid.dim() {
        return Err(Error::invalid(format!(
            "macro_strain: dimension {} does not match the {}-D grid",
            eps_bar.dim(),
            grid.dim()
        )));
    }
    if !eps_bar.is_finite() || eps_bar.frobenius_norm() == 0.0 {
        return Err(Error::invalid(
            "macro_strain must be finite and nonzero (the residual is normalized by it)",
        ));
    }
    if mask.grid() != &grid {
        return Err(Error::invalid("mask grid does not match the phase map"));
    }

    let dim = grid.dim();
    let n = grid.len();
    let m = grid.ncomp();
    let labels = phases.labels();

    let medium = reference_medium(materials);
    let mut gamma = GammaOperator::new(grid, medium, settings.diff_op);
    if mask.is_full() {
        gamma.precompute_full();
    } else {
        gamma.precompute(mask);
    }
    let singular_frequencies = gamma.singular_frequencies(mask);

    let mut fft = FftContext::new(&grid);
    let mut timings = StageTimings::default();

    let t_steps = settings.load_steps;
    let delta = eps_bar.scaled(1.0 / t_steps as f64);
    let mut eps: Vec<f64> = SymTensorField::constant(grid, &delta).data().to_vec();
    let mut committed = materials
        .has_plastic_phase()
        .then(|| PlasticField::virgin(grid));
    let mut stress = vec![0.0f64; n * m];

    let mut tau = vec![0.0f64; n * m];
    let mut tau_hat = vec![Complex64::new(0.0, 0.0); n * m];
    // Off-mask entries of eps_hat stay zero for the whole solve; the Green
    // step only ever writes the retained coefficients.
    let mut eps_hat = vec![Complex64::new(0.0, 0.0); n * m];
    let mut work = vec![Complex64::new(0.0, 0.0); n * m];
    let mut eps_new = vec![0.0f64; n * m];

    let mut iterations_per_step = Vec::with_capacity(t_steps);
    let mut residual_history = Vec::with_capacity(t_steps);
    let mut converged = true;
    let mut max_imag_residue = 0.0f64;

    for step in 1..=t_steps {
        let eps_bar_t = eps_bar.scaled(step as f64 / t_steps as f64);
        if step > 1 {
            // Warm start: previous converged strain plus the uniform increment.
            for chunk in eps.chunks_exact_mut(m) {
                for (v, d) in chunk.iter_mut().zip(delta.components()) {
                    *v += d;
                }
            }
        }

        let mut residuals = Vec::new();
        let mut step_converged = false;
        let mut iters = 0;
        while iters < settings.max_iter {
            iters += 1;

            let t = Instant::now();
            polarization_into(&eps, labels, materials, committed.as_ref(), &medium, dim, &mut tau);
            timings.constitutive += t.elapsed();
            timings.constitutive_passes += 1;

            let t = Instant::now();
            fft.forward_raw_into(&tau, m, &mut tau_hat);
            timings.transform += t.elapsed();

            let t = Instant::now();
            gamma.apply_masked_into(&tau_hat, mask, &eps_bar_t, &mut eps_hat);
            timings.gamma += t.elapsed();
            timings.gamma_applies += 1;

            let t = Instant::now();
            work.copy_from_slice(&eps_hat);
            let ratio = fft.inverse_tensor_into(&mut work, m, &mut eps_new);
            timings.transform += t.elapsed();
            max_imag_residue = max_imag_residue.max(ratio);
            if ratio > IMAG_RESIDUE_LIMIT {
                return Err(Error::ImaginaryResidue {
                    ratio,
                    limit: IMAG_RESIDUE_LIMIT,
                });
            }

            let res = residual_raw(&eps_new, &eps, dim, n, &eps_bar_t);
            if !res.is_finite() {
                return Err(Error::Solver(format!(
                    "non-finite iterate at load step {step}, iteration {iters}"
                )));
            }
            residuals.push(res);
            std::mem::swap(&mut eps, &mut eps_new);
            if res <= settings.tol {
                step_converged = true;
                break;
            }
        }
        iterations_per_step.push(iters);
        residual_history.push(residuals);

        // Final stress of the step; commit internal variables only if the
        // step actually converged.
        let t = Instant::now();
        stress_pass(
            &eps,
            labels,
            materials,
            committed.as_mut(),
            dim,
            step_converged,
            &mut stress,
        );
        timings.constitutive += t.elapsed();
        timings.constitutive_passes += 1;

        if !step_converged {
            converged = false;
            break;
        }
    }

    timings.total = start.elapsed();
    let strain = SymTensorField::from_data(grid, eps)?;
    let stress = SymTensorField::from_data(grid, stress)?;
    let macro_stress = stress.volume_average();
    Ok(SolveResult {
        strain,
        stress,
        plastic: committed,
        eps_bar: *eps_bar,
        macro_stress,
        iterations_per_step,
        residual_history,
        converged,
        timings,
        max_imag_residue,
        singular_frequencies,
        mask_len: mask.len(),
        mask_fraction: mask.fraction(),
        diff_op: settings.diff_op,
    })
}
