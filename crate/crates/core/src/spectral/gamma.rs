//! Green operator of the isotropic reference medium in Fourier space.
//!
//! For a frequency vector `k` (continuous or rotated symbol) the acoustic
//! tensor of the reference medium `C0` is
//!
//! ```text
//! A_ik = mu0 |k|^2 delta_ik + (lambda0 + mu0) b_ik,   b_ik = Re(k_i conj(k_k)),
//! ```
//!
//! real and symmetric because both supported symbols factor into a complex
//! scalar times a real vector (`b` is then exactly `|s|^2 v v^T`). With
//! `G = A^{-1}` the strain Green operator is the symmetrization
//!
//! ```text
//! Gamma_ijkl = 1/4 (G_ik b_jl + G_jk b_il + G_il b_jk + G_jl b_ik),
//! ```
//!
//! which is therefore exactly real as well. The zero frequency maps to the
//! zero tensor, as does any frequency whose acoustic tensor is singular
//! (e.g. the even-grid corner modes of the rotated symbol) and, for the
//! continuous symbol, the direction-ambiguous even-grid Nyquist rows; those
//! frequencies are recorded so callers can report them.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{SpectralSymTensorField, SymTensorField};
use crate::grid::Grid;
use crate::materials::ReferenceMedium;
use crate::sampling::FrequencyMask;
use crate::tensor::{component_pairs, SymTensor, SymTensor4};

use super::freq::{frequency_vector, DiffOp};

/// Relative threshold below which `|k|^2` is treated as zero (singular
/// acoustic tensor). Scaled by the largest representable `|k|^2` on the
/// grid, so it is resolution-independent.
const SINGULAR_REL_TOL: f64 = 1e-24;

/// Green operator tensor for one frequency vector. Returns the zero tensor
/// for the zero frequency and for singular acoustic tensors; the boolean
/// reports whether the tensor was zeroed because of singularity (the zero
/// frequency itself does not count).
pub fn gamma_hat_checked(
    k: &[Complex64; 3],
    dim: usize,
    medium: &ReferenceMedium,
    ksq_scale: f64,
) -> (SymTensor4, bool) {
    // b_ik = Re(k_i conj(k_k)); both symbols make the imaginary part vanish.
    let mut b = [[0.0f64; 3]; 3];
    for i in 0..dim {
        for j in 0..dim {
            b[i][j] = (k[i] * k[j].conj()).re;
        }
    }
    let ksq: f64 = (0..dim).map(|i| b[i][i]).sum();
    if ksq <= SINGULAR_REL_TOL * ksq_scale {
        return (SymTensor4::zero(dim), true);
    }
    // Acoustic tensor and its inverse.
    let mut a = [[0.0f64; 3]; 3];
    let lm = medium.lambda0 + medium.mu0;
    for i in 0..dim {
        for j in 0..dim {
            a[i][j] = lm * b[i][j];
        }
        a[i][i] += medium.mu0 * ksq;
    }
    let g = match dim {
        2 => invert_2x2(&a),
        _ => invert_3x3(&a),
    };
    let g = match g {
        Some(g) => g,
        None => return (SymTensor4::zero(dim), true),
    };
    let mut out = SymTensor4::zero(dim);
    for &(i, j) in component_pairs(dim) {
        for &(k_, l) in component_pairs(dim) {
            let v = 0.25
                * (g[i][k_] * b[j][l] + g[j][k_] * b[i][l] + g[i][l] * b[j][k_]
                    + g[j][l] * b[i][k_]);
            out.set(i, j, k_, l, v);
        }
    }
    (out, false)
}

/// Green operator tensor for one frequency vector of the reference medium
/// (zero tensor at the zero frequency / singular frequencies).
pub fn gamma_hat(k: &[Complex64; 3], dim: usize, medium: &ReferenceMedium) -> SymTensor4 {
    let ksq_scale = k.iter().map(|v| v.norm_sqr()).sum::<f64>().max(1.0);
    gamma_hat_checked(k, dim, medium, ksq_scale).0
}

fn invert_2x2(a: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < f64::MIN_POSITIVE * 1e10 {
        return None;
    }
    let mut g = [[0.0; 3]; 3];
    g[0][0] = a[1][1] / det;
    g[1][1] = a[0][0] / det;
    g[0][1] = -a[0][1] / det;
    g[1][0] = -a[1][0] / det;
    Some(g)
}

fn invert_3x3(a: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let c00 = a[1][1] * a[2][2] - a[1][2] * a[2][1];
    let c01 = a[1][2] * a[2][0] - a[1][0] * a[2][2];
    let c02 = a[1][0] * a[2][1] - a[1][1] * a[2][0];
    let det = a[0][0] * c00 + a[0][1] * c01 + a[0][2] * c02;
    if det.abs() < f64::MIN_POSITIVE * 1e10 {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut g = [[0.0; 3]; 3];
    g[0][0] = c00 * inv_det;
    g[1][0] = c01 * inv_det;
    g[2][0] = c02 * inv_det;
    g[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * inv_det;
    g[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * inv_det;
    g[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * inv_det;
    g[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * inv_det;
    g[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * inv_det;
    g[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * inv_det;
    Some(g)
}

/// Byte budget for the dense full-spectrum table: large enough for any 2-D
/// grid and for 3-D grids up to 64^3, while grids like 256^3 (which would
/// need gigabytes) fall back to recomputing tensors on the fly.
const FULL_TABLE_MAX_BYTES: usize = 160 << 20;

/// Green operator of a reference medium on a grid, with an optional
/// per-frequency cache aligned to a reduced mask.
///
/// Reduced masks visit the same few frequencies every iteration, so their
/// tensors are precomputed once ([`GammaOperator::precompute`]). The full
/// mask visits all `n` frequencies; [`GammaOperator::precompute_full`]
/// tabulates them as flat matrix rows (weights and the leading minus sign
/// folded in) when that fits the byte budget, and otherwise the apply
/// recomputes tensors on the fly to avoid an `O(n m^2)` memory footprint.
pub struct GammaOperator {
    grid: Grid,
    medium: ReferenceMedium,
    op: DiffOp,
    ksq_scale: f64,
    cache: Option<Vec<SymTensor4>>,
    cache_len: usize,
    full_table: Option<Vec<f64>>,
}

impl GammaOperator {
    pub fn new(grid: Grid, medium: ReferenceMedium, op: DiffOp) -> GammaOperator {
        // Largest |k|^2 on the grid, used to make the singularity threshold
        // relative: both symbols are bounded by ~(2 pi / h_j) per axis.
        let mut scale = 0.0;
        for j in 0..grid.dim() {
            let per_axis = 2.0 * std::f64::consts::PI / grid.spacing(j);
            scale += per_axis * per_axis;
        }
        GammaOperator {
            grid,
            medium,
            op,
            ksq_scale: scale,
            cache: None,
            cache_len: 0,
            full_table: None,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn medium(&self) -> &ReferenceMedium {
        &self.medium
    }

    pub fn diff_op(&self) -> DiffOp {
        self.op
    }

    /// Tensor for the frequency at storage position `idx`, with the
    /// singularity flag.
    pub fn compute_at(&self, idx: usize) -> (SymTensor4, bool) {
        let m = self.grid.freq_of(idx);
        if m == [0, 0, 0] {
            return (SymTensor4::zero(self.grid.dim()), false);
        }
        // Even-grid Nyquist rows are direction-ambiguous for the continuous
        // symbol: the slot at m_j = -N_j/2 also represents +N_j/2, and the
        // two aliases point along different rays unless every other axis is
        // zero or Nyquist too. A direction-dependent multiplier there breaks
        // the Hermitian symmetry of the output, so those frequencies are
        // zeroed (the rotated symbol needs no such guard: its transverse
        // components vanish on Nyquist rows by construction).
        if self.op == DiffOp::Continuous && self.is_ambiguous_nyquist(m) {
            return (SymTensor4::zero(self.grid.dim()), true);
        }
        let k = frequency_vector(self.op, m, &self.grid);
        gamma_hat_checked(&k, self.grid.dim(), &self.medium, self.ksq_scale)
    }

    /// Whether `m` sits on an even-axis Nyquist row with a nonzero,
    /// non-Nyquist component on some other axis (the alias-ambiguous case).
    fn is_ambiguous_nyquist(&self, m: [i64; 3]) -> bool {
        let mut any_nyquist = false;
        let mut any_other = false;
        for (j, &mj) in m[..self.grid.dim()].iter().enumerate() {
            let n = self.grid.axis_len(j) as i64;
            if n % 2 == 0 && mj == -n / 2 {
                any_nyquist = true;
            } else if mj != 0 {
                any_other = true;
            }
        }
        any_nyquist && any_other
    }

    /// Tensor for the frequency at storage position `idx`.
    pub fn at(&self, idx: usize) -> SymTensor4 {
        self.compute_at(idx).0
    }

    /// Precompute tensors for the retained frequencies of a reduced mask.
    pub fn precompute(&mut self, mask: &FrequencyMask) {
        let tensors: Vec<SymTensor4> = mask
            .retained()
            .par_iter()
            .map(|&idx| self.compute_at(idx).0)
            .collect();
        self.cache_len = tensors.len();
        self.cache = Some(tensors);
    }

    /// Tabulate the whole spectrum as flat `m x m` matrix rows with the
    /// component weights and the basic-scheme minus sign folded in, so a
    /// full-mask apply is a plain matrix-vector product per frequency. A
    /// no-op when the table would exceed the byte budget; the apply then
    /// keeps recomputing tensors on the fly.
    pub fn precompute_full(&mut self) {
        let n = self.grid.len();
        let m = self.grid.ncomp();
        if n * m * m * std::mem::size_of::<f64>() > FULL_TABLE_MAX_BYTES {
            return;
        }
        let w = crate::tensor::component_weights(self.grid.dim());
        let mut table = vec![0.0f64; n * m * m];
        table
            .par_chunks_mut(m * m)
            .enumerate()
            .for_each(|(idx, row)| {
                let g = self.compute_at(idx).0;
                for a in 0..m {
                    for b in 0..m {
                        row[a * m + b] = -g.flat(a, b) * w[b];
                    }
                }
            });
        self.full_table = Some(table);
    }

    pub fn is_cached(&self) -> bool {
        self.cache.is_some() || self.full_table.is_some()
    }

    /// Frequencies in the mask whose acoustic tensor is singular (their
    /// Green tensor is zeroed). Reported as centered indices.
    pub fn singular_frequencies(&self, mask: &FrequencyMask) -> Vec<[i64; 3]> {
        mask.retained()
            .iter()
            .filter(|&&idx| self.compute_at(idx).1)
            .map(|&idx| self.grid.freq_of(idx))
            .collect()
    }

    /// Step (c) of the basic scheme on raw interleaved buffers:
    /// `eps_hat = -Gamma : tau_hat` on the retained frequencies,
    /// `eps_hat(0) = n * eps_bar`, everything off-mask untouched (the solver
    /// keeps those entries structurally zero).
    pub(crate) fn apply_masked_into(
        &self,
        tau_hat: &[Complex64],
        mask: &FrequencyMask,
        eps_bar: &SymTensor,
        out: &mut [Complex64],
    ) {
        let ncomp = self.grid.ncomp();
        let n = self.grid.len();
        debug_assert_eq!(tau_hat.len(), n * ncomp);
        debug_assert_eq!(out.len(), n * ncomp);
        if mask.is_full() {
            if let Some(table) = &self.full_table {
                // Tabulated spectrum: one weighted matrix-vector product per
                // frequency (minus sign already folded into the rows).
                out.par_chunks_mut(ncomp)
                    .zip(tau_hat.par_chunks(ncomp))
                    .zip(table.par_chunks(ncomp * ncomp))
                    .enumerate()
                    .for_each(|(idx, ((o, t), row))| {
                        if idx == 0 {
                            for (slot, &e) in o.iter_mut().zip(eps_bar.components()) {
                                *slot = Complex64::new(n as f64 * e, 0.0);
                            }
                            return;
                        }
                        for (a, slot) in o.iter_mut().enumerate() {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for (b, &c) in row[a * ncomp..(a + 1) * ncomp].iter().enumerate() {
                                acc += t[b] * c;
                            }
                            *slot = acc;
                        }
                    });
                return;
            }
            // Untabulated full mask: recompute tensors on the fly, in parallel.
            out.par_chunks_mut(ncomp)
                .zip(tau_hat.par_chunks(ncomp))
                .enumerate()
                .for_each(|(idx, (o, t))| {
                    if idx == 0 {
                        for (slot, &e) in o.iter_mut().zip(eps_bar.components()) {
                            *slot = Complex64::new(n as f64 * e, 0.0);
                        }
                    } else {
                        let g = self.at(idx);
                        g.apply_complex(t, o);
                        for v in o.iter_mut() {
                            *v = -*v;
                        }
                    }
                });
            return;
        }
        // Reduced mask: walk the retained list with the cache. The list is
        // short, so a sequential sweep is both fast and deterministic.
        let cache = self.cache.as_ref();
        if let Some(c) = cache {
            debug_assert_eq!(c.len(), mask.retained().len(), "cache/mask mismatch");
        }
        for (pos, &idx) in mask.retained().iter().enumerate() {
            let o = &mut out[idx * ncomp..(idx + 1) * ncomp];
            if idx == 0 {
                for (slot, &e) in o.iter_mut().zip(eps_bar.components()) {
                    *slot = Complex64::new(n as f64 * e, 0.0);
                }
                continue;
            }
            let g = match cache {
                Some(c) => c[pos],
                None => self.at(idx),
            };
            g.apply_complex(&tau_hat[idx * ncomp..(idx + 1) * ncomp], o);
            for v in o.iter_mut() {
                *v = -*v;
            }
        }
    }
}

/// Step (c) of the basic scheme as a standalone operation:
/// `eps_hat = -Gamma : tau_hat` on retained frequencies, `n * eps_bar` at the
/// zero frequency, zero elsewhere.
pub fn apply_gamma_masked(
    tau_hat: &SpectralSymTensorField,
    mask: &FrequencyMask,
    gamma: &GammaOperator,
    eps_bar: &SymTensor,
) -> Result<SpectralSymTensorField> {
    if tau_hat.grid() != gamma.grid() || mask.grid() != gamma.grid() {
        return Err(Error::invalid(
            "apply_gamma_masked: field, mask and operator grids must match",
        ));
    }
    if eps_bar.dim() != gamma.grid().dim() {
        return Err(Error::invalid(
            "apply_gamma_masked: macro tensor dimension must match the grid",
        ));
    }
    let mut out = SpectralSymTensorField::zeros(*gamma.grid());
    gamma.apply_masked_into(tau_hat.data(), mask, eps_bar, out.data_mut());
    Ok(out)
}

/// Convenience wrapper: the real-space strain field produced by one Green
/// step from a real polarization field.
pub fn gamma_step(
    tau: &SymTensorField,
    mask: &FrequencyMask,
    gamma: &GammaOperator,
    eps_bar: &SymTensor,
) -> Result<SymTensorField> {
    let mut fft = crate::fft::FftContext::new(tau.grid());
    let tau_hat = fft.forward_tensor(tau);
    let eps_hat = apply_gamma_masked(&tau_hat, mask, gamma, eps_bar)?;
    fft.inverse_tensor(&eps_hat)
}
