//! Multi-dimensional FFT for interleaved tensor/scalar fields.
//!
//! `rustfft` provides 1-D transforms of arbitrary length; this module sweeps
//! them along each grid axis with the appropriate stride. Conventions:
//!
//! * forward transform is unnormalized, so the zero-frequency coefficient
//!   equals `n` times the field mean;
//! * inverse transform carries the full `1/n` factor;
//! * inverting a spectrum that should describe a real field checks the
//!   imaginary residue and fails if it exceeds [`IMAG_RESIDUE_LIMIT`] times
//!   the field norm.
//!
//! Lane sweeps run sequentially: transform cost is a small fraction of a
//! solver iteration and sequential sweeps keep results bit-reproducible.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{
    ScalarField, SpectralScalarField, SpectralSymTensorField, SymTensorField,
};
use crate::grid::Grid;

/// Maximum tolerated `||imag|| / ||field||` after an inverse transform of
/// conjugate-symmetric data.
pub const IMAG_RESIDUE_LIMIT: f64 = 1e-8;

struct AxisPlan {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Reusable transform plans and work buffers for one grid.
pub struct FftContext {
    grid: Grid,
    plans: Vec<AxisPlan>,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

enum Direction {
    Forward,
    Inverse,
}

impl FftContext {
    pub fn new(grid: &Grid) -> FftContext {
        let mut planner = FftPlanner::new();
        let mut plans: Vec<AxisPlan> = Vec::new();
        let mut max_len = 0;
        let mut max_scratch = 0;
        for axis in 0..grid.dim() {
            let len = grid.axis_len(axis);
            if !plans.iter().any(|p| p.len == len) {
                let forward = planner.plan_fft_forward(len);
                let inverse = planner.plan_fft_inverse(len);
                max_scratch = max_scratch
                    .max(forward.get_inplace_scratch_len())
                    .max(inverse.get_inplace_scratch_len());
                plans.push(AxisPlan {
                    len,
                    forward,
                    inverse,
                });
            }
            max_len = max_len.max(len);
        }
        FftContext {
            grid: *grid,
            plans,
            line: vec![Complex64::new(0.0, 0.0); max_len],
            scratch: vec![Complex64::new(0.0, 0.0); max_scratch],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Sweep the 1-D transform along every active axis of an interleaved
    /// complex buffer holding `ncomp` components per voxel.
    fn transform_all(&mut self, data: &mut [Complex64], ncomp: usize, dir: Direction) {
        let n = self.grid.len();
        debug_assert_eq!(data.len(), n * ncomp);
        let dims = [
            self.grid.axis_len(0),
            self.grid.axis_len(1),
            self.grid.axis_len(2),
        ];
        let voxel_strides = [1, dims[0], dims[0] * dims[1]];
        for axis in 0..self.grid.dim() {
            let len = dims[axis];
            if len == 1 {
                continue;
            }
            let plan = self
                .plans
                .iter()
                .find(|p| p.len == len)
                .expect("plan for every axis length");
            let fft: &Arc<dyn Fft<f64>> = match dir {
                Direction::Forward => &plan.forward,
                Direction::Inverse => &plan.inverse,
            };
            let stride = voxel_strides[axis] * ncomp;
            let line = &mut self.line[..len];
            // Iterate every lane: all voxels with coordinate 0 on `axis`,
            // times every component.
            let outer2 = if axis == 2 { 1 } else { dims[2] };
            let outer1 = if axis == 1 { 1 } else { dims[1] };
            let outer0 = if axis == 0 { 1 } else { dims[0] };
            for i2 in 0..outer2 {
                for i1 in 0..outer1 {
                    for i0 in 0..outer0 {
                        let vox = i0 + dims[0] * (i1 + dims[1] * i2);
                        for c in 0..ncomp {
                            let base = vox * ncomp + c;
                            for (t, slot) in line.iter_mut().enumerate() {
                                *slot = data[base + t * stride];
                            }
                            fft.process_with_scratch(line, &mut self.scratch);
                            for (t, slot) in line.iter().enumerate() {
                                data[base + t * stride] = *slot;
                            }
                        }
                    }
                }
            }
        }
        if let Direction::Inverse = dir {
            let scale = 1.0 / n as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }

    /// Forward transform of a raw interleaved real buffer.
    pub(crate) fn forward_raw_into(&mut self, src: &[f64], ncomp: usize, out: &mut [Complex64]) {
        debug_assert_eq!(out.len(), src.len());
        for (slot, &v) in out.iter_mut().zip(src) {
            *slot = Complex64::new(v, 0.0);
        }
        self.transform_all(out, ncomp, Direction::Forward);
    }

    /// Forward transform of a tensor field into a caller-provided buffer.
    pub(crate) fn forward_tensor_into(&mut self, field: &SymTensorField, out: &mut [Complex64]) {
        self.forward_raw_into(field.data(), field.ncomp(), out);
    }

    /// Inverse transform of an interleaved coefficient buffer into a real
    /// buffer; returns `||imag|| / ||total||` so callers can enforce
    /// [`IMAG_RESIDUE_LIMIT`]. `spec` is consumed as scratch.
    pub(crate) fn inverse_tensor_into(
        &mut self,
        spec: &mut [Complex64],
        ncomp: usize,
        out: &mut [f64],
    ) -> f64 {
        debug_assert_eq!(spec.len(), out.len());
        self.transform_all(spec, ncomp, Direction::Inverse);
        let mut imag2 = 0.0;
        let mut total2 = 0.0;
        for (slot, v) in out.iter_mut().zip(spec.iter()) {
            imag2 += v.im * v.im;
            total2 += v.norm_sqr();
            *slot = v.re;
        }
        if total2 == 0.0 {
            0.0
        } else {
            (imag2 / total2).sqrt()
        }
    }

    /// Forward transform of a symmetric-tensor field.
    pub fn forward_tensor(&mut self, field: &SymTensorField) -> SpectralSymTensorField {
        let mut out = vec![Complex64::new(0.0, 0.0); field.data().len()];
        self.forward_tensor_into(field, &mut out);
        SpectralSymTensorField::from_data(*field.grid(), out).expect("sized buffer")
    }

    /// Inverse transform back to a real tensor field.
    ///
    /// Fails if the imaginary residue exceeds [`IMAG_RESIDUE_LIMIT`] times
    /// the field norm, which means the spectrum was not conjugate-symmetric.
    pub fn inverse_tensor(&mut self, spec: &SpectralSymTensorField) -> Result<SymTensorField> {
        let mut work = spec.data().to_vec();
        let mut out = vec![0.0; work.len()];
        let ratio = self.inverse_tensor_into(&mut work, spec.ncomp(), &mut out);
        if ratio > IMAG_RESIDUE_LIMIT {
            return Err(Error::ImaginaryResidue {
                ratio,
                limit: IMAG_RESIDUE_LIMIT,
            });
        }
        SymTensorField::from_data(*spec.grid(), out)
    }

    /// Forward transform of a scalar field.
    pub fn forward_scalar(&mut self, field: &ScalarField) -> SpectralScalarField {
        let mut out: Vec<Complex64> = field
            .data()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        self.transform_all(&mut out, 1, Direction::Forward);
        SpectralScalarField::from_data(*field.grid(), out).expect("sized buffer")
    }

    /// Inverse transform back to a real scalar field, with the same residue
    /// check as [`FftContext::inverse_tensor`].
    pub fn inverse_scalar(&mut self, spec: &SpectralScalarField) -> Result<ScalarField> {
        let mut work = spec.data().to_vec();
        self.transform_all(&mut work, 1, Direction::Inverse);
        let mut imag2 = 0.0;
        let mut total2 = 0.0;
        let mut out = vec![0.0; work.len()];
        for (slot, v) in out.iter_mut().zip(work.iter()) {
            imag2 += v.im * v.im;
            total2 += v.norm_sqr();
            *slot = v.re;
        }
        let ratio = if total2 == 0.0 {
            0.0
        } else {
            (imag2 / total2).sqrt()
        };
        if ratio > IMAG_RESIDUE_LIMIT {
            return Err(Error::ImaginaryResidue {
                ratio,
                limit: IMAG_RESIDUE_LIMIT,
            });
        }
        ScalarField::from_data(*spec.grid(), out)
    }
}

/// One-shot forward transform (plans are rebuilt; prefer [`FftContext`] in
/// loops).
pub fn fft_forward(field: &SymTensorField) -> SpectralSymTensorField {
    FftContext::new(field.grid()).forward_tensor(field)
}

/// One-shot inverse transform.
pub fn fft_inverse(spec: &SpectralSymTensorField) -> Result<SymTensorField> {
    FftContext::new(spec.grid()).inverse_tensor(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::SymTensor;

    #[test]
    fn impulse_has_flat_spectrum() {
        let g = Grid::new_2d(4, 4).unwrap();
        let mut f = ScalarField::zeros(g);
        f.data_mut()[0] = 1.0;
        let spec = FftContext::new(&g).forward_scalar(&f);
        for v in spec.data() {
            assert!((v.re - 1.0).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn dc_coefficient_is_n_times_mean() {
        let g = Grid::new_3d(3, 4, 2).unwrap();
        let mut f = SymTensorField::zeros(g);
        for idx in 0..g.len() {
            let v = (idx as f64 * 0.37).sin();
            f.set(idx, &SymTensor::from_components(3, &[v, -v, 0.5 * v, v * v, 0.0, 1.0]));
        }
        let spec = FftContext::new(&g).forward_tensor(&f);
        let mean = f.volume_average();
        let dc = spec.coeff(g.index_of_freq([0, 0, 0]));
        for (c, m) in dc.iter().zip(mean.components()) {
            assert!((c.re - g.len() as f64 * m).abs() < 1e-9);
            assert!(c.im.abs() < 1e-9);
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let g = Grid::new_2d(6, 5).unwrap();
        let mut f = SymTensorField::zeros(g);
        for idx in 0..g.len() {
            let v = ((idx * 7 % 13) as f64 - 6.0) * 0.1;
            f.set(idx, &SymTensor::from_components(2, &[v, v * v, -v]));
        }
        let mut ctx = FftContext::new(&g);
        let spec = ctx.forward_tensor(&f);
        let back = ctx.inverse_tensor(&spec).unwrap();
        assert!(f.l2_distance(&back) < 1e-12 * (1.0 + f.l2_norm()));
    }

    #[test]
    fn plane_wave_lands_on_single_frequency() {
        let g = Grid::new_2d(8, 8).unwrap();
        let mut f = ScalarField::zeros(g);
        for idx in 0..g.len() {
            let c = g.coords_of(idx);
            f.data_mut()[idx] = (2.0 * std::f64::consts::PI * (2.0 * c[0] as f64) / 8.0).cos();
        }
        let spec = FftContext::new(&g).forward_scalar(&f);
        // cos splits into (+2, 0) and (-2, 0), each with weight n/2.
        let plus = spec.data()[g.index_of_freq([2, 0, 0])];
        let minus = spec.data()[g.index_of_freq([-2, 0, 0])];
        assert!((plus.re - 32.0).abs() < 1e-9 && plus.im.abs() < 1e-9);
        assert!((minus.re - 32.0).abs() < 1e-9 && minus.im.abs() < 1e-9);
        let total: f64 = spec.data().iter().map(|v| v.norm()).sum();
        assert!((total - 64.0).abs() < 1e-9, "no energy elsewhere");
    }

    #[test]
    fn broken_hermitian_symmetry_is_rejected() {
        let g = Grid::new_2d(4, 4).unwrap();
        let mut spec = SpectralSymTensorField::zeros(g);
        // A lone coefficient at a non-self-paired frequency cannot come from
        // a real field.
        let idx = g.index_of_freq([1, 0, 0]);
        spec.coeff_mut(idx)[0] = Complex64::new(1.0, 0.5);
        let err = FftContext::new(&g).inverse_tensor(&spec);
        assert!(matches!(err, Err(Error::ImaginaryResidue { .. })));
    }

    #[test]
    fn parseval_holds_for_unnormalized_forward() {
        // sum_x |f|^2 = (1/n) sum_k |f_hat|^2 for the unnormalized forward.
        let g = Grid::new_3d(4, 3, 5).unwrap();
        let mut f = ScalarField::zeros(g);
        for idx in 0..g.len() {
            f.data_mut()[idx] = ((idx * 11 % 17) as f64 - 8.0) * 0.25;
        }
        let spec = FftContext::new(&g).forward_scalar(&f);
        let real_energy: f64 = f.data().iter().map(|v| v * v).sum();
        let spec_energy: f64 = spec.data().iter().map(|v| v.norm_sqr()).sum();
        assert!((real_energy - spec_energy / g.len() as f64).abs() < 1e-9 * real_energy.max(1.0));
    }
}
