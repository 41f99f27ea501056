//! Voxel fields: real and spectral, tensor-valued and scalar-valued.
//!
//! Storage is a flat vector with components interleaved per voxel
//! (`data[idx * m + c]`), which keeps constitutive updates cache-friendly and
//! lets the FFT sweep axes with fixed strides.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::tensor::{component_weights, SymTensor};

/// Real symmetric-tensor field (strain, stress, polarization).
#[derive(Clone, Debug)]
pub struct SymTensorField {
    grid: Grid,
    data: Vec<f64>,
}

impl SymTensorField {
    pub fn zeros(grid: Grid) -> SymTensorField {
        let len = grid.len() * grid.ncomp();
        SymTensorField {
            grid,
            data: vec![0.0; len],
        }
    }

    /// Spatially constant field.
    pub fn constant(grid: Grid, value: &SymTensor) -> SymTensorField {
        assert_eq!(grid.dim(), value.dim());
        let mut f = SymTensorField::zeros(grid);
        let m = grid.ncomp();
        for chunk in f.data.chunks_mut(m) {
            chunk.copy_from_slice(value.components());
        }
        f
    }

    /// Wrap an interleaved component vector.
    pub fn from_data(grid: Grid, data: Vec<f64>) -> Result<SymTensorField> {
        if data.len() != grid.len() * grid.ncomp() {
            return Err(Error::invalid(format!(
                "tensor field: {} values for {} voxels x {} components",
                data.len(),
                grid.len(),
                grid.ncomp()
            )));
        }
        Ok(SymTensorField { grid, data })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.grid.ncomp()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Tensor at voxel `idx`.
    pub fn at(&self, idx: usize) -> SymTensor {
        let m = self.ncomp();
        SymTensor::from_components(self.grid.dim(), &self.data[idx * m..(idx + 1) * m])
    }

    pub fn set(&mut self, idx: usize, value: &SymTensor) {
        let m = self.ncomp();
        self.data[idx * m..(idx + 1) * m].copy_from_slice(value.components());
    }

    /// Volume average `<f> = (1/n) sum_x f(x)`.
    pub fn volume_average(&self) -> SymTensor {
        let m = self.ncomp();
        let mut acc = vec![0.0; m];
        for chunk in self.data.chunks_exact(m) {
            for (a, v) in acc.iter_mut().zip(chunk) {
                *a += v;
            }
        }
        let n = self.grid.len() as f64;
        for a in acc.iter_mut() {
            *a /= n;
        }
        SymTensor::from_components(self.grid.dim(), &acc)
    }

    /// Field L2 norm `sqrt(sum_x ||f(x)||_F^2)` (Frobenius per voxel,
    /// counting off-diagonal components twice).
    pub fn l2_norm(&self) -> f64 {
        let m = self.ncomp();
        let w = component_weights(self.grid.dim());
        let mut acc = 0.0;
        for chunk in self.data.chunks_exact(m) {
            for (v, wc) in chunk.iter().zip(w) {
                acc += wc * v * v;
            }
        }
        acc.sqrt()
    }

    /// L2 norm of `self - other`.
    pub fn l2_distance(&self, other: &SymTensorField) -> f64 {
        assert_eq!(self.grid, other.grid);
        let m = self.ncomp();
        let w = component_weights(self.grid.dim());
        let mut acc = 0.0;
        for (a, b) in self
            .data
            .chunks_exact(m)
            .zip(other.data.chunks_exact(m))
        {
            for ((x, y), wc) in a.iter().zip(b).zip(w) {
                let d = x - y;
                acc += wc * d * d;
            }
        }
        acc.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Complex Fourier-coefficient field with the same component layout as
/// [`SymTensorField`]; position `idx` holds the coefficient of the frequency
/// `grid.freq_of(idx)`.
#[derive(Clone, Debug)]
pub struct SpectralSymTensorField {
    grid: Grid,
    data: Vec<Complex64>,
}

impl SpectralSymTensorField {
    pub fn zeros(grid: Grid) -> SpectralSymTensorField {
        let len = grid.len() * grid.ncomp();
        SpectralSymTensorField {
            grid,
            data: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn from_data(grid: Grid, data: Vec<Complex64>) -> Result<SpectralSymTensorField> {
        if data.len() != grid.len() * grid.ncomp() {
            return Err(Error::invalid(format!(
                "spectral field: {} values for {} voxels x {} components",
                data.len(),
                grid.len(),
                grid.ncomp()
            )));
        }
        Ok(SpectralSymTensorField { grid, data })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.grid.ncomp()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Component slice of the coefficient at storage position `idx`.
    pub fn coeff(&self, idx: usize) -> &[Complex64] {
        let m = self.ncomp();
        &self.data[idx * m..(idx + 1) * m]
    }

    pub fn coeff_mut(&mut self, idx: usize) -> &mut [Complex64] {
        let m = self.ncomp();
        &mut self.data[idx * m..(idx + 1) * m]
    }

    /// L2 norm over all coefficients (component-weighted like the real field).
    pub fn l2_norm(&self) -> f64 {
        let m = self.ncomp();
        let w = component_weights(self.grid.dim());
        let mut acc = 0.0;
        for chunk in self.data.chunks_exact(m) {
            for (v, wc) in chunk.iter().zip(w) {
                acc += wc * v.norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Largest Hermitian-symmetry violation `max |c(m) - conj(c(-m))|`,
    /// useful when validating that a spectrum describes a real field.
    pub fn hermitian_violation(&self) -> f64 {
        let m = self.ncomp();
        let mut worst = 0.0f64;
        for idx in 0..self.grid.len() {
            let p = self.grid.hermitian_partner(idx);
            let a = self.coeff(idx);
            let b = &self.data[p * m..(p + 1) * m];
            for c in 0..m {
                worst = worst.max((a[c] - b[c].conj()).norm());
            }
        }
        worst
    }
}

/// Real scalar field (phase indicators as reals, error maps, previews).
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> ScalarField {
        ScalarField {
            grid,
            data: vec![0.0; grid.len()],
        }
    }

    pub fn from_data(grid: Grid, data: Vec<f64>) -> Result<ScalarField> {
        if data.len() != grid.len() {
            return Err(Error::invalid(format!(
                "scalar field: {} values for {} voxels",
                data.len(),
                grid.len()
            )));
        }
        Ok(ScalarField { grid, data })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn at(&self, idx: usize) -> f64 {
        self.data[idx]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn l2_distance(&self, other: &ScalarField) -> f64 {
        assert_eq!(self.grid, other.grid);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Complex Fourier coefficients of a scalar field.
#[derive(Clone, Debug)]
pub struct SpectralScalarField {
    grid: Grid,
    data: Vec<Complex64>,
}

impl SpectralScalarField {
    pub fn zeros(grid: Grid) -> SpectralScalarField {
        SpectralScalarField {
            grid,
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_data(grid: Grid, data: Vec<Complex64>) -> Result<SpectralScalarField> {
        if data.len() != grid.len() {
            return Err(Error::invalid(format!(
                "spectral scalar field: {} values for {} voxels",
                data.len(),
                grid.len()
            )));
        }
        Ok(SpectralScalarField { grid, data })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_average_of_constant_is_the_constant() {
        let g = Grid::new_2d(4, 6).unwrap();
        let t = SymTensor::from_components(2, &[1.0, -0.5, 0.25]);
        let f = SymTensorField::constant(g, &t);
        let avg = f.volume_average();
        for (a, b) in avg.components().iter().zip(t.components()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn l2_norm_weights_shear_components() {
        let g = Grid::new_2d(2, 2).unwrap();
        let mut f = SymTensorField::zeros(g);
        f.set(0, &SymTensor::from_components(2, &[0.0, 0.0, 1.0]));
        // One voxel with eps_12 = 1: ||.||_F^2 = 2.
        assert!((f.l2_norm() - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn from_data_validates_length() {
        let g = Grid::new_2d(2, 2).unwrap();
        assert!(SymTensorField::from_data(g, vec![0.0; 11]).is_err());
        assert!(ScalarField::from_data(g, vec![0.0; 3]).is_err());
    }
}
