//! Regular periodic voxel grid on the unit cell `[0,1)^d` and the two-phase
//! indicator map living on it.
//!
//! Linear voxel order is axis-0-fastest: `idx = i0 + N0*(i1 + N1*i2)`.
//! The same order indexes Fourier coefficients; per-axis frequency indices
//! use the centered convention `m_j in [-N_j/2, N_j/2)`, mapped to storage
//! position `a_j = m_j mod N_j`.

use crate::error::{Error, Result};

/// Grid geometry: dimensionality and voxel counts per axis.
///
/// Unused trailing axes carry length 1 so index arithmetic is uniform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    dim: usize,
    dims: [usize; 3],
}

impl Grid {
    /// 2-D grid with `n0 x n1` voxels.
    pub fn new_2d(n0: usize, n1: usize) -> Result<Grid> {
        Grid::from_dims(&[n0, n1])
    }

    /// 3-D grid with `n0 x n1 x n2` voxels.
    pub fn new_3d(n0: usize, n1: usize, n2: usize) -> Result<Grid> {
        Grid::from_dims(&[n0, n1, n2])
    }

    /// Build from a slice of per-axis voxel counts (length 2 or 3, each >= 2).
    pub fn from_dims(dims: &[usize]) -> Result<Grid> {
        if dims.len() != 2 && dims.len() != 3 {
            return Err(Error::invalid(format!(
                "grid: expected 2 or 3 axes, got {}",
                dims.len()
            )));
        }
        if let Some(&bad) = dims.iter().find(|&&n| n < 2) {
            return Err(Error::invalid(format!(
                "grid: every axis needs at least 2 voxels, got {bad}"
            )));
        }
        let mut d = [1usize; 3];
        d[..dims.len()].copy_from_slice(dims);
        Ok(Grid {
            dim: dims.len(),
            dims: d,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Voxel counts of the active axes.
    pub fn dims(&self) -> &[usize] {
        &self.dims[..self.dim]
    }

    /// Voxel count along `axis` (1 for inactive axes).
    pub fn axis_len(&self, axis: usize) -> usize {
        self.dims[axis]
    }

    /// Total voxel count `n`.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Voxel spacing along `axis` (`h_j = 1 / N_j`; cell length is 1).
    pub fn spacing(&self, axis: usize) -> f64 {
        1.0 / self.dims[axis] as f64
    }

    /// Independent components of a symmetric tensor field on this grid.
    pub fn ncomp(&self) -> usize {
        crate::tensor::component_count(self.dim)
    }

    /// Linear index of voxel coordinates (unused axes must be 0).
    pub fn index_of(&self, c: [usize; 3]) -> usize {
        debug_assert!(c[0] < self.dims[0] && c[1] < self.dims[1] && c[2] < self.dims[2]);
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    /// Voxel coordinates of a linear index.
    pub fn coords_of(&self, idx: usize) -> [usize; 3] {
        debug_assert!(idx < self.len());
        let i0 = idx % self.dims[0];
        let r = idx / self.dims[0];
        let i1 = r % self.dims[1];
        let i2 = r / self.dims[1];
        [i0, i1, i2]
    }

    /// Center of voxel `idx` in the unit cell, `x_j = (i_j + 1/2) h_j`.
    pub fn voxel_center(&self, idx: usize) -> [f64; 3] {
        let c = self.coords_of(idx);
        let mut x = [0.0; 3];
        for j in 0..self.dim {
            x[j] = (c[j] as f64 + 0.5) * self.spacing(j);
        }
        x
    }

    /// Centered frequency index of storage position `idx`
    /// (`m_j in [-N_j/2, N_j/2)`; inactive axes report 0).
    pub fn freq_of(&self, idx: usize) -> [i64; 3] {
        let c = self.coords_of(idx);
        let mut m = [0i64; 3];
        for j in 0..self.dim {
            let n = self.dims[j] as i64;
            let a = c[j] as i64;
            m[j] = if 2 * a < n { a } else { a - n };
        }
        m
    }

    /// Storage position of a centered frequency index.
    pub fn index_of_freq(&self, m: [i64; 3]) -> usize {
        debug_assert!(self.freq_in_range(m), "frequency {m:?} out of range");
        let mut c = [0usize; 3];
        for j in 0..self.dim {
            let n = self.dims[j] as i64;
            c[j] = m[j].rem_euclid(n) as usize;
        }
        self.index_of(c)
    }

    /// Whether `m` lies in the centered index range of this grid.
    pub fn freq_in_range(&self, m: [i64; 3]) -> bool {
        m.iter().zip(&self.dims).all(|(&mj, &nj)| {
            let n = nj as i64;
            let lo = -(n / 2);
            let hi = (n - 1) / 2; // inclusive
            (lo..=hi).contains(&mj)
        })
    }

    /// Storage position of the Hermitian partner `-m` (component-wise mod
    /// `N_j`, so Nyquist rows for even `N_j` map to themselves).
    pub fn hermitian_partner(&self, idx: usize) -> usize {
        let c = self.coords_of(idx);
        let mut p = [0usize; 3];
        for j in 0..3 {
            let n = self.dims[j];
            p[j] = (n - c[j]) % n;
        }
        self.index_of(p)
    }
}

/// Voxel-wise phase labels (0 = matrix, 1 = inclusion) on a [`Grid`].
#[derive(Clone, Debug)]
pub struct PhaseMap {
    grid: Grid,
    labels: Vec<u8>,
}

impl PhaseMap {
    /// Wrap a label vector; every label must be 0 or 1 and the length must
    /// match the grid.
    pub fn new(grid: Grid, labels: Vec<u8>) -> Result<PhaseMap> {
        if labels.len() != grid.len() {
            return Err(Error::invalid(format!(
                "phase map: {} labels for a grid of {} voxels",
                labels.len(),
                grid.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::invalid(format!(
                "phase map: labels must be 0 or 1, found {bad}"
            )));
        }
        Ok(PhaseMap { grid, labels })
    }

    /// All-matrix (label 0) map.
    pub fn homogeneous(grid: Grid) -> PhaseMap {
        PhaseMap {
            grid,
            labels: vec![0; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, idx: usize) -> u8 {
        self.labels[idx]
    }

    /// Volume fraction of phase 1.
    pub fn volume_fraction(&self) -> f64 {
        let ones: usize = self.labels.iter().map(|&l| l as usize).sum();
        ones as f64 / self.labels.len() as f64
    }

    /// True if only one phase is present.
    pub fn is_single_phase(&self) -> bool {
        let f = self.volume_fraction();
        f == 0.0 || f == 1.0
    }
}
