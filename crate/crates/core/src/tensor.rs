//! Small dense symmetric tensors in Voigt-like component storage.
//!
//! Second-order symmetric tensors store only their independent components,
//! ordered `[11, 22, 12]` in 2-D and `[11, 22, 33, 12, 13, 23]` in 3-D.
//! Shear components hold the tensor entry itself (no factor-2 engineering
//! convention); norms and contractions apply the off-diagonal multiplicity
//! explicitly, so `frobenius_norm` and `ddot` agree with the full-matrix
//! definitions.
//!
//! Fourth-order tensors with minor symmetries are stored as a matrix acting
//! on the component vector; `apply` folds in the shear weights.

use num_complex::Complex64;

/// Maximum number of independent components (3-D case).
pub const MAX_COMP: usize = 6;

/// Number of independent components of a symmetric tensor in `dim` dimensions.
pub fn component_count(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Index pairs `(i, j)` for each stored component, in storage order.
pub fn component_pairs(dim: usize) -> &'static [(usize, usize)] {
    match dim {
        2 => &[(0, 0), (1, 1), (0, 1)],
        3 => &[(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)],
        _ => panic!("symmetric tensors support dim 2 or 3, got {dim}"),
    }
}

/// Human-readable component labels, in storage order.
pub fn component_names(dim: usize) -> &'static [&'static str] {
    match dim {
        2 => &["11", "22", "12"],
        3 => &["11", "22", "33", "12", "13", "23"],
        _ => panic!("symmetric tensors support dim 2 or 3, got {dim}"),
    }
}

/// Storage index of component `(i, j)` (order-insensitive).
pub fn component_index(dim: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    match (dim, a, b) {
        (_, _, _) if a == b && a < dim => a,
        (2, 0, 1) => 2,
        (3, 0, 1) => 3,
        (3, 0, 2) => 4,
        (3, 1, 2) => 5,
        _ => panic!("component ({i},{j}) out of range for dim {dim}"),
    }
}

/// Multiplicity of each stored component in full-matrix sums
/// (1 for diagonal entries, 2 for off-diagonal ones).
pub fn component_weights(dim: usize) -> &'static [f64] {
    match dim {
        2 => &[1.0, 1.0, 2.0],
        3 => &[1.0, 1.0, 1.0, 2.0, 2.0, 2.0],
        _ => panic!("symmetric tensors support dim 2 or 3, got {dim}"),
    }
}

/// Symmetric second-order tensor in 2-D or 3-D.
///
/// Also used for macroscopic (volume-averaged) quantities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymTensor {
    dim: usize,
    c: [f64; MAX_COMP],
}

/// A macroscopic average is just one symmetric tensor.
pub type MacroTensor = SymTensor;

impl SymTensor {
    /// Zero tensor.
    pub fn zero(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "dim must be 2 or 3");
        SymTensor {
            dim,
            c: [0.0; MAX_COMP],
        }
    }

    /// Identity tensor.
    pub fn identity(dim: usize) -> Self {
        let mut t = SymTensor::zero(dim);
        for i in 0..dim {
            t.c[i] = 1.0;
        }
        t
    }

    /// Build from a component slice in storage order.
    pub fn from_components(dim: usize, comps: &[f64]) -> Self {
        let m = component_count(dim);
        assert_eq!(comps.len(), m, "expected {m} components for dim {dim}");
        let mut t = SymTensor::zero(dim);
        t.c[..m].copy_from_slice(comps);
        t
    }

    /// Diagonal tensor from its `dim` diagonal entries.
    pub fn from_diagonal(dim: usize, diag: &[f64]) -> Self {
        assert_eq!(diag.len(), dim);
        let mut t = SymTensor::zero(dim);
        t.c[..dim].copy_from_slice(diag);
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ncomp(&self) -> usize {
        component_count(self.dim)
    }

    /// Stored components in storage order.
    pub fn components(&self) -> &[f64] {
        &self.c[..self.ncomp()]
    }

    pub fn components_mut(&mut self) -> &mut [f64] {
        let m = self.ncomp();
        &mut self.c[..m]
    }

    /// Entry `(i, j)` of the full matrix.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[component_index(self.dim, i, j)]
    }

    /// Set entry `(i, j)` (and its symmetric partner).
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.c[component_index(self.dim, i, j)] = v;
    }

    pub fn trace(&self) -> f64 {
        self.c[..self.dim].iter().sum()
    }

    /// Frobenius norm of the full matrix.
    pub fn frobenius_norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }

    /// Double contraction `self : other`.
    pub fn ddot(&self, other: &SymTensor) -> f64 {
        assert_eq!(self.dim, other.dim);
        let w = component_weights(self.dim);
        self.components()
            .iter()
            .zip(other.components())
            .zip(w)
            .map(|((a, b), w)| w * a * b)
            .sum()
    }

    /// Deviatoric part `self - tr(self)/3 * I`. Only meaningful in 3-D,
    /// where the plasticity model lives.
    pub fn deviator(&self) -> SymTensor {
        assert_eq!(self.dim, 3, "deviator is defined on 3-D tensors");
        let p = self.trace() / 3.0;
        let mut d = *self;
        for i in 0..3 {
            d.c[i] -= p;
        }
        d
    }

    pub fn scaled(&self, s: f64) -> SymTensor {
        let mut t = *self;
        for v in t.components_mut() {
            *v *= s;
        }
        t
    }

    pub fn add(&self, other: &SymTensor) -> SymTensor {
        assert_eq!(self.dim, other.dim);
        let mut t = *self;
        for (a, b) in t.components_mut().iter_mut().zip(other.components()) {
            *a += b;
        }
        t
    }

    pub fn sub(&self, other: &SymTensor) -> SymTensor {
        assert_eq!(self.dim, other.dim);
        let mut t = *self;
        for (a, b) in t.components_mut().iter_mut().zip(other.components()) {
            *a -= b;
        }
        t
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|v| v.is_finite())
    }
}

/// Fourth-order tensor with minor symmetries, stored as an `m x m` matrix
/// acting on symmetric-tensor component vectors (`m = dim (dim+1)/2`).
///
/// Entry `[a][b]` is the tensor component `T_{(ij)(kl)}` for the component
/// pairs `a = (ij)`, `b = (kl)`; `apply` supplies the factor-2 weight on
/// off-diagonal input components so that `(T : s)_{ij} = sum_kl T_ijkl s_kl`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymTensor4 {
    dim: usize,
    m: [[f64; MAX_COMP]; MAX_COMP],
}

impl SymTensor4 {
    pub fn zero(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "dim must be 2 or 3");
        SymTensor4 {
            dim,
            m: [[0.0; MAX_COMP]; MAX_COMP],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Full-index component `T_ijkl`.
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.m[component_index(self.dim, i, j)][component_index(self.dim, k, l)]
    }

    /// Matrix entry in the compressed `(pair, pair)` component ordering.
    pub fn flat(&self, a: usize, b: usize) -> f64 {
        debug_assert!(a < component_count(self.dim) && b < component_count(self.dim));
        self.m[a][b]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.m[component_index(self.dim, i, j)][component_index(self.dim, k, l)] = v;
    }

    /// Contraction with a real symmetric tensor.
    pub fn apply(&self, s: &SymTensor) -> SymTensor {
        assert_eq!(self.dim, s.dim());
        let n = component_count(self.dim);
        let w = component_weights(self.dim);
        let mut out = SymTensor::zero(self.dim);
        for a in 0..n {
            let mut acc = 0.0;
            for ((&m, &wb), &sb) in self.m[a][..n].iter().zip(w).zip(s.components()) {
                acc += m * wb * sb;
            }
            out.components_mut()[a] = acc;
        }
        out
    }

    /// Contraction with a complex component vector (spectral fields store the
    /// same component layout with complex entries).
    pub fn apply_complex(&self, s: &[Complex64], out: &mut [Complex64]) {
        let n = component_count(self.dim);
        debug_assert_eq!(s.len(), n);
        debug_assert_eq!(out.len(), n);
        let w = component_weights(self.dim);
        for (row, slot) in self.m[..n].iter().zip(out) {
            let mut acc = Complex64::new(0.0, 0.0);
            for ((&sb, &m), &wb) in s.iter().zip(&row[..n]).zip(w) {
                acc += sb * (m * wb);
            }
            *slot = acc;
        }
    }

    pub fn is_finite(&self) -> bool {
        let n = component_count(self.dim);
        self.m[..n]
            .iter()
            .all(|row| row[..n].iter().all(|v| v.is_finite()))
    }
}
