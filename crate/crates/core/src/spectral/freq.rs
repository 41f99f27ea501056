//! Frequency vectors of the differential-operator symbol.
//!
//! Two symbols are supported:
//!
//! * [`DiffOp::Rotated`] — the rotated finite-difference scheme, where the
//!   derivative along axis `j` acts as
//!   `k_j = (e^{i phi_j} - 1) / (2^{d-1} h_j) * prod_{l != j} (e^{i phi_l} + 1)`
//!   with `phi_l = 2 pi m_l / N_l`. This is the default: it damps the
//!   spurious oscillations of the continuous symbol at material interfaces.
//! * [`DiffOp::Continuous`] — the exact symbol of the continuum derivative,
//!   `k_j = i 2 pi m_j`.
//!
//! Both factor as (complex scalar) x (real vector), which is what makes the
//! resulting Green operator exactly real.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::Grid;

/// Choice of differential-operator symbol used to build the Green operator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffOp {
    /// Rotated finite-difference symbol (default).
    #[default]
    Rotated,
    /// Continuous derivative symbol `i 2 pi m`.
    Continuous,
}

/// Frequency vector of the centered index `m` under the chosen symbol.
/// Inactive axes yield 0.
pub fn frequency_vector(op: DiffOp, m: [i64; 3], grid: &Grid) -> [Complex64; 3] {
    match op {
        DiffOp::Rotated => rotated_frequency(m, grid),
        DiffOp::Continuous => continuous_frequency(m),
    }
}

/// Continuous symbol `k_j = i 2 pi m_j`.
pub fn continuous_frequency(m: [i64; 3]) -> [Complex64; 3] {
    let mut k = [Complex64::new(0.0, 0.0); 3];
    for j in 0..3 {
        k[j] = Complex64::new(0.0, 2.0 * std::f64::consts::PI * m[j] as f64);
    }
    k
}

/// Rotated finite-difference symbol (per-axis spacing `h_j`).
pub fn rotated_frequency(m: [i64; 3], grid: &Grid) -> [Complex64; 3] {
    let d = grid.dim();
    let mut phase = [0.0f64; 3];
    for j in 0..d {
        phase[j] = 2.0 * std::f64::consts::PI * m[j] as f64 / grid.axis_len(j) as f64;
    }
    let scale = 1.0 / (1 << (d - 1)) as f64;
    let mut k = [Complex64::new(0.0, 0.0); 3];
    for j in 0..d {
        let mut v = (Complex64::new(0.0, phase[j]).exp() - 1.0) * (scale / grid.spacing(j));
        for (l, &p) in phase[..d].iter().enumerate() {
            if l != j {
                v *= Complex64::new(0.0, p).exp() + 1.0;
            }
        }
        k[j] = v;
    }
    k
}
