//! Shared fixtures and independent oracles for the integration suites.
//!
//! Everything here is deliberately written from scratch against textbook
//! formulas — no calls into the crate's spectral machinery — so the suites
//! compare two independent derivations of the same quantities.

#![allow(dead_code)]
// Oracle code mirrors the index notation of the underlying formulas.
#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;

use fourhom::grid::{Grid, PhaseMap};
use fourhom::materials::MaterialSet;
use fourhom::tensor::{component_pairs, SymTensor};

/// Deterministic 64-bit LCG (Numerical Recipes constants); good enough for
/// seeding test data without pulling a dependency into the dev profile.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn new(seed: u64) -> Lcg {
        Lcg(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn sym_tensor(&mut self, dim: usize, scale: f64) -> SymTensor {
        let mut t = SymTensor::zero(dim);
        for &(i, j) in component_pairs(dim) {
            t.set(i, j, scale * (self.next_f64() - 0.5));
        }
        t
    }
}

/// Random two-phase map with roughly `fraction` of voxels labeled 1.
pub fn random_phase_map(grid: Grid, fraction: f64, seed: u64) -> PhaseMap {
    let mut rng = Lcg::new(seed);
    let labels: Vec<u8> = (0..grid.len())
        .map(|_| u8::from(rng.next_f64() < fraction))
        .collect();
    PhaseMap::new(grid, labels).unwrap()
}

/// Two-layer laminate phase map: phase 1 where the first coordinate of the
/// voxel center exceeds `split`.
pub fn laminate_phase_map(grid: Grid, split: f64) -> PhaseMap {
    let labels: Vec<u8> = (0..grid.len())
        .map(|idx| u8::from(grid.voxel_center(idx)[0] >= split))
        .collect();
    PhaseMap::new(grid, labels).unwrap()
}

// ---------------------------------------------------------------------------
// Brute-force DFT oracle
// ---------------------------------------------------------------------------

/// Unnormalized forward DFT of one interleaved real component, O(n^2):
/// `F(m) = sum_x f(x) exp(-2 pi i m.x / N)`, laid out like the crate's
/// spectral fields (component `comp` of `ncomp` at each storage index).
pub fn dft_forward_component(
    grid: &Grid,
    data: &[f64],
    ncomp: usize,
    comp: usize,
) -> Vec<Complex64> {
    let n = grid.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (ki, slot) in out.iter_mut().enumerate() {
        let m = grid.freq_of(ki);
        let mut acc = Complex64::new(0.0, 0.0);
        for idx in 0..n {
            let c = grid.coords_of(idx);
            let mut phase = 0.0;
            for j in 0..grid.dim() {
                phase -= 2.0 * std::f64::consts::PI * (m[j] * c[j] as i64) as f64
                    / grid.axis_len(j) as f64;
            }
            acc += Complex64::from_polar(data[idx * ncomp + comp], phase);
        }
        *slot = acc;
    }
    out
}

/// Normalized inverse DFT of one complex spectrum, O(n^2); returns the real
/// parts together with the largest imaginary magnitude seen.
pub fn dft_inverse(grid: &Grid, spec: &[Complex64]) -> (Vec<f64>, f64) {
    let n = grid.len();
    let mut out = vec![0.0f64; n];
    let mut max_imag = 0.0f64;
    for (idx, slot) in out.iter_mut().enumerate() {
        let c = grid.coords_of(idx);
        let mut acc = Complex64::new(0.0, 0.0);
        for (ki, coeff) in spec.iter().enumerate() {
            let m = grid.freq_of(ki);
            let mut phase = 0.0;
            for j in 0..grid.dim() {
                phase += 2.0 * std::f64::consts::PI * (m[j] * c[j] as i64) as f64
                    / grid.axis_len(j) as f64;
            }
            acc += coeff * Complex64::from_polar(1.0, phase);
        }
        acc /= n as f64;
        *slot = acc.re;
        max_imag = max_imag.max(acc.im.abs());
    }
    (out, max_imag)
}

// ---------------------------------------------------------------------------
// Closed-form Green operator oracle (continuous symbol)
// ---------------------------------------------------------------------------

/// Textbook strain Green operator of an isotropic reference medium for a
/// real frequency direction `xi` (classical closed form):
///
/// `G_ijkl = (d_ik n_j n_l + d_il n_j n_k + d_jk n_i n_l + d_jl n_i n_k)
///           / (4 mu0)  -  (l0 + mu0) / (mu0 (l0 + 2 mu0)) n_i n_j n_k n_l`
///
/// with `n = xi / |xi|`. Returns the full `dim^4` array.
pub fn green_closed_form(xi: [f64; 3], dim: usize, lambda0: f64, mu0: f64) -> Vec<f64> {
    let norm = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
    assert!(norm > 0.0, "green_closed_form needs a nonzero frequency");
    let n: Vec<f64> = (0..dim).map(|j| xi[j] / norm).collect();
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let c1 = 1.0 / (4.0 * mu0);
    let c2 = (lambda0 + mu0) / (mu0 * (lambda0 + 2.0 * mu0));
    let mut g = vec![0.0; dim * dim * dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                for l in 0..dim {
                    let v = c1
                        * (d(i, k) * n[j] * n[l]
                            + d(i, l) * n[j] * n[k]
                            + d(j, k) * n[i] * n[l]
                            + d(j, l) * n[i] * n[k])
                        - c2 * n[i] * n[j] * n[k] * n[l];
                    g[((i * dim + j) * dim + k) * dim + l] = v;
                }
            }
        }
    }
    g
}

/// Whether the slot of centered index `m` is an alias-ambiguous Nyquist row
/// (an even-axis Nyquist component next to a nonzero non-Nyquist one) —
/// the convention both the crate and the oracle zero for the continuous
/// symbol.
pub fn ambiguous_nyquist(grid: &Grid, m: [i64; 3]) -> bool {
    let mut any_nyquist = false;
    let mut any_other = false;
    for j in 0..grid.dim() {
        let n = grid.axis_len(j) as i64;
        if n % 2 == 0 && m[j] == -n / 2 {
            any_nyquist = true;
        } else if m[j] != 0 {
            any_other = true;
        }
    }
    any_nyquist && any_other
}

// ---------------------------------------------------------------------------
// Per-frequency fixed-point iteration oracle (2-D elastic, full mask)
// ---------------------------------------------------------------------------

/// One fixed-point iteration implemented directly: pointwise polarization
/// with the textbook isotropic law, O(n^2) DFT, per-frequency closed-form
/// Green contraction with full index sums, DC pinned to `n * eps_bar`,
/// O(n^2) inverse DFT. 2-D elastic phases only. Returns the new strain
/// components, interleaved like `SymTensorField::data`.
pub fn eq7_iteration_2d(
    phases: &PhaseMap,
    materials: &MaterialSet,
    eps_bar: &SymTensor,
    eps: &[f64],
    lambda0: f64,
    mu0: f64,
) -> Vec<f64> {
    let grid = *phases.grid();
    assert_eq!(grid.dim(), 2);
    let n = grid.len();
    let ncomp = 3usize; // 11, 22, 12
    let labels = phases.labels();

    // Phase moduli straight from the material set.
    let moduli: Vec<(f64, f64)> = (0..=1u8)
        .map(|l| {
            let e = materials.model(l).elastic();
            (e.lambda, e.mu)
        })
        .collect();

    // tau = sigma(eps) - C0 : eps, written with the full matrix formula
    // sigma = lambda tr(eps) I + 2 mu eps.
    let mut tau = vec![0.0f64; n * ncomp];
    for idx in 0..n {
        let (lam, mu) = moduli[labels[idx] as usize];
        let e11 = eps[idx * ncomp];
        let e22 = eps[idx * ncomp + 1];
        let e12 = eps[idx * ncomp + 2];
        let tr = e11 + e22;
        tau[idx * ncomp] = (lam - lambda0) * tr + 2.0 * (mu - mu0) * e11;
        tau[idx * ncomp + 1] = (lam - lambda0) * tr + 2.0 * (mu - mu0) * e22;
        tau[idx * ncomp + 2] = 2.0 * (mu - mu0) * e12;
    }

    // Forward DFT per component.
    let tau_hat: Vec<Vec<Complex64>> = (0..ncomp)
        .map(|c| dft_forward_component(&grid, &tau, ncomp, c))
        .collect();

    // Green step per frequency: eps_hat = -G : tau_hat with full sums.
    let mut eps_hat: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; ncomp];
    for ki in 0..n {
        let m = grid.freq_of(ki);
        if m == [0, 0, 0] {
            eps_hat[0][ki] = Complex64::new(n as f64 * eps_bar.get(0, 0), 0.0);
            eps_hat[1][ki] = Complex64::new(n as f64 * eps_bar.get(1, 1), 0.0);
            eps_hat[2][ki] = Complex64::new(n as f64 * eps_bar.get(0, 1), 0.0);
            continue;
        }
        if ambiguous_nyquist(&grid, m) {
            continue; // slot stays zero
        }
        let xi = [m[0] as f64, m[1] as f64, 0.0];
        let g = green_closed_form(xi, 2, lambda0, mu0);
        // Full 2x2 matrix of tau_hat at this frequency.
        let t = [
            [tau_hat[0][ki], tau_hat[2][ki]],
            [tau_hat[2][ki], tau_hat[1][ki]],
        ];
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    for l in 0..2 {
                        acc += g[((i * 2 + j) * 2 + k) * 2 + l] * t[k][l];
                    }
                }
                out[i][j] = -acc;
            }
        }
        eps_hat[0][ki] = out[0][0];
        eps_hat[1][ki] = out[1][1];
        eps_hat[2][ki] = out[0][1];
    }

    // Inverse DFT per component.
    let mut new_eps = vec![0.0f64; n * ncomp];
    for (c, spec) in eps_hat.iter().enumerate() {
        let (vals, max_imag) = dft_inverse(&grid, spec);
        assert!(
            max_imag < 1e-9,
            "oracle iteration produced imaginary strain ({max_imag:e})"
        );
        for (idx, v) in vals.into_iter().enumerate() {
            new_eps[idx * ncomp + c] = v;
        }
    }
    new_eps
}

// ---------------------------------------------------------------------------
// Laminate closed form
// ---------------------------------------------------------------------------

/// Per-layer strain and stress of a two-layer laminate with interface
/// normal along axis 0 (2-D plane strain, in-plane tensors).
pub struct LaminateSolution {
    pub eps_a: SymTensor,
    pub eps_b: SymTensor,
    pub sigma_a: SymTensor,
    pub sigma_b: SymTensor,
}

/// Closed-form laminate solution: traction continuity of sigma_11 and
/// sigma_12 across the interface, common tangential strain eps_22, and layer
/// averages matching `eps_bar`. `f_a` is the volume fraction of phase A.
pub fn laminate_closed_form(
    (lam_a, mu_a): (f64, f64),
    (lam_b, mu_b): (f64, f64),
    f_a: f64,
    eps_bar: &SymTensor,
) -> LaminateSolution {
    assert_eq!(eps_bar.dim(), 2);
    let f_b = 1.0 - f_a;
    let e22 = eps_bar.get(1, 1);

    // sigma_12 = 2 mu eps_12 continuous.
    let e12_a = eps_bar.get(0, 1) * mu_b / (f_a * mu_b + f_b * mu_a);
    let e12_b = e12_a * mu_a / mu_b;

    // sigma_11 = (lambda + 2 mu) eps_11 + lambda eps_22 continuous.
    let alpha = lam_a + 2.0 * mu_a;
    let beta = lam_b + 2.0 * mu_b;
    let delta = (lam_b - lam_a) * e22;
    let e11_b = (alpha * eps_bar.get(0, 0) - f_a * delta) / (f_a * beta + f_b * alpha);
    let e11_a = (beta * e11_b + delta) / alpha;

    let eps_a = SymTensor::from_components(2, &[e11_a, e22, e12_a]);
    let eps_b = SymTensor::from_components(2, &[e11_b, e22, e12_b]);
    let stress = |e: &SymTensor, lam: f64, mu: f64| {
        let tr = e.get(0, 0) + e.get(1, 1);
        SymTensor::from_components(
            2,
            &[
                lam * tr + 2.0 * mu * e.get(0, 0),
                lam * tr + 2.0 * mu * e.get(1, 1),
                2.0 * mu * e.get(0, 1),
            ],
        )
    };
    LaminateSolution {
        eps_a,
        eps_b,
        sigma_a: stress(&eps_a, lam_a, mu_a),
        sigma_b: stress(&eps_b, lam_b, mu_b),
    }
}

// ---------------------------------------------------------------------------
// Return-mapping oracle
// ---------------------------------------------------------------------------

/// Trial von Mises stress of a 3-D elastic predictor built from plain
/// arrays: sigma = lambda tr(ee) I + 2 mu ee with ee = eps - eps_p.
pub fn trial_von_mises(
    eps3: &[[f64; 3]; 3],
    eps_p: &[[f64; 3]; 3],
    lambda: f64,
    mu: f64,
) -> f64 {
    let mut sig = [[0.0f64; 3]; 3];
    let mut tr = 0.0;
    for i in 0..3 {
        tr += eps3[i][i] - eps_p[i][i];
    }
    for i in 0..3 {
        for j in 0..3 {
            sig[i][j] = 2.0 * mu * (eps3[i][j] - eps_p[i][j]);
        }
        sig[i][i] += lambda * tr;
    }
    let mean = (sig[0][0] + sig[1][1] + sig[2][2]) / 3.0;
    let mut ss = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let s = sig[i][j] - if i == j { mean } else { 0.0 };
            ss += s * s;
        }
    }
    (1.5 * ss).sqrt()
}

/// Plastic multiplier by bisection on the scalar consistency condition
/// `Phi(dg) = sigma_eq_trial - 3 mu dg - sigma_y0 - H (acc + dg) = 0`;
/// returns 0 when the trial state is elastic.
pub fn dgamma_bisection(
    sigma_eq_trial: f64,
    acc: f64,
    mu: f64,
    sigma_y0: f64,
    hardening_h: f64,
) -> f64 {
    let phi = |dg: f64| sigma_eq_trial - 3.0 * mu * dg - sigma_y0 - hardening_h * (acc + dg);
    if phi(0.0) <= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0f64;
    let mut hi = sigma_eq_trial / (3.0 * mu);
    assert!(phi(hi) < 0.0, "bisection bracket must straddle the root");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Dense copy of a symmetric tensor for the plain-array oracles.
pub fn to_matrix3(t: &SymTensor) -> [[f64; 3]; 3] {
    assert_eq!(t.dim(), 3);
    let mut m = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = t.get(i, j);
        }
    }
    m
}

// ---------------------------------------------------------------------------
// Misc helpers
// ---------------------------------------------------------------------------

/// Relative L2 distance between two raw component buffers.
pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += (x - y) * (x - y);
        den += y * y;
    }
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// Largest absolute difference between two raw component buffers.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
