//! Constitutive models: isotropic linear elasticity and J2 elasto-plasticity
//! with linear isotropic hardening (implicit radial-return update).
//!
//! Plasticity is always evaluated in 3-D. Two-dimensional problems use a
//! plane-strain embedding: the in-plane strain is extended with
//! `eps_33 = 0`, the return map runs on full 3-D tensors (so the plastic
//! strain picks up a 33 component and `sigma_33` is tracked), and the solver
//! projects the resulting stress back to its in-plane components.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::tensor::SymTensor;

/// Lame constants of an isotropic phase (stress units: GPa).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElasticParams {
    pub lambda: f64,
    pub mu: f64,
}

impl ElasticParams {
    pub fn new(lambda: f64, mu: f64) -> ElasticParams {
        ElasticParams { lambda, mu }
    }

    /// Positive-definiteness of the stiffness in `dim` dimensions:
    /// `mu > 0` and the d-dimensional bulk modulus `lambda + 2 mu / d > 0`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.mu.is_finite() && self.lambda.is_finite()) {
            return Err(Error::invalid("elastic parameters must be finite"));
        }
        if self.mu <= 0.0 {
            return Err(Error::invalid(format!("mu must be positive, got {}", self.mu)));
        }
        let bulk = self.lambda + 2.0 * self.mu / dim as f64;
        if bulk <= 0.0 {
            return Err(Error::invalid(format!(
                "lambda + 2 mu / {dim} must be positive, got {bulk}"
            )));
        }
        Ok(())
    }
}

/// J2 plasticity parameters on top of an elastic base.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlasticParams {
    pub elastic: ElasticParams,
    /// Initial yield stress `sigma_y0 > 0`.
    pub sigma_y0: f64,
    /// Linear isotropic hardening modulus `H >= 0`.
    pub hardening_h: f64,
}

impl PlasticParams {
    pub fn validate(&self, dim: usize) -> Result<()> {
        self.elastic.validate(dim)?;
        // Negated comparisons so NaN fails validation too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.sigma_y0 > 0.0) {
            return Err(Error::invalid(format!(
                "sigma_y0 must be positive, got {}",
                self.sigma_y0
            )));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.hardening_h >= 0.0) {
            return Err(Error::invalid(format!(
                "hardening_h must be non-negative, got {}",
                self.hardening_h
            )));
        }
        Ok(())
    }

    /// Current yield stress at accumulated plastic strain `acc`.
    pub fn yield_stress(&self, acc: f64) -> f64 {
        self.sigma_y0 + self.hardening_h * acc
    }
}

/// Constitutive model of one phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhaseModel {
    Elastic(ElasticParams),
    Plastic(PlasticParams),
}

impl PhaseModel {
    pub fn elastic(&self) -> &ElasticParams {
        match self {
            PhaseModel::Elastic(e) => e,
            PhaseModel::Plastic(p) => &p.elastic,
        }
    }

    pub fn is_plastic(&self) -> bool {
        matches!(self, PhaseModel::Plastic(_))
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            PhaseModel::Elastic(e) => e.validate(dim),
            PhaseModel::Plastic(p) => p.validate(dim),
        }
    }
}

/// Models for the two phases, indexed by phase label.
#[derive(Clone, Debug)]
pub struct MaterialSet {
    models: [PhaseModel; 2],
}

impl MaterialSet {
    pub fn two_phase(matrix: PhaseModel, inclusion: PhaseModel) -> MaterialSet {
        MaterialSet {
            models: [matrix, inclusion],
        }
    }

    pub fn model(&self, label: u8) -> &PhaseModel {
        &self.models[label as usize]
    }

    pub fn has_plastic_phase(&self) -> bool {
        self.models.iter().any(|m| m.is_plastic())
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        for m in &self.models {
            m.validate(dim)?;
        }
        Ok(())
    }
}

/// Internal variables of the J2 model at one voxel. Lives in 3-D even for
/// plane-strain problems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlasticState {
    /// Plastic strain tensor (trace-free).
    pub eps_p: SymTensor,
    /// Accumulated plastic strain (non-decreasing).
    pub eps_p_acc: f64,
}

impl PlasticState {
    pub fn virgin() -> PlasticState {
        PlasticState {
            eps_p: SymTensor::zero(3),
            eps_p_acc: 0.0,
        }
    }
}

/// Committed plastic state for every voxel of a grid.
#[derive(Clone, Debug)]
pub struct PlasticField {
    grid: Grid,
    eps_p: Vec<f64>,
    acc: Vec<f64>,
}

impl PlasticField {
    pub fn virgin(grid: Grid) -> PlasticField {
        PlasticField {
            grid,
            eps_p: vec![0.0; grid.len() * 6],
            acc: vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn at(&self, idx: usize) -> PlasticState {
        PlasticState {
            eps_p: SymTensor::from_components(3, &self.eps_p[idx * 6..(idx + 1) * 6]),
            eps_p_acc: self.acc[idx],
        }
    }

    pub fn set(&mut self, idx: usize, state: &PlasticState) {
        self.eps_p[idx * 6..(idx + 1) * 6].copy_from_slice(state.eps_p.components());
        self.acc[idx] = state.eps_p_acc;
    }

    /// Accumulated plastic strain as a scalar field (for output maps).
    pub fn accumulated(&self) -> ScalarField {
        ScalarField::from_data(self.grid, self.acc.clone()).expect("sized buffer")
    }

    pub fn max_accumulated(&self) -> f64 {
        self.acc.iter().cloned().fold(0.0, f64::max)
    }

    pub fn mean_accumulated(&self) -> f64 {
        self.acc.iter().sum::<f64>() / self.acc.len() as f64
    }

    pub(crate) fn raw_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.eps_p, &mut self.acc)
    }
}

/// Isotropic reference medium (Lame constants of the comparison material).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceMedium {
    pub lambda0: f64,
    pub mu0: f64,
}

/// Hooke's law `sigma = lambda tr(eps) I + 2 mu eps`, in the dimension of
/// the input strain. In 2-D this returns the in-plane stress of the
/// plane-strain state (`sigma_33` is not part of the result).
pub fn elastic_stress(eps: &SymTensor, p: &ElasticParams) -> SymTensor {
    let mut sigma = eps.scaled(2.0 * p.mu);
    let lt = p.lambda * eps.trace();
    for i in 0..eps.dim() {
        let v = sigma.get(i, i) + lt;
        sigma.set(i, i, v);
    }
    sigma
}

/// Von Mises equivalent stress `sqrt(3/2 s:s)` of a 3-D stress tensor.
pub fn von_mises(sigma: &SymTensor) -> f64 {
    let s = sigma.deviator();
    (1.5 * s.ddot(&s)).sqrt()
}

/// Extend an in-plane strain to 3-D under the plane-strain assumption
/// (`eps_33 = eps_13 = eps_23 = 0`).
pub fn embed_plane_strain(eps: &SymTensor) -> SymTensor {
    assert_eq!(eps.dim(), 2);
    SymTensor::from_components(
        3,
        &[eps.get(0, 0), eps.get(1, 1), 0.0, eps.get(0, 1), 0.0, 0.0],
    )
}

/// In-plane components of a 3-D tensor.
pub fn project_in_plane(t: &SymTensor) -> SymTensor {
    assert_eq!(t.dim(), 3);
    SymTensor::from_components(2, &[t.get(0, 0), t.get(1, 1), t.get(0, 1)])
}

/// Radial-return core on 3-D tensors, with no input validation. Non-finite
/// strains propagate NaN without branching differently, so divergence is
/// caught downstream at the residual check.
fn return_map_raw(
    eps3: &SymTensor,
    state: &PlasticState,
    p: &PlasticParams,
) -> (SymTensor, PlasticState, f64) {
    let el = &p.elastic;
    let eps_e = eps3.sub(&state.eps_p);
    let sigma_trial = elastic_stress(&eps_e, el);
    let s = sigma_trial.deviator();
    let sigma_eq = (1.5 * s.ddot(&s)).sqrt();
    let phi = sigma_eq - p.yield_stress(state.eps_p_acc);
    // Negated comparison so a NaN trial state takes the elastic branch and
    // the NaN reaches the caller through the stress.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(phi > 0.0) {
        return (sigma_trial, *state, 0.0);
    }
    // Plastic step. sigma_eq > yield >= sigma_y0 > 0 here, so the flow
    // direction is well defined.
    let dgamma = phi / (3.0 * el.mu + p.hardening_h);
    let flow = s.scaled(1.5 / sigma_eq);
    let new_state = PlasticState {
        eps_p: state.eps_p.add(&flow.scaled(dgamma)),
        eps_p_acc: state.eps_p_acc + dgamma,
    };
    let sigma = sigma_trial.sub(&flow.scaled(2.0 * el.mu * dgamma));
    (sigma, new_state, dgamma)
}

/// Implicit radial-return update of the J2 model.
///
/// `eps_total` may be 2-D (plane strain; embedded internally) or 3-D. The
/// returned stress is always the full 3-D tensor; the new state is **not**
/// committed anywhere — the caller decides whether to keep it. The third
/// element is the plastic multiplier increment `dgamma >= 0`.
pub fn j2_return_map(
    eps_total: &SymTensor,
    state: &PlasticState,
    p: &PlasticParams,
) -> Result<(SymTensor, PlasticState, f64)> {
    let eps3 = match eps_total.dim() {
        2 => embed_plane_strain(eps_total),
        3 => *eps_total,
        d => return Err(Error::invalid(format!("strain tensor of dim {d}"))),
    };
    if !eps3.is_finite() {
        return Err(Error::invalid("non-finite strain passed to return map"));
    }
    Ok(return_map_raw(&eps3, state, p))
}

/// Unchecked voxel stress response in the dimension of the strain. Total
/// (never fails, never panics on finite math); the solver's hot loops rely
/// on that and detect divergence at the residual instead.
pub(crate) fn stress_voxel(
    eps: &SymTensor,
    model: &PhaseModel,
    state: &PlasticState,
) -> (SymTensor, PlasticState, f64) {
    match model {
        PhaseModel::Elastic(e) => (elastic_stress(eps, e), *state, 0.0),
        PhaseModel::Plastic(p) => {
            let (sigma3, new_state, dgamma) = if eps.dim() == 2 {
                return_map_raw(&embed_plane_strain(eps), state, p)
            } else {
                return_map_raw(eps, state, p)
            };
            let sigma = if eps.dim() == 2 {
                project_in_plane(&sigma3)
            } else {
                sigma3
            };
            (sigma, new_state, dgamma)
        }
    }
}

/// Stress response of one voxel in the dimension of the grid.
///
/// For plastic phases the candidate updated state and plastic increment are
/// returned so the caller can commit them after the load step converges.
pub fn evaluate_stress(
    eps: &SymTensor,
    model: &PhaseModel,
    state: &PlasticState,
) -> Result<(SymTensor, PlasticState, f64)> {
    if !eps.is_finite() {
        return Err(Error::invalid("non-finite strain passed to evaluate_stress"));
    }
    if eps.dim() != 2 && eps.dim() != 3 {
        return Err(Error::invalid(format!("strain tensor of dim {}", eps.dim())));
    }
    Ok(stress_voxel(eps, model, state))
}

/// Reference medium: arithmetic average of the two phases' Lame constants,
/// `lambda0 = (lambda_M + lambda_I) / 2`, `mu0 = (mu_M + mu_I) / 2`.
///
/// For a two-phase material this is the midpoint between the extreme moduli,
/// which keeps every pointwise ratio `c(x)/c0` inside `(0, 2)` — the
/// fixed-point iteration contracts for arbitrary contrast and volume
/// fraction. A volume-weighted average does not have that property: a stiff
/// minority phase can push `c_max/c0` past 2 and the iteration diverges.
pub fn reference_medium(materials: &MaterialSet) -> ReferenceMedium {
    let m0 = materials.model(0).elastic();
    let m1 = materials.model(1).elastic();
    ReferenceMedium {
        lambda0: 0.5 * (m0.lambda + m1.lambda),
        mu0: 0.5 * (m0.mu + m1.mu),
    }
}
