//! Run configuration: one JSON document describing geometry, materials,
//! loading, and the frequency-reduction sweep.
//!
//! Example:
//!
//! ```json
//! {
//!   "geometry": { "kind": "circle", "radius": 0.25 },
//!   "grid": [128, 128],
//!   "material": {
//!     "matrix": { "lambda": 1.0, "mu": 1.0 },
//!     "inclusion": { "lambda": 10.0, "mu": 10.0 }
//!   },
//!   "macro_strain": [[0.01, 0.0], [0.0, -0.01]],
//!   "patterns": ["radial", "adapted"],
//!   "r_values": [1.54, 3.06, 6.02]
//! }
//! ```
//!
//! A phase is elasto-plastic iff `sigma_y0` is present; `hardening_h`
//! defaults to 0 and is only meaningful alongside `sigma_y0`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{generate_geometry, GeometrySpec};
use crate::grid::{Grid, PhaseMap};
use crate::materials::{ElasticParams, MaterialSet, PhaseModel, PlasticParams};
use crate::sampling::{Pattern, RadialParams};
use crate::spectral::{DiffOp, SolveSettings};
use crate::tensor::SymTensor;

/// One phase's material block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub lambda: f64,
    pub mu: f64,
    /// Initial yield stress; presence switches the phase to elasto-plastic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_y0: Option<f64>,
    /// Linear isotropic hardening modulus (requires `sigma_y0`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hardening_h: Option<f64>,
}

impl PhaseConfig {
    pub fn elastic(lambda: f64, mu: f64) -> PhaseConfig {
        PhaseConfig {
            lambda,
            mu,
            sigma_y0: None,
            hardening_h: None,
        }
    }

    fn model(&self, field: &str) -> Result<PhaseModel> {
        let elastic = ElasticParams::new(self.lambda, self.mu);
        match (self.sigma_y0, self.hardening_h) {
            (Some(sigma_y0), h) => Ok(PhaseModel::Plastic(PlasticParams {
                elastic,
                sigma_y0,
                hardening_h: h.unwrap_or(0.0),
            })),
            (None, Some(_)) => Err(Error::invalid(format!(
                "material.{field}.hardening_h is set but material.{field}.sigma_y0 is not; \
                 hardening requires a yield stress"
            ))),
            (None, None) => Ok(PhaseModel::Elastic(elastic)),
        }
    }
}

/// Material blocks for the two phases (label 0 = matrix, 1 = inclusion).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub matrix: PhaseConfig,
    pub inclusion: PhaseConfig,
}

fn default_patterns() -> Vec<Pattern> {
    vec![Pattern::Radial, Pattern::Adapted]
}

fn default_r_values() -> Vec<f64> {
    vec![1.54, 3.06, 6.02, 11.64, 21.66, 36.79]
}

fn default_tol() -> f64 {
    SolveSettings::default().tol
}

fn default_max_iter() -> usize {
    SolveSettings::default().max_iter
}

fn default_load_steps() -> usize {
    1
}

/// Full description of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometrySpec,
    /// Voxels per axis; length sets the dimension (2 or 3).
    pub grid: Vec<usize>,
    pub material: MaterialConfig,
    /// Macroscopic strain as a full `d x d` matrix; must be symmetric.
    pub macro_strain: Vec<Vec<f64>>,
    /// Reduction patterns to sweep (the full-mask reference always runs).
    #[serde(default = "default_patterns")]
    pub patterns: Vec<Pattern>,
    /// Percentages of retained frequencies, each in (0, 100].
    #[serde(default = "default_r_values")]
    pub r_values: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_load_steps")]
    pub load_steps: usize,
    /// Output directory; the CLI `--out` flag overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    /// Seed for randomized geometry placement.
    #[serde(default)]
    pub seed: u64,
    /// Tuning of the fixed radial pattern.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<RadialParams>,
    /// Differential-operator symbol (default: rotated).
    #[serde(default)]
    pub diff_op: DiffOp,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::from_json(&text).map_err(|e| match e {
            Error::Invalid(msg) => Error::format(path, msg),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Dimension implied by the grid axis list.
    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// Stable name for report rows: `elastic` or `elasto_plastic`.
    pub fn material_name(&self) -> &'static str {
        if self.material.matrix.sigma_y0.is_some() || self.material.inclusion.sigma_y0.is_some() {
            "elasto_plastic"
        } else {
            "elastic"
        }
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.grid.len();
        if !(2..=3).contains(&dim) {
            return Err(Error::invalid(format!(
                "grid: expected 2 or 3 axis lengths, got {}",
                self.grid.len()
            )));
        }
        Grid::from_dims(&self.grid)?;
        self.geometry.validate(dim)?;
        self.builder_materials()?.validate(dim)?;
        self.macro_strain_tensor()?;
        if self.patterns.is_empty() {
            return Err(Error::invalid("patterns: list must not be empty"));
        }
        for &r in &self.r_values {
            if !(r.is_finite() && 0.0 < r && r <= 100.0) {
                return Err(Error::invalid(format!(
                    "r_values: entries must lie in (0, 100], got {r}"
                )));
            }
        }
        if self.patterns.iter().any(|p| *p != Pattern::Full) && self.r_values.is_empty() {
            return Err(Error::invalid(
                "r_values: list must not be empty when reduced patterns are requested",
            ));
        }
        if let Some(radial) = &self.radial {
            radial.validate()?;
        }
        self.settings().validate()?;
        Ok(())
    }

    fn builder_materials(&self) -> Result<MaterialSet> {
        Ok(MaterialSet::two_phase(
            self.material.matrix.model("matrix")?,
            self.material.inclusion.model("inclusion")?,
        ))
    }

    /// Parse the macroscopic strain matrix into a symmetric tensor.
    pub fn macro_strain_tensor(&self) -> Result<SymTensor> {
        let dim = self.grid.len();
        let rows = &self.macro_strain;
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid(format!(
                "macro_strain: expected a {dim}x{dim} matrix to match the grid dimension"
            )));
        }
        let mut t = SymTensor::zero(dim);
        // Index loops: (i, j) and (j, i) are read together for the symmetry
        // check, which an iterator form would only obscure.
        #[allow(clippy::needless_range_loop)]
        for i in 0..dim {
            for j in i..dim {
                let (a, b) = (rows[i][j], rows[j][i]);
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::invalid("macro_strain: entries must be finite"));
                }
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::invalid(format!(
                        "macro_strain: matrix must be symmetric, entries ({i},{j}) and \
                         ({j},{i}) differ: {a} vs {b}"
                    )));
                }
                t.set(i, j, 0.5 * (a + b));
            }
        }
        Ok(t)
    }

    pub fn settings(&self) -> SolveSettings {
        SolveSettings {
            tol: self.tol,
            max_iter: self.max_iter,
            load_steps: self.load_steps,
            diff_op: self.diff_op,
        }
    }

    /// Materialize the configured problem: phase map, materials, macroscopic
    /// strain, and solver settings.
    pub fn build(&self) -> Result<(PhaseMap, MaterialSet, SymTensor, SolveSettings)> {
        self.validate()?;
        let grid = Grid::from_dims(&self.grid)?;
        let phases = generate_geometry(&self.geometry, grid, self.seed)?;
        let materials = self.builder_materials()?;
        let eps_bar = self.macro_strain_tensor()?;
        Ok((phases, materials, eps_bar, self.settings()))
    }
}
