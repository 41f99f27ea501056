//! Analytic inclusion shapes voxelized onto the periodic unit cell.
//!
//! A voxel belongs to the inclusion iff its center lies inside the shape;
//! all distances wrap across the cell boundary, so shapes may straddle it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, PhaseMap};

/// Attempts per circle before multi-circle packing gives up.
const PACKING_RETRIES: usize = 10_000;

fn center2() -> [f64; 2] {
    [0.5, 0.5]
}

fn center3() -> [f64; 3] {
    [0.5, 0.5, 0.5]
}

/// Inclusion shape, in unit-cell coordinates `[0,1)^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometrySpec {
    Circle {
        #[serde(default = "center2")]
        center: [f64; 2],
        radius: f64,
    },
    Annulus {
        #[serde(default = "center2")]
        center: [f64; 2],
        inner_radius: f64,
        outer_radius: f64,
    },
    Ellipse {
        #[serde(default = "center2")]
        center: [f64; 2],
        semi_axes: [f64; 2],
    },
    Square {
        #[serde(default = "center2")]
        center: [f64; 2],
        side: f64,
    },
    /// `count` equal circles placed by seeded rejection sampling without
    /// overlap (in the periodic metric).
    MultiCircle { count: usize, radius: f64 },
    Sphere {
        #[serde(default = "center3")]
        center: [f64; 3],
        radius: f64,
    },
}

impl GeometrySpec {
    /// Spatial dimension the shape lives in.
    pub fn dim(&self) -> usize {
        match self {
            GeometrySpec::Sphere { .. } => 3,
            _ => 2,
        }
    }

    /// Stable lowercase name, used in file names and report rows.
    pub fn kind_name(&self) -> &'static str {
        match self {
            GeometrySpec::Circle { .. } => "circle",
            GeometrySpec::Annulus { .. } => "annulus",
            GeometrySpec::Ellipse { .. } => "ellipse",
            GeometrySpec::Square { .. } => "square",
            GeometrySpec::MultiCircle { .. } => "multi_circle",
            GeometrySpec::Sphere { .. } => "sphere",
        }
    }

    pub fn validate(&self, grid_dim: usize) -> Result<()> {
        if self.dim() != grid_dim {
            return Err(Error::invalid(format!(
                "geometry: {} is {}-dimensional but the grid has {} axes",
                self.kind_name(),
                self.dim(),
                grid_dim
            )));
        }
        let check_radius = |r: f64, what: &str| -> Result<()> {
            if !(r.is_finite() && (0.0..=0.5).contains(&r)) {
                return Err(Error::invalid(format!(
                    "geometry: {what} must lie in [0, 0.5] to fit the unit cell, got {r}"
                )));
            }
            Ok(())
        };
        let check_center = |c: &[f64]| -> Result<()> {
            if c.iter().any(|x| !(x.is_finite() && (0.0..1.0).contains(x))) {
                return Err(Error::invalid(format!(
                    "geometry: center coordinates must lie in [0, 1), got {c:?}"
                )));
            }
            Ok(())
        };
        match self {
            GeometrySpec::Circle { center, radius } => {
                check_center(center)?;
                check_radius(*radius, "radius")
            }
            GeometrySpec::Annulus {
                center,
                inner_radius,
                outer_radius,
            } => {
                check_center(center)?;
                check_radius(*inner_radius, "inner_radius")?;
                check_radius(*outer_radius, "outer_radius")?;
                if inner_radius >= outer_radius {
                    return Err(Error::invalid(format!(
                        "geometry: inner_radius ({inner_radius}) must be smaller than \
                         outer_radius ({outer_radius})"
                    )));
                }
                Ok(())
            }
            GeometrySpec::Ellipse { center, semi_axes } => {
                check_center(center)?;
                check_radius(semi_axes[0], "semi_axes[0]")?;
                check_radius(semi_axes[1], "semi_axes[1]")?;
                if semi_axes.contains(&0.0) {
                    return Err(Error::invalid("geometry: semi_axes must be positive"));
                }
                Ok(())
            }
            GeometrySpec::Square { center, side } => {
                check_center(center)?;
                if !(side.is_finite() && (0.0..=1.0).contains(side)) {
                    return Err(Error::invalid(format!(
                        "geometry: side must lie in [0, 1], got {side}"
                    )));
                }
                Ok(())
            }
            GeometrySpec::MultiCircle { count, radius } => {
                if *count == 0 {
                    return Err(Error::invalid("geometry: count must be at least 1"));
                }
                check_radius(*radius, "radius")?;
                if *radius == 0.0 {
                    return Err(Error::invalid("geometry: multi_circle radius must be positive"));
                }
                let area = *count as f64 * std::f64::consts::PI * radius * radius;
                if area >= 1.0 {
                    return Err(Error::invalid(format!(
                        "geometry: {count} circles of radius {radius} cover area {area:.3} >= 1, \
                         cannot fit in the unit cell"
                    )));
                }
                Ok(())
            }
            GeometrySpec::Sphere { center, radius } => {
                check_center(center)?;
                check_radius(*radius, "radius")
            }
        }
    }
}

/// Per-axis distance on the unit torus (both coordinates in `[0, 1)`).
fn wrap_delta(x: f64, c: f64) -> f64 {
    let d = (x - c).abs();
    d.min(1.0 - d)
}

fn wrap_dist2(x: &[f64], c: &[f64]) -> f64 {
    x.iter()
        .zip(c)
        .map(|(&a, &b)| {
            let d = wrap_delta(a, b);
            d * d
        })
        .sum()
}

/// Place `count` circle centers by rejection sampling: uniform proposals,
/// rejected while any periodic center distance is below `2 * radius`.
fn place_circles(count: usize, radius: f64, seed: u64) -> Result<Vec<[f64; 2]>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_dist2 = (2.0 * radius) * (2.0 * radius);
    let mut centers: Vec<[f64; 2]> = Vec::with_capacity(count);
    for i in 0..count {
        let mut placed = false;
        for _ in 0..PACKING_RETRIES {
            let c = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            if centers.iter().all(|p| wrap_dist2(&c, p) >= min_dist2) {
                centers.push(c);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::invalid(format!(
                "geometry: failed to place circle {} of {count} (radius {radius}) after {} \
                 attempts; reduce count or radius",
                i + 1,
                PACKING_RETRIES
            )));
        }
    }
    Ok(centers)
}

/// Voxel-center membership test for one shape.
type InsideFn = Box<dyn Fn(&[f64]) -> bool>;

/// Voxelize a shape: label 1 where the voxel center lies strictly inside,
/// 0 elsewhere. `seed` only affects `multi_circle` placement.
pub fn generate_geometry(spec: &GeometrySpec, grid: Grid, seed: u64) -> Result<PhaseMap> {
    spec.validate(grid.dim())?;
    let inside: InsideFn = match spec {
        GeometrySpec::Circle { center, radius } => {
            let (c, r2) = (*center, radius * radius);
            Box::new(move |x| wrap_dist2(&x[..2], &c) < r2)
        }
        GeometrySpec::Annulus {
            center,
            inner_radius,
            outer_radius,
        } => {
            let (c, i2, o2) = (*center, inner_radius * inner_radius, outer_radius * outer_radius);
            Box::new(move |x| {
                let d2 = wrap_dist2(&x[..2], &c);
                i2 < d2 && d2 < o2
            })
        }
        GeometrySpec::Ellipse { center, semi_axes } => {
            let (c, ax) = (*center, *semi_axes);
            Box::new(move |x| {
                let u = wrap_delta(x[0], c[0]) / ax[0];
                let v = wrap_delta(x[1], c[1]) / ax[1];
                u * u + v * v < 1.0
            })
        }
        GeometrySpec::Square { center, side } => {
            let (c, h) = (*center, side / 2.0);
            Box::new(move |x| wrap_delta(x[0], c[0]) < h && wrap_delta(x[1], c[1]) < h)
        }
        GeometrySpec::MultiCircle { count, radius } => {
            let centers = place_circles(*count, *radius, seed)?;
            let r2 = radius * radius;
            Box::new(move |x| centers.iter().any(|c| wrap_dist2(&x[..2], c) < r2))
        }
        GeometrySpec::Sphere { center, radius } => {
            let (c, r2) = (*center, radius * radius);
            Box::new(move |x| wrap_dist2(&x[..3], &c) < r2)
        }
    };
    let labels: Vec<u8> = (0..grid.len())
        .map(|idx| {
            let x = grid.voxel_center(idx);
            u8::from(inside(&x[..grid.dim()]))
        })
        .collect();
    PhaseMap::new(grid, labels)
}
