//! Error metrics and the compatibility projection on solved fixtures.

mod common;

use std::sync::LazyLock;

use common::random_phase_map;
use fourhom::geometry::{generate_geometry, GeometrySpec};
use fourhom::grid::Grid;
use fourhom::materials::{ElasticParams, MaterialSet, PhaseModel};
use fourhom::postproc::{
    compatibility_step, macro_error, micro_error, stress_difference_field, ErrorReport,
    PostStage,
};
use fourhom::sampling::{adapted_mask, full_mask, radial_mask, Pattern, RadialParams};
use fourhom::spectral::{basic_scheme_solve, SolveResult, SolveSettings};
use fourhom::tensor::SymTensor;

const CONTRAST2: ((f64, f64), (f64, f64)) = ((1.0, 1.0), (2.0, 2.0));

fn elastic_two_phase(((la, mua), (lb, mub)): ((f64, f64), (f64, f64))) -> MaterialSet {
    MaterialSet::two_phase(
        PhaseModel::Elastic(ElasticParams::new(la, mua)),
        PhaseModel::Elastic(ElasticParams::new(lb, mub)),
    )
}

struct CircleFixture {
    phases: fourhom::grid::PhaseMap,
    materials: MaterialSet,
    eps_bar: SymTensor,
    reference: SolveResult,
}

/// Shared 64^2 circle fixture: reference solved once at tight tolerance.
static CIRCLE: LazyLock<CircleFixture> = LazyLock::new(|| {
    let grid = Grid::new_2d(64, 64).unwrap();
    let phases = generate_geometry(
        &GeometrySpec::Circle {
            center: [0.5, 0.5],
            radius: 0.25,
        },
        grid,
        0,
    )
    .unwrap();
    let materials = elastic_two_phase(CONTRAST2);
    let eps_bar = SymTensor::from_diagonal(2, &[0.01, -0.01]);
    let settings = SolveSettings {
        tol: 1e-12,
        ..SolveSettings::default()
    };
    let reference =
        basic_scheme_solve(&phases, &materials, &eps_bar, &full_mask(grid), &settings).unwrap();
    assert!(reference.converged);
    CircleFixture {
        phases,
        materials,
        eps_bar,
        reference,
    }
});

fn solve_reduced(fix: &CircleFixture, pattern: Pattern, r: f64) -> SolveResult {
    let grid = *fix.phases.grid();
    let mask = match pattern {
        Pattern::Full => full_mask(grid),
        Pattern::Radial => radial_mask(grid, r, &RadialParams::default()).unwrap(),
        Pattern::Adapted => adapted_mask(&fix.phases, r).unwrap(),
    };
    let settings = SolveSettings {
        tol: 1e-10,
        ..SolveSettings::default()
    };
    let sol =
        basic_scheme_solve(&fix.phases, &fix.materials, &fix.eps_bar, &mask, &settings).unwrap();
    assert!(sol.converged);
    sol
}

#[test]
fn errors_vanish_only_against_self() {
    let fix = &*CIRCLE;
    assert!(macro_error(&fix.reference, &fix.reference).unwrap() < 1e-15);
    let me = micro_error(&fix.reference, &fix.reference).unwrap();
    assert!(me.value < 1e-15);
    assert_eq!(me.excluded_voxels, 0);

    let reduced = solve_reduced(fix, Pattern::Adapted, 3.0);
    assert!(macro_error(&reduced, &fix.reference).unwrap() > 1e-6);
    assert!(micro_error(&reduced, &fix.reference).unwrap().value > 1e-4);
}

#[test]
fn uniform_relative_offset_is_measured_exactly() {
    let fix = &*CIRCLE;
    let mut scaled = fix.reference.clone();
    for v in scaled.stress.data_mut() {
        *v *= 1.05;
    }
    scaled.macro_stress = scaled.stress.volume_average();
    assert!((micro_error(&scaled, &fix.reference).unwrap().value - 0.05).abs() < 1e-12);
    assert!((macro_error(&scaled, &fix.reference).unwrap() - 0.05).abs() < 1e-12);
}

#[test]
fn near_zero_reference_voxels_are_excluded_and_counted() {
    let fix = &*CIRCLE;
    let mut reference = fix.reference.clone();
    let mut sol = fix.reference.clone();
    // Zero out the reference stress at two voxels; the pointwise ratio is
    // undefined there, so they must drop out of the mean.
    let m = reference.stress.ncomp();
    for idx in [7usize, 131] {
        for c in 0..m {
            reference.stress.data_mut()[idx * m + c] = 0.0;
            sol.stress.data_mut()[idx * m + c] = 123.0; // would dominate if counted
        }
    }
    let me = micro_error(&sol, &reference).unwrap();
    assert_eq!(me.excluded_voxels, 2);
    assert!(me.value < 1e-12, "mean contaminated: {}", me.value);
}

#[test]
fn component_convention_permutation_leaves_errors_invariant() {
    // Transposing the lattice and swapping the 11/22 components is a
    // symmetry of the metrics: apply it to both fields and compare.
    let fix = &*CIRCLE;
    let reduced = solve_reduced(fix, Pattern::Adapted, 3.0);
    let grid = *fix.reference.strain.grid();
    let n0 = grid.axis_len(0);
    let n1 = grid.axis_len(1);

    let transpose = |sol: &SolveResult| -> SolveResult {
        let mut out = sol.clone();
        let m = sol.stress.ncomp();
        for i0 in 0..n0 {
            for i1 in 0..n1 {
                let src = grid.index_of([i0, i1, 0]);
                let dst = grid.index_of([i1, i0, 0]);
                for (field_src, field_dst) in [
                    (sol.stress.data(), out.stress.data_mut()),
                    (sol.strain.data(), out.strain.data_mut()),
                ] {
                    // Swap components 11 <-> 22, keep 12.
                    field_dst[dst * m] = field_src[src * m + 1];
                    field_dst[dst * m + 1] = field_src[src * m];
                    field_dst[dst * m + 2] = field_src[src * m + 2];
                }
            }
        }
        out
    };

    let a = micro_error(&reduced, &fix.reference).unwrap().value;
    let b = micro_error(&transpose(&reduced), &transpose(&fix.reference))
        .unwrap()
        .value;
    assert!((a - b).abs() < 1e-13, "{a} vs {b}");
    let am = macro_error(&reduced, &fix.reference).unwrap();
    let bm = macro_error(&transpose(&reduced), &transpose(&fix.reference)).unwrap();
    assert!((am - bm).abs() < 1e-13);
}

#[test]
fn micro_error_is_non_increasing_in_r_for_both_patterns() {
    let fix = &*CIRCLE;
    for pattern in [Pattern::Radial, Pattern::Adapted] {
        let mut last = f64::INFINITY;
        for r in [1.54, 3.06, 6.02, 11.64, 21.66, 36.79] {
            let e = micro_error(&solve_reduced(fix, pattern, r), &fix.reference)
                .unwrap()
                .value;
            assert!(
                e <= 1.10 * last,
                "{pattern} micro error rose beyond tolerance at R={r}: {last} -> {e}"
            );
            last = e;
        }
    }
}

#[test]
fn adapted_beats_radial_at_small_r() {
    let fix = &*CIRCLE;
    for r in [1.54, 3.06, 6.02] {
        let ea = micro_error(&solve_reduced(fix, Pattern::Adapted, r), &fix.reference)
            .unwrap()
            .value;
        let er = micro_error(&solve_reduced(fix, Pattern::Radial, r), &fix.reference)
            .unwrap()
            .value;
        assert!(ea < er, "R={r}: adapted {ea} not below radial {er}");
    }
}

#[test]
fn compatibility_step_improves_reduced_solutions() {
    let fix = &*CIRCLE;
    let reduced = solve_reduced(fix, Pattern::Adapted, 1.54);
    let before = micro_error(&reduced, &fix.reference).unwrap().value;
    let projected =
        compatibility_step(&reduced, &fix.phases, &fix.materials, &fix.eps_bar).unwrap();
    let after = micro_error(&projected, &fix.reference).unwrap().value;
    assert!(
        after < before,
        "projection did not improve the field: {before} -> {after}"
    );
    // The full mask is reported on the projected result.
    assert!((projected.mask_fraction - 1.0).abs() < 1e-15);
}

#[test]
fn compatibility_step_is_a_no_op_on_the_reference() {
    // The reference is a fixed point of the full-mask application up to the
    // solver tolerance, so one more application must not move it (checked
    // against the tight 1e-12 tolerance the fixture is solved at).
    let fix = &*CIRCLE;
    let projected =
        compatibility_step(&fix.reference, &fix.phases, &fix.materials, &fix.eps_bar).unwrap();
    let rel = common::rel_l2(projected.strain.data(), fix.reference.strain.data());
    assert!(rel < 1e-10, "reference moved by {rel:e}");
    let me = micro_error(&projected, &fix.reference).unwrap().value;
    assert!(me < 1e-10, "micro error after projection: {me:e}");
}

#[test]
fn compatibility_step_rejects_mismatched_inputs() {
    let fix = &*CIRCLE;
    let other = random_phase_map(Grid::new_2d(32, 32).unwrap(), 0.5, 1);
    assert!(compatibility_step(&fix.reference, &other, &fix.materials, &fix.eps_bar).is_err());
    let bad_eps = SymTensor::from_diagonal(3, &[0.01, 0.01, 0.01]);
    assert!(
        compatibility_step(&fix.reference, &fix.phases, &fix.materials, &bad_eps).is_err()
    );
}

#[test]
fn stress_difference_field_localizes_at_the_interface() {
    let fix = &*CIRCLE;
    let reduced = solve_reduced(fix, Pattern::Adapted, 1.54);
    // Self-difference is identically zero.
    let zero = stress_difference_field(&fix.reference, &fix.reference, 0, 0).unwrap();
    assert!(zero.data().iter().all(|&v| v == 0.0));
    // A constant offset comes back as the constant.
    let mut offset = fix.reference.clone();
    for chunk in offset.stress.data_mut().chunks_exact_mut(3) {
        chunk[0] += 0.25;
    }
    let field = stress_difference_field(&offset, &fix.reference, 0, 0).unwrap();
    assert!(field.data().iter().all(|&v| (v - 0.25).abs() < 1e-12));

    // The largest difference of a reduced solution sits within two voxels
    // of the inclusion boundary.
    let diff = stress_difference_field(&reduced, &fix.reference, 0, 0).unwrap();
    let grid = *diff.grid();
    let (argmax, _) = diff
        .data()
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    let x = grid.voxel_center(argmax);
    let dist_to_boundary =
        ((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)).sqrt() - 0.25;
    let h = grid.spacing(0);
    assert!(
        dist_to_boundary.abs() <= 2.0 * h,
        "argmax at distance {dist_to_boundary} from the interface"
    );
}

#[test]
fn error_report_round_trips_through_csv() {
    let report = ErrorReport {
        geometry: "circle".into(),
        material: "elastic".into(),
        pattern: Pattern::Adapted,
        r_percent: 1.54,
        post: PostStage::Compatibility,
        macro_error: 1.25e-3,
        micro_error: 3.5e-2,
        excluded_voxels: 0,
        iterations: 13,
        seconds_total: 0.125,
        seconds_gamma: 0.01,
        seconds_constitutive: 0.05,
    };
    assert_eq!(
        ErrorReport::CSV_HEADER,
        "geometry,material,pattern,R,post,macro_error,micro_error,iterations,\
         seconds_total,seconds_gamma,seconds_constitutive"
    );
    let row = report.to_csv_row();
    let back = ErrorReport::from_csv_row(&row).unwrap();
    assert_eq!(back, report);
    assert!(ErrorReport::from_csv_row("too,few,fields").is_err());
}
