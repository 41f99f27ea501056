//! Experiment orchestration: one full-mask reference solve, then a sweep
//! over (pattern, R) combinations, each compared against the reference
//! before and after the compatibility projection.
//!
//! Everything lands in the output directory:
//!
//! * `phases.{spmr,csv,pgm}` — the voxelized microstructure,
//! * `mask_<tag>.txt` / `mask_<tag>.pgm` — retained frequency sets,
//! * `sigma_<tag>.vtk`, `epsilon_<tag>.vtk`, `eps_p_acc_<tag>.vtk`,
//!   `delta_sigma11_<tag>.vtk`, `sigma_<tag>.csv` — fields,
//! * `errors.csv` — one row per (pattern, R, post stage),
//! * `timing_<pattern>.{csv,txt}` — per-R timings plus the unreduced row,
//! * `errors_vs_r_<pattern>.dat` — gnuplot-ready error curves,
//! * `summary.txt` — run log, warnings, failures, crossover scan.
//!
//! A failed combination is recorded and skipped; the sweep continues.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::PhaseMap;
use crate::io::{
    fmt_e9, write_field_csv, write_pgm, write_phase_binary, write_phase_csv, write_text,
    write_vtk_scalar, write_vtk_tensor,
};
use crate::materials::MaterialSet;
use crate::postproc::{
    compatibility_step, macro_error, micro_error, stress_difference_field, ErrorReport,
    PostStage,
};
use crate::sampling::{
    adapted_mask, full_mask, mask_apply_geometry_preview, mask_to_text, radial_mask,
    FrequencyMask, Pattern,
};
use crate::spectral::{basic_scheme_solve, SolveResult, SolveSettings};
use crate::tensor::SymTensor;

/// One line of a timing table.
#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub pattern: Pattern,
    pub r_percent: f64,
    pub iterations: usize,
    pub seconds_total: f64,
    pub gamma_mean_seconds: f64,
    pub constitutive_mean_seconds: f64,
    pub compatibility_seconds: f64,
}

/// Per-pattern timing table: the unreduced reference row plus one row per R.
#[derive(Clone, Debug, PartialEq)]
pub struct TimingTable {
    pub pattern: Pattern,
    pub rows: Vec<TimingRow>,
}

impl TimingTable {
    pub const CSV_HEADER: &'static str = "pattern,R,iterations,seconds_total,\
                                          gamma_mean_seconds,constitutive_mean_seconds,\
                                          compatibility_seconds";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.pattern,
                r.r_percent,
                r.iterations,
                r.seconds_total,
                r.gamma_mean_seconds,
                r.constitutive_mean_seconds,
                r.compatibility_seconds
            );
        }
        out
    }

    /// Fixed-width rendering for terminals and logs.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<8} {:>7} {:>6} {:>15} {:>15} {:>15} {:>15}\n",
            "pattern", "R", "iters", "total [s]", "gamma mean [s]", "const mean [s]", "compat [s]"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<8} {:>7.2} {:>6} {:>15} {:>15} {:>15} {:>15}",
                r.pattern.to_string(),
                r.r_percent,
                r.iterations,
                fmt_e9(r.seconds_total),
                fmt_e9(r.gamma_mean_seconds),
                fmt_e9(r.constitutive_mean_seconds),
                fmt_e9(r.compatibility_seconds)
            );
        }
        out
    }
}

/// Write a timing table as CSV plus an aligned-text rendering.
pub fn emit_timing_table(table: &TimingTable, csv_path: &Path, text_path: &Path) -> Result<()> {
    write_text(csv_path, &table.to_csv())?;
    write_text(text_path, &table.to_text())
}

/// Everything a sweep produces (artifacts are also on disk in `out_dir`).
#[derive(Debug)]
pub struct ExperimentOutcome {
    pub reference: SolveResult,
    pub reports: Vec<ErrorReport>,
    pub timing_tables: Vec<TimingTable>,
    /// Human-readable descriptions of combinations that failed.
    pub failures: Vec<String>,
    /// Smallest swept R where the radial pattern's raw micro error is no
    /// larger than the adapted one's (informational).
    pub crossover_r: Option<f64>,
    /// Mask warnings and other notes, one per line in the summary.
    pub notes: Vec<String>,
    pub out_dir: PathBuf,
}

fn combo_tag(pattern: Pattern, r_percent: f64) -> String {
    format!("{pattern}_R{r_percent}")
}

/// Mask occupancy as an image in the centered frequency layout (DC in the
/// middle), for 2-D grids.
fn mask_preview_values(mask: &FrequencyMask) -> Vec<f64> {
    let grid = mask.grid();
    let (n0, n1) = (grid.axis_len(0), grid.axis_len(1));
    let mut vals = vec![0.0; grid.len()];
    for &idx in mask.retained() {
        let m = grid.freq_of(idx);
        let c0 = (m[0] + (n0 as i64) / 2) as usize;
        let c1 = (m[1] + (n1 as i64) / 2) as usize;
        vals[c0 + n0 * c1] = 1.0;
    }
    vals
}

/// Write the field artifacts of one solve under the given tag. When a
/// reference is supplied, the first-component stress deviation map
/// `|sigma_ref_11 - sigma_11|` is written as well.
pub fn write_fields(
    result: &SolveResult,
    reference: Option<&SolveResult>,
    dir: &Path,
    tag: &str,
) -> Result<()> {
    write_vtk_tensor(&dir.join(format!("sigma_{tag}.vtk")), "sigma", &result.stress)?;
    write_vtk_tensor(&dir.join(format!("epsilon_{tag}.vtk")), "epsilon", &result.strain)?;
    write_field_csv(&dir.join(format!("sigma_{tag}.csv")), &result.stress)?;
    if let Some(plastic) = &result.plastic {
        write_vtk_scalar(
            &dir.join(format!("eps_p_acc_{tag}.vtk")),
            "eps_p_acc",
            &plastic.accumulated(),
        )?;
    }
    if let Some(reference) = reference {
        let delta = stress_difference_field(result, reference, 0, 0)?;
        write_vtk_scalar(
            &dir.join(format!("delta_sigma11_{tag}.vtk")),
            "delta_sigma11",
            &delta,
        )?;
    }
    Ok(())
}

fn build_mask(
    config: &RunConfig,
    phases: &PhaseMap,
    pattern: Pattern,
    r_percent: f64,
) -> Result<FrequencyMask> {
    match pattern {
        Pattern::Full => Ok(full_mask(*phases.grid())),
        Pattern::Radial => radial_mask(
            *phases.grid(),
            r_percent,
            &config.radial.unwrap_or_default(),
        ),
        Pattern::Adapted => adapted_mask(phases, r_percent),
    }
}

struct Ctx<'a> {
    config: &'a RunConfig,
    phases: &'a PhaseMap,
    materials: &'a MaterialSet,
    eps_bar: &'a SymTensor,
    settings: &'a SolveSettings,
    reference: &'a SolveResult,
    out_dir: &'a Path,
}

impl Ctx<'_> {
    fn report_row(
        &self,
        pattern: Pattern,
        r_percent: f64,
        post: PostStage,
        sol: &SolveResult,
    ) -> Result<ErrorReport> {
        let micro = micro_error(sol, self.reference)?;
        Ok(ErrorReport {
            geometry: self.config.geometry.kind_name().to_string(),
            material: self.config.material_name().to_string(),
            pattern,
            r_percent,
            post,
            macro_error: macro_error(sol, self.reference)?,
            micro_error: micro.value,
            excluded_voxels: micro.excluded_voxels,
            iterations: sol.total_iterations(),
            seconds_total: sol.timings.total_seconds(),
            seconds_gamma: sol.timings.gamma_seconds(),
            seconds_constitutive: sol.timings.constitutive_seconds(),
        })
    }

    /// Solve one (pattern, R) combination and compare raw + compatibility
    /// stages against the reference.
    fn run_combo(
        &self,
        pattern: Pattern,
        r_percent: f64,
        notes: &mut Vec<String>,
    ) -> Result<(Vec<ErrorReport>, TimingRow)> {
        let mask = build_mask(self.config, self.phases, pattern, r_percent)?;
        let tag = combo_tag(pattern, r_percent);
        if let Some(warning) = &mask.warning {
            notes.push(format!("{tag}: {warning}"));
        }
        write_text(&self.out_dir.join(format!("mask_{tag}.txt")), &mask_to_text(&mask))?;
        if self.phases.grid().dim() == 2 {
            write_pgm(
                &self.out_dir.join(format!("mask_{tag}.pgm")),
                self.phases.grid(),
                &mask_preview_values(&mask),
            )?;
        }

        let sol = basic_scheme_solve(self.phases, self.materials, self.eps_bar, &mask, self.settings)?;
        if !sol.converged {
            return Err(Error::Solver(format!(
                "no convergence after {} iterations (residual {:.3e})",
                sol.total_iterations(),
                sol.final_residual()
            )));
        }
        let raw = self.report_row(pattern, r_percent, PostStage::Raw, &sol)?;
        let compat_sol = compatibility_step(&sol, self.phases, self.materials, self.eps_bar)?;
        let compat = self.report_row(pattern, r_percent, PostStage::Compatibility, &compat_sol)?;
        write_fields(&sol, Some(self.reference), self.out_dir, &tag)?;

        let row = TimingRow {
            pattern,
            r_percent,
            iterations: sol.total_iterations(),
            seconds_total: sol.timings.total_seconds(),
            gamma_mean_seconds: sol.timings.gamma_mean_seconds(),
            constitutive_mean_seconds: sol.timings.constitutive_mean_seconds(),
            compatibility_seconds: compat_sol.timings.total_seconds(),
        };
        Ok((vec![raw, compat], row))
    }
}

/// Smallest R (ascending) where the radial raw micro error is no larger than
/// the adapted one; `None` when the patterns never cross in the sweep.
pub(crate) fn crossover_from_reports(reports: &[ErrorReport]) -> Option<f64> {
    let micro_at = |pattern: Pattern, r: f64| -> Option<f64> {
        reports
            .iter()
            .find(|rep| rep.pattern == pattern && rep.r_percent == r && rep.post == PostStage::Raw)
            .map(|rep| rep.micro_error)
    };
    let mut rs: Vec<f64> = reports
        .iter()
        .filter(|rep| rep.pattern == Pattern::Radial && rep.post == PostStage::Raw)
        .map(|rep| rep.r_percent)
        .collect();
    rs.sort_by(|a, b| a.partial_cmp(b).expect("finite R"));
    for r in rs {
        if let (Some(radial), Some(adapted)) = (micro_at(Pattern::Radial, r), micro_at(Pattern::Adapted, r)) {
            if radial <= adapted {
                return Some(r);
            }
        }
    }
    None
}

/// One gnuplot-ready data file per pattern:
/// `R macro_raw micro_raw macro_compat micro_compat`.
fn plot_data(reports: &[ErrorReport], pattern: Pattern) -> String {
    let mut rs: Vec<f64> = reports
        .iter()
        .filter(|rep| rep.pattern == pattern)
        .map(|rep| rep.r_percent)
        .collect();
    rs.sort_by(|a, b| a.partial_cmp(b).expect("finite R"));
    rs.dedup();
    let mut out = format!("# pattern: {pattern}\n# R macro_raw micro_raw macro_compat micro_compat\n");
    let find = |r: f64, post: PostStage| -> Option<&ErrorReport> {
        reports
            .iter()
            .find(|rep| rep.pattern == pattern && rep.r_percent == r && rep.post == post)
    };
    for r in rs {
        if let (Some(raw), Some(compat)) = (find(r, PostStage::Raw), find(r, PostStage::Compatibility)) {
            let _ = writeln!(
                out,
                "{r} {} {} {} {}",
                fmt_e9(raw.macro_error),
                fmt_e9(raw.micro_error),
                fmt_e9(compat.macro_error),
                fmt_e9(compat.micro_error)
            );
        }
    }
    out
}

fn write_phase_artifacts(phases: &PhaseMap, out_dir: &Path) -> Result<()> {
    write_phase_binary(&out_dir.join("phases.spmr"), phases)?;
    write_phase_csv(&out_dir.join("phases.csv"), phases)?;
    if phases.grid().dim() == 2 {
        let vals: Vec<f64> = phases.labels().iter().map(|&l| l as f64).collect();
        write_pgm(&out_dir.join("phases.pgm"), phases.grid(), &vals)?;
    }
    Ok(())
}

/// Run the full experiment described by the config: reference solve, sweep,
/// comparisons, artifacts. See the module docs for the files produced.
pub fn run_experiment(config: &RunConfig, out_dir: &Path) -> Result<ExperimentOutcome> {
    let (phases, materials, eps_bar, settings) = config.build()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_phase_artifacts(&phases, out_dir)?;

    let reference = basic_scheme_solve(&phases, &materials, &eps_bar, &full_mask(*phases.grid()), &settings)?;
    if !reference.converged {
        return Err(Error::Solver(format!(
            "reference solve did not converge after {} iterations (residual {:.3e})",
            reference.total_iterations(),
            reference.final_residual()
        )));
    }
    write_fields(&reference, None, out_dir, "full")?;
    let ref_compat = compatibility_step(&reference, &phases, &materials, &eps_bar)?;

    let ctx = Ctx {
        config,
        phases: &phases,
        materials: &materials,
        eps_bar: &eps_bar,
        settings: &settings,
        reference: &reference,
        out_dir,
    };

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let mut timing_tables = Vec::new();

    let reference_row = TimingRow {
        pattern: Pattern::Full,
        r_percent: 100.0,
        iterations: reference.total_iterations(),
        seconds_total: reference.timings.total_seconds(),
        gamma_mean_seconds: reference.timings.gamma_mean_seconds(),
        constitutive_mean_seconds: reference.timings.constitutive_mean_seconds(),
        compatibility_seconds: ref_compat.timings.total_seconds(),
    };

    if config.patterns.contains(&Pattern::Full) {
        reports.push(ctx.report_row(Pattern::Full, 100.0, PostStage::Raw, &reference)?);
        reports.push(ctx.report_row(Pattern::Full, 100.0, PostStage::Compatibility, &ref_compat)?);
    }

    for &pattern in &config.patterns {
        if pattern == Pattern::Full {
            continue;
        }
        let mut rows = vec![reference_row.clone()];
        for &r_percent in &config.r_values {
            match ctx.run_combo(pattern, r_percent, &mut notes) {
                Ok((combo_reports, row)) => {
                    reports.extend(combo_reports);
                    rows.push(row);
                }
                Err(e) => failures.push(format!("{}: {e}", combo_tag(pattern, r_percent))),
            }
        }
        let table = TimingTable { pattern, rows };
        emit_timing_table(
            &table,
            &out_dir.join(format!("timing_{pattern}.csv")),
            &out_dir.join(format!("timing_{pattern}.txt")),
        )?;
        timing_tables.push(table);
    }

    let mut errors_csv = String::from(ErrorReport::CSV_HEADER);
    errors_csv.push('\n');
    for rep in &reports {
        errors_csv.push_str(&rep.to_csv_row());
        errors_csv.push('\n');
    }
    write_text(&out_dir.join("errors.csv"), &errors_csv)?;

    for &pattern in &[Pattern::Radial, Pattern::Adapted] {
        if reports.iter().any(|rep| rep.pattern == pattern) {
            write_text(
                &out_dir.join(format!("errors_vs_r_{pattern}.dat")),
                &plot_data(&reports, pattern),
            )?;
        }
    }

    let crossover_r = crossover_from_reports(&reports);
    let outcome = ExperimentOutcome {
        reference,
        reports,
        timing_tables,
        failures,
        crossover_r,
        notes,
        out_dir: out_dir.to_path_buf(),
    };
    write_text(&out_dir.join("summary.txt"), &summary_text(config, &phases, &outcome))?;
    Ok(outcome)
}

fn summary_text(config: &RunConfig, phases: &PhaseMap, outcome: &ExperimentOutcome) -> String {
    let grid = phases.grid();
    let dims: Vec<String> = (0..grid.dim()).map(|a| grid.axis_len(a).to_string()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "geometry:         {}", config.geometry.kind_name());
    let _ = writeln!(out, "material:         {}", config.material_name());
    let _ = writeln!(out, "grid:             {}", dims.join(" x "));
    let _ = writeln!(out, "volume fraction:  {:.6}", phases.volume_fraction());
    let _ = writeln!(out, "load steps:       {}", config.load_steps);
    let reference = &outcome.reference;
    let _ = writeln!(
        out,
        "reference:        {} iterations, {:.3} s, residual {:.3e}",
        reference.total_iterations(),
        reference.timings.total_seconds(),
        reference.final_residual()
    );
    let _ = writeln!(
        out,
        "singular freqs:   {} (Green tensor zeroed there)",
        reference.singular_frequencies.len()
    );
    out.push('\n');
    for rep in &outcome.reports {
        let _ = writeln!(
            out,
            "{:<22}  macro {:>13}  micro {:>13}  excluded {:>6}  iters {:>5}",
            format!("{}_R{} [{}]", rep.pattern, rep.r_percent, rep.post),
            fmt_e9(rep.macro_error),
            fmt_e9(rep.micro_error),
            rep.excluded_voxels,
            rep.iterations
        );
    }
    out.push('\n');
    match outcome.crossover_r {
        Some(r) => {
            let _ = writeln!(
                out,
                "crossover: radial micro error <= adapted at R = {r} (raw stage)"
            );
        }
        None => {
            let _ = writeln!(
                out,
                "crossover: none in the swept R values (adapted stays ahead)"
            );
        }
    }
    if !outcome.notes.is_empty() {
        out.push('\n');
        for note in &outcome.notes {
            let _ = writeln!(out, "note: {note}");
        }
    }
    if !outcome.failures.is_empty() {
        out.push('\n');
        for failure in &outcome.failures {
            let _ = writeln!(out, "FAILED: {failure}");
        }
    }
    out
}

/// `generate` verb: voxelize the geometry and write phase-map and mask
/// previews without solving anything.
pub fn generate_previews(config: &RunConfig, out_dir: &Path) -> Result<()> {
    let (phases, _, _, _) = config.build()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_phase_artifacts(&phases, out_dir)?;
    for &pattern in &config.patterns {
        if pattern == Pattern::Full {
            continue;
        }
        for &r_percent in &config.r_values {
            let mask = build_mask(config, &phases, pattern, r_percent)?;
            let tag = combo_tag(pattern, r_percent);
            write_text(&out_dir.join(format!("mask_{tag}.txt")), &mask_to_text(&mask))?;
            if phases.grid().dim() == 2 {
                write_pgm(
                    &out_dir.join(format!("mask_{tag}.pgm")),
                    phases.grid(),
                    &mask_preview_values(&mask),
                )?;
                let preview = mask_apply_geometry_preview(&phases, &mask)?;
                write_pgm(
                    &out_dir.join(format!("geometry_preview_{tag}.pgm")),
                    phases.grid(),
                    preview.data(),
                )?;
            }
        }
    }
    Ok(())
}

/// `solve` verb: a single run with the first configured pattern and R value;
/// writes the fields and returns the result.
pub fn run_single(config: &RunConfig, out_dir: &Path) -> Result<SolveResult> {
    let (phases, materials, eps_bar, settings) = config.build()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_phase_artifacts(&phases, out_dir)?;
    let pattern = config.patterns[0];
    let r_percent = if pattern == Pattern::Full {
        100.0
    } else {
        config.r_values[0]
    };
    let mask = build_mask(config, &phases, pattern, r_percent)?;
    let tag = combo_tag(pattern, r_percent);
    write_text(&out_dir.join(format!("mask_{tag}.txt")), &mask_to_text(&mask))?;
    let sol = basic_scheme_solve(&phases, &materials, &eps_bar, &mask, &settings)?;
    if !sol.converged {
        return Err(Error::Solver(format!(
            "no convergence after {} iterations (residual {:.3e})",
            sol.total_iterations(),
            sol.final_residual()
        )));
    }
    write_fields(&sol, None, out_dir, &tag)?;
    let mut log = String::new();
    let _ = writeln!(log, "pattern:    {pattern}");
    let _ = writeln!(log, "R:          {r_percent}");
    let _ = writeln!(log, "mask size:  {} ({:.4}%)", sol.mask_len, 100.0 * sol.mask_fraction);
    let _ = writeln!(log, "iterations: {}", sol.total_iterations());
    let _ = writeln!(log, "residual:   {:.6e}", sol.final_residual());
    let _ = writeln!(log, "seconds:    {:.3}", sol.timings.total_seconds());
    let mean = sol.macro_stress;
    let _ = writeln!(log, "mean stress (11, 22{}): {:?}", if phases.grid().dim() == 3 { ", 33" } else { "" }, mean.components());
    write_text(&out_dir.join("solve.txt"), &log)?;
    Ok(sol)
}

/// `report` verb: re-render plot data and the crossover scan from a stored
/// `errors.csv`.
pub fn rerender_report(csv_path: &Path, out_dir: &Path) -> Result<Vec<ErrorReport>> {
    let text = crate::io::read_text(csv_path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::format(csv_path, "empty report file"))?;
    if header.trim() != ErrorReport::CSV_HEADER {
        return Err(Error::format(csv_path, "unrecognized report header"));
    }
    let mut reports = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        reports.push(
            ErrorReport::from_csv_row(line)
                .map_err(|e| Error::format(csv_path, e.to_string()))?,
        );
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for &pattern in &[Pattern::Radial, Pattern::Adapted] {
        if reports.iter().any(|rep| rep.pattern == pattern) {
            write_text(
                &out_dir.join(format!("errors_vs_r_{pattern}.dat")),
                &plot_data(&reports, pattern),
            )?;
        }
    }
    let mut scan = String::new();
    match crossover_from_reports(&reports) {
        Some(r) => {
            let _ = writeln!(scan, "crossover: radial micro error <= adapted at R = {r} (raw stage)");
        }
        None => {
            let _ = writeln!(scan, "crossover: none in the stored R values");
        }
    }
    write_text(&out_dir.join("crossover.txt"), &scan)?;
    Ok(reports)
}
