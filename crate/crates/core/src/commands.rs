//! Subcommand bodies. Each writes its files into the configured output
//! directory and finishes with `manifest.json`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::bifurcation::{
    design_feasibility, linspace, quiver_field, saddle_region_map, trace_path, ContinuationSettings, PathTerminal,
};
use crate::config::{ForceSpec, RunConfig};
use crate::equilibria::{fixed_points, moving_fixed_point, unlatched_fixed_point, FixedPoint};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::model::{Mode, SystemState};
use crate::output::{self, fmt_f64, Manifest};
use crate::sim::{simulate, Termination, Trajectory};
use crate::stability::{analyze, Classification};

fn prepare(cfg: &RunConfig, command: &str) -> Result<Manifest> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    Manifest::new(command, &cfg.echo)
}

fn single_force(cfg: &RunConfig, command: &str) -> Result<f64> {
    match cfg.force {
        ForceSpec::Single(f) => Ok(f),
        ForceSpec::Range { .. } => Err(Error::InvalidArgument(format!("{command} takes a single F_L, not a range"))),
    }
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::EndTime => "end_time",
        Termination::LeftSpring => "left_spring",
    }
}

pub fn cmd_simulate(cfg: &RunConfig, _executor: Executor) -> Result<Manifest> {
    let f_l = single_force(cfg, "simulate")?;
    let mut manifest = prepare(cfg, "simulate")?;
    let traj = simulate(&cfg.params, cfg.x0, f_l, cfg.t_end, &cfg.integrator)?;
    let dir = &cfg.output_dir;
    manifest.record("trajectory.csv", output::write_trajectory_csv(&dir.join("trajectory.csv"), &traj)?);
    output::write_json(&dir.join("events.json"), &output::events_json(&traj.events))?;
    manifest.record("events.json", traj.events.len());
    let last = traj.last();
    manifest.summary = json!({
        "F_L": f_l,
        "termination": termination_name(traj.termination),
        "events": traj.events.len(),
        "t_final": last.t,
        "final_state": last.state,
    });
    manifest.write(dir)?;
    Ok(manifest)
}

pub fn cmd_equilibria(cfg: &RunConfig, executor: Executor) -> Result<Manifest> {
    let mut manifest = prepare(cfg, "equilibria")?;
    let forces = cfg.force.values();
    let rows: Vec<(f64, Option<FixedPoint>)> =
        executor.map_slice(&forces, |&f| (f, moving_fixed_point(&cfg.params, f)));
    let n = output::write_fixed_points_csv(&cfg.output_dir.join("fixedpoints.csv"), &rows)?;
    manifest.record("fixedpoints.csv", n);
    manifest.summary = json!({
        "values": forces.len(),
        "interior": rows.iter().filter(|(_, fp)| fp.is_some_and(|fp| !fp.origin)).count(),
        "without_fixed_point": rows.iter().filter(|(_, fp)| fp.is_none()).count(),
    });
    manifest.write(&cfg.output_dir)?;
    Ok(manifest)
}

pub fn cmd_classify(cfg: &RunConfig, executor: Executor) -> Result<Manifest> {
    let mut manifest = prepare(cfg, "classify")?;
    let forces = cfg.force.values();
    let per_force = executor.map_slice(&forces, |&f| {
        fixed_points(&cfg.params, f)
            .into_iter()
            .map(|fp| analyze(&cfg.params, &fp).map(|r| (fp, r)))
            .collect::<Result<Vec<_>>>()
    });
    let mut rows = Vec::new();
    for r in per_force {
        rows.extend(r?);
    }
    let n = output::write_classification_csv(&cfg.output_dir.join("classification.csv"), &rows)?;
    manifest.record("classification.csv", n);
    let count = |c: Classification| rows.iter().filter(|(_, r)| r.classification == c).count();
    manifest.summary = json!({
        "saddle": count(Classification::Saddle),
        "non_saddle": count(Classification::NonSaddle),
        "marginal": count(Classification::Marginal),
    });
    manifest.write(&cfg.output_dir)?;
    Ok(manifest)
}

pub fn cmd_trace(cfg: &RunConfig, _executor: Executor) -> Result<Manifest> {
    let (start_f, end_f) = match cfg.force {
        ForceSpec::Single(f) => (f, 0.0),
        ForceSpec::Range { start, stop, .. } => (start, stop),
    };
    let start_p = match cfg.trace_start_p {
        Some(p) => p,
        None => {
            moving_fixed_point(&cfg.params, start_f)
                .ok_or_else(|| Error::InvalidStart(format!("no latched fixed point at F_L = {start_f}")))?
                .p_star
        }
    };
    let mut manifest = prepare(cfg, "trace")?;
    let path = trace_path(&cfg.params, start_p, start_f, end_f, &ContinuationSettings::default())?;
    let n = output::write_path_csv(&cfg.output_dir.join("path.csv"), &path)?;
    manifest.record("path.csv", n);
    let last = path.samples.last().expect("a path holds its start sample");
    let terminal = match path.terminal {
        PathTerminal::ReachedZeroForce => "reached_zero_force",
        PathTerminal::ReachedTarget => "reached_target",
        PathTerminal::DenominatorSingular => "denominator_singular",
        PathTerminal::LeftDomain => "left_domain",
    };
    manifest.summary = json!({
        "terminal": terminal,
        "final_F_L": last.f_l,
        "final_p_star": last.p_star,
        "all_in_S": path.samples.iter().all(|s| s.in_s),
    });
    manifest.write(&cfg.output_dir)?;
    Ok(manifest)
}

fn raster_grids(cfg: &RunConfig) -> (Vec<f64>, Vec<f64>) {
    let (n_p, n_f) = cfg.grid;
    let (f_lo, f_hi) = cfg.force.bounds();
    (linspace(0.0, cfg.params.latch_radius, n_p), linspace(f_lo, f_hi, n_f))
}

pub fn cmd_region_map(cfg: &RunConfig, executor: Executor) -> Result<Manifest> {
    let mut manifest = prepare(cfg, "region-map")?;
    let (p_grid, f_grid) = raster_grids(cfg);
    let map = saddle_region_map(&cfg.params, &p_grid, &f_grid, executor);
    let n = output::write_region_csv(&cfg.output_dir.join("region.csv"), &map)?;
    manifest.record("region.csv", n);
    manifest.summary = json!({
        "n_p": map.n_p,
        "n_F_L": map.n_f_l,
        "in_S": map.cells.iter().filter(|c| c.in_s).count(),
        "in_U": map.cells.iter().filter(|c| c.in_u).count(),
    });
    manifest.write(&cfg.output_dir)?;
    Ok(manifest)
}

pub fn cmd_quiver(cfg: &RunConfig, executor: Executor) -> Result<Manifest> {
    let mut manifest = prepare(cfg, "quiver")?;
    let (p_grid, f_grid) = raster_grids(cfg);
    let cells = quiver_field(&cfg.params, &p_grid, &f_grid, cfg.nominal_formula, executor);
    let n = output::write_quiver_csv(&cfg.output_dir.join("quiver.csv"), &cells)?;
    manifest.record("quiver.csv", n);
    manifest.summary = json!({ "singular": cells.iter().filter(|c| c.dp_dfl.is_nan()).count() });
    manifest.write(&cfg.output_dir)?;
    Ok(manifest)
}

pub fn cmd_design_check(cfg: &RunConfig, _executor: Executor) -> Result<Manifest> {
    let mut manifest = prepare(cfg, "design-check")?;
    let report = design_feasibility(&cfg.params)?;
    output::write_json(&cfg.output_dir.join("design.json"), &report)?;
    manifest.record("design.json", 1);
    manifest.summary = serde_json::to_value(report)?;
    manifest.write(&cfg.output_dir)?;
    Ok(manifest)
}

/// Initial conditions for the phase portrait: cell centres of an `n_p x n_v`
/// grid over `(0, 2 p0) x [-v, v]`, optionally jittered within each cell.
pub fn portrait_initial_conditions(cfg: &RunConfig) -> Result<Vec<SystemState>> {
    let params = &cfg.params;
    let r = params.latch_radius;
    let (n_p, n_v) = cfg.grid;
    let dp = 2.0 * params.natural_length / n_p as f64;
    let dv = 2.0 * cfg.velocity_range / n_v as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut states = Vec::with_capacity(n_p * n_v);
    for i in 0..n_p {
        for j in 0..n_v {
            let mut p = (i as f64 + 0.5) * dp;
            let mut v = -cfg.velocity_range + (j as f64 + 0.5) * dv;
            if cfg.jitter > 0.0 {
                p += cfg.jitter * dp * (rng.gen::<f64>() - 0.5);
                v += cfg.jitter * dv * (rng.gen::<f64>() - 0.5);
            }
            let state = if p < r {
                let l = params.latch_from_projectile(p)?;
                let l_dot = if l > 0.0 { (r - p) * v / l } else { 0.0 };
                SystemState::new(p, v, l, l_dot)
            } else {
                SystemState::new(p, v, 0.0, 0.0)
            };
            states.push(state);
        }
    }
    Ok(states)
}

fn trajectory_file(i: usize) -> String {
    format!("traj_{i:04}.csv")
}

pub fn cmd_phase_portrait(cfg: &RunConfig, executor: Executor) -> Result<Manifest> {
    let f_l = single_force(cfg, "phase-portrait")?;
    let mut manifest = prepare(cfg, "phase-portrait")?;
    let dir = &cfg.output_dir;
    let starts = portrait_initial_conditions(cfg)?;
    let runs: Vec<Result<Trajectory>> =
        executor.map_slice(&starts, |x0| simulate(&cfg.params, *x0, f_l, cfg.t_end, &cfg.integrator));

    let mut index_rows = Vec::with_capacity(runs.len());
    let mut failures = 0;
    for (i, (x0, run)) in starts.iter().zip(&runs).enumerate() {
        let mut row = vec![i.to_string(), fmt_f64(x0.p), fmt_f64(x0.p_dot), fmt_f64(x0.l), fmt_f64(x0.l_dot)];
        match run {
            Ok(traj) => {
                let name = trajectory_file(i);
                let n = output::write_trajectory_csv(&dir.join(&name), traj)?;
                manifest.record(&name, n);
                row.extend([
                    traj.samples[0].mode.code().to_string(),
                    "ok".to_string(),
                    n.to_string(),
                    termination_name(traj.termination).to_string(),
                    name,
                    String::new(),
                ]);
            }
            Err(e) => {
                failures += 1;
                row.extend(["".into(), "failed".into(), "0".into(), "".into(), "".into(), e.to_string()]);
            }
        }
        index_rows.push(row);
    }
    let header = ["id", "p", "p_dot", "l", "l_dot", "mode", "status", "rows", "termination", "file", "error"];
    manifest.record("index.csv", output::write_csv(&dir.join("index.csv"), &header, index_rows)?);

    let mut overlay: Vec<Vec<String>> = fixed_points(&cfg.params, f_l)
        .iter()
        .map(|fp| {
            let label = if fp.origin { "stationary" } else { "moving" };
            vec![fmt_f64(fp.p_star), fmt_f64(0.0), Mode::Latched.code().to_string(), label.to_string()]
        })
        .collect();
    let free = unlatched_fixed_point(&cfg.params);
    overlay.push(vec![fmt_f64(free.p_star), fmt_f64(0.0), Mode::Unlatched.code().to_string(), "unlatched".into()]);
    let n = output::write_csv(&dir.join("overlay.csv"), &["p", "p_dot", "mode", "label"], overlay)?;
    manifest.record("overlay.csv", n);

    manifest.summary = json!({ "F_L": f_l, "trajectories": starts.len(), "failed": failures });
    manifest.write(dir)?;
    Ok(manifest)
}

/// Dispatches by subcommand name.
pub fn run_command(name: &str, cfg: &RunConfig, executor: Executor) -> Result<Manifest> {
    match name {
        "simulate" => cmd_simulate(cfg, executor),
        "equilibria" => cmd_equilibria(cfg, executor),
        "classify" => cmd_classify(cfg, executor),
        "trace" => cmd_trace(cfg, executor),
        "region-map" => cmd_region_map(cfg, executor),
        "quiver" => cmd_quiver(cfg, executor),
        "design-check" => cmd_design_check(cfg, executor),
        "phase-portrait" => cmd_phase_portrait(cfg, executor),
        other => Err(Error::InvalidArgument(format!("unknown subcommand `{other}`"))),
    }
}

/// Reads a data file's row count back, for tests and tooling.
pub fn csv_row_count(path: &Path) -> Result<usize> {
    let mut reader = csv::Reader::from_path(path)?;
    Ok(reader.records().count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn config_in(dir: &Path, extra: &str) -> RunConfig {
        let text = format!("output_dir = {:?}\n{extra}", dir.display().to_string());
        parse_config(&text).unwrap()
    }

    #[test]
    fn equilibria_sweep_rows() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config_in(dir.path(), "fl_range = \"-15:0:1\"");
        let manifest = cmd_equilibria(&cfg, Executor::Sequential).unwrap();
        assert_eq!(manifest.files["fixedpoints.csv"], 16);
        assert_eq!(manifest.summary["interior"], 15);
        assert!(dir.path().join("manifest.json").exists());
    }

    #[test]
    fn portrait_grid_two_by_two() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config_in(dir.path(), "grid = \"2x2\"\nt_end = 1.0");
        let manifest = cmd_phase_portrait(&cfg, Executor::Parallel).unwrap();
        for i in 0..4 {
            assert!(dir.path().join(trajectory_file(i)).exists());
        }
        assert_eq!(manifest.files["index.csv"], 4);
        let overlay = std::fs::read_to_string(dir.path().join("overlay.csv")).unwrap();
        assert!(overlay.contains("\n0.0,0.0,L,stationary\n"));
        assert!(overlay.contains("4.6438"));
        assert!(overlay.contains("\n10.0,0.0,U,unlatched\n"));
    }

    #[test]
    fn jitter_is_seeded() {
        let dir = tempfile::tempdir().unwrap();
        let a = portrait_initial_conditions(&config_in(dir.path(), "jitter = 0.5\nseed = 7")).unwrap();
        let b = portrait_initial_conditions(&config_in(dir.path(), "jitter = 0.5\nseed = 7")).unwrap();
        let c = portrait_initial_conditions(&config_in(dir.path(), "jitter = 0.5\nseed = 8")).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn design_check_records_feasibility() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = cmd_design_check(&config_in(dir.path(), ""), Executor::Sequential).unwrap();
        assert_eq!(manifest.summary["feasible"], true);
    }
}
