//! Scenario harness: ingestion, planner dispatch, the grid baseline
//! comparison and artifact files.

pub mod artifacts;
pub mod generator;
pub mod grid;
pub mod scenario;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::cell::CellSet;
use crate::dynamic::plan_dynamic;
use crate::error::{Error, Result};
use crate::static_planner::{plan_static, PlanResult};

pub use generator::{online_generate, online_generate_schedule};
pub use grid::grid_baseline_plan;
pub use scenario::{Destination, Mode, Scenario, SimSettings, StartPose};

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub dt_s: Option<f64>,
    pub radius_m: Option<f64>,
    pub resolution_deg: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, scenario: &mut Scenario) -> Result<()> {
        if let Some(dt) = self.dt_s {
            scenario.sim.dt_s = dt;
        }
        if let Some(r) = self.radius_m {
            scenario.circle_radius_m = Some(r);
        }
        if let Some(res) = self.resolution_deg {
            scenario.sim.cell_resolution_deg = res;
        }
        scenario.validate()
    }
}

pub fn plan_scenario(scenario: &Scenario, cells: &CellSet) -> Result<PlanResult> {
    let start = scenario.start_state();
    let dest = scenario.destination_point();
    let opts = scenario.plan_options();
    match scenario.mode {
        Mode::Free | Mode::Static => plan_static(&start, dest, &scenario.obstacles, cells, &opts),
        Mode::Dynamic => plan_dynamic(&start, dest, &scenario.obstacles, cells, &opts),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub name: Option<String>,
    pub mode: Mode,
    pub reached: bool,
    pub safe: bool,
    pub path_length_m: f64,
    pub steering_count: usize,
    pub steps: usize,
    pub duration_s: f64,
    pub circle_radius_m: f64,
    pub min_clearance_m: Option<f64>,
    pub min_separation_m: Option<f64>,
    pub combined_radius_m: Option<f64>,
}

impl Metrics {
    pub fn from_plan(scenario: &Scenario, radius_m: f64, plan: &PlanResult) -> Self {
        let combined = scenario.mover().map(|o| radius_m + o.radius_m);
        let min_sep = plan.min_separation_m();
        let clear_ok = plan.min_clearance_m.is_none_or(|c| c > 0.0);
        let sep_ok = match (min_sep, combined) {
            (Some(s), Some(c)) => s > c,
            _ => true,
        };
        Self {
            name: scenario.name.clone(),
            mode: scenario.mode,
            reached: plan.reached,
            safe: clear_ok && sep_ok,
            path_length_m: plan.path_length_m,
            steering_count: plan.steering_count,
            steps: plan.rudder_commands.len(),
            duration_s: plan.times_s.last().copied().unwrap_or(0.0),
            circle_radius_m: radius_m,
            min_clearance_m: plan.min_clearance_m,
            min_separation_m: min_sep,
            combined_radius_m: combined,
        }
    }

    pub fn success(&self) -> bool {
        self.reached && self.safe
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub plan: PlanResult,
    pub metrics: Metrics,
}

/// Load, plan and write `trajectory.csv`, `commands.csv`, `metrics.json`
/// and, for dynamic scenarios, `separation.csv` into `out_dir`.
pub fn run_scenario(path: &Path, out_dir: &Path, overrides: &Overrides) -> Result<RunOutcome> {
    let mut scenario = Scenario::load(path)?;
    overrides.apply(&mut scenario)?;
    run_loaded(&scenario, out_dir)
}

pub fn run_loaded(scenario: &Scenario, out_dir: &Path) -> Result<RunOutcome> {
    let cells = scenario.build_cells()?;
    let plan = plan_scenario(scenario, &cells)?;
    let metrics = Metrics::from_plan(scenario, cells.radius_m, &plan);
    std::fs::create_dir_all(out_dir)?;
    artifacts::write_trajectory_csv(&out_dir.join("trajectory.csv"), &plan.times_s, &plan.trajectory)?;
    artifacts::write_commands_csv(&out_dir.join("commands.csv"), &plan.rudder_commands, &plan.heading_changes)?;
    if scenario.mode == Mode::Dynamic {
        artifacts::write_separation_csv(&out_dir.join("separation.csv"), &plan.separation)?;
    }
    artifacts::write_json(&out_dir.join("metrics.json"), &metrics)?;
    Ok(RunOutcome { plan, metrics })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlannerMetrics {
    pub reached: bool,
    pub path_length_m: f64,
    pub steering_count: usize,
    pub min_clearance_m: Option<f64>,
    pub error: Option<String>,
}

impl PlannerMetrics {
    fn from_result(r: &Result<PlanResult>) -> Self {
        match r {
            Ok(p) => Self {
                reached: p.reached,
                path_length_m: p.path_length_m,
                steering_count: p.steering_count,
                min_clearance_m: p.min_clearance_m,
                error: None,
            },
            Err(e) => Self {
                reached: false,
                path_length_m: 0.0,
                steering_count: 0,
                min_clearance_m: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub circle: PlannerMetrics,
    pub grid: PlannerMetrics,
    /// Circle over grid path length; both planners must have reached.
    pub length_ratio: Option<f64>,
    /// Circle over grid steering count; also undefined when the grid
    /// planner never steers.
    pub steering_ratio: Option<f64>,
}

#[derive(Debug)]
pub struct Comparison {
    pub report: ComparisonReport,
    pub circle: Result<PlanResult>,
    pub grid: Result<PlanResult>,
}

pub fn compare_planners(scenario: &Scenario, cells: &CellSet) -> Result<Comparison> {
    if scenario.mode == Mode::Dynamic {
        return Err(Error::Validation(
            "planner comparison takes free or static scenarios".into(),
        ));
    }
    let start = scenario.start_state();
    let dest = scenario.destination_point();
    let opts = scenario.plan_options();
    let circle = plan_static(&start, dest, &scenario.obstacles, cells, &opts);
    let grid = grid_baseline_plan(&start, dest, &scenario.obstacles, cells, &opts);
    let c = PlannerMetrics::from_result(&circle);
    let g = PlannerMetrics::from_result(&grid);
    let both = c.reached && g.reached;
    let length_ratio = (both && g.path_length_m > 0.0).then(|| c.path_length_m / g.path_length_m);
    let steering_ratio =
        (both && g.steering_count > 0).then(|| c.steering_count as f64 / g.steering_count as f64);
    Ok(Comparison {
        report: ComparisonReport {
            circle: c,
            grid: g,
            length_ratio,
            steering_ratio,
        },
        circle,
        grid,
    })
}

/// Compare both planners and write `comparison.json` plus each side's
/// trajectory and command files.
pub fn run_comparison(path: &Path, out_dir: &Path, overrides: &Overrides) -> Result<Comparison> {
    let mut scenario = Scenario::load(path)?;
    overrides.apply(&mut scenario)?;
    let cells = scenario.build_cells()?;
    let cmp = compare_planners(&scenario, &cells)?;
    std::fs::create_dir_all(out_dir)?;
    for (tag, side) in [("circle", &cmp.circle), ("grid", &cmp.grid)] {
        if let Ok(p) = side {
            artifacts::write_trajectory_csv(&out_dir.join(format!("{tag}_trajectory.csv")), &p.times_s, &p.trajectory)?;
            artifacts::write_commands_csv(
                &out_dir.join(format!("{tag}_commands.csv")),
                &p.rudder_commands,
                &p.heading_changes,
            )?;
        }
    }
    artifacts::write_json(&out_dir.join("comparison.json"), &cmp.report)?;
    Ok(cmp)
}

#[derive(Debug)]
pub struct BatchEntry {
    pub scenario: PathBuf,
    pub outcome: Result<Metrics>,
}

/// Run every `*.toml` scenario in `dir`, each into its own subdirectory of
/// `out_dir`, and write `batch_summary.csv`.
pub fn run_batch(dir: &Path, out_dir: &Path, overrides: &Overrides) -> Result<Vec<BatchEntry>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    let entries: Vec<BatchEntry> = files
        .par_iter()
        .map(|f| {
            let stem = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let outcome = run_scenario(f, &out_dir.join(stem), overrides).map(|o| o.metrics);
            BatchEntry {
                scenario: f.clone(),
                outcome,
            }
        })
        .collect();
    std::fs::create_dir_all(out_dir)?;
    artifacts::write_batch_summary(&out_dir.join("batch_summary.csv"), &entries)?;
    Ok(entries)
}
