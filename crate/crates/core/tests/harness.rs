use std::path::{Path, PathBuf};

use cgtc_core::harness::artifacts::read_trajectory_csv;
use cgtc_core::harness::grid::grid_search;
use cgtc_core::harness::{run_batch, run_comparison, Overrides};
use cgtc_core::*;

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn polyline_length(rows: &[ShipState]) -> f64 {
    rows.windows(2).map(|w| w[0].position().distance(w[1].position())).sum()
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for name in ["three_disc_slalom.toml", "dynamic_situation_3.toml"] {
        let path = scenarios_dir().join(name);
        run_scenario(&path, a.path(), &Overrides::default()).unwrap();
        run_scenario(&path, b.path(), &Overrides::default()).unwrap();
        let (fa, fb) = (files(a.path()), files(b.path()));
        assert!(fa.len() >= 3);
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(x.file_name(), y.file_name());
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
        }
    }
}

#[test]
fn written_trajectory_matches_reported_length() {
    let out = tempfile::tempdir().unwrap();
    let cmp = run_comparison(&scenarios_dir().join("three_disc_slalom.toml"), out.path(), &Overrides::default()).unwrap();
    for (tag, m) in [("circle", &cmp.report.circle), ("grid", &cmp.report.grid)] {
        let (times, rows) = read_trajectory_csv(&out.path().join(format!("{tag}_trajectory.csv"))).unwrap();
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        let len = polyline_length(&rows);
        assert!((len - m.path_length_m).abs() < 1e-6 * len, "{tag}: {len} vs {}", m.path_length_m);
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("comparison.json")).unwrap()).unwrap();
    let ratio = json["length_ratio"].as_f64().unwrap();
    assert!((ratio - cmp.report.circle.path_length_m / cmp.report.grid.path_length_m).abs() < 1e-12);
}

#[test]
fn off_axis_destination_grid_versus_circle() {
    let text = r#"
        mode = "free"
        [start]
        x = 0.0
        y = 0.0
        heading_deg = 0.0
        [destination]
        x = 2920.4
        y = 7050.4
        [sim]
        cell_resolution_deg = 1.0
    "#;
    let sc = Scenario::from_toml_str(text).unwrap();
    let cells = sc.build_cells().unwrap();
    let cmp = compare_planners(&sc, &cells).unwrap();
    let (c, g) = (&cmp.report.circle, &cmp.report.grid);
    assert!(c.reached && g.reached, "{c:?} {g:?}");
    // the grid path zigzags between the 0 and 45 degree lattice directions
    let grid = grid_search(
        sc.start_position(),
        CompassAngle::new(0.0),
        sc.destination_point(),
        &[],
        cells.radius_m,
    )
    .unwrap();
    let turns = grid.headings.windows(2).filter(|w| w[0] != w[1]).count();
    assert!(turns >= 1);
    assert!(c.path_length_m < g.path_length_m, "{} vs {}", c.path_length_m, g.path_length_m);
    assert!(cmp.report.length_ratio.unwrap() < 1.0);
}

#[test]
fn batch_covers_every_scenario() {
    let out = tempfile::tempdir().unwrap();
    let entries = run_batch(&scenarios_dir(), out.path(), &Overrides::default()).unwrap();
    assert_eq!(entries.len(), 6);
    for e in &entries {
        let m = e.outcome.as_ref().unwrap_or_else(|err| panic!("{}: {err}", e.scenario.display()));
        assert!(m.success(), "{}: {m:?}", e.scenario.display());
        let stem = e.scenario.file_stem().unwrap();
        assert!(out.path().join(stem).join("metrics.json").exists());
    }
    let mut r = csv::Reader::from_path(out.path().join("batch_summary.csv")).unwrap();
    assert_eq!(r.records().count(), 6);
}

#[test]
fn dynamic_situations_keep_separation() {
    for k in 1..=3 {
        let sc = Scenario::load(&scenarios_dir().join(format!("dynamic_situation_{k}.toml"))).unwrap();
        let cells = sc.build_cells().unwrap();
        let plan = cgtc_core::harness::plan_scenario(&sc, &cells).unwrap();
        let sum = cells.radius_m + sc.mover().unwrap().radius_m;
        assert!(plan.reached);
        assert!(plan.min_separation_m().unwrap() > sum);
        assert_eq!(plan.separation.len(), plan.trajectory.len());
    }
}

#[test]
fn overrides_apply_and_validate() {
    let mut sc = Scenario::load(&scenarios_dir().join("free_straight.toml")).unwrap();
    let o = Overrides {
        dt_s: Some(0.25),
        radius_m: Some(500.0),
        resolution_deg: Some(15.0),
    };
    o.apply(&mut sc).unwrap();
    assert_eq!(sc.sim.dt_s, 0.25);
    assert_eq!(sc.radius_m().unwrap(), 500.0);
    assert_eq!(sc.build_cells().unwrap().cells.len(), 13);
    let bad = Overrides {
        dt_s: Some(-1.0),
        ..Overrides::default()
    };
    assert!(bad.apply(&mut sc).is_err());
}

#[test]
fn malformed_scenarios_are_rejected() {
    let unknown = "mode = \"free\"\nwind = 3\n[start]\nx = 0.0\ny = 0.0\nheading_deg = 0.0\n[destination]\nx = 0.0\ny = 100.0\n";
    assert!(matches!(Scenario::from_toml_str(unknown), Err(Error::Parse(_))));
    assert!(matches!(Scenario::from_toml_str("mode = 3"), Err(Error::Parse(_))));
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    assert!(run_scenario(&missing, dir.path(), &Overrides::default()).is_err());
}

#[test]
fn scenario_round_trips_through_toml() {
    let sc = Scenario::load(&scenarios_dir().join("three_disc_slalom.toml")).unwrap();
    let back = Scenario::from_toml_str(&sc.to_toml_string().unwrap()).unwrap();
    assert_eq!(sc, back);
}
