//! CSV and JSON artifact files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::cell::CellSet;
use crate::error::{Error, Result};
use crate::harness::BatchEntry;
use crate::relation::{fit_poly, pearson, CubicRelation, RelationSample};
use crate::ship::{summarize_turn, ShipState, TurnSummary};

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::Writer::from_path(path)?)
}

pub fn write_trajectory_csv(path: &Path, times_s: &[f64], samples: &[ShipState]) -> Result<()> {
    if times_s.len() != samples.len() {
        return Err(Error::LengthMismatch {
            left: times_s.len(),
            right: samples.len(),
        });
    }
    let mut w = writer(path)?;
    w.write_record([
        "t_s",
        "x_m",
        "y_m",
        "heading_deg",
        "u_mps",
        "v_mps",
        "yaw_rate_degps",
        "rudder_deg",
    ])?;
    for (t, s) in times_s.iter().zip(samples) {
        w.write_record(
            [t, &s.x_m, &s.y_m, &s.heading_deg, &s.u_mps, &s.v_mps, &s.yaw_rate_degps, &s.rudder_deg]
                .map(|v| v.to_string()),
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Read back a trajectory file as `(t, state)` rows.
pub fn read_trajectory_csv(path: &Path) -> Result<(Vec<f64>, Vec<ShipState>)> {
    let mut r = csv::Reader::from_path(path)?;
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let v: Vec<f64> = rec
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| Error::Parse(format!("{}: {e}", path.display()))))
            .collect::<Result<_>>()?;
        if v.len() != 8 {
            return Err(Error::Parse(format!(
                "{}: expected 8 columns, got {}",
                path.display(),
                v.len()
            )));
        }
        times.push(v[0]);
        samples.push(ShipState {
            x_m: v[1],
            y_m: v[2],
            heading_deg: v[3],
            u_mps: v[4],
            v_mps: v[5],
            yaw_rate_degps: v[6],
            rudder_deg: v[7],
        });
    }
    Ok((times, samples))
}

pub fn write_commands_csv(path: &Path, commands: &[f64], heading_changes: &[f64]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["step", "delta0_deg", "heading_change_deg"])?;
    for (i, (d, h)) in commands.iter().zip(heading_changes).enumerate() {
        w.write_record([i.to_string(), d.to_string(), h.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_separation_csv(path: &Path, separation: &[(f64, f64)]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "distance_m"])?;
    for (t, d) in separation {
        w.write_record([t.to_string(), d.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// One CSV per cell plus `index.csv`.
pub fn write_cell_bundle(cells: &CellSet, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut index = writer(&out_dir.join("index.csv"))?;
    index.write_record([
        "heading_change_deg",
        "delta0_deg",
        "duration_s",
        "arc_length_m",
        "file",
    ])?;
    for (i, cell) in cells.cells.iter().enumerate() {
        let name = format!("cell_{i:03}.csv");
        let mut w = writer(&out_dir.join(&name))?;
        w.write_record(["t", "x", "y", "heading", "u", "v", "rudder"])?;
        for (t, s) in cell.times_s.iter().zip(&cell.samples) {
            w.write_record(
                [t, &s.x_m, &s.y_m, &s.heading_deg, &s.u_mps, &s.v_mps, &s.rudder_deg].map(|v| v.to_string()),
            )?;
        }
        w.flush()?;
        index.write_record([
            cell.heading_change_deg.to_string(),
            cell.delta0_deg.to_string(),
            cell.duration_s.to_string(),
            cell.arc_length_m.to_string(),
            name,
        ])?;
    }
    index.flush()?;
    Ok(())
}

/// Two numeric columns (rudder, heading change); a header row is allowed.
pub fn read_relation_csv(path: &Path) -> Result<Vec<RelationSample>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Parse(format!(
                "{} line {}: expected 2 columns, got {}",
                path.display(),
                line + 1,
                rec.len()
            )));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(d), Ok(h)) => out.push(RelationSample::new(d, h)),
            _ if line == 0 => continue,
            _ => {
                return Err(Error::Parse(format!(
                    "{} line {}: non-numeric value",
                    path.display(),
                    line + 1
                )))
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeResidual {
    pub degree: usize,
    pub residual_stddev_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleResidual {
    pub rudder_deg: f64,
    pub heading_change_deg: f64,
    pub fitted_deg: f64,
    pub residual_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub samples: usize,
    pub pearson_r: f64,
    pub cubic: CubicRelation,
    pub by_degree: Vec<DegreeResidual>,
    pub residuals: Vec<SampleResidual>,
}

pub const REPORT_MAX_DEGREE: usize = 5;

pub fn relation_report(samples: &[RelationSample]) -> Result<RelationReport> {
    let xs: Vec<f64> = samples.iter().map(|s| s.rudder_deg).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.heading_change_deg).collect();
    let pearson_r = pearson(&xs, &ys)?;
    let (cubic, _) = CubicRelation::fit(samples)?;
    let top = REPORT_MAX_DEGREE.min(samples.len().saturating_sub(1));
    let by_degree = (1..=top)
        .map(|d| {
            fit_poly(samples, d).map(|f| DegreeResidual {
                degree: d,
                residual_stddev_deg: f.residual_stddev,
            })
        })
        .collect::<Result<_>>()?;
    let residuals = samples
        .iter()
        .map(|s| {
            let fitted = cubic.heading_change(s.rudder_deg);
            SampleResidual {
                rudder_deg: s.rudder_deg,
                heading_change_deg: s.heading_change_deg,
                fitted_deg: fitted,
                residual_deg: s.heading_change_deg - fitted,
            }
        })
        .collect();
    Ok(RelationReport {
        samples: samples.len(),
        pearson_r,
        cubic,
        by_degree,
        residuals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurnTestReport {
    pub duration_s: f64,
    pub dt_s: f64,
    pub turns: Vec<TurnSummary>,
}

/// Turning trials at each rudder angle; `turn_<i>.csv` per trial and
/// `turn_summary.json`.
pub fn write_turn_test(
    params: &crate::ship::ShipParams,
    rudders_deg: &[f64],
    duration_s: f64,
    dt: f64,
    out_dir: &Path,
) -> Result<TurnTestReport> {
    std::fs::create_dir_all(out_dir)?;
    let mut turns = Vec::new();
    for (i, &rudder) in rudders_deg.iter().enumerate() {
        let run = crate::ship::simulate_turn(params, rudder, duration_s, dt)?;
        let times: Vec<f64> = (0..run.len()).map(|k| k as f64 * dt).collect();
        write_trajectory_csv(&out_dir.join(format!("turn_{i}.csv")), &times, &run)?;
        let summary = summarize_turn(&run, rudder).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "rudder {rudder} deg does not complete a full circle in {duration_s} s"
            ))
        })?;
        turns.push(summary);
    }
    let report = TurnTestReport {
        duration_s,
        dt_s: dt,
        turns,
    };
    write_json(&out_dir.join("turn_summary.json"), &report)?;
    Ok(report)
}

pub fn write_batch_summary(path: &Path, entries: &[BatchEntry]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "scenario",
        "status",
        "reached",
        "safe",
        "path_length_m",
        "steering_count",
        "min_clearance_m",
        "min_separation_m",
        "error",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for e in entries {
        let name = e
            .scenario
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        match &e.outcome {
            Ok(m) => w.write_record([
                name,
                if m.success() { "ok" } else { "failed" }.to_string(),
                m.reached.to_string(),
                m.safe.to_string(),
                m.path_length_m.to_string(),
                m.steering_count.to_string(),
                opt(m.min_clearance_m),
                opt(m.min_separation_m),
                String::new(),
            ])?,
            Err(err) => w.write_record([
                name,
                "error".to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                err.to_string(),
            ])?,
        }
    }
    w.flush()?;
    Ok(())
}
