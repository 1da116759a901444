use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cgtc_core::harness::artifacts::{read_relation_csv, relation_report, write_cell_bundle, write_json, write_turn_test};
use cgtc_core::harness::{run_batch, run_comparison, run_scenario, Overrides};
use cgtc_core::ship::DEFAULT_DT_S;
use cgtc_core::{build_cell_set, ship_domain_radius, CellOptions, Error, ShipParams};

const EXIT_FAILURE: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "cgtc", version, about = "Circle-grid trajectory-cell planner for surface vessels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Integration step in seconds.
    #[arg(long)]
    dt: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Circle radius in meters (default: 6 ship lengths).
    #[arg(long)]
    radius: Option<f64>,
    /// Cell heading-change resolution in degrees.
    #[arg(long)]
    resolution: Option<f64>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            dt_s: self.dt,
            radius_m: self.radius,
            resolution_deg: self.resolution,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the trajectory-cell set as a CSV bundle.
    GenCells(Common),
    /// Fit the rudder/heading-change relation to a two-column CSV.
    FitRelation {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Plan one scenario file.
    Plan {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the circle-grid planner with the grid A* baseline.
    Compare {
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Plan every scenario in a directory.
    Batch {
        dir: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Constant-rudder turning circles.
    TurnTest {
        /// Rudder angles in degrees, starboard positive.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-35,-20,-10,10,20,35")]
        rudder: Vec<f64>,
        /// Trial length in seconds.
        #[arg(long, default_value_t = 600.0)]
        duration: f64,
        #[command(flatten)]
        common: Common,
    },
}

fn error_code(e: &Error) -> u8 {
    if e.is_planning_failure() {
        EXIT_FAILURE
    } else {
        EXIT_INPUT
    }
}

fn status(ok: bool) -> u8 {
    if ok {
        0
    } else {
        EXIT_FAILURE
    }
}

// A closed pipe (`cgtc plan ... | head`) is not an error.
fn emit(text: std::fmt::Arguments) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn print_json<T: serde::Serialize>(value: &T) -> cgtc_core::Result<()> {
    emit(format_args!("{}", serde_json::to_string_pretty(value)?));
    Ok(())
}

fn gen_cells(c: &Common) -> cgtc_core::Result<u8> {
    let params = ShipParams::default();
    let radius = match c.radius {
        Some(r) => r,
        None => ship_domain_radius(&params, 6.0)?,
    };
    let opts = CellOptions {
        dt_s: c.dt.unwrap_or(DEFAULT_DT_S),
        ..CellOptions::default()
    };
    let set = build_cell_set(&params, radius, c.resolution.unwrap_or(5.0), &opts)?;
    write_cell_bundle(&set, &c.out_dir)?;
    emit(format_args!(
        "{} cells at R = {:.1} m written to {}",
        set.cells.len(),
        set.radius_m,
        c.out_dir.display()
    ));
    Ok(0)
}

fn fit_relation(input: &Path, c: &Common) -> cgtc_core::Result<u8> {
    let samples = read_relation_csv(input)?;
    let report = relation_report(&samples)?;
    std::fs::create_dir_all(&c.out_dir)?;
    write_json(&c.out_dir.join("relation_report.json"), &report)?;
    let k = &report.cubic;
    emit(format_args!("r = {:.6}", report.pearson_r));
    emit(format_args!("heading = {:.6e} d^3 + {:.6e} d^2 + {:.6} d + {:.6}", k.a, k.b, k.c, k.d));
    for d in &report.by_degree {
        emit(format_args!("degree {}: residual stddev {:.4} deg", d.degree, d.residual_stddev_deg));
    }
    Ok(0)
}

fn run(cli: Cli) -> cgtc_core::Result<u8> {
    match cli.command {
        Command::GenCells(c) => gen_cells(&c),
        Command::FitRelation { input, common } => fit_relation(&input, &common),
        Command::Plan { scenario, common } => {
            let out = run_scenario(&scenario, &common.out_dir, &common.overrides())?;
            print_json(&out.metrics)?;
            Ok(status(out.metrics.success()))
        }
        Command::Compare { scenario, common } => {
            let cmp = run_comparison(&scenario, &common.out_dir, &common.overrides())?;
            print_json(&cmp.report)?;
            Ok(status(cmp.report.circle.reached))
        }
        Command::Batch { dir, common } => {
            let entries = run_batch(&dir, &common.out_dir, &common.overrides())?;
            let mut code = 0;
            for e in &entries {
                let name = e.scenario.display();
                match &e.outcome {
                    Ok(m) if m.success() => emit(format_args!("{name}: ok")),
                    Ok(m) => {
                        emit(format_args!("{name}: failed (reached {}, safe {})", m.reached, m.safe));
                        code = code.max(EXIT_FAILURE);
                    }
                    Err(err) => {
                        emit(format_args!("{name}: error: {err}"));
                        code = code.max(error_code(err));
                    }
                }
            }
            Ok(code)
        }
        Command::TurnTest {
            rudder,
            duration,
            common,
        } => {
            let report = write_turn_test(
                &ShipParams::default(),
                &rudder,
                duration,
                common.dt.unwrap_or(DEFAULT_DT_S),
                &common.out_dir,
            )?;
            print_json(&report)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
