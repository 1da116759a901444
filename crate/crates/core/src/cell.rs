//! Standardized trajectory cells.
//!
//! A cell is a two-stage rudder maneuver started from the trimmed state:
//! posture adjustment holds the commanded rudder `delta0` for a fixed
//! fraction of the straight-run time to the circle, then posture
//! stabilization returns the rudder to zero and holds it there until the
//! track crosses the circle of radius `R`. The commanded rudder is solved
//! so the heading change at the crossing matches the requested value.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle_grid::{wrap_signed_deg, CompassAngle, Point};
use crate::error::{Error, Result};
use crate::relation::{CubicRelation, PolyFit, RelationSample};
use crate::ship::{step, ShipParams, ShipState, DEFAULT_DT_S};

/// Rule 1 speed slack as a fraction of `u0`.
pub const SPEED_SLACK: f64 = 1e-3;
/// Rule 3 slack as a fraction of `R`.
pub const RADIUS_SLACK: f64 = 5e-3;
const RUDDER_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellOptions {
    pub dt_s: f64,
    /// Rudder hold duration as a fraction of `R / u0`.
    pub hold_fraction: f64,
    pub max_heading_change_deg: f64,
    pub heading_tolerance_deg: f64,
}

impl Default for CellOptions {
    fn default() -> Self {
        Self {
            dt_s: DEFAULT_DT_S,
            hold_fraction: 0.5,
            max_heading_change_deg: 90.0,
            heading_tolerance_deg: 0.2,
        }
    }
}

impl CellOptions {
    pub fn hold_s(&self, params: &ShipParams, radius_m: f64) -> f64 {
        self.hold_fraction * radius_m / params.steady_speed_mps
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt_s > 0.0) {
            return Err(Error::NonPositiveDt(self.dt_s));
        }
        if !(self.hold_fraction > 0.0 && self.hold_fraction < 1.0) {
            return Err(Error::InvalidArgument("hold_fraction must lie in (0, 1)".into()));
        }
        if !(self.max_heading_change_deg > 0.0 && self.max_heading_change_deg < 180.0) {
            return Err(Error::InvalidArgument(
                "max_heading_change_deg must lie in (0, 180)".into(),
            ));
        }
        Ok(())
    }
}

/// Output of one two-stage maneuver run up to a circle crossing.
#[derive(Debug, Clone, PartialEq)]
pub struct ManeuverRun {
    pub samples: Vec<ShipState>,
    /// Seconds since the first sample.
    pub times_s: Vec<f64>,
    /// Rudder command in force from each sample onward.
    pub commands_deg: Vec<f64>,
    /// Unwrapped heading change from the first to the last sample.
    pub heading_change_deg: f64,
    pub crossed: bool,
}

/// Run the two-stage maneuver from `start` until the track leaves the
/// circle of `radius_m` around `center`. The final sample is interpolated
/// onto the circle.
pub fn run_two_stage(
    start: &ShipState,
    params: &ShipParams,
    delta0_deg: f64,
    center: Point,
    radius_m: f64,
    hold_s: f64,
    dt: f64,
) -> Result<ManeuverRun> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt(dt));
    }
    let budget_s = hold_s + 20.0 * radius_m / params.steady_speed_mps + 60.0;
    let max_steps = (budget_s / dt).ceil() as usize;

    let mut samples = vec![*start];
    let mut times_s = vec![0.0];
    let mut commands_deg = Vec::new();
    let mut turned = 0.0;
    let mut cur = *start;
    let mut dist = center.distance(cur.position());

    for k in 0..max_steps {
        let t = k as f64 * dt;
        let command = if t < hold_s - 1e-9 { delta0_deg } else { 0.0 };
        let next = step(&cur, params, command, dt)?.state;
        let dturn = wrap_signed_deg(next.heading_deg - cur.heading_deg);
        let next_dist = center.distance(next.position());
        commands_deg.push(command);
        if next_dist >= radius_m {
            let f = if next_dist > dist {
                ((radius_m - dist) / (next_dist - dist)).clamp(0.0, 1.0)
            } else {
                1.0
            };
            samples.push(cur.lerp(&next, f));
            times_s.push(t + f * dt);
            commands_deg.push(0.0);
            return Ok(ManeuverRun {
                samples,
                times_s,
                commands_deg,
                heading_change_deg: turned + f * dturn,
                crossed: true,
            });
        }
        turned += dturn;
        cur = next;
        dist = next_dist;
        samples.push(cur);
        times_s.push(t + dt);
    }
    commands_deg.push(0.0);
    Ok(ManeuverRun {
        samples,
        times_s,
        commands_deg,
        heading_change_deg: turned,
        crossed: false,
    })
}

/// One standardized maneuver, in the ship frame (start at the origin,
/// heading north).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryCell {
    pub samples: Vec<ShipState>,
    pub times_s: Vec<f64>,
    pub commands_deg: Vec<f64>,
    pub delta0_deg: f64,
    pub heading_change_deg: f64,
    pub end_offset: Point,
    /// Signed bearing of the end point from the origin, in `(-180, 180]`.
    pub central_angle_deg: f64,
    pub arc_length_m: f64,
    pub duration_s: f64,
    pub radius_m: f64,
}

impl TrajectoryCell {
    fn from_run(run: ManeuverRun, delta0_deg: f64, radius_m: f64) -> Self {
        let end = run.samples.last().copied().unwrap_or_else(|| run.samples[0]);
        let end_offset = end.position();
        let central_angle_deg = if end_offset.norm() > 0.0 {
            end_offset.x.atan2(end_offset.y).to_degrees()
        } else {
            0.0
        };
        let arc_length_m = path_length(&run.samples);
        let duration_s = *run.times_s.last().unwrap_or(&0.0);
        Self {
            samples: run.samples,
            times_s: run.times_s,
            commands_deg: run.commands_deg,
            delta0_deg,
            heading_change_deg: run.heading_change_deg,
            end_offset,
            central_angle_deg,
            arc_length_m,
            duration_s,
            radius_m,
        }
    }

    /// Samples placed at a world pose.
    pub fn placed(&self, origin: Point, heading: CompassAngle) -> Vec<ShipState> {
        self.samples.iter().map(|s| s.transformed(origin, heading)).collect()
    }

    pub fn end_state(&self) -> ShipState {
        *self.samples.last().expect("cell has samples")
    }
}

/// Summed sample-to-sample distance.
pub fn path_length(samples: &[ShipState]) -> f64 {
    samples
        .windows(2)
        .map(|w| w[0].position().distance(w[1].position()))
        .sum()
}

fn cell_run(params: &ShipParams, delta0: f64, radius_m: f64, opts: &CellOptions) -> Result<ManeuverRun> {
    let start = ShipState::trimmed(params, Point::ORIGIN, CompassAngle::NORTH);
    run_two_stage(
        &start,
        params,
        delta0,
        Point::ORIGIN,
        radius_m,
        opts.hold_s(params, radius_m),
        opts.dt_s,
    )
}

/// Heading change at the circle crossing for a given commanded rudder.
pub fn heading_change_for_rudder(
    params: &ShipParams,
    delta0_deg: f64,
    radius_m: f64,
    opts: &CellOptions,
) -> Result<Option<f64>> {
    let run = cell_run(params, delta0_deg, radius_m, opts)?;
    Ok(run.crossed.then_some(run.heading_change_deg))
}

pub fn generate_cell(
    params: &ShipParams,
    target_heading_change_deg: f64,
    radius_m: f64,
    opts: &CellOptions,
) -> Result<TrajectoryCell> {
    params.validate()?;
    opts.validate()?;
    let target = target_heading_change_deg;
    if !(target.abs() <= opts.max_heading_change_deg + 1e-9) {
        return Err(Error::InvalidArgument(format!(
            "heading change {target} exceeds the maximum {}",
            opts.max_heading_change_deg
        )));
    }
    if !(radius_m >= 2.0 * params.length_m) {
        return Err(Error::InvalidArgument(format!(
            "cell radius {radius_m} m is below two ship lengths"
        )));
    }
    let unreachable = |reason: &str| Error::Unreachable {
        target_deg: target,
        reason: reason.to_string(),
    };

    let delta0 = if target == 0.0 {
        0.0
    } else {
        let sign = target.signum();
        let limit = if sign > 0.0 {
            params.rudder_limit_stbd_deg
        } else {
            -params.rudder_limit_port_deg
        };
        let reach = |mag: f64| -> Result<Option<f64>> {
            Ok(heading_change_for_rudder(params, sign * mag, radius_m, opts)?.map(|h| sign * h))
        };
        match reach(limit)? {
            Some(h) if h >= target.abs() => {}
            Some(h) => {
                return Err(unreachable(&format!(
                    "full rudder turns only {h:.2} deg before the circle"
                )))
            }
            None => return Err(unreachable("track never leaves the circle")),
        }
        let (mut lo, mut hi) = (0.0, limit);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            let h = reach(mid)?.ok_or_else(|| unreachable("track never leaves the circle"))?;
            if (h - target.abs()).abs() < 1e-7 || hi - lo < 1e-10 {
                lo = mid;
                hi = mid;
                break;
            }
            if h < target.abs() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        sign * 0.5 * (lo + hi)
    };

    let run = cell_run(params, delta0, radius_m, opts)?;
    if !run.crossed {
        return Err(unreachable("track never leaves the circle"));
    }
    if (run.heading_change_deg - target).abs() > opts.heading_tolerance_deg {
        return Err(Error::NonConvergence { target_deg: target });
    }
    let cell = TrajectoryCell::from_run(run, delta0, radius_m);
    let report = validate_rules(&cell, params);
    if !report.rule1 {
        return Err(unreachable(
            "motion has not stabilized when the track reaches the circle",
        ));
    }
    if !report.rule3 {
        return Err(unreachable("end point is off the circle"));
    }
    Ok(cell)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuleReport {
    /// Rudder zero and speed at `u0` at both ends.
    pub rule1: bool,
    /// At most one steering plateau.
    pub rule2: bool,
    /// End point on the circle.
    pub rule3: bool,
    pub start_rudder_deg: f64,
    pub end_rudder_deg: f64,
    /// Largest `|u - u0| / u0` over the two ends.
    pub speed_error_frac: f64,
    pub steering_plateaus: usize,
    /// `|end distance - R| / R`.
    pub radius_error_frac: f64,
}

/// Number of maximal runs of constant nonzero rudder command.
pub fn count_plateaus(commands_deg: &[f64]) -> usize {
    let mut count = 0;
    let mut prev = 0.0;
    for &c in commands_deg {
        if c != 0.0 && c != prev {
            count += 1;
        }
        prev = c;
    }
    count
}

pub fn validate_rules(cell: &TrajectoryCell, params: &ShipParams) -> RuleReport {
    let u0 = params.steady_speed_mps;
    let (first, last) = match (cell.samples.first(), cell.samples.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => {
            return RuleReport {
                rule1: false,
                rule2: false,
                rule3: false,
                start_rudder_deg: f64::NAN,
                end_rudder_deg: f64::NAN,
                speed_error_frac: f64::NAN,
                steering_plateaus: 0,
                radius_error_frac: f64::NAN,
            }
        }
    };
    let speed_error_frac = ((first.u_mps - u0).abs()).max((last.u_mps - u0).abs()) / u0;
    let rule1 = first.rudder_deg.abs() < RUDDER_ZERO_TOL
        && last.rudder_deg.abs() < RUDDER_ZERO_TOL
        && speed_error_frac < SPEED_SLACK;
    let steering_plateaus = count_plateaus(&cell.commands_deg);
    let end_distance = first.position().distance(last.position());
    let radius_error_frac = (end_distance - cell.radius_m).abs() / cell.radius_m;
    RuleReport {
        rule1,
        rule2: steering_plateaus <= 1,
        rule3: radius_error_frac < RADIUS_SLACK,
        start_rudder_deg: first.rudder_deg,
        end_rudder_deg: last.rudder_deg,
        speed_error_frac,
        steering_plateaus,
        radius_error_frac,
    }
}

/// Concatenate `second` after `first`, with `second` moved to start at the
/// end pose of `first`. The duplicated junction sample is dropped.
pub fn splice(first: &TrajectoryCell, second: &TrajectoryCell) -> Vec<ShipState> {
    let end = first.end_state();
    let mut out = first.samples.clone();
    out.extend(
        second
            .placed(end.position(), end.heading())
            .into_iter()
            .skip(1),
    );
    out
}

/// The full family of cells for one circle radius, plus the fitted
/// rudder/heading relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSet {
    pub radius_m: f64,
    pub resolution_deg: f64,
    pub max_heading_change_deg: f64,
    /// Sorted by increasing heading change.
    pub cells: Vec<TrajectoryCell>,
    pub relation: CubicRelation,
    pub relation_fit: PolyFit,
    pub params: ShipParams,
    pub options: CellOptions,
}

impl CellSet {
    pub fn pairs(&self) -> Vec<RelationSample> {
        self.cells
            .iter()
            .map(|c| RelationSample::new(c.delta0_deg, c.heading_change_deg))
            .collect()
    }

    pub fn hold_s(&self) -> f64 {
        self.options.hold_s(&self.params, self.radius_m)
    }

    /// Index of the cell whose heading change is closest to the request.
    pub fn nearest_index(&self, heading_change_deg: f64) -> usize {
        self.cells
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let da = (a.heading_change_deg - heading_change_deg).abs();
                let db = (b.heading_change_deg - heading_change_deg).abs();
                da.total_cmp(&db)
            })
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    pub fn straight_index(&self) -> usize {
        self.nearest_index(0.0)
    }

    /// Rudder command for a heading change, from the fitted relation.
    pub fn rudder_for(&self, heading_change_deg: f64) -> f64 {
        self.relation.invert_clamped(heading_change_deg)
    }

    /// Cell whose geometry is flown for a requested heading change.
    pub fn cell_for(&self, heading_change_deg: f64) -> &TrajectoryCell {
        &self.cells[self.nearest_index(heading_change_deg)]
    }
}

pub fn build_cell_set(
    params: &ShipParams,
    radius_m: f64,
    resolution_deg: f64,
    opts: &CellOptions,
) -> Result<CellSet> {
    params.validate()?;
    opts.validate()?;
    if !(1.0..=15.0).contains(&resolution_deg) {
        return Err(Error::InvalidArgument(format!(
            "resolution {resolution_deg} deg outside [1, 15]"
        )));
    }
    let per_side = opts.max_heading_change_deg / resolution_deg;
    if (per_side - per_side.round()).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "resolution {resolution_deg} deg does not divide {} deg",
            opts.max_heading_change_deg
        )));
    }
    let n = per_side.round() as i64;
    let targets: Vec<f64> = (-n..=n).map(|k| k as f64 * resolution_deg).collect();
    let cells = targets
        .par_iter()
        .map(|&t| {
            generate_cell(params, t, radius_m, opts).map_err(|e| Error::Cell {
                target_deg: t,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<RelationSample> = cells
        .iter()
        .map(|c| RelationSample::new(c.delta0_deg, c.heading_change_deg))
        .collect();
    let (relation, relation_fit) = CubicRelation::fit(&pairs)?;
    Ok(CellSet {
        radius_m,
        resolution_deg,
        max_heading_change_deg: opts.max_heading_change_deg,
        cells,
        relation,
        relation_fit,
        params: *params,
        options: *opts,
    })
}
