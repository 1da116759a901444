//! Heading selection in free water and among static discs, and the
//! continuous-tracking planning loop built on top of it.

use serde::{Deserialize, Serialize};

use crate::cell::{path_length, run_two_stage, CellSet, ManeuverRun};
use crate::circle_grid::{compass_bearing, CompassAngle, GridNode, Point};
use crate::error::{Error, Result};
use crate::ship::ShipState;

/// Commands smaller than this (in magnitude) are trim, not steering.
pub const STEERING_THRESHOLD_DEG: f64 = 1.0;
const REACH_EPS_M: f64 = 1e-6;

/// Disc obstacle; `radius_m` already includes any safety margin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub center: Point,
    pub radius_m: f64,
    #[serde(default)]
    pub speed_mps: f64,
    #[serde(default)]
    pub course: CompassAngle,
}

impl Obstacle {
    pub fn fixed(center: Point, radius_m: f64) -> Self {
        Self {
            center,
            radius_m,
            speed_mps: 0.0,
            course: CompassAngle::NORTH,
        }
    }

    pub fn moving(center: Point, radius_m: f64, speed_mps: f64, course: CompassAngle) -> Self {
        Self {
            center,
            radius_m,
            speed_mps,
            course,
        }
    }

    pub fn is_moving(&self) -> bool {
        self.speed_mps > 0.0
    }

    pub fn velocity(&self) -> Point {
        Point::unit(self.course) * self.speed_mps
    }

    /// Center after `t_s` seconds of constant-velocity motion.
    pub fn position_at(&self, t_s: f64) -> Point {
        self.center + self.velocity() * t_s
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius_m > 0.0 && self.radius_m.is_finite()) {
            return Err(Error::Validation(format!(
                "obstacle radius must be positive, got {}",
                self.radius_m
            )));
        }
        if !(self.speed_mps >= 0.0 && self.speed_mps.is_finite()) {
            return Err(Error::Validation(format!(
                "obstacle speed must be non-negative, got {}",
                self.speed_mps
            )));
        }
        if !(self.center.x.is_finite() && self.center.y.is_finite()) {
            return Err(Error::Validation("obstacle center must be finite".into()));
        }
        Ok(())
    }
}

/// Left and right tangent bearings from `current` to the obstacle disc.
pub fn tangent_angles(current: Point, obstacle: &Obstacle) -> Result<(CompassAngle, CompassAngle)> {
    let (center, half) = cone(current, obstacle)?;
    Ok((center.offset(-half), center.offset(half)))
}

/// Bearing to the center and half-width of the tangent cone, degrees.
fn cone(current: Point, obstacle: &Obstacle) -> Result<(CompassAngle, f64)> {
    let d = current.distance(obstacle.center);
    if d <= obstacle.radius_m {
        return Err(Error::InsideObstacle {
            distance: d,
            radius: obstacle.radius_m,
        });
    }
    let bearing = compass_bearing(current, obstacle.center)?;
    Ok((bearing, (obstacle.radius_m / d).asin().to_degrees()))
}

/// Shortest distance from `p` to the segment `a`-`b`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

fn line_blocked(from: Point, to: Point, obstacle: &Obstacle) -> bool {
    segment_distance(obstacle.center, from, to) < obstacle.radius_m
}

/// An obstacle is ignored once the line to the destination clears it or it
/// lies more than 90 degrees off the bow.
pub fn is_bypassed(pose: &GridNode, obstacle: &Obstacle, destination: Point) -> bool {
    if !line_blocked(pose.position, destination, obstacle) {
        return true;
    }
    match compass_bearing(pose.position, obstacle.center) {
        Ok(b) => b.diff(pose.heading).abs() > 90.0,
        Err(_) => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Port,
    Starboard,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Port => -1.0,
            Side::Starboard => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeadingDecision {
    /// Bearing the vessel wants to steer.
    pub desired_bearing: CompassAngle,
    /// Heading change for this step, limited to the cell range.
    pub heading_change_deg: f64,
    /// The desired bearing is beyond the cell range; this is the first of
    /// two steps.
    pub two_step: bool,
    /// Side chosen to pass the blocking group, if any.
    pub avoidance: Option<Side>,
    /// Obstacles forming the blocking group.
    pub blocking: Vec<usize>,
}

fn clamp_to_cells(
    pose: &GridNode,
    desired: CompassAngle,
    cells: &CellSet,
    avoidance: Option<Side>,
    blocking: Vec<usize>,
) -> HeadingDecision {
    let change = desired.diff(pose.heading);
    let max = cells.max_heading_change_deg;
    let (heading_change_deg, two_step) = if change.abs() <= max {
        (change, false)
    } else {
        (max * change.signum(), true)
    };
    HeadingDecision {
        desired_bearing: desired,
        heading_change_deg,
        two_step,
        avoidance,
        blocking,
    }
}

pub fn select_heading_free(pose: &GridNode, destination: Point, cells: &CellSet) -> Result<HeadingDecision> {
    let bearing = compass_bearing(pose.position, destination)?;
    Ok(clamp_to_cells(pose, bearing, cells, None, Vec::new()))
}

pub fn select_heading_static(
    pose: &GridNode,
    destination: Point,
    obstacles: &[Obstacle],
    cells: &CellSet,
) -> Result<HeadingDecision> {
    let to_dest = compass_bearing(pose.position, destination)?;
    let dest_range = pose.position.distance(destination);

    // offsets of each active cone relative to the destination bearing
    let mut cones: Vec<(usize, f64, f64, bool)> = Vec::new();
    for (i, o) in obstacles.iter().enumerate() {
        let (center, half) = cone(pose.position, o)?;
        let bypassed = is_bypassed(pose, o, destination);
        // a bypassed disc ahead and short of the destination may still
        // join a blocking group through overlapping cones
        let near = pose.position.distance(o.center) - o.radius_m < dest_range;
        let ahead = center.diff(pose.heading).abs() <= 90.0;
        if bypassed && !(near && ahead) {
            continue;
        }
        let off = center.diff(to_dest);
        cones.push((i, off - half, off + half, !bypassed));
    }

    let mut group: Vec<usize> = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(i, l, h, blocks) in &cones {
        if blocks {
            group.push(i);
            lo = lo.min(l);
            hi = hi.max(h);
        }
    }
    if group.is_empty() {
        return select_heading_free(pose, destination, cells);
    }
    // absorb cones overlapping the blocked sector
    loop {
        let mut grew = false;
        for &(i, l, h, _) in &cones {
            if !group.contains(&i) && l <= hi && h >= lo {
                group.push(i);
                lo = lo.min(l);
                hi = hi.max(h);
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    group.sort_unstable();

    let (offset, side) = if hi.abs() <= lo.abs() + 1e-9 {
        (hi, Side::Starboard)
    } else {
        (lo, Side::Port)
    };
    Ok(clamp_to_cells(
        pose,
        to_dest.offset(offset),
        cells,
        Some(side),
        group,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanOptions {
    pub max_steps: usize,
    /// Distance at which the destination counts as reached; the cell
    /// radius when absent.
    pub reach_tolerance_m: Option<f64>,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            max_steps: 200,
            reach_tolerance_m: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanResult {
    pub nodes: Vec<GridNode>,
    /// World-frame trajectory of the executed maneuvers.
    pub trajectory: Vec<ShipState>,
    pub times_s: Vec<f64>,
    /// One commanded rudder angle per step.
    pub rudder_commands: Vec<f64>,
    /// Heading change actually achieved by each step.
    pub heading_changes: Vec<f64>,
    pub path_length_m: f64,
    pub steering_count: usize,
    pub reached: bool,
    /// Smallest boundary clearance over all samples and obstacles.
    pub min_clearance_m: Option<f64>,
    /// `(t, distance)` to the moving obstacle, dynamic plans only.
    pub separation: Vec<(f64, f64)>,
    pub obstacle_track: Vec<Point>,
}

impl PlanResult {
    pub fn min_separation_m(&self) -> Option<f64> {
        self.separation.iter().map(|s| s.1).min_by(f64::total_cmp)
    }
}

pub fn count_steering(commands: &[f64]) -> usize {
    commands
        .iter()
        .filter(|c| c.abs() >= STEERING_THRESHOLD_DEG)
        .count()
}

/// Smallest `distance - radius` over all samples and static obstacles.
pub fn min_clearance(samples: &[ShipState], obstacles: &[Obstacle]) -> Option<f64> {
    if obstacles.is_empty() {
        return None;
    }
    samples
        .iter()
        .flat_map(|s| {
            obstacles
                .iter()
                .map(move |o| s.position().distance(o.center) - o.radius_m)
        })
        .min_by(f64::total_cmp)
}

/// Fly the cell nearest to a requested heading change from the current
/// state out to the circle around it. Returns the relation's rudder command
/// for the request together with the run.
pub(crate) fn advance(state: &ShipState, heading_change_deg: f64, cells: &CellSet) -> Result<(f64, ManeuverRun)> {
    let run = run_two_stage(
        state,
        &cells.params,
        cells.cell_for(heading_change_deg).delta0_deg,
        state.position(),
        cells.radius_m,
        cells.hold_s(),
        cells.options.dt_s,
    )?;
    Ok((cells.rudder_for(heading_change_deg), run))
}

/// Requested change first (flown as its nearest cell), then the other
/// cells: preferred side first, closest first within a side.
pub(crate) fn candidate_changes(decision: &HeadingDecision, cells: &CellSet) -> Vec<f64> {
    let d = decision.heading_change_deg;
    let side = decision.avoidance.map(Side::sign);
    let nearest = cells.nearest_index(d);
    let mut rest: Vec<f64> = cells
        .cells
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != nearest)
        .map(|(_, c)| c.heading_change_deg)
        .collect();
    rest.sort_by(|a, b| {
        let key = |c: f64| {
            let wrong = match side {
                Some(s) => ((c - d) * s < 0.0) as u8,
                None => 0,
            };
            (wrong, (c - d).abs(), -(c - d).signum())
        };
        let (ka, kb) = (key(*a), key(*b));
        ka.0.cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(ka.2.total_cmp(&kb.2))
    });
    let mut out = vec![d];
    out.extend(rest);
    out
}

/// State shared by the planning loops.
pub(crate) struct Trace {
    pub nodes: Vec<GridNode>,
    pub trajectory: Vec<ShipState>,
    pub times_s: Vec<f64>,
    pub rudder_commands: Vec<f64>,
    pub heading_changes: Vec<f64>,
}

impl Trace {
    pub fn new(start: ShipState) -> Self {
        Self {
            nodes: vec![GridNode::root(start.position(), start.heading())],
            trajectory: vec![start],
            times_s: vec![0.0],
            rudder_commands: Vec::new(),
            heading_changes: Vec::new(),
        }
    }

    pub fn state(&self) -> ShipState {
        *self.trajectory.last().expect("trace is never empty")
    }

    pub fn node(&self) -> &GridNode {
        self.nodes.last().expect("trace is never empty")
    }

    pub fn time(&self) -> f64 {
        *self.times_s.last().expect("trace is never empty")
    }

    pub fn push(&mut self, delta0: f64, run: ManeuverRun, cells: &CellSet) {
        let t0 = self.time();
        let end = *run.samples.last().expect("run has samples");
        let parent = self.nodes.len() - 1;
        let child = self.node().child(
            parent,
            end.position(),
            end.heading(),
            Some(cells.nearest_index(run.heading_change_deg)),
        );
        self.nodes.push(child);
        self.trajectory.extend(run.samples.iter().skip(1));
        self.times_s.extend(run.times_s.iter().skip(1).map(|t| t0 + t));
        self.rudder_commands.push(delta0);
        self.heading_changes.push(run.heading_change_deg);
    }

    pub fn finish(self, reached: bool, obstacles: &[Obstacle]) -> PlanResult {
        PlanResult {
            path_length_m: path_length(&self.trajectory),
            steering_count: count_steering(&self.rudder_commands),
            min_clearance_m: min_clearance(&self.trajectory, obstacles),
            nodes: self.nodes,
            trajectory: self.trajectory,
            times_s: self.times_s,
            rudder_commands: self.rudder_commands,
            heading_changes: self.heading_changes,
            reached,
            separation: Vec::new(),
            obstacle_track: Vec::new(),
        }
    }
}

pub(crate) fn reach_tolerance(opts: &PlanOptions, cells: &CellSet) -> f64 {
    opts.reach_tolerance_m.unwrap_or(cells.radius_m)
}

pub(crate) fn within(p: Point, destination: Point, tol: f64) -> bool {
    p.distance(destination) < tol - REACH_EPS_M
}

fn clear_of(samples: &[ShipState], obstacles: &[Obstacle]) -> bool {
    samples.iter().all(|s| {
        obstacles
            .iter()
            .all(|o| s.position().distance(o.center) > o.radius_m)
    })
}

pub(crate) fn check_endpoints(start: Point, destination: Point, obstacles: &[Obstacle]) -> Result<()> {
    for (i, o) in obstacles.iter().enumerate() {
        o.validate()?;
        if start.distance(o.center) <= o.radius_m {
            return Err(Error::StartInsideObstacle(i));
        }
        if destination.distance(o.center) <= o.radius_m {
            return Err(Error::DestinationInsideObstacle(i));
        }
    }
    Ok(())
}

/// Pick the first candidate whose run is safe and leaves a safe way out:
/// straight on or a full turn to either side.
pub(crate) fn choose_maneuver(
    state: &ShipState,
    t0: f64,
    decision: &HeadingDecision,
    cells: &CellSet,
    destination: Point,
    tol: f64,
    safe: &dyn Fn(&ManeuverRun, f64) -> bool,
) -> Result<Option<(f64, ManeuverRun)>> {
    let max = cells.max_heading_change_deg;
    for change in candidate_changes(decision, cells) {
        let (delta0, run) = advance(state, change, cells)?;
        if !run.crossed || !safe(&run, t0) {
            continue;
        }
        let end = *run.samples.last().expect("run has samples");
        if within(end.position(), destination, tol) {
            return Ok(Some((delta0, run)));
        }
        let t1 = t0 + run.times_s.last().copied().unwrap_or(0.0);
        for escape in [0.0, max, -max] {
            let (_, next) = advance(&end, escape, cells)?;
            if next.crossed && safe(&next, t1) {
                return Ok(Some((delta0, run)));
            }
        }
    }
    Ok(None)
}

/// Plan among static discs from `start` to `destination`. With no
/// obstacles this is the free-water planner.
pub fn plan_static(
    start: &ShipState,
    destination: Point,
    obstacles: &[Obstacle],
    cells: &CellSet,
    opts: &PlanOptions,
) -> Result<PlanResult> {
    check_endpoints(start.position(), destination, obstacles)?;
    let tol = reach_tolerance(opts, cells);
    let safe = |run: &ManeuverRun, _t0: f64| clear_of(&run.samples, obstacles);
    let mut trace = Trace::new(*start);
    for _ in 0..opts.max_steps {
        if within(trace.state().position(), destination, tol) {
            break;
        }
        let decision = select_heading_static(trace.node(), destination, obstacles, cells)?;
        match choose_maneuver(&trace.state(), trace.time(), &decision, cells, destination, tol, &safe)? {
            Some((delta0, run)) => trace.push(delta0, run, cells),
            None => break,
        }
    }
    let reached = within(trace.state().position(), destination, tol);
    Ok(trace.finish(reached, obstacles))
}
