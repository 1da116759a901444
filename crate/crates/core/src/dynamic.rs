//! Avoidance of one moving obstacle: speed bounds for keeping course, the
//! virtual static obstacle at the track crossing, and the planning loop.

use serde::Serialize;

use crate::cell::{CellSet, ManeuverRun};
use crate::circle_grid::{compass_bearing, polar_to_world, CompassAngle, GridNode, Point};
use crate::error::{Error, Result};
use crate::ship::ShipState;
use crate::static_planner::{
    check_endpoints, choose_maneuver, reach_tolerance, select_heading_static, within, HeadingDecision,
    Obstacle, PlanOptions, PlanResult, Side, Trace,
};

/// Forward intersection of the own heading ray and the obstacle course ray.
pub fn heading_intersection(own: &GridNode, obstacle: &Obstacle) -> Result<Point> {
    let u = Point::unit(own.heading);
    let v = Point::unit(obstacle.course);
    let denom = u.cross(v);
    if denom.abs() < 1e-12 {
        return Err(Error::ParallelCourses);
    }
    let d = obstacle.center - own.position;
    let s = d.cross(v) / denom;
    let t = d.cross(u) / denom;
    if s <= 0.0 || t <= 0.0 {
        return Err(Error::NoForwardIntersection);
    }
    Ok(own.position + u * s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Encounter {
    pub own_pose: GridNode,
    pub own_speed_mps: f64,
    pub obstacle: Obstacle,
    pub meeting_point: Point,
    /// Own safety radius `R`.
    pub own_radius_m: f64,
    /// Obstacle safety radius `R_o`.
    pub obstacle_radius_m: f64,
}

impl Encounter {
    pub fn new(
        own_pose: GridNode,
        own_speed_mps: f64,
        obstacle: Obstacle,
        own_radius_m: f64,
        obstacle_radius_m: f64,
    ) -> Result<Self> {
        if !(own_speed_mps > 0.0) {
            return Err(Error::InvalidArgument("own speed must be positive".into()));
        }
        let meeting_point = heading_intersection(&own_pose, &obstacle)?;
        Ok(Self {
            own_pose,
            own_speed_mps,
            obstacle,
            meeting_point,
            own_radius_m,
            obstacle_radius_m,
        })
    }

    pub fn combined_radius_m(&self) -> f64 {
        self.own_radius_m + self.obstacle_radius_m
    }

    /// `|CM|`.
    pub fn own_range_m(&self) -> f64 {
        self.own_pose.position.distance(self.meeting_point)
    }

    /// `|OM|`.
    pub fn obstacle_range_m(&self) -> f64 {
        self.obstacle.center.distance(self.meeting_point)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EncounterClass {
    /// The obstacle is slow enough for the own ship to pass the crossing
    /// first on its present course.
    MaintainOwnFirst,
    /// The obstacle is fast enough to pass the crossing first.
    MaintainObstacleFirst,
    MustSteer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Classification {
    pub class: EncounterClass,
    /// Obstacle speed at or below which the own ship passes first.
    pub v_lo_mps: f64,
    /// Obstacle speed at or above which the obstacle passes first.
    pub v_hi_mps: f64,
    /// One of the ranges is inside the combined radius.
    pub degenerate: bool,
}

pub fn speed_bounds(enc: &Encounter) -> (f64, f64) {
    let (cm, om, sum) = (enc.own_range_m(), enc.obstacle_range_m(), enc.combined_radius_m());
    let vs = enc.own_speed_mps;
    let v_lo = vs * (om - sum) / cm;
    let v_hi = if cm > sum {
        vs * om / (cm - sum)
    } else {
        f64::INFINITY
    };
    (v_lo, v_hi)
}

pub fn classify_encounter(enc: &Encounter) -> Classification {
    let (v_lo, v_hi) = speed_bounds(enc);
    let sum = enc.combined_radius_m();
    let degenerate = enc.own_range_m() <= sum || enc.obstacle_range_m() <= sum;
    let vo = enc.obstacle.speed_mps;
    let class = if degenerate {
        EncounterClass::MustSteer
    } else if vo <= v_lo {
        EncounterClass::MaintainOwnFirst
    } else if vo >= v_hi {
        EncounterClass::MaintainObstacleFirst
    } else {
        EncounterClass::MustSteer
    };
    Classification {
        class,
        v_lo_mps: v_lo,
        v_hi_mps: v_hi,
        degenerate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VirtualObstacle {
    pub center: Point,
    pub radius_m: f64,
}

impl VirtualObstacle {
    pub fn as_obstacle(&self) -> Obstacle {
        Obstacle::fixed(self.center, self.radius_m)
    }
}

/// Positions reached when the own ship passes a virtual disc of `rx` at
/// the crossing to starboard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VirtualPass {
    /// Own run to the critical point.
    pub l_s_m: f64,
    /// Bearing from the own ship to the critical point.
    pub bearing: CompassAngle,
    pub own_point: Point,
    /// Obstacle run over the same time.
    pub l_o_m: f64,
    pub time_s: f64,
    pub obstacle_point: Point,
}

impl VirtualPass {
    pub fn separation_m(&self) -> f64 {
        self.own_point.distance(self.obstacle_point)
    }
}

pub fn virtual_pass(enc: &Encounter, rx: f64) -> Result<VirtualPass> {
    let c = enc.own_pose.position;
    let cm = enc.own_range_m();
    let r = enc.own_radius_m;
    if !(rx >= 0.0 && rx < cm) {
        return Err(Error::InvalidArgument(format!(
            "virtual radius {rx} outside [0, {cm})"
        )));
    }
    let l_s = (cm * cm - rx * rx + r * r).sqrt();
    let to_m = compass_bearing(c, enc.meeting_point)?;
    let bearing = to_m.offset((rx / cm).asin().to_degrees() + (r / l_s).asin().to_degrees());
    let own_point = polar_to_world(c, l_s, bearing);
    let time_s = l_s / enc.own_speed_mps;
    let l_o = enc.obstacle.speed_mps * time_s;
    let obstacle_point = polar_to_world(enc.obstacle.center, l_o, enc.obstacle.course);
    Ok(VirtualPass {
        l_s_m: l_s,
        bearing,
        own_point,
        l_o_m: l_o,
        time_s,
        obstacle_point,
    })
}

const RX_COARSE_STEPS: usize = 1000;
const RX_TOL_M: f64 = 0.1;

/// Smallest virtual radius whose pass keeps the combined clearance.
pub fn virtual_obstacle_radius(enc: &Encounter) -> Result<VirtualObstacle> {
    let cm = enc.own_range_m();
    let sum = enc.combined_radius_m();
    let ok = |rx: f64| -> Result<bool> { Ok(virtual_pass(enc, rx)?.separation_m() >= sum) };
    let top = cm * (1.0 - 1e-9);
    let step = top / RX_COARSE_STEPS as f64;
    let lowest = RX_TOL_M.min(step);
    if ok(lowest)? {
        return Ok(VirtualObstacle {
            center: enc.meeting_point,
            radius_m: lowest,
        });
    }
    let mut prev = lowest;
    for k in 1..=RX_COARSE_STEPS {
        let rx = (k as f64 * step).min(top);
        if ok(rx)? {
            let (mut lo, mut hi) = (prev, rx);
            while hi - lo > RX_TOL_M {
                let mid = 0.5 * (lo + hi);
                if ok(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(VirtualObstacle {
                center: enc.meeting_point,
                radius_m: hi,
            });
        }
        prev = rx;
    }
    Err(Error::NoFeasibleRadius)
}

/// Pointwise distances between two equally sampled tracks and their
/// minimum.
pub fn min_separation(own: &[ShipState], obstacle_track: &[Point]) -> Result<(Vec<f64>, f64)> {
    if own.len() != obstacle_track.len() {
        return Err(Error::LengthMismatch {
            left: own.len(),
            right: obstacle_track.len(),
        });
    }
    if own.is_empty() {
        return Err(Error::InsufficientSamples { needed: 0, got: 0 });
    }
    let series: Vec<f64> = own
        .iter()
        .zip(obstacle_track)
        .map(|(s, p)| s.position().distance(*p))
        .collect();
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((series, min))
}

/// Decision of one dynamic planning step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicDecision {
    pub class: Option<EncounterClass>,
    pub virtual_obstacle: Option<VirtualObstacle>,
    pub heading: HeadingDecision,
}

/// Heading decision for the current pose with the moving obstacle at
/// `mover`.
pub fn decide_dynamic(
    pose: &GridNode,
    own_speed_mps: f64,
    destination: Point,
    statics: &[Obstacle],
    mover: &Obstacle,
    cells: &CellSet,
) -> Result<DynamicDecision> {
    let enc = match Encounter::new(pose.clone(), own_speed_mps, *mover, cells.radius_m, mover.radius_m) {
        Ok(e) => e,
        Err(Error::ParallelCourses | Error::NoForwardIntersection) => {
            return Ok(DynamicDecision {
                class: None,
                virtual_obstacle: None,
                heading: select_heading_static(pose, destination, statics, cells)?,
            })
        }
        Err(e) => return Err(e),
    };
    let class = classify_encounter(&enc).class;
    if class != EncounterClass::MustSteer {
        return Ok(DynamicDecision {
            class: Some(class),
            virtual_obstacle: None,
            heading: select_heading_static(pose, destination, statics, cells)?,
        });
    }
    match virtual_obstacle_radius(&enc) {
        Ok(vo) => {
            let mut all = statics.to_vec();
            all.push(vo.as_obstacle());
            Ok(DynamicDecision {
                class: Some(class),
                virtual_obstacle: Some(vo),
                heading: select_heading_static(pose, destination, &all, cells)?,
            })
        }
        Err(Error::NoFeasibleRadius) => {
            let max = cells.max_heading_change_deg;
            Ok(DynamicDecision {
                class: Some(class),
                virtual_obstacle: None,
                heading: HeadingDecision {
                    desired_bearing: pose.heading.offset(max),
                    heading_change_deg: max,
                    two_step: false,
                    avoidance: Some(Side::Starboard),
                    blocking: Vec::new(),
                },
            })
        }
        Err(e) => Err(e),
    }
}

/// Plan with static discs plus at most one moving obstacle. The moving
/// obstacle keeps course and speed; separation to it must stay above the
/// sum of both safety radii.
pub fn plan_dynamic(
    start: &ShipState,
    destination: Point,
    obstacles: &[Obstacle],
    cells: &CellSet,
    opts: &PlanOptions,
) -> Result<PlanResult> {
    let movers: Vec<&Obstacle> = obstacles.iter().filter(|o| o.is_moving()).collect();
    if movers.len() > 1 {
        return Err(Error::Validation(format!(
            "{} moving obstacles given; at most one is supported",
            movers.len()
        )));
    }
    let statics: Vec<Obstacle> = obstacles.iter().filter(|o| !o.is_moving()).copied().collect();
    let Some(&mover) = movers.first().copied() else {
        return crate::static_planner::plan_static(start, destination, &statics, cells, opts);
    };
    check_endpoints(start.position(), destination, &statics)?;
    mover.validate()?;
    let sum = cells.radius_m + mover.radius_m;
    if start.position().distance(mover.center) <= sum {
        return Err(Error::Validation(
            "moving obstacle starts inside the combined safety radius".into(),
        ));
    }

    let tol = reach_tolerance(opts, cells);
    let own_speed = cells.params.steady_speed_mps;
    let safe = |run: &ManeuverRun, t0: f64| {
        run.samples.iter().zip(&run.times_s).all(|(s, t)| {
            let p = s.position();
            p.distance(mover.position_at(t0 + t)) > sum
                && statics.iter().all(|o| p.distance(o.center) > o.radius_m)
        })
    };
    let mut trace = Trace::new(*start);
    for _ in 0..opts.max_steps {
        if within(trace.state().position(), destination, tol) {
            break;
        }
        let now = Obstacle {
            center: mover.position_at(trace.time()),
            ..mover
        };
        let decision = decide_dynamic(trace.node(), own_speed, destination, &statics, &now, cells)?;
        match choose_maneuver(
            &trace.state(),
            trace.time(),
            &decision.heading,
            cells,
            destination,
            tol,
            &safe,
        )? {
            Some((delta0, run)) => trace.push(delta0, run, cells),
            None => break,
        }
    }
    let reached = within(trace.state().position(), destination, tol);
    let track: Vec<Point> = trace.times_s.iter().map(|&t| mover.position_at(t)).collect();
    let (series, _) = min_separation(&trace.trajectory, &track)?;
    let times = trace.times_s.clone();
    let mut result = trace.finish(reached, &statics);
    result.separation = times.into_iter().zip(series).collect();
    result.obstacle_track = track;
    Ok(result)
}
