//! Square-grid baseline: 8-connected A* with pitch equal to the circle
//! radius, then the polyline is sailed with headings restricted to
//! multiples of 45 degrees.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::cell::{path_length, CellSet};
use crate::circle_grid::{CompassAngle, GridNode, Point};
use crate::error::{Error, Result};
use crate::harness::generator::online_generate_schedule;
use crate::ship::{step, ShipState};
use crate::static_planner::{
    check_endpoints, count_steering, min_clearance, reach_tolerance, segment_distance, within,
    Obstacle, PlanOptions, PlanResult,
};

/// Extra clearance, as a fraction of the pitch, kept between grid edges
/// and obstacle discs.
pub const GRID_MARGIN_FRACTION: f64 = 0.5;
const SEARCH_PAD_CELLS: i64 = 4;
const MAX_EXPANSIONS: usize = 1_000_000;

type Cell = (i64, i64);

const MOVES: [(i64, i64, f64); 8] = [
    (0, 1, 0.0),
    (1, 1, 45.0),
    (1, 0, 90.0),
    (1, -1, 135.0),
    (0, -1, 180.0),
    (-1, -1, 225.0),
    (-1, 0, 270.0),
    (-1, 1, 315.0),
];

/// Search state: grid cell and index of the incoming move (8 = start).
type State = (i64, i64, usize);

#[derive(Debug, Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    turn: f64,
    seq: u64,
    state: State,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .f
            .total_cmp(&self.f)
            .then(other.turn.total_cmp(&self.turn))
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Grid path as a list of vertices and the heading of each move.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub vertices: Vec<Point>,
    pub headings: Vec<CompassAngle>,
}

/// Shortest 8-connected path; among equally short paths the one with the
/// least accumulated heading change wins.
pub fn grid_search(
    start: Point,
    start_heading: CompassAngle,
    destination: Point,
    obstacles: &[Obstacle],
    pitch: f64,
) -> Result<GridPath> {
    let margin = GRID_MARGIN_FRACTION * pitch;
    let at = |i: i64, j: i64| start + Point::new(i as f64 * pitch, j as f64 * pitch);
    let rel = destination - start;
    let goal: Cell = ((rel.x / pitch).round() as i64, (rel.y / pitch).round() as i64);

    let (mut lo, mut hi) = ((0i64.min(goal.0), 0i64.min(goal.1)), (0i64.max(goal.0), 0i64.max(goal.1)));
    for o in obstacles {
        let c = o.center - start;
        let span = ((o.radius_m + margin) / pitch).ceil() as i64;
        lo.0 = lo.0.min((c.x / pitch).floor() as i64 - span);
        lo.1 = lo.1.min((c.y / pitch).floor() as i64 - span);
        hi.0 = hi.0.max((c.x / pitch).ceil() as i64 + span);
        hi.1 = hi.1.max((c.y / pitch).ceil() as i64 + span);
    }
    let (lo, hi) = (
        (lo.0 - SEARCH_PAD_CELLS, lo.1 - SEARCH_PAD_CELLS),
        (hi.0 + SEARCH_PAD_CELLS, hi.1 + SEARCH_PAD_CELLS),
    );

    let node_free = |i: i64, j: i64| {
        (i, j) == (0, 0)
            || (i, j) == goal
            || obstacles
                .iter()
                .all(|o| at(i, j).distance(o.center) > o.radius_m + margin)
    };
    let edge_free = |a: Point, b: Point| {
        obstacles
            .iter()
            .all(|o| segment_distance(o.center, a, b) > o.radius_m + margin)
    };
    let h = |i: i64, j: i64| at(i, j).distance(at(goal.0, goal.1));
    let heading_of = |d: usize| {
        if d < MOVES.len() {
            CompassAngle::new(MOVES[d].2)
        } else {
            start_heading
        }
    };

    // (length, accumulated turn)
    let mut g: HashMap<State, (f64, f64)> = HashMap::new();
    let mut parent: HashMap<State, State> = HashMap::new();
    let mut closed: HashSet<State> = HashSet::new();
    let mut open = BinaryHeap::new();
    let mut seq = 0u64;
    let root: State = (0, 0, MOVES.len());
    g.insert(root, (0.0, 0.0));
    open.push(Open {
        f: h(0, 0),
        turn: 0.0,
        seq,
        state: root,
    });

    let mut found = None;
    while let Some(Open { state, .. }) = open.pop() {
        if !closed.insert(state) {
            continue;
        }
        let (i, j, d) = state;
        if (i, j) == goal {
            found = Some(state);
            break;
        }
        if closed.len() > MAX_EXPANSIONS {
            return Err(Error::NoGridPath);
        }
        let (len, turned) = g[&state];
        let heading_in = heading_of(d);
        for (k, &(di, dj, hd)) in MOVES.iter().enumerate() {
            let (ni, nj) = (i + di, j + dj);
            if ni < lo.0 || ni > hi.0 || nj < lo.1 || nj > hi.1 {
                continue;
            }
            let next: State = (ni, nj, k);
            if closed.contains(&next) || !node_free(ni, nj) || !edge_free(at(i, j), at(ni, nj)) {
                continue;
            }
            let cost = (
                len + pitch * ((di * di + dj * dj) as f64).sqrt(),
                turned + CompassAngle::new(hd).diff(heading_in).abs(),
            );
            let better = match g.get(&next) {
                None => true,
                Some(&old) => cost.0 < old.0 - 1e-9 || ((cost.0 - old.0).abs() <= 1e-9 && cost.1 < old.1 - 1e-9),
            };
            if better {
                g.insert(next, cost);
                parent.insert(next, state);
                seq += 1;
                open.push(Open {
                    f: cost.0 + h(ni, nj),
                    turn: cost.1,
                    seq,
                    state: next,
                });
            }
        }
    }
    let Some(goal_state) = found else {
        return Err(Error::NoGridPath);
    };

    let mut states = vec![goal_state];
    let mut cur = goal_state;
    while let Some(&p) = parent.get(&cur) {
        states.push(p);
        cur = p;
    }
    states.reverse();
    let headings = states[1..].iter().map(|s| heading_of(s.2)).collect();
    Ok(GridPath {
        vertices: states.iter().map(|s| at(s.0, s.1)).collect(),
        headings,
    })
}

/// Collinear runs of the grid path: heading and end vertex of each leg.
pub fn merge_legs(path: &GridPath) -> Vec<(CompassAngle, Point)> {
    let mut legs: Vec<(CompassAngle, Point)> = Vec::new();
    for (h, v) in path.headings.iter().zip(&path.vertices[1..]) {
        match legs.last_mut() {
            Some(last) if last.0 == *h => last.1 = *v,
            _ => legs.push((*h, *v)),
        }
    }
    legs
}

pub fn grid_baseline_plan(
    start: &ShipState,
    destination: Point,
    obstacles: &[Obstacle],
    cells: &CellSet,
    opts: &PlanOptions,
) -> Result<PlanResult> {
    check_endpoints(start.position(), destination, obstacles)?;
    let tol = reach_tolerance(opts, cells);
    let path = grid_search(start.position(), start.heading(), destination, obstacles, cells.radius_m)?;
    let mut legs = merge_legs(&path);
    if legs.is_empty() {
        // destination snaps onto the start vertex
        let h = crate::circle_grid::compass_bearing(start.position(), destination)?;
        let snapped = CompassAngle::new((h.degrees() / 45.0).round() * 45.0);
        legs.push((snapped, destination));
    }

    let params = &cells.params;
    let dt = cells.options.dt_s;
    let hold = cells.hold_s();
    let max = cells.max_heading_change_deg;
    let straight_cap = ((20.0 * cells.radius_m + destination.distance(start.position()))
        / params.steady_speed_mps
        / dt)
        .ceil() as usize;

    let mut trajectory = vec![*start];
    let mut times_s = vec![0.0];
    let mut nodes = vec![GridNode::root(start.position(), start.heading())];
    let mut rudder_commands = Vec::new();
    let mut heading_changes = Vec::new();
    let mut reference = start.heading();
    let n_legs = legs.len();

    for (k, &(heading, end)) in legs.iter().enumerate() {
        let mut change = heading.diff(reference);
        if change.abs() < 1e-9 {
            rudder_commands.push(0.0);
            heading_changes.push(0.0);
        }
        while change.abs() >= 1e-9 {
            let chunk = change.clamp(-max, max);
            let cell = cells.cell_for(chunk);
            let from = *trajectory.last().expect("trajectory is never empty");
            let run = online_generate_schedule(
                &from,
                params,
                &[(hold, cell.delta0_deg), (cell.duration_s - hold, 0.0)],
                dt,
            )?;
            let t0 = *times_s.last().expect("times are never empty");
            for (i, s) in run.iter().enumerate().skip(1) {
                trajectory.push(*s);
                times_s.push(t0 + i as f64 * dt);
            }
            rudder_commands.push(cells.rudder_for(chunk));
            heading_changes.push(chunk);
            change -= chunk;
        }
        reference = heading;

        let u = Point::unit(heading);
        let last_leg = k + 1 == n_legs;
        for _ in 0..straight_cap {
            let cur = *trajectory.last().expect("trajectory is never empty");
            let p = cur.position();
            if last_leg {
                if within(p, destination, tol) || (p - destination).dot(u) >= 0.0 {
                    break;
                }
            } else if (p - end).dot(u) >= 0.0 {
                break;
            }
            let next = step(&cur, params, 0.0, dt)?.state;
            trajectory.push(next);
            times_s.push(times_s.last().expect("times are never empty") + dt);
        }
        let cur = *trajectory.last().expect("trajectory is never empty");
        let parent = nodes.len() - 1;
        let node = nodes[parent].child(parent, cur.position(), cur.heading(), None);
        nodes.push(node);
    }

    let end = trajectory.last().expect("trajectory is never empty").position();
    Ok(PlanResult {
        path_length_m: path_length(&trajectory),
        steering_count: count_steering(&rudder_commands),
        min_clearance_m: min_clearance(&trajectory, obstacles),
        reached: within(end, destination, tol),
        nodes,
        trajectory,
        times_s,
        rudder_commands,
        heading_changes,
        separation: Vec::new(),
        obstacle_track: Vec::new(),
    })
}
