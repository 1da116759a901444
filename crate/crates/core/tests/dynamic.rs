use cgtc_core::dynamic::{speed_bounds, virtual_pass};
use cgtc_core::*;
use proptest::prelude::*;

fn own_pose() -> GridNode {
    GridNode::root(Point::new(0.0, 0.0), CompassAngle::new(0.0))
}

fn encounter(center: (f64, f64), course: f64, vo: f64, vs: f64, r: f64, ro: f64) -> Result<Encounter> {
    let o = Obstacle::moving(Point::new(center.0, center.1), ro, vo, CompassAngle::new(course));
    Encounter::new(own_pose(), vs, o, r, ro)
}

/// Minimum distance between two constant-velocity points.
fn cpa(p0: Point, v: Point, q0: Point, w: Point) -> (f64, f64) {
    let d = q0 - p0;
    let rel = w - v;
    let t = (-d.dot(rel) / rel.dot(rel)).max(0.0);
    ((d + rel * t).norm(), t)
}

fn track(p0: Point, v: Point, dt: f64, n: usize) -> Vec<Point> {
    (0..n).map(|k| p0 + v * (k as f64 * dt)).collect()
}

fn states(points: &[Point]) -> Vec<ShipState> {
    let p = ShipParams::default();
    points
        .iter()
        .map(|&q| ShipState::trimmed(&p, q, CompassAngle::new(0.0)))
        .collect()
}

#[test]
fn crossing_at_the_lower_bound() {
    // Own ship reaches M with the obstacle exactly R + R_o short of it;
    // the later closest approach follows from the relative motion.
    let e = encounter((-2000.0, 2000.0), 90.0, 1.0, 10.0, 750.0, 750.0).unwrap();
    let (v_lo, v_hi) = speed_bounds(&e);
    assert!((v_lo - 2.5).abs() < 1e-9 && (v_hi - 40.0).abs() < 1e-9);
    let t_m = e.own_range_m() / 10.0;
    let obstacle_at_m = Point::new(-2000.0 + v_lo * t_m, 2000.0);
    assert!((obstacle_at_m.distance(e.meeting_point) - 1500.0).abs() < 1e-9);
    let (d, _) = cpa(
        Point::new(0.0, 0.0),
        Point::new(0.0, 10.0),
        Point::new(-2000.0, 2000.0),
        Point::new(v_lo, 0.0),
    );
    let bound = 1500.0 * 10.0 / (10.0f64.powi(2) + v_lo * v_lo).sqrt();
    assert!((d - bound).abs() < 1e-6, "{d} vs {bound}");
}

#[test]
fn virtual_radius_never_shrinks_with_obstacle_speed() {
    for (center, course) in [((-2000.0, 2000.0), 90.0), ((4000.0, 4000.0), 270.0)] {
        let base = encounter(center, course, 1.0, 10.0, 750.0, 750.0).unwrap();
        let (lo, hi) = speed_bounds(&base);
        let hi = hi.min(40.0);
        let radii: Vec<f64> = (1..=5)
            .map(|k| {
                let vo = lo + (hi - lo) * k as f64 / 6.0;
                let e = encounter(center, course, vo, 10.0, 750.0, 750.0).unwrap();
                assert_eq!(classify_encounter(&e).class, EncounterClass::MustSteer);
                virtual_obstacle_radius(&e).unwrap().radius_m
            })
            .collect();
        assert!(
            radii.windows(2).all(|w| w[1] >= w[0]),
            "obstacle from {center:?} course {course}: radii {radii:.1?}"
        );
    }
}

#[test]
fn more_than_one_mover_is_rejected() {
    let p = ShipParams::default();
    let cells = build_cell_set(&p, 6.0 * p.length_m, 15.0, &CellOptions::default()).unwrap();
    let movers = [
        Obstacle::moving(Point::new(4000.0, 4000.0), 300.0, 5.0, CompassAngle::new(270.0)),
        Obstacle::moving(Point::new(-4000.0, 6000.0), 300.0, 5.0, CompassAngle::new(90.0)),
    ];
    let start = ShipState::trimmed(&p, Point::new(0.0, 0.0), CompassAngle::new(0.0));
    let r = plan_dynamic(&start, Point::new(0.0, 10000.0), &movers, &cells, &PlanOptions::default());
    assert!(matches!(r, Err(Error::Validation(_))));
}

#[test]
fn min_separation_checks_lengths() {
    let a = states(&[Point::new(0.0, 0.0)]);
    assert!(min_separation(&a, &[]).is_err());
    assert!(min_separation(&[], &[]).is_err());
}

proptest! {
    #[test]
    fn classification_matches_kinematics(
        ox in -6000f64..-500.0, oy in 1000f64..8000.0,
        course in 45f64..135.0, vo in 0.5f64..25.0,
        vs in 4.0f64..12.0, r in 200f64..600.0, ro in 200f64..900.0,
    ) {
        let Ok(e) = encounter((ox, oy), course, vo, vs, r, ro) else { return Ok(()) };
        let c = classify_encounter(&e);
        let sum = r + ro;
        let (cm, om) = (e.own_range_m(), e.obstacle_range_m());
        if c.degenerate {
            prop_assert_eq!(c.class, EncounterClass::MustSteer);
            return Ok(());
        }
        // obstacle still R + R_o short of M when the own ship arrives there
        let own_first = om - vo * cm / vs >= sum - 1e-9;
        // obstacle past M before the own ship comes within R + R_o of it
        let obstacle_first = vo * (cm - sum) / vs >= om - 1e-9;
        let expected = if own_first {
            EncounterClass::MaintainOwnFirst
        } else if obstacle_first {
            EncounterClass::MaintainObstacleFirst
        } else {
            EncounterClass::MustSteer
        };
        prop_assert_eq!(c.class, expected);
        prop_assert!(c.v_lo_mps < c.v_hi_mps);
    }

    #[test]
    fn tangent_run_length_identity(
        ox in -6000f64..-500.0, oy in 1500f64..8000.0, course in 60f64..120.0,
        frac in 0.0f64..0.95, r in 200f64..600.0,
    ) {
        let Ok(e) = encounter((ox, oy), course, 5.0, 7.7, r, 600.0) else { return Ok(()) };
        let cm = e.own_range_m();
        let rx = frac * cm;
        let pass = virtual_pass(&e, rx).unwrap();
        let expected = cm * cm - rx * rx + r * r;
        prop_assert!((pass.l_s_m.powi(2) - expected).abs() <= 1e-6 * expected);
        prop_assert!((pass.own_point.distance(e.own_pose.position) - pass.l_s_m).abs() < 1e-6 * pass.l_s_m);
        prop_assert!((pass.l_o_m - 5.0 * pass.time_s).abs() < 1e-9 * pass.l_o_m.max(1.0));
    }

    #[test]
    fn sampled_separation_tracks_the_closed_form(
        ox in -6000f64..6000.0, oy in -6000f64..6000.0,
        vx in -12f64..12.0, vy in -12f64..12.0, speed in 3f64..12.0,
    ) {
        let dt = 0.5;
        let n = 4000;
        let own = track(Point::new(0.0, 0.0), Point::new(0.0, speed), dt, n);
        let obs = track(Point::new(ox, oy), Point::new(vx, vy), dt, n);
        let (series, min) = min_separation(&states(&own), &obs).unwrap();
        prop_assert_eq!(series.len(), n);
        let (exact, t) = cpa(Point::new(0.0, 0.0), Point::new(0.0, speed), Point::new(ox, oy), Point::new(vx, vy));
        prop_assume!(t < (n - 1) as f64 * dt);
        let rel = (Point::new(vx, vy) - Point::new(0.0, speed)).norm();
        prop_assert!(min >= exact - 1e-6);
        prop_assert!(min <= exact + rel * dt / 2.0 + 1e-6, "{} vs {}", min, exact);
    }
}
