use cgtc_core::ship::fit_turning_radius;
use cgtc_core::*;
use proptest::prelude::*;

/// Fine-step reference integration of the yaw/surge response alone.
fn reference_radius(p: &ShipParams, rudder: f64, dt: f64) -> f64 {
    let gain = if rudder < 0.0 { p.turn_gain / p.asymmetry_factor } else { p.turn_gain };
    let (mut r, mut u, mut d) = (0.0f64, p.steady_speed_mps, 0.0f64);
    for _ in 0..(2000.0 / dt) as usize {
        let r_next = r + (gain * d - r) / p.turn_lag_s * dt;
        let u_target = p.steady_speed_mps * (1.0 - p.speed_loss_gain * d.abs() / p.rudder_limit_stbd_deg);
        u += (u_target - u) / p.speed_recovery_s * dt;
        d += (rudder - d).clamp(-p.rudder_rate_degps * dt, p.rudder_rate_degps * dt);
        r = r_next;
    }
    u / r.abs().to_radians()
}

#[test]
fn steady_radius_matches_fine_step_reference() {
    let p = ShipParams::default();
    let run = simulate_turn(&p, 20.0, 1200.0, 0.5).unwrap();
    let fitted = fit_turning_radius(&run).unwrap();
    let reference = reference_radius(&p, 20.0, 0.05);
    assert!((fitted - reference).abs() / reference < 0.005, "{fitted} vs {reference}");
}

#[test]
fn zero_rudder_is_straight() {
    let p = ShipParams::default();
    let s = ShipState::trimmed(&p, Point::ORIGIN, CompassAngle::NORTH);
    let next = step(&s, &p, 0.0, 1.0).unwrap().state;
    assert_eq!((next.x_m, next.y_m, next.heading_deg, next.u_mps), (0.0, 7.7, 0.0, 7.7));
}

#[test]
fn trimmed_state_is_a_fixed_point() {
    let p = ShipParams::default();
    let mut s = ShipState::trimmed(&p, Point::new(5.0, -3.0), CompassAngle::new(123.0));
    for _ in 0..1000 {
        s = step(&s, &p, 0.0, 0.5).unwrap().state;
    }
    assert_eq!(s.heading_deg, 123.0);
    assert!((s.u_mps - trim_steady_speed(&p)).abs() < 1e-9);
}

#[test]
fn speed_recovers_after_a_turn() {
    let p = ShipParams::default();
    let mut s = ShipState::trimmed(&p, Point::ORIGIN, CompassAngle::NORTH);
    for _ in 0..120 {
        s = step(&s, &p, 25.0, 0.5).unwrap().state;
    }
    assert!(s.u_mps < 0.95 * p.steady_speed_mps);
    let settle = ((25.0 / p.rudder_rate_degps + 5.0 * p.speed_recovery_s) / 0.5).ceil() as usize;
    for _ in 0..settle {
        s = step(&s, &p, 0.0, 0.5).unwrap().state;
    }
    assert!((s.u_mps - p.steady_speed_mps).abs() / p.steady_speed_mps < 1e-3);
}

fn maneuver_end(p: &ShipParams, dt: f64) -> ShipState {
    let mut s = ShipState::trimmed(p, Point::ORIGIN, CompassAngle::NORTH);
    let n = (60.0 / dt).round() as usize;
    for k in 0..2 * n {
        let cmd = if k < n { 20.0 } else { 0.0 };
        s = step(&s, p, cmd, dt).unwrap().state;
    }
    s
}

#[test]
fn euler_convergence_is_first_order() {
    let p = ShipParams::default();
    let fine = maneuver_end(&p, 1.0 / 512.0);
    let err = |dt: f64| {
        let s = maneuver_end(&p, dt);
        ((s.x_m - fine.x_m).powi(2) + (s.y_m - fine.y_m).powi(2)).sqrt()
    };
    let errors: Vec<f64> = [0.5, 0.25, 0.125, 0.0625].iter().map(|&dt| err(dt)).collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.5..=2.5).contains(&ratio), "{errors:?}");
    }
}

#[test]
fn stepping_is_deterministic() {
    let p = ShipParams::default();
    let a = simulate_turn(&p, -17.3, 300.0, 0.5).unwrap();
    let b = simulate_turn(&p, -17.3, 300.0, 0.5).unwrap();
    assert_eq!(a, b);
}

#[test]
fn clamped_commands_are_flagged() {
    let p = ShipParams::default();
    let s = ShipState::trimmed(&p, Point::ORIGIN, CompassAngle::NORTH);
    assert!(step(&s, &p, 50.0, 0.5).unwrap().command_clamped);
    assert!(!step(&s, &p, 35.0, 0.5).unwrap().command_clamped);
    assert!(matches!(step(&s, &p, 0.0, -1.0), Err(Error::NonPositiveDt(_))));
}

proptest! {
    #[test]
    fn symmetric_hull_mirrors(rudder in 0.5f64..35.0, secs in 20.0f64..200.0) {
        let p = ShipParams { asymmetry_factor: 1.0, kick_gain: 0.0, ..ShipParams::default() };
        let a = simulate_turn(&p, rudder, secs, 0.5).unwrap();
        let b = simulate_turn(&p, -rudder, secs, 0.5).unwrap();
        for (s, m) in a.iter().zip(&b) {
            prop_assert!((s.x_m + m.x_m).abs() < 1e-6);
            prop_assert!((s.y_m - m.y_m).abs() < 1e-6);
            prop_assert!(CompassAngle::new(s.heading_deg).diff(CompassAngle::new(-m.heading_deg)).abs() < 1e-9);
        }
    }

    #[test]
    fn port_turns_wider(rudder in 10.0f64..35.0) {
        let p = ShipParams::default();
        let s = fit_turning_radius(&simulate_turn(&p, rudder, 1500.0, 0.5).unwrap()).unwrap();
        let q = fit_turning_radius(&simulate_turn(&p, -rudder, 1500.0, 0.5).unwrap()).unwrap();
        prop_assert!(q > s);
    }
}
