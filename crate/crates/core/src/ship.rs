//! Three-degree-of-freedom (surge, sway, yaw) maneuvering model.
//!
//! The hull/propeller/rudder force split is represented by a response-type
//! surrogate:
//!
//! ```text
//! rudder:  d(delta)/dt = clamp(cmd - delta, +-rate)
//! yaw:     dr/dt = (K_side * delta - r) / T
//! surge:   du/dt = (u0 * (1 - k_loss * |delta| / delta_max) - u) / T_u
//! sway:    dv/dt = (-k_kick * u * d(delta)/dt * T - v) / T
//! ```
//!
//! with `K_side = K / asymmetry` for port rudder. Integration is explicit
//! Euler with a fixed step.

use serde::{Deserialize, Serialize};

use crate::circle_grid::{normalize_deg, wrap_signed_deg, CompassAngle, Point};
use crate::error::{Error, Result};
use crate::linalg::lstsq;

/// Default integration step in seconds.
pub const DEFAULT_DT_S: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShipParams {
    pub length_m: f64,
    pub beam_m: f64,
    pub draft_m: f64,
    /// Steady straight-ahead speed `u0` at the fixed propeller setting.
    pub steady_speed_mps: f64,
    pub rudder_limit_port_deg: f64,
    pub rudder_limit_stbd_deg: f64,
    pub rudder_rate_degps: f64,
    /// Recorded for completeness; speed is held by the governor.
    pub propeller_rpm: f64,
    /// Steady yaw rate per degree of starboard rudder (1/s).
    pub turn_gain: f64,
    pub turn_lag_s: f64,
    /// Port-side yaw gain is divided by this factor.
    pub asymmetry_factor: f64,
    pub kick_gain: f64,
    pub speed_loss_gain: f64,
    pub speed_recovery_s: f64,
}

impl Default for ShipParams {
    fn default() -> Self {
        Self {
            length_m: 63.6,
            beam_m: 16.4,
            draft_m: 6.22,
            steady_speed_mps: 7.7,
            rudder_limit_port_deg: -35.0,
            rudder_limit_stbd_deg: 35.0,
            rudder_rate_degps: 3.0,
            propeller_rpm: 180.0,
            turn_gain: 0.116,
            turn_lag_s: 4.0,
            asymmetry_factor: 1.10,
            kick_gain: 0.6,
            speed_loss_gain: 0.12,
            speed_recovery_s: 3.0,
        }
    }
}

impl ShipParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        let all = [
            self.length_m,
            self.beam_m,
            self.draft_m,
            self.steady_speed_mps,
            self.rudder_limit_port_deg,
            self.rudder_limit_stbd_deg,
            self.rudder_rate_degps,
            self.propeller_rpm,
            self.turn_gain,
            self.turn_lag_s,
            self.asymmetry_factor,
            self.kick_gain,
            self.speed_loss_gain,
            self.speed_recovery_s,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("all parameters must be finite");
        }
        if !(self.rudder_limit_port_deg < 0.0 && self.rudder_limit_stbd_deg > 0.0) {
            return bad("rudder limits must satisfy port < 0 < starboard");
        }
        if self.length_m <= 0.0 {
            return bad("length_m must be positive");
        }
        if self.steady_speed_mps <= 0.0 {
            return bad("steady_speed_mps must be positive");
        }
        if self.turn_lag_s <= 0.0 || self.speed_recovery_s <= 0.0 {
            return bad("time constants must be positive");
        }
        if self.rudder_rate_degps <= 0.0 || self.turn_gain <= 0.0 {
            return bad("rudder rate and turn gain must be positive");
        }
        if self.asymmetry_factor < 1.0 {
            return bad("asymmetry_factor must be >= 1");
        }
        if self.kick_gain < 0.0 {
            return bad("kick_gain must be >= 0");
        }
        if !(0.0..1.0).contains(&self.speed_loss_gain) {
            return bad("speed_loss_gain must lie in [0, 1)");
        }
        Ok(())
    }

    /// Clamp a rudder command into the actuator range; the flag reports
    /// whether clamping happened.
    pub fn clamp_rudder(&self, command_deg: f64) -> (f64, bool) {
        let c = command_deg.clamp(self.rudder_limit_port_deg, self.rudder_limit_stbd_deg);
        (c, c != command_deg)
    }

    fn yaw_gain(&self, rudder_deg: f64) -> f64 {
        if rudder_deg < 0.0 {
            self.turn_gain / self.asymmetry_factor
        } else {
            self.turn_gain
        }
    }

    /// Steady-state yaw rate and advance speed for a held rudder angle.
    pub fn steady_turn(&self, rudder_deg: f64) -> (f64, f64) {
        let r = self.yaw_gain(rudder_deg) * rudder_deg;
        let u = self.steady_speed_mps
            * (1.0 - self.speed_loss_gain * rudder_deg.abs() / self.rudder_limit_stbd_deg);
        (r, u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShipState {
    pub x_m: f64,
    pub y_m: f64,
    pub heading_deg: f64,
    pub u_mps: f64,
    pub v_mps: f64,
    pub yaw_rate_degps: f64,
    pub rudder_deg: f64,
}

impl ShipState {
    /// Steady straight-ahead state at the given pose.
    pub fn trimmed(params: &ShipParams, position: Point, heading: CompassAngle) -> Self {
        Self {
            x_m: position.x,
            y_m: position.y,
            heading_deg: heading.degrees(),
            u_mps: trim_steady_speed(params),
            v_mps: 0.0,
            yaw_rate_degps: 0.0,
            rudder_deg: 0.0,
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x_m, self.y_m)
    }

    pub fn heading(&self) -> CompassAngle {
        CompassAngle::new(self.heading_deg)
    }

    /// Re-express a state given in a local frame (origin, heading north)
    /// in the frame whose origin sits at `origin` with `heading`.
    pub fn transformed(&self, origin: Point, heading: CompassAngle) -> Self {
        let p = origin + self.position().rotated(heading);
        Self {
            x_m: p.x,
            y_m: p.y,
            heading_deg: normalize_deg(self.heading_deg + heading.degrees()),
            ..*self
        }
    }

    /// Linear interpolation between two states; heading is interpolated
    /// along the short arc.
    pub fn lerp(&self, other: &ShipState, f: f64) -> ShipState {
        let mix = |a: f64, b: f64| a + (b - a) * f;
        let dh = wrap_signed_deg(other.heading_deg - self.heading_deg);
        ShipState {
            x_m: mix(self.x_m, other.x_m),
            y_m: mix(self.y_m, other.y_m),
            heading_deg: normalize_deg(self.heading_deg + dh * f),
            u_mps: mix(self.u_mps, other.u_mps),
            v_mps: mix(self.v_mps, other.v_mps),
            yaw_rate_degps: mix(self.yaw_rate_degps, other.yaw_rate_degps),
            rudder_deg: mix(self.rudder_deg, other.rudder_deg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub state: ShipState,
    /// The command exceeded the actuator limits and was clamped.
    pub command_clamped: bool,
}

/// Advance the vessel by one explicit-Euler step of `dt` seconds.
pub fn step(
    state: &ShipState,
    params: &ShipParams,
    rudder_command_deg: f64,
    dt: f64,
) -> Result<StepResult> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt(dt));
    }
    let (command, command_clamped) = params.clamp_rudder(rudder_command_deg);

    let max_move = params.rudder_rate_degps * dt;
    let rudder_delta = (command - state.rudder_deg).clamp(-max_move, max_move);
    let rudder_rate = rudder_delta / dt;

    let (yaw_target, u_target) = params.steady_turn(state.rudder_deg);
    let v_target =
        -params.kick_gain * state.u_mps * rudder_rate.to_radians() * params.turn_lag_s;

    let (sin_h, cos_h) = state.heading().radians().sin_cos();
    let vx = state.u_mps * sin_h + state.v_mps * cos_h;
    let vy = state.u_mps * cos_h - state.v_mps * sin_h;

    let next = ShipState {
        x_m: state.x_m + vx * dt,
        y_m: state.y_m + vy * dt,
        heading_deg: normalize_deg(state.heading_deg + state.yaw_rate_degps * dt),
        u_mps: state.u_mps + (u_target - state.u_mps) / params.speed_recovery_s * dt,
        v_mps: state.v_mps + (v_target - state.v_mps) / params.turn_lag_s * dt,
        yaw_rate_degps: state.yaw_rate_degps
            + (yaw_target - state.yaw_rate_degps) / params.turn_lag_s * dt,
        rudder_deg: (state.rudder_deg + rudder_delta)
            .clamp(params.rudder_limit_port_deg, params.rudder_limit_stbd_deg),
    };
    Ok(StepResult {
        state: next,
        command_clamped,
    })
}

/// Speed of the trimmed, steady straight-ahead state.
pub fn trim_steady_speed(params: &ShipParams) -> f64 {
    params.steady_speed_mps
}

/// Turning trial from the trimmed state at the origin heading north,
/// holding `rudder_deg` for `duration_s`. The first sample is the initial
/// state.
pub fn simulate_turn(
    params: &ShipParams,
    rudder_deg: f64,
    duration_s: f64,
    dt: f64,
) -> Result<Vec<ShipState>> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt(dt));
    }
    let steps = (duration_s / dt).ceil().max(0.0) as usize;
    let mut state = ShipState::trimmed(params, Point::ORIGIN, CompassAngle::NORTH);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(state);
    for _ in 0..steps {
        state = step(&state, params, rudder_deg, dt)?.state;
        out.push(state);
    }
    Ok(out)
}

/// Summary of a turning trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurnSummary {
    pub rudder_deg: f64,
    /// Radius of a least-squares circle through the last full revolution.
    pub steady_radius_m: f64,
    /// Most adverse transverse displacement before 90 deg of heading change
    /// (negative means opposite to the turn direction).
    pub kick_m: f64,
}

pub fn summarize_turn(samples: &[ShipState], rudder_deg: f64) -> Option<TurnSummary> {
    let radius = fit_turning_radius(samples)?;
    Some(TurnSummary {
        rudder_deg,
        steady_radius_m: radius,
        kick_m: kick_displacement(samples, rudder_deg),
    })
}

/// Cumulative (unwrapped) heading change along a sample sequence.
pub fn unwrapped_heading_change(samples: &[ShipState]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(samples.len());
    out.push(0.0);
    for w in samples.windows(2) {
        acc += wrap_signed_deg(w[1].heading_deg - w[0].heading_deg);
        out.push(acc);
    }
    out
}

/// Least-squares circle (Kasa fit) through the last 360 deg of a turning
/// trajectory. `None` when the trajectory does not complete a revolution.
pub fn fit_turning_radius(samples: &[ShipState]) -> Option<f64> {
    let turned = unwrapped_heading_change(samples);
    let total = *turned.last()?;
    if total.abs() < 360.0 {
        return None;
    }
    let start = turned
        .iter()
        .rposition(|h| (total - h).abs() >= 360.0)
        .unwrap_or(0);
    let pts = &samples[start..];
    let rows: Vec<Vec<f64>> = pts.iter().map(|s| vec![s.x_m, s.y_m, 1.0]).collect();
    let rhs: Vec<f64> = pts.iter().map(|s| -(s.x_m * s.x_m + s.y_m * s.y_m)).collect();
    let c = lstsq(&rows, &rhs).ok()?;
    let (cx, cy) = (-c[0] / 2.0, -c[1] / 2.0);
    Some((cx * cx + cy * cy - c[2]).sqrt())
}

/// Most adverse transverse displacement (relative to the initial track, in
/// the turn direction) before 90 deg of heading change.
pub fn kick_displacement(samples: &[ShipState], rudder_deg: f64) -> f64 {
    let Some(first) = samples.first() else {
        return 0.0;
    };
    let sign = if rudder_deg < 0.0 { -1.0 } else { 1.0 };
    let turned = unwrapped_heading_change(samples);
    let origin = first.position();
    let heading = first.heading();
    samples
        .iter()
        .zip(&turned)
        .take_while(|(_, h)| h.abs() < 90.0)
        .map(|(s, _)| {
            // transverse offset, positive to starboard of the initial track
            let d = s.position() - origin;
            let starboard = Point::unit(heading.offset(90.0));
            sign * d.dot(starboard)
        })
        .fold(0.0, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn symmetric() -> ShipParams {
        ShipParams {
            asymmetry_factor: 1.0,
            kick_gain: 0.0,
            ..ShipParams::default()
        }
    }

    #[test]
    fn straight_step() {
        let p = ShipParams::default();
        let s = ShipState::trimmed(&p, Point::ORIGIN, CompassAngle::NORTH);
        let n = step(&s, &p, 0.0, 1.0).unwrap().state;
        assert_eq!(n.x_m, 0.0);
        assert!((n.y_m - 7.7).abs() < 1e-12);
        assert_eq!(n.heading_deg, 0.0);
        assert_eq!(n.u_mps, p.steady_speed_mps);
    }

    #[test]
    fn rejects_bad_dt() {
        let p = ShipParams::default();
        let s = ShipState::trimmed(&p, Point::ORIGIN, CompassAngle::NORTH);
        assert!(matches!(step(&s, &p, 0.0, 0.0), Err(Error::NonPositiveDt(_))));
        assert!(matches!(step(&s, &p, 0.0, -1.0), Err(Error::NonPositiveDt(_))));
        assert!(matches!(simulate_turn(&p, 10.0, 10.0, 0.0), Err(Error::NonPositiveDt(_))));
    }

    #[test]
    fn command_is_clamped_and_flagged() {
        let p = ShipParams::default();
        let mut s = ShipState::trimmed(&p, Point::ORIGIN, CompassAngle::NORTH);
        let r = step(&s, &p, 50.0, 0.5).unwrap();
        assert!(r.command_clamped);
        for _ in 0..100 {
            s = step(&s, &p, 50.0, 0.5).unwrap().state;
        }
        assert_eq!(s.rudder_deg, p.rudder_limit_stbd_deg);
        assert!(!step(&s, &p, 20.0, 0.5).unwrap().command_clamped);
    }

    #[test]
    fn rudder_is_rate_limited() {
        let p = ShipParams::default();
        let s = ShipState::trimmed(&p, Point::ORIGIN, CompassAngle::NORTH);
        let n = step(&s, &p, 30.0, 0.5).unwrap().state;
        assert!((n.rudder_deg - 1.5).abs() < 1e-12);
    }

    #[test]
    fn mirror_symmetry() {
        let p = symmetric();
        let a = simulate_turn(&p, 20.0, 300.0, 0.5).unwrap();
        let b = simulate_turn(&p, -20.0, 300.0, 0.5).unwrap();
        for (s, m) in a.iter().zip(&b) {
            assert!((s.x_m + m.x_m).abs() < 1e-9, "{} vs {}", s.x_m, m.x_m);
            assert!((s.y_m - m.y_m).abs() < 1e-9);
            assert!(CompassAngle::new(s.heading_deg).diff(CompassAngle::new(-m.heading_deg)).abs() < 1e-9);
            assert_eq!(s.u_mps, m.u_mps);
        }
    }

    #[test]
    fn deterministic() {
        let p = ShipParams::default();
        let a = simulate_turn(&p, 17.0, 120.0, 0.5).unwrap();
        let b = simulate_turn(&p, 17.0, 120.0, 0.5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trim_is_fixed_point() {
        let p = ShipParams::default();
        assert_eq!(trim_steady_speed(&p), 7.7);
        let mut s = ShipState::trimmed(&p, Point::ORIGIN, CompassAngle::new(33.0));
        for _ in 0..1000 {
            s = step(&s, &p, 0.0, 0.5).unwrap().state;
        }
        assert_eq!(s.heading_deg, 33.0);
        assert!((s.u_mps - 7.7).abs() < 1e-9);
    }

    #[test]
    fn speed_recovers_after_turn() {
        let p = ShipParams::default();
        let mut s = ShipState::trimmed(&p, Point::ORIGIN, CompassAngle::NORTH);
        for _ in 0..120 {
            s = step(&s, &p, 25.0, 0.5).unwrap().state;
        }
        assert!(s.u_mps < 0.95 * p.steady_speed_mps);
        // rudder back to zero, then wait five recovery time constants
        while s.rudder_deg != 0.0 {
            s = step(&s, &p, 0.0, 0.5).unwrap().state;
        }
        let wait = (5.0 * p.speed_recovery_s / 0.5).ceil() as usize;
        for _ in 0..wait {
            s = step(&s, &p, 0.0, 0.5).unwrap().state;
        }
        assert!((s.u_mps - p.steady_speed_mps).abs() < 1e-3 * p.steady_speed_mps);
    }

    #[test]
    fn straight_run_keeps_heading() {
        let p = ShipParams::default();
        let run = simulate_turn(&p, 0.0, 100.0, 0.5).unwrap();
        assert!(run.iter().all(|s| s.heading_deg == 0.0 && s.x_m == 0.0));
    }

    #[test]
    fn port_circle_wider_and_kick_adverse() {
        let p = ShipParams::default();
        let stbd = simulate_turn(&p, 35.0, 600.0, 0.5).unwrap();
        let port = simulate_turn(&p, -35.0, 600.0, 0.5).unwrap();
        let rs = summarize_turn(&stbd, 35.0).unwrap();
        let rp = summarize_turn(&port, -35.0).unwrap();
        assert!(rp.steady_radius_m > rs.steady_radius_m);
        assert!(rs.kick_m < 0.0);
        assert!(rp.kick_m < 0.0);
    }

    #[test]
    fn param_validation() {
        assert!(ShipParams::default().validate().is_ok());
        let p = ShipParams { asymmetry_factor: 0.9, ..ShipParams::default() };
        assert!(p.validate().is_err());
        let p = ShipParams { rudder_limit_port_deg: 5.0, ..ShipParams::default() };
        assert!(p.validate().is_err());
        let p = ShipParams { speed_recovery_s: 0.0, ..ShipParams::default() };
        assert!(p.validate().is_err());
    }
}
