//! On-line trajectory generator: forward simulation of a rudder schedule
//! from an arbitrary pose.

use crate::error::{Error, Result};
use crate::ship::{step, ShipParams, ShipState};

fn step_count(duration_s: f64, dt: f64) -> usize {
    (duration_s / dt - 1e-9).ceil().max(0.0) as usize
}

/// Hold `rudder_command_deg` for `horizon_s`. The first sample is `state`.
pub fn online_generate(
    state: &ShipState,
    params: &ShipParams,
    rudder_command_deg: f64,
    horizon_s: f64,
    dt: f64,
) -> Result<Vec<ShipState>> {
    online_generate_schedule(state, params, &[(horizon_s, rudder_command_deg)], dt)
}

/// Piecewise-constant schedule of `(duration_s, command_deg)` segments.
pub fn online_generate_schedule(
    state: &ShipState,
    params: &ShipParams,
    schedule: &[(f64, f64)],
    dt: f64,
) -> Result<Vec<ShipState>> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt(dt));
    }
    let mut cur = *state;
    let mut out = vec![cur];
    for &(duration, command) in schedule {
        for _ in 0..step_count(duration, dt) {
            cur = step(&cur, params, command, dt)?.state;
            out.push(cur);
        }
    }
    Ok(out)
}
