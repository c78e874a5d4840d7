//! First-order point-mass MAV at constant altitude.

use crate::error::{Error, Result};
use crate::math;
use crate::nav::Pose;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MavDynamics {
    pub pose: Pose,
    /// Horizontal velocity (m/s).
    pub velocity: [f64; 2],
    pub max_speed: f64,
    /// Velocity response time constant (s).
    pub time_constant: f64,
}

impl MavDynamics {
    pub fn at_rest(pose: Pose, max_speed: f64, time_constant: f64) -> Self {
        Self {
            pose,
            velocity: [0.0, 0.0],
            max_speed,
            time_constant,
        }
    }
}

/// Exact first-order lag of the velocity toward the (saturated) command over
/// `dt`, then an explicit Euler position update.
pub fn step_dynamics(dynamics: &MavDynamics, command: [f64; 2], dt: f64) -> Result<MavDynamics> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput("dt must be positive"));
    }
    if !(dynamics.time_constant > 0.0) || !(dynamics.max_speed > 0.0) {
        return Err(Error::InvalidInput(
            "time constant and max speed must be positive",
        ));
    }
    let clamp = |v: [f64; 2]| {
        let n = math::hypot(v[0], v[1]);
        if n > dynamics.max_speed {
            [v[0] * dynamics.max_speed / n, v[1] * dynamics.max_speed / n]
        } else {
            v
        }
    };
    let cmd = clamp(command);
    let alpha = 1.0 - math::exp(-dt / dynamics.time_constant);
    let v = clamp([
        dynamics.velocity[0] + (cmd[0] - dynamics.velocity[0]) * alpha,
        dynamics.velocity[1] + (cmd[1] - dynamics.velocity[1]) * alpha,
    ]);
    let mut out = *dynamics;
    out.velocity = v;
    out.pose.x += v[0] * dt;
    out.pose.y += v[1] * dt;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rest() -> MavDynamics {
        MavDynamics::at_rest(
            Pose {
                z: 2.0,
                ..Pose::default()
            },
            1.0,
            0.2,
        )
    }

    #[test]
    fn zero_command_stays_put() {
        let mut d = rest();
        for _ in 0..100 {
            d = step_dynamics(&d, [0.0, 0.0], 0.05).unwrap();
        }
        assert_eq!(d.pose, rest().pose);
    }

    #[test]
    fn step_response_follows_exponential() {
        let mut d = rest();
        let dt = 0.01;
        for _ in 0..20 {
            d = step_dynamics(&d, [0.5, 0.0], dt).unwrap();
        }
        // t = τ → 1 − e⁻¹ of the command.
        assert!((d.velocity[0] / 0.5 - (1.0 - (-1.0f64).exp())).abs() < 1e-9);
        for _ in 0..500 {
            d = step_dynamics(&d, [0.5, 0.0], dt).unwrap();
        }
        assert!((d.velocity[0] - 0.5).abs() < 0.005);
    }

    #[test]
    fn speed_is_saturated() {
        let mut d = rest();
        for _ in 0..200 {
            d = step_dynamics(&d, [30.0, 40.0], 0.05).unwrap();
            assert!(d.velocity[0].hypot(d.velocity[1]) <= d.max_speed + 1e-12);
        }
        assert!(step_dynamics(&d, [0.0, 0.0], 0.0).is_err());
    }
}
