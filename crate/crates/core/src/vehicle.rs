//! Differential-drive kinematics.
//!
//! A vehicle is a pair of independently driven wheels of radius `r` sitting
//! `L` apart on a common axle. With wheel angular speeds `u_l`, `u_r` the
//! configuration evolves as
//!
//! ```text
//! x'     = r/2 (u_l + u_r) cos(theta)
//! y'     = r/2 (u_l + u_r) sin(theta)
//! theta' = r/L (u_r - u_l)
//! ```
//!
//! Wheel commands travel as normalized [`WheelThrust`] values in [-1, 1]
//! which are scaled by [`VehicleParams::max_wheel_rate`] before use.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::{normalize_angle, Vec2};

/// Largest step [`integrate`] accepts.
pub const MAX_STEP: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VehicleError {
    #[error("thrust component {0} outside [-1, 1]")]
    ThrustOutOfRange(f64),
    #[error("invalid vehicle parameter: {0}")]
    InvalidParams(&'static str),
    #[error("time step {0} s outside (0, {MAX_STEP}]")]
    InvalidStep(f64),
    #[error("invalid Dubins control: {0}")]
    InvalidDubins(&'static str),
}

/// Planar configuration of one vehicle. `theta` is kept in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn heading(&self) -> Vec2 {
        Vec2::new(self.theta.cos(), self.theta.sin())
    }

    /// Expresses a world point in this pose's body frame (x forward, y left).
    pub fn to_local(&self, p: Vec2) -> Vec2 {
        (p - self.position()).rotated(-self.theta)
    }

    /// Applies the rigid transform `g` to this pose (`g` composed with `self`).
    pub fn transformed_by(&self, g: &Pose2D) -> Pose2D {
        let p = self.position().rotated(g.theta) + g.position();
        Pose2D::new(p.x, p.y, self.theta + g.theta)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

/// Normalized left/right wheel command, each component in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WheelThrust {
    left: f64,
    right: f64,
}

impl WheelThrust {
    pub const ZERO: WheelThrust = WheelThrust {
        left: 0.0,
        right: 0.0,
    };

    pub fn new(left: f64, right: f64) -> Result<Self, VehicleError> {
        for v in [left, right] {
            if !(-1.0..=1.0).contains(&v) {
                return Err(VehicleError::ThrustOutOfRange(v));
            }
        }
        Ok(Self { left, right })
    }

    /// Builds a thrust, saturating each component into [-1, 1].
    /// NaN components become zero.
    pub fn clamped(left: f64, right: f64) -> Self {
        let c = |v: f64| if v.is_nan() { 0.0 } else { v.clamp(-1.0, 1.0) };
        Self {
            left: c(left),
            right: c(right),
        }
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn swapped(&self) -> Self {
        Self {
            left: self.right,
            right: self.left,
        }
    }

    /// Magnitude of the faster wheel.
    pub fn peak(&self) -> f64 {
        self.left.abs().max(self.right.abs())
    }
}

/// Physical constants of one vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VehicleParams {
    /// Wheel radius, meters.
    pub wheel_radius: f64,
    /// Distance between wheel centers, meters.
    pub axle_length: f64,
    /// Wheel angular speed at thrust 1.0, rad/s.
    pub max_wheel_rate: f64,
    /// Radius of the bounding disc, meters.
    pub body_radius: f64,
}

impl Default for VehicleParams {
    /// Roughly the 8 cm x 5 cm micro vehicle with a ~0.3 m/s top speed.
    fn default() -> Self {
        Self {
            wheel_radius: 0.016,
            axle_length: 0.05,
            max_wheel_rate: 0.3 / 0.016,
            body_radius: 0.047,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), VehicleError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.wheel_radius) {
            return Err(VehicleError::InvalidParams("wheel_radius must be > 0"));
        }
        if !positive(self.axle_length) {
            return Err(VehicleError::InvalidParams("axle_length must be > 0"));
        }
        if !positive(self.max_wheel_rate) {
            return Err(VehicleError::InvalidParams("max_wheel_rate must be > 0"));
        }
        if !positive(self.body_radius) {
            return Err(VehicleError::InvalidParams("body_radius must be > 0"));
        }
        if self.axle_length > 2.0 * self.body_radius {
            return Err(VehicleError::InvalidParams(
                "axle_length must not exceed the body diameter",
            ));
        }
        Ok(())
    }

    /// Forward speed at full thrust on both wheels, m/s.
    pub fn top_speed(&self) -> f64 {
        self.wheel_radius * self.max_wheel_rate
    }
}

/// Body-frame velocity: forward speed and yaw rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Twist2D {
    pub v: f64,
    pub omega: f64,
}

/// Dubins car input: constant speed `v0`, turning rate `omega0 * u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsControl {
    v0: f64,
    omega0: f64,
    u: i8,
}

impl DubinsControl {
    pub fn new(v0: f64, omega0: f64, u: i8) -> Result<Self, VehicleError> {
        if !(v0.is_finite() && v0 >= 0.0) {
            return Err(VehicleError::InvalidDubins("v0 must be >= 0"));
        }
        if !(omega0.is_finite() && omega0 >= 0.0) {
            return Err(VehicleError::InvalidDubins("omega0 must be >= 0"));
        }
        if !(-1..=1).contains(&u) {
            return Err(VehicleError::InvalidDubins("u must be -1, 0 or 1"));
        }
        Ok(Self { v0, omega0, u })
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn u(&self) -> i8 {
        self.u
    }
}

/// Configuration rate `(dx, dy, dtheta)` under a constant wheel command.
pub fn ddr_derivative(pose: &Pose2D, thrust: WheelThrust, params: &VehicleParams) -> (f64, f64, f64) {
    let u_l = thrust.left * params.max_wheel_rate;
    let u_r = thrust.right * params.max_wheel_rate;
    rate_at(pose.theta, u_l, u_r, params)
}

fn rate_at(theta: f64, u_l: f64, u_r: f64, params: &VehicleParams) -> (f64, f64, f64) {
    let r = params.wheel_radius;
    let v = r / 2.0 * (u_l + u_r);
    (v * theta.cos(), v * theta.sin(), r / params.axle_length * (u_r - u_l))
}

/// Forward map from a wheel command to the body twist it produces.
pub fn thrust_to_twist(thrust: WheelThrust, params: &VehicleParams) -> Twist2D {
    let u_l = thrust.left * params.max_wheel_rate;
    let u_r = thrust.right * params.max_wheel_rate;
    let r = params.wheel_radius;
    Twist2D {
        v: r / 2.0 * (u_l + u_r),
        omega: r / params.axle_length * (u_r - u_l),
    }
}

/// One classical fourth-order Runge-Kutta step of length `dt`.
pub fn integrate(
    pose: &Pose2D,
    thrust: WheelThrust,
    params: &VehicleParams,
    dt: f64,
) -> Result<Pose2D, VehicleError> {
    if !(dt > 0.0 && dt <= MAX_STEP) {
        return Err(VehicleError::InvalidStep(dt));
    }
    let u_l = thrust.left * params.max_wheel_rate;
    let u_r = thrust.right * params.max_wheel_rate;
    let f = |theta: f64| rate_at(theta, u_l, u_r, params);

    let (x0, y0, th0) = (pose.x, pose.y, pose.theta);
    let k1 = f(th0);
    let k2 = f(th0 + dt / 2.0 * k1.2);
    let k3 = f(th0 + dt / 2.0 * k2.2);
    let k4 = f(th0 + dt * k3.2);
    let avg = |a: f64, b: f64, c: f64, d: f64| dt * (a + 2.0 * b + 2.0 * c + d) / 6.0;
    Ok(Pose2D::new(
        x0 + avg(k1.0, k2.0, k3.0, k4.0),
        y0 + avg(k1.1, k2.1, k3.1, k4.1),
        th0 + avg(k1.2, k2.2, k3.2, k4.2),
    ))
}

/// Exact pose after holding `thrust` for `t` seconds.
///
/// Unequal wheels trace a circular arc about the instantaneous center of
/// curvature; equal wheels trace a straight segment.
pub fn constant_thrust_closed_form(pose: &Pose2D, thrust: WheelThrust, params: &VehicleParams, t: f64) -> Pose2D {
    let Twist2D { v, omega } = thrust_to_twist(thrust, params);
    let th0 = pose.theta;
    if thrust.left == thrust.right {
        return Pose2D::new(pose.x + v * t * th0.cos(), pose.y + v * t * th0.sin(), th0);
    }
    // Signed radius from the axle midpoint to the ICC.
    let radius = v / omega;
    let th1 = th0 + omega * t;
    Pose2D::new(
        pose.x + radius * (th1.sin() - th0.sin()),
        pose.y - radius * (th1.cos() - th0.cos()),
        th1,
    )
}

/// Inverse kinematics with curvature-preserving saturation: when a wheel
/// would exceed unit thrust, both wheels shrink by the same factor.
pub fn twist_to_thrust(twist: Twist2D, params: &VehicleParams) -> WheelThrust {
    let r = params.wheel_radius;
    let half_turn = twist.omega * params.axle_length / 2.0;
    let mut right = (twist.v + half_turn) / r / params.max_wheel_rate;
    let mut left = (twist.v - half_turn) / r / params.max_wheel_rate;
    let peak = left.abs().max(right.abs());
    if peak > 1.0 {
        left /= peak;
        right /= peak;
    }
    WheelThrust::clamped(left, right)
}

pub fn dubins_to_thrust(ctrl: DubinsControl, params: &VehicleParams) -> WheelThrust {
    twist_to_thrust(
        Twist2D {
            v: ctrl.v0,
            omega: ctrl.omega0 * f64::from(ctrl.u),
        },
        params,
    )
}
