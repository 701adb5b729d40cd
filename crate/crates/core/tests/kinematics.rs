use micromvp::vehicle::{
    constant_thrust_closed_form, ddr_derivative, dubins_to_thrust, integrate, thrust_to_twist, twist_to_thrust,
    DubinsControl, Twist2D,
};
use micromvp::{Pose2D, VehicleParams, WheelThrust};
use proptest::prelude::*;

// Rotation of the start point about the instantaneous center of curvature,
// written independently of the library's closed form.
fn icc_oracle(pose: &Pose2D, ul: f64, ur: f64, p: &VehicleParams, t: f64) -> (f64, f64, f64) {
    let wl = ul * p.max_wheel_rate;
    let wr = ur * p.max_wheel_rate;
    let v = p.wheel_radius * (wl + wr) / 2.0;
    let omega = p.wheel_radius * (wr - wl) / p.axle_length;
    if omega == 0.0 {
        return (pose.x + v * t * pose.theta.cos(), pose.y + v * t * pose.theta.sin(), pose.theta);
    }
    let radius = p.axle_length / 2.0 * (ur + ul) / (ur - ul);
    let cx = pose.x - radius * pose.theta.sin();
    let cy = pose.y + radius * pose.theta.cos();
    let (s, c) = (omega * t).sin_cos();
    let (dx, dy) = (pose.x - cx, pose.y - cy);
    (cx + c * dx - s * dy, cy + s * dx + c * dy, pose.theta + omega * t)
}

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(std::f64::consts::TAU);
    if r > std::f64::consts::PI {
        r - std::f64::consts::TAU
    } else {
        r
    }
}

fn params() -> impl Strategy<Value = VehicleParams> {
    (0.01..0.025f64, 0.04..0.08f64, 0.1..0.4f64).prop_map(|(r, l, top)| VehicleParams {
        wheel_radius: r,
        axle_length: l,
        max_wheel_rate: top / r,
        body_radius: l,
    })
}

fn pose() -> impl Strategy<Value = Pose2D> {
    (-1.0..1.0f64, -1.0..1.0f64, -3.1..3.1f64).prop_map(|(x, y, t)| Pose2D::new(x, y, t))
}

fn thrust() -> impl Strategy<Value = WheelThrust> {
    (-1.0..=1.0f64, -1.0..=1.0f64).prop_map(|(l, r)| WheelThrust::new(l, r).unwrap())
}

fn run(pose: Pose2D, u: WheelThrust, p: &VehicleParams, dt: f64, steps: usize) -> Pose2D {
    (0..steps).fold(pose, |q, _| integrate(&q, u, p, dt).unwrap())
}

#[test]
fn closed_form_matches_independent_icc_construction() {
    let p = VehicleParams {
        wheel_radius: 1.0,
        axle_length: 1.0,
        max_wheel_rate: 1.0,
        body_radius: 1.0,
    };
    let q = constant_thrust_closed_form(&Pose2D::default(), WheelThrust::new(0.0, 1.0).unwrap(), &p, std::f64::consts::PI);
    let (x, y, th) = icc_oracle(&Pose2D::default(), 0.0, 1.0, &p, std::f64::consts::PI);
    assert!((q.x - x).abs() < 1e-12 && (q.y - y).abs() < 1e-12);
    assert!((q.x - 0.0).abs() < 1e-12 && (q.y - 1.0).abs() < 1e-12);
    assert!((wrap(q.theta - th)).abs() < 1e-12);
}

#[test]
fn derivative_matches_substitution() {
    let p = VehicleParams {
        wheel_radius: 0.02,
        axle_length: 0.08,
        max_wheel_rate: 1.0,
        body_radius: 0.05,
    };
    let (dx, dy, dth) = ddr_derivative(
        &Pose2D::new(0.0, 0.0, std::f64::consts::FRAC_PI_2),
        WheelThrust::new(0.2, 0.4).unwrap(),
        &p,
    );
    assert!(dx.abs() < 1e-15);
    assert!((dy - 0.006).abs() < 1e-15);
    assert!((dth - 0.05).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rk4_tracks_icc_oracle(p in params(), q in pose(), u in thrust()) {
        let end = run(q, u, &p, 0.01, 1000);
        let (x, y, th) = icc_oracle(&q, u.left(), u.right(), &p, 10.0);
        prop_assert!((end.x - x).hypot(end.y - y) < 1e-6);
        prop_assert!(wrap(end.theta - th).abs() < 1e-6);
    }

    #[test]
    fn rigid_motion_equivariance(p in params(), q in pose(), g in pose(), u in thrust()) {
        let a = integrate(&q.transformed_by(&g), u, &p, 0.05).unwrap();
        let b = integrate(&q, u, &p, 0.05).unwrap().transformed_by(&g);
        prop_assert!((a.x - b.x).abs() < 1e-12 && (a.y - b.y).abs() < 1e-12);
        prop_assert!(wrap(a.theta - b.theta).abs() < 1e-12);
    }

    #[test]
    fn swapped_wheels_mirror_the_trajectory(p in params(), q in pose(), u in thrust()) {
        let a = run(q, u, &p, 0.02, 50);
        let b = run(q, u.swapped(), &p, 0.02, 50);
        // Express both ends in the start frame; the mirror flips y and heading.
        let la = (a.position() - q.position()).rotated(-q.theta);
        let lb = (b.position() - q.position()).rotated(-q.theta);
        prop_assert!((la.x - lb.x).abs() < 1e-12 && (la.y + lb.y).abs() < 1e-12);
        prop_assert!(wrap((a.theta - q.theta) + (b.theta - q.theta)).abs() < 1e-12);
    }

    #[test]
    fn halving_dt_cuts_error_by_eight(q in pose(), ur in 0.5..1.0f64, ul in -1.0..0.0f64) {
        // A fast spin keeps the error well above rounding.
        let p = VehicleParams { wheel_radius: 0.05, axle_length: 0.05, max_wheel_rate: 20.0, body_radius: 0.05 };
        let u = WheelThrust::new(ul, ur).unwrap();
        let (x, y, _) = icc_oracle(&q, ul, ur, &p, 1.0);
        let coarse = run(q, u, &p, 0.1, 10);
        let fine = run(q, u, &p, 0.05, 20);
        let e1 = (coarse.x - x).hypot(coarse.y - y);
        let e2 = (fine.x - x).hypot(fine.y - y);
        prop_assert!(e1 >= 8.0 * e2, "e(dt)={e1} e(dt/2)={e2}");
    }

    #[test]
    fn twist_roundtrip_and_curvature(p in params(), u in thrust(), gain in 1.0..5.0f64) {
        let back = twist_to_thrust(thrust_to_twist(u, &p), &p);
        prop_assert!((back.left() - u.left()).abs() < 1e-12 && (back.right() - u.right()).abs() < 1e-12);
        let tw = thrust_to_twist(u, &p);
        let big = Twist2D { v: tw.v * gain, omega: tw.omega * gain };
        let sat = twist_to_thrust(big, &p);
        prop_assert!(sat.peak() <= 1.0 + 1e-12);
        let out = thrust_to_twist(sat, &p);
        if tw.v.abs() > 1e-6 {
            prop_assert!((out.omega / out.v - tw.omega / tw.v).abs() < 1e-9 * (1.0 + (tw.omega / tw.v).abs()));
        }
    }

    #[test]
    fn dubins_turn_direction_mirrors(p in params(), v0 in 0.0..0.2f64, w0 in 0.0..5.0f64) {
        let left = dubins_to_thrust(DubinsControl::new(v0, w0, 1).unwrap(), &p);
        let right = dubins_to_thrust(DubinsControl::new(v0, w0, -1).unwrap(), &p);
        prop_assert_eq!(left.swapped(), right);
    }
}
