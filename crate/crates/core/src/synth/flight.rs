use std::f64::consts::PI;

use crate::geometry::UnitQuaternion;
use crate::{Pose, Vec3d};

use super::config::{DroneConfig, PathInterpolation, Waypoint};

/// Nadir camera with image +x along `yaw` on the ground, tilted by `pitch`.
pub fn camera_rotation(yaw: f64, pitch: f64) -> UnitQuaternion<f64> {
    UnitQuaternion::from_axis_angle(Vec3d::unit_z(), yaw)
        * UnitQuaternion::from_axis_angle(Vec3d::unit_x(), pitch)
        * UnitQuaternion::from_axis_angle(Vec3d::unit_x(), PI)
}

fn channels(w: &Waypoint) -> [f64; 5] {
    [w.position[0], w.position[1], w.position[2], w.yaw_deg.to_radians(), w.pitch_deg.to_radians()]
}

/// Position, yaw and pitch at `frame`; held constant outside the waypoint span.
pub fn sample_path(drone: &DroneConfig, frame: f64) -> [f64; 5] {
    let wps = &drone.waypoints;
    let first = &wps[0];
    let last = &wps[wps.len() - 1];
    if wps.len() == 1 || frame <= f64::from(first.frame) {
        return channels(first);
    }
    if frame >= f64::from(last.frame) {
        return channels(last);
    }
    let i = wps.partition_point(|w| f64::from(w.frame) <= frame) - 1;
    let (t0, t1) = (f64::from(wps[i].frame), f64::from(wps[i + 1].frame));
    let (p0, p1) = (channels(&wps[i]), channels(&wps[i + 1]));
    let u = (frame - t0) / (t1 - t0);
    match drone.interpolation {
        PathInterpolation::Linear => std::array::from_fn(|c| p0[c] + u * (p1[c] - p0[c])),
        PathInterpolation::Smooth => {
            let slope = |a: usize, b: usize| {
                let (pa, pb) = (channels(&wps[a]), channels(&wps[b]));
                let dt = f64::from(wps[b].frame) - f64::from(wps[a].frame);
                std::array::from_fn::<f64, 5, _>(|c| (pb[c] - pa[c]) / dt)
            };
            let m0 = slope(i.saturating_sub(1), i + 1);
            let m1 = slope(i, (i + 2).min(wps.len() - 1));
            let h = t1 - t0;
            let (u2, u3) = (u * u, u * u * u);
            let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
            let h10 = u3 - 2.0 * u2 + u;
            let h01 = -2.0 * u3 + 3.0 * u2;
            let h11 = u3 - u2;
            std::array::from_fn(|c| h00 * p0[c] + h10 * h * m0[c] + h01 * p1[c] + h11 * h * m1[c])
        }
    }
}

pub fn nominal_pose(drone: &DroneConfig, frame: u32) -> Pose {
    let [x, y, z, yaw, pitch] = sample_path(drone, f64::from(frame));
    Pose::new(camera_rotation(yaw, pitch), Vec3d::new(x, y, z))
}
