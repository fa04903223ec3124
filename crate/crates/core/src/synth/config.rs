use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Intrinsics;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntrinsicsConfig {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    #[serde(default)]
    pub k1: f64,
    #[serde(default)]
    pub k2: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for IntrinsicsConfig {
    fn default() -> Self {
        Self { fx: 2300.0, fy: 2300.0, cx: 1919.5, cy: 1079.5, k1: 0.0, k2: 0.0, width: 3840.0, height: 2160.0 }
    }
}

impl IntrinsicsConfig {
    pub fn build(&self) -> Result<Intrinsics> {
        Intrinsics::new(self.fx, self.fy, self.cx, self.cy, self.k1, self.k2, self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub frame: u32,
    pub position: [f64; 3],
    /// Heading of image +x on the ground, counterclockwise from world +x.
    #[serde(default)]
    pub yaw_deg: f64,
    /// Tilt of the optical axis away from nadir, about the camera x axis.
    #[serde(default)]
    pub pitch_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathInterpolation {
    /// Piecewise constant velocity and angular rate.
    Linear,
    /// C1 cubic Hermite through the waypoints.
    #[default]
    Smooth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DroneConfig {
    pub waypoints: Vec<Waypoint>,
    #[serde(default)]
    pub interpolation: PathInterpolation,
}

impl Default for DroneConfig {
    fn default() -> Self {
        let wp = |frame, x, y, yaw_deg| Waypoint { frame, position: [x, y, 120.0], yaw_deg, pitch_deg: 0.0 };
        Self {
            waypoints: vec![
                wp(0, 0.0, 0.0, 0.0),
                wp(1500, 45.0, 8.0, 10.0),
                wp(3000, 100.0, -5.0, 25.0),
                wp(4500, 160.0, 6.0, 15.0),
                wp(6293, 220.0, 0.0, 30.0),
            ],
            interpolation: PathInterpolation::Smooth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HerdConfig {
    pub start: [f64; 2],
    /// Radius of the disc the individuals start in.
    pub spread: f64,
    pub heading_deg: f64,
    /// Amplitude of the slow shared heading swing.
    pub heading_swing_deg: f64,
    /// Per-frame heading noise of each individual.
    pub heading_noise_deg: f64,
    /// Per-frame pull of each heading toward the shared one, in [0, 1].
    pub heading_pull: f64,
    /// Number of movement bursts over the clip.
    pub waves: u32,
    pub base_speed: f64,
    pub wave_speed: f64,
}

impl Default for HerdConfig {
    fn default() -> Self {
        Self {
            start: [0.0, 0.0],
            spread: 12.0,
            heading_deg: 0.0,
            heading_swing_deg: 10.0,
            heading_noise_deg: 1.0,
            heading_pull: 0.05,
            waves: 4,
            base_speed: 0.3,
            wave_speed: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LandmarkConfig {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    /// Extra ground points sampled for the plane fit.
    pub n_ground_points: usize,
}

impl Default for LandmarkConfig {
    fn default() -> Self {
        Self { x_range: [-60.0, 280.0], y_range: [-40.0, 40.0], n_ground_points: 200 }
    }
}

/// Noise on the rendered scene and on the estimates written beside it.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    /// Isotropic Gaussian noise on every projected keypoint, pixels.
    pub pixel_sigma: f64,
    /// Per-frame camera rotation jitter, per axis, degrees.
    pub rotation_jitter_deg: f64,
    /// Per-frame camera position jitter, per axis, world units.
    pub translation_jitter: f64,
    /// Noise on each chain link angle, degrees.
    pub chain_theta_sigma_deg: f64,
    /// Noise on each chain link translation, pixels.
    pub chain_translation_sigma: f64,
    /// Noise on each in-plane rotation delta, degrees.
    pub delta_sigma_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub n_individuals: usize,
    pub n_landmarks: usize,
    pub n_frames: u32,
    pub fps: f64,
    pub body_length: f64,
    pub intrinsics: IntrinsicsConfig,
    pub drone: DroneConfig,
    pub herd: HerdConfig,
    pub landmarks: LandmarkConfig,
    pub noise: NoiseConfig,
    pub keyframe_stride: u32,
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            n_individuals: 44,
            n_landmarks: 45,
            n_frames: 6294,
            fps: crate::tracks::DEFAULT_FPS,
            body_length: 2.5,
            intrinsics: IntrinsicsConfig::default(),
            drone: DroneConfig::default(),
            herd: HerdConfig::default(),
            landmarks: LandmarkConfig::default(),
            noise: NoiseConfig::default(),
            keyframe_stride: 20,
            seed: 0,
        }
    }
}

impl SceneConfig {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json { path: path.to_path_buf(), source: e })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_frames < 2 {
            return bad(format!("n_frames must be at least 2, got {}", self.n_frames));
        }
        if !(self.fps > 0.0) || !(self.body_length > 0.0) {
            return bad("fps and body_length must be positive".into());
        }
        if self.keyframe_stride == 0 {
            return bad("keyframe_stride must be at least 1".into());
        }
        let wps = &self.drone.waypoints;
        if wps.is_empty() {
            return bad("drone path needs at least one waypoint".into());
        }
        if wps.windows(2).any(|w| w[1].frame <= w[0].frame) {
            return bad("waypoint frames must be strictly increasing".into());
        }
        if wps.iter().any(|w| w.position.iter().any(|v| !v.is_finite())) {
            return bad("waypoint positions must be finite".into());
        }
        let n = &self.noise;
        let sigmas = [
            n.pixel_sigma,
            n.rotation_jitter_deg,
            n.translation_jitter,
            n.chain_theta_sigma_deg,
            n.chain_translation_sigma,
            n.delta_sigma_deg,
            self.herd.heading_noise_deg,
        ];
        if sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return bad("noise levels must be finite and non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.herd.heading_pull) {
            return bad("heading_pull must lie in [0, 1]".into());
        }
        let l = &self.landmarks;
        if !(l.x_range[0] <= l.x_range[1] && l.y_range[0] <= l.y_range[1]) {
            return bad("landmark ranges must be ordered".into());
        }
        self.intrinsics.build().map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_json_is_the_default_scene() {
        let c = SceneConfig::from_json("{}").unwrap();
        assert_eq!(c, SceneConfig::default());
        assert_eq!((c.n_individuals, c.n_landmarks, c.n_frames), (44, 45, 6294));
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(SceneConfig::from_json(r#"{"n_frame": 3}"#).is_err());
    }

    #[test]
    fn waypoints_must_increase() {
        let mut c = SceneConfig::default();
        c.drone.waypoints[1].frame = 0;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }
}
