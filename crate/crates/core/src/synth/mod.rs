//! Synthetic herd, landmarks and drone flight with exact ground truth.

mod config;
mod flight;
mod herd;
mod io;
mod scene;

pub use config::{DroneConfig, HerdConfig, IntrinsicsConfig, LandmarkConfig, NoiseConfig, PathInterpolation, SceneConfig, Waypoint};
pub use flight::{camera_rotation, nominal_pose, sample_path};
pub use herd::{simulate_herd, speed_envelope, AnimalState};
pub use io::{write_scene, SceneFiles};
pub use scene::{generate_scene, individual_id, keyframe_frames, landmark_id, perturb_chain, SyntheticScene};
