//! Moving-camera to ground-fixed unwrapping.

pub mod registration;
pub mod reconstruction;
pub mod sfm;

pub use reconstruction::{
    parse_reconstruction, parse_reconstruction_str, read_deltas_csv, read_intrinsics, read_points_csv, read_pose_csv,
    write_deltas_csv, write_intrinsics, write_points_csv, write_pose_csv, Reconstruction,
};
pub use registration::{estimate_chain_from_landmarks, load_chain, unwrap_registration, AxisConvention, TransformChain};
pub use sfm::{build_ground_model, densify_poses, unwrap_sfm, GroundModel, KeyframePoseSet, RotationStrategy};

use std::collections::BTreeMap;

use serde::Serialize;

/// What an unwrapping pass dropped, and why.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct UnwrapReport {
    pub entries_in: usize,
    pub entries_out: usize,
    /// Dropped entry counts by reason.
    pub dropped: BTreeMap<String, usize>,
    /// Frames that carried entries but had no transform or pose.
    pub missing_frames: Vec<u32>,
    /// Pixels outside the sensor that were still unwrapped.
    pub out_of_bounds_pixels: usize,
}

impl UnwrapReport {
    pub(crate) fn drop(&mut self, reason: &str) {
        *self.dropped.entry(reason.to_string()).or_default() += 1;
    }

    pub fn dropped_total(&self) -> usize {
        self.dropped.values().sum()
    }
}
