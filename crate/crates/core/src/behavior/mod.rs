//! Herd behavior metrics on unwrapped head/tail tracks.

mod binning;
mod clean;
mod herd;
mod io;
mod savgol;
mod vectors;

pub use binning::{bin_speed_polarization, BinRow};
pub use clean::{clean_tracks, removal_summary, CleanedTracks, CleaningParams, Removal, RemovalReason};
pub use herd::{
    centroid_kinematics, centroids, compute_herd_metrics, pearson, polarization, position_alignment_correlation,
    spacing_metrics, FrameMetrics, FrameOrientation, HerdMetrics, IndividualMetrics, Spacing, DIRECTION_EPS,
};
pub use io::{smooth_bins, write_bins, write_frame_metrics, write_individual_metrics};
pub use savgol::{savgol_smooth, Smoothed};
pub use vectors::{body_vectors, BodyVector, BodyVectorSeries};
