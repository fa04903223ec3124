//! Pose-based unwrapping: densify keyframe poses, cast each pixel onto the
//! ground plane and chart the hit onto 2D plane coordinates.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    fit_plane, interpolate_pose, pixel_to_ray, project_to_plane_2d, ray_plane_intersect, UnitQuaternion,
};
use crate::tracks::{ImageObservation, ImageTrackSet, TrackKey, WorldObservation, WorldTrackSet};
use crate::{Intrinsics, Plane3, PlaneChart, Pose, Vec3d};

use super::UnwrapReport;

/// Camera poses at keyframes, sharing one set of intrinsics.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyframePoseSet {
    pub poses: BTreeMap<u32, Pose>,
    pub intrinsics: Intrinsics,
    /// Most common spacing between consecutive keyframes.
    pub keyframe_stride: u32,
}

impl KeyframePoseSet {
    pub fn new(poses: BTreeMap<u32, Pose>, intrinsics: Intrinsics) -> Result<Self> {
        if poses.len() < 2 {
            return Err(Error::Invalid(format!("need at least 2 keyframes, got {}", poses.len())));
        }
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for w in poses.keys().collect::<Vec<_>>().windows(2) {
            *counts.entry(w[1] - w[0]).or_default() += 1;
        }
        let keyframe_stride = counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(s, _)| *s)
            .unwrap_or(1);
        Ok(Self { poses, intrinsics, keyframe_stride })
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn first_frame(&self) -> u32 {
        *self.poses.keys().next().expect("at least two keyframes")
    }

    pub fn last_frame(&self) -> u32 {
        *self.poses.keys().next_back().expect("at least two keyframes")
    }

    /// Keyframes bracketing `frame`: `(k0, k1)` with `k0 <= frame <= k1`.
    fn bracket(&self, frame: u32) -> Result<((u32, &Pose), (u32, &Pose))> {
        let (first, last) = (self.first_frame(), self.last_frame());
        if frame < first || frame > last {
            return Err(Error::Extrapolation { frame, first, last });
        }
        let (&k0, p0) = self.poses.range(..=frame).next_back().expect("frame >= first");
        let (&k1, p1) = self.poses.range(frame..).next().expect("frame <= last");
        Ok(((k0, p0), (k1, p1)))
    }
}

/// Sparse ground points with their best-fit plane and a 2D chart on it.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundModel {
    pub points: Vec<Vec3d>,
    pub plane: Plane3,
    pub basis: PlaneChart,
}

pub fn build_ground_model(points: Vec<Vec3d>) -> Result<GroundModel> {
    let plane = fit_plane(&points)?;
    let centroid = Vec3d::mean(&points).expect("plane fit needs points");
    let basis = PlaneChart::from_plane(&plane, centroid)?;
    Ok(GroundModel { points, plane, basis })
}

#[derive(Debug, Clone, PartialEq)]
pub enum RotationStrategy {
    /// Constant angular velocity between bracketing keyframes.
    Slerp,
    /// Preceding keyframe rotation followed by a roll of `deltas[f]` radians
    /// about the camera optical axis.
    InplaneDelta(BTreeMap<u32, f64>),
}

/// Poses for every frame in `range`. Positions are always linear between the
/// bracketing keyframes; keyframes return their own pose exactly.
pub fn densify_poses(
    keyframes: &KeyframePoseSet,
    strategy: &RotationStrategy,
    range: RangeInclusive<u32>,
) -> Result<BTreeMap<u32, Pose>> {
    let frames: Vec<u32> = range.collect();
    let poses: Vec<Result<(u32, Pose)>> = frames
        .par_iter()
        .map(|&f| densify_frame(keyframes, strategy, f).map(|p| (f, p)))
        .collect();
    poses.into_iter().collect()
}

fn densify_frame(keyframes: &KeyframePoseSet, strategy: &RotationStrategy, frame: u32) -> Result<Pose> {
    let ((k0, p0), (k1, p1)) = keyframes.bracket(frame)?;
    if k0 == frame {
        return Ok(*p0);
    }
    let u = f64::from(frame - k0) / f64::from(k1 - k0);
    match strategy {
        RotationStrategy::Slerp => interpolate_pose(p0, p1, u),
        RotationStrategy::InplaneDelta(deltas) => {
            let delta = *deltas.get(&frame).ok_or(Error::MissingDelta { frame })?;
            let roll = UnitQuaternion::from_axis_angle(Vec3d::unit_z(), delta);
            // positions: same linear rule as slerp; the rotation result is discarded
            let linear = interpolate_pose(p0, p1, u)?;
            Ok(Pose::new(p0.rotation * roll, linear.position))
        }
    }
}

/// Lifts every pixel onto the ground plane and charts it. Entries without a
/// pose, or whose ray misses the plane, are dropped and counted.
pub fn unwrap_sfm(
    tracks: &ImageTrackSet,
    poses: &BTreeMap<u32, Pose>,
    intr: &Intrinsics,
    ground: &GroundModel,
) -> (WorldTrackSet, UnwrapReport) {
    let entries: Vec<(&TrackKey, &ImageObservation)> = tracks.iter().collect();
    let mapped: Vec<std::result::Result<(WorldObservation, bool), &'static str>> = entries
        .par_iter()
        .map(|(k, o)| {
            let pose = poses.get(&k.frame).ok_or("no_pose")?;
            let ray = pixel_to_ray(intr, pose, o.pixel).map_err(|_| "distortion_inversion")?;
            let hit = ray_plane_intersect(&ray, &ground.plane).map_err(|e| match e {
                Error::ParallelRay => "parallel_ray",
                _ => "behind_camera",
            })?;
            let mut obs = WorldObservation::new(project_to_plane_2d(hit, &ground.basis), o.confidence);
            obs.point3 = Some(hit);
            Ok((obs, intr.contains(o.pixel)))
        })
        .collect();

    let mut out = WorldTrackSet::empty_like(tracks);
    let mut report = UnwrapReport { entries_in: entries.len(), ..Default::default() };
    for ((k, _), m) in entries.into_iter().zip(mapped) {
        match m {
            Ok((obs, inside)) => {
                if !inside {
                    report.out_of_bounds_pixels += 1;
                }
                out.insert_unchecked(k.clone(), obs);
            }
            Err(reason) => {
                report.drop(reason);
                if reason == "no_pose" && report.missing_frames.last() != Some(&k.frame) {
                    report.missing_frames.push(k.frame);
                }
            }
        }
    }
    report.entries_out = out.len();
    (out, report)
}
