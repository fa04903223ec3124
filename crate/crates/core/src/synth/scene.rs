use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geometry::{project_to_plane_2d, UnitQuaternion};
use crate::tracks::{ImageObservation, ImageTrackSet, Keypoint, TrackKey, WorldObservation, WorldTrackSet};
use crate::unwrap::{KeyframePoseSet, TransformChain};
use crate::{Intrinsics, Plane3, PlaneChart, Pose, Rigid2d, Vec2d, Vec3d};

use super::config::SceneConfig;
use super::flight::nominal_pose;
use super::herd::simulate_herd;

/// Random streams split off the scene seed.
const STREAM_CHAIN: u64 = 1;
const STREAM_DELTAS: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub config: SceneConfig,
    /// Ground truth on z = 0: head/tail of every individual and every landmark, every frame.
    pub truth: WorldTrackSet,
    /// Projections inside the image, with pixel noise.
    pub image: ImageTrackSet,
    /// True camera pose of every frame.
    pub poses: BTreeMap<u32, Pose>,
    pub intrinsics: Intrinsics,
    pub plane: Plane3,
    pub landmarks: Vec<(String, Vec3d)>,
    /// Landmarks plus scattered ground samples, as a sparse reconstruction would give.
    pub ground_points: Vec<Vec3d>,
}

pub fn individual_id(i: usize) -> String {
    format!("z{:02}", i + 1)
}

pub fn landmark_id(i: usize) -> String {
    (i + 1).to_string()
}

fn normal(sigma: f64) -> Normal<f64> {
    Normal::new(0.0, sigma).expect("validated sigma")
}

pub fn generate_scene(config: &SceneConfig) -> Result<SyntheticScene> {
    config.validate()?;
    let intrinsics = config.intrinsics.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_frames;

    let lm = &config.landmarks;
    let sample_ground = |rng: &mut ChaCha8Rng| {
        Vec3d::new(rng.gen_range(lm.x_range[0]..=lm.x_range[1]), rng.gen_range(lm.y_range[0]..=lm.y_range[1]), 0.0)
    };
    let landmarks: Vec<(String, Vec3d)> =
        (0..config.n_landmarks).map(|i| (landmark_id(i), sample_ground(&mut rng))).collect();
    let mut ground_points: Vec<Vec3d> = landmarks.iter().map(|l| l.1).collect();
    ground_points.extend((0..lm.n_ground_points).map(|_| sample_ground(&mut rng)));

    let herd = simulate_herd(&config.herd, config.n_individuals, n, config.fps, &mut rng);

    let rot_jitter = normal(config.noise.rotation_jitter_deg.to_radians());
    let pos_jitter = normal(config.noise.translation_jitter);
    let mut poses = BTreeMap::new();
    for f in 0..n {
        let nominal = nominal_pose(&config.drone, f);
        let rv = Vec3d::new(rot_jitter.sample(&mut rng), rot_jitter.sample(&mut rng), rot_jitter.sample(&mut rng));
        let dp = Vec3d::new(pos_jitter.sample(&mut rng), pos_jitter.sample(&mut rng), pos_jitter.sample(&mut rng));
        let pose = Pose::new(nominal.rotation * UnitQuaternion::from_rotation_vector(rv), nominal.position + dp);
        if !(pose.position.z > 0.0) {
            return Err(Error::Config(format!("drone at frame {f} is not above the ground plane (z = {})", pose.position.z)));
        }
        poses.insert(f, pose);
    }

    let half = config.body_length / 2.0;
    let pixel_noise = normal(config.noise.pixel_sigma);
    let mut truth = WorldTrackSet::new(config.fps, n);
    let mut image = ImageTrackSet::new(config.fps, n);
    for f in 0..n {
        let pose = &poses[&f];
        let mut points: Vec<(String, Keypoint, Vec2d)> = Vec::with_capacity(2 * config.n_individuals + landmarks.len());
        for (i, a) in herd[f as usize].iter().enumerate() {
            let dir = Vec2d::new(a.heading.cos(), a.heading.sin()).scale(half);
            points.push((individual_id(i), Keypoint::Head, a.centroid + dir));
            points.push((individual_id(i), Keypoint::Tail, a.centroid - dir));
        }
        for (id, p) in &landmarks {
            points.push((id.clone(), Keypoint::Point, Vec2d::new(p.x, p.y)));
        }
        for (id, kp, xy) in points {
            let world = Vec3d::new(xy.x, xy.y, 0.0);
            let mut obs = WorldObservation::new(xy, Some(1.0));
            obs.point3 = Some(world);
            truth.insert_unchecked(TrackKey::new(f, id.clone(), kp), obs);
            // noise is drawn for every point so the stream does not depend on visibility
            let noise = Vec2d::new(pixel_noise.sample(&mut rng), pixel_noise.sample(&mut rng));
            if let Some(px) = intrinsics.project(pose, world) {
                let px = px + noise;
                if intrinsics.contains(px) {
                    image.insert_unchecked(TrackKey::new(f, id, kp), ImageObservation { pixel: px, confidence: Some(1.0) });
                }
            }
        }
    }

    Ok(SyntheticScene {
        config: config.clone(),
        truth,
        image,
        poses,
        intrinsics,
        plane: Plane3::ground(),
        landmarks,
        ground_points,
    })
}

/// Frames `{0, s, 2s, ...} ∪ {n - 1}`.
pub fn keyframe_frames(n_frames: u32, stride: u32) -> Vec<u32> {
    assert!(stride >= 1 && n_frames >= 1);
    let mut out: Vec<u32> = (0..n_frames).step_by(stride as usize).collect();
    if out.last() != Some(&(n_frames - 1)) {
        out.push(n_frames - 1);
    }
    out
}

impl SyntheticScene {
    pub fn n_frames(&self) -> u32 {
        self.config.n_frames
    }

    pub fn keyframe_subsample(&self, stride: u32) -> Result<KeyframePoseSet> {
        if stride == 0 {
            return Err(Error::Invalid("keyframe stride must be at least 1".into()));
        }
        let poses = keyframe_frames(self.n_frames(), stride).into_iter().map(|f| (f, self.poses[&f])).collect();
        KeyframePoseSet::new(poses, self.intrinsics)
    }

    /// Analytic frame-to-frame links in y-up registration space.
    ///
    /// For a nadir camera at height `h` with yaw `ψ`, a ground point `X` sits at
    /// `r = s R(-ψ)(X - c) + Q pp` with `s = f / h`, so the link `f -> f-1` is a
    /// rotation by `ψ_f - ψ_{f-1}` plus a translation fixed by the centers.
    pub fn exact_chain(&self) -> Result<TransformChain> {
        let intr = &self.intrinsics;
        if intr.fx != intr.fy {
            return Err(Error::NotRepresentable("fx differs from fy".into()));
        }
        if intr.has_distortion() {
            return Err(Error::NotRepresentable("lens distortion is not a rigid image motion".into()));
        }
        let h = self.poses[&0].position.z;
        let mut yaw = Vec::with_capacity(self.poses.len());
        for (f, p) in &self.poses {
            let axis = p.rotation.rotate(Vec3d::unit_z());
            if (axis.z + 1.0).abs() > 1e-12 || axis.x.abs() > 1e-9 || axis.y.abs() > 1e-9 {
                return Err(Error::NotRepresentable(format!("camera at frame {f} is not nadir")));
            }
            if (p.position.z - h).abs() > 1e-9 * h {
                return Err(Error::NotRepresentable(format!("altitude changes at frame {f}")));
            }
            let right = p.rotation.rotate(Vec3d::unit_x());
            yaw.push(right.y.atan2(right.x));
        }
        let s = intr.fx / h;
        let qpp = Vec2d::new(intr.cx, -intr.cy);
        let mut links = BTreeMap::new();
        for f in 1..self.n_frames() {
            let (c0, c1) = (self.poses[&(f - 1)].position, self.poses[&f].position);
            let theta = crate::scalar::wrap_angle(yaw[f as usize] - yaw[f as usize - 1]);
            let rot = Rigid2d::rotation(theta);
            let back = Rigid2d::rotation(-yaw[f as usize - 1]);
            let t = qpp - rot.apply(qpp) + back.apply(Vec2d::new(c1.x - c0.x, c1.y - c0.y)).scale(s);
            links.insert(f, Rigid2d::new(theta, t));
        }
        Ok(TransformChain::from_links(links))
    }

    /// Roll of each frame about the optical axis relative to its preceding
    /// keyframe, plus Gaussian noise of `sigma` radians on non-keyframes.
    pub fn inplane_deltas(&self, stride: u32, sigma: f64) -> BTreeMap<u32, f64> {
        let keys = keyframe_frames(self.n_frames(), stride);
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(STREAM_DELTAS);
        let noise = normal(sigma);
        let mut out = BTreeMap::new();
        for f in 0..self.n_frames() {
            let k0 = keys[keys.partition_point(|&k| k <= f) - 1];
            let rel = self.poses[&k0].rotation.inverse() * self.poses[&f].rotation;
            let e = noise.sample(&mut rng);
            out.insert(f, if k0 == f { 0.0 } else { rel.twist_about_z() + e });
        }
        out
    }

    /// Truth with positions in the chart coordinates of `basis`.
    pub fn truth_on_chart(&self, basis: &PlaneChart) -> WorldTrackSet {
        let mut out = WorldTrackSet::empty_like(&self.truth);
        for (k, o) in self.truth.iter() {
            let p3 = o.point3.expect("truth carries 3D points");
            let mut obs = WorldObservation::new(project_to_plane_2d(p3, basis), o.confidence);
            obs.point3 = Some(p3);
            out.insert_unchecked(k.clone(), obs);
        }
        out
    }

    /// Landmark projections only.
    pub fn landmark_observations(&self) -> ImageTrackSet {
        let mut out = self.image.clone();
        out.retain(|k, _| k.keypoint == Keypoint::Point);
        out
    }

    /// Animal projections only.
    pub fn animal_observations(&self) -> ImageTrackSet {
        let mut out = self.image.clone();
        out.retain(|k, _| k.keypoint != Keypoint::Point);
        out
    }

    /// Diagonal of the bounding box of all truth positions.
    pub fn extent(&self) -> f64 {
        let (mut lo, mut hi) = (Vec2d::new(f64::INFINITY, f64::INFINITY), Vec2d::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for (_, o) in self.truth.iter() {
            lo = Vec2d::new(lo.x.min(o.position.x), lo.y.min(o.position.y));
            hi = Vec2d::new(hi.x.max(o.position.x), hi.y.max(o.position.y));
        }
        lo.distance(hi)
    }

    /// The exact chain with the configured per-link noise.
    pub fn estimated_chain(&self) -> Result<TransformChain> {
        let n = &self.config.noise;
        Ok(perturb_chain(
            &self.exact_chain()?,
            n.chain_theta_sigma_deg.to_radians(),
            n.chain_translation_sigma,
            self.config.seed,
        ))
    }
}

/// Adds i.i.d. Gaussian noise to every link angle and translation.
pub fn perturb_chain(chain: &TransformChain, theta_sigma: f64, t_sigma: f64, seed: u64) -> TransformChain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM_CHAIN);
    let (dt, dxy) = (normal(theta_sigma), normal(t_sigma));
    let links = chain
        .transforms
        .iter()
        .map(|(f, t)| {
            let theta = t.theta + dt.sample(&mut rng);
            let off = Vec2d::new(dxy.sample(&mut rng), dxy.sample(&mut rng));
            (*f, Rigid2d::new(theta, t.t + off))
        })
        .collect();
    TransformChain::from_links(links)
}
