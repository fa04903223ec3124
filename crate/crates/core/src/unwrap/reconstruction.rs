//! Readers and writers for camera poses, intrinsics, ground points and
//! in-plane rotation deltas.
//!
//! The reconstruction JSON adapter follows the OpenSfM export: each shot stores
//! the camera-from-world rotation as an axis-angle vector `r` and translation
//! `t`, so `x_cam = R(r) x_world + t`. The camera center is `-Rᵀ t` and the
//! camera-to-world rotation is `Rᵀ`. Normalized focal lengths and principal
//! point offsets are scaled by `max(width, height)`, with pixel centers at
//! integer coordinates.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::format::{fmt_sig9, parse_f64_field, read_key_values, value_f64, write_key_values};
use crate::geometry::UnitQuaternion;
use crate::{Intrinsics, Pose, Vec3d};

use super::sfm::KeyframePoseSet;

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub keyframes: KeyframePoseSet,
    pub points: Vec<Vec3d>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ReconstructionDoc {
    Many(Vec<RawReconstruction>),
    One(RawReconstruction),
}

#[derive(Debug, Deserialize)]
struct RawReconstruction {
    cameras: BTreeMap<String, RawCamera>,
    shots: BTreeMap<String, RawShot>,
    #[serde(default)]
    points: BTreeMap<String, RawPoint>,
}

#[derive(Debug, Deserialize)]
struct RawCamera {
    projection_type: String,
    width: f64,
    height: f64,
    focal: Option<f64>,
    focal_x: Option<f64>,
    focal_y: Option<f64>,
    #[serde(default)]
    c_x: f64,
    #[serde(default)]
    c_y: f64,
    #[serde(default)]
    k1: f64,
    #[serde(default)]
    k2: f64,
    #[serde(default)]
    k3: f64,
    #[serde(default)]
    p1: f64,
    #[serde(default)]
    p2: f64,
}

#[derive(Debug, Deserialize)]
struct RawShot {
    rotation: [f64; 3],
    translation: [f64; 3],
    camera: String,
}

#[derive(Debug, Deserialize)]
struct RawPoint {
    coordinates: [f64; 3],
}

/// Frame number from a shot name: the last run of digits in the file stem.
pub fn frame_from_shot_name(name: &str) -> Result<u32> {
    let stem = Path::new(name).file_stem().and_then(|s| s.to_str()).unwrap_or(name);
    let digits: String = stem
        .chars()
        .rev()
        .skip_while(|c| !c.is_ascii_digit())
        .take_while(|c| c.is_ascii_digit())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    digits.parse().map_err(|_| Error::Naming(name.to_string()))
}

fn camera_intrinsics(cam: &RawCamera, warnings: &mut Vec<String>) -> Result<Intrinsics> {
    let (fx, fy) = match cam.projection_type.as_str() {
        "perspective" | "simple_radial" => {
            let f = cam
                .focal
                .ok_or_else(|| Error::Schema(format!("{} camera without focal", cam.projection_type)))?;
            (f, f)
        }
        "brown" | "radial" => match (cam.focal_x, cam.focal_y) {
            (Some(fx), Some(fy)) => (fx, fy),
            _ => return Err(Error::Schema(format!("{} camera without focal_x/focal_y", cam.projection_type))),
        },
        other => return Err(Error::Schema(format!("unsupported projection type {other:?}"))),
    };
    if cam.p1 != 0.0 || cam.p2 != 0.0 || cam.k3 != 0.0 {
        warnings.push("ignoring tangential (p1, p2) and k3 distortion terms".into());
    }
    let size = cam.width.max(cam.height);
    Intrinsics::new(
        fx * size,
        fy * size,
        cam.width / 2.0 - 0.5 + cam.c_x * size,
        cam.height / 2.0 - 0.5 + cam.c_y * size,
        cam.k1,
        cam.k2,
        cam.width,
        cam.height,
    )
}

/// Parses an OpenSfM-style `reconstruction.json`. Only the first
/// reconstruction is used, and it must have a single camera.
pub fn parse_reconstruction(path: &Path) -> Result<Reconstruction> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_reconstruction_str(&text)
}

pub fn parse_reconstruction_str(text: &str) -> Result<Reconstruction> {
    let doc: ReconstructionDoc =
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("reconstruction JSON: {e}")))?;
    let mut warnings = Vec::new();
    let rec = match doc {
        ReconstructionDoc::One(r) => r,
        ReconstructionDoc::Many(mut v) => {
            if v.is_empty() {
                return Err(Error::Schema("reconstruction list is empty".into()));
            }
            if v.len() > 1 {
                warnings.push(format!("using the first of {} reconstructions", v.len()));
            }
            v.swap_remove(0)
        }
    };
    if rec.cameras.len() != 1 {
        return Err(Error::Schema(format!(
            "expected a single shared camera, found {} (per-shot intrinsics are not supported)",
            rec.cameras.len()
        )));
    }
    let (cam_name, cam) = rec.cameras.iter().next().expect("one camera");
    let intrinsics = camera_intrinsics(cam, &mut warnings)?;

    let mut poses = BTreeMap::new();
    for (name, shot) in &rec.shots {
        if &shot.camera != cam_name {
            return Err(Error::Schema(format!("shot {name:?} references unknown camera {:?}", shot.camera)));
        }
        let frame = frame_from_shot_name(name)?;
        let cam_from_world = UnitQuaternion::from_rotation_vector(Vec3d::from(shot.rotation));
        let rotation = cam_from_world.inverse();
        let position = -rotation.rotate(Vec3d::from(shot.translation));
        if poses.insert(frame, Pose::new(rotation, position)).is_some() {
            return Err(Error::Schema(format!("two shots map to frame {frame}")));
        }
    }
    let points = rec.points.values().map(|p| Vec3d::from(p.coordinates)).collect();
    Ok(Reconstruction { keyframes: KeyframePoseSet::new(poses, intrinsics)?, points, warnings })
}

fn csv_rows(path: &Path, header: &str) -> Result<Vec<(u64, Vec<String>)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut out = Vec::new();
    let ncols = header.split(',').count();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        if i == 0 {
            if fields.join(",") != header {
                return Err(Error::parse(path, line, format!("expected header {header:?}")));
            }
            continue;
        }
        if fields.len() == 1 && fields[0].is_empty() {
            continue;
        }
        if fields.len() != ncols {
            return Err(Error::parse(path, line, format!("expected {ncols} fields, found {}", fields.len())));
        }
        out.push((line, fields));
    }
    if out.is_empty() && !path.exists() {
        return Err(Error::parse(path, 1, "missing header"));
    }
    Ok(out)
}

fn num(path: &Path, line: u64, raw: &str, name: &str) -> Result<f64> {
    parse_f64_field(raw, name).map_err(|m| Error::parse(path, line, m))
}

fn frame_field(path: &Path, line: u64, raw: &str) -> Result<u32> {
    raw.parse().map_err(|_| Error::parse(path, line, format!("frame: {raw:?} is not a non-negative integer")))
}

const POSE_HEADER: &str = "frame,qw,qx,qy,qz,x,y,z";

/// Native pose CSV: camera-to-world quaternion and camera center per frame.
pub fn read_pose_csv(path: &Path) -> Result<BTreeMap<u32, Pose>> {
    let mut poses = BTreeMap::new();
    for (line, f) in csv_rows(path, POSE_HEADER)? {
        let frame = frame_field(path, line, &f[0])?;
        let v: Vec<f64> = (1..8)
            .map(|i| num(path, line, &f[i], POSE_HEADER.split(',').nth(i).unwrap_or("")))
            .collect::<Result<_>>()?;
        let rotation = UnitQuaternion::try_new(v[0], v[1], v[2], v[3])
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        if poses.insert(frame, Pose::new(rotation, Vec3d::new(v[4], v[5], v[6]))).is_some() {
            return Err(Error::integrity(path, line, format!("duplicate frame {frame}")));
        }
    }
    Ok(poses)
}

pub fn write_pose_csv(poses: &BTreeMap<u32, Pose>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{POSE_HEADER}").map_err(io)?;
    for (f, p) in poses {
        let q = p.rotation.components();
        let c = p.position;
        let fields = [q[0], q[1], q[2], q[3], c.x, c.y, c.z].map(fmt_sig9);
        writeln!(w, "{f},{}", fields.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

const INTRINSIC_KEYS: [&str; 8] = ["fx", "fy", "cx", "cy", "k1", "k2", "width", "height"];

pub fn read_intrinsics(path: &Path) -> Result<Intrinsics> {
    let kv = read_key_values(path)?;
    let v: Vec<f64> = INTRINSIC_KEYS.iter().map(|k| value_f64(&kv, k, path)).collect::<Result<_>>()?;
    Intrinsics::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7])
}

pub fn write_intrinsics(intr: &Intrinsics, path: &Path) -> Result<()> {
    let vals = [intr.fx, intr.fy, intr.cx, intr.cy, intr.k1, intr.k2, intr.width, intr.height];
    write_key_values(path, INTRINSIC_KEYS.iter().copied().zip(vals.map(fmt_sig9)))
}

pub fn read_points_csv(path: &Path) -> Result<Vec<Vec3d>> {
    csv_rows(path, "x,y,z")?
        .into_iter()
        .map(|(line, f)| {
            Ok(Vec3d::new(num(path, line, &f[0], "x")?, num(path, line, &f[1], "y")?, num(path, line, &f[2], "z")?))
        })
        .collect()
}

pub fn write_points_csv(points: &[Vec3d], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "x,y,z").map_err(io)?;
    for p in points {
        writeln!(w, "{},{},{}", fmt_sig9(p.x), fmt_sig9(p.y), fmt_sig9(p.z)).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// In-plane rotation deltas (`frame,delta_rad`) relative to the preceding keyframe.
pub fn read_deltas_csv(path: &Path) -> Result<BTreeMap<u32, f64>> {
    let mut out = BTreeMap::new();
    for (line, f) in csv_rows(path, "frame,delta_rad")? {
        let frame = frame_field(path, line, &f[0])?;
        if out.insert(frame, num(path, line, &f[1], "delta_rad")?).is_some() {
            return Err(Error::integrity(path, line, format!("duplicate frame {frame}")));
        }
    }
    Ok(out)
}

pub fn write_deltas_csv(deltas: &BTreeMap<u32, f64>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "frame,delta_rad").map_err(io)?;
    for (f, d) in deltas {
        writeln!(w, "{f},{}", fmt_sig9(*d)).map_err(io)?;
    }
    w.flush().map_err(io)
}
