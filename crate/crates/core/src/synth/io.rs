use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::tracks::write_tracks;
use crate::unwrap::{write_deltas_csv, write_intrinsics, write_points_csv, write_pose_csv};

use super::scene::SyntheticScene;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SceneFiles {
    /// Logical name and path of every file written, in write order.
    pub files: Vec<(&'static str, PathBuf)>,
    pub warnings: Vec<String>,
}

/// Writes the scene in the formats the unwrapping commands read.
pub fn write_scene(scene: &SyntheticScene, dir: &Path) -> Result<SceneFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = SceneFiles::default();
    let mut add = |name: &'static str| {
        let p = dir.join(name);
        out.files.push((name, p.clone()));
        p
    };

    let config = serde_json::to_string_pretty(&scene.config).expect("config serializes");
    let p = add("scene.json");
    fs::write(&p, config + "\n").map_err(|e| Error::io(&p, e))?;
    write_tracks(&scene.truth, &add("truth_tracks.csv"))?;
    write_tracks(&scene.image, &add("image_tracks.csv"))?;
    write_tracks(&scene.landmark_observations(), &add("landmarks.csv"))?;
    write_pose_csv(&scene.poses, &add("poses.csv"))?;
    write_pose_csv(&scene.keyframe_subsample(scene.config.keyframe_stride)?.poses, &add("keyframes.csv"))?;
    write_intrinsics(&scene.intrinsics, &add("intrinsics.txt"))?;
    write_points_csv(&scene.ground_points, &add("ground_points.csv"))?;
    let deltas = scene.inplane_deltas(scene.config.keyframe_stride, scene.config.noise.delta_sigma_deg.to_radians());
    write_deltas_csv(&deltas, &add("deltas.csv"))?;
    match scene.estimated_chain() {
        Ok(chain) => chain.write(&add("chain.csv"))?,
        Err(Error::NotRepresentable(why)) => out.warnings.push(format!("no chain written: {why}")),
        Err(e) => return Err(e),
    }
    // meta sidecars belong to the track files
    let metas: Vec<(&'static str, PathBuf)> = ["truth_tracks.meta", "image_tracks.meta", "landmarks.meta"]
        .into_iter()
        .map(|n| (n, dir.join(n)))
        .collect();
    out.files.extend(metas);
    out.files.sort_by(|a, b| a.0.cmp(b.0));
    Ok(out)
}
