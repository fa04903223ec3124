use std::fs;
use std::path::{Path, PathBuf};

use crate::behavior::{
    bin_speed_polarization, body_vectors, clean_tracks, compute_herd_metrics, removal_summary, smooth_bins, write_bins,
    write_frame_metrics, write_individual_metrics, CleanedTracks, CleaningParams,
};
use crate::error::{Error, Result};
use crate::eval::{weighted_dispersion, DispersionReport};
use crate::format::fmt_sig9;
use crate::synth::{generate_scene, write_scene, SceneConfig};
use crate::tracks::{
    filter_landmark_tracks, read_tracks, read_world_tracks, write_tracks, ImageTrackSet, Keypoint, LandmarkFilter,
    WorldTrackSet,
};
use crate::unwrap::{
    build_ground_model, densify_poses, estimate_chain_from_landmarks, load_chain, parse_reconstruction, read_deltas_csv,
    read_intrinsics, read_points_csv, read_pose_csv, unwrap_registration, unwrap_sfm, AxisConvention, GroundModel,
    KeyframePoseSet, RotationStrategy, TransformChain, UnwrapReport,
};
use crate::Vec3d;

use super::manifest::{parent_dir, RunManifest};
use super::{
    AxisArg, CleaningArgs, Command, CompareArgs, EvalTreesArgs, LandmarkFilterArgs, MetricsArgs, RotationArg, SynthArgs,
    UnwrapRegArgs, UnwrapSfmArgs,
};

pub(super) fn dispatch(cmd: &Command) -> Result<()> {
    match cmd {
        Command::UnwrapReg(a) => unwrap_reg(a),
        Command::UnwrapSfm(a) => unwrap_sfm_cmd(a),
        Command::EvalTrees(a) => eval_trees(a),
        Command::Metrics(a) => metrics(a),
        Command::Synth(a) => synth(a),
        Command::Compare(a) => compare(a),
    }
}

fn axis(q: AxisArg) -> AxisConvention {
    match q {
        AxisArg::Yflip => AxisConvention::y_flip(),
        AxisArg::Identity => AxisConvention::identity(),
    }
}

fn landmark_filter(a: &LandmarkFilterArgs) -> LandmarkFilter {
    LandmarkFilter { min_samples: a.min_samples, max_jump: a.max_jump }
}

fn cleaning(a: &CleaningArgs) -> CleaningParams {
    CleaningParams { confidence_threshold: a.confidence, jump_factor: a.jump_factor }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Splits image tracks into animals and quality-filtered landmarks.
fn split_landmarks(tracks: &ImageTrackSet, filter: LandmarkFilter) -> (ImageTrackSet, ImageTrackSet) {
    let mut animals = tracks.clone();
    animals.retain(|k, _| k.keypoint != Keypoint::Point);
    let mut points = tracks.clone();
    points.retain(|k, _| k.keypoint == Keypoint::Point);
    (animals, filter_landmark_tracks(&points, filter))
}

fn merge(a: &ImageTrackSet, b: &ImageTrackSet) -> ImageTrackSet {
    let mut out = a.clone();
    for (k, o) in b.iter() {
        out.insert_unchecked(k.clone(), *o);
    }
    out
}

fn note_report(m: &mut RunManifest, key: &str, report: &UnwrapReport) {
    if report.dropped_total() > 0 {
        m.warn(format!("{key}: dropped {} of {} entries {:?}", report.dropped_total(), report.entries_in, report.dropped));
    }
    m.count(key, report);
}

fn chain_for(
    m: &mut RunManifest,
    chain: Option<&PathBuf>,
    landmarks: &ImageTrackSet,
    min_pairs: usize,
    q: &AxisConvention,
) -> Result<TransformChain> {
    let chain = match chain {
        Some(p) => {
            m.input("chain", p)?;
            load_chain(p)?
        }
        None => estimate_chain_from_landmarks(landmarks, min_pairs, q)?,
    };
    if let Some(first) = chain.gaps.first() {
        m.warn(format!("chain has {} gap(s); frames from {first} on cannot be unwrapped", chain.gaps.len()));
    }
    Ok(chain)
}

fn unwrap_reg(a: &UnwrapRegArgs) -> Result<()> {
    let mut m = RunManifest::new("unwrap-reg");
    m.param("q", format!("{:?}", a.q).to_lowercase());
    m.param("min_pairs", a.min_pairs);
    m.param("min_samples", a.filter.min_samples);
    m.param("max_jump", a.filter.max_jump);
    m.input("tracks", &a.tracks)?;
    let tracks = read_tracks(&a.tracks)?;
    let q = axis(a.q);
    let landmarks = match (&a.chain, &a.landmarks) {
        (None, Some(l)) => {
            m.input("landmarks", l)?;
            filter_landmark_tracks(&read_tracks(l)?, landmark_filter(&a.filter))
        }
        (Some(_), Some(_)) => {
            m.warn("--landmarks ignored because --chain was given");
            ImageTrackSet::empty_like(&tracks)
        }
        _ => ImageTrackSet::empty_like(&tracks),
    };
    let chain = chain_for(&mut m, a.chain.as_ref(), &landmarks, a.min_pairs, &q)?;
    m.count("chain_links", chain.len());
    let (world, report) = unwrap_registration(&tracks, &chain, &q);
    let dir = parent_dir(&a.out);
    ensure_dir(&dir)?;
    write_tracks(&world, &a.out)?;
    m.output("world", &a.out)?;
    if let Some(p) = &a.chain_out {
        chain.write(p)?;
        m.output("chain", p)?;
    }
    if let Some(p) = &a.report {
        write_json(p, &report)?;
        m.output("report", p)?;
    }
    note_report(&mut m, "unwrap", &report);
    m.write(&dir)?;
    Ok(())
}

struct PoseInputs {
    keyframes: KeyframePoseSet,
    ground: GroundModel,
}

fn load_pose_inputs(m: &mut RunManifest, poses: &Path, intrinsics: Option<&PathBuf>, points: Option<&PathBuf>) -> Result<PoseInputs> {
    m.input("poses", poses)?;
    let is_json = poses.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let (keyframes, recon_points) = if is_json {
        let r = parse_reconstruction(poses)?;
        for w in &r.warnings {
            m.warn(w.clone());
        }
        let mut keyframes = r.keyframes;
        if let Some(p) = intrinsics {
            m.input("intrinsics", p)?;
            m.warn("--intrinsics overrides the reconstruction camera");
            keyframes = KeyframePoseSet::new(keyframes.poses, read_intrinsics(p)?)?;
        }
        (keyframes, Some(r.points))
    } else {
        let p = intrinsics.ok_or_else(|| Error::Config("--intrinsics is required with a pose CSV".into()))?;
        m.input("intrinsics", p)?;
        (KeyframePoseSet::new(read_pose_csv(poses)?, read_intrinsics(p)?)?, None)
    };
    let pts: Vec<Vec3d> = match (points, recon_points) {
        (Some(p), _) => {
            m.input("points", p)?;
            read_points_csv(p)?
        }
        (None, Some(p)) => p,
        (None, None) => return Err(Error::Config("--points is required with a pose CSV".into())),
    };
    m.count("keyframes", keyframes.len());
    m.count("keyframe_stride", keyframes.keyframe_stride);
    m.count("ground_points", pts.len());
    Ok(PoseInputs { keyframes, ground: build_ground_model(pts)? })
}

fn sfm_world(inputs: &PoseInputs, strategy: &RotationStrategy, tracks: &ImageTrackSet) -> Result<(WorldTrackSet, UnwrapReport)> {
    let range = inputs.keyframes.first_frame()..=inputs.keyframes.last_frame();
    let poses = densify_poses(&inputs.keyframes, strategy, range)?;
    Ok(unwrap_sfm(tracks, &poses, &inputs.keyframes.intrinsics, &inputs.ground))
}

fn strategy(m: &mut RunManifest, rotation: RotationArg, deltas: Option<&PathBuf>) -> Result<RotationStrategy> {
    Ok(match rotation {
        RotationArg::Slerp => RotationStrategy::Slerp,
        RotationArg::Inplane => {
            let p = deltas.ok_or_else(|| Error::Config("--deltas is required with --rotation inplane".into()))?;
            m.input("deltas", p)?;
            RotationStrategy::InplaneDelta(read_deltas_csv(p)?)
        }
    })
}

fn unwrap_sfm_cmd(a: &UnwrapSfmArgs) -> Result<()> {
    let mut m = RunManifest::new("unwrap-sfm");
    m.param("rotation", format!("{:?}", a.rotation).to_lowercase());
    m.input("tracks", &a.tracks)?;
    let tracks = read_tracks(&a.tracks)?;
    let inputs = load_pose_inputs(&mut m, &a.poses, a.intrinsics.as_ref(), a.points.as_ref())?;
    let strat = strategy(&mut m, a.rotation, a.deltas.as_ref())?;
    let (world, report) = sfm_world(&inputs, &strat, &tracks)?;
    let dir = parent_dir(&a.out);
    ensure_dir(&dir)?;
    write_tracks(&world, &a.out)?;
    m.output("world", &a.out)?;
    if let Some(p) = &a.report {
        write_json(p, &report)?;
        m.output("report", p)?;
    }
    note_report(&mut m, "unwrap", &report);
    m.write(&dir)?;
    Ok(())
}

fn body_length_of(m: &mut RunManifest, animals: &WorldTrackSet, params: CleaningParams) -> Result<CleanedTracks> {
    let clean = clean_tracks(animals, params)?;
    m.count("cleaning_removals", removal_summary(&clean.removals));
    Ok(clean)
}

fn eval_trees(a: &EvalTreesArgs) -> Result<()> {
    let mut m = RunManifest::new("eval-trees");
    m.input("world", &a.world)?;
    let world = read_world_tracks(&a.world)?;
    let body_length = match (a.body_length, &a.animals) {
        (Some(b), _) => b,
        (None, Some(p)) => {
            m.input("animals", p)?;
            body_length_of(&mut m, &read_world_tracks(p)?, cleaning(&a.cleaning))?.body_length
        }
        (None, None) => body_length_of(&mut m, &world, cleaning(&a.cleaning))?.body_length,
    };
    m.param("body_length", fmt_sig9(body_length));
    let report = weighted_dispersion(&world, body_length)?;
    let dir = parent_dir(&a.out);
    ensure_dir(&dir)?;
    report.write_csv(&a.out)?;
    m.output("report", &a.out)?;
    m.count("landmarks", report.rows.len());
    m.write(&dir)?;
    Ok(())
}

fn metrics(a: &MetricsArgs) -> Result<()> {
    let mut m = RunManifest::new("metrics");
    m.input("world", &a.world)?;
    let world = read_world_tracks(&a.world)?;
    let fps = a.fps.unwrap_or(world.fps);
    if !(fps > 0.0) {
        return Err(Error::Config(format!("fps must be positive, got {fps}")));
    }
    m.param("fps", fps);
    m.param("confidence", a.cleaning.confidence);
    m.param("jump_factor", a.cleaning.jump_factor);
    m.param("sigma_factor", a.sigma_factor);
    m.param("window", a.window);
    m.param("order", a.order);
    m.param("bin", a.bin);
    if a.bin == 0 {
        return Err(Error::Config("--bin must be at least 1".into()));
    }
    let clean = body_length_of(&mut m, &world, cleaning(&a.cleaning))?;
    let vectors = body_vectors(&clean, a.sigma_factor)?;
    m.count("body_length", fmt_sig9(clean.body_length));
    m.count("vector_removals", removal_summary(&vectors.removals));
    let herd = compute_herd_metrics(&clean, &vectors, fps);
    let bins = bin_speed_polarization(&herd, a.bin);
    let (smoothed, too_short) = smooth_bins(&bins, a.window, a.order)?;
    if too_short {
        m.warn(format!("fewer binned values than the smoothing window ({}); smoothed file is unsmoothed", a.window));
    }
    ensure_dir(&a.out_dir)?;
    let files = [
        ("frame_metrics", "frame_metrics.csv"),
        ("individual_metrics", "individual_metrics.csv"),
        ("binned", "binned.csv"),
        ("binned_smoothed", "binned_smoothed.csv"),
    ];
    let paths: Vec<PathBuf> = files.iter().map(|f| a.out_dir.join(f.1)).collect();
    write_frame_metrics(&paths[0], &herd.frames)?;
    write_individual_metrics(&paths[1], &herd.individuals)?;
    write_bins(&paths[2], &bins)?;
    write_bins(&paths[3], &smoothed)?;
    for (f, p) in files.iter().zip(&paths) {
        m.output(f.0, p)?;
    }
    m.write(&a.out_dir)?;
    Ok(())
}

fn synth(a: &SynthArgs) -> Result<()> {
    let mut m = RunManifest::new("synth");
    let mut config = match &a.config {
        Some(p) => {
            m.input("config", p)?;
            SceneConfig::load(p)?
        }
        None => SceneConfig::default(),
    };
    if let Some(s) = a.seed {
        config.seed = s;
    }
    m.seed = Some(config.seed);
    let scene = generate_scene(&config)?;
    let files = write_scene(&scene, &a.out_dir)?;
    for w in files.warnings {
        m.warn(w);
    }
    for (name, path) in &files.files {
        m.output(name, path)?;
    }
    m.count("image_entries", scene.image.len());
    m.count("truth_entries", scene.truth.len());
    m.write(&a.out_dir)?;
    Ok(())
}

pub const METHODS: [(&str, &str); 3] = [
    ("registration", "Image Registration"),
    ("sfm_slerp", "SfM + Linear Interpolation"),
    ("sfm_inplane", "SfM + Registration-Based Rotation"),
];

fn compare(a: &CompareArgs) -> Result<()> {
    let mut m = RunManifest::new("compare");
    m.input("tracks", &a.tracks)?;
    m.param("q", format!("{:?}", a.q).to_lowercase());
    m.param("min_pairs", a.min_pairs);
    m.param("min_samples", a.filter.min_samples);
    m.param("max_jump", a.filter.max_jump);
    m.param("confidence", a.cleaning.confidence);
    m.param("jump_factor", a.cleaning.jump_factor);
    let tracks = read_tracks(&a.tracks)?;
    let (animals, landmarks) = split_landmarks(&tracks, landmark_filter(&a.filter));
    m.count("landmarks_kept", landmarks.individuals().len());
    let input = merge(&animals, &landmarks);

    let q = axis(a.q);
    let chain = chain_for(&mut m, a.chain.as_ref(), &landmarks, a.min_pairs, &q)?;
    let poses = load_pose_inputs(&mut m, &a.keyframes, a.intrinsics.as_ref(), a.points.as_ref())?;
    let inplane = strategy(&mut m, RotationArg::Inplane, Some(&a.deltas))?;

    let runs: [(WorldTrackSet, UnwrapReport); 3] = [
        unwrap_registration(&input, &chain, &q),
        sfm_world(&poses, &RotationStrategy::Slerp, &input)?,
        sfm_world(&poses, &inplane, &input)?,
    ];

    ensure_dir(&a.out_dir)?;
    let mut summary = String::from("method,weighted_average_distance,body_length,landmarks,samples\n");
    for ((slug, label), (world, report)) in METHODS.iter().zip(&runs) {
        let mut world_animals = world.clone();
        world_animals.retain(|k, _| k.keypoint != Keypoint::Point);
        let clean = clean_tracks(&world_animals, cleaning(&a.cleaning))?;
        let disp: DispersionReport = weighted_dispersion(world, clean.body_length)?;
        let world_path = a.out_dir.join(format!("world_{slug}.csv"));
        let report_path = a.out_dir.join(format!("report_{slug}.csv"));
        let gaps_path = a.out_dir.join(format!("gaps_{slug}.json"));
        write_tracks(world, &world_path)?;
        disp.write_csv(&report_path)?;
        write_json(&gaps_path, report)?;
        m.output(&format!("world_{slug}"), &world_path)?;
        m.output(&format!("report_{slug}"), &report_path)?;
        m.output(&format!("gaps_{slug}"), &gaps_path)?;
        note_report(&mut m, slug, report);
        let samples: usize = disp.rows.iter().map(|r| r.samples).sum();
        summary.push_str(&format!(
            "{label},{},{},{},{samples}\n",
            fmt_sig9(disp.weighted_mean),
            fmt_sig9(clean.body_length),
            disp.rows.len()
        ));
    }
    let summary_path = a.out_dir.join("summary.csv");
    fs::write(&summary_path, summary).map_err(|e| Error::io(&summary_path, e))?;
    m.output("summary", &summary_path)?;
    m.write(&a.out_dir)?;
    Ok(())
}
