use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::Vec2d;

use super::clean::CleanedTracks;
use super::vectors::BodyVectorSeries;

/// Below this norm the mean heading has no direction.
pub const DIRECTION_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOrientation {
    /// Norm of the mean unit heading, in [0, 1].
    pub polarization: f64,
    pub mean_dir: Option<Vec2d>,
}

pub fn polarization(units: &[Vec2d]) -> Option<FrameOrientation> {
    let mean = Vec2d::mean(units)?;
    let p = mean.norm();
    let mean_dir = (p > DIRECTION_EPS).then(|| mean.scale(1.0 / p));
    Some(FrameOrientation { polarization: p, mean_dir })
}

/// Pearson correlation; absent for fewer than two samples or a constant input.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n != ys.len() || n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    let flat = |ss: f64, v: &[f64]| {
        let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        (ss / nf).sqrt() <= 1e-12 * scale
    };
    if flat(sxx, xs) || flat(syy, ys) {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Alignment against distance-from-centroid correlation; needs three individuals.
pub fn position_alignment_correlation(alignment: &[f64], dist_centroid: &[f64]) -> Option<f64> {
    if alignment.len() < 3 {
        return None;
    }
    pearson(alignment, dist_centroid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spacing {
    pub mean_pair: Option<f64>,
    pub max_pair: Option<f64>,
    pub nearest: Vec<Option<f64>>,
    pub from_centroid: Vec<f64>,
}

/// All distances divided by `body_length`; outputs follow the input order.
pub fn spacing_metrics(centroids: &[Vec2d], body_length: f64) -> Spacing {
    let n = centroids.len();
    let mut nearest = vec![None::<f64>; n];
    let (mut sum, mut count, mut max) = (0.0, 0usize, None::<f64>);
    for i in 0..n {
        for j in i + 1..n {
            let d = centroids[i].distance(centroids[j]) / body_length;
            sum += d;
            count += 1;
            max = Some(max.map_or(d, |m| m.max(d)));
            for k in [i, j] {
                nearest[k] = Some(nearest[k].map_or(d, |m| m.min(d)));
            }
        }
    }
    let from_centroid = match Vec2d::mean(centroids) {
        Some(c) => centroids.iter().map(|p| p.distance(c) / body_length).collect(),
        None => Vec::new(),
    };
    Spacing { mean_pair: (count > 0).then(|| sum / count as f64), max_pair: max, nearest, from_centroid }
}

/// Head-tail midpoint per (frame, individual).
pub fn centroids(clean: &CleanedTracks) -> BTreeMap<(u32, String), Vec2d> {
    clean
        .head_tail_pairs()
        .into_iter()
        .map(|(f, id, h, t)| ((f, id), (h + t).scale(0.5)))
        .collect()
}

/// Backward-difference centroid speed in body lengths per second. Absent in a
/// frame whose predecessor has no centroid.
pub fn centroid_kinematics(clean: &CleanedTracks, fps: f64) -> BTreeMap<(u32, String), f64> {
    let c = centroids(clean);
    let mut out = BTreeMap::new();
    for ((f, id), p) in &c {
        if *f == 0 {
            continue;
        }
        if let Some(q) = c.get(&(f - 1, id.clone())) {
            out.insert((*f, id.clone()), p.distance(*q) * fps / clean.body_length);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameMetrics {
    pub frame: u32,
    pub polarization: Option<f64>,
    pub mean_dir: Option<Vec2d>,
    pub mean_pair_dist: Option<f64>,
    pub max_pair_dist: Option<f64>,
    pub pearson_r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndividualMetrics {
    pub frame: u32,
    pub individual: String,
    pub alignment: Option<f64>,
    pub speed_bl_s: Option<f64>,
    pub dist_centroid_bl: Option<f64>,
    pub nn_dist_bl: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HerdMetrics {
    pub frames: Vec<FrameMetrics>,
    pub individuals: Vec<IndividualMetrics>,
    pub body_length: f64,
}

pub fn compute_herd_metrics(clean: &CleanedTracks, vectors: &BodyVectorSeries, fps: f64) -> HerdMetrics {
    let bl = clean.body_length;
    let cents = centroids(clean);
    let speeds = centroid_kinematics(clean, fps);
    let frames: BTreeSet<u32> = cents.keys().map(|(f, _)| *f).chain(vectors.vectors.keys().map(|(f, _)| *f)).collect();
    let frames: Vec<u32> = frames.into_iter().collect();

    let per_frame: Vec<(FrameMetrics, Vec<IndividualMetrics>)> = frames
        .par_iter()
        .map(|&frame| {
            let units: Vec<(&str, Vec2d)> = vectors.frame(frame).map(|(id, v)| (id, v.unit)).collect();
            let unit_list: Vec<Vec2d> = units.iter().map(|u| u.1).collect();
            let orient = polarization(&unit_list);
            let mean_dir = orient.and_then(|o| o.mean_dir);

            let frame_cents: Vec<(&str, Vec2d)> = cents
                .range((frame, String::new())..)
                .take_while(|((f, _), _)| *f == frame)
                .map(|((_, id), p)| (id.as_str(), *p))
                .collect();
            let pts: Vec<Vec2d> = frame_cents.iter().map(|c| c.1).collect();
            let spacing = spacing_metrics(&pts, bl);

            let mut ids: BTreeSet<&str> = frame_cents.iter().map(|c| c.0).collect();
            ids.extend(units.iter().map(|u| u.0));
            let rows: Vec<IndividualMetrics> = ids
                .into_iter()
                .map(|id| {
                    let ci = frame_cents.iter().position(|c| c.0 == id);
                    let alignment = match (units.iter().find(|u| u.0 == id), mean_dir) {
                        (Some(u), Some(m)) => Some(u.1.dot(m)),
                        _ => None,
                    };
                    IndividualMetrics {
                        frame,
                        individual: id.to_string(),
                        alignment,
                        speed_bl_s: speeds.get(&(frame, id.to_string())).copied(),
                        dist_centroid_bl: ci.map(|i| spacing.from_centroid[i]),
                        nn_dist_bl: ci.and_then(|i| spacing.nearest[i]),
                    }
                })
                .collect();
            let (al, dc): (Vec<f64>, Vec<f64>) =
                rows.iter().filter_map(|r| Some((r.alignment?, r.dist_centroid_bl?))).unzip();
            let fm = FrameMetrics {
                frame,
                polarization: orient.map(|o| o.polarization),
                mean_dir,
                mean_pair_dist: spacing.mean_pair,
                max_pair_dist: spacing.max_pair,
                pearson_r: position_alignment_correlation(&al, &dc),
            };
            (fm, rows)
        })
        .collect();

    let mut out = HerdMetrics { body_length: bl, ..Default::default() };
    for (f, rows) in per_frame {
        out.frames.push(f);
        out.individuals.extend(rows);
    }
    out
}
