//! Baseline unwrapping by chaining frame-to-frame 2D rigid transforms.
//!
//! A chain link for frame `f` maps registration-space coordinates of frame `f`
//! into those of frame `f - 1`. Registration space is `Q · pixel`; with the
//! default `Q = diag(1, -1)` it is the image with y pointing up. Unwrapped
//! coordinates are `Qᵀ T_{f,0} Q x`, i.e. frame-0 pixels.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::format::{fmt_sig9, parse_f64_field};
use crate::geometry::{rigid_fit_2d, CumulativeChain};
use crate::tracks::{ImageTrackSet, Keypoint, Observation, TrackKey, WorldObservation, WorldTrackSet};
use crate::{Rigid2d, Vec2d};

use super::UnwrapReport;

const CHAIN_HEADER: &str = "frame,theta_rad,tx,ty";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TransformChain {
    /// Frame `f >= 1` to the link `f -> f-1`.
    pub transforms: BTreeMap<u32, Rigid2d>,
    /// Frames in `1..=max` without a link.
    pub gaps: Vec<u32>,
}

impl TransformChain {
    pub fn from_links(transforms: BTreeMap<u32, Rigid2d>) -> Self {
        let gaps = match transforms.keys().next_back() {
            Some(&last) => (1..=last).filter(|f| !transforms.contains_key(f)).collect(),
            None => Vec::new(),
        };
        Self { transforms, gaps }
    }

    pub fn len(&self) -> usize {
        self.transforms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transforms.is_empty()
    }

    /// `T_{f,0}` for every frame reachable from 0 without crossing a gap.
    pub fn cumulative(&self) -> Vec<Rigid2d> {
        CumulativeChain::new(&self.transforms).map(|(_, t)| t).collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "{CHAIN_HEADER}").map_err(io)?;
        for (f, t) in &self.transforms {
            writeln!(w, "{f},{},{},{}", fmt_sig9(t.theta), fmt_sig9(t.t.x), fmt_sig9(t.t.y)).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// Reads a chain CSV (`frame,theta_rad,tx,ty`, frame >= 1). Missing frames are
/// recorded in [`TransformChain::gaps`].
pub fn load_chain(path: &Path) -> Result<TransformChain> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut records = reader.records();
    match records.next() {
        Some(Ok(h)) if h.iter().collect::<Vec<_>>().join(",") == CHAIN_HEADER => {}
        Some(Err(e)) => return Err(Error::parse(path, 1, e.to_string())),
        _ => return Err(Error::parse(path, 1, format!("expected header {CHAIN_HEADER:?}"))),
    }
    let mut links = BTreeMap::new();
    for record in records {
        let record = record.map_err(|e| Error::parse(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != 4 {
            return Err(Error::parse(path, line, format!("expected 4 fields, found {}", record.len())));
        }
        let frame: u32 = record[0]
            .parse()
            .ok()
            .filter(|f| *f >= 1)
            .ok_or_else(|| Error::parse(path, line, format!("frame must be an integer >= 1, got {:?}", &record[0])))?;
        let num = |i: usize, name: &str| parse_f64_field(&record[i], name).map_err(|m| Error::parse(path, line, m));
        let t = Rigid2d::new(num(1, "theta_rad")?, Vec2d::new(num(2, "tx")?, num(3, "ty")?));
        if links.insert(frame, t).is_some() {
            return Err(Error::integrity(path, line, format!("duplicate frame {frame}")));
        }
    }
    Ok(TransformChain::from_links(links))
}

/// Orthogonal 2x2 matrix relating pixel axes to registration axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisConvention {
    q: [[f64; 2]; 2],
}

impl AxisConvention {
    pub fn new(q: [[f64; 2]; 2]) -> Result<Self> {
        let qtq = [
            [q[0][0] * q[0][0] + q[1][0] * q[1][0], q[0][0] * q[0][1] + q[1][0] * q[1][1]],
            [q[0][1] * q[0][0] + q[1][1] * q[1][0], q[0][1] * q[0][1] + q[1][1] * q[1][1]],
        ];
        let err = (qtq[0][0] - 1.0).abs().max((qtq[1][1] - 1.0).abs()).max(qtq[0][1].abs());
        if !(err <= 1e-12) {
            return Err(Error::Invalid("axis convention Q must be orthogonal".into()));
        }
        Ok(Self { q })
    }

    pub fn identity() -> Self {
        Self { q: [[1.0, 0.0], [0.0, 1.0]] }
    }

    /// `diag(1, -1)`: image y-down to y-up.
    pub fn y_flip() -> Self {
        Self { q: [[1.0, 0.0], [0.0, -1.0]] }
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        self.q
    }

    pub fn apply(&self, v: Vec2d) -> Vec2d {
        let q = &self.q;
        Vec2d::new(q[0][0] * v.x + q[0][1] * v.y, q[1][0] * v.x + q[1][1] * v.y)
    }

    pub fn apply_transpose(&self, v: Vec2d) -> Vec2d {
        let q = &self.q;
        Vec2d::new(q[0][0] * v.x + q[1][0] * v.y, q[0][1] * v.x + q[1][1] * v.y)
    }
}

impl Default for AxisConvention {
    fn default() -> Self {
        Self::y_flip()
    }
}

/// Fits one link per consecutive frame pair from co-visible landmarks.
/// Pairs with fewer than `min_pairs` shared landmarks become gaps.
pub fn estimate_chain_from_landmarks(
    landmarks: &ImageTrackSet,
    min_pairs: usize,
    q: &AxisConvention,
) -> Result<TransformChain> {
    let mut by_frame: BTreeMap<u32, BTreeMap<(&str, Keypoint), Vec2d>> = BTreeMap::new();
    for (k, o) in landmarks.iter() {
        by_frame.entry(k.frame).or_default().insert((k.individual.as_str(), k.keypoint), q.apply(o.pixel));
    }
    let last = by_frame.keys().next_back().copied().unwrap_or(0);
    let frames: Vec<u32> = (1..=last).collect();
    let fits: Vec<Option<(u32, Rigid2d)>> = frames
        .par_iter()
        .map(|&f| {
            let (cur, prev) = (by_frame.get(&f)?, by_frame.get(&(f - 1))?);
            let (src, dst): (Vec<Vec2d>, Vec<Vec2d>) =
                cur.iter().filter_map(|(id, p)| prev.get(id).map(|d| (*p, *d))).unzip();
            if src.len() < min_pairs.max(2) {
                return None;
            }
            rigid_fit_2d(&src, &dst).ok().map(|t| (f, t))
        })
        .collect();
    let links: BTreeMap<u32, Rigid2d> = fits.into_iter().flatten().collect();
    if links.is_empty() {
        return Err(Error::EmptyChain);
    }
    let mut chain = TransformChain::from_links(links);
    chain.gaps = frames.into_iter().filter(|f| !chain.transforms.contains_key(f)).collect();
    Ok(chain)
}

/// Maps every entry into frame-0 coordinates: `Qᵀ · T_{f,0} · Q · x`.
/// Entries on frames past the first chain gap are dropped and reported.
pub fn unwrap_registration(
    tracks: &ImageTrackSet,
    chain: &TransformChain,
    q: &AxisConvention,
) -> (WorldTrackSet, UnwrapReport) {
    let cumulative = chain.cumulative();
    let entries: Vec<(&TrackKey, &crate::tracks::ImageObservation)> = tracks.iter().collect();
    let mapped: Vec<Option<WorldObservation>> = entries
        .par_iter()
        .map(|(k, o)| {
            let t = cumulative.get(k.frame as usize)?;
            let world = q.apply_transpose(t.apply(q.apply(o.xy())));
            Some(WorldObservation::new(world, o.confidence))
        })
        .collect();

    let mut out = WorldTrackSet::empty_like(tracks);
    let mut report = UnwrapReport { entries_in: entries.len(), ..Default::default() };
    for ((k, _), m) in entries.into_iter().zip(mapped) {
        match m {
            Some(obs) => out.insert_unchecked(k.clone(), obs),
            None => {
                report.drop("no_transform");
                if report.missing_frames.last() != Some(&k.frame) {
                    report.missing_frames.push(k.frame);
                }
            }
        }
    }
    report.entries_out = out.len();
    (out, report)
}
