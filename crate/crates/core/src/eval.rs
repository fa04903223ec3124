//! Unwrap quality from static landmarks: spread of each unwrapped landmark
//! trajectory around its own centroid, in body lengths.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::format::{fmt_sig9, parse_f64_field};
use crate::geometry::Vec2;
use crate::scalar::Real;
use crate::tracks::{Keypoint, WorldTrackSet};

/// Distance-to-centroid statistics of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion<T> {
    pub mean: T,
    pub max: T,
    pub min: T,
    /// Population standard deviation of the distances.
    pub std: T,
    pub samples: usize,
}

pub fn dispersion_per_track<T: Real>(points: &[Vec2<T>]) -> Result<Dispersion<T>> {
    let centroid = Vec2::mean(points).ok_or(Error::EmptyTrack)?;
    let n = T::from_count(points.len());
    let dists: Vec<T> = points.iter().map(|p| p.distance(centroid)).collect();
    let mean = dists.iter().fold(T::zero(), |a, &d| a + d) / n;
    let var = dists.iter().fold(T::zero(), |a, &d| a + (d - mean) * (d - mean)) / n;
    Ok(Dispersion {
        mean,
        max: dists.iter().copied().fold(T::neg_infinity(), T::max),
        min: dists.iter().copied().fold(T::infinity(), T::min),
        std: var.sqrt(),
        samples: points.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionRow {
    pub landmark_id: String,
    pub mean: f64,
    pub max: f64,
    pub min: f64,
    pub std: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionReport {
    /// Sorted by landmark id.
    pub rows: Vec<DispersionRow>,
    pub weighted_mean: f64,
    pub body_length: f64,
}

impl DispersionReport {
    /// Sample-weighted mean of the per-landmark means.
    pub fn from_rows(mut rows: Vec<DispersionRow>, body_length: f64) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Invalid("dispersion report needs at least one landmark".into()));
        }
        rows.sort_by(|a, b| natural_cmp(&a.landmark_id, &b.landmark_id));
        let total: usize = rows.iter().map(|r| r.samples).sum();
        if total == 0 {
            return Err(Error::Invalid("dispersion rows carry no samples".into()));
        }
        let weighted = rows.iter().map(|r| r.mean * r.samples as f64).sum::<f64>() / total as f64;
        Ok(Self { rows, weighted_mean: weighted, body_length })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "tree_id,mean,max,min,std,samples").map_err(io)?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.landmark_id,
                fmt_sig9(r.mean),
                fmt_sig9(r.max),
                fmt_sig9(r.min),
                fmt_sig9(r.std),
                r.samples
            )
            .map_err(io)?;
        }
        writeln!(w).map_err(io)?;
        writeln!(w, "weighted_mean={}", fmt_sig9(self.weighted_mean)).map_err(io)?;
        writeln!(w, "body_length={}", fmt_sig9(self.body_length)).map_err(io)?;
        w.flush().map_err(io)
    }
}

/// Numeric ids sort numerically, everything else lexically after them.
fn natural_cmp(a: &str, b: &str) -> std::cmp::Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y),
        (Ok(_), Err(_)) => std::cmp::Ordering::Less,
        (Err(_), Ok(_)) => std::cmp::Ordering::Greater,
        _ => a.cmp(b),
    }
}

/// Reads the rows of a report CSV (`tree_id,mean,max,min,std,samples`),
/// stopping at the blank line before the footer. Returns the rows and the
/// footer key-values.
pub fn read_report_csv(path: &Path) -> Result<(Vec<DispersionRow>, Vec<(String, f64)>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "tree_id,mean,max,min,std,samples" => {}
        _ => return Err(Error::parse(path, 1, "expected header tree_id,mean,max,min,std,samples")),
    }
    let mut rows = Vec::new();
    let mut footer = Vec::new();
    let mut in_footer = false;
    for (i, raw) in lines {
        let line_no = i as u64 + 1;
        let line = raw.trim();
        if line.is_empty() {
            in_footer = true;
            continue;
        }
        if in_footer {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, line_no, "expected key=value in footer"))?;
            let v = parse_f64_field(v, k).map_err(|m| Error::parse(path, line_no, m))?;
            footer.push((k.trim().to_string(), v));
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 6 {
            return Err(Error::parse(path, line_no, format!("expected 6 fields, found {}", f.len())));
        }
        let num = |i: usize, name: &str| parse_f64_field(f[i], name).map_err(|m| Error::parse(path, line_no, m));
        rows.push(DispersionRow {
            landmark_id: f[0].to_string(),
            mean: num(1, "mean")?,
            max: num(2, "max")?,
            min: num(3, "min")?,
            std: num(4, "std")?,
            samples: f[5]
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("samples: {:?} is not a count", f[5])))?,
        });
    }
    Ok((rows, footer))
}

/// Per-landmark dispersion of `point` tracks, divided by `body_length`.
pub fn weighted_dispersion(tracks: &WorldTrackSet, body_length: f64) -> Result<DispersionReport> {
    if !(body_length > 0.0) || !body_length.is_finite() {
        return Err(Error::Invalid(format!("body length must be positive, got {body_length}")));
    }
    let mut rows = Vec::new();
    for ((id, keypoint), track) in tracks.tracks() {
        if keypoint != Keypoint::Point {
            continue;
        }
        let pts: Vec<_> = track.iter().map(|(_, o)| o.position).collect();
        let d = dispersion_per_track(&pts)?;
        rows.push(DispersionRow {
            landmark_id: id,
            mean: d.mean / body_length,
            max: d.max / body_length,
            min: d.min / body_length,
            std: d.std / body_length,
            samples: d.samples,
        });
    }
    DispersionReport::from_rows(rows, body_length)
}
