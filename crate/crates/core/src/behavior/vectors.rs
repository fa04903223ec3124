use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::Vec2d;

use super::clean::{CleanedTracks, Removal, RemovalReason};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyVector {
    /// Tail to head.
    pub vector: Vec2d,
    pub unit: Vec2d,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodyVectorSeries {
    /// Keyed by (frame, individual); absent keys have no usable vector.
    pub vectors: BTreeMap<(u32, String), BodyVector>,
    pub mean_length: f64,
    /// Population standard deviation of the lengths.
    pub std_length: f64,
    pub removals: Vec<Removal>,
}

impl BodyVectorSeries {
    /// Present vectors of one frame, ordered by individual.
    pub fn frame(&self, frame: u32) -> impl Iterator<Item = (&str, &BodyVector)> {
        self.vectors
            .range((frame, String::new())..)
            .take_while(move |((f, _), _)| *f == frame)
            .map(|((_, id), v)| (id.as_str(), v))
    }

    pub fn frames(&self) -> Vec<u32> {
        let mut f: Vec<u32> = self.vectors.keys().map(|(f, _)| *f).collect();
        f.dedup();
        f
    }
}

/// Tail-to-head vectors with length outliers (outside `mean ± sigma_factor·σ`
/// over all frames and individuals) removed. Zero-length vectors are dropped as
/// degenerate before the statistics are taken.
pub fn body_vectors(clean: &CleanedTracks, sigma_factor: f64) -> Result<BodyVectorSeries> {
    let mut removals = Vec::new();
    let mut raw: Vec<((u32, String), Vec2d, f64)> = Vec::new();
    for (frame, id, head, tail) in clean.head_tail_pairs() {
        let v = head - tail;
        let len = v.norm();
        if !(len > 0.0) {
            removals.push(Removal { frame, individual: id, keypoint: None, reason: RemovalReason::Degenerate });
            continue;
        }
        raw.push(((frame, id), v, len));
    }
    if raw.is_empty() {
        return Err(Error::BodyLengthUndefined);
    }
    let n = raw.len() as f64;
    let mean = raw.iter().map(|r| r.2).sum::<f64>() / n;
    let std = (raw.iter().map(|r| (r.2 - mean).powi(2)).sum::<f64>() / n).sqrt();
    // slack keeps rounding noise in equal-length data from reading as outliers
    let slack = 1e-12 * mean;
    let (lo, hi) = (mean - sigma_factor * std - slack, mean + sigma_factor * std + slack);

    let mut vectors = BTreeMap::new();
    for (key, v, len) in raw {
        if len < lo || len > hi {
            removals.push(Removal {
                frame: key.0,
                individual: key.1,
                keypoint: None,
                reason: RemovalReason::LengthOutlier,
            });
            continue;
        }
        vectors.insert(key, BodyVector { vector: v, unit: v.scale(1.0 / len) });
    }
    Ok(BodyVectorSeries { vectors, mean_length: mean, std_length: std, removals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::clean::{clean_tracks, CleaningParams};
    use crate::tracks::{Keypoint, TrackKey, WorldObservation, WorldTrackSet};

    fn cleaned(pairs: &[(Vec2d, Vec2d)]) -> CleanedTracks {
        let mut s = WorldTrackSet::new(29.97, pairs.len() as u32);
        for (i, (h, t)) in pairs.iter().enumerate() {
            let id = format!("z{i}");
            s.insert(TrackKey::new(0, id.clone(), Keypoint::Head), WorldObservation::new(*h, None)).unwrap();
            s.insert(TrackKey::new(0, id, Keypoint::Tail), WorldObservation::new(*t, None)).unwrap();
        }
        clean_tracks(&s, CleaningParams { confidence_threshold: 0.9, jump_factor: 2.0 }).unwrap()
    }

    #[test]
    fn equal_lengths_survive() {
        let pairs: Vec<_> = (0..10)
            .map(|i| {
                let a = i as f64 * 0.6;
                (Vec2d::new(a.cos(), a.sin()), Vec2d::zero())
            })
            .collect();
        let v = body_vectors(&cleaned(&pairs), 2.0).unwrap();
        assert_eq!(v.vectors.len(), 10);
        for b in v.vectors.values() {
            assert!((b.unit.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn long_outlier_is_removed() {
        let mut pairs: Vec<_> = (0..100).map(|i| (Vec2d::new(i as f64 * 3.0 + 1.0, 0.0), Vec2d::new(i as f64 * 3.0, 0.0))).collect();
        pairs.push((Vec2d::new(10.0, 500.0), Vec2d::new(0.0, 500.0)));
        let v = body_vectors(&cleaned(&pairs), 2.0).unwrap();
        // brute force: population statistics over the 101 lengths
        let lens: Vec<f64> = pairs.iter().map(|(h, t)| h.distance(*t)).collect();
        let mu = lens.iter().sum::<f64>() / 101.0;
        let sigma = (lens.iter().map(|l| (l - mu) * (l - mu)).sum::<f64>() / 101.0).sqrt();
        assert!((v.mean_length - mu).abs() < 1e-12 && (v.std_length - sigma).abs() < 1e-12);
        assert!((mu - 110.0 / 101.0).abs() < 1e-12);
        assert!(10.0 > mu + 2.0 * sigma);
        assert_eq!(v.vectors.len(), 100);
        assert_eq!(v.removals.len(), 1);
        assert_eq!(v.removals[0].reason, RemovalReason::LengthOutlier);
        assert_eq!(v.removals[0].individual, "z100");
    }

    #[test]
    fn zero_length_is_degenerate() {
        let mut pairs: Vec<_> = (0..5).map(|i| (Vec2d::new(i as f64 + 1.0, 0.0), Vec2d::new(i as f64, 0.0))).collect();
        pairs.push((Vec2d::new(50.0, 50.0), Vec2d::new(50.0, 50.0)));
        let v = body_vectors(&cleaned(&pairs), 2.0).unwrap();
        assert_eq!(v.vectors.len(), 5);
        assert_eq!(v.removals[0].reason, RemovalReason::Degenerate);
    }
}
