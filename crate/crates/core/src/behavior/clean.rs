use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::tracks::{Keypoint, TrackKey, WorldObservation, WorldTrackSet};
use crate::Vec2d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RemovalReason {
    LowConfidence,
    Jump,
    Degenerate,
    LengthOutlier,
}

impl RemovalReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RemovalReason::LowConfidence => "low_confidence",
            RemovalReason::Jump => "jump",
            RemovalReason::Degenerate => "degenerate",
            RemovalReason::LengthOutlier => "length_outlier",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Removal {
    pub frame: u32,
    pub individual: String,
    /// `None` for removals that apply to a whole body vector.
    pub keypoint: Option<Keypoint>,
    pub reason: RemovalReason,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CleaningParams {
    /// Keypoints with confidence below this are dropped; missing confidence is kept.
    pub confidence_threshold: f64,
    /// Largest allowed consecutive-frame displacement, in body lengths.
    pub jump_factor: f64,
}

impl Default for CleaningParams {
    fn default() -> Self {
        Self { confidence_threshold: 0.9, jump_factor: 2.0 }
    }
}

/// Head and tail keypoints after cleaning.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanedTracks {
    pub tracks: WorldTrackSet,
    /// Median head-tail distance, world units.
    pub body_length: f64,
    pub removals: Vec<Removal>,
}

impl CleanedTracks {
    pub fn head(&self, frame: u32, individual: &str) -> Option<Vec2d> {
        self.tracks.get(frame, individual, Keypoint::Head).map(|o| o.position)
    }

    pub fn tail(&self, frame: u32, individual: &str) -> Option<Vec2d> {
        self.tracks.get(frame, individual, Keypoint::Tail).map(|o| o.position)
    }

    /// Frames and individuals with both keypoints present.
    pub fn head_tail_pairs(&self) -> Vec<(u32, String, Vec2d, Vec2d)> {
        let mut out = Vec::new();
        for (k, o) in self.tracks.iter() {
            if k.keypoint == Keypoint::Head {
                if let Some(t) = self.tail(k.frame, &k.individual) {
                    out.push((k.frame, k.individual.clone(), o.position, t));
                }
            }
        }
        out
    }
}

pub(crate) fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) })
}

/// Confidence filter, then body length, then the jump filter.
///
/// A keypoint is a jump when it lies more than `jump_factor` body lengths from
/// the surviving keypoint of the previous frame.
pub fn clean_tracks(raw: &WorldTrackSet, params: CleaningParams) -> Result<CleanedTracks> {
    let mut removals = Vec::new();
    let mut confident = WorldTrackSet::empty_like(raw);
    for (k, o) in raw.iter() {
        if k.keypoint == Keypoint::Point {
            continue;
        }
        if o.confidence.is_some_and(|c| c < params.confidence_threshold) {
            removals.push(Removal {
                frame: k.frame,
                individual: k.individual.clone(),
                keypoint: Some(k.keypoint),
                reason: RemovalReason::LowConfidence,
            });
            continue;
        }
        confident.insert_unchecked(k.clone(), *o);
    }

    let mut lengths: Vec<f64> = Vec::new();
    for (k, o) in confident.iter() {
        if k.keypoint == Keypoint::Head {
            if let Some(t) = confident.get(k.frame, &k.individual, Keypoint::Tail) {
                lengths.push(o.position.distance(t.position));
            }
        }
    }
    let body_length = median(&mut lengths).ok_or(Error::BodyLengthUndefined)?;
    if !(body_length > 0.0) {
        return Err(Error::BodyLengthUndefined);
    }

    let limit = params.jump_factor * body_length;
    let mut tracks = WorldTrackSet::empty_like(raw);
    for ((individual, keypoint), track) in confident.tracks() {
        let mut prev: Option<(u32, WorldObservation)> = None;
        for (frame, obs) in track {
            let jumped = prev.is_some_and(|(pf, po)| pf + 1 == frame && po.position.distance(obs.position) > limit);
            if jumped {
                removals.push(Removal {
                    frame,
                    individual: individual.clone(),
                    keypoint: Some(keypoint),
                    reason: RemovalReason::Jump,
                });
                continue;
            }
            tracks.insert_unchecked(TrackKey::new(frame, individual.clone(), keypoint), obs);
            prev = Some((frame, obs));
        }
    }
    removals.sort_by(|a, b| (a.frame, &a.individual, a.keypoint).cmp(&(b.frame, &b.individual, b.keypoint)));
    Ok(CleanedTracks { tracks, body_length, removals })
}

/// Removal counts by reason.
pub fn removal_summary(removals: &[Removal]) -> BTreeMap<&'static str, usize> {
    let mut out = BTreeMap::new();
    for r in removals {
        *out.entry(r.reason.as_str()).or_default() += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn obs(x: f64, y: f64, c: f64) -> WorldObservation {
        WorldObservation::new(Vec2d::new(x, y), Some(c))
    }

    fn stationary(n: u32) -> WorldTrackSet {
        let mut s = WorldTrackSet::new(29.97, n);
        for f in 0..n {
            s.insert(TrackKey::new(f, "z", Keypoint::Head), obs(1.0, 0.0, 1.0)).unwrap();
            s.insert(TrackKey::new(f, "z", Keypoint::Tail), obs(0.0, 0.0, 1.0)).unwrap();
        }
        s
    }

    #[test]
    fn clean_input_is_unchanged() {
        let s = stationary(10);
        let c = clean_tracks(&s, CleaningParams::default()).unwrap();
        assert_eq!(c.tracks, s);
        assert!(c.removals.is_empty());
        assert_eq!(c.body_length, 1.0);
    }

    #[test]
    fn low_confidence_is_dropped_at_threshold_edge() {
        let mut s = stationary(3);
        s.retain(|k, _| !(k.frame == 1 && k.keypoint == Keypoint::Head));
        s.insert(TrackKey::new(1, "z", Keypoint::Head), obs(1.0, 0.0, 0.85)).unwrap();
        s.retain(|k, _| !(k.frame == 2 && k.keypoint == Keypoint::Head));
        s.insert(TrackKey::new(2, "z", Keypoint::Head), obs(1.0, 0.0, 0.9)).unwrap();
        let c = clean_tracks(&s, CleaningParams::default()).unwrap();
        assert_eq!(c.removals.len(), 1);
        assert_eq!(c.removals[0].reason.as_str(), "low_confidence");
        assert_eq!(c.removals[0].frame, 1);
        assert!(c.head(2, "z").is_some());
    }

    #[test]
    fn jump_of_three_body_lengths_is_dropped() {
        let mut s = stationary(5);
        s.retain(|k, _| !(k.frame == 2 && k.keypoint == Keypoint::Head));
        s.insert(TrackKey::new(2, "z", Keypoint::Head), obs(4.0, 0.0, 1.0)).unwrap();
        let c = clean_tracks(&s, CleaningParams::default()).unwrap();
        assert_eq!(c.removals.len(), 1);
        assert_eq!(c.removals[0].reason, RemovalReason::Jump);
        assert_eq!((c.removals[0].frame, c.removals[0].keypoint), (2, Some(Keypoint::Head)));
        // the next frame is compared against nothing and survives
        assert!(c.head(3, "z").is_some());
    }

    #[test]
    fn no_pairs_is_an_error() {
        let mut s = WorldTrackSet::new(29.97, 2);
        s.insert(TrackKey::new(0, "z", Keypoint::Head), obs(0.0, 0.0, 1.0)).unwrap();
        s.insert(TrackKey::new(1, "z", Keypoint::Tail), obs(0.0, 0.0, 1.0)).unwrap();
        assert!(matches!(clean_tracks(&s, CleaningParams::default()), Err(Error::BodyLengthUndefined)));
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn cleaning_is_idempotent(
            walk in proptest::collection::vec((-0.3f64..0.3, -0.3f64..0.3, 0.5f64..1.0), 20..120),
            spikes in proptest::collection::vec((0usize..120, 5.0f64..20.0), 0..5),
        ) {
            let mut s = WorldTrackSet::new(29.97, 200);
            let (mut x, mut y) = (0.0, 0.0);
            for (f, (dx, dy, c)) in walk.iter().enumerate() {
                x += dx;
                y += dy;
                let spike = spikes.iter().find(|(sf, _)| *sf == f).map_or(0.0, |(_, d)| *d);
                let conf = if *c < 0.6 { 0.5 } else { 1.0 };
                s.insert(TrackKey::new(f as u32, "a", Keypoint::Head), obs(x + 1.0 + spike, y, conf)).unwrap();
                s.insert(TrackKey::new(f as u32, "a", Keypoint::Tail), obs(x, y, 1.0)).unwrap();
            }
            if let Ok(once) = clean_tracks(&s, CleaningParams::default()) {
                let twice = clean_tracks(&once.tracks, CleaningParams::default()).unwrap();
                prop_assert_eq!(&twice.tracks, &once.tracks);
                prop_assert!(twice.removals.is_empty());
                for (k, o) in once.tracks.iter() {
                    prop_assert_eq!(s.get(k.frame, &k.individual, k.keypoint), Some(o));
                }
            }
        }
    }
}
