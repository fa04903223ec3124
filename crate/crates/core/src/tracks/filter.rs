use super::{ImageTrackSet, TrackKey};
#[cfg(test)]
use super::Keypoint;

/// Quality thresholds for static landmark tracks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandmarkFilter {
    /// Tracks need strictly more samples than this.
    pub min_samples: usize,
    /// Largest allowed displacement between consecutive frames, pixels.
    pub max_jump: f64,
}

impl Default for LandmarkFilter {
    fn default() -> Self {
        Self { min_samples: 400, max_jump: 10.0 }
    }
}

/// Drops whole landmark tracks that are too short or contain an unrealistic
/// frame-to-frame jump. Jumps are only measured across adjacent frames.
pub fn filter_landmark_tracks(set: &ImageTrackSet, filter: LandmarkFilter) -> ImageTrackSet {
    let mut out = ImageTrackSet::empty_like(set);
    for ((individual, keypoint), track) in set.tracks() {
        if track.len() <= filter.min_samples {
            continue;
        }
        let jumps = track
            .windows(2)
            .any(|w| w[1].0 == w[0].0 + 1 && w[1].1.pixel.distance(w[0].1.pixel) > filter.max_jump);
        if jumps {
            continue;
        }
        for (frame, obs) in track {
            out.insert_unchecked(TrackKey::new(frame, individual.clone(), keypoint), obs);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracks::ImageObservation;
    use proptest::prelude::*;

    fn track(set: &mut ImageTrackSet, id: &str, n: u32, f: impl Fn(u32) -> (f64, f64)) {
        for i in 0..n {
            let (x, y) = f(i);
            set.insert(TrackKey::new(i, id, Keypoint::Point), ImageObservation::new(x, y, None)).unwrap();
        }
    }

    #[test]
    fn sample_count_is_strict() {
        let mut s = ImageTrackSet::new(29.97, 1000);
        track(&mut s, "short", 399, |_| (1.0, 1.0));
        track(&mut s, "edge", 400, |_| (1.0, 1.0));
        track(&mut s, "long", 401, |_| (1.0, 1.0));
        let out = filter_landmark_tracks(&s, LandmarkFilter::default());
        assert_eq!(out.individuals(), vec!["long"]);
    }

    #[test]
    fn single_jump_drops_track() {
        let mut s = ImageTrackSet::new(29.97, 1000);
        track(&mut s, "jumpy", 500, |i| if i >= 250 { (11.0, 0.0) } else { (0.0, 0.0) });
        track(&mut s, "edge", 500, |i| if i >= 250 { (10.0, 0.0) } else { (0.0, 0.0) });
        track(&mut s, "still", 500, |_| (5.0, 5.0));
        let out = filter_landmark_tracks(&s, LandmarkFilter::default());
        assert_eq!(out.individuals(), vec!["edge", "still"]);
        assert_eq!(out.get(3, "still", Keypoint::Point), s.get(3, "still", Keypoint::Point));
    }

    #[test]
    fn gaps_are_not_jump_checked() {
        let mut s = ImageTrackSet::new(29.97, 1000);
        for i in (0..900).filter(|i| *i != 450) {
            let x = if i > 450 { 100.0 } else { 0.0 };
            s.insert(TrackKey::new(i, "gap", Keypoint::Point), ImageObservation::new(x, 0.0, None)).unwrap();
        }
        assert_eq!(filter_landmark_tracks(&s, LandmarkFilter::default()).len(), 899);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn idempotent_and_preserving(
            tracks in proptest::collection::vec((5u32..40, 0.0f64..3.0, 0u32..40), 1..6)
        ) {
            let filter = LandmarkFilter { min_samples: 10, max_jump: 2.0 };
            let mut s = ImageTrackSet::new(29.97, 40);
            for (t, (len, step, start)) in tracks.into_iter().enumerate() {
                for i in start..(start + len).min(40) {
                    let obs = ImageObservation::new(step * i as f64, 0.0, None);
                    s.insert(TrackKey::new(i, format!("t{t}"), Keypoint::Point), obs).unwrap();
                }
            }
            let once = filter_landmark_tracks(&s, filter);
            prop_assert_eq!(&filter_landmark_tracks(&once, filter), &once);
            for (k, o) in once.iter() {
                prop_assert_eq!(s.get(k.frame, &k.individual, k.keypoint), Some(o));
            }
        }
    }
}
