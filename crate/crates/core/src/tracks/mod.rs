//! Keypoint tracks in image and world coordinates, and their CSV schema.

mod csv_io;
mod filter;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use csv_io::{meta_path, read_tracks, read_world_tracks, write_tracks, TrackRecord};
pub use filter::{filter_landmark_tracks, LandmarkFilter};

use crate::error::{Error, Result};
use crate::{Vec2d, Vec3d};

pub const DEFAULT_FPS: f64 = 29.97;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Keypoint {
    Head,
    Tail,
    Point,
}

impl Keypoint {
    pub fn as_str(self) -> &'static str {
        match self {
            Keypoint::Head => "head",
            Keypoint::Tail => "tail",
            Keypoint::Point => "point",
        }
    }
}

impl fmt::Display for Keypoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Keypoint {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "head" => Ok(Keypoint::Head),
            "tail" => Ok(Keypoint::Tail),
            "point" => Ok(Keypoint::Point),
            other => Err(format!("unknown keypoint {other:?} (expected head|tail|point)")),
        }
    }
}

/// Entry key; ordering (frame, individual, keypoint) fixes the file row order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrackKey {
    pub frame: u32,
    pub individual: String,
    pub keypoint: Keypoint,
}

impl TrackKey {
    pub fn new(frame: u32, individual: impl Into<String>, keypoint: Keypoint) -> Self {
        Self { frame, individual: individual.into(), keypoint }
    }
}

/// Pixel position of a keypoint in its own frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageObservation {
    pub pixel: Vec2d,
    pub confidence: Option<f64>,
}

/// Position on the world chart, with the lifted 3D point when the method has one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldObservation {
    pub position: Vec2d,
    pub confidence: Option<f64>,
    pub point3: Option<Vec3d>,
}

pub trait Observation: Copy {
    fn xy(&self) -> Vec2d;
    fn confidence(&self) -> Option<f64>;

    fn validate(&self) -> std::result::Result<(), String> {
        if !self.xy().is_finite() {
            return Err("coordinates must be finite".into());
        }
        if let Some(c) = self.confidence() {
            if !(0.0..=1.0).contains(&c) {
                return Err(format!("confidence {c} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

impl ImageObservation {
    pub fn new(x: f64, y: f64, confidence: Option<f64>) -> Self {
        Self { pixel: Vec2d::new(x, y), confidence }
    }
}

impl WorldObservation {
    pub fn new(position: Vec2d, confidence: Option<f64>) -> Self {
        Self { position, confidence, point3: None }
    }
}

impl Observation for ImageObservation {
    fn xy(&self) -> Vec2d {
        self.pixel
    }
    fn confidence(&self) -> Option<f64> {
        self.confidence
    }
}

impl Observation for WorldObservation {
    fn xy(&self) -> Vec2d {
        self.position
    }
    fn confidence(&self) -> Option<f64> {
        self.confidence
    }
    fn validate(&self) -> std::result::Result<(), String> {
        if self.point3.is_some_and(|p| !p.is_finite()) {
            return Err("3D coordinates must be finite".into());
        }
        if !self.position.is_finite() {
            return Err("coordinates must be finite".into());
        }
        match self.confidence {
            Some(c) if !(0.0..=1.0).contains(&c) => Err(format!("confidence {c} outside [0, 1]")),
            _ => Ok(()),
        }
    }
}

/// Keypoint observations keyed by (frame, individual, keypoint).
#[derive(Debug, Clone, PartialEq)]
pub struct TrackSet<O> {
    pub fps: f64,
    pub n_frames: u32,
    entries: BTreeMap<TrackKey, O>,
}

pub type ImageTrackSet = TrackSet<ImageObservation>;
pub type WorldTrackSet = TrackSet<WorldObservation>;

impl<O: Observation> TrackSet<O> {
    pub fn new(fps: f64, n_frames: u32) -> Self {
        Self { fps, n_frames, entries: BTreeMap::new() }
    }

    /// An empty set with the same frame rate and frame count.
    pub fn empty_like<P: Observation>(other: &TrackSet<P>) -> Self {
        Self::new(other.fps, other.n_frames)
    }

    pub fn insert(&mut self, key: TrackKey, obs: O) -> Result<()> {
        if key.frame >= self.n_frames {
            return Err(Error::Invalid(format!(
                "frame {} outside [0, {})",
                key.frame, self.n_frames
            )));
        }
        obs.validate().map_err(Error::Invalid)?;
        if self.entries.contains_key(&key) {
            return Err(Error::Invalid(format!(
                "duplicate entry (frame {}, {}, {})",
                key.frame, key.individual, key.keypoint
            )));
        }
        self.entries.insert(key, obs);
        Ok(())
    }

    pub fn get(&self, frame: u32, individual: &str, keypoint: Keypoint) -> Option<&O> {
        self.entries.get(&TrackKey::new(frame, individual, keypoint))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TrackKey, &O)> {
        self.entries.iter()
    }

    pub fn frames(&self) -> Vec<u32> {
        let mut frames: Vec<u32> = self.entries.keys().map(|k| k.frame).collect();
        frames.dedup();
        frames
    }

    pub fn individuals(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.entries.keys().map(|k| k.individual.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }

    /// Per-(individual, keypoint) tracks, each sorted by frame.
    pub fn tracks(&self) -> BTreeMap<(String, Keypoint), Vec<(u32, O)>> {
        let mut out: BTreeMap<(String, Keypoint), Vec<(u32, O)>> = BTreeMap::new();
        for (k, o) in &self.entries {
            out.entry((k.individual.clone(), k.keypoint)).or_default().push((k.frame, *o));
        }
        out
    }

    /// Keeps the entries for which `keep` returns true.
    pub fn retain(&mut self, mut keep: impl FnMut(&TrackKey, &O) -> bool) {
        self.entries.retain(|k, o| keep(k, o));
    }

    /// Restricts the set to frames `<= last`.
    pub fn truncated(&self, last: u32) -> Self {
        let mut out = self.clone();
        out.retain(|k, _| k.frame <= last);
        out
    }

    pub(crate) fn insert_unchecked(&mut self, key: TrackKey, obs: O) {
        self.entries.insert(key, obs);
    }
}

impl<O: Observation> FromIterator<(TrackKey, O)> for TrackSet<O> {
    /// Builds a set at the default frame rate sized to the largest frame.
    fn from_iter<I: IntoIterator<Item = (TrackKey, O)>>(iter: I) -> Self {
        let entries: BTreeMap<TrackKey, O> = iter.into_iter().collect();
        let n_frames = entries.keys().map(|k| k.frame + 1).max().unwrap_or(0);
        Self { fps: DEFAULT_FPS, n_frames, entries }
    }
}
