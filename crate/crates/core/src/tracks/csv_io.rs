use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::format::{fmt_opt, fmt_sig9, parse_f64_field, read_key_values, value_f64, write_key_values};
use crate::{Vec2d, Vec3d};

use super::{ImageObservation, Observation, TrackKey, TrackSet, WorldObservation, DEFAULT_FPS};

const IMAGE_HEADER: &[&str] = &["frame", "individual_id", "keypoint", "x", "y", "confidence"];
const WORLD_HEADER: &[&str] =
    &["frame", "individual_id", "keypoint", "x", "y", "confidence", "x3d", "y3d", "z3d"];

/// Row (de)serialization for one observation type.
pub trait TrackRecord: Observation {
    /// Accepted headers; the first is the one written.
    fn headers() -> &'static [&'static [&'static str]];
    fn value_fields(&self) -> Vec<String>;
    fn from_value_fields(fields: &[&str]) -> std::result::Result<Self, String>;
}

fn parse_confidence(raw: &str) -> std::result::Result<Option<f64>, String> {
    if raw.is_empty() {
        return Ok(None);
    }
    let c = parse_f64_field(raw, "confidence")?;
    if !(0.0..=1.0).contains(&c) {
        return Err(format!("confidence {c} outside [0, 1]"));
    }
    Ok(Some(c))
}

impl TrackRecord for ImageObservation {
    fn headers() -> &'static [&'static [&'static str]] {
        &[IMAGE_HEADER]
    }

    fn value_fields(&self) -> Vec<String> {
        vec![fmt_sig9(self.pixel.x), fmt_sig9(self.pixel.y), fmt_opt(self.confidence)]
    }

    fn from_value_fields(f: &[&str]) -> std::result::Result<Self, String> {
        Ok(ImageObservation {
            pixel: Vec2d::new(parse_f64_field(f[0], "x")?, parse_f64_field(f[1], "y")?),
            confidence: parse_confidence(f[2])?,
        })
    }
}

impl TrackRecord for WorldObservation {
    fn headers() -> &'static [&'static [&'static str]] {
        &[WORLD_HEADER, IMAGE_HEADER]
    }

    fn value_fields(&self) -> Vec<String> {
        let mut out = vec![fmt_sig9(self.position.x), fmt_sig9(self.position.y), fmt_opt(self.confidence)];
        match self.point3 {
            Some(p) => out.extend([fmt_sig9(p.x), fmt_sig9(p.y), fmt_sig9(p.z)]),
            None => out.extend([String::new(), String::new(), String::new()]),
        }
        out
    }

    fn from_value_fields(f: &[&str]) -> std::result::Result<Self, String> {
        let position = Vec2d::new(parse_f64_field(f[0], "x")?, parse_f64_field(f[1], "y")?);
        let confidence = parse_confidence(f[2])?;
        let point3 = match f.get(3..6) {
            None => None,
            Some(["", "", ""]) => None,
            Some(p) => Some(Vec3d::new(
                parse_f64_field(p[0], "x3d")?,
                parse_f64_field(p[1], "y3d")?,
                parse_f64_field(p[2], "z3d")?,
            )),
        };
        Ok(WorldObservation { position, confidence, point3 })
    }
}

/// Sidecar metadata path: the track file with its extension replaced by `.meta`.
pub fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

fn read_set<O: TrackRecord>(path: &Path) -> Result<TrackSet<O>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut records = reader.records();

    let header = match records.next() {
        None => return Err(Error::parse(path, 1, "missing header")),
        Some(r) => r.map_err(|e| Error::parse(path, 1, e.to_string()))?,
    };
    let header: Vec<&str> = header.iter().collect();
    let Some(columns) = O::headers().iter().find(|h| **h == header.as_slice()) else {
        return Err(Error::parse(
            path,
            1,
            format!("unexpected header {:?}, expected {:?}", header.join(","), O::headers()[0].join(",")),
        ));
    };

    let (fps, declared_frames) = match read_key_values(&meta_path(path)) {
        Ok(meta) => {
            let fps = meta.get("fps").map(|_| value_f64(&meta, "fps", path)).transpose()?;
            let n = meta.get("n_frames").map(|_| value_f64(&meta, "n_frames", path)).transpose()?;
            (fps.unwrap_or(DEFAULT_FPS), n.map(|n| n as u32))
        }
        Err(Error::Io { source, .. }) if source.kind() == std::io::ErrorKind::NotFound => (DEFAULT_FPS, None),
        Err(e) => return Err(e),
    };
    if !(fps > 0.0) {
        return Err(Error::Schema(format!("{}: fps must be positive", path.display())));
    }

    let mut set = TrackSet::new(fps, u32::MAX);
    let mut max_frame: Option<u32> = None;
    for record in records {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::parse(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != columns.len() {
            return Err(Error::parse(
                path,
                line,
                format!("expected {} fields, found {}", columns.len(), record.len()),
            ));
        }
        let fields: Vec<&str> = record.iter().collect();
        let frame: u32 = fields[0]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("frame: {:?} is not a non-negative integer", fields[0])))?;
        if fields[1].is_empty() {
            return Err(Error::parse(path, line, "individual_id is empty"));
        }
        let keypoint = fields[2].parse().map_err(|m: String| Error::parse(path, line, m))?;
        let obs = O::from_value_fields(&fields[3..]).map_err(|m| Error::parse(path, line, m))?;
        if let Some(n) = declared_frames {
            if frame >= n {
                return Err(Error::integrity(path, line, format!("frame {frame} outside [0, {n})")));
            }
        }
        let key = TrackKey::new(frame, fields[1], keypoint);
        if set.get(key.frame, &key.individual, key.keypoint).is_some() {
            return Err(Error::integrity(
                path,
                line,
                format!("duplicate entry (frame {frame}, {}, {keypoint})", key.individual),
            ));
        }
        max_frame = Some(max_frame.map_or(frame, |m| m.max(frame)));
        set.insert_unchecked(key, obs);
    }
    set.n_frames = declared_frames.unwrap_or_else(|| max_frame.map_or(0, |m| m + 1));
    Ok(set)
}

pub fn read_tracks(path: &Path) -> Result<TrackSet<ImageObservation>> {
    read_set(path)
}

pub fn read_world_tracks(path: &Path) -> Result<TrackSet<WorldObservation>> {
    read_set(path)
}

/// Writes the CSV and its `.meta` sidecar; rows in (frame, individual, keypoint) order.
pub fn write_tracks<O: TrackRecord>(set: &TrackSet<O>, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", O::headers()[0].join(",")).map_err(io)?;
    for (key, obs) in set.iter() {
        let mut fields = vec![key.frame.to_string(), csv_field(&key.individual), key.keypoint.to_string()];
        fields.extend(obs.value_fields());
        writeln!(w, "{}", fields.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)?;
    write_key_values(
        &meta_path(path),
        [("fps", fmt_sig9(set.fps)), ("n_frames", set.n_frames.to_string())],
    )
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) || s.trim() != s {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
