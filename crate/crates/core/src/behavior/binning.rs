use std::collections::BTreeMap;

use super::herd::HerdMetrics;

#[derive(Debug, Clone, PartialEq)]
pub struct BinRow {
    pub bin: u32,
    pub start_frame: u32,
    pub mean_speed_bl_s: Option<f64>,
    pub mean_polarization: Option<f64>,
    /// Frames of the bin that carried any metric.
    pub frames: usize,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Fixed-width frame bins starting at frame 0. The per-frame speed is the mean
/// over individuals; a bin averages its per-frame values. A trailing partial
/// bin is kept.
pub fn bin_speed_polarization(metrics: &HerdMetrics, bin_frames: u32) -> Vec<BinRow> {
    assert!(bin_frames > 0, "bin width must be positive");
    let mut speed_by_frame: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for r in &metrics.individuals {
        if let Some(s) = r.speed_bl_s {
            speed_by_frame.entry(r.frame).or_default().push(s);
        }
    }
    let Some(last) = metrics.frames.iter().map(|f| f.frame).max() else {
        return Vec::new();
    };
    let n_bins = last / bin_frames + 1;
    let mut speeds = vec![Vec::new(); n_bins as usize];
    let mut pols = vec![Vec::new(); n_bins as usize];
    let mut counts = vec![0usize; n_bins as usize];
    for f in &metrics.frames {
        let b = (f.frame / bin_frames) as usize;
        counts[b] += 1;
        if let Some(p) = f.polarization {
            pols[b].push(p);
        }
        if let Some(s) = speed_by_frame.get(&f.frame).and_then(|v| mean(v)) {
            speeds[b].push(s);
        }
    }
    (0..n_bins)
        .map(|b| BinRow {
            bin: b,
            start_frame: b * bin_frames,
            mean_speed_bl_s: mean(&speeds[b as usize]),
            mean_polarization: mean(&pols[b as usize]),
            frames: counts[b as usize],
        })
        .collect()
}
