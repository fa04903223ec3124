use std::path::Path;

use crate::error::{Error, Result};
use crate::format::fmt_opt;

use super::binning::BinRow;
use super::herd::{FrameMetrics, IndividualMetrics};
use super::savgol::savgol_smooth;

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let io = |e: csv::Error| Error::Io { path: path.to_path_buf(), source: e.into() };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_frame_metrics(path: &Path, rows: &[FrameMetrics]) -> Result<()> {
    write_rows(
        path,
        &["frame", "polarization", "mean_dir_x", "mean_dir_y", "mean_pair_dist", "max_pair_dist", "pearson_r"],
        rows.iter().map(|r| {
            [
                r.frame.to_string(),
                fmt_opt(r.polarization),
                fmt_opt(r.mean_dir.map(|d| d.x)),
                fmt_opt(r.mean_dir.map(|d| d.y)),
                fmt_opt(r.mean_pair_dist),
                fmt_opt(r.max_pair_dist),
                fmt_opt(r.pearson_r),
            ]
        }),
    )
}

pub fn write_individual_metrics(path: &Path, rows: &[IndividualMetrics]) -> Result<()> {
    write_rows(
        path,
        &["frame", "individual_id", "alignment", "speed_bl_s", "dist_centroid_bl", "nn_dist_bl"],
        rows.iter().map(|r| {
            [
                r.frame.to_string(),
                r.individual.clone(),
                fmt_opt(r.alignment),
                fmt_opt(r.speed_bl_s),
                fmt_opt(r.dist_centroid_bl),
                fmt_opt(r.nn_dist_bl),
            ]
        }),
    )
}

pub fn write_bins(path: &Path, rows: &[BinRow]) -> Result<()> {
    write_rows(
        path,
        &["bin", "start_frame", "mean_speed_bl_s", "mean_polarization"],
        rows.iter().map(|r| [r.bin.to_string(), r.start_frame.to_string(), fmt_opt(r.mean_speed_bl_s), fmt_opt(r.mean_polarization)]),
    )
}

/// Smooths both binned columns over their present values, leaving empty bins
/// empty. The flag reports a column too short for the window.
pub fn smooth_bins(rows: &[BinRow], window: usize, order: usize) -> Result<(Vec<BinRow>, bool)> {
    let mut out = rows.to_vec();
    let mut too_short = false;
    for column in 0..2 {
        let get = |r: &BinRow| if column == 0 { r.mean_speed_bl_s } else { r.mean_polarization };
        let idx: Vec<usize> = (0..rows.len()).filter(|&i| get(&rows[i]).is_some()).collect();
        let vals: Vec<f64> = idx.iter().filter_map(|&i| get(&rows[i])).collect();
        let s = savgol_smooth(&vals, window, order)?;
        too_short |= s.too_short;
        for (&i, v) in idx.iter().zip(s.values) {
            if column == 0 {
                out[i].mean_speed_bl_s = Some(v);
            } else {
                out[i].mean_polarization = Some(v);
            }
        }
    }
    Ok((out, too_short))
}
