use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::Vec2d;

use super::config::HerdConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnimalState {
    pub centroid: Vec2d,
    pub heading: f64,
}

/// Shared speed envelope: `waves` bursts over `n_frames`, world units per second.
pub fn speed_envelope(herd: &HerdConfig, frame: u32, n_frames: u32) -> f64 {
    let phase = PI * f64::from(herd.waves) * f64::from(frame) / f64::from(n_frames);
    herd.base_speed + herd.wave_speed * phase.sin().powi(2)
}

fn shared_heading(herd: &HerdConfig, frame: u32, n_frames: u32) -> f64 {
    herd.heading_deg.to_radians() + herd.heading_swing_deg.to_radians() * (TAU * f64::from(frame) / f64::from(n_frames)).sin()
}

/// Mean-reverting heading walk per individual, all moving at the shared speed.
/// Returns `states[frame][individual]`.
pub fn simulate_herd<R: Rng>(herd: &HerdConfig, n_individuals: usize, n_frames: u32, fps: f64, rng: &mut R) -> Vec<Vec<AnimalState>> {
    let noise = Normal::new(0.0, herd.heading_noise_deg.to_radians()).expect("validated sigma");
    let start = Vec2d::new(herd.start[0], herd.start[1]);
    let h0 = shared_heading(herd, 0, n_frames);
    let mut current: Vec<AnimalState> = (0..n_individuals)
        .map(|_| {
            // uniform on the disc
            let r = herd.spread * rng.gen::<f64>().sqrt();
            let a = rng.gen::<f64>() * TAU;
            AnimalState { centroid: start + Vec2d::new(r * a.cos(), r * a.sin()), heading: h0 + noise.sample(rng) }
        })
        .collect();
    let mut out = Vec::with_capacity(n_frames as usize);
    out.push(current.clone());
    for f in 1..n_frames {
        let target = shared_heading(herd, f, n_frames);
        let step = speed_envelope(herd, f, n_frames) / fps;
        for a in &mut current {
            a.heading += herd.heading_pull * crate::scalar::wrap_angle(target - a.heading) + noise.sample(rng);
            a.centroid = a.centroid + Vec2d::new(a.heading.cos(), a.heading.sin()).scale(step);
        }
        out.push(current.clone());
    }
    out
}
