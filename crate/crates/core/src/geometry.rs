//! Euclidean balls: uniform sampling and intersection volumes.

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::config_space::{unit_ball_volume, Point};

/// Volume of a ball of radius `radius` in `R^d`.
pub fn ball_volume(d: usize, radius: f64) -> f64 {
    unit_ball_volume(d) * radius.powi(d as i32)
}

/// Uniform point in the closed ball `B(center, radius)`.
pub fn sample_in_ball(center: &Point, radius: f64, rng: &mut dyn RngCore) -> Point {
    let d = center.dim();
    if d == 1 {
        let u: f64 = rng.random_range(-1.0..=1.0);
        return Point::from_raw(vec![center.coords()[0] + radius * u]);
    }
    loop {
        let dir: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            continue;
        }
        let u: f64 = rng.random();
        let scale = radius * u.powf(1.0 / d as f64) / norm;
        let coords = center
            .coords()
            .iter()
            .zip(&dir)
            .map(|(c, v)| c + scale * v)
            .collect();
        return Point::from_raw(coords);
    }
}

/// Volume of the cap of height `h` cut from a ball of radius `radius` in `R^d`.
fn cap_volume(d: usize, radius: f64, h: f64) -> f64 {
    let h = h.clamp(0.0, 2.0 * radius);
    if h == 0.0 {
        return 0.0;
    }
    let full = ball_volume(d, radius);
    if h > radius {
        return full - cap_volume(d, radius, 2.0 * radius - h);
    }
    let x = ((2.0 * radius * h - h * h) / (radius * radius)).clamp(0.0, 1.0);
    0.5 * full * statrs::function::beta::beta_reg((d as f64 + 1.0) / 2.0, 0.5, x)
}

/// Volume of `B(c1, r1) ∩ B(c2, r2)` in `R^d` whose centers are `dist` apart.
pub fn ball_intersection_volume(d: usize, r1: f64, r2: f64, dist: f64) -> f64 {
    if dist >= r1 + r2 {
        return 0.0;
    }
    if dist <= (r1 - r2).abs() {
        return ball_volume(d, r1.min(r2));
    }
    // signed distance from c1 to the radical hyperplane
    let a1 = (dist * dist + r1 * r1 - r2 * r2) / (2.0 * dist);
    let h1 = r1 - a1;
    let h2 = r2 - (dist - a1);
    cap_volume(d, r1, h1) + cap_volume(d, r2, h2)
}
