//! Independent oracles shared by the integration tests and the acceptance gate.
#![allow(dead_code)]

use rand::Rng;
use sbd_core::config_space::{Configuration, Point};
use sbd_core::rate_models::ContactParams;

/// Euclidean distance, summed in coordinate order.
pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `min_π max_i |η_i - ζ_π(i)|` over all `n!` bijections (Heap's algorithm).
pub fn brute_force_rho(eta: &Configuration, zeta: &Configuration) -> f64 {
    if eta.len() != zeta.len() {
        return f64::INFINITY;
    }
    let n = eta.len();
    if n == 0 {
        return 0.0;
    }
    let e: Vec<&[f64]> = eta.iter().map(|p| p.coords()).collect();
    let z: Vec<&[f64]> = zeta.iter().map(|p| p.coords()).collect();
    let cost = |perm: &[usize]| {
        perm.iter()
            .enumerate()
            .map(|(i, &j)| euclid(e[i], z[j]))
            .fold(0.0f64, f64::max)
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = cost(&perm);
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(cost(&perm));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// `n` distinct points with coordinates uniform in `[-scale, scale]`.
pub fn random_config<R: Rng>(rng: &mut R, n: usize, d: usize, scale: f64) -> Configuration {
    let mut c = Configuration::empty();
    while c.len() < n {
        let p = Point::new((0..d).map(|_| rng.random_range(-scale..scale)).collect()).unwrap();
        c.insert(p).unwrap();
    }
    c
}

/// Contact-model birth rate written out from the parameters.
pub fn contact_birth_rate(p: &ContactParams, x: &[f64], eta: &Configuration) -> f64 {
    let imm = if euclid(x, p.x_empty.coords()) <= p.r_empty {
        p.c_imm
    } else {
        0.0
    };
    let nbrs = eta.iter().filter(|y| euclid(x, y.coords()) <= p.r).count();
    imm + p.c_b * nbrs as f64
}

/// Contact-model death rate of `x ∈ η` written out from the parameters.
pub fn contact_death_rate(p: &ContactParams, x: &Point, eta: &Configuration) -> f64 {
    let nbrs = eta
        .iter()
        .filter(|y| *y != x && euclid(x.coords(), y.coords()) <= p.r)
        .count();
    p.delta + p.gamma * nbrs as f64
}

/// Pearson statistic for homogeneity of two count vectors over the same cells;
/// cells empty in both samples are dropped. Returns `(statistic, dof)`.
pub fn two_sample_chi_square(a: &[u64], b: &[u64]) -> (f64, usize) {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let n = na + nb;
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let t = (x + y) as f64;
        if t == 0.0 {
            continue;
        }
        cells += 1;
        let (ea, eb) = (t * na / n, t * nb / n);
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    (stat, cells.saturating_sub(1))
}

/// Poisson pmf by the product form, for `k` small.
pub fn poisson_pmf(mean: f64, k: u64) -> f64 {
    (1..=k).fold((-mean).exp(), |acc, i| acc * mean / i as f64)
}

/// Independent path check: consecutive vertices differ by one point, every new
/// point is within `r/2` of a point already present, and the step out of `∅`
/// goes to `{x_∅}`.
pub fn path_is_valid(vertices: &[Configuration], r: f64, x_empty: &Point) -> bool {
    vertices.windows(2).all(|w| {
        let (a, b) = (&w[0], &w[1]);
        let added: Vec<&Point> = b.iter().filter(|p| !a.contains(p)).collect();
        let removed = a.iter().filter(|p| !b.contains(p)).count();
        match (added.len(), removed) {
            (0, 1) => true,
            (1, 0) if a.is_empty() => added[0] == x_empty,
            (1, 0) => a
                .iter()
                .any(|y| euclid(y.coords(), added[0].coords()) <= r / 2.0),
            _ => false,
        }
    })
}

/// `2 (Σ ⌈4 |x - x_∅| / r⌉ + |η|)`, computed directly.
pub fn length_bound(eta: &Configuration, r: f64, x_empty: &Point) -> usize {
    let hops: f64 = eta
        .iter()
        .map(|x| (4.0 * euclid(x.coords(), x_empty.coords()) / r).ceil())
        .sum();
    2 * (hops as usize + eta.len())
}
