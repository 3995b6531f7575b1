//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oklim_core::special::{gauss_legendre, integrate};
use oklim_core::torus::min_image;
use oklim_core::Dim;

/// `Σ_{k≠0} e^{2πik·x} / (4π²|k|²)` with the axis of largest `|x_a|`
/// summed in closed form and the remaining axes truncated at `|k_a| ≤ cutoff`.
pub fn fourier_green(dim: Dim, x: &[f64], cutoff: i64) -> f64 {
    let mut v = [0.0; 3];
    v[..dim.n()].copy_from_slice(x);
    let v = min_image(dim, v);
    let axis = (0..dim.n())
        .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()))
        .unwrap();
    let z = v[axis].rem_euclid(1.0);
    let others: Vec<f64> = (0..dim.n()).filter(|&a| a != axis).map(|a| v[a]).collect();
    // q = 0 row: Σ_{k≠0} cos(2πkz)/k² = 2π² B₂(z)
    let mut s = 0.5 * (z * z - z + 1.0 / 6.0);
    let line = |q: f64| {
        // Σ_k e^{2πikz} / (q² + k²)
        PI / q * ((-2.0 * PI * q * z).exp() + (-2.0 * PI * q * (1.0 - z)).exp())
            / (1.0 - (-2.0 * PI * q).exp())
    };
    let mut rest = 0.0;
    match others.len() {
        1 => {
            for k in 1..=cutoff {
                let q = k as f64;
                rest += 2.0 * (2.0 * PI * q * others[0]).cos() * line(q);
            }
        }
        2 => {
            for k1 in -cutoff..=cutoff {
                for k2 in -cutoff..=cutoff {
                    if k1 == 0 && k2 == 0 {
                        continue;
                    }
                    let q = ((k1 * k1 + k2 * k2) as f64).sqrt();
                    let phase = 2.0 * PI * (k1 as f64 * others[0] + k2 as f64 * others[1]);
                    rest += phase.cos() * line(q);
                }
            }
        }
        _ => unreachable!(),
    }
    s += rest / (4.0 * PI * PI);
    s
}

/// Self-interaction `∫ u χ` of the unit ball with `-Δu = χ`, from the radial
/// potential `u(r) = ∫₀¹ s² / max(r, s) ds` and nested Gauss-Legendre rules.
pub fn radial_poisson_ball_self_energy() -> f64 {
    let u = |r: f64| {
        integrate(|s| s * s / r.max(s), 0.0, r, 4, 20)
            + integrate(|s| s * s / r.max(s), r, 1.0, 4, 20)
    };
    4.0 * PI * integrate(|r| u(r) * r * r, 0.0, 1.0, 8, 20)
}

/// `-(1/2π) ∬ log|x - y|` over the disc of area `m`, by a tensor product of
/// polar rules. The two factors use different radial orders and a half-step
/// angular offset so no node pair coincides.
pub fn f0_disc_quadrature(m: f64, n_r: usize, n_theta: usize) -> f64 {
    let radius = (m / PI).sqrt();
    let nodes = |nr: usize, nt: usize, offset: f64| {
        let (x, w) = gauss_legendre(nr);
        let mut out = Vec::with_capacity(nr * nt);
        for (xi, wi) in x.iter().zip(&w) {
            let r = 0.5 * (xi + 1.0) * radius;
            let wr = 0.5 * wi * radius * r * 2.0 * PI / nt as f64;
            for j in 0..nt {
                let th = (j as f64 + offset) * 2.0 * PI / nt as f64;
                out.push((r * th.cos(), r * th.sin(), wr));
            }
        }
        out
    };
    let a = nodes(n_r, n_theta, 0.0);
    let b = nodes(n_r + 1, n_theta + 1, 0.5);
    use rayon::prelude::*;
    let s: f64 = a
        .par_iter()
        .map(|&(x1, y1, w1)| {
            w1 * b
                .iter()
                .map(|&(x2, y2, w2)| w2 * ((x1 - x2).hypot(y1 - y2)).ln())
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    -s / (2.0 * PI)
}

/// Node-pair count of `f0_disc_quadrature`.
pub fn f0_quadrature_pairs(n_r: usize, n_theta: usize) -> usize {
    n_r * n_theta * (n_r + 1) * (n_theta + 1)
}

/// Perimeter of the disc of area `m` by the trapezoid rule on its arc length.
pub fn disc_perimeter_quadrature(m: f64) -> f64 {
    let r = (m / PI).sqrt();
    let n = 64;
    let h = 2.0 * PI / n as f64;
    (0..n)
        .map(|i| {
            let t = i as f64 * h;
            let (dx, dy) = (-r * t.sin(), r * t.cos());
            dx.hypot(dy) * h
        })
        .sum()
}

/// Brute-force minimum of `Σ e(m_i)` over at most `max_parts` parts whose
/// masses are positive multiples of `total / steps` summing to `total`.
/// Returns the minimal value and its parts.
pub fn brute_force_partition(
    e: impl Fn(f64) -> f64,
    total: f64,
    steps: usize,
    max_parts: usize,
) -> (f64, Vec<f64>) {
    let h = total / steps as f64;
    let table: Vec<f64> = (0..=steps).map(|j| e(j as f64 * h)).collect();
    fn rec(
        left: usize,
        parts_left: usize,
        min_part: usize,
        acc: f64,
        chosen: &mut Vec<usize>,
        table: &[f64],
        best: &mut (f64, Vec<usize>),
    ) {
        if left == 0 {
            if acc < best.0 {
                *best = (acc, chosen.clone());
            }
            return;
        }
        if parts_left == 0 {
            return;
        }
        // non-decreasing parts enumerate each multiset once
        for j in min_part..=left {
            if parts_left == 1 && j != left {
                continue;
            }
            chosen.push(j);
            rec(
                left - j,
                parts_left - 1,
                j,
                acc + table[j],
                chosen,
                table,
                best,
            );
            chosen.pop();
        }
    }
    let mut best = (f64::INFINITY, Vec::new());
    rec(steps, max_parts, 1, 0.0, &mut Vec::new(), &table, &mut best);
    (best.0, best.1.iter().map(|&j| j as f64 * h).collect())
}

/// `∫_{[-h/2,h/2]³} dx / (4π|x|)` via the symmetric tetrahedral reduction.
pub fn cube_coulomb_integral(h: f64) -> f64 {
    // 48 copies of {0 ≤ z ≤ y ≤ x ≤ 1/2}, with y = xu, z = xuv
    let inner = integrate(
        |u| {
            integrate(
                |v| u / (1.0 + u * u + u * u * v * v).sqrt(),
                0.0,
                1.0,
                1,
                20,
            )
        },
        0.0,
        1.0,
        1,
        20,
    );
    6.0 * inner * h * h / (4.0 * PI)
}

/// `∫_{[-h/2,h/2]²} -(1/2π) log|x| dx`.
pub fn square_log_integral(h: f64) -> f64 {
    // 8 copies of {0 ≤ y ≤ x ≤ 1/2} with y = xu, then rescale by h
    let angular = integrate(|u| 0.5 * (1.0 + u * u).ln(), 0.0, 1.0, 1, 20);
    let unit = 8.0 * ((0.5f64.ln() / 8.0 - 1.0 / 16.0) + angular / 8.0);
    -(h * h * (unit + h.ln())) / (2.0 * PI)
}

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Point in `[0,1)^d` with min-image distance to the origin at least `r_min`.
pub fn point_away_from_origin(rng: &mut ChaCha8Rng, dim: Dim, r_min: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..dim.n()).map(|_| rng.random::<f64>()).collect();
        let mut v = [0.0; 3];
        v[..dim.n()].copy_from_slice(&x);
        if oklim_core::torus::norm(min_image(dim, v)) >= r_min {
            return x;
        }
    }
}
