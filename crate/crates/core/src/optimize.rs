//! Multi-start gradient descent on the torus interaction energy
//! `Σ_{i≠j} m_i m_j G(x_i - x_j)`, plus explicit lattice candidates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::{evaluator, EwaldParameters, Green};
use crate::limits::{interaction_energy, Particle, PointConfiguration};
use crate::local::Mass;
use crate::torus::{min_image, norm, Dim, TorusPoint, Vec3};

pub const ARMIJO: f64 = 1e-4;
pub const SHRINK: f64 = 0.5;
pub const COALESCENCE_GUARD: f64 = 1e-4;
pub const MAX_ITERATIONS: usize = 100_000;
/// Below this step size a line search gives up.
const MIN_STEP: f64 = 1e-30;
/// Energy slack, in units of `ε |E|`, tolerated when the gradient still drops.
const ROUNDOFF_SLACK: f64 = 8.0;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    pub config: PointConfiguration,
    /// Interaction part only, ordered pair sum.
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    /// Index of the start that produced this result.
    pub restart_index: usize,
    pub converged: bool,
    /// Sorted min-image distances over unordered pairs.
    pub pairwise_distances: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct PlaceOptions {
    pub restarts: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iterations: usize,
    pub params: EwaldParameters,
    /// Add the square lattice as an extra start when it fits.
    pub inject_lattice: bool,
    /// Extra start placed before the random ones.
    pub initial: Option<Vec<Vec<f64>>>,
}

impl Default for PlaceOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            seed: 0,
            tol: 1e-8,
            max_iterations: MAX_ITERATIONS,
            params: EwaldParameters::default(),
            inject_lattice: true,
            initial: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lattice {
    Square,
    TriangularSheared,
}

impl std::str::FromStr for Lattice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(Lattice::Square),
            "triangular-sheared" => Ok(Lattice::TriangularSheared),
            other => Err(Error::InvalidInput(format!(
                "lattice must be 'square' or 'triangular-sheared', got '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for Lattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Lattice::Square => "square",
            Lattice::TriangularSheared => "triangular-sheared",
        })
    }
}

fn integer_root(n: usize, d: u32) -> Option<usize> {
    let s = (n as f64).powf(1.0 / d as f64).round() as usize;
    (s.saturating_sub(1)..=s + 1).find(|&t| t.pow(d) == n && t > 0)
}

/// Positions of an explicit lattice arrangement of `n` points.
///
/// `Square` needs `n = s^d` and uses spacing `1/s`. `TriangularSheared` is
/// two-dimensional with `n = 2k²`: `2k` rows at height `j/(2k)`, each holding
/// `k` points, odd rows shifted by half a spacing.
pub fn lattice_positions(dim: Dim, n: usize, lattice: Lattice) -> Result<Vec<Vec<f64>>> {
    let incommensurate = |reason: &str| Error::IncommensurateCount {
        n,
        lattice: lattice.to_string(),
        reason: reason.to_string(),
    };
    match lattice {
        Lattice::Square => {
            let d = dim.n() as u32;
            let s = integer_root(n, d).ok_or_else(|| {
                incommensurate(if d == 2 {
                    "n must be a perfect square"
                } else {
                    "n must be a perfect cube"
                })
            })?;
            let h = 1.0 / s as f64;
            Ok((0..n)
                .map(|idx| {
                    let mut r = idx;
                    (0..d)
                        .map(|_| {
                            let c = r % s;
                            r /= s;
                            c as f64 * h
                        })
                        .collect::<Vec<_>>()
                        .into_iter()
                        .rev()
                        .collect()
                })
                .collect())
        }
        Lattice::TriangularSheared => {
            if dim != Dim::Two {
                return Err(incommensurate(
                    "the sheared triangular lattice is two-dimensional",
                ));
            }
            let k = n
                .is_multiple_of(2)
                .then(|| integer_root(n / 2, 2))
                .flatten()
                .ok_or_else(|| incommensurate("n must equal 2k² for an integer k"))?;
            let kf = k as f64;
            let mut out = Vec::with_capacity(n);
            for j in 0..2 * k {
                let shift = if j % 2 == 1 { 0.5 } else { 0.0 };
                for i in 0..k {
                    out.push(vec![(i as f64 + shift) / kf, j as f64 / (2.0 * kf)]);
                }
            }
            Ok(out)
        }
    }
}

/// Interaction energy of `n` equal masses on the requested lattice.
pub fn lattice_candidate_energy(
    dim: Dim,
    n: usize,
    mass: f64,
    lattice: Lattice,
    params: &EwaldParameters,
) -> Result<f64> {
    let positions = lattice_positions(dim, n, lattice)?;
    let raw: Vec<(f64, Vec<f64>)> = positions.into_iter().map(|x| (mass, x)).collect();
    let config = PointConfiguration::from_raw(dim, &raw)?;
    interaction_energy(&config, &*evaluator(dim, params)?)
}

struct Objective<'a> {
    green: &'a Green,
    masses: &'a [f64],
    dim: Dim,
}

impl Objective<'_> {
    fn min_distance(&self, x: &[Vec3]) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..x.len() {
            for j in (i + 1)..x.len() {
                d = d.min(norm(min_image(self.dim, sub(x[i], x[j]))));
            }
        }
        d
    }

    fn energy(&self, x: &[Vec3]) -> Result<f64> {
        let mut e = 0.0;
        for i in 0..x.len() {
            for j in (i + 1)..x.len() {
                e +=
                    2.0 * self.masses[i] * self.masses[j] * self.green.eval_vec(sub(x[i], x[j]))?;
            }
        }
        Ok(e)
    }

    fn gradient(&self, x: &[Vec3]) -> Result<Vec<Vec3>> {
        let mut g = vec![[0.0; 3]; x.len()];
        for i in 0..x.len() {
            for j in (i + 1)..x.len() {
                let dg = self.green.grad_vec(sub(x[i], x[j]))?;
                let c = 2.0 * self.masses[i] * self.masses[j];
                for k in 0..3 {
                    g[i][k] += c * dg[k];
                    g[j][k] -= c * dg[k];
                }
            }
        }
        Ok(g)
    }
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn grad_norm(g: &[Vec3]) -> f64 {
    g.iter()
        .flat_map(|v| v.iter())
        .map(|c| c * c)
        .sum::<f64>()
        .sqrt()
}

fn wrap(dim: Dim, x: Vec3) -> Vec3 {
    TorusPoint::from_vec3(dim, x).vec3()
}

struct Descent {
    x: Vec<Vec3>,
    energy: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
}

fn descend(obj: &Objective, start: Vec<Vec3>, tol: f64, max_iterations: usize) -> Result<Descent> {
    let n = start.len();
    let mut x = start;
    let mut e = obj.energy(&x)?;
    let mut g = obj.gradient(&x)?;
    let mut gn = grad_norm(&g);
    let mut it = 0;
    while gn > tol && it < max_iterations {
        let mut t = 0.1 / n as f64;
        let mut accepted = None;
        while t > MIN_STEP {
            let trial: Vec<Vec3> = x
                .iter()
                .zip(&g)
                .map(|(p, d)| wrap(obj.dim, [p[0] - t * d[0], p[1] - t * d[1], p[2] - t * d[2]]))
                .collect();
            if obj.min_distance(&trial) < COALESCENCE_GUARD {
                t *= SHRINK;
                continue;
            }
            let et = obj.energy(&trial)?;
            if et <= e - ARMIJO * t * gn * gn {
                accepted = Some((trial, et, None));
                break;
            }
            // near a minimum the Armijo decrease drowns in roundoff
            if et <= e + ROUNDOFF_SLACK * f64::EPSILON * e.abs() {
                let gt = obj.gradient(&trial)?;
                if grad_norm(&gt) < gn {
                    accepted = Some((trial, et, Some(gt)));
                    break;
                }
            }
            t *= SHRINK;
        }
        let Some((trial, et, gt)) = accepted else {
            break;
        };
        debug_assert!(et <= e + ROUNDOFF_SLACK * f64::EPSILON * e.abs());
        x = trial;
        e = et;
        g = match gt {
            Some(gt) => gt,
            None => obj.gradient(&x)?,
        };
        gn = grad_norm(&g);
        it += 1;
    }
    Ok(Descent {
        x,
        energy: e,
        grad_norm: gn,
        iterations: it,
        converged: gn <= tol,
    })
}

fn random_start(dim: Dim, n: usize, seed: u64, stream: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    loop {
        let x: Vec<Vec3> = (0..n)
            .map(|_| {
                let mut v = [0.0; 3];
                for c in v.iter_mut().take(dim.n()) {
                    *c = rng.random::<f64>();
                }
                v
            })
            .collect();
        let far_enough =
            (0..n).all(|i| ((i + 1)..n).all(|j| norm(min_image(dim, sub(x[i], x[j]))) >= 1e-2));
        if far_enough {
            return x;
        }
    }
}

/// Multi-start descent with default options apart from the arguments.
pub fn place(
    dim: Dim,
    masses: &[f64],
    restarts: usize,
    seed: u64,
    tol: f64,
) -> Result<OptimizationResult> {
    place_with(
        dim,
        masses,
        &PlaceOptions {
            restarts,
            seed,
            tol,
            ..PlaceOptions::default()
        },
    )
}

pub fn place_with(dim: Dim, masses: &[f64], options: &PlaceOptions) -> Result<OptimizationResult> {
    let n = masses.len();
    if n < 2 {
        return Err(Error::InvalidInput(
            "placement needs at least two particles".into(),
        ));
    }
    for &m in masses {
        Mass::new(m)?;
    }
    if !(1e-12..=1e-4).contains(&options.tol) {
        return Err(Error::InvalidInput(format!(
            "tol must lie in [1e-12, 1e-4], got {}",
            options.tol
        )));
    }
    let green = evaluator(dim, &options.params)?;

    let mut starts: Vec<Vec<Vec3>> = Vec::new();
    if let Some(init) = &options.initial {
        if init.len() != n {
            return Err(Error::InvalidInput(format!(
                "initial configuration has {} points, expected {n}",
                init.len()
            )));
        }
        starts.push(
            init.iter()
                .map(|p| Ok(TorusPoint::new(dim, p)?.vec3()))
                .collect::<Result<_>>()?,
        );
    }
    for r in 0..options.restarts {
        starts.push(random_start(dim, n, options.seed, r as u64));
    }
    let equal = masses.iter().all(|&m| m == masses[0]);
    if options.inject_lattice && equal {
        if let Ok(p) = lattice_positions(dim, n, Lattice::Square) {
            starts.push(
                p.iter()
                    .map(|x| TorusPoint::new(dim, x).expect("valid").vec3())
                    .collect(),
            );
        }
    }
    if starts.is_empty() {
        return Err(Error::InvalidInput(
            "at least one restart is required".into(),
        ));
    }

    let obj = Objective {
        green: &green,
        masses,
        dim,
    };
    let runs: Vec<Result<Descent>> = starts
        .into_par_iter()
        .map(|s| descend(&obj, s, options.tol, options.max_iterations))
        .collect();
    let runs: Vec<Descent> = runs.into_iter().collect::<Result<_>>()?;
    let restarts_used = runs.len();

    let pick = |only_converged: bool| {
        runs.iter()
            .enumerate()
            .filter(|(_, r)| r.converged || !only_converged)
            .fold(None, |best: Option<(usize, &Descent)>, (i, r)| match best {
                Some((_, b)) if b.energy <= r.energy => best,
                _ => Some((i, r)),
            })
    };
    let (index, run, converged) = match pick(true) {
        Some((i, r)) => (i, r, true),
        None => {
            let (i, r) = pick(false).expect("at least one run");
            (i, r, false)
        }
    };

    let raw: Vec<(f64, Vec<f64>)> = masses
        .iter()
        .zip(&run.x)
        .map(|(&m, x)| (m, x[..dim.n()].to_vec()))
        .collect();
    let config = PointConfiguration::from_raw(dim, &raw)?;
    let result = OptimizationResult {
        energy: interaction_energy(&config, &green)?,
        pairwise_distances: pairwise_distances(&config),
        config,
        grad_norm: run.grad_norm,
        iterations: run.iterations,
        restarts_used,
        restart_index: index,
        converged,
    };
    if converged {
        Ok(result)
    } else {
        Err(Error::NoConvergence {
            best: Box::new(result),
        })
    }
}

/// Sorted min-image distances over unordered pairs.
pub fn pairwise_distances(config: &PointConfiguration) -> Vec<f64> {
    let ps = config.particles();
    let mut d = Vec::new();
    for i in 0..ps.len() {
        for j in (i + 1)..ps.len() {
            d.push(ps[i].position.distance(&ps[j].position));
        }
    }
    d.sort_by(f64::total_cmp);
    d
}

/// Gradient of the interaction energy with respect to each position.
pub fn interaction_gradient(
    config: &PointConfiguration,
    params: &EwaldParameters,
) -> Result<Vec<Vec<f64>>> {
    let dim = config.dim();
    let green = evaluator(dim, params)?;
    let masses: Vec<f64> = config.particles().iter().map(|p| p.mass.get()).collect();
    let x: Vec<Vec3> = config
        .particles()
        .iter()
        .map(|p: &Particle| p.position.vec3())
        .collect();
    let obj = Objective {
        green: &green,
        masses: &masses,
        dim,
    };
    Ok(obj
        .gradient(&x)?
        .into_iter()
        .map(|g| g[..dim.n()].to_vec())
        .collect())
}
