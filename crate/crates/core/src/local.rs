//! Single-particle ("local") energies.
//!
//! In two dimensions the local problem is the isoperimetric problem, so the
//! per-particle energy has the closed form `e2d(m) = m²/2π + 2√(πm)`. It is not
//! subadditive, and its lower-semicontinuous envelope is attained by splitting
//! the mass into finitely many equal parts.
//!
//! In three dimensions no closed form is known. Everything here uses the ball
//! ansatz, which is an upper bound for the true infimum and is labeled as such.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::torus::Dim;

/// Mass of a single particle; always positive and finite.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Mass(f64);

impl Mass {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidInput(format!(
                "mass must be positive and finite, got {value}"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Mass {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Mass::new(value)
    }
}

impl From<Mass> for f64 {
    fn from(m: Mass) -> f64 {
        m.0
    }
}

/// Below this mass a particle never splits: `2^{-2/3} π`.
pub fn single_particle_threshold() -> f64 {
    PI / 2f64.powf(2.0 / 3.0)
}

/// Per-particle mass of the continuous-relaxation optimum: `2^{2/3} π`.
pub fn optimal_particle_mass() -> f64 {
    PI * 2f64.powf(2.0 / 3.0)
}

/// Upper end of the strict concavity interval of the 3D local energy.
pub const CONCAVITY_BOUNDARY: f64 = 2.0 * PI;

pub fn e2d(m: Mass) -> f64 {
    let m = m.get();
    m * m / (2.0 * PI) + 2.0 * (PI * m).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    pub n: usize,
    pub per_mass: f64,
    pub envelope_value: f64,
}

/// Lower-semicontinuous envelope of `e2d` with its optimal equal partition.
///
/// Optimal partitions have equal parts, and no part of a multi-part optimum is
/// lighter than `2^{-2/3} π`, so `n <= ceil(M / 2^{-2/3}π) + 1` brackets the
/// optimum. Exact ties go to the smaller `n`.
pub fn envelope_2d(total: Mass) -> PartitionResult {
    let m = total.get();
    let n_max = (m / single_particle_threshold()).ceil() as usize + 1;
    let mut best = PartitionResult {
        n: 1,
        per_mass: m,
        envelope_value: e2d(total),
    };
    for n in 2..=n_max {
        let per = m / n as f64;
        let value = n as f64 * e2d(Mass(per));
        if value < best.envelope_value {
            best = PartitionResult {
                n,
                per_mass: per,
                envelope_value: value,
            };
        }
    }
    best
}

/// Self-interaction constant of a unit-density disc of area `m`:
/// `-(1/2π) ∬ log|x - y| = m²/8π (1 - 2 log(m/π))`.
pub fn f0(m: Mass) -> f64 {
    let m = m.get();
    m * m / (8.0 * PI) * (1.0 - 2.0 * (m / PI).ln())
}

/// Radius of the unit-density ball of mass `m`.
pub fn ball_radius(m: f64) -> f64 {
    (3.0 * m / (4.0 * PI)).cbrt()
}

/// Radius of the unit-density disc of mass `m`.
pub fn disc_radius(m: f64) -> f64 {
    (m / PI).sqrt()
}

/// Ball-ansatz energy for the 3D local problem: perimeter `4πr²` plus
/// whole-space self-interaction `8πr⁵/15`. Upper bound, not the proven infimum.
pub fn e3d_ball(m: Mass) -> EnergyBreakdown {
    let r = ball_radius(m.get());
    let perimeter = 4.0 * PI * r * r;
    let self_interaction = 8.0 * PI * r.powi(5) / 15.0;
    EnergyBreakdown::from_parts(Dim::Three, perimeter, self_interaction, 0.0, 0.0)
}

/// Second-variation coefficient `-(2/9) P + (10/9) S` of the ball family under
/// dilation; negative exactly when `m < 2π`.
pub fn concavity_coefficient(m: Mass) -> f64 {
    let b = e3d_ball(m);
    -2.0 / 9.0 * b.perimeter_term + 10.0 / 9.0 * b.self_h1_term
}

fn splitting_gap(m: f64) -> f64 {
    e3d_ball(Mass(m)).total - 2.0 * e3d_ball(Mass(0.5 * m)).total
}

/// Mass above which two far-apart half-mass balls beat one ball.
pub fn splitting_threshold_3d() -> Result<f64> {
    let (mut lo, mut hi) = (1e-3, 1e3);
    let (flo, fhi) = (splitting_gap(lo), splitting_gap(hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::NoRoot { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if splitting_gap(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest difference quotient of the 2D envelope over `pairs` consecutive
/// grid cells spanning `[delta, 1/delta]`.
pub fn lipschitz_probe_envelope_with(delta: f64, pairs: usize) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let (a, b) = (delta, 1.0 / delta);
    let h = (b - a) / pairs as f64;
    let env = |x: f64| envelope_2d(Mass(x)).envelope_value;
    let mut prev = env(a);
    let mut max = 0.0f64;
    for i in 1..=pairs {
        let x = a + i as f64 * h;
        let cur = env(x);
        max = max.max((cur - prev).abs() / h);
        prev = cur;
    }
    Ok(max)
}

pub fn lipschitz_probe_envelope(delta: f64) -> Result<f64> {
    lipschitz_probe_envelope_with(delta, 10_000)
}
