//! Finite-η sharp-interface energies of disjoint ball configurations.
//!
//! The `H⁻¹` norm is evaluated with a Gaussian split of the Fourier weight
//! `1/(4π²k²)`: the damped part `e^{-k²/K²}/(4π²k²)` is summed over
//! `0 < |k| ≤ Kc`, while the complement is a short-range kernel whose only
//! non-negligible contributions are the per-ball self terms, computed by
//! radial quadrature. `K` balances both truncation tails, and the combined tail
//! bound is reported with every evaluation.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::limits::PointConfiguration;
use crate::local::{ball_radius, disc_radius, e2d, e3d_ball, envelope_2d, f0, Mass};
use crate::special::{ball_form_factor, disc_form_factor, erfc, exp_integral_e1, integrate};
use crate::torus::{Dim, TorusPoint};

pub const DEFAULT_FOURIER_CUTOFF: usize = 48;
pub const MIN_FOURIER_CUTOFF: usize = 16;
pub const MAX_ETA: f64 = 0.25;
/// Smallest admissible gap between ball surfaces.
pub const MIN_CLEARANCE: f64 = 1e-6;
/// Relative truncation tolerance enforced by `sharp_energy`.
pub const TRUNCATION_RTOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub mass: Mass,
    pub center: TorusPoint,
}

/// Balls of mass `m_i` and physical radius `η r(m_i)` at distinct centers.
#[derive(Clone, Debug, PartialEq)]
pub struct BallConfiguration {
    dim: Dim,
    eta: f64,
    balls: Vec<Ball>,
}

impl BallConfiguration {
    pub fn new(dim: Dim, eta: f64, balls: Vec<Ball>) -> Result<Self> {
        if !(eta > 0.0 && eta <= MAX_ETA) {
            return Err(Error::InvalidInput(format!(
                "eta must lie in (0, {MAX_ETA}], got {eta}"
            )));
        }
        if balls.is_empty() {
            return Err(Error::InvalidInput(
                "a configuration needs at least one ball".into(),
            ));
        }
        if balls.iter().any(|b| b.center.dim() != dim) {
            return Err(Error::InvalidInput(
                "ball center has the wrong dimension".into(),
            ));
        }
        let config = Self { dim, eta, balls };
        for i in 0..config.balls.len() {
            let diameter = 2.0 * config.radius(i);
            if diameter >= 0.5 {
                return Err(Error::DiameterTooLarge { index: i, diameter });
            }
        }
        for i in 0..config.balls.len() {
            for j in (i + 1)..config.balls.len() {
                let clearance = config.pair_clearance(i, j);
                if clearance < MIN_CLEARANCE {
                    return Err(Error::OverlappingBalls { i, j, clearance });
                }
            }
        }
        Ok(config)
    }

    /// Places a ball at every point of `points`.
    pub fn from_points(points: &PointConfiguration, eta: f64) -> Result<Self> {
        let balls = points
            .particles()
            .iter()
            .map(|p| Ball {
                mass: p.mass,
                center: p.position,
            })
            .collect();
        Self::new(points.dim(), eta, balls)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn balls(&self) -> &[Ball] {
        &self.balls
    }

    /// Physical radius of ball `i`.
    pub fn radius(&self, i: usize) -> f64 {
        let m = self.balls[i].mass.get();
        self.eta
            * match self.dim {
                Dim::Two => disc_radius(m),
                Dim::Three => ball_radius(m),
            }
    }

    fn pair_clearance(&self, i: usize, j: usize) -> f64 {
        self.balls[i].center.distance(&self.balls[j].center) - self.radius(i) - self.radius(j)
    }

    /// Smallest distance between the supports of two different balls or of a
    /// ball and one of its own periodic images.
    pub fn min_clearance(&self) -> f64 {
        let n = self.balls.len();
        let mut s = (0..n)
            .map(|i| 1.0 - 2.0 * self.radius(i))
            .fold(f64::INFINITY, f64::min);
        for i in 0..n {
            for j in (i + 1)..n {
                s = s.min(self.pair_clearance(i, j));
            }
        }
        s
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        Self {
            dim: self.dim,
            eta: self.eta,
            balls: self
                .balls
                .iter()
                .map(|b| Ball {
                    mass: b.mass,
                    center: b.center.translated(shift),
                })
                .collect(),
        }
    }

    fn total_mass(&self) -> f64 {
        self.balls.iter().map(|b| b.mass.get()).sum()
    }
}

/// Prefactor of the `H⁻¹` term: `η` in 3D, `1/|log η|` in 2D.
pub fn h1_prefactor(dim: Dim, eta: f64) -> f64 {
    match dim {
        Dim::Three => eta,
        Dim::Two => 1.0 / eta.ln().abs(),
    }
}

/// Penalty strength `γ` tied to `η`: `η⁻³` in 3D, `(|log η| η³)⁻¹` in 2D.
pub fn gamma(dim: Dim, eta: f64) -> f64 {
    match dim {
        Dim::Three => eta.powi(-3),
        Dim::Two => 1.0 / (eta.ln().abs() * eta.powi(3)),
    }
}

fn form_factor(dim: Dim, t: f64) -> f64 {
    match dim {
        Dim::Two => disc_form_factor(t),
        Dim::Three => ball_form_factor(t),
    }
}

/// `∫₀^∞ (Φ₂(t)² - e^{-t²}) / t dt`.
pub fn disc_log_constant() -> f64 {
    static VALUE: OnceLock<f64> = OnceLock::new();
    *VALUE.get_or_init(|| {
        let f = |t: f64| (disc_form_factor(t).powi(2) - (-t * t).exp()) / t;
        let t_max = 2000.0;
        let head = integrate(f, 0.0, 1.0, 4, 20);
        let body = integrate(f, 1.0, t_max, 2000, 16);
        // mean of Φ₂² for large t is 4/(π t³)
        let tail = 4.0 / (3.0 * PI * t_max.powi(3));
        head + body + tail
    })
}

/// Short-range self term `S_d(a, K)`: the contribution of one unit-mass ball of
/// radius `a` to the complementary kernel `(1 - e^{-k²/K²}) / (4π²k²)`.
fn short_range_self(dim: Dim, a: f64, k_split: f64) -> f64 {
    let c = 2.0 * PI * a * k_split;
    let upper = 7.0 * c;
    let panels = (upper.ceil() as usize).max(2) + 4;
    match dim {
        Dim::Three => {
            let damped = integrate(
                |t| ball_form_factor(t).powi(2) * (-(t / c).powi(2)).exp(),
                0.0,
                upper,
                panels,
                16,
            );
            (0.6 * PI - damped) / (2.0 * PI * PI * a)
        }
        Dim::Two => {
            let rest = integrate(
                |t| {
                    if t == 0.0 {
                        0.0
                    } else {
                        (-(t / c).powi(2)).exp() * (1.0 - disc_form_factor(t).powi(2)) / t
                    }
                },
                0.0,
                upper,
                panels,
                16,
            );
            (disc_log_constant() - c.ln() + rest) / (2.0 * PI)
        }
    }
}

/// Free-space self-interaction of one ball, the part that blows up as `η → 0`.
fn local_self(dim: Dim, m: f64, a: f64, eta: f64) -> f64 {
    match dim {
        Dim::Three => 3.0 * m * m / (10.0 * PI * a),
        Dim::Two => m * m / (2.0 * PI) * eta.ln().abs() + f0(Mass::new(m).expect("positive")),
    }
}

fn surface_area(dim: Dim) -> f64 {
    match dim {
        Dim::Two => 2.0 * PI,
        Dim::Three => 4.0 * PI,
    }
}

/// Bound on `Σ_{|k|>Kc} M² e^{-k²/K²} / (4π²k²)`.
fn fourier_tail(dim: Dim, total_mass: f64, cutoff: f64, k_split: f64) -> f64 {
    // each omitted lattice point owns a unit cell lying beyond radius Kc - √d
    let r = cutoff - 2.0;
    let k2 = k_split * k_split;
    let radial = match dim {
        Dim::Two => 0.5 * k2 * (-r * r / k2).exp(),
        Dim::Three => {
            0.5 * k2 * r * (-r * r / k2).exp() + 0.25 * k2 * k_split * PI.sqrt() * erfc(r / k_split)
        }
    };
    let spread = 2f64.powi(dim.n() as i32 - 1);
    total_mass * total_mass / (4.0 * PI * PI * r * r) * surface_area(dim) * spread * radial
}

fn short_range_kernel(dim: Dim, k_split: f64, r: f64) -> f64 {
    let alpha = PI * k_split;
    match dim {
        Dim::Three => erfc(alpha * r) / (4.0 * PI * r),
        Dim::Two => exp_integral_e1(alpha * alpha * r * r) / (4.0 * PI),
    }
}

/// Bound on the neglected short-range interactions between distinct balls
/// and between balls and their periodic images.
fn real_tail(dim: Dim, total_mass: f64, clearance: f64, k_split: f64) -> f64 {
    let d = dim.n() as i32;
    let mut s = 3f64.powi(d) * short_range_kernel(dim, k_split, clearance);
    for j in 2..200 {
        let count = ((2 * j + 1) as f64).powi(d) - ((2 * j - 1) as f64).powi(d);
        let term = count * short_range_kernel(dim, k_split, (j - 1) as f64);
        s += term;
        if term < 1e-300 {
            break;
        }
    }
    total_mass * total_mass * s
}

struct SpectralSums {
    total: f64,
    per_ball: Vec<f64>,
}

fn damped_fourier_sums(config: &BallConfiguration, cutoff: usize, k_split: f64) -> SpectralSums {
    let dim = config.dim;
    let n = config.balls.len();
    let kc = cutoff as i64;
    let kc2 = kc * kc;
    let masses: Vec<f64> = config.balls.iter().map(|b| b.mass.get()).collect();
    let radii: Vec<f64> = (0..n).map(|i| config.radius(i)).collect();

    // Φ per ball, indexed by the integer |k|²
    let phi: Vec<Vec<f64>> = radii
        .iter()
        .map(|&a| {
            (0..=kc2)
                .map(|q| form_factor(dim, 2.0 * PI * (q as f64).sqrt() * a))
                .collect()
        })
        .collect();
    // phase[i][axis][k + kc] = exp(-2πi k x_axis)
    let phase: Vec<Vec<Vec<Complex64>>> = config
        .balls
        .iter()
        .map(|b| {
            b.center
                .coords()
                .iter()
                .map(|&x| {
                    (-kc..=kc)
                        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 * x))
                        .collect()
                })
                .collect()
        })
        .collect();
    let weight: Vec<f64> = (0..=kc2)
        .map(|q| {
            if q == 0 {
                0.0
            } else {
                let q = q as f64;
                2.0 * (-q / (k_split * k_split)).exp() / (4.0 * PI * PI * q)
            }
        })
        .collect();

    let k3_range = if dim == Dim::Three { -kc..=kc } else { 0..=0 };
    let slabs: Vec<SpectralSums> = (0..=kc)
        .into_par_iter()
        .map(|k1| {
            let mut total = 0.0;
            let mut per_ball = vec![0.0; n];
            let mut terms = vec![Complex64::new(0.0, 0.0); n];
            for k2 in -kc..=kc {
                if k1 == 0 && k2 < 0 {
                    continue;
                }
                let q12 = k1 * k1 + k2 * k2;
                if q12 > kc2 {
                    continue;
                }
                for i in 0..n {
                    terms[i] = phase[i][0][(k1 + kc) as usize] * phase[i][1][(k2 + kc) as usize];
                }
                for k3 in k3_range.clone() {
                    if k1 == 0 && k2 == 0 && k3 <= 0 {
                        continue;
                    }
                    let q = q12 + k3 * k3;
                    if q > kc2 {
                        continue;
                    }
                    let q = q as usize;
                    let w = weight[q];
                    let mut vhat = Complex64::new(0.0, 0.0);
                    for i in 0..n {
                        let amp = masses[i] * phi[i][q];
                        let e = if dim == Dim::Three {
                            terms[i] * phase[i][2][(k3 + kc) as usize]
                        } else {
                            terms[i]
                        };
                        vhat += e * amp;
                        per_ball[i] += w * amp * amp;
                    }
                    total += w * vhat.norm_sqr();
                }
            }
            SpectralSums { total, per_ball }
        })
        .collect();

    // slab order is fixed, so the reduction is deterministic
    let mut out = SpectralSums {
        total: 0.0,
        per_ball: vec![0.0; n],
    };
    for s in slabs {
        out.total += s.total;
        for (acc, v) in out.per_ball.iter_mut().zip(&s.per_ball) {
            *acc += v;
        }
    }
    out
}

/// Rescaled sharp-interface energy `η ∫|∇v| + P(η) ‖v - M‖²_{H⁻¹}` with
/// `P = η` (3D) or `1/|log η|` (2D), itemized.
///
/// `self_h1_term` holds the free-space self-interactions, `regular_self_term`
/// the torus correction to them, `cross_term` the pair interactions.
pub fn sharp_energy(config: &BallConfiguration, fourier_cutoff: usize) -> Result<EnergyBreakdown> {
    if fourier_cutoff < MIN_FOURIER_CUTOFF {
        return Err(Error::CutoffTooSmall {
            cutoff: fourier_cutoff,
            bound: f64::INFINITY,
        });
    }
    let dim = config.dim;
    let eta = config.eta;
    let n = config.balls.len();
    let clearance = config.min_clearance();
    let kc = fourier_cutoff as f64;
    let k_split = (kc / (PI * clearance)).sqrt();
    let total_mass = config.total_mass();
    let background = 1.0 / (4.0 * PI * PI * k_split * k_split);

    let sums = damped_fourier_sums(config, fourier_cutoff, k_split);

    let mut norm_sq = sums.total - total_mass * total_mass * background;
    let mut self_sum = 0.0;
    let mut local_sum = 0.0;
    let mut perimeter = 0.0;
    for i in 0..n {
        let m = config.balls[i].mass.get();
        let a = config.radius(i);
        let short = short_range_self(dim, a, k_split);
        norm_sq += m * m * short;
        self_sum += sums.per_ball[i] + m * m * (short - background);
        local_sum += local_self(dim, m, a, eta);
        perimeter += match dim {
            Dim::Three => 4.0 * PI * a * a / (eta * eta),
            Dim::Two => 2.0 * PI * a / eta,
        };
    }

    let p = h1_prefactor(dim, eta);
    let mut out = EnergyBreakdown::from_parts(
        dim,
        perimeter,
        p * local_sum,
        p * (self_sum - local_sum),
        p * (norm_sq - self_sum),
    );
    let bound = p
        * (fourier_tail(dim, total_mass, kc, k_split)
            + real_tail(dim, total_mass, clearance, k_split));
    if !(bound <= TRUNCATION_RTOL * out.total.abs()) {
        return Err(Error::CutoffTooSmall {
            cutoff: fourier_cutoff,
            bound,
        });
    }
    out.eta = Some(eta);
    out.gamma = Some(gamma(dim, eta));
    out.truncation_bound = Some(bound);
    Ok(out)
}

/// `‖v - M‖²_{H⁻¹}` recovered from a finite-η breakdown.
pub fn h_minus_one_norm_sq(breakdown: &EnergyBreakdown) -> Option<f64> {
    let eta = breakdown.eta?;
    let p = h1_prefactor(breakdown.dim, eta);
    Some((breakdown.self_h1_term + breakdown.regular_self_term + breakdown.cross_term) / p)
}

/// Energy in the original variables and the `γ` used: `η² E` (3D) or `η E` (2D).
pub fn rescale_to_original(breakdown: &EnergyBreakdown) -> Result<(f64, f64)> {
    let eta = breakdown.eta.ok_or_else(|| {
        Error::InvalidInput("breakdown carries no eta; it is not a finite-eta energy".into())
    })?;
    let dim = breakdown.dim;
    let factor = match dim {
        Dim::Three => eta * eta,
        Dim::Two => eta,
    };
    Ok((factor * breakdown.total, gamma(dim, eta)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientRow {
    pub eta: f64,
    pub energy: EnergyBreakdown,
    /// First-order reference subtracted from `E_η`.
    pub reference: f64,
    pub f_eta: f64,
}

/// Reference first-order energy for a quotient template.
///
/// 3D uses the ball-ansatz sum `Σ e3d_ball(m_i)`; 2D requires an equal,
/// compact partition and uses `n e2d(m)`.
pub fn quotient_reference(template: &PointConfiguration) -> Result<f64> {
    match template.dim() {
        Dim::Three => Ok(template
            .particles()
            .iter()
            .map(|p| e3d_ball(p.mass).total)
            .sum()),
        Dim::Two => {
            let m = template.equal_mass()?;
            let single = envelope_2d(Mass::new(m)?);
            if single.n != 1 {
                return Err(Error::NotAdmissible(format!(
                    "mass {m} is not compact: it prefers {} parts",
                    single.n
                )));
            }
            Ok(template.len() as f64 * e2d(Mass::new(m)?))
        }
    }
}

/// `F_η = η⁻¹ [E_η - ref]` (3D) or `|log η| [E_η - ref]` (2D) at every `η`.
pub fn second_order_quotient(
    template: &PointConfiguration,
    etas: &[f64],
    fourier_cutoff: usize,
) -> Result<Vec<QuotientRow>> {
    let reference = quotient_reference(template)?;
    etas.iter()
        .map(|&eta| {
            let config = BallConfiguration::from_points(template, eta)?;
            let energy = sharp_energy(&config, fourier_cutoff)?;
            let f_eta = (energy.total - reference) / h1_prefactor(template.dim(), eta);
            Ok(QuotientRow {
                eta,
                energy,
                reference,
                f_eta,
            })
        })
        .collect()
}

/// Extrapolates `F(η) = F₀ + c η^p` from the two smallest distinct `η`.
pub fn richardson(samples: &[(f64, f64)], order: f64) -> Result<f64> {
    if !(order > 0.0) {
        return Err(Error::InvalidInput(format!(
            "order must be positive, got {order}"
        )));
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    s.dedup_by(|a, b| a.0 == b.0);
    if s.len() < 2 {
        return Err(Error::InvalidInput(
            "richardson extrapolation needs two distinct eta values".into(),
        ));
    }
    let (h1, f1) = s[0];
    let (h2, f2) = s[1];
    let (p1, p2) = (h1.powf(order), h2.powf(order));
    Ok((f1 * p2 - f2 * p1) / (p2 - p1))
}

/// Left and right sides of the 2D diameter estimate: `Σ 2π a_i` (the
/// perimeter in physical units) against `Σ diam = Σ 2 a_i`.
pub fn diameter_estimate(config: &BallConfiguration) -> Result<(f64, f64)> {
    if config.dim != Dim::Two {
        return Err(Error::InvalidInput(
            "the diameter estimate is two-dimensional".into(),
        ));
    }
    let radii = (0..config.balls.len()).map(|i| config.radius(i));
    Ok(radii.fold((0.0, 0.0), |(l, r), a| (l + 2.0 * PI * a, r + 2.0 * a)))
}
