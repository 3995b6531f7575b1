//! First- and second-order limit functionals on finite point configurations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::energy::EnergyBreakdown;
use crate::error::{Error, Result};
use crate::green::{evaluator, EwaldParameters, Green, SINGULAR_RADIUS};
use crate::local::{e2d, e3d_ball, envelope_2d, f0, splitting_threshold_3d, Mass};
use crate::torus::{Dim, TorusPoint};

/// Relative tolerance for treating two masses as equal.
pub const MASS_EQUALITY_RTOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Particle {
    pub mass: Mass,
    pub position: TorusPoint,
}

/// Finitely many weighted point masses at distinct torus positions.
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfiguration {
    dim: Dim,
    particles: Vec<Particle>,
}

impl PointConfiguration {
    pub fn new(dim: Dim, particles: Vec<Particle>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::InvalidInput(
                "a configuration needs at least one particle".into(),
            ));
        }
        if let Some(p) = particles.iter().find(|p| p.position.dim() != dim) {
            return Err(Error::InvalidInput(format!(
                "particle position has dimension {}, configuration has {}",
                p.position.dim().n(),
                dim.n()
            )));
        }
        let config = Self { dim, particles };
        config.check_distinct()?;
        Ok(config)
    }

    /// Builds from raw `(mass, coordinates)` pairs.
    pub fn from_raw(dim: Dim, raw: &[(f64, Vec<f64>)]) -> Result<Self> {
        let particles = raw
            .iter()
            .map(|(m, x)| {
                Ok(Particle {
                    mass: Mass::new(*m)?,
                    position: TorusPoint::new(dim, x)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, particles)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.particles.iter().map(|p| p.mass.get()).sum()
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        Self {
            dim: self.dim,
            particles: self
                .particles
                .iter()
                .map(|p| Particle {
                    mass: p.mass,
                    position: p.position.translated(shift),
                })
                .collect(),
        }
    }

    fn check_distinct(&self) -> Result<()> {
        for i in 0..self.particles.len() {
            for j in (i + 1)..self.particles.len() {
                let d = self.particles[i]
                    .position
                    .distance(&self.particles[j].position);
                if d < SINGULAR_RADIUS {
                    return Err(Error::CoincidentPoints { i, j, distance: d });
                }
            }
        }
        Ok(())
    }

    /// Common mass when all masses agree to `MASS_EQUALITY_RTOL`.
    pub fn equal_mass(&self) -> Result<f64> {
        let first = self.particles[0].mass.get();
        for (index, p) in self.particles.iter().enumerate() {
            let m = p.mass.get();
            if (m - first).abs() > MASS_EQUALITY_RTOL * first.max(m) {
                return Err(Error::UnequalMasses2D {
                    index,
                    mass: m,
                    expected: first,
                });
            }
        }
        Ok(first)
    }
}

/// How the off-diagonal pair sum is weighted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairConvention {
    /// `Σ_{i≠j}` over ordered pairs.
    #[default]
    Ordered,
    /// Half of the ordered sum.
    Halved,
}

impl PairConvention {
    pub fn factor(self) -> f64 {
        match self {
            PairConvention::Ordered => 1.0,
            PairConvention::Halved => 0.5,
        }
    }
}

impl std::fmt::Display for PairConvention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PairConvention::Ordered => "ordered",
            PairConvention::Halved => "halved",
        })
    }
}

impl std::str::FromStr for PairConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ordered" => Ok(PairConvention::Ordered),
            "halved" => Ok(PairConvention::Halved),
            other => Err(Error::InvalidInput(format!(
                "pair convention must be 'ordered' or 'halved', got '{other}'"
            ))),
        }
    }
}

/// First-order limit `E0`. Positions are never read.
///
/// In 3D this sums the ball-ansatz energies, an upper bound for the true value.
pub fn e0(config: &PointConfiguration) -> f64 {
    match config.dim {
        Dim::Two => config
            .particles
            .iter()
            .map(|p| envelope_2d(p.mass).envelope_value)
            .sum(),
        Dim::Three => config
            .particles
            .iter()
            .map(|p| e3d_ball(p.mass).total)
            .sum(),
    }
}

/// Ordered interaction sum `Σ_{i≠j} m_i m_j G(x_i - x_j)`, accumulated in a
/// fixed order over unordered pairs.
pub fn interaction_energy(config: &PointConfiguration, green: &Green) -> Result<f64> {
    let ps = &config.particles;
    let mut s = 0.0;
    for i in 0..ps.len() {
        for j in (i + 1)..ps.len() {
            let d = ps[i].position.displacement(&ps[j].position);
            let g = green.eval_vec(d).map_err(|_| Error::CoincidentPoints {
                i,
                j,
                distance: crate::torus::norm(d),
            })?;
            s += 2.0 * ps[i].mass.get() * ps[j].mass.get() * g;
        }
    }
    Ok(s)
}

/// Second-order limit `F0`.
///
/// 3D: `Σ g3(0) m_i² + c Σ_{i≠j} m_i m_j G(x_i - x_j)`.
/// 2D (equal masses only): `n (f0(m) + m² g2(0)) + c m² Σ_{i≠j} G(x_i - x_j)`.
/// `c` is 1 for the ordered convention and 1/2 for the halved one.
pub fn f0_energy(
    config: &PointConfiguration,
    params: &EwaldParameters,
    convention: PairConvention,
) -> Result<EnergyBreakdown> {
    let green = evaluator(config.dim, params)?;
    config.check_distinct()?;
    let g0 = green.regular_part_at_zero();
    let cross = convention.factor() * interaction_energy(config, &green)?;
    match config.dim {
        Dim::Three => {
            let regular: f64 = config
                .particles
                .iter()
                .map(|p| g0 * p.mass.get() * p.mass.get())
                .sum();
            Ok(EnergyBreakdown::from_parts(
                Dim::Three,
                0.0,
                0.0,
                regular,
                cross,
            ))
        }
        Dim::Two => {
            let m = config.equal_mass()?;
            let n = config.len() as f64;
            Ok(EnergyBreakdown::from_parts(
                Dim::Two,
                0.0,
                n * f0(Mass::new(m)?),
                n * m * m * g0,
                cross,
            ))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub is_optimal_partition: bool,
    pub is_compact: bool,
    /// True when the verdict rests on the ball ansatz rather than a proof.
    pub heuristic: bool,
    pub detail: Vec<String>,
}

/// Checks the mass constraints under which the second-order limit is finite.
pub fn check_admissible(config: &PointConfiguration) -> AdmissibilityReport {
    match config.dim {
        Dim::Two => admissible_2d(config),
        Dim::Three => admissible_3d(config),
    }
}

fn admissible_2d(config: &PointConfiguration) -> AdmissibilityReport {
    let mut detail = Vec::new();
    let n = config.len();
    let (is_optimal_partition, is_compact) = match config.equal_mass() {
        Err(e) => {
            detail.push(format!("masses differ: {e}"));
            // compactness is still a per-particle property
            let compact = config.particles.iter().all(|p| envelope_2d(p.mass).n == 1);
            (false, compact)
        }
        Ok(m) => {
            let total = Mass::new(n as f64 * m).expect("positive");
            let best = envelope_2d(total);
            let own = n as f64 * e2d(Mass::new(m).expect("positive"));
            let optimal = best.n == n || own <= best.envelope_value * (1.0 + 4.0 * f64::EPSILON);
            if optimal {
                detail.push(format!(
                    "{n} equal parts of {m} minimize the partition problem"
                ));
            } else {
                detail.push(format!(
                    "optimal partition of {} uses {} parts of {}, not {n}",
                    total.get(),
                    best.n,
                    best.per_mass
                ));
            }
            let single = envelope_2d(Mass::new(m).expect("positive"));
            if single.n != 1 {
                detail.push(format!(
                    "mass {m} would rather split into {} parts",
                    single.n
                ));
            }
            (optimal, single.n == 1)
        }
    };
    AdmissibilityReport {
        is_optimal_partition,
        is_compact,
        heuristic: false,
        detail,
    }
}

fn admissible_3d(config: &PointConfiguration) -> AdmissibilityReport {
    let mut detail = vec!["ball-ansatz heuristic: 3D local energies use balls".to_string()];
    let masses: Vec<f64> = config.particles.iter().map(|p| p.mass.get()).collect();
    let ball = |m: f64| e3d_ball(Mass::new(m).expect("positive")).total;
    let own: f64 = masses.iter().map(|&m| ball(m)).sum();
    let total: f64 = masses.iter().sum();
    let mut best = own;
    let mut best_desc = String::from("the configuration itself");
    for k in 1..=(masses.len() + 2) {
        let v = k as f64 * ball(total / k as f64);
        if v < best {
            best = v;
            best_desc = format!("{k} equal parts of {}", total / k as f64);
        }
    }
    if masses.len() <= 8 {
        for_each_set_partition(masses.len(), &mut |blocks| {
            let v: f64 = blocks
                .iter()
                .map(|b| ball(b.iter().map(|&i| masses[i]).sum()))
                .sum();
            if v < best {
                best = v;
                best_desc = format!("merging into {} groups", blocks.len());
            }
        });
    } else {
        detail.push("more than 8 particles: merges not enumerated".into());
    }
    let is_optimal_partition = own <= best * (1.0 + 1e-12);
    if !is_optimal_partition {
        detail.push(format!("lower ball-ansatz energy by {best_desc}"));
    }
    let is_compact = match splitting_threshold_3d() {
        Ok(threshold) => {
            let ok = masses.iter().all(|&m| m <= threshold);
            if !ok {
                detail.push(format!(
                    "some mass exceeds the ball splitting threshold {threshold}"
                ));
            }
            ok
        }
        Err(e) => {
            detail.push(e.to_string());
            false
        }
    };
    AdmissibilityReport {
        is_optimal_partition,
        is_compact,
        heuristic: true,
        detail,
    }
}

/// Calls `f` once per set partition of `0..n` (restricted growth strings).
fn for_each_set_partition(n: usize, f: &mut dyn FnMut(&[Vec<usize>])) {
    fn rec(i: usize, n: usize, blocks: &mut Vec<Vec<usize>>, f: &mut dyn FnMut(&[Vec<usize>])) {
        if i == n {
            f(blocks);
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(i);
            rec(i + 1, n, blocks, f);
            blocks[b].pop();
        }
        blocks.push(vec![i]);
        rec(i + 1, n, blocks, f);
        blocks.pop();
    }
    rec(0, n, &mut Vec::new(), f);
}

/// Leading singular behavior of the 3D pair term as two particles coalesce.
pub fn coalescence_asymptote_3d(m1: f64, m2: f64, distance: f64) -> f64 {
    2.0 * m1 * m2 / (4.0 * PI * distance)
}
