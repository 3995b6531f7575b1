//! Zero-mean periodic Green's function of `-Δ` on the unit torus.
//!
//! `G` solves `-ΔG = δ - 1` with `∫G = 0`. It is evaluated by Ewald splitting:
//! a screened real-space image sum, the complementary Gaussian-damped Fourier
//! sum, and the constant `-1/(4α²)` that enforces zero mean.
//!
//! Near the origin `G = -(1/2π) log|x| + g2(x)` in 2D and
//! `G = 1/(4π|x|) + g3(x)` in 3D. The regular parts are evaluated without
//! cancellation by replacing the central image term with its smooth remainder.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{erf, erfc, exp_integral_e1, exp_integral_e1_plus_log};
use crate::torus::{min_image, norm, vec3_from, Dim, Vec3};

/// Evaluations closer to the origin than this are treated as singular.
pub const SINGULAR_RADIUS: f64 = 1e-9;

/// Truncation bound every parameter set must meet.
pub const ACCURACY_CONTRACT: f64 = 1e-12;

const AUTO_TAIL: f64 = 1e-16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EwaldParameters {
    /// Splitting parameter; the real-space kernel is screened by `erfc(alpha r)`.
    pub alpha: f64,
    /// Images `n` with `max|n_i| <= real_cutoff` are summed.
    pub real_cutoff: u32,
    /// Wave vectors with `|k| <= fourier_cutoff` are summed.
    pub fourier_cutoff: u32,
}

impl Default for EwaldParameters {
    fn default() -> Self {
        Self::with_alpha(PI.sqrt()).expect("default alpha is valid")
    }
}

impl EwaldParameters {
    /// Picks the smallest cutoffs whose tail bounds are below `1e-16` in both dimensions.
    pub fn with_alpha(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameters(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        let mut p = Self {
            alpha,
            real_cutoff: 1,
            fourier_cutoff: 1,
        };
        while [Dim::Two, Dim::Three]
            .iter()
            .any(|&d| p.real_tail_bound(d) > AUTO_TAIL)
        {
            p.real_cutoff += 1;
        }
        while [Dim::Two, Dim::Three]
            .iter()
            .any(|&d| p.fourier_tail_bound(d) > AUTO_TAIL)
        {
            p.fourier_cutoff += 1;
        }
        Ok(p)
    }

    pub fn new(alpha: f64, real_cutoff: u32, fourier_cutoff: u32) -> Result<Self> {
        let p = Self {
            alpha,
            real_cutoff,
            fourier_cutoff,
        };
        p.validate(Dim::Two)?;
        p.validate(Dim::Three)?;
        Ok(p)
    }

    pub fn validate(&self, dim: Dim) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidParameters(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.real_cutoff == 0 || self.fourier_cutoff == 0 {
            return Err(Error::InvalidParameters("cutoffs must be positive".into()));
        }
        let bound = self.tail_bound(dim);
        if bound > ACCURACY_CONTRACT {
            return Err(Error::InvalidParameters(format!(
                "truncation bound {bound:e} exceeds {ACCURACY_CONTRACT:e} (alpha {}, cutoffs {}/{})",
                self.alpha, self.real_cutoff, self.fourier_cutoff
            )));
        }
        Ok(())
    }

    pub fn tail_bound(&self, dim: Dim) -> f64 {
        self.real_tail_bound(dim) + self.fourier_tail_bound(dim)
    }

    fn real_tail_bound(&self, dim: Dim) -> f64 {
        // omitted images have sup-norm >= c + 1, hence |x + n| >= c + 1/2
        let d = dim.n() as i32;
        let mut sum = 0.0;
        for j in (self.real_cutoff as i64 + 1)..(self.real_cutoff as i64 + 200) {
            let count = ((2 * j + 1) as f64).powi(d) - ((2 * j - 1) as f64).powi(d);
            let r = j as f64 - 0.5;
            let term = count * real_kernel(dim, self.alpha, r).abs();
            sum += term;
            if term < 1e-40 {
                break;
            }
        }
        sum
    }

    fn fourier_tail_bound(&self, dim: Dim) -> f64 {
        // lattice points with |k| > K lie in shells j <= |k| < j+1, j >= K
        let d = dim.n() as i32;
        let a2 = self.alpha * self.alpha;
        let mut sum = 0.0;
        for j in (self.fourier_cutoff as i64)..(self.fourier_cutoff as i64 + 400) {
            let jf = j as f64;
            let count = (2.0 * jf + 3.0).powi(d);
            let term = count * (-PI * PI * jf * jf / a2).exp() / (4.0 * PI * PI * jf * jf);
            sum += term;
            if term < 1e-40 {
                break;
            }
        }
        sum
    }
}

fn real_kernel(dim: Dim, alpha: f64, r: f64) -> f64 {
    match dim {
        Dim::Two => exp_integral_e1(alpha * alpha * r * r) / (4.0 * PI),
        Dim::Three => erfc(alpha * r) / (4.0 * PI * r),
    }
}

/// d/dr of the real-space kernel.
fn real_kernel_slope(dim: Dim, alpha: f64, r: f64) -> f64 {
    let g = (-(alpha * r).powi(2)).exp();
    match dim {
        Dim::Two => -g / (2.0 * PI * r),
        Dim::Three => -(erfc(alpha * r) / (r * r) + 2.0 * alpha / PI.sqrt() * g / r) / (4.0 * PI),
    }
}

/// Central image term minus the free-space singular part; smooth through `r = 0`.
fn central_regular(dim: Dim, alpha: f64, r: f64) -> f64 {
    match dim {
        Dim::Two => {
            // E1(a²r²)/4π + (1/2π) log r = [E1(z) + ln z - 2 ln a] / 4π
            (exp_integral_e1_plus_log(alpha * alpha * r * r) - 2.0 * alpha.ln()) / (4.0 * PI)
        }
        Dim::Three => {
            if r < 1e-8 {
                let ar = alpha * r;
                -alpha / (2.0 * PI.powf(1.5)) * (1.0 - ar * ar / 3.0)
            } else {
                -erf(alpha * r) / (4.0 * PI * r)
            }
        }
    }
}

fn singular_part(dim: Dim, r: f64) -> f64 {
    match dim {
        Dim::Two => -r.ln() / (2.0 * PI),
        Dim::Three => 1.0 / (4.0 * PI * r),
    }
}

/// Evaluator for `G`, `∇G` and the regular parts at fixed dimension and parameters.
#[derive(Debug)]
pub struct Green {
    dim: Dim,
    params: EwaldParameters,
    images: Vec<Vec3>,
    // half-space wave vectors with weight 2 exp(-π²k²/α²) / (4π²k²)
    waves: Vec<(Vec3, f64)>,
    g0: OnceLock<f64>,
}

impl Green {
    pub fn new(dim: Dim, params: EwaldParameters) -> Result<Self> {
        params.validate(dim)?;
        let c = params.real_cutoff as i64;
        let z_range = if dim == Dim::Three { -c..=c } else { 0..=0 };
        let mut images = Vec::new();
        for i in -c..=c {
            for j in -c..=c {
                for k in z_range.clone() {
                    if (i, j, k) != (0, 0, 0) {
                        images.push([i as f64, j as f64, k as f64]);
                    }
                }
            }
        }
        // nearest images first
        images.sort_by(|a, b| norm(*a).total_cmp(&norm(*b)));

        let kc = params.fourier_cutoff as i64;
        let a2 = params.alpha * params.alpha;
        let kz_range = if dim == Dim::Three { -kc..=kc } else { 0..=0 };
        let mut waves = Vec::new();
        for i in -kc..=kc {
            for j in -kc..=kc {
                for k in kz_range.clone() {
                    if !is_positive_half(i, j, k) {
                        continue;
                    }
                    let k2 = (i * i + j * j + k * k) as f64;
                    if k2 > (kc * kc) as f64 {
                        continue;
                    }
                    let w = 2.0 * (-PI * PI * k2 / a2).exp() / (4.0 * PI * PI * k2);
                    waves.push(([i as f64, j as f64, k as f64], w));
                }
            }
        }
        waves.sort_by(|a, b| b.1.total_cmp(&a.1));
        Ok(Self {
            dim,
            params,
            images,
            waves,
            g0: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn params(&self) -> &EwaldParameters {
        &self.params
    }

    fn fourier_part(&self, x: Vec3) -> f64 {
        let mut s = 0.0;
        for (k, w) in &self.waves {
            let phase = 2.0 * PI * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            s += w * phase.cos();
        }
        s
    }

    fn image_part(&self, x: Vec3) -> f64 {
        let mut s = 0.0;
        for n in &self.images {
            let r = norm([x[0] + n[0], x[1] + n[1], x[2] + n[2]]);
            s += real_kernel(self.dim, self.params.alpha, r);
        }
        s
    }

    fn background(&self) -> f64 {
        -1.0 / (4.0 * self.params.alpha * self.params.alpha)
    }

    fn reduce(&self, x: &[f64]) -> Result<Vec3> {
        Ok(min_image(self.dim, vec3_from(self.dim, x)?))
    }

    /// `G(x)` for a displacement `x` (any representative).
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.eval_vec(self.reduce(x)?)
    }

    pub(crate) fn eval_vec(&self, x: Vec3) -> Result<f64> {
        let x = min_image(self.dim, x);
        let r = norm(x);
        if r < SINGULAR_RADIUS {
            return Err(Error::SingularPoint { distance: r });
        }
        let central = real_kernel(self.dim, self.params.alpha, r);
        Ok(central + self.image_part(x) + self.fourier_part(x) + self.background())
    }

    /// `∇G(x)`; the returned vector has `dim` components.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        let g = self.grad_vec(self.reduce(x)?)?;
        Ok(g[..self.dim.n()].to_vec())
    }

    pub(crate) fn grad_vec(&self, x: Vec3) -> Result<Vec3> {
        let x = min_image(self.dim, x);
        let r = norm(x);
        if r < SINGULAR_RADIUS {
            return Err(Error::SingularPoint { distance: r });
        }
        let alpha = self.params.alpha;
        let mut g = [0.0; 3];
        let mut add_radial = |y: Vec3| {
            let ry = norm(y);
            let s = real_kernel_slope(self.dim, alpha, ry) / ry;
            for k in 0..3 {
                g[k] += s * y[k];
            }
        };
        add_radial(x);
        for n in &self.images {
            add_radial([x[0] + n[0], x[1] + n[1], x[2] + n[2]]);
        }
        for (k, w) in &self.waves {
            let phase = 2.0 * PI * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
            let s = -w * 2.0 * PI * phase.sin();
            for c in 0..3 {
                g[c] += s * k[c];
            }
        }
        Ok(g)
    }

    /// Regular part `g(x) = G(x) - singular(|x|)` using the min-image radius.
    pub fn regular_part(&self, x: &[f64]) -> Result<f64> {
        Ok(self.regular_part_vec(self.reduce(x)?))
    }

    pub(crate) fn regular_part_vec(&self, x: Vec3) -> f64 {
        let x = min_image(self.dim, x);
        let r = norm(x);
        central_regular(self.dim, self.params.alpha, r)
            + self.image_part(x)
            + self.fourier_part(x)
            + self.background()
    }

    /// `g(0)`, computed once per evaluator.
    pub fn regular_part_at_zero(&self) -> f64 {
        *self.g0.get_or_init(|| self.regular_part_vec([0.0; 3]))
    }

    /// Singular free-space part at radius `r`.
    pub fn singular_part(&self, r: f64) -> f64 {
        singular_part(self.dim, r)
    }
}

fn is_positive_half(i: i64, j: i64, k: i64) -> bool {
    i > 0 || (i == 0 && (j > 0 || (j == 0 && k > 0)))
}

type CacheKey = (Dim, u64, u32, u32);

/// Shared evaluator for `(dim, params)`; built once and reused.
pub fn evaluator(dim: Dim, params: &EwaldParameters) -> Result<Arc<Green>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<Green>>>> = OnceLock::new();
    let key = (
        dim,
        params.alpha.to_bits(),
        params.real_cutoff,
        params.fourier_cutoff,
    );
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(g) = cache.lock().expect("green cache poisoned").get(&key) {
        return Ok(Arc::clone(g));
    }
    let built = Arc::new(Green::new(dim, *params)?);
    let mut guard = cache.lock().expect("green cache poisoned");
    Ok(Arc::clone(guard.entry(key).or_insert(built)))
}

pub fn green_eval(dim: Dim, x: &[f64], params: &EwaldParameters) -> Result<f64> {
    evaluator(dim, params)?.eval(x)
}

pub fn green_grad(dim: Dim, x: &[f64], params: &EwaldParameters) -> Result<Vec<f64>> {
    evaluator(dim, params)?.grad(x)
}

pub fn regular_part(dim: Dim, x: &[f64], params: &EwaldParameters) -> Result<f64> {
    evaluator(dim, params)?.regular_part(x)
}

pub fn regular_part_at_zero(dim: Dim, params: &EwaldParameters) -> Result<f64> {
    Ok(evaluator(dim, params)?.regular_part_at_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> EwaldParameters {
        EwaldParameters::default()
    }

    #[test]
    fn default_parameters_meet_contract() {
        let p = p();
        assert!(p.tail_bound(Dim::Two) < 1e-15);
        assert!(p.tail_bound(Dim::Three) < 1e-15);
    }

    #[test]
    fn loose_parameters_are_rejected() {
        assert!(EwaldParameters::new(PI.sqrt(), 1, 1).is_err());
        assert!(EwaldParameters::new(-1.0, 4, 4).is_err());
    }

    #[test]
    fn singular_point_is_reported() {
        for dim in [Dim::Two, Dim::Three] {
            let x = vec![0.0; dim.n()];
            assert!(matches!(
                green_eval(dim, &x, &p()),
                Err(Error::SingularPoint { .. })
            ));
            let mut near = vec![1.0; dim.n()];
            near[0] = 1.0 + 1e-12;
            assert!(green_grad(dim, &near, &p()).is_err());
        }
    }

    #[test]
    fn green_is_even_and_cubic_symmetric() {
        let x3 = [0.13, -0.31, 0.22];
        let g = green_eval(Dim::Three, &x3, &p()).unwrap();
        let perms = [
            [-0.13, 0.31, -0.22],
            [0.31, 0.22, 0.13],
            [-0.22, 0.13, -0.31],
            [0.13, 0.31, 0.22],
        ];
        for q in perms {
            let h = green_eval(Dim::Three, &q, &p()).unwrap();
            assert!((g - h).abs() < 1e-12, "{g} vs {h}");
        }
        let a = green_eval(Dim::Two, &[0.17, 0.4], &p()).unwrap();
        let b = green_eval(Dim::Two, &[-0.17, -0.4], &p()).unwrap();
        let c = green_eval(Dim::Two, &[0.4, -0.17], &p()).unwrap();
        assert!((a - b).abs() < 1e-12 && (a - c).abs() < 1e-12);
    }

    #[test]
    fn gradient_vanishes_at_half_period() {
        let g = green_grad(Dim::Two, &[0.5, 0.5], &p()).unwrap();
        assert!(g.iter().all(|c| c.abs() < 1e-13), "{g:?}");
    }

    #[test]
    fn regular_part_matches_definition() {
        let x = [0.25, 0.0, 0.0];
        let g = green_eval(Dim::Three, &x, &p()).unwrap();
        let reg = regular_part(Dim::Three, &x, &p()).unwrap();
        assert!((reg - (g - 1.0 / (4.0 * PI * 0.25))).abs() < 1e-14);
    }

    #[test]
    fn regular_part_is_continuous_at_origin() {
        let g0 = regular_part_at_zero(Dim::Three, &p()).unwrap();
        let near = regular_part(Dim::Three, &[1e-9, 0.0, 0.0], &p()).unwrap();
        assert!((g0 - near).abs() < 1e-14);
        // cubic lattice Madelung-type constant: g3(0) = -2.837297479.../(4π)
        assert!(
            (g0 + 2.837_297_479_480_619_6 / (4.0 * PI)).abs() < 1e-10,
            "{g0}"
        );
    }

    #[test]
    fn cache_returns_same_evaluator() {
        let a = evaluator(Dim::Two, &p()).unwrap();
        let b = evaluator(Dim::Two, &p()).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
