//! Special functions and quadrature rules used by the lattice sums.

use std::f64::consts::{FRAC_PI_4, PI};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// `Ein(z) = sum_{k>=1} (-1)^{k+1} z^k / (k k!)`, the entire part of E1.
fn ein(z: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..200 {
        term *= -z / k as f64;
        let add = -term / k as f64;
        sum += add;
        if add.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Exponential integral `E1(z)` for `z > 0`.
pub fn exp_integral_e1(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    if z <= 1.0 {
        return -EULER_GAMMA - z.ln() + ein(z);
    }
    if z > 740.0 {
        return 0.0;
    }
    // modified Lentz on the continued fraction
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-z).exp()
}

/// `E1(z) + ln z`, which stays finite as `z -> 0`.
pub fn exp_integral_e1_plus_log(z: f64) -> f64 {
    if z <= 1.0 {
        -EULER_GAMMA + ein(z)
    } else {
        exp_integral_e1(z) + z.ln()
    }
}

/// Bessel function of the first kind of order one.
pub fn bessel_j1(t: f64) -> f64 {
    let x = t.abs();
    let v = if x <= 8.0 {
        let h = 0.5 * x;
        let h2 = h * h;
        let mut term = h;
        let mut sum = h;
        for k in 1..60 {
            term *= -h2 / (k as f64 * (k + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else if x <= 40.0 {
        // J1(x) = (1/2pi) int_0^{2pi} cos(tau - x sin tau) dtau; the trapezoid
        // rule is spectrally accurate for this periodic integrand.
        let n = 2 * (x as usize) + 64;
        let h = 2.0 * PI / n as f64;
        let s: f64 = (0..n)
            .map(|i| {
                let tau = i as f64 * h;
                (tau - x * tau.sin()).cos()
            })
            .sum();
        s / n as f64
    } else {
        let (p, q) = hankel_pq(x);
        let chi = x - 3.0 * FRAC_PI_4;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    };
    if t < 0.0 {
        -v
    } else {
        v
    }
}

fn hankel_pq(x: f64) -> (f64, f64) {
    let mu = 4.0;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if a.abs() > last {
            break;
        }
        last = a.abs();
        // a_k / x^k with the sign pattern of P (even k) and Q (odd k)
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-18 {
            break;
        }
    }
    (p, q)
}

/// Fourier transform of the unit-mass disc indicator, `2 J1(t) / t`.
pub fn disc_form_factor(t: f64) -> f64 {
    let t = t.abs();
    if t < 1.0 {
        let h2 = 0.25 * t * t;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..30 {
            term *= -h2 / (k as f64 * (k + 1) as f64);
            sum += term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        sum
    } else {
        2.0 * bessel_j1(t) / t
    }
}

/// Fourier transform of the unit-mass ball indicator, `3 (sin t - t cos t) / t^3`.
pub fn ball_form_factor(t: f64) -> f64 {
    let t = t.abs();
    if t < 1.0 {
        // sum_j (-1)^j 6 (j+1) t^{2j} / (2j+3)!
        let t2 = t * t;
        let mut pow = 1.0;
        let mut fact = 6.0; // 3!
        let mut sum = 0.0;
        for j in 0..20 {
            let add = 6.0 * (j + 1) as f64 * pow / fact;
            sum += if j % 2 == 0 { add } else { -add };
            if add < 1e-18 {
                break;
            }
            pow *= t2;
            fact *= ((2 * j + 4) * (2 * j + 5)) as f64;
        }
        sum
    } else {
        3.0 * (t.sin() - t * t.cos()) / (t * t * t)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss-Legendre rule: `panels` equal panels on `[a, b]`, `order` nodes each.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let s: f64 = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| wi * f(mid + 0.5 * h * xi))
            .sum();
        total += 0.5 * h * s;
    }
    total
}
