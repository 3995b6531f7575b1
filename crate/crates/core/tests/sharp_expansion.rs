mod common;

use std::f64::consts::PI;

use oklim_core::local::{ball_radius, disc_radius, optimal_particle_mass};
use oklim_core::sharp::{h1_prefactor, h_minus_one_norm_sq, DEFAULT_FOURIER_CUTOFF};
use oklim_core::{
    diameter_estimate, e3d_ball, f0, f0_energy, green_eval, regular_part_at_zero, richardson,
    second_order_quotient, sharp_energy, Ball, BallConfiguration, Dim, EwaldParameters, Mass,
    PairConvention, PointConfiguration, TorusPoint,
};

fn p() -> EwaldParameters {
    EwaldParameters::default()
}

fn balls(dim: Dim, eta: f64, raw: &[(f64, &[f64])]) -> BallConfiguration {
    let b = raw
        .iter()
        .map(|(m, x)| Ball {
            mass: Mass::new(*m).unwrap(),
            center: TorusPoint::new(dim, x).unwrap(),
        })
        .collect();
    BallConfiguration::new(dim, eta, b).unwrap()
}

/// `‖v - M‖²_{H⁻¹}` from the mean-value identities for `Δg = 1` and `ΔG = 1`
/// away from the lattice: each ball pair contributes its centre value plus a
/// second-moment correction.
fn analytic_norm_sq(c: &BallConfiguration) -> f64 {
    let dim = c.dim();
    let d = dim.n() as f64;
    let g0 = regular_part_at_zero(dim, &p()).unwrap();
    let eta = c.eta();
    let bs = c.balls();
    let mut s = 0.0;
    for i in 0..bs.len() {
        let mi = bs[i].mass.get();
        let ai = c.radius(i);
        let local = match dim {
            Dim::Three => 3.0 * mi * mi / (10.0 * PI * ai),
            Dim::Two => mi * mi / (2.0 * PI) * eta.ln().abs() + f0(bs[i].mass),
        };
        s += local + mi * mi * (g0 + ai * ai / (d + 2.0));
        for j in 0..bs.len() {
            if i == j {
                continue;
            }
            let mj = bs[j].mass.get();
            let aj = c.radius(j);
            let disp = bs[i].center.displacement(&bs[j].center);
            let g = green_eval(dim, &disp[..dim.n()], &p()).unwrap();
            s += mi * mj * (g + (ai * ai + aj * aj) / (2.0 * (d + 2.0)));
        }
    }
    s
}

#[test]
fn spectral_norm_matches_mean_value_formula() {
    let cases = [
        balls(Dim::Three, 0.05, &[(1.0, &[0.1, 0.2, 0.3])]),
        balls(
            Dim::Three,
            0.04,
            &[(1.0, &[0.0, 0.0, 0.0]), (1.0, &[0.5, 0.5, 0.5])],
        ),
        balls(
            Dim::Three,
            0.1,
            &[
                (0.5, &[0.1, 0.1, 0.1]),
                (2.0, &[0.6, 0.3, 0.2]),
                (1.0, &[0.2, 0.7, 0.8]),
            ],
        ),
        balls(Dim::Two, 0.01, &[(2.0, &[0.3, 0.3])]),
        balls(
            Dim::Two,
            0.05,
            &[(1.0, &[0.0, 0.0]), (3.0, &[0.3, 0.6]), (2.0, &[0.7, 0.1])],
        ),
    ];
    for c in &cases {
        let e = sharp_energy(c, DEFAULT_FOURIER_CUTOFF).unwrap();
        let spectral = h_minus_one_norm_sq(&e).unwrap();
        let exact = analytic_norm_sq(c);
        assert!(
            (spectral - exact).abs() <= 1e-10 * exact.abs(),
            "{:?}: {spectral} vs {exact}",
            c.dim()
        );
    }
}

#[test]
fn single_ball_itemization() {
    let eta = 0.05;
    let c = balls(Dim::Three, eta, &[(1.0, &[0.3, 0.9, 0.4])]);
    let e = sharp_energy(&c, DEFAULT_FOURIER_CUTOFF).unwrap();
    let b = e3d_ball(Mass::new(1.0).unwrap());
    assert!((e.perimeter_term - b.perimeter_term).abs() < 1e-13);
    assert!((e.self_h1_term - b.self_h1_term).abs() < 1e-13);
    let g0 = regular_part_at_zero(Dim::Three, &p()).unwrap();
    let a = c.radius(0);
    let expected = eta * (g0 + a * a / 5.0);
    assert!((e.regular_self_term - expected).abs() < 1e-6 * expected.abs());
    assert!(e.cross_term.abs() < 1e-12);
}

#[test]
fn translation_invariance() {
    for c in [
        balls(
            Dim::Three,
            0.03,
            &[(1.0, &[0.1, 0.2, 0.3]), (2.0, &[0.5, 0.6, 0.9])],
        ),
        balls(Dim::Two, 0.02, &[(1.0, &[0.1, 0.2]), (1.0, &[0.5, 0.6])]),
    ] {
        let base = sharp_energy(&c, DEFAULT_FOURIER_CUTOFF).unwrap().total;
        let shift = [0.123, -0.456, 0.789];
        let moved = sharp_energy(&c.translated(&shift[..c.dim().n()]), DEFAULT_FOURIER_CUTOFF)
            .unwrap()
            .total;
        assert!((base - moved).abs() <= 1e-10 * base.abs());
    }
}

#[test]
fn doubling_the_cutoff_changes_little() {
    for c in [
        balls(
            Dim::Three,
            0.02,
            &[(1.0, &[0.0, 0.0, 0.0]), (1.0, &[0.5, 0.5, 0.5])],
        ),
        balls(Dim::Two, 0.01, &[(5.0, &[0.0, 0.0]), (5.0, &[0.5, 0.5])]),
        balls(
            Dim::Two,
            0.05,
            &[(1.0, &[0.0, 0.0]), (3.0, &[0.3, 0.6]), (2.0, &[0.7, 0.1])],
        ),
    ] {
        let a = sharp_energy(&c, 32).unwrap().total;
        let b = sharp_energy(&c, 64).unwrap().total;
        assert!((a - b).abs() < 1e-8 * a.abs(), "{a} vs {b}");
    }
}

#[test]
fn norm_is_positive() {
    for c in [
        balls(Dim::Two, 0.25, &[(0.1, &[0.0, 0.0]), (0.1, &[0.5, 0.5])]),
        balls(Dim::Three, 0.2, &[(0.3, &[0.0, 0.0, 0.0])]),
    ] {
        let e = sharp_energy(&c, DEFAULT_FOURIER_CUTOFF).unwrap();
        assert!(h_minus_one_norm_sq(&e).unwrap() >= 0.0);
        assert!(e.self_h1_term >= 0.0);
    }
}

#[test]
fn cross_term_orders_like_green_function() {
    let eta = 0.05;
    let m = 1.0;
    let a = eta * ball_radius(m);
    let near = balls(
        Dim::Three,
        eta,
        &[(m, &[0.0, 0.0, 0.0]), (m, &[0.3, 0.0, 0.0])],
    );
    let far = balls(
        Dim::Three,
        eta,
        &[(m, &[0.0, 0.0, 0.0]), (m, &[0.5, 0.5, 0.5])],
    );
    let cn = sharp_energy(&near, DEFAULT_FOURIER_CUTOFF)
        .unwrap()
        .cross_term;
    let cf = sharp_energy(&far, DEFAULT_FOURIER_CUTOFF)
        .unwrap()
        .cross_term;
    let gn = green_eval(Dim::Three, &[0.3, 0.0, 0.0], &p()).unwrap();
    let gf = green_eval(Dim::Three, &[0.5, 0.5, 0.5], &p()).unwrap();
    assert_eq!(cn > cf, gn > gf);
    // the second moment of two balls shifts the pair value by (a² + a²)/10
    for (c, g) in [(cn, gn), (cf, gf)] {
        let predicted = g + a * a / 5.0;
        assert!((c / (eta * 2.0 * m * m) - predicted).abs() <= 1e-4 * predicted.abs());
    }
}

#[test]
fn additivity_for_separated_balls() {
    // small η keeps the O(η²) second-moment shift below the tolerance
    for dim in [Dim::Two, Dim::Three] {
        let eta = 0.002;
        let m = 1.5;
        let x1 = vec![0.1; dim.n()];
        let mut x2 = vec![0.1; dim.n()];
        x2[0] = 0.55;
        x2[1] = 0.4;
        let pair = balls(dim, eta, &[(m, &x1), (m, &x2)]);
        let one = sharp_energy(&balls(dim, eta, &[(m, &x1)]), DEFAULT_FOURIER_CUTOFF).unwrap();
        let two = sharp_energy(&balls(dim, eta, &[(m, &x2)]), DEFAULT_FOURIER_CUTOFF).unwrap();
        let both = sharp_energy(&pair, DEFAULT_FOURIER_CUTOFF).unwrap();
        let disp: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| a - b).collect();
        let g = green_eval(dim, &disp, &p()).unwrap();
        let predicted = h1_prefactor(dim, eta) * 2.0 * m * m * g;
        let gap = both.total - one.total - two.total;
        assert!(
            (gap - predicted).abs() <= 1e-4 * predicted.abs(),
            "{dim:?}: {gap} vs {predicted}"
        );
    }
}

#[test]
fn two_dimensional_self_energy_extraction() {
    // ‖v‖² - (m²/2π)|log η| should settle at f0(m) + m² g2(0)
    let m = 2.0;
    let g0 = regular_part_at_zero(Dim::Two, &p()).unwrap();
    let target = f0(Mass::new(m).unwrap()) + m * m * g0;
    let seq: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&eta| {
            let c = balls(Dim::Two, eta, &[(m, &[0.2, 0.2])]);
            let e = sharp_energy(&c, DEFAULT_FOURIER_CUTOFF).unwrap();
            h_minus_one_norm_sq(&e).unwrap() - m * m / (2.0 * PI) * eta.ln().abs()
        })
        .collect();
    for w in seq.windows(3) {
        assert!((w[2] - w[1]).abs() < (w[1] - w[0]).abs());
    }
    assert!((seq[3] - target).abs() < 1e-3 * target.abs());
}

#[test]
fn three_dimensional_quotient_approaches_limit() {
    let template = PointConfiguration::from_raw(
        Dim::Three,
        &[(1.0, vec![0.0, 0.0, 0.0]), (1.0, vec![0.5, 0.5, 0.5])],
    )
    .unwrap();
    let limit = f0_energy(&template, &p(), PairConvention::Ordered)
        .unwrap()
        .total;
    let rows =
        second_order_quotient(&template, &[0.04, 0.02, 0.01], DEFAULT_FOURIER_CUTOFF).unwrap();
    let gaps: Vec<f64> = rows.iter().map(|r| (r.f_eta - limit).abs()).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    let samples: Vec<(f64, f64)> = rows.iter().map(|r| (r.eta, r.f_eta)).collect();
    let extrapolated = richardson(&samples, 1.0).unwrap();
    assert!((extrapolated - limit).abs() <= 1e-3 * limit.abs());
    // the halved convention is far off
    let halved = f0_energy(&template, &p(), PairConvention::Halved)
        .unwrap()
        .total;
    assert!((extrapolated - halved).abs() > 1e-2 * halved.abs());
}

#[test]
fn single_ball_quotient_tends_to_regular_constant() {
    let template = PointConfiguration::from_raw(Dim::Three, &[(1.0, vec![0.0, 0.0, 0.0])]).unwrap();
    let g0 = regular_part_at_zero(Dim::Three, &p()).unwrap();
    let rows = second_order_quotient(&template, &[0.02, 0.01], DEFAULT_FOURIER_CUTOFF).unwrap();
    assert!((rows[1].f_eta - g0).abs() < 1e-4 * g0.abs());
}

#[test]
fn two_dimensional_quotient_approaches_limit() {
    let m = optimal_particle_mass();
    let template =
        PointConfiguration::from_raw(Dim::Two, &[(m, vec![0.0, 0.0]), (m, vec![0.5, 0.5])])
            .unwrap();
    let limit = f0_energy(&template, &p(), PairConvention::Ordered)
        .unwrap()
        .total;
    let rows =
        second_order_quotient(&template, &[1e-2, 1e-3, 1e-4], DEFAULT_FOURIER_CUTOFF).unwrap();
    let gaps: Vec<f64> = rows.iter().map(|r| (r.f_eta - limit).abs()).collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    assert!(gaps[1] < 5e-2 * limit.abs());
    assert!(gaps[2] < 5e-2 * limit.abs());
}

#[test]
fn two_dimensional_quotient_requires_admissible_template() {
    let unequal =
        PointConfiguration::from_raw(Dim::Two, &[(1.0, vec![0.0, 0.0]), (2.0, vec![0.5, 0.5])])
            .unwrap();
    assert!(second_order_quotient(&unequal, &[0.01], 32).is_err());
    let split = PointConfiguration::from_raw(Dim::Two, &[(30.0, vec![0.0, 0.0])]).unwrap();
    assert!(matches!(
        second_order_quotient(&split, &[0.01], 32),
        Err(oklim_core::Error::NotAdmissible(_))
    ));
}

#[test]
fn diameter_estimate_for_random_discs() {
    let mut r = common::rng(9);
    use rand::Rng;
    for _ in 0..50 {
        let m = r.random_range(0.1..5.0);
        let eta = r.random_range(0.001..0.1);
        let c = balls(Dim::Two, eta, &[(m, &[0.0, 0.0]), (m, &[0.5, 0.5])]);
        let (lhs, rhs) = diameter_estimate(&c).unwrap();
        assert!(lhs >= rhs);
        assert!((rhs - 4.0 * eta * disc_radius(m)).abs() < 1e-15);
    }
}
