//! Fixtures shared by the criterion benchmarks.

use oklim_core::{Dim, PointConfiguration};

/// Two unit masses at antipodal points of the 3D torus.
pub fn antipodal_pair_3d() -> PointConfiguration {
    PointConfiguration::from_raw(
        Dim::Three,
        &[(1.0, vec![0.0, 0.0, 0.0]), (1.0, vec![0.5, 0.5, 0.5])],
    )
    .expect("valid fixture")
}

/// Two masses of `2^{2/3} π` on the 2D diagonal.
pub fn optimal_pair_2d() -> PointConfiguration {
    let m = oklim_core::local::optimal_particle_mass();
    PointConfiguration::from_raw(Dim::Two, &[(m, vec![0.0, 0.0]), (m, vec![0.5, 0.5])])
        .expect("valid fixture")
}

/// Deterministic scattered sample points in `[0, 1)^d` away from the origin.
pub fn sample_points(dim: Dim, count: usize) -> Vec<Vec<f64>> {
    let golden = [
        0.618_033_988_749_894_9,
        0.754_877_666_246_692_7,
        0.569_840_290_998_053_3,
    ];
    (1..=count)
        .map(|i| {
            (0..dim.n())
                .map(|k| (0.1 + i as f64 * golden[k]).fract())
                .collect()
        })
        .collect()
}
