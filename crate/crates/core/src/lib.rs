//! Small-volume-fraction limit energies of the sharp-interface Ohta–Kawasaki
//! functional on the flat unit torus in two and three dimensions.
//!
//! - [`green`]: periodic Green's function of `-Δ` and its regular part.
//! - [`local`]: single-particle energies and the 2D partition envelope.
//! - [`limits`]: first- and second-order limit functionals on point configurations.
//! - [`sharp`]: finite-η spectral energies of ball configurations.
//! - [`optimize`]: multi-start placement of point masses.

pub mod config;
pub mod energy;
pub mod error;
pub mod green;
pub mod limits;
pub mod local;
pub mod optimize;
pub mod sharp;
pub mod special;
pub mod torus;

pub use energy::EnergyBreakdown;
pub use error::{Error, Result};
pub use green::{
    evaluator, green_eval, green_grad, regular_part, regular_part_at_zero, EwaldParameters, Green,
};
pub use limits::{
    check_admissible, e0, f0_energy, AdmissibilityReport, PairConvention, Particle,
    PointConfiguration,
};
pub use local::{
    concavity_coefficient, e2d, e3d_ball, envelope_2d, f0, splitting_threshold_3d, Mass,
    PartitionResult,
};
pub use optimize::{
    lattice_candidate_energy, place, place_with, Lattice, OptimizationResult, PlaceOptions,
};
pub use sharp::{
    diameter_estimate, rescale_to_original, richardson, second_order_quotient, sharp_energy, Ball,
    BallConfiguration, QuotientRow,
};
pub use torus::{Dim, TorusPoint};
