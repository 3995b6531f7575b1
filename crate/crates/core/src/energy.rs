use serde::{Deserialize, Serialize};

use crate::torus::Dim;

/// Itemized energy shared by the local, limit and finite-η evaluators.
///
/// Terms that do not apply to a given evaluator are zero; `eta`, `gamma` and
/// `truncation_bound` are only present for finite-η evaluations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub dim: Dim,
    pub perimeter_term: f64,
    pub self_h1_term: f64,
    pub regular_self_term: f64,
    pub cross_term: f64,
    pub total: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub truncation_bound: Option<f64>,
}

impl EnergyBreakdown {
    pub fn from_parts(
        dim: Dim,
        perimeter_term: f64,
        self_h1_term: f64,
        regular_self_term: f64,
        cross_term: f64,
    ) -> Self {
        Self {
            dim,
            perimeter_term,
            self_h1_term,
            regular_self_term,
            cross_term,
            total: perimeter_term + self_h1_term + regular_self_term + cross_term,
            eta: None,
            gamma: None,
            truncation_bound: None,
        }
    }

    /// Alias for the whole-space self-interaction of a single particle.
    pub fn self_interaction(&self) -> f64 {
        self.self_h1_term
    }
}
