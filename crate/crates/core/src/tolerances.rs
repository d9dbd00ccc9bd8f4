use serde::{Deserialize, Serialize};

/// Numerical tolerances used throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff for rank decisions.
    pub rank: f64,
    /// Group membership residual, relative to the Gram norm.
    pub group: f64,
    /// Spectral comparisons.
    pub spec: f64,
    /// Slack allowed below the walls of the positive chamber.
    pub chamber: f64,
    /// Containment residual for domains.
    pub contain: f64,
    /// Smallest denominator accepted as positive.
    pub positive: f64,
    /// Defect allowed on the pseudo-hyperbolic quadric.
    pub model: f64,
    /// Pairing defect of log singular values.
    pub pairing: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: 1e-8,
            group: 1e-8,
            spec: 1e-9,
            chamber: 1e-8,
            contain: 1e-6,
            positive: 1e-10,
            model: 1e-8,
            pairing: 1e-7,
        }
    }
}

impl Tolerances {
    /// Margin below which a rank decision is reported as ambiguous.
    pub fn ambiguity_threshold(&self) -> f64 {
        10.0 * self.rank
    }
}
