//! Fixtures shared by the criterion benches in `benches/`.

use stablerate::spectral::StableLaw;
use stablerate::tail::TailModel;

/// Symmetric Pareto models at the three regimes the rate sweeps cover.
pub fn pareto_models() -> Vec<(&'static str, TailModel)> {
    [("a0.8", 0.8), ("a1", 1.0), ("a1.5", 1.5)]
        .into_iter()
        .map(|(name, a)| (name, TailModel::pareto(1, a).expect("valid alpha")))
        .collect()
}

pub fn skewed_law(alpha: f64) -> StableLaw {
    StableLaw::one_dim(alpha, 0.8, 0.2).expect("valid law")
}
