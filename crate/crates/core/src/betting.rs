//! Betting-style sequential accumulation of per-window drift evidence.
//!
//! Each window bets a fraction of current wealth on the composite score
//! exceeding a configured threshold: the factor `1 + λ·(c − θ)` is above 1
//! exactly when the composite `c` exceeds `θ`, so wealth grows under
//! sustained drift and decays under quiet windows. Crossing `1/α` wealth is
//! read as accumulated evidence at betting significance level `α`.

use crate::scalar::Real;

/// Per-window wealth multiplier `max(floor, 1 + λ·(composite − θ))`.
///
/// The floor keeps wealth strictly positive even when `λ·(c − θ) ≤ −1`.
pub fn betting_factor<F: Real>(composite: F, theta: F, lambda: F, floor: F) -> F {
    floor.max(F::one() + lambda * (composite - theta))
}

/// Fold a composite sequence into final wealth starting from `initial`.
pub fn accumulate<F: Real>(
    initial: F,
    composites: impl IntoIterator<Item = F>,
    theta: F,
    lambda: F,
    floor: F,
) -> F {
    composites
        .into_iter()
        .fold(initial, |w, c| w * betting_factor(c, theta, lambda, floor))
}
