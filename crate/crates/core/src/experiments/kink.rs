use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::spin::Direction;

/// One-sided finite-difference slope `(E(ε) − E(0))/ε` of the exact
/// correlation at aligned settings, with Alice on the vertical axis and Bob
/// rotated by `epsilon` in the x–z plane.
///
/// Smooth correlations give a slope that vanishes with `ε`; a kink gives an
/// `ε`-independent slope (`2/π` for the sign model).
pub fn kink_slope(spec: &ModelSpec, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 0.1) {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    let a = Direction::Z;
    let at_zero = spec.exact_correlation(&a, &a);
    let at_eps = spec.exact_correlation(&a, &Direction::planar(epsilon));
    Ok((at_eps - at_zero) / epsilon)
}
