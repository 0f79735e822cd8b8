//! Algorithm parameters `(ε, δ, k)` and the threshold predicates built on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_EPSILON: f64 = 0.007;
pub const DEFAULT_DELTA: f64 = 0.179;
pub const DEFAULT_K: f64 = 12.295;
/// Width bound the default parameters are proven to achieve.
pub const WIDTH_BOUND: f64 = 2.997;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params<T> {
    pub epsilon: T,
    pub delta: T,
    /// Only consulted by the charging scheme; clustering never reads it.
    pub k: T,
}

impl<T: Scalar> Default for Params<T> {
    fn default() -> Self {
        Self { epsilon: T::lit(DEFAULT_EPSILON), delta: T::lit(DEFAULT_DELTA), k: T::lit(DEFAULT_K) }
    }
}

impl<T: Scalar> Params<T> {
    /// Validated parameters: `ε ∈ (0, 1/14]`, `δ ∈ [4ε, 2/7]`, `k ≥ 1`.
    pub fn new(epsilon: T, delta: T, k: T) -> Result<Self> {
        let p = Self { epsilon, delta, k };
        p.validate()?;
        Ok(p)
    }

    pub fn from_f64(epsilon: f64, delta: f64, k: f64) -> Result<Self> {
        Self::new(T::lit(epsilon), T::lit(delta), T::lit(k))
    }

    /// The most permissive parameters allowed: `ε = 1/14`, `δ = 2/7`, `k = 1`.
    pub fn extreme() -> Self {
        Self { epsilon: T::one() / T::lit(14.0), delta: T::lit(2.0) / T::lit(7.0), k: T::one() }
    }

    pub fn validate(&self) -> Result<()> {
        let (e, d, k) = (self.epsilon, self.delta, self.k);
        let ok = |b: bool| b && !(e.is_nan() || d.is_nan() || k.is_nan());
        if !ok(e > T::zero() && e <= T::one() / T::lit(14.0)) {
            return Err(Error::InvalidArgument(format!("epsilon {e} outside (0, 1/14]")));
        }
        if !ok(d >= T::lit(4.0) * e && d <= T::lit(2.0) / T::lit(7.0)) {
            return Err(Error::InvalidArgument(format!("delta {d} outside [4·epsilon, 2/7]")));
        }
        if !ok(k >= T::one() && k.is_finite()) {
            return Err(Error::InvalidArgument(format!("k {k} must be at least 1")));
        }
        Ok(())
    }

    /// `|N(u) ∩ C_v| ≤ δ|C_v| − 1`: neighbour `u` is a candidate for ejection.
    pub fn ejects(&self, common: usize, cluster: usize) -> bool {
        T::from_count(common) <= self.delta * T::from_count(cluster) - T::one()
    }

    /// `|N(w) Δ C_v| ≤ ε|C_v| − 1`: non-neighbour `w` is a near twin of `C_v`.
    pub fn absorbs(&self, symdiff: usize, cluster: usize) -> bool {
        T::from_count(symdiff) <= self.epsilon * T::from_count(cluster) - T::one()
    }

    /// `⌊δ|C_v|⌋`, the cap on both subsamples.
    pub fn subsample_cap(&self, cluster: usize) -> usize {
        (self.delta * T::from_count(cluster)).floor_count()
    }

    /// `|A_v| ≤ k|C_v|`.
    pub fn is_light(&self, absorbable: usize, cluster: usize) -> bool {
        T::from_count(absorbable) <= self.k * T::from_count(cluster)
    }

    /// No near twin can exist for clusters smaller than `1/ε`.
    pub fn absorption_possible(&self, cluster: usize) -> bool {
        self.absorbs(0, cluster)
    }

    pub fn to_f64(&self) -> Params<f64> {
        Params { epsilon: self.epsilon.as_f64(), delta: self.delta.as_f64(), k: self.k.as_f64() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = Params::<f64>::default();
        p.validate().unwrap();
        assert_eq!((p.epsilon, p.delta, p.k), (0.007, 0.179, 12.295));
        Params::<f32>::default().validate().unwrap();
        Params::<f64>::extreme().validate().unwrap();
    }

    #[test]
    fn out_of_range_parameters() {
        assert!(Params::<f64>::from_f64(0.0, 0.1, 2.0).is_err());
        assert!(Params::<f64>::from_f64(0.08, 0.25, 2.0).is_err());
        assert!(Params::<f64>::from_f64(0.05, 0.1, 2.0).is_err());
        assert!(Params::<f64>::from_f64(0.05, 0.3, 2.0).is_err());
        assert!(Params::<f64>::from_f64(0.05, 0.2, 0.5).is_err());
        assert!(Params::<f64>::from_f64(f64::NAN, 0.2, 2.0).is_err());
    }

    #[test]
    fn thresholds_on_hand_cases() {
        let p = Params::<f64>::default();
        // path a-v-b: |C| = 3, common 1 > 0.179·3 − 1
        assert!(!p.ejects(1, 3));
        // bridge endpoint against a 51-vertex cluster: 1 ≤ 8.129
        assert!(p.ejects(1, 51));
        assert_eq!(p.subsample_cap(51), 9);
        // K_400 minus an edge: symdiff 1 ≤ 0.007·399 − 1
        assert!(p.absorbs(1, 399));
        assert!(!p.absorbs(2, 399));
        assert!(!p.absorption_possible(142));
        assert!(p.absorption_possible(143));
        assert!(p.is_light(12, 1));
        assert!(!p.is_light(13, 1));
    }
}
