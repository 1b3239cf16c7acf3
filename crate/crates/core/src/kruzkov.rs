//! The Kružkov transform `Ψ(r) = 1 − e^{−r}` and its inverse.
//!
//! Minimum times live in `[0, ∞]`; the solvers work with the bounded image in
//! `[0, 1]`, where `1` encodes "never reaches the goal".

use crate::error::{domain, Result};

/// A time value mapped into `[0, 1]` by the Kružkov transform.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct KruzkovValue(f64);

impl KruzkovValue {
    pub const ZERO: Self = Self(0.0);
    pub const INFINITE: Self = Self(1.0);

    pub fn new(v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&v) {
            return domain(format!("Kružkov value {v} outside [0, 1]"));
        }
        Ok(Self(v))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0 >= 1.0
    }
}

/// `Ψ(t) = 1 − e^{−t}`, with `Ψ(+∞) = 1` exactly.
pub fn kruzkov(t: f64) -> Result<KruzkovValue> {
    if t.is_nan() || t < 0.0 {
        return domain(format!("time {t} must be nonnegative"));
    }
    if t.is_infinite() {
        return Ok(KruzkovValue::INFINITE);
    }
    Ok(KruzkovValue(-(-t).exp_m1()))
}

/// `Ψ⁻¹(v) = −ln(1 − v)`, with `Ψ⁻¹(1) = +∞`.
pub fn kruzkov_inverse(v: KruzkovValue) -> f64 {
    if v.0 >= 1.0 {
        f64::INFINITY
    } else {
        -(-v.0).ln_1p()
    }
}
