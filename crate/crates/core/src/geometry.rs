use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Largest state dimension supported by the stack buffers in the hot loops.
pub const MAX_DIM: usize = 8;

/// Axis-aligned box `[lo_1, hi_1] × … × [lo_N, hi_N]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return domain("box bounds must be nonempty and of equal length");
        }
        if lo.len() > MAX_DIM {
            return domain(format!("dimension {} exceeds {MAX_DIM}", lo.len()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
            return domain("box bounds must be finite with lo <= hi");
        }
        Ok(Self { lo, hi })
    }

    /// The cube `[lo, hi]^dim`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    #[inline]
    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    #[inline]
    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.extent(i)).product()
    }

    pub fn is_degenerate(&self) -> bool {
        (0..self.dim()).any(|i| self.extent(i) <= 0.0)
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim()).map(|i| self.extent(i).powi(2)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().enumerate().all(|(i, &v)| v >= self.lo[i] && v <= self.hi[i])
    }

    /// Draws one uniform point into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let u: f64 = rng.gen();
            *o = self.lo[i] + u * self.extent(i);
        }
    }
}

#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Volume of the unit ball in `ℝ^n`, `π^{n/2} / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    let (mut gamma, mut k) = if n % 2 == 0 {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt() / 2.0, 1.5)
    };
    while k <= half + 1e-9 {
        gamma *= k;
        k += 1.0;
    }
    std::f64::consts::PI.powf(half) / gamma
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        let pi = std::f64::consts::PI;
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(2) - pi).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * pi).abs() < 1e-12);
        assert!((unit_ball_volume(4) - pi * pi / 2.0).abs() < 1e-12);
    }

    #[test]
    fn box_basics() {
        let b = BoxRegion::new(vec![0.0, -1.0], vec![2.0, 1.0]).unwrap();
        assert_eq!(b.volume(), 4.0);
        assert!((b.diameter() - 8f64.sqrt()).abs() < 1e-15);
        assert!(b.contains(&[2.0, 1.0]));
        assert!(!b.contains(&[2.0 + 1e-12, 0.0]));
        assert!(BoxRegion::new(vec![1.0], vec![0.0]).is_err());
        assert!(BoxRegion::new(vec![2.0, 3.0], vec![2.0, 3.0]).unwrap().is_degenerate());
    }
}
