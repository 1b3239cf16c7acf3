//! Per-iteration discretization: time step, contraction margin, dilation and
//! goal halo, all derived from the current dispersion.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::game::GameDef;

/// Minimum ratio `h / d`; keeps `κ = h − d > 0` while `d ≥ 1`.
const STARTUP_STEP_RATIO: f64 = 1.0 + 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Exponent `α` in `h = d^{1/(1+α)}`.
    pub alpha_exp: f64,
    /// Dispersion `d`.
    pub d: f64,
    /// Time step `h`.
    pub h: f64,
    /// `κ = h − d`; one step costs `κ` in time and contracts by `e^{−κ}`.
    pub kappa: f64,
    /// Query radius around the one-step successor, `2d + ℓhd + Mℓh²`.
    pub dilation: f64,
    /// Radius `Mh + d` of the frozen neighbourhood of the goal.
    pub goal_halo: f64,
}

impl Schedule {
    pub fn new(d: f64, alpha_exp: f64, speed_bound: f64, lipschitz: f64) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) {
            return domain(format!("dispersion must be positive, got {d}"));
        }
        if !(alpha_exp > 0.0 && alpha_exp.is_finite()) {
            return domain(format!("alpha exponent must be positive, got {alpha_exp}"));
        }
        let h = d.powf(1.0 / (1.0 + alpha_exp)).max(d * STARTUP_STEP_RATIO);
        Ok(Self {
            alpha_exp,
            d,
            h,
            kappa: h - d,
            dilation: 2.0 * d + lipschitz * h * d + speed_bound * lipschitz * h * h,
            goal_halo: speed_bound * h + d,
        })
    }

    /// Contraction factor `e^{−κ}`.
    #[inline]
    pub fn decay(&self) -> f64 {
        (-self.kappa).exp()
    }

    /// `1 − e^{−κ} + e^{−κ} m`, the one-step Kružkov update.
    #[inline]
    pub fn backup(&self, inner: f64) -> f64 {
        let decay = self.decay();
        1.0 - decay + decay * inner
    }
}

/// Which constants feed the dilation and halo radii.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DilationRule {
    /// The game's `M` and `ℓ`, as required by the convergence analysis.
    Theoretical,
    /// `M = ℓ = 0`: dilation `2d`, halo `d`. The analytic terms scale with the
    /// global speed and Lipschitz bounds and swamp desk-scale sample sets.
    #[default]
    Compact,
}

impl DilationRule {
    pub fn schedule(self, d: f64, alpha_exp: f64, game: &GameDef) -> Result<Schedule> {
        match self {
            DilationRule::Theoretical => Schedule::new(d, alpha_exp, game.speed_bound(), game.lipschitz()),
            DilationRule::Compact => Schedule::new(d, alpha_exp, 0.0, 0.0),
        }
    }
}
