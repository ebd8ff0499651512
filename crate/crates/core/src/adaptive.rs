//! Density-driven traffic-following gain.
//!
//! Each aircraft counts the other aircraft within its sensing range, divides
//! by the range area (capped at the grid area), and maps that density
//! through a logistic curve:
//!
//! ```text
//! k_t = L / (1 + exp(-(rho - x0) / s))
//! ```
//!
//! With the default constants, `x0 / s = 15.193`, so the exponent reads
//! `-(rho / 0.0005 - 15.193)` and the gain rises from ~0 on an empty sky to
//! `6.024` once roughly fifteen aircraft share the grid.

use serde::{Deserialize, Serialize};

use crate::cost_model::FollowingGain;
use crate::error::{Error, Result};
use crate::hexgeom::{GridSpec, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidParams {
    /// Upper asymptote `L`.
    pub ceiling: f64,
    /// Density at which the gain is half the ceiling, aircraft per sq mi.
    pub midpoint_density: f64,
    /// Logistic scale, aircraft per sq mi.
    pub slope_scale: f64,
}

impl Default for SigmoidParams {
    fn default() -> Self {
        SigmoidParams {
            ceiling: 6.024,
            midpoint_density: 0.0075965,
            slope_scale: 0.0005,
        }
    }
}

impl SigmoidParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.ceiling > 0.0
            && self.slope_scale > 0.0
            && self.midpoint_density >= 0.0
            && self.ceiling.is_finite()
            && self.midpoint_density.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "sigmoid needs ceiling > 0, slope_scale > 0, midpoint_density >= 0; got {self:?}"
            )))
        }
    }
}

/// Sensing radius `R_s`, miles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SensorRange(f64);

impl SensorRange {
    pub fn new(miles: f64) -> Result<Self> {
        if miles > 0.0 && miles.is_finite() {
            Ok(SensorRange(miles))
        } else {
            Err(Error::InvalidParameter(format!(
                "sensor range must be positive, got {miles}"
            )))
        }
    }

    pub fn miles(self) -> f64 {
        self.0
    }
}

/// Aircraft per square mile within `range` of `own`. Aircraft exactly at
/// the range boundary count. `others` must not include the ownship.
pub fn local_density(own: Point, others: &[Point], range: SensorRange, grid: &GridSpec) -> f64 {
    let r = range.0;
    let count = others.iter().filter(|p| own.distance(**p) <= r).count();
    if count == 0 {
        return 0.0;
    }
    let area = (std::f64::consts::PI * r * r).min(grid.grid_area());
    count as f64 / area
}

/// Maps density to a gain in `(0, L)`.
pub fn kt_from_density(density: f64, p: &SigmoidParams) -> FollowingGain {
    let z = (density - p.midpoint_density) / p.slope_scale;
    FollowingGain(p.ceiling / (1.0 + (-z).exp()))
}
