use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Refrigerator plates, warmest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StageName {
    PT1,
    PT2,
    STL,
    CLD,
    MXC,
}

impl StageName {
    pub const ALL: [StageName; 5] = [StageName::PT1, StageName::PT2, StageName::STL, StageName::CLD, StageName::MXC];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for StageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for StageName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        StageName::ALL
            .into_iter()
            .find(|n| n.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Unknown {
                kind: "stage",
                name: s.trim().into(),
            })
    }
}

/// Cooling power as a function of plate temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoolingCurve {
    /// Q̇ = a·(T² − T₀²) on [T₀, t_max].
    Quadratic { a: f64, t0: f64, t_max: f64 },
    /// Piecewise-linear through (K, W) points, first point at 0 W.
    Table { points: Vec<(f64, f64)> },
}

impl CoolingCurve {
    pub fn validate(&self) -> Result<()> {
        match self {
            CoolingCurve::Quadratic { a, t0, t_max } => {
                if !(*a > 0.0 && *t0 >= 0.0 && t_max > t0 && t_max.is_finite()) {
                    return Err(Error::invalid("cooling curve", format!("a={a}, t0={t0}, t_max={t_max}")));
                }
            }
            CoolingCurve::Table { points } => {
                if points.len() < 2 || points[0].1 != 0.0 {
                    return Err(Error::invalid("cooling curve", "table needs ≥ 2 points starting at 0 W"));
                }
                if points.windows(2).any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1)) {
                    return Err(Error::invalid("cooling curve", "table must be strictly increasing in T and power"));
                }
            }
        }
        Ok(())
    }

    pub fn base_temperature(&self) -> f64 {
        match self {
            CoolingCurve::Quadratic { t0, .. } => *t0,
            CoolingCurve::Table { points } => points[0].0,
        }
    }

    pub fn max_temperature(&self) -> f64 {
        match self {
            CoolingCurve::Quadratic { t_max, .. } => *t_max,
            CoolingCurve::Table { points } => points[points.len() - 1].0,
        }
    }

    pub fn power(&self, t: f64) -> f64 {
        match self {
            CoolingCurve::Quadratic { a, t0, .. } => a * (t * t - t0 * t0),
            CoolingCurve::Table { points } => {
                let k = points.partition_point(|p| p.0 <= t).clamp(1, points.len() - 1);
                let (a, b) = (points[k - 1], points[k]);
                a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
            }
        }
    }

    /// Temperature at which the curve supplies `load`, by bisection.
    pub fn temperature_for(&self, load: f64) -> Result<f64> {
        if !(load >= 0.0) {
            return Err(Error::invalid("stage load", format!("{load} W")));
        }
        let (mut lo, mut hi) = (self.base_temperature(), self.max_temperature());
        if load == 0.0 {
            return Ok(lo);
        }
        if load > self.power(hi) {
            return Err(Error::Domain(format!(
                "insufficient cooling power: {load:.4e} W exceeds {:.4e} W at {hi} K",
                self.power(hi)
            )));
        }
        // far below the 0.1 mK reporting resolution
        while hi - lo > 1e-9 * hi {
            let mid = 0.5 * (lo + hi);
            if self.power(mid) < load {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: StageName,
    pub cooling_curve: CoolingCurve,
}

impl Stage {
    pub fn base_temperature(&self) -> f64 {
        self.cooling_curve.base_temperature()
    }
}
