use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A normalised decay: signal 1 at zero delay, 0 asymptotically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub delays: Vec<f64>,
    pub signal: Vec<f64>,
}

impl DecayCurve {
    pub fn new(delays: Vec<f64>, signal: Vec<f64>) -> Result<Self> {
        let c = Self { delays, signal };
        c.validate()?;
        Ok(c)
    }

    /// Maps raw levels so `start` → 1 and `end` → 0.
    pub fn from_raw(delays: Vec<f64>, raw: &[f64], start: f64, end: f64) -> Result<Self> {
        if !(start - end).is_normal() {
            return Err(Error::invalid("calibration levels", format!("start {start} and end {end} coincide")));
        }
        Self::new(delays, raw.iter().map(|v| (v - end) / (start - end)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.delays.len() != self.signal.len() {
            return Err(Error::invalid(
                "decay curve",
                format!("{} delays but {} signal points", self.delays.len(), self.signal.len()),
            ));
        }
        if self.delays.len() < 4 {
            return Err(Error::invalid("decay curve", "fewer than 4 points"));
        }
        if !self.delays.iter().chain(&self.signal).all(|v| v.is_finite()) {
            return Err(Error::invalid("decay curve", "non-finite value"));
        }
        if self.delays[0] < 0.0 || self.delays.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("decay curve", "delays must be non-negative and strictly increasing"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub tau: f64,
    pub r_squared: f64,
}

// search range for the dimensionless rate k = t_max/τ
const LN_K_MIN: f64 = -9.0;
const LN_K_MAX: f64 = 9.0;
const GRID: usize = 181;

fn sse(x: &[f64], y: &[f64], k: f64) -> f64 {
    x.iter().zip(y).map(|(x, y)| (y - (-k * x).exp()).powi(2)).sum()
}

/// ½·dS/dk and its derivative in k.
fn gradient(x: &[f64], y: &[f64], k: f64) -> (f64, f64) {
    let mut g = 0.0;
    let mut dg = 0.0;
    for (&x, &y) in x.iter().zip(y) {
        let e = (-k * x).exp();
        g += (y - e) * x * e;
        dg += x * x * e * (2.0 * e - y);
    }
    (g, dg)
}

/// Least-squares fit of exp(−t/τ) with τ the only parameter.
pub fn fit_decay(curve: &DecayCurve) -> Result<DecayFit> {
    curve.validate()?;
    let t_max = *curve.delays.last().expect("validated length");
    let x: Vec<f64> = curve.delays.iter().map(|t| t / t_max).collect();
    let y = &curve.signal;

    let ln_k = |i: usize| LN_K_MIN + (LN_K_MAX - LN_K_MIN) * i as f64 / (GRID - 1) as f64;
    let best = (0..GRID)
        .map(|i| (i, sse(&x, y, ln_k(i).exp())))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    if best == 0 {
        return Err(Error::Domain("no decay: best-fit τ is non-positive or unbounded".into()));
    }
    if best == GRID - 1 {
        return Err(Error::NoConvergence("decay faster than the first delay resolves".into()));
    }

    // safeguarded Newton on dS/dk = 0 inside the grid bracket
    let (mut lo, mut hi) = (ln_k(best - 1).exp(), ln_k(best + 1).exp());
    let mut k = ln_k(best).exp();
    let mut converged = false;
    for _ in 0..100 {
        let (g, dg) = gradient(&x, y, k);
        if g < 0.0 {
            lo = k;
        } else {
            hi = k;
        }
        let mut next = k - g / dg;
        if !(dg > 0.0) || !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - k).abs() <= 1e-15 * k || hi - lo <= 1e-15 * k {
            k = next;
            converged = true;
            break;
        }
        k = next;
    }
    if !converged {
        return Err(Error::NoConvergence("decay fit".into()));
    }

    let ss_res = sse(&x, y, k);
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        f64::NEG_INFINITY
    };
    Ok(DecayFit {
        tau: t_max / k,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(tau: f64, n: usize, t_max: f64) -> DecayCurve {
        let delays: Vec<f64> = (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect();
        let signal = delays.iter().map(|t| (-t / tau).exp()).collect();
        DecayCurve::new(delays, signal).unwrap()
    }

    #[test]
    fn noiseless_identity() {
        let f = fit_decay(&exact(100e-6, 10, 400e-6)).unwrap();
        assert!((f.tau / 100e-6 - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_curves() {
        assert!(DecayCurve::new(vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.2]).is_err());
        assert!(DecayCurve::new(vec![0.0, 1.0, 1.0, 2.0], vec![1.0; 4]).is_err());
        assert!(DecayCurve::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0; 3]).is_err());
        assert!(DecayCurve::from_raw(vec![0.0, 1.0, 2.0, 3.0], &[1.0; 4], 0.3, 0.3).is_err());
    }

    #[test]
    fn growing_signal_rejected() {
        let c = DecayCurve::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 1.2, 1.4, 1.6]).unwrap();
        assert!(matches!(fit_decay(&c), Err(Error::Domain(_))));
    }

    #[test]
    fn raw_levels() {
        let c = DecayCurve::from_raw(vec![0.0, 1.0, 2.0, 3.0], &[0.9, 0.5, 0.3, 0.1], 0.9, 0.1).unwrap();
        assert_eq!(c.signal[0], 1.0);
        assert_eq!(c.signal[3], 0.0);
    }
}
