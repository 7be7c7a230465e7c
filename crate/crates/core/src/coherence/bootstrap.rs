use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherence::stats::{median, quantile_sorted};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Median,
    Min,
    Max,
}

impl Statistic {
    pub fn apply(self, values: &mut [f64]) -> f64 {
        match self {
            Statistic::Median => median(values),
            Statistic::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            Statistic::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistic::Median => "median",
            Statistic::Min => "min",
            Statistic::Max => "max",
        })
    }
}

impl FromStr for Statistic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "median" => Ok(Statistic::Median),
            "min" => Ok(Statistic::Min),
            "max" => Ok(Statistic::Max),
            other => Err(Error::Unknown {
                kind: "statistic",
                name: other.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub sizes: Vec<usize>,
    pub resamples: usize,
    /// Confidence levels as fractions, e.g. 0.5, 0.9, 0.99.
    pub confidences: Vec<f64>,
    pub seed: u64,
    pub with_replacement: bool,
}

impl BootstrapConfig {
    /// Every size from 1 to `population`, 2000 resamples, 50/90/99%.
    pub fn full_range(population: usize, seed: u64) -> Self {
        Self {
            sizes: (1..=population).collect(),
            resamples: 2000,
            confidences: vec![0.5, 0.9, 0.99],
            seed,
            with_replacement: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceBand {
    pub confidence: f64,
    /// Central interval of the subsample statistic.
    pub low: f64,
    pub high: f64,
    /// The `confidence` quantile of |statistic − full| / |full|.
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapResult {
    pub statistic: Statistic,
    pub population: usize,
    pub full_value: f64,
    pub sizes: Vec<usize>,
    pub mean_estimate: Vec<f64>,
    /// One entry per size, bands in the configured confidence order.
    pub bands: Vec<Vec<ConfidenceBand>>,
}

impl BootstrapResult {
    /// Smallest configured size from which the relative error at
    /// `confidence` stays at or below `threshold` for every larger size.
    pub fn crossing_size(&self, confidence: f64, threshold: f64) -> Option<usize> {
        let col = self.bands.first()?.iter().position(|b| (b.confidence - confidence).abs() < 1e-12)?;
        let mut crossing = None;
        for (size, bands) in self.sizes.iter().zip(&self.bands).rev() {
            if bands[col].relative_error <= threshold {
                crossing = Some(*size);
            } else {
                break;
            }
        }
        crossing
    }
}

/// Subsampling estimate of how a statistic's error shrinks with sample size.
/// Each size draws from its own stream of a ChaCha8 generator keyed by the
/// size, so results do not depend on thread count or on which other sizes
/// are requested.
pub fn bootstrap_statistic(values: &[f64], statistic: Statistic, config: &BootstrapConfig) -> Result<BootstrapResult> {
    let n = values.len();
    if n == 0 {
        return Err(Error::Domain("bootstrap over an empty value set".into()));
    }
    if !values.iter().all(|v| v.is_finite()) {
        return Err(Error::invalid("bootstrap values", "non-finite value"));
    }
    if config.resamples < 100 {
        return Err(Error::invalid("bootstrap", format!("{} resamples, need at least 100", config.resamples)));
    }
    if let Some(&bad) = config.sizes.iter().find(|&&s| s == 0 || (s > n && !config.with_replacement)) {
        return Err(Error::invalid("bootstrap", format!("subsample size {bad} for a population of {n}")));
    }
    if let Some(&bad) = config.confidences.iter().find(|&&c| !(c > 0.0 && c < 1.0)) {
        return Err(Error::invalid("bootstrap", format!("confidence {bad} outside (0, 1)")));
    }
    let full_value = statistic.apply(&mut values.to_vec());
    if full_value == 0.0 {
        return Err(Error::Domain("full-population statistic is 0; relative error undefined".into()));
    }

    let per_size: Vec<(f64, Vec<ConfidenceBand>)> = config
        .sizes
        .par_iter()
        .map(|&size| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(size as u64);
            let mut draws = Vec::with_capacity(config.resamples);
            let mut sub = vec![0.0; size];
            for _ in 0..config.resamples {
                if config.with_replacement {
                    for s in sub.iter_mut() {
                        *s = values[rng.random_range(0..n)];
                    }
                } else {
                    for (s, i) in sub.iter_mut().zip(index::sample(&mut rng, n, size)) {
                        *s = values[i];
                    }
                }
                draws.push(statistic.apply(&mut sub));
            }
            let mean = draws.iter().sum::<f64>() / draws.len() as f64;
            let mut errors: Vec<f64> = draws.iter().map(|d| ((d - full_value) / full_value).abs()).collect();
            draws.sort_by(f64::total_cmp);
            errors.sort_by(f64::total_cmp);
            let bands = config
                .confidences
                .iter()
                .map(|&c| ConfidenceBand {
                    confidence: c,
                    low: quantile_sorted(&draws, 0.5 - 0.5 * c),
                    high: quantile_sorted(&draws, 0.5 + 0.5 * c),
                    relative_error: quantile_sorted(&errors, c),
                })
                .collect();
            (mean, bands)
        })
        .collect();

    let (mean_estimate, bands) = per_size.into_iter().unzip();
    Ok(BootstrapResult {
        statistic,
        population: n,
        full_value,
        sizes: config.sizes.clone(),
        mean_estimate,
        bands,
    })
}
