//! `key=value,...` option strings for `--bootstrap` and `--pearson`.
//!
//! A bare item continues the list of the key before it, so
//! `conf=50,90,99` and `observable=t1,t2e` each name one key.

use serde::Serialize;

use crate::coherence::{BootstrapConfig, Observable, PearsonConfig, Statistic};
use crate::error::{Error, Result};
use crate::units::{parse_compact, Dimension};

fn key_values(spec: &str, what: &'static str) -> Result<Vec<(String, Vec<String>)>> {
    let mut out: Vec<(String, Vec<String>)> = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once('=') {
            Some((k, v)) => out.push((k.trim().to_string(), vec![v.trim().to_string()])),
            None => match out.last_mut() {
                Some((_, values)) => values.push(item.to_string()),
                None => return Err(Error::invalid(what, format!("`{item}` has no key"))),
            },
        }
    }
    Ok(out)
}

fn one<'a>(key: &str, values: &'a [String], what: &'static str) -> Result<&'a str> {
    match values {
        [v] => Ok(v),
        _ => Err(Error::invalid(what, format!("`{key}` takes one value"))),
    }
}

fn number<T: std::str::FromStr>(key: &str, v: &str, what: &'static str) -> Result<T> {
    v.parse().map_err(|_| Error::invalid(what, format!("`{key}={v}` is not a number")))
}

/// Confidence as a fraction; values above 1 are read as percent.
fn confidence(v: &str, what: &'static str) -> Result<f64> {
    let c: f64 = number("conf", v, what)?;
    let c = if c > 1.0 { c / 100.0 } else { c };
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::invalid(what, format!("confidence `{v}` outside (0, 100)")));
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Sizes {
    /// 1 through the population.
    All,
    Range(usize, usize),
    List(Vec<usize>),
}

impl Sizes {
    pub fn resolve(&self, population: usize) -> Vec<usize> {
        match self {
            Sizes::All => (1..=population).collect(),
            Sizes::Range(a, b) => (*a..=(*b).min(population)).collect(),
            Sizes::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapSpec {
    pub sizes: Sizes,
    pub resamples: usize,
    pub confidences: Vec<f64>,
    pub statistics: Vec<Statistic>,
    pub quantities: Vec<Observable>,
    pub with_replacement: bool,
}

impl Default for BootstrapSpec {
    fn default() -> Self {
        Self {
            sizes: Sizes::All,
            resamples: 2000,
            confidences: vec![0.5, 0.9, 0.99],
            statistics: vec![Statistic::Median, Statistic::Min],
            quantities: vec![Observable::T1],
            with_replacement: false,
        }
    }
}

impl BootstrapSpec {
    /// Keys: `sizes` (`all`, `a-b` or a list), `resamples`, `conf` (percent),
    /// `stat` (median, min, max), `quantity` (t1, t2e), `replace` (bool).
    pub fn parse(spec: &str) -> Result<Self> {
        const WHAT: &str = "bootstrap spec";
        let mut out = Self::default();
        for (key, values) in key_values(spec, WHAT)? {
            match key.as_str() {
                "sizes" => {
                    out.sizes = match values.as_slice() {
                        [v] if v == "all" => Sizes::All,
                        [v] if v.contains('-') => {
                            let (a, b) = v.split_once('-').expect("checked");
                            let (a, b) = (number(&key, a, WHAT)?, number(&key, b, WHAT)?);
                            if a == 0 || a > b {
                                return Err(Error::invalid(WHAT, format!("size range `{v}`")));
                            }
                            Sizes::Range(a, b)
                        }
                        _ => Sizes::List(values.iter().map(|v| number(&key, v, WHAT)).collect::<Result<_>>()?),
                    }
                }
                "resamples" => out.resamples = number(&key, one(&key, &values, WHAT)?, WHAT)?,
                "conf" | "confidence" => {
                    out.confidences = values.iter().map(|v| confidence(v, WHAT)).collect::<Result<_>>()?
                }
                "stat" | "statistic" => out.statistics = values.iter().map(|v| v.parse()).collect::<Result<_>>()?,
                "quantity" => out.quantities = values.iter().map(|v| v.parse()).collect::<Result<_>>()?,
                "replace" => {
                    out.with_replacement = match one(&key, &values, WHAT)? {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        v => return Err(Error::invalid(WHAT, format!("`replace={v}`"))),
                    }
                }
                _ => return Err(Error::Unknown { kind: "bootstrap key", name: key }),
            }
        }
        Ok(out)
    }

    pub fn config(&self, population: usize, seed: u64) -> BootstrapConfig {
        BootstrapConfig {
            sizes: self.sizes.resolve(population),
            resamples: self.resamples,
            confidences: self.confidences.clone(),
            seed,
            with_replacement: self.with_replacement,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PearsonSpec {
    pub observables: Vec<Observable>,
    pub bins: usize,
    /// Upper edge of the distance range, m; the observed maximum when absent.
    pub max_distance: Option<f64>,
    pub resamples: usize,
    pub fraction: f64,
    pub confidence: f64,
}

impl Default for PearsonSpec {
    fn default() -> Self {
        let d = PearsonConfig::default();
        Self {
            observables: vec![Observable::T1],
            bins: d.bin_count,
            max_distance: None,
            resamples: d.resamples,
            fraction: d.bootstrap_fraction,
            confidence: d.confidence,
        }
    }
}

impl PearsonSpec {
    /// Keys: `observable`, `bins`, `max_distance` (length with unit),
    /// `resamples`, `fraction`, `conf` (percent).
    pub fn parse(spec: &str) -> Result<Self> {
        const WHAT: &str = "pearson spec";
        let mut out = Self::default();
        for (key, values) in key_values(spec, WHAT)? {
            match key.as_str() {
                "observable" => out.observables = values.iter().map(|v| v.parse()).collect::<Result<_>>()?,
                "bins" => out.bins = number(&key, one(&key, &values, WHAT)?, WHAT)?,
                "max_distance" => out.max_distance = Some(parse_compact(one(&key, &values, WHAT)?, Dimension::Length)?),
                "resamples" => out.resamples = number(&key, one(&key, &values, WHAT)?, WHAT)?,
                "fraction" => out.fraction = number(&key, one(&key, &values, WHAT)?, WHAT)?,
                "conf" | "confidence" => out.confidence = confidence(one(&key, &values, WHAT)?, WHAT)?,
                _ => return Err(Error::Unknown { kind: "pearson key", name: key }),
            }
        }
        if out.bins == 0 {
            return Err(Error::invalid(WHAT, "bins must be positive"));
        }
        Ok(out)
    }

    pub fn config(&self, r2_threshold: f64, seed: u64) -> PearsonConfig {
        PearsonConfig {
            edges: self
                .max_distance
                .map(|d| (0..=self.bins).map(|k| d * k as f64 / self.bins as f64).collect()),
            bin_count: self.bins,
            bootstrap_fraction: self.fraction,
            resamples: self.resamples,
            confidence: self.confidence,
            seed,
            r2_threshold,
        }
    }
}
