use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherence::record::{observable_values, Observable, QubitRecord};
use crate::coherence::stats::{median, quantile_sorted};
use crate::error::{Error, Result};
use crate::field::Point2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PearsonConfig {
    /// Explicit distance edges, m. When absent, `bin_count` equal bins span
    /// the observed pair distances.
    pub edges: Option<Vec<f64>>,
    pub bin_count: usize,
    /// Fraction of the qubits drawn (without replacement) per resample.
    pub bootstrap_fraction: f64,
    pub resamples: usize,
    pub confidence: f64,
    pub seed: u64,
    pub r2_threshold: f64,
}

impl Default for PearsonConfig {
    fn default() -> Self {
        Self {
            edges: None,
            bin_count: 10,
            bootstrap_fraction: 0.5,
            resamples: 1000,
            confidence: 0.95,
            seed: 0,
            r2_threshold: super::record::DEFAULT_R2_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationBin {
    pub low: f64,
    pub high: f64,
    pub pairs: usize,
    /// Mean of zᵢ·zⱼ over pairs in the bin; `None` for an empty bin.
    pub value: Option<f64>,
    pub band: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpatialCorrelation {
    pub observable: Option<Observable>,
    pub qubits: usize,
    pub bins: Vec<CorrelationBin>,
}

fn zscores(values: &[f64]) -> Option<Vec<f64>> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    (sd > 0.0 && sd.is_finite()).then(|| values.iter().map(|v| (v - mean) / sd).collect())
}

fn bin_of(edges: &[f64], d: f64) -> Option<usize> {
    let last = edges.len() - 1;
    if d < edges[0] || d > edges[last] {
        return None;
    }
    Some(edges.partition_point(|&e| e <= d).saturating_sub(1).min(last - 1))
}

/// Per-bin sums and counts of zᵢ·zⱼ over all pairs within `subset`.
fn accumulate(points: &[Point2], z: &[f64], subset: &[usize], edges: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let nb = edges.len() - 1;
    let mut sum = vec![0.0; nb];
    let mut count = vec![0; nb];
    for (a, &i) in subset.iter().enumerate() {
        for &j in &subset[a + 1..] {
            if let Some(b) = bin_of(edges, points[i].distance(points[j])) {
                sum[b] += z[i] * z[j];
                count[b] += 1;
            }
        }
    }
    (sum, count)
}

/// Distance-binned correlation of z-scored values with subset-bootstrap
/// confidence bands.
pub fn pearson_binned(points: &[Point2], values: &[f64], config: &PearsonConfig) -> Result<SpatialCorrelation> {
    let n = points.len();
    if n != values.len() {
        return Err(Error::invalid("correlation input", "points and values differ in length"));
    }
    if n < 2 {
        return Err(Error::Domain(format!("{n} measured qubits; correlation needs at least 2")));
    }
    if !(config.bootstrap_fraction > 0.0 && config.bootstrap_fraction <= 1.0) {
        return Err(Error::invalid("bootstrap fraction", config.bootstrap_fraction.to_string()));
    }
    if !(config.confidence > 0.0 && config.confidence < 1.0) {
        return Err(Error::invalid("confidence", config.confidence.to_string()));
    }
    let z = zscores(values).ok_or_else(|| Error::Domain("observable has zero variance".into()))?;

    let edges = match &config.edges {
        Some(e) => {
            if e.len() < 2 || e.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid("distance bins", "edges must be increasing, at least two"));
            }
            e.clone()
        }
        None => {
            if config.bin_count == 0 {
                return Err(Error::invalid("distance bins", "zero bins"));
            }
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    let d = points[i].distance(points[j]);
                    lo = lo.min(d);
                    hi = hi.max(d);
                }
            }
            if hi <= lo {
                hi = lo + 1e-12;
            }
            let k = config.bin_count;
            (0..=k).map(|b| lo + (hi - lo) * b as f64 / k as f64).collect()
        }
    };

    let all: Vec<usize> = (0..n).collect();
    let (sum, count) = accumulate(points, &z, &all, &edges);
    let m = ((config.bootstrap_fraction * n as f64).round() as usize).clamp(2, n);

    let draws: Vec<Vec<Option<f64>>> = (0..config.resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(r as u64);
            let mut subset = index::sample(&mut rng, n, m).into_vec();
            subset.sort_unstable();
            let sub_vals: Vec<f64> = subset.iter().map(|&i| values[i]).collect();
            let Some(sub_z) = zscores(&sub_vals) else {
                return vec![None; edges.len() - 1];
            };
            let mut zfull = vec![0.0; n];
            for (&i, zv) in subset.iter().zip(sub_z) {
                zfull[i] = zv;
            }
            let (s, c) = accumulate(points, &zfull, &subset, &edges);
            s.iter().zip(&c).map(|(s, &c)| (c > 0).then(|| s / c as f64)).collect()
        })
        .collect();

    let tail = 0.5 * (1.0 - config.confidence);
    let bins = (0..edges.len() - 1)
        .map(|b| {
            let mut samples: Vec<f64> = draws.iter().filter_map(|d| d[b]).collect();
            samples.sort_by(f64::total_cmp);
            let band = (samples.len() >= 20)
                .then(|| (quantile_sorted(&samples, tail), quantile_sorted(&samples, 1.0 - tail)));
            CorrelationBin {
                low: edges[b],
                high: edges[b + 1],
                pairs: count[b],
                value: (count[b] > 0).then(|| sum[b] / count[b] as f64),
                band,
            }
        })
        .collect();
    Ok(SpatialCorrelation {
        observable: None,
        qubits: n,
        bins,
    })
}

/// Correlation of one observable across measured qubits; unmeasured qubits
/// are skipped.
pub fn pearson_spatial(
    records: &[QubitRecord],
    observable: Observable,
    config: &PearsonConfig,
) -> Result<SpatialCorrelation> {
    let data = observable_values(records, observable, config.r2_threshold);
    let (points, values): (Vec<Point2>, Vec<f64>) = data.into_iter().unzip();
    let mut out = pearson_binned(&points, &values, config)?;
    out.observable = Some(observable);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialBin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
    pub median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    /// (distance from wafer centre, value), sorted by distance.
    pub points: Vec<(f64, f64)>,
    pub bins: Vec<RadialBin>,
}

/// Scatter of value against radius plus medians in `bins` equal-width rings
/// from 0 to the outermost qubit.
pub fn radial_profile(data: &[(Point2, f64)], bins: usize) -> Result<RadialProfile> {
    if data.is_empty() {
        return Err(Error::Domain("radial profile of no qubits".into()));
    }
    if bins == 0 {
        return Err(Error::invalid("radial bins", "zero bins"));
    }
    let mut points: Vec<(f64, f64)> = data.iter().map(|(p, v)| (p.norm(), *v)).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let r_max = points.last().map(|p| p.0).unwrap_or(0.0);
    let bins = if r_max > 0.0 { bins } else { 1 };
    let width = r_max / bins as f64;
    let mut groups = vec![Vec::new(); bins];
    for &(r, v) in &points {
        let b = if width > 0.0 { ((r / width) as usize).min(bins - 1) } else { 0 };
        groups[b].push(v);
    }
    let bins = groups
        .into_iter()
        .enumerate()
        .map(|(b, mut g)| RadialBin {
            low: b as f64 * width,
            high: (b + 1) as f64 * width,
            count: g.len(),
            median: (!g.is_empty()).then(|| median(&mut g)),
        })
        .collect();
    Ok(RadialProfile { points, bins })
}

/// Radial profile of one observable over the measured qubits.
pub fn radial_profile_of(
    records: &[QubitRecord],
    observable: Observable,
    r2_threshold: f64,
    bins: usize,
) -> Result<RadialProfile> {
    radial_profile(&observable_values(records, observable, r2_threshold), bins)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Vec<Point2> {
        (0..n).map(|i| Point2::new(i as f64 * 1e-3, 0.0).unwrap()).collect()
    }

    #[test]
    fn zero_variance_rejected() {
        assert!(pearson_binned(&line(5), &[2.0; 5], &PearsonConfig::default()).is_err());
        assert!(pearson_binned(&line(1), &[2.0], &PearsonConfig::default()).is_err());
    }

    #[test]
    fn products_average_over_pairs() {
        // two qubits: z = ±1, one pair with product −1
        let cfg = PearsonConfig {
            resamples: 100,
            bin_count: 1,
            ..Default::default()
        };
        let c = pearson_binned(&line(2), &[1.0, 3.0], &cfg).unwrap();
        assert_eq!(c.bins.len(), 1);
        assert_eq!(c.bins[0].pairs, 1);
        assert!((c.bins[0].value.unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_bins_absent() {
        let cfg = PearsonConfig {
            edges: Some(vec![0.0, 0.5e-3, 1.5e-3, 10.0]),
            resamples: 100,
            ..Default::default()
        };
        let c = pearson_binned(&line(3), &[1.0, 2.0, 4.0], &cfg).unwrap();
        assert_eq!(c.bins[0].value, None);
        assert_eq!(c.bins[0].pairs, 0);
        assert_eq!(c.bins[1].pairs, 2);
    }

    #[test]
    fn radial_single_and_flat() {
        let p = radial_profile(&[(Point2::origin(), 5.0)], 4).unwrap();
        assert_eq!(p.points, vec![(0.0, 5.0)]);
        assert_eq!(p.bins.len(), 1);
        let data: Vec<(Point2, f64)> = line(20).into_iter().map(|p| (p, 7.0)).collect();
        let p = radial_profile(&data, 4).unwrap();
        assert!(p.bins.iter().all(|b| b.median == Some(7.0)));
        assert!(radial_profile(&[], 3).is_err());
    }
}
