//! Seeded synthetic qubit ensembles.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StdNormal};

use crate::coherence::decay::DecayCurve;
use crate::coherence::record::QubitRecord;
use crate::error::{Error, Result};
use crate::field::Point2;

/// Log-normal values at the (k − ½)/n quantiles: the median is exactly
/// `median` for odd n and the spread is `log_sigma` in natural-log units.
pub fn lognormal_quantiles(n: usize, median: f64, log_sigma: f64) -> Vec<f64> {
    let z = StdNormal::standard();
    (0..n)
        .map(|k| median * (log_sigma * z.inverse_cdf((k as f64 + 0.5) / n as f64)).exp())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub qubits: usize,
    /// Qubits left without coherence data.
    pub unmeasured: usize,
    pub t1_median: f64,
    pub t2e_median: f64,
    pub log_sigma: f64,
    /// Strength of the rank correlation between coherence and radius; 0 is
    /// a random layout.
    pub radial_trend: f64,
    pub curves_per_qubit: usize,
    pub points_per_curve: usize,
    pub noise: f64,
    /// Relative spread of τ between repeated measurements of one qubit.
    pub repeat_spread: f64,
    /// Probability that a repeat is a failed measurement (noise only).
    pub garbage_fraction: f64,
    pub wafer_radius: f64,
    pub qubit_band: (f64, f64),
    pub resonator_band: (f64, f64),
    /// Linear frequency-error gradient across the wafer, Hz at the edge.
    pub frequency_gradient: f64,
    pub frequency_noise: f64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            qubits: 108,
            unmeasured: 3,
            t1_median: 97e-6,
            t2e_median: 129e-6,
            log_sigma: 0.5,
            radial_trend: 0.5,
            curves_per_qubit: 10,
            points_per_curve: 16,
            noise: 0.02,
            repeat_spread: 0.05,
            garbage_fraction: 0.02,
            wafer_radius: super::record::DEFAULT_WAFER_RADIUS,
            qubit_band: (4.2e9, 5.8e9),
            resonator_band: (9.6e9, 10.4e9),
            frequency_gradient: 60e6,
            frequency_noise: 25e6,
        }
    }
}

/// The `n` grid sites of a hexagonal lattice nearest the centre, scaled to
/// fill 90% of the wafer radius.
fn hex_sites(n: usize, radius: f64) -> Vec<Point2> {
    let half = (n as f64).sqrt() as i64 + 2;
    let mut sites = Vec::new();
    for j in -half..=half {
        for i in -half..=half {
            let x = i as f64 + 0.5 * (j.rem_euclid(2)) as f64;
            let y = j as f64 * 3f64.sqrt() / 2.0;
            sites.push((x, y));
        }
    }
    sites.sort_by(|a, b| a.0.hypot(a.1).total_cmp(&b.0.hypot(b.1)).then(a.1.total_cmp(&b.1)).then(a.0.total_cmp(&b.0)));
    sites.truncate(n);
    let r_max = sites.iter().map(|s| s.0.hypot(s.1)).fold(0.0, f64::max).max(1.0);
    let scale = 0.9 * radius / r_max;
    sites.into_iter().map(|(x, y)| Point2 { x: x * scale, y: y * scale }).collect()
}

fn synth_curves(
    rng: &mut ChaCha8Rng,
    tau: f64,
    spec: &EnsembleSpec,
    t_max: f64,
) -> Result<Vec<DecayCurve>> {
    let noise = Normal::new(0.0, spec.noise).map_err(|e| Error::invalid("ensemble", e.to_string()))?;
    let spread = Normal::new(0.0, spec.repeat_spread).map_err(|e| Error::invalid("ensemble", e.to_string()))?;
    let delays: Vec<f64> = (0..spec.points_per_curve)
        .map(|i| t_max * i as f64 / (spec.points_per_curve - 1) as f64)
        .collect();
    (0..spec.curves_per_qubit)
        .map(|_| {
            let garbage = rng.random::<f64>() < spec.garbage_fraction;
            let t = tau * spread.sample(rng).exp();
            let signal = delays
                .iter()
                .map(|&d| if garbage { 0.5 } else { (-d / t).exp() } + noise.sample(rng))
                .collect();
            DecayCurve::new(delays.clone(), signal)
        })
        .collect()
}

/// A wafer of qubits with log-normally spread coherence, measured
/// frequencies carrying a linear gradient plus noise, and repeated noisy
/// decay curves per qubit.
pub fn synth_ensemble(spec: &EnsembleSpec, seed: u64) -> Result<Vec<QubitRecord>> {
    if spec.unmeasured > spec.qubits || spec.points_per_curve < 4 || spec.qubits == 0 {
        return Err(Error::invalid("ensemble", "inconsistent qubit or point counts"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = hex_sites(spec.qubits, spec.wafer_radius);
    let measured = spec.qubits - spec.unmeasured;

    // rank qubits by radius plus noise and hand out sorted coherence values,
    // so the multiset of targets (and its median) is fixed
    let mut order: Vec<usize> = (0..spec.qubits).collect();
    order.shuffle(&mut rng);
    let (grey, active) = order.split_at(spec.unmeasured);
    let jitter = Normal::new(0.0, 1.0).expect("unit normal");
    let mut scored: Vec<(f64, usize)> = active
        .iter()
        .map(|&q| {
            let r = positions[q].norm() / spec.wafer_radius;
            (spec.radial_trend * r + (1.0 - spec.radial_trend) * jitter.sample(&mut rng), q)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let t1 = lognormal_quantiles(measured, spec.t1_median, spec.log_sigma);
    let t2e = lognormal_quantiles(measured, spec.t2e_median, spec.log_sigma);
    let mut targets = vec![None; spec.qubits];
    for (rank, &(_, q)) in scored.iter().enumerate() {
        targets[q] = Some((t1[rank], t2e[rank]));
    }
    debug_assert_eq!(targets.iter().filter(|t| t.is_none()).count(), grey.len());

    let fnoise = Normal::new(0.0, spec.frequency_noise).map_err(|e| Error::invalid("ensemble", e.to_string()))?;
    let mut records = Vec::with_capacity(spec.qubits);
    for (q, &position) in positions.iter().enumerate() {
        let frac = (q as f64 + 0.5) / spec.qubits as f64;
        let design = spec.qubit_band.0 + frac * (spec.qubit_band.1 - spec.qubit_band.0);
        let res_design = spec.resonator_band.0 + frac * (spec.resonator_band.1 - spec.resonator_band.0);
        let slope = spec.frequency_gradient * position.x / spec.wafer_radius;
        let (t1_samples, t2e_samples) = match targets[q] {
            Some((a, b)) => (
                synth_curves(&mut rng, a, spec, 4.0 * spec.t1_median)?,
                synth_curves(&mut rng, b, spec, 4.0 * spec.t2e_median)?,
            ),
            None => (Vec::new(), Vec::new()),
        };
        records.push(QubitRecord {
            qubit_id: format!("Q{q:03}"),
            position,
            design_frequency: design,
            measured_frequency: Some(design + slope + fnoise.sample(&mut rng)),
            resonator_design_frequency: res_design,
            resonator_measured_frequency: Some(res_design + 0.1 * slope + 0.1 * fnoise.sample(&mut rng)),
            t1_samples,
            t2e_samples,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_median_exact() {
        let v = lognormal_quantiles(105, 97e-6, 0.5);
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        assert!((s[52] / 97e-6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn layout_inside_wafer() {
        let spec = EnsembleSpec {
            curves_per_qubit: 2,
            ..Default::default()
        };
        let r = synth_ensemble(&spec, 1).unwrap();
        assert_eq!(r.len(), 108);
        assert!(r.iter().all(|q| q.validate(spec.wafer_radius).is_ok()));
        assert_eq!(r.iter().filter(|q| q.t1_samples.is_empty()).count(), 3);
        assert_eq!(r, synth_ensemble(&spec, 1).unwrap());
    }
}
