//! Seeded shot generator used as a test oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::readout::dataset::{IQDataset, Prepared, Shot};

/// Ground truth for a synthetic readout experiment. Voltages in V.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTruth {
    pub qubit_id: String,
    pub sigma: f64,
    pub center_g: [f64; 2],
    pub center_e: [f64; 2],
    /// Excited population of the ground-prepared state.
    pub thermal_ground: f64,
    /// Ground population of the excited-prepared state.
    pub thermal_excited: f64,
    /// Probability that an excited shot decays during the measurement.
    pub decay_probability: f64,
    /// Shots per prepared state.
    pub n_shots: usize,
    pub readout_duration: f64,
    pub qubit_frequency: f64,
    pub t1_reference: Option<f64>,
}

impl SynthTruth {
    fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("thermal_ground", self.thermal_ground),
            ("thermal_excited", self.thermal_excited),
            ("decay_probability", self.decay_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid("synthetic truth", format!("{name} = {p} is not a probability")));
            }
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("synthetic truth", format!("sigma = {}", self.sigma)));
        }
        Ok(())
    }

    /// Expected excited-prep misassignment from decay alone, for noiseless
    /// clouds: a decay at uniform time lands past the midpoint half the time.
    pub fn decay_misassignment(&self) -> f64 {
        0.5 * self.decay_probability
    }
}

/// Draws `n_shots` per preparation. An excited shot that decays does so at a
/// uniform time in the window; its integrated signal is the boxcar-weighted
/// mix of the two centres.
pub fn synth_shots(truth: &SynthTruth, seed: u64) -> Result<IQDataset> {
    truth.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, truth.sigma).map_err(|e| Error::invalid("synthetic truth", e.to_string()))?;
    let mut shots = Vec::with_capacity(2 * truth.n_shots);
    for prepared in [Prepared::Ground, Prepared::Excited] {
        let flip = match prepared {
            Prepared::Ground => truth.thermal_ground,
            Prepared::Excited => truth.thermal_excited,
        };
        for _ in 0..truth.n_shots {
            let starts_excited = (prepared == Prepared::Excited) != (rng.random::<f64>() < flip);
            let w = if !starts_excited {
                0.0
            } else if rng.random::<f64>() < truth.decay_probability {
                rng.random::<f64>()
            } else {
                1.0
            };
            let c = [
                truth.center_g[0] + w * (truth.center_e[0] - truth.center_g[0]),
                truth.center_g[1] + w * (truth.center_e[1] - truth.center_g[1]),
            ];
            shots.push(Shot {
                prepared,
                i: c[0] + noise.sample(&mut rng),
                q: c[1] + noise.sample(&mut rng),
            });
        }
    }
    Ok(IQDataset {
        qubit_id: truth.qubit_id.clone(),
        shots,
        readout_duration: truth.readout_duration,
        qubit_frequency: truth.qubit_frequency,
        t1_reference: truth.t1_reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truth() -> SynthTruth {
        SynthTruth {
            qubit_id: "q".into(),
            sigma: 1e-3,
            center_g: [-5e-3, 0.0],
            center_e: [5e-3, 0.0],
            thermal_ground: 0.01,
            thermal_excited: 0.05,
            decay_probability: 0.0,
            n_shots: 1000,
            readout_duration: 1e-6,
            qubit_frequency: 4.5e9,
            t1_reference: None,
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let a = synth_shots(&truth(), 7).unwrap();
        assert_eq!(a, synth_shots(&truth(), 7).unwrap());
        assert_ne!(a, synth_shots(&truth(), 8).unwrap());
    }

    #[test]
    fn rejects_bad_probabilities() {
        let mut t = truth();
        t.decay_probability = 1.5;
        assert!(synth_shots(&t, 1).is_err());
    }
}
