//! Synthetic readout experiment: fit, error budget and effective
//! temperature for one qubit.

use qpack_lab::readout::{analyze_readout, synth_shots, BudgetOptions, EffectiveTemperature, SynthTruth};

fn main() -> qpack_lab::Result<()> {
    let (t_m, t1): (f64, f64) = (6.2e-6, 97e-6);
    let truth = SynthTruth {
        qubit_id: "Q00".into(),
        sigma: 1e-3,
        center_g: [-3.3e-3, 0.0],
        center_e: [3.3e-3, 0.0],
        thermal_ground: 0.006,
        thermal_excited: 0.006,
        decay_probability: 1.0 - (-t_m / t1).exp(),
        n_shots: 100_000,
        readout_duration: t_m,
        qubit_frequency: 4.5e9,
        t1_reference: Some(t1),
    };
    let shots = synth_shots(&truth, 1)?;
    let r = analyze_readout(&shots, None, BudgetOptions::default())?;
    let b = r.budget;
    println!("sigma {:.4} mV, centres {:.3} / {:.3} mV", r.fit.sigma * 1e3, r.fit.center_g * 1e3, r.fit.center_e * 1e3);
    println!("measured error {:.3}%", 100.0 * b.measured_error);
    println!("  thermal  {:.3}%", 100.0 * b.thermal);
    println!("  overlap  {:.3}%", 100.0 * b.overlap);
    println!("  decay    {:.3}%", 100.0 * b.decay);
    println!("  residual {:.3}%", 100.0 * b.residual);
    match r.effective_temperature {
        Some(EffectiveTemperature::Kelvin(t)) => println!("T_eff {:.1} mK", t * 1e3),
        Some(EffectiveTemperature::BelowFloor) => println!("T_eff below the measurement floor"),
        None => println!("T_eff undefined: {}", r.temperature_note.unwrap_or_default()),
    }
    Ok(())
}
