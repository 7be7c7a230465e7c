//! Heat loads and stage temperatures for the bundled wiring payloads, the
//! mixing-chamber headroom, and the wafer-to-package contraction mismatch.

use qpack_lab::thermal::{
    bundled_contraction, differential_contraction, evaluate_payload, headroom, Payload, StageName, PRESETS,
};

fn main() -> qpack_lab::Result<()> {
    for name in PRESETS {
        let payload = Payload::preset(name)?;
        let report = evaluate_payload(&payload)?;
        println!("{name}");
        for s in &report.stages {
            println!(
                "  {:<4} passive {:>10.4e} W  active+dissipative {:>10.4e} W  T {:>8.4} K",
                s.stage.to_string(),
                s.passive,
                s.active + s.dissipative,
                s.temperature.unwrap_or(f64::NAN)
            );
        }
        let h = headroom(&report, payload.mxc_budget);
        println!(
            "  MXC {:.3e} W of {:.1e} W budget ({:.1}%)",
            report.stage(StageName::MXC).total(),
            payload.mxc_budget,
            100.0 * h.fraction
        );
    }
    let dl = differential_contraction(38.1e-3, bundled_contraction("aluminium")?, bundled_contraction("sapphire")?)?;
    println!("Al package vs sapphire wafer over 38.1 mm: {:.1} um", dl * 1e6);
    Ok(())
}
