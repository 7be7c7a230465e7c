//! Synthetic wafer: distance-binned Pearson correlation of T₁ and its
//! radial profile. Pass a directory to also write the wafer map and decay
//! curves for the `coherence` subcommand.

use qpack_lab::coherence::{
    pearson_spatial, radial_profile_of, synth_ensemble, write_decays, write_wafer_map, EnsembleSpec, Observable,
    PearsonConfig,
};

fn main() -> qpack_lab::Result<()> {
    let spec = EnsembleSpec::default();
    let records = synth_ensemble(&spec, 11)?;
    let config = PearsonConfig::default();

    let c = pearson_spatial(&records, Observable::T1, &config)?;
    println!("T1 correlation by distance");
    for b in &c.bins {
        let v = b.value.map_or("-".to_string(), |v| format!("{v:+.3}"));
        let band = b.band.map_or(String::new(), |(lo, hi)| format!("[{lo:+.3}, {hi:+.3}]"));
        println!("  {:>5.1}-{:>5.1} mm  {:>4} pairs  {v:>7} {band}", b.low * 1e3, b.high * 1e3, b.pairs);
    }

    let profile = radial_profile_of(&records, Observable::T1, config.r2_threshold, 4)?;
    println!("median T1 by radius");
    for b in &profile.bins {
        println!("  {:>5.1}-{:>5.1} mm  {:>3} qubits  {:.1} us", b.low * 1e3, b.high * 1e3, b.count, b.median.unwrap_or(f64::NAN) * 1e6);
    }

    if let Some(dir) = std::env::args_os().nth(1).map(std::path::PathBuf::from) {
        std::fs::create_dir_all(dir.join("decays")).map_err(|e| qpack_lab::Error::Io { path: dir.clone(), source: e })?;
        let wafer = dir.join("wafer.csv");
        std::fs::write(&wafer, write_wafer_map(&records)?).map_err(|e| qpack_lab::Error::Io { path: wafer, source: e })?;
        write_decays(&dir.join("decays"), &records)?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
