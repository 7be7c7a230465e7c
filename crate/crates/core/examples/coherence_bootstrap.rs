//! How many qubits does it take to estimate the median (or the minimum) T₁
//! of a wafer? Subsampling bootstrap over a lognormal ensemble.

use qpack_lab::coherence::{bootstrap_statistic, lognormal_quantiles, BootstrapConfig, Statistic};

fn main() -> qpack_lab::Result<()> {
    let t1 = lognormal_quantiles(105, 97e-6, 0.5);
    let config = BootstrapConfig::full_range(t1.len(), 42);
    for stat in [Statistic::Median, Statistic::Min] {
        let t = std::time::Instant::now();
        let result = bootstrap_statistic(&t1, stat, &config)?;
        println!("{stat}: full value {:.1} us ({:.2} s)", result.full_value * 1e6, t.elapsed().as_secs_f64());
        for conf in [0.5, 0.9, 0.99] {
            match result.crossing_size(conf, 0.2) {
                Some(n) => println!("  {:>2.0}% of subsamples within 20% from {n} qubits", conf * 100.0),
                None => println!("  {:>2.0}% never within 20%", conf * 100.0),
            }
        }
    }
    Ok(())
}
