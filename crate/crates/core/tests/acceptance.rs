//! End-to-end acceptance: one PASS/FAIL line per criterion, tolerances
//! pinned below. Every check runs even when an earlier one fails; the
//! process exits non-zero if any did.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::tm010;
use qpack_lab::cavity::{mode_report, parse_bands, parse_geometry, solve_modes, SolverConfig};
use qpack_lab::cli::DEFAULT_BANDS;
use qpack_lab::coherence::{
    bootstrap_statistic, lognormal_quantiles, pearson_binned, synth_ensemble, BootstrapConfig, EnsembleSpec,
    PearsonConfig, Statistic,
};
use qpack_lab::field::{CavityGeometry, MaterialTable, Point2};
use qpack_lab::loss::{
    conductor_participation, dielectric_participation, seam_admittance, seam_bound_from_t1,
    surface_dielectric_participation, t1_from_q, SeamPath,
};
use qpack_lab::readout::{
    fit_double_gaussian, overlap_error, project_shots, synth_shots, temperature_from_ratio, EffectiveTemperature,
    SynthTruth,
};
use qpack_lab::thermal::{
    bundled_contraction, differential_contraction, evaluate_payload, headroom_from_load, line_budget, Payload, StageName,
};
use qpack_lab::units::MU0;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const A: f64 = 47.3e-3;

// 1
const BESSEL_REL: f64 = 0.01;
const BESSEL_MIN_ORDER: f64 = 1.0;
const BESSEL_GRID_LIMIT: Duration = Duration::from_secs(30);
// 2
const PILLARED_MIN_HZ: f64 = 10e9;
const PILLARED_HZ: f64 = 11.83e9;
const PILLARED_REL: f64 = 0.15;
// 3
const EPR_REL: f64 = 0.01;
const EPR_MIN_ORDER: f64 = 0.8;
const EXACT_REL: f64 = 1e-9;
// 4
const T1_AT_35M: f64 = 1.24e-3;
const T1_REL: f64 = 0.05;
// 5
const SEEDS: u64 = 100;
const SEEDS_MIN_OK: usize = 95;
const OVERLAP_ABS: f64 = 1e-10;
const SCENARIO_ERROR: f64 = 0.025;
const SCENARIO_ABS: f64 = 0.005;
/// "about 1.6 to 1.8%", read to the stated rounding
const SCENARIO_DECAY: (f64, f64) = (0.0155, 0.0185);
// 6
const T_EFF: f64 = 36.0e-3;
const T_EFF_ABS: f64 = 0.1e-3;
// 7
const CROSSING_THRESHOLD: f64 = 0.2;
const MEDIAN_50: (usize, usize) = (3, 7);
const MEDIAN_90_MAX: usize = 28;
const MIN_50_MIN: usize = 42;
const BOOTSTRAP_LIMIT: Duration = Duration::from_secs(60);
// 8
const WHITE_MIN_CLEAN: usize = 90;
const AFFINE_ABS: f64 = 1e-12;
// 9
const CONSERVATION_REL: f64 = 1e-12;
const QPU_PASSIVE: (f64, f64) = (752.9e-9, 0.15);
const QPU_ACTIVE: (f64, f64) = (771.4e-9, 0.10);
const HT_ACTIVE: (f64, f64) = (2.2e-6, 0.25);
// 10
const CONTRACTION: (f64, f64) = (120e-6, 0.15);

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(got: f64, want: f64) -> f64 {
    (got / want - 1.0).abs()
}

fn bessel_oracle() -> Outcome {
    let t = MaterialTable::bundled();
    let g = CavityGeometry::bare_disc(A, 2e-3).unwrap();
    let exact = tm010(A, 1.0);
    let f = |h: f64| solve_modes(&g, &t, &SolverConfig::new(h, 1)).unwrap().frequencies()[0];
    let (f25, f50, f100) = (f(A / 25.0), f(A / 50.0), f(A / 100.0));
    let e = |x: f64| (x - exact).abs();
    let order = (e(f25) / e(f100)).log2() / 2.0;
    let err = rel(f100, exact);

    let start = Instant::now();
    let s = solve_modes(&g, &t, &SolverConfig::new(2.0 * A / 300.0, 16)).unwrap();
    let took = start.elapsed();
    ensure(
        err < BESSEL_REL && order >= BESSEL_MIN_ORDER && took < BESSEL_GRID_LIMIT && s.modes.len() == 16,
        format!(
            "f(a/100) {:.5} GHz vs {:.5} GHz ({err:.2e}), order {order:.2} (a/50 {:.2e}), 300x300 16 modes {:.1?}",
            f100 / 1e9,
            exact / 1e9,
            rel(f50, exact),
            took
        ),
    )
}

fn pillar_suppression() -> Outcome {
    let g = parse_geometry(include_str!("../data/demo/cavity.txt"), "cavity.txt").unwrap();
    let pillar_r = g.pillars().iter().map(|p| p.radius).fold(f64::INFINITY, f64::min);
    let h = (g.radius() / 150.0).min(pillar_r / 4.0);
    let s = solve_modes(&g, &MaterialTable::bundled(), &SolverConfig::new(h, 8)).unwrap();
    let r = mode_report(&s, &parse_bands(DEFAULT_BANDS).unwrap()).unwrap();
    let f1 = s.frequencies()[0];
    ensure(
        f1 > PILLARED_MIN_HZ && r.collisions == 0 && rel(f1, PILLARED_HZ) <= PILLARED_REL,
        format!("{} pillars, f1 {:.3} GHz, {} collisions", g.pillars().len(), f1 / 1e9, r.collisions),
    )
}

fn epr_oracles() -> Outcome {
    let (d, lambda) = (2e-3, 50e-9);
    let g = CavityGeometry::bare_disc(A, d).unwrap();
    let t = MaterialTable::bundled();
    let wall_and_seam = |n: f64| {
        let m = solve_modes(&g, &t, &SolverConfig::new(A / n, 1)).unwrap().modes.remove(0);
        let wall = conductor_participation(&m.field, "outer_wall", lambda).unwrap();
        let path = SeamPath::from_label(&m.field, "outer_wall").unwrap();
        let y = seam_admittance(&m.field, &path, m.frequency).unwrap();
        let y_exact = 2.0 / (2.0 * PI * m.frequency * MU0 * A * d);
        (rel(wall, 2.0 * lambda / A), rel(y, y_exact), m)
    };
    let (w50, s50, _) = wall_and_seam(50.0);
    let (w100, s100, m) = wall_and_seam(100.0);
    let (wall_order, seam_order) = ((w50 / w100).log2(), (s50 / s100).log2());

    let caps = conductor_participation(&m.field, "lid", lambda).unwrap()
        + conductor_participation(&m.field, "floor", lambda).unwrap();
    let caps_err = rel(caps, 2.0 * lambda / d);
    let oxide = surface_dielectric_participation(&m.field, "floor", 3e-9, 10.0).unwrap();
    let oxide_err = rel(oxide, 3e-9 / (100.0 * d));

    let (tw, eps) = (0.5e-3, 10.0);
    let wg = CavityGeometry::new(A, d, vec![], tw, eps).unwrap();
    let wm = solve_modes(&wg, &t, &SolverConfig::new(A / 60.0, 1)).unwrap().modes.remove(0);
    let pw = dielectric_participation(&wm.field, "wafer", &t).unwrap();
    let pg = dielectric_participation(&wm.field, "gap", &t).unwrap();
    let wafer_err = rel(pw, (tw / eps) / (tw / eps + d - tw));
    let sum_err = (pw + pg - 1.0).abs();

    ensure(
        w100 < EPR_REL
            && s100 < EPR_REL
            && wall_order >= EPR_MIN_ORDER
            && seam_order >= EPR_MIN_ORDER
            && caps_err < EXACT_REL
            && oxide_err < EXACT_REL
            && wafer_err < EXACT_REL
            && sum_err < EXACT_REL,
        format!(
            "wall {w100:.1e} (order {wall_order:.2}), seam {s100:.1e} (order {seam_order:.2}), \
             lid+floor {caps_err:.1e}, oxide {oxide_err:.1e}, wafer {wafer_err:.1e}, sum-1 {sum_err:.1e}"
        ),
    )
}

fn q_t1_arithmetic() -> Outcome {
    let t1 = t1_from_q(3.5e7, 4.5e9).unwrap();
    let y = 1.06e-3;
    let g = seam_bound_from_t1(100e-6, 4.5e9, y).unwrap();
    let exact = g == 2.0 * PI * 4.5e9 * 100e-6 * y || g == y * 2.0 * PI * 4.5e9 * 100e-6;
    ensure(
        rel(t1, T1_AT_35M) <= T1_REL && exact,
        format!("T1(3.5e7, 4.5 GHz) {:.4} ms, g_min {g:.6e} S/m exact {exact}", t1 * 1e3),
    )
}

fn readout_truth(n: usize) -> SynthTruth {
    SynthTruth {
        qubit_id: "q".into(),
        sigma: 1e-3,
        center_g: [-5e-3, 1e-3],
        center_e: [4e-3, 3e-3],
        thermal_ground: 0.01,
        thermal_excited: 0.05,
        decay_probability: 0.0,
        n_shots: n,
        readout_duration: 2e-6,
        qubit_frequency: 4.5e9,
        t1_reference: Some(100e-6),
    }
}

fn readout_round_trip() -> Outcome {
    let t = readout_truth(100_000);
    let n = t.n_shots as f64;
    let ok = (0..SEEDS)
        .filter(|&seed| {
            let p = project_shots(&synth_shots(&t, seed).unwrap()).unwrap();
            let fit = fit_double_gaussian(&p).unwrap();
            let along = |c: [f64; 2]| (c[0] - p.midpoint[0]) * p.axis[0] + (c[1] - p.midpoint[1]) * p.axis[1];
            let want = [
                t.sigma,
                along(t.center_g),
                along(t.center_e),
                n * (1.0 - t.thermal_ground),
                n * t.thermal_ground,
                n * t.thermal_excited,
                n * (1.0 - t.thermal_excited),
            ];
            fit.params().iter().zip(want).zip(fit.std_errors).all(|((g, w), se)| (g - w).abs() < 3.0 * se)
        })
        .count();

    let p = project_shots(&synth_shots(&readout_truth(20_000), 0).unwrap()).unwrap();
    let mut ten = fit_double_gaussian(&p).unwrap();
    ten.sigma = 1.0;
    ten.center_g = -5.0;
    ten.center_e = 5.0;
    let half_erfc = 0.5 * statrs::function::erf::erfc(5.0 / 2f64.sqrt());
    let overlap_err = (overlap_error(&ten) - half_erfc).abs();

    let scenario = SynthTruth {
        sigma: 1e-3,
        center_g: [-3.3e-3, 0.0],
        center_e: [3.3e-3, 0.0],
        thermal_ground: 0.006,
        thermal_excited: 0.006,
        decay_probability: 1.0 - (-6.2f64 / 97.0).exp(),
        readout_duration: 6.2e-6,
        t1_reference: Some(97e-6),
        ..readout_truth(100_000)
    };
    let ds = synth_shots(&scenario, 1).unwrap();
    let p = project_shots(&ds).unwrap();
    let fit = fit_double_gaussian(&p).unwrap();
    let b = qpack_lab::readout::error_budget(&ds, &p, &fit, None, Default::default()).unwrap();
    let split_ok = (b.thermal - 0.003).abs() < 0.001 && (b.overlap - 0.001).abs() < 0.0005 && (SCENARIO_DECAY.0..=SCENARIO_DECAY.1).contains(&b.decay);
    ensure(
        ok >= SEEDS_MIN_OK && overlap_err < OVERLAP_ABS && (b.measured_error - SCENARIO_ERROR).abs() <= SCENARIO_ABS && split_ok,
        format!(
            "{ok}/{SEEDS} seeds within 3 SE, 10σ overlap off by {overlap_err:.1e}, scenario {:.2}% = thermal {:.2}% + overlap {:.2}% + decay {:.2}% + residual {:.2}%",
            100.0 * b.measured_error,
            100.0 * b.thermal,
            100.0 * b.overlap,
            100.0 * b.decay,
            100.0 * b.residual
        ),
    )
}

fn effective_temperature() -> Outcome {
    match temperature_from_ratio(1.0, (-6f64).exp(), 4.5e9).unwrap() {
        EffectiveTemperature::Kelvin(k) => ensure((k - T_EFF).abs() <= T_EFF_ABS, format!("{:.4} mK", k * 1e3)),
        other => Err(format!("{other:?}")),
    }
}

fn bootstrap_crossings() -> Outcome {
    let values = lognormal_quantiles(105, 97e-6, 0.5);
    let start = Instant::now();
    let cfg = BootstrapConfig::full_range(values.len(), 42);
    let med = bootstrap_statistic(&values, Statistic::Median, &cfg).unwrap();
    let min = bootstrap_statistic(&values, Statistic::Min, &cfg).unwrap();
    let took = start.elapsed();
    let c = |r: &qpack_lab::coherence::BootstrapResult, conf| r.crossing_size(conf, CROSSING_THRESHOLD);
    let (m50, m90, n50) = (c(&med, 0.5), c(&med, 0.9), c(&min, 0.5));
    ensure(
        m50.is_some_and(|s| (MEDIAN_50.0..=MEDIAN_50.1).contains(&s))
            && m90.is_some_and(|s| s <= MEDIAN_90_MAX)
            && n50.is_some_and(|s| s >= MIN_50_MIN)
            && took < BOOTSTRAP_LIMIT,
        format!(
            "median crossing 50% {m50:?}, 90% {m90:?}; min crossing 50% {n50:?}; {} resamples x 105 sizes x 2 in {took:.1?}",
            cfg.resamples
        ),
    )
}

fn pearson() -> Outcome {
    let pts: Vec<Point2> = synth_ensemble(&EnsembleSpec { curves_per_qubit: 0, ..Default::default() }, 5)
        .unwrap()
        .into_iter()
        .map(|r| r.position)
        .collect();
    let field: Vec<f64> = pts.iter().map(|p| p.x / 0.038 + 0.1 * p.y / 0.038).collect();
    let c = pearson_binned(&pts, &field, &PearsonConfig { seed: 1, ..Default::default() }).unwrap();
    let first = &c.bins[0];
    let long_range = first.value.is_some_and(|v| v > 0.0) && first.band.is_some_and(|b| b.0 > 0.0);

    let clean = (0..100u64)
        .filter(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
            let n = Normal::new(0.0, 1.0).unwrap();
            let v: Vec<f64> = pts.iter().map(|_| n.sample(&mut rng)).collect();
            let c = pearson_binned(&pts, &v, &PearsonConfig { seed: *trial, resamples: 400, ..Default::default() }).unwrap();
            c.bins.iter().all(|b| b.band.is_none_or(|(lo, hi)| lo <= 0.0 && 0.0 <= hi))
        })
        .count();

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let v: Vec<f64> = pts.iter().map(|_| rng.random::<f64>()).collect();
    let cfg = PearsonConfig { resamples: 100, ..Default::default() };
    let base = pearson_binned(&pts, &v, &cfg).unwrap();
    let mut worst: f64 = 0.0;
    for (a, b) in [(3.7, -2.0), (1e-3, 5.0), (250.0, 1e4)] {
        let w: Vec<f64> = v.iter().map(|x| a * x + b).collect();
        let t = pearson_binned(&pts, &w, &cfg).unwrap();
        for (x, y) in base.bins.iter().zip(&t.bins) {
            if let (Some(x), Some(y)) = (x.value, y.value) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    ensure(
        long_range && clean >= WHITE_MIN_CLEAN && worst < AFFINE_ABS,
        format!(
            "shortest bin r = {:.3} band {:?}; white noise clean in {clean}/100; affine drift {worst:.1e}",
            first.value.unwrap_or(f64::NAN),
            first.band
        ),
    )
}

fn thermal() -> Outcome {
    let qpu = Payload::preset("qpu_mode").unwrap();
    let ht = Payload::preset("high_throughput").unwrap();
    let mut worst: f64 = 0.0;
    for l in qpu.lines.iter().chain(&ht.lines) {
        let b = line_budget(l).unwrap();
        let out = b.delivered + b.dissipated.iter().sum::<f64>();
        worst = worst.max((out - b.input).abs() / b.input);
    }
    let q = evaluate_payload(&qpu).unwrap();
    let q_mxc = q.stage(StageName::MXC);
    let h = evaluate_payload(&ht).unwrap();
    let h_mxc = h.stage(StageName::MXC);
    let (q_active, h_active) = (q_mxc.active + q_mxc.dissipative, h_mxc.active + h_mxc.dissipative);
    let hr = headroom_from_load(3e-6, 25e-6);
    ensure(
        worst <= CONSERVATION_REL
            && rel(q_mxc.passive, QPU_PASSIVE.0) <= QPU_PASSIVE.1
            && rel(q_active, QPU_ACTIVE.0) <= QPU_ACTIVE.1
            && rel(h_active, HT_ACTIVE.0) <= HT_ACTIVE.1
            && (hr.fraction - 0.12).abs() < 1e-12
            && !hr.flagged,
        format!(
            "conservation {worst:.1e}; QPU MXC passive {:.1} nW, active+diss {:.1} nW; HT MXC {:.3} µW; headroom {}",
            q_mxc.passive * 1e9,
            q_active * 1e9,
            h_active * 1e6,
            hr.fraction
        ),
    )
}

fn contraction() -> Outcome {
    let d = differential_contraction(
        38.1e-3,
        bundled_contraction("aluminium").unwrap(),
        bundled_contraction("sapphire").unwrap(),
    )
    .unwrap();
    ensure(rel(d, CONTRACTION.0) <= CONTRACTION.1, format!("{:.1} µm over 38.1 mm", d * 1e6))
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let key = p.strip_prefix(root).unwrap().display().to_string();
                out.insert(key, std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, jobs: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_qpack-lab"))
            .args(["--seed", "2024", "--jobs", jobs, "pipeline", "--out"])
            .arg(&out)
            .env_remove("SOURCE_DATE_EPOCH")
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        tree(&out)
    };
    let a = run("a", "1");
    let b = run("b", "1");
    let c = run("c", "8");
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k) || a.get(*k) != c.get(*k)).collect();
    ensure(
        a.len() > 10 && a.len() == b.len() && a.len() == c.len() && differing.is_empty(),
        format!("{} files, differing {differing:?}", a.len()),
    )
}

fn main() {
    let checks: [Check; 11] = [
        ("bessel oracle", bessel_oracle),
        ("pillar suppression", pillar_suppression),
        ("participation oracles", epr_oracles),
        ("Q and T1 arithmetic", q_t1_arithmetic),
        ("readout round trip", readout_round_trip),
        ("effective temperature", effective_temperature),
        ("bootstrap crossings", bootstrap_crossings),
        ("spatial correlation", pearson),
        ("thermal budget", thermal),
        ("thermal contraction", contraction),
        ("pipeline determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, check)) in checks.into_iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                println!("FAIL {:>2} {name}: {detail}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria {failed:?}");
        std::process::exit(1);
    }
}
