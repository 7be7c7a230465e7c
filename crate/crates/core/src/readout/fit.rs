//! Joint double-Gaussian fit of the two projected histograms.

use nalgebra::{SMatrix, SVector};
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::readout::dataset::MIN_SHOTS;
use crate::readout::projection::Projected;

const NP: usize = 7;
const MAX_ITERATIONS: usize = 2000;
type Mat = SMatrix<f64, NP, NP>;
type Vector = SVector<f64, NP>;

/// Fitted model. Amplitudes are in shots: `a_gg`/`a_ge` are the ground and
/// excited peaks of the ground-prepared histogram, `a_eg`/`a_ee` those of the
/// excited-prepared one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoubleGaussianFit {
    pub sigma: f64,
    pub center_g: f64,
    pub center_e: f64,
    pub a_gg: f64,
    pub a_ge: f64,
    pub a_eg: f64,
    pub a_ee: f64,
    /// Always 0: the midpoint between the prepared centroids.
    pub discriminator: f64,
    /// Standard errors in parameter order σ, c_g, c_e, a_gg, a_ge, a_eg, a_ee.
    pub std_errors: [f64; NP],
    /// Pearson χ² per degree of freedom over bins with expected count ≥ 5.
    pub reduced_chi2: f64,
    pub bins: usize,
    pub iterations: usize,
}

impl DoubleGaussianFit {
    pub fn params(&self) -> [f64; NP] {
        [self.sigma, self.center_g, self.center_e, self.a_gg, self.a_ge, self.a_eg, self.a_ee]
    }

    /// Excited fraction of the ground-prepared histogram.
    pub fn ground_excited_fraction(&self) -> f64 {
        self.a_ge / (self.a_gg + self.a_ge)
    }
}

/// Shared bin edges: Freedman–Diaconis width over the pooled samples, at
/// least 64 bins.
pub fn histogram_edges(samples: &[&[f64]]) -> Result<Vec<f64>> {
    let mut all: Vec<f64> = samples.iter().flat_map(|s| s.iter().copied()).collect();
    if all.is_empty() {
        return Err(Error::Domain("no samples to bin".into()));
    }
    all.sort_by(f64::total_cmp);
    let n = all.len();
    let q = |p: f64| all[((n - 1) as f64 * p).round() as usize];
    let (lo, hi) = (all[0], all[n - 1]);
    let iqr = q(0.75) - q(0.25);
    let range = hi - lo;
    if !(range > 0.0) {
        return Err(Error::Domain("all samples identical".into()));
    }
    let width = 2.0 * iqr / (n as f64).cbrt();
    let bins = if width > 0.0 { (range / width).ceil() as usize } else { 64 };
    let bins = bins.clamp(64, 4096);
    let step = range / bins as f64;
    // pad half a bin so the extremes fall inside
    let (lo, step) = (lo - 0.5 * step, (range + step) / bins as f64);
    Ok((0..=bins).map(|k| lo + k as f64 * step).collect())
}

pub fn histogram(samples: &[f64], edges: &[f64]) -> Vec<f64> {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    let step = (hi - lo) / bins as f64;
    let mut counts = vec![0.0; bins];
    for &x in samples {
        let k = (((x - lo) / step).floor() as isize).clamp(0, bins as isize - 1) as usize;
        counts[k] += 1.0;
    }
    counts
}

fn phi(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF.
fn big_phi(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Bin probabilities of N(c, σ²) and their derivatives in c and σ.
fn bin_terms(edges: &[f64], c: f64, s: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let z: Vec<f64> = edges.iter().map(|b| (b - c) / s).collect();
    let cdf: Vec<f64> = z.iter().map(|&z| big_phi(z)).collect();
    let pdf: Vec<f64> = z.iter().map(|&z| phi(z)).collect();
    let bins = edges.len() - 1;
    let mut p = Vec::with_capacity(bins);
    let mut dc = Vec::with_capacity(bins);
    let mut ds = Vec::with_capacity(bins);
    for k in 0..bins {
        p.push(cdf[k + 1] - cdf[k]);
        dc.push((pdf[k] - pdf[k + 1]) / s);
        ds.push((z[k] * pdf[k] - z[k + 1] * pdf[k + 1]) / s);
    }
    (p, dc, ds)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

struct Eval {
    cost: f64,
    jtj: Mat,
    jtr: Vector,
    chi2: f64,
    dof_bins: usize,
}

/// Poisson deviance of both histograms, its gradient (as Jᵀ·(n/μ − 1)) and
/// the Fisher metric Jᵀ·diag(1/max(μ, 1))·J.
fn evaluate(th: &Vector, edges: &[f64], hg: &[f64], he: &[f64]) -> Eval {
    let (pg, dcg, dsg) = bin_terms(edges, th[1], th[0]);
    let (pe, dce, dse) = bin_terms(edges, th[2], th[0]);
    let mut ev = Eval {
        cost: 0.0,
        jtj: Mat::zeros(),
        jtr: Vector::zeros(),
        chi2: 0.0,
        dof_bins: 0,
    };
    for k in 0..hg.len() {
        for prep in 0..2 {
            let (n, a_g, a_e, col_g, col_e) = if prep == 0 {
                (hg[k], th[3], th[4], 3, 4)
            } else {
                (he[k], th[5], th[6], 5, 6)
            };
            let mu = (a_g * pg[k] + a_e * pe[k]).max(1e-300);
            let mut j = Vector::zeros();
            j[0] = a_g * dsg[k] + a_e * dse[k];
            j[1] = a_g * dcg[k];
            j[2] = a_e * dce[k];
            j[col_g] = pg[k];
            j[col_e] = pe[k];
            ev.cost += 2.0 * (mu - n + if n > 0.0 { n * (n / mu).ln() } else { 0.0 });
            ev.jtj += j * j.transpose() / mu.max(1.0);
            ev.jtr += (n / mu - 1.0) * j;
            if mu >= 5.0 {
                ev.chi2 += (n - mu).powi(2) / mu;
                ev.dof_bins += 1;
            }
        }
    }
    ev
}

/// Fits both projected histograms with a shared σ and two shared centres.
pub fn fit_double_gaussian(p: &Projected) -> Result<DoubleGaussianFit> {
    for (name, v) in [("ground", &p.ground), ("excited", &p.excited)] {
        if v.len() < MIN_SHOTS {
            return Err(Error::Domain(format!(
                "{} {name}-prepared shots, need at least {MIN_SHOTS}",
                v.len()
            )));
        }
    }
    let edges = histogram_edges(&[&p.ground, &p.excited])?;
    let hg = histogram(&p.ground, &edges);
    let he = histogram(&p.excited, &edges);
    let (ng, ne) = (p.ground.len() as f64, p.excited.len() as f64);

    // medians and MAD give a start that does not depend on the optimizer
    let cg = median(&mut p.ground.clone());
    let ce = median(&mut p.excited.clone());
    let mad = |v: &[f64], c: f64| median(&mut v.iter().map(|x| (x - c).abs()).collect::<Vec<_>>());
    let sigma0 = 1.4826 * 0.5 * (mad(&p.ground, cg) + mad(&p.excited, ce));
    let width = edges[edges.len() - 1] - edges[0];
    let sigma0 = if sigma0 > 0.0 { sigma0 } else { width / 20.0 };
    let frac_above = |v: &[f64], t: f64| v.iter().filter(|&&x| x > t).count() as f64 / v.len() as f64;
    let mid = 0.5 * (cg + ce);
    let fg = frac_above(&p.ground, mid).min(0.5);
    let fe = (1.0 - frac_above(&p.excited, mid)).min(0.5);
    let mut th = Vector::from_column_slice(&[sigma0, cg, ce, ng * (1.0 - fg), ng * fg, ne * fe, ne * (1.0 - fe)]);

    // Levenberg–Marquardt on the deviance; the stationary point is the
    // iteratively reweighted least-squares solution with weights 1/μ.
    let scale = Vector::from_column_slice(&[sigma0, sigma0, sigma0, ng, ng, ne, ne]);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    let mut ev = evaluate(&th, &edges, &hg, &he);
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut accepted = None;
        for _ in 0..40 {
            let mut a = ev.jtj;
            for d in 0..NP {
                a[(d, d)] *= 1.0 + lambda;
                a[(d, d)] += 1e-300;
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&ev.jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let mut cand = th + step;
            cand[0] = cand[0].max(0.1 * th[0]);
            for k in 3..NP {
                cand[k] = cand[k].max(0.0);
            }
            let next = evaluate(&cand, &edges, &hg, &he);
            if next.cost <= ev.cost {
                accepted = Some((cand, next));
                lambda = (lambda * 0.3).max(1e-12);
                break;
            }
            lambda *= 10.0;
        }
        // no downhill step left at any damping: rounding-level optimum
        let Some((cand, next)) = accepted else {
            converged = true;
            break;
        };
        let change = (cand - th).component_div(&scale).amax();
        th = cand;
        ev = next;
        if change < 1e-10 {
            converged = true;
            break;
        }
    }
    if !converged || !th.iter().all(|v| v.is_finite()) || !(th[0] > 0.0) {
        return Err(Error::NoConvergence(format!("double-Gaussian fit after {iterations} iterations")));
    }
    // canonical orientation: ground centre negative
    if th[1] > th[2] {
        th.swap_rows(1, 2);
        th.swap_rows(3, 4);
        th.swap_rows(5, 6);
    }
    let ev = evaluate(&th, &edges, &hg, &he);
    let cov = ev.jtj.try_inverse().ok_or_else(|| Error::NoConvergence("singular fit covariance".into()))?;
    let mut se = [0.0; NP];
    for (k, s) in se.iter_mut().enumerate() {
        *s = cov[(k, k)].max(0.0).sqrt();
    }
    let dof = ev.dof_bins.saturating_sub(NP).max(1);
    Ok(DoubleGaussianFit {
        sigma: th[0],
        center_g: th[1],
        center_e: th[2],
        a_gg: th[3],
        a_ge: th[4],
        a_eg: th[5],
        a_ee: th[6],
        discriminator: 0.0,
        std_errors: se,
        reduced_chi2: ev.chi2 / dof as f64,
        bins: edges.len() - 1,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_bins_have_floor() {
        let v: Vec<f64> = (0..50).map(|k| k as f64).collect();
        let e = histogram_edges(&[&v]).unwrap();
        assert_eq!(e.len(), 65);
        let h = histogram(&v, &e);
        assert_eq!(h.iter().sum::<f64>(), 50.0);
    }

    #[test]
    fn bin_probabilities_sum_to_mass() {
        let edges: Vec<f64> = (0..=200).map(|k| -10.0 + 0.1 * k as f64).collect();
        let (p, dc, _) = bin_terms(&edges, 0.3, 1.2);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(dc.iter().sum::<f64>().abs() < 1e-10);
    }
}
