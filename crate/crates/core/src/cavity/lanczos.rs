//! Block Lanczos with full reorthogonalization for a symmetric operator,
//! returning the Ritz pairs of largest magnitude. Used on the shift-inverted
//! Laplacian, where those are the eigenvalues nearest the shift.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub(crate) struct RitzPairs {
    /// Operator eigenvalues, largest magnitude first.
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub basis_size: usize,
}

pub(crate) struct LanczosParams {
    pub nev: usize,
    pub block: usize,
    pub tol: f64,
    /// Maximum number of block steps.
    pub max_steps: usize,
    pub seed: u64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projects `w` against the basis twice (classical Gram-Schmidt, repeated),
/// returning the accumulated coefficients. Deterministic: every dot product
/// is a sequential sum; parallelism is over independent entries only.
fn reorthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut total = vec![0.0; basis.len()];
    for _ in 0..2 {
        let coef: Vec<f64> = basis.par_iter().map(|v| dot(v, w)).collect();
        w.par_chunks_mut(4096).enumerate().for_each(|(c, chunk)| {
            let off = c * 4096;
            for (k, wk) in chunk.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (v, h) in basis.iter().zip(&coef) {
                    acc += v[off + k] * h;
                }
                *wk -= acc;
            }
        });
        for (t, c) in total.iter_mut().zip(&coef) {
            *t += c;
        }
    }
    total
}

fn random_unit(n: usize, basis: &[Vec<f64>], rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        reorthogonalize(basis, &mut v);
        let nrm = dot(&v, &v).sqrt();
        if nrm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nrm);
            return Some(v);
        }
    }
    None
}

pub(crate) fn block_lanczos<F>(n: usize, op: F, p: &LanczosParams) -> Result<RitzPairs>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let nev = p.nev.min(n);
    let b = p.block.max(1).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for _ in 0..b {
        match random_unit(n, &basis, &mut rng) {
            Some(v) => basis.push(v),
            None => break,
        }
    }
    // Projected operator, columns appended per applied vector.
    let mut h: Vec<Vec<f64>> = Vec::new();
    let mut applied = 0usize;
    let mut steps = 0usize;
    loop {
        let block_start = applied;
        let block_end = basis.len();
        let images: Vec<Vec<f64>> = basis[block_start..block_end]
            .par_iter()
            .map(|v| {
                let mut w = vec![0.0; n];
                op(v, &mut w);
                w
            })
            .collect();
        for mut w in images {
            let mut col = reorthogonalize(&basis, &mut w);
            let nrm = dot(&w, &w).sqrt();
            let scale = col.iter().map(|c| c.abs()).fold(0.0, f64::max).max(nrm);
            if basis.len() < n {
                if nrm > 1e-10 * scale {
                    w.iter_mut().for_each(|x| *x /= nrm);
                    col.push(nrm);
                    basis.push(w);
                } else if let Some(v) = random_unit(n, &basis, &mut rng) {
                    // invariant subspace found: continue with a fresh direction
                    col.push(0.0);
                    basis.push(v);
                }
            }
            h.push(col);
        }
        applied = block_end;
        steps += 1;

        let m = applied;
        let exhausted = basis.len() == applied;
        if m >= nev && (steps.is_multiple_of(2) || exhausted || steps >= p.max_steps) {
            let mut t = DMatrix::<f64>::zeros(m, m);
            for (j, col) in h.iter().enumerate() {
                for (i, &v) in col.iter().enumerate().take(m) {
                    t[(i, j)] += 0.5 * v;
                    t[(j, i)] += 0.5 * v;
                }
            }
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&x, &y| {
                eig.eigenvalues[y]
                    .abs()
                    .total_cmp(&eig.eigenvalues[x].abs())
                    .then(x.cmp(&y))
            });
            let wanted = &order[..nev];
            // Residual norm ‖B s_last‖ from the trailing coupling block.
            let converged = exhausted
                || wanted.iter().all(|&k| {
                    let theta = eig.eigenvalues[k];
                    let s = eig.eigenvectors.column(k);
                    let mut res2 = 0.0;
                    for row in m..basis.len() {
                        let mut acc = 0.0;
                        for (j, col) in h.iter().enumerate().skip(block_start) {
                            if let Some(&v) = col.get(row) {
                                acc += v * s[j];
                            }
                        }
                        res2 += acc * acc;
                    }
                    res2.sqrt() <= p.tol * theta.abs()
                });
            if converged {
                let values = wanted.iter().map(|&k| eig.eigenvalues[k]).collect();
                let vectors = wanted
                    .iter()
                    .map(|&k| {
                        let s = eig.eigenvectors.column(k);
                        let mut x = vec![0.0; n];
                        x.par_chunks_mut(4096).enumerate().for_each(|(c, chunk)| {
                            let off = c * 4096;
                            for (i, xi) in chunk.iter_mut().enumerate() {
                                let mut acc = 0.0;
                                for (j, v) in basis[..m].iter().enumerate() {
                                    acc += v[off + i] * s[j];
                                }
                                *xi = acc;
                            }
                        });
                        let nrm = dot(&x, &x).sqrt();
                        x.iter_mut().for_each(|v| *v /= nrm);
                        x
                    })
                    .collect();
                return Ok(RitzPairs {
                    values,
                    vectors,
                    basis_size: m,
                });
            }
        }
        if steps >= p.max_steps {
            return Err(Error::NoConvergence(format!(
                "eigensolver did not converge {nev} modes within {} block steps (basis {m})",
                p.max_steps
            )));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_operator_top_eigenvalues() {
        let n = 400;
        let diag: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let op = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                y[i] = diag[i] * x[i];
            }
        };
        let params = LanczosParams {
            nev: 6,
            block: 2,
            tol: 1e-10,
            max_steps: 200,
            seed: 1,
        };
        let r = block_lanczos(n, op, &params).unwrap();
        for (k, v) in r.values.iter().enumerate() {
            assert!((v - diag[k]).abs() < 1e-9, "{k}: {v}");
        }
    }

    #[test]
    fn captures_exact_double_eigenvalue() {
        let n = 300;
        let mut diag: Vec<f64> = (0..n).map(|i| 1.0 / (2.0 + i as f64)).collect();
        diag[0] = 1.0;
        diag[1] = 1.0;
        let op = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                y[i] = diag[i] * x[i];
            }
        };
        let params = LanczosParams {
            nev: 3,
            block: 2,
            tol: 1e-10,
            max_steps: 200,
            seed: 9,
        };
        let r = block_lanczos(n, op, &params).unwrap();
        assert!((r.values[0] - 1.0).abs() < 1e-10);
        assert!((r.values[1] - 1.0).abs() < 1e-10);
        assert!((r.values[2] - diag[2]).abs() < 1e-9);
    }
}
