//! Minimal symmetric sparse matrix support: CSR storage, nested-dissection
//! ordering on grid coordinates, and an up-looking LDLᵀ factorization.

use crate::error::{Error, Result};

/// Compressed sparse row matrix (square).
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(column, value)` lists. Duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                assert!(c < n, "column {c} out of range");
                if last == Some(c) {
                    *data.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    data.push(v);
                    last = Some(c);
                }
            }
            indptr.push(indices.len());
        }
        Self {
            n,
            indptr,
            indices,
            data,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.data[r].iter().copied())
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            self.row(i).all(|(j, v)| {
                let t = self.row(j).find(|&(k, _)| k == i).map_or(0.0, |(_, w)| w);
                (v - t).abs() <= tol * v.abs().max(t.abs()).max(1.0)
            })
        })
    }
}

/// Fill-reducing order for a 5-point stencil on integer grid nodes: recursive
/// coordinate bisection with single-line separators numbered last.
pub fn nested_dissection(coords: &[(i64, i64)]) -> Vec<usize> {
    const LEAF: usize = 64;
    let mut order = Vec::with_capacity(coords.len());
    let mut stack: Vec<(Vec<usize>, bool)> = vec![((0..coords.len()).collect(), false)];
    // Iterative post-order: children first, separator after.
    while let Some((nodes, expanded)) = stack.pop() {
        if expanded || nodes.len() <= LEAF {
            order.extend(nodes);
            continue;
        }
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
        for &k in &nodes {
            let (x, y) = coords[k];
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
        let split_x = xmax - xmin >= ymax - ymin;
        let key = |k: usize| if split_x { coords[k].0 } else { coords[k].1 };
        let mut keys: Vec<i64> = nodes.iter().map(|&k| key(k)).collect();
        let mid_idx = keys.len() / 2;
        let (_, &mut mid, _) = keys.select_nth_unstable(mid_idx);
        let (mut low, mut sep, mut high) = (Vec::new(), Vec::new(), Vec::new());
        for &k in &nodes {
            match key(k).cmp(&mid) {
                std::cmp::Ordering::Less => low.push(k),
                std::cmp::Ordering::Equal => sep.push(k),
                std::cmp::Ordering::Greater => high.push(k),
            }
        }
        if low.is_empty() && high.is_empty() {
            order.extend(sep);
            continue;
        }
        stack.push((sep, true));
        stack.push((high, false));
        stack.push((low, false));
    }
    order
}

/// LDLᵀ factors of a symmetric matrix in a given elimination order.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    n: usize,
    /// `perm[k]` is the original index eliminated at step `k`.
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
}

const NONE: usize = usize::MAX;

impl LdlFactor {
    /// Factors `a - shift·I` after symmetric permutation by `perm`.
    pub fn new(a: &CsrMatrix, shift: f64, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        assert_eq!(perm.len(), n);
        let mut pinv = vec![NONE; n];
        for (k, &p) in perm.iter().enumerate() {
            pinv[p] = k;
        }
        // Upper triangle of the permuted matrix, column-compressed.
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for i in 0..n {
            for (j, v) in a.row(i) {
                let (pi, pj) = (pinv[i], pinv[j]);
                if pi <= pj {
                    let v = if i == j { v - shift } else { v };
                    cols[pj].push((pi, v));
                }
            }
        }
        let mut ap = Vec::with_capacity(n + 1);
        let mut ai = Vec::new();
        let mut ax = Vec::new();
        ap.push(0);
        for mut c in cols {
            c.sort_by_key(|&(r, _)| r);
            if c.last().map(|&(r, _)| r) != Some(ap.len() - 1) {
                // structurally missing diagonal
                c.push((ap.len() - 1, -shift));
            }
            for (r, v) in c {
                ai.push(r);
                ax.push(v);
            }
            ap.push(ai.len());
        }

        // Elimination tree and column counts.
        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut work = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            for &row in &ai[ap[j]..ap[j + 1]] {
                let mut i = row;
                if i >= j {
                    continue;
                }
                while work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        let total = lp[n];
        let mut li = vec![0usize; total];
        let mut lx = vec![0f64; total];
        let mut d = vec![0f64; n];
        let mut dinv = vec![0f64; n];
        let mut next = lp[..n].to_vec();
        let mut y_vals = vec![0f64; n];
        let mut y_mark = vec![false; n];
        let mut y_idx = vec![0usize; n];
        let mut elim = vec![0usize; n];

        for k in 0..n {
            let mut nnz_y = 0;
            for p in ap[k]..ap[k + 1] {
                let b = ai[p];
                if b == k {
                    d[k] = ax[p];
                    continue;
                }
                y_vals[b] = ax[p];
                if !y_mark[b] {
                    y_mark[b] = true;
                    elim[0] = b;
                    let mut ne = 1;
                    let mut nxt = etree[b];
                    while nxt != NONE && nxt < k {
                        if y_mark[nxt] {
                            break;
                        }
                        y_mark[nxt] = true;
                        elim[ne] = nxt;
                        ne += 1;
                        nxt = etree[nxt];
                    }
                    while ne > 0 {
                        ne -= 1;
                        y_idx[nnz_y] = elim[ne];
                        nnz_y += 1;
                    }
                }
            }
            for t in (0..nnz_y).rev() {
                let c = y_idx[t];
                let end = next[c];
                let yc = y_vals[c];
                for q in lp[c]..end {
                    y_vals[li[q]] -= lx[q] * yc;
                }
                li[end] = k;
                let l = yc * dinv[c];
                lx[end] = l;
                d[k] -= yc * l;
                next[c] += 1;
                y_vals[c] = 0.0;
                y_mark[c] = false;
            }
            if d[k] == 0.0 || !d[k].is_finite() {
                return Err(Error::Domain(format!(
                    "zero pivot at elimination step {k}: shift coincides with an eigenvalue"
                )));
            }
            dinv[k] = 1.0 / d[k];
        }
        Ok(Self {
            n,
            perm,
            lp,
            li,
            lx,
            d,
        })
    }

    pub fn nnz(&self) -> usize {
        self.lx.len()
    }

    /// Number of negative pivots (Sylvester inertia): eigenvalues below the shift.
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }

    /// Solves `(A - shift·I) x = b`, overwriting nothing; returns `x`.
    pub fn solve(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let yi = y[i];
            for q in self.lp[i]..self.lp[i + 1] {
                y[self.li[q]] -= self.lx[q] * yi;
            }
        }
        for (yi, di) in y.iter_mut().zip(&self.d) {
            *yi /= di;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for q in self.lp[i]..self.lp[i + 1] {
                acc -= self.lx[q] * y[self.li[q]];
            }
            y[i] = acc;
        }
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
    }
}
