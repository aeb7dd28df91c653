//! Sparse symmetric matrices and their Laplacian splitting `A = D - L`.
//!
//! [`SparseSymmetric`] is the ingestion type: one triangle is stored
//! logically, both are materialized in CSR form so that the neighbors of a
//! row can be enumerated in `O(deg(i))`. [`SplitMatrix`] is the walkable form
//! used by the sampler and every estimator.

mod mtx;

pub use mtx::{load_matrix_market, read_matrix_market, write_matrix_market, write_matrix_market_to};

use crate::error::{Error, Result};

/// Sparse symmetric `n x n` matrix with nonnegative off-diagonal weights.
///
/// Explicit zeros are dropped on construction, duplicate `(i, j)` pairs
/// (in either orientation) are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    n: usize,
    diag: Vec<f64>,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
}

impl SparseSymmetric {
    /// Builds the matrix from `(row, col, weight)` triplets where each
    /// triplet stands for both `(row, col)` and `(col, row)`.
    pub fn from_triplets<I>(n: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be positive".into()));
        }
        let mut upper: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, w) in triplets {
            for index in [i, j] {
                if index >= n {
                    return Err(Error::IndexOutOfRange { index, n });
                }
            }
            if !w.is_finite() {
                return Err(Error::NonFinite { row: i, col: j, value: w });
            }
            if i != j && w < 0.0 {
                return Err(Error::NegativeOffDiagonal { row: i, col: j, weight: w });
            }
            upper.push((i.min(j), i.max(j), w));
        }
        upper.sort_unstable_by_key(|&(i, j, _)| (i, j));
        if let Some(dup) = upper.windows(2).find(|p| (p[0].0, p[0].1) == (p[1].0, p[1].1)) {
            return Err(Error::DuplicateEntry { row: dup[0].0, col: dup[0].1 });
        }
        upper.retain(|&(_, _, w)| w != 0.0);

        let mut diag = vec![0.0; n];
        let mut degree = vec![0usize; n];
        for &(i, j, w) in &upper {
            if i == j {
                diag[i] = w;
            } else {
                degree[i] += 1;
                degree[j] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let nnz = *offsets.last().unwrap();
        let mut cols = vec![0; nnz];
        let mut weights = vec![0.0; nnz];
        let mut fill = offsets[..n].to_vec();
        // Lower-triangle mirrors are emitted first so every row ends up sorted
        // by column: (i, j) pairs arrive sorted by i, then j.
        let mut by_col = upper.iter().filter(|e| e.0 != e.1).collect::<Vec<_>>();
        by_col.sort_unstable_by_key(|&&(i, j, _)| (j, i));
        for &&(i, j, w) in &by_col {
            cols[fill[j]] = i;
            weights[fill[j]] = w;
            fill[j] += 1;
        }
        for &(i, j, w) in upper.iter().filter(|e| e.0 != e.1) {
            cols[fill[i]] = j;
            weights[fill[i]] = w;
            fill[i] += 1;
        }
        Ok(SparseSymmetric { n, diag, offsets, cols, weights })
    }

    /// Unweighted adjacency matrix of an undirected simple graph.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_triplets(n, edges.into_iter().map(|(i, j)| (i, j, 1.0)))
    }

    /// All-zero `n x n` matrix.
    pub fn empty(n: usize) -> Result<Self> {
        Self::from_triplets(n, std::iter::empty())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored off-diagonal pairs `i < j`.
    pub fn edge_count(&self) -> usize {
        self.cols.len() / 2
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Off-diagonal neighbors of row `i` with their weights, sorted by column.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.weights[range].iter().copied())
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let range = self.offsets[i]..self.offsets[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(k) => self.weights[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// Upper-triangle entries `(row, col, weight)` with `row <= col`, sorted.
    pub fn entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.edge_count() + self.n);
        for i in 0..self.n {
            if self.diag[i] != 0.0 {
                out.push((i, i, self.diag[i]));
            }
            out.extend(self.neighbors(i).filter(|&(j, _)| j > i).map(|(j, w)| (i, j, w)));
        }
        out
    }

    /// True when every stored weight is exactly one.
    pub fn is_pattern(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0) && self.diag.iter().all(|&w| w == 0.0 || w == 1.0)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            out[i * n + i] = self.diag[i];
            for (j, w) in self.neighbors(i) {
                out[i * n + j] = w;
            }
        }
        out
    }
}

/// `A = D - L` with `L` a weighted graph Laplacian, in the form walked by the
/// CTMC sampler.
///
/// `d` holds the diagonal of `D` and `rate` the diagonal of `L`, which is the
/// exit rate of the chain generated by `-L`. For adjacency matrices they
/// coincide with the vertex degree.
#[derive(Debug, Clone)]
pub struct SplitMatrix {
    d: Vec<f64>,
    rate: Vec<f64>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    // Running sum of `weights` within each row; used by the weighted jump kernel.
    cumulative: Vec<f64>,
    uniform_row: Vec<bool>,
    dbar: f64,
    dmax: f64,
}

/// Splits `a` into `(D, L)`: `L_ij = -a_ij` off the diagonal, `L_ii` the row
/// sum of off-diagonal weights, `D_ii = a_ii + L_ii`.
pub fn split(a: &SparseSymmetric) -> Result<SplitMatrix> {
    let n = a.n;
    let mut rate = vec![0.0; n];
    let mut cumulative = Vec::with_capacity(a.weights.len());
    let mut uniform_row = vec![true; n];
    for i in 0..n {
        if !a.diag[i].is_finite() {
            return Err(Error::NonFinite { row: i, col: i, value: a.diag[i] });
        }
        let mut sum = 0.0;
        let first = a.offsets[i]..a.offsets[i + 1];
        let w0 = first.clone().next().map(|k| a.weights[k]);
        for k in first {
            let w = a.weights[k];
            if !w.is_finite() {
                return Err(Error::NonFinite { row: i, col: a.cols[k], value: w });
            }
            if w < 0.0 {
                return Err(Error::NegativeOffDiagonal { row: i, col: a.cols[k], weight: w });
            }
            sum += w;
            cumulative.push(sum);
            if Some(w) != w0 {
                uniform_row[i] = false;
            }
        }
        rate[i] = sum;
    }
    let d: Vec<f64> = a.diag.iter().zip(&rate).map(|(aii, r)| aii + r).collect();
    let dbar = rate.iter().sum::<f64>() / n as f64;
    let dmax = rate.iter().copied().fold(0.0, f64::max);
    Ok(SplitMatrix {
        d,
        rate,
        offsets: a.offsets.clone(),
        targets: a.cols.clone(),
        weights: a.weights.clone(),
        cumulative,
        uniform_row,
        dbar,
        dmax,
    })
}

impl SplitMatrix {
    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// Diagonal of `D`.
    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Exit rates `L_ii`.
    pub fn rate(&self) -> &[f64] {
        &self.rate
    }

    /// Average (weighted) degree, the mean exit rate.
    pub fn dbar(&self) -> f64 {
        self.dbar
    }

    /// Maximum (weighted) degree, the largest exit rate.
    pub fn dmax(&self) -> f64 {
        self.dmax
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Neighbors of `i` with off-diagonal magnitudes `|L_ij|`.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.targets[range.clone()].iter().copied().zip(self.weights[range].iter().copied())
    }

    pub(crate) fn row_targets(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub(crate) fn row_cumulative(&self, i: usize) -> &[f64] {
        &self.cumulative[self.offsets[i]..self.offsets[i + 1]]
    }

    pub(crate) fn is_uniform_row(&self, i: usize) -> bool {
        self.uniform_row[i]
    }

    /// True when every node has the same exit rate and the same `D_ii`, so
    /// that `D` commutes with `L`.
    pub fn is_regular(&self) -> bool {
        self.rate.iter().all(|&r| r == self.rate[0]) && self.d.iter().all(|&d| d == self.d[0])
    }

    /// `y = A x` without forming `A`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n())
            .map(|i| {
                let own = (self.d[i] - self.rate[i]) * x[i];
                own + self.neighbors(i).map(|(j, w)| w * x[j]).sum::<f64>()
            })
            .collect()
    }

    /// `y = L x`.
    pub fn apply_laplacian(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n()).map(|i| self.rate[i] * x[i] - self.neighbors(i).map(|(j, w)| w * x[j]).sum::<f64>()).collect()
    }

    /// Reassembles `A = D - L`.
    pub fn reassemble(&self) -> SparseSymmetric {
        let n = self.n();
        let triplets = (0..n).flat_map(|i| {
            let diag = std::iter::once((i, i, self.d[i] - self.rate[i]));
            let off = self.neighbors(i).filter(move |&(j, _)| j > i).map(move |(j, w)| (i, j, w));
            diag.chain(off)
        });
        SparseSymmetric::from_triplets(n, triplets.collect::<Vec<_>>())
            .expect("a valid split reassembles into a valid matrix")
    }
}

/// Degree statistics and, optionally, a power-iteration estimate of the
/// largest eigenvalue of `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphStats {
    pub n: usize,
    pub edges: usize,
    pub dbar: f64,
    pub dmax: f64,
    pub lambda_max: Option<f64>,
    /// Relative change of the eigenvalue estimate in the last iteration.
    pub lambda_rel_change: Option<f64>,
}

pub const DEFAULT_POWER_ITERS: usize = 100;

/// Degree statistics of `m`; `power_iters == 0` skips the eigenvalue.
///
/// The iteration runs on `A + cI` with `c >= 0` chosen so the shifted matrix
/// is entrywise nonnegative. Its spectral radius is then its largest
/// eigenvalue (Perron-Frobenius), and the norm ratio `||B x|| / ||x||`
/// converges to it even on bipartite graphs where plain Rayleigh quotients
/// oscillate.
pub fn stats(m: &SplitMatrix, power_iters: usize) -> GraphStats {
    let n = m.n();
    let mut out =
        GraphStats { n, edges: m.edge_count(), dbar: m.dbar, dmax: m.dmax, lambda_max: None, lambda_rel_change: None };
    if power_iters == 0 {
        return out;
    }
    let shift = m.d.iter().zip(&m.rate).map(|(d, r)| -(d - r)).fold(0.0, f64::max);
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut rho = 0.0;
    let mut change = 0.0;
    for _ in 0..power_iters {
        let mut y = m.apply(&x);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += shift * xi;
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        change = if norm > 0.0 { ((norm - rho) / norm).abs() } else { 0.0 };
        rho = norm;
        if norm == 0.0 {
            break;
        }
        x = y.into_iter().map(|v| v / norm).collect();
    }
    out.lambda_max = Some(rho - shift);
    out.lambda_rel_change = Some(change);
    out
}
