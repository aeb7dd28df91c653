//! Synthetic networks: small-world (ring plus random shortcuts),
//! preferential-attachment scale-free, and Erdős–Rényi.

use std::collections::HashSet;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::SparseSymmetric;

pub use crate::graph::write_matrix_market;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenKind {
    /// Ring lattice joining each node to its `k` nearest neighbors on each
    /// side, plus shortcuts; `ps` is the probability that a node is an
    /// endpoint of a shortcut, so the expected average degree is `2k + ps`.
    SmallWorld {
        k: usize,
        ps: f64,
    },
    /// Barabási–Albert: each new node attaches `m0` edges to distinct
    /// existing nodes chosen proportionally to degree. Average degree tends
    /// to `2 m0`.
    ScaleFree {
        m0: usize,
    },
    ErdosRenyi {
        p: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn small_world(n: usize, k: usize, ps: f64, seed: u64) -> Self {
        GenSpec { kind: GenKind::SmallWorld { k, ps }, n, seed }
    }

    pub fn scale_free(n: usize, m0: usize, seed: u64) -> Self {
        GenSpec { kind: GenKind::ScaleFree { m0 }, n, seed }
    }

    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Self {
        GenSpec { kind: GenKind::ErdosRenyi { p }, n, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n == 0 {
            return bad("graph size must be positive".into());
        }
        match self.kind {
            GenKind::SmallWorld { k, ps } => {
                if k == 0 {
                    return bad("small-world radius k must be at least 1".into());
                }
                if 2 * k >= self.n {
                    return bad(format!("ring radius k = {k} too large for n = {}", self.n));
                }
                if !(0.0..=1.0).contains(&ps) {
                    return bad(format!("shortcut probability must lie in [0, 1], got {ps}"));
                }
            }
            GenKind::ScaleFree { m0 } => {
                if m0 == 0 {
                    return bad("edges per new node must be at least 1".into());
                }
                if self.n <= m0 {
                    return bad(format!("scale-free graph needs n > m0 (n = {}, m0 = {m0})", self.n));
                }
            }
            GenKind::ErdosRenyi { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("edge probability must lie in [0, 1], got {p}"));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GenKind::SmallWorld { k, ps } => write!(f, "smallworld(n={}, k={k}, ps={ps})", self.n),
            GenKind::ScaleFree { m0 } => write!(f, "scalefree(n={}, m0={m0})", self.n),
            GenKind::ErdosRenyi { p } => write!(f, "erdosrenyi(n={}, p={p})", self.n),
        }
    }
}

pub fn generate(spec: &GenSpec) -> Result<SparseSymmetric> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let edges = match spec.kind {
        GenKind::SmallWorld { k, ps } => small_world(spec.n, k, ps, &mut rng),
        GenKind::ScaleFree { m0 } => scale_free(spec.n, m0, &mut rng),
        GenKind::ErdosRenyi { p } => erdos_renyi(spec.n, p, &mut rng),
    };
    SparseSymmetric::from_edges(spec.n, edges)
}

fn key(i: usize, j: usize) -> (usize, usize) {
    (i.min(j), i.max(j))
}

fn small_world(n: usize, k: usize, ps: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut present: HashSet<(usize, usize)> = HashSet::with_capacity(n * k + n);
    let mut edges = Vec::with_capacity(n * k + n);
    let mut degree = vec![2 * k; n];
    for i in 0..n {
        for s in 1..=k {
            let e = key(i, (i + s) % n);
            present.insert(e);
            edges.push(e);
        }
    }
    // Each shortcut has two endpoints, so a node starts one with
    // probability ps / 2.
    let start = ps / 2.0;
    for i in 0..n {
        if !rng.random_bool(start) {
            continue;
        }
        // A node adjacent to everyone gets no shortcut.
        if degree[i] + 1 >= n {
            continue;
        }
        loop {
            let j = rng.random_range(0..n);
            let e = key(i, j);
            if j != i && present.insert(e) {
                edges.push(e);
                degree[i] += 1;
                degree[j] += 1;
                break;
            }
        }
    }
    edges
}

fn scale_free(n: usize, m0: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    // Seed clique on m0 + 1 nodes, then each new node picks m0 distinct
    // targets from the endpoint list (a node appears once per incident edge).
    let mut edges = Vec::with_capacity(n * m0);
    let mut endpoints = Vec::with_capacity(2 * n * m0);
    for i in 0..=m0 {
        for j in 0..i {
            edges.push((j, i));
            endpoints.push(i);
            endpoints.push(j);
        }
    }
    let mut targets = Vec::with_capacity(m0);
    for new in (m0 + 1)..n {
        targets.clear();
        while targets.len() < m0 {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, new));
            endpoints.push(t);
            endpoints.push(new);
        }
    }
    edges
}

fn erdos_renyi(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    edges
}
