//! Monte Carlo estimators for the splitting approximation of `exp(beta A) v`.
//!
//! Each sample walks the CTMC generated by `-L` for `N` segments of length
//! `dt = beta / N` and carries a multiplicative weight built from the
//! factors `exp(dt d_j)` (Lie) or `exp(dt d_j / 2)` on both sides of every
//! segment (Strang).
//!
//! * [`entry_estimate`] starts the walk at the requested index and multiplies
//!   the final weight by `v` at the end state (backward representation).
//! * [`vector_estimate`] draws the start from `v / V` and tallies `V w` into
//!   the end state (forward representation, valid because `L` is symmetric).
//! * [`tc_estimate`] is the scalar reduction of the forward estimator for
//!   `v = 1`.
//!
//! Sample `l` always draws from stream `l` of the seed, and samples are
//! processed in fixed chunks reduced in index order. Results are therefore
//! bitwise identical for any number of rayon workers; estimators run on the
//! current rayon pool.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::SplitMatrix;
use crate::sampler::{RngStream, SegmentSampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Splitting {
    /// `(exp(-dt L) exp(dt D))^N`
    Lie,
    /// `(exp(dt D/2) exp(-dt L) exp(dt D/2))^N`
    Strang,
}

impl fmt::Display for Splitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Splitting::Lie => "lie",
            Splitting::Strang => "strang",
        })
    }
}

impl FromStr for Splitting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lie" => Ok(Splitting::Lie),
            "strang" => Ok(Splitting::Strang),
            other => Err(Error::InvalidParameter(format!("unknown splitting `{other}`"))),
        }
    }
}

/// Discretization and sampling parameters. `dt` is derived as `beta / n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams {
    pub beta: f64,
    pub n_steps: usize,
    pub samples: u64,
    pub splitting: Splitting,
    pub seed: u64,
}

impl PathParams {
    pub fn new(beta: f64, n_steps: usize, samples: u64, splitting: Splitting, seed: u64) -> Result<Self> {
        let p = PathParams { beta, n_steps, samples, splitting, seed };
        p.validate()?;
        Ok(p)
    }

    /// Picks `N = round(beta / dt)`; the effective step is `beta / N`, so a
    /// requested `0.0156` at `beta = 1` runs with `N = 64`.
    pub fn from_dt(beta: f64, dt: f64, samples: u64, splitting: Splitting, seed: u64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        let n_steps = (beta / dt).round().max(1.0) as usize;
        Self::new(beta, n_steps, samples, splitting, seed)
    }

    pub fn dt(&self) -> f64 {
        self.beta / self.n_steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {}", self.beta)));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParameter("number of steps must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("number of samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// Scalar Monte Carlo result with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    /// Sample standard deviation over `sqrt(M)`.
    pub std_error: f64,
    pub samples_used: u64,
    pub total_jumps: u64,
}

impl Estimate {
    pub fn jumps_per_path(&self) -> f64 {
        self.total_jumps as f64 / self.samples_used as f64
    }
}

/// Full-vector Monte Carlo result.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorEstimate {
    pub values: Vec<f64>,
    /// Per-entry standard errors from per-entry second-moment tallies.
    pub entry_std_errors: Vec<f64>,
    /// Mean of the scalar path functional `V w`; equals `sum(values)` up to
    /// rounding, and estimates `(1, x)`.
    pub functional_mean: f64,
    /// Standard error of `functional_mean`.
    pub std_error_global: f64,
    pub samples_used: u64,
    pub total_jumps: u64,
    /// `V = sum(v)`.
    pub v_sum: f64,
}

impl VectorEstimate {
    pub fn jumps_per_path(&self) -> f64 {
        self.total_jumps as f64 / self.samples_used as f64
    }
}

/// Precomputed per-node weights and the segment sampler for one `dt`.
struct Walker<'a> {
    segment: SegmentSampler<'a>,
    half: Vec<f64>,
    full: Vec<f64>,
    n_steps: usize,
    splitting: Splitting,
}

impl<'a> Walker<'a> {
    fn new(m: &'a SplitMatrix, p: &PathParams) -> Result<Self> {
        p.validate()?;
        let dt = p.dt();
        Ok(Walker {
            segment: SegmentSampler::new(m, dt)?,
            half: m.d().iter().map(|d| (0.5 * dt * d).exp()).collect(),
            full: m.d().iter().map(|d| (dt * d).exp()).collect(),
            n_steps: p.n_steps,
            splitting: p.splitting,
        })
    }

    #[inline]
    fn strang(&self, rng: &mut RngStream, start: usize) -> (usize, f64, u64) {
        let mut state = start;
        let mut weight = 1.0;
        let mut jumps = 0;
        for _ in 0..self.n_steps {
            weight *= self.half[state];
            let seg = self.segment.advance(rng, state);
            state = seg.end_state;
            jumps += seg.jumps;
            weight *= self.half[state];
        }
        (state, weight, jumps)
    }

    /// Entry `i` of `(P F)^N v` expands to `P_{i,i1} f_{i1} ... P_{i(N-1),iN} f_{iN} v_{iN}`:
    /// weight after each segment.
    #[inline]
    fn lie_backward(&self, rng: &mut RngStream, start: usize) -> (usize, f64, u64) {
        let mut state = start;
        let mut weight = 1.0;
        let mut jumps = 0;
        for _ in 0..self.n_steps {
            let seg = self.segment.advance(rng, state);
            state = seg.end_state;
            jumps += seg.jumps;
            weight *= self.full[state];
        }
        (state, weight, jumps)
    }

    /// Read from the `v` end, the same product weights each state before
    /// leaving it and never the state the path finishes in.
    #[inline]
    fn lie_forward(&self, rng: &mut RngStream, start: usize) -> (usize, f64, u64) {
        let mut state = start;
        let mut weight = 1.0;
        let mut jumps = 0;
        for _ in 0..self.n_steps {
            weight *= self.full[state];
            let seg = self.segment.advance(rng, state);
            state = seg.end_state;
            jumps += seg.jumps;
        }
        (state, weight, jumps)
    }

    fn backward(&self, rng: &mut RngStream, start: usize) -> (usize, f64, u64) {
        match self.splitting {
            Splitting::Lie => self.lie_backward(rng, start),
            Splitting::Strang => self.strang(rng, start),
        }
    }

    fn forward(&self, rng: &mut RngStream, start: usize) -> (usize, f64, u64) {
        match self.splitting {
            Splitting::Lie => self.lie_forward(rng, start),
            Splitting::Strang => self.strang(rng, start),
        }
    }
}

/// Categorical start distribution `v / V`.
enum StartDistribution {
    Uniform(usize),
    Cumulative(Vec<f64>),
}

impl StartDistribution {
    fn new(v: &[f64]) -> Self {
        if v.iter().all(|&x| x == v[0]) {
            return StartDistribution::Uniform(v.len());
        }
        let mut acc = 0.0;
        StartDistribution::Cumulative(
            v.iter()
                .map(|&x| {
                    acc += x;
                    acc
                })
                .collect(),
        )
    }

    #[inline]
    fn draw(&self, rng: &mut RngStream) -> usize {
        match self {
            StartDistribution::Uniform(n) => rng.below(*n),
            StartDistribution::Cumulative(cum) => {
                let u = rng.uniform() * cum[cum.len() - 1];
                cum.partition_point(|&c| c <= u).min(cum.len() - 1)
            }
        }
    }
}

/// Running mean and centered second moment (Welford), mergeable with Chan's
/// pairwise update.
#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    count: u64,
    mean: f64,
    m2: f64,
    jumps: u64,
}

impl Tally {
    #[inline]
    fn push(&mut self, x: f64, jumps: u64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        self.jumps += jumps;
    }

    fn merge(self, other: Tally) -> Tally {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let frac = other.count as f64 / count as f64;
        Tally {
            count,
            mean: self.mean + delta * frac,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * frac,
            jumps: self.jumps + other.jumps,
        }
    }

    fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2.max(0.0) / (self.count - 1) as f64 / self.count as f64).sqrt()
    }

    fn into_estimate(self) -> Estimate {
        Estimate { value: self.mean, std_error: self.std_error(), samples_used: self.count, total_jumps: self.jumps }
    }
}

const CHUNK: u64 = 1024;
// Chunks evaluated per parallel round by the vector estimator; bounds the
// buffered (end state, weight) pairs to CHUNK * ROUND.
const ROUND: u64 = 256;

fn chunk_ranges(samples: Range<u64>) -> Vec<Range<u64>> {
    let mut out = Vec::new();
    let mut lo = samples.start;
    while lo < samples.end {
        let hi = (lo + CHUNK).min(samples.end);
        out.push(lo..hi);
        lo = hi;
    }
    out
}

fn scalar_tally<F>(p: &PathParams, path: F) -> Tally
where
    F: Fn(&mut RngStream) -> (f64, u64) + Sync,
{
    chunk_ranges(0..p.samples)
        .into_par_iter()
        .map(|range| {
            let mut tally = Tally::default();
            for l in range {
                let mut rng = RngStream::new(p.seed, l);
                let (x, jumps) = path(&mut rng);
                tally.push(x, jumps);
            }
            tally
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::default(), Tally::merge)
}

fn check_vector(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: v.len() });
    }
    if let Some(k) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidVector(format!("entry {k} is not finite ({})", v[k])));
    }
    Ok(())
}

/// Single entry `i` of the splitting solution.
pub fn entry_estimate(m: &SplitMatrix, v: &[f64], i: usize, p: &PathParams) -> Result<Estimate> {
    check_vector(v, m.n())?;
    if i >= m.n() {
        return Err(Error::IndexOutOfRange { index: i, n: m.n() });
    }
    let walker = Walker::new(m, p)?;
    let tally = scalar_tally(p, |rng| {
        let (end, weight, jumps) = walker.backward(rng, i);
        (weight * v[end], jumps)
    });
    Ok(tally.into_estimate())
}

/// Full splitting solution vector for `v >= 0`.
pub fn vector_estimate(m: &SplitMatrix, v: &[f64], p: &PathParams) -> Result<VectorEstimate> {
    check_vector(v, m.n())?;
    if let Some(k) = v.iter().position(|&x| x < 0.0) {
        return Err(Error::InvalidVector(format!(
            "entry {k} is negative ({}); the start distribution needs v >= 0",
            v[k]
        )));
    }
    let v_sum: f64 = v.iter().sum();
    if !(v_sum > 0.0) {
        return Err(Error::InvalidVector("sum of entries must be positive".into()));
    }
    let walker = Walker::new(m, p)?;
    let starts = StartDistribution::new(v);
    let n = m.n();
    let mut sums = vec![0.0; n];
    let mut sums_sq = vec![0.0; n];
    let mut tally = Tally::default();

    let chunks = chunk_ranges(0..p.samples);
    for round in chunks.chunks(ROUND as usize) {
        let results: Vec<(Vec<(usize, f64)>, Tally)> = round
            .par_iter()
            .map(|range| {
                let mut hits = Vec::with_capacity((range.end - range.start) as usize);
                let mut local = Tally::default();
                for l in range.clone() {
                    let mut rng = RngStream::new(p.seed, l);
                    let start = starts.draw(&mut rng);
                    let (end, weight, jumps) = walker.forward(&mut rng, start);
                    hits.push((end, weight));
                    local.push(v_sum * weight, jumps);
                }
                (hits, local)
            })
            .collect();
        for (hits, local) in results {
            for (end, weight) in hits {
                sums[end] += weight;
                sums_sq[end] += weight * weight;
            }
            tally = tally.merge(local);
        }
    }

    let samples = p.samples as f64;
    let values: Vec<f64> = sums.iter().map(|s| v_sum * s / samples).collect();
    let entry_std_errors = values
        .iter()
        .zip(&sums_sq)
        .map(|(mean, sq)| {
            if p.samples < 2 {
                return 0.0;
            }
            let second = v_sum * v_sum * sq / samples;
            let var = (second - mean * mean).max(0.0) * samples / (samples - 1.0);
            (var / samples).sqrt()
        })
        .collect();
    Ok(VectorEstimate {
        values,
        entry_std_errors,
        functional_mean: tally.mean,
        std_error_global: tally.std_error(),
        samples_used: tally.count,
        total_jumps: tally.jumps,
        v_sum,
    })
}

/// Total communicability `(1, x)` for `v = 1`: the mean of `n w` over walks
/// with a uniform start, without per-entry tallies.
pub fn tc_estimate(m: &SplitMatrix, p: &PathParams) -> Result<Estimate> {
    let walker = Walker::new(m, p)?;
    let n = m.n();
    let scale = n as f64;
    let tally = scalar_tally(p, |rng| {
        let start = rng.below(n);
        let (_, weight, jumps) = walker.forward(rng, start);
        (scale * weight, jumps)
    });
    Ok(tally.into_estimate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{split, SparseSymmetric};

    fn single_edge() -> SplitMatrix {
        split(&SparseSymmetric::from_edges(2, [(0, 1)]).unwrap()).unwrap()
    }

    // Rounding slack for estimators whose path functional is deterministic.
    fn within(x: f64, target: f64, se: f64) -> bool {
        (x - target).abs() <= 4.0 * se + 1e-12 * target.abs().max(1.0)
    }

    fn params(beta: f64, n: usize, m: u64, s: Splitting) -> PathParams {
        PathParams::new(beta, n, m, s, 2024).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(PathParams::new(0.0, 4, 10, Splitting::Lie, 0).is_err());
        assert!(PathParams::new(1.0, 0, 10, Splitting::Lie, 0).is_err());
        assert!(PathParams::new(1.0, 4, 0, Splitting::Lie, 0).is_err());
        let p = PathParams::from_dt(1.0, 0.0156, 10, Splitting::Strang, 0).unwrap();
        assert_eq!(p.n_steps, 64);
        assert!((p.dt() * p.n_steps as f64 - p.beta).abs() <= 4.0 * f64::EPSILON);
        assert_eq!(PathParams::from_dt(1.0, 1e-3, 1, Splitting::Lie, 0).unwrap().n_steps, 1000);
        assert_eq!("Strang".parse::<Splitting>().unwrap(), Splitting::Strang);
        assert!("euler".parse::<Splitting>().is_err());
    }

    #[test]
    fn empty_graph_entry_is_exact() {
        let m = split(&SparseSymmetric::empty(4).unwrap()).unwrap();
        let v = [0.5, -2.0, 3.0, 7.25];
        for s in [Splitting::Lie, Splitting::Strang] {
            let e = entry_estimate(&m, &v, 1, &params(2.0, 8, 1000, s)).unwrap();
            assert_eq!(e.value, -2.0);
            assert_eq!(e.std_error, 0.0);
            assert_eq!(e.total_jumps, 0);
        }
    }

    #[test]
    fn empty_graph_vector_and_tc() {
        let n = 10;
        let m = split(&SparseSymmetric::empty(n).unwrap()).unwrap();
        let p = params(1.5, 4, 100 * n as u64, Splitting::Strang);
        let ve = vector_estimate(&m, &vec![1.0; n], &p).unwrap();
        let total: f64 = ve.values.iter().sum();
        assert!((total - n as f64).abs() < 1e-12);
        assert_eq!(ve.functional_mean, n as f64);
        assert_eq!(ve.std_error_global, 0.0);
        let tc = tc_estimate(&m, &p).unwrap();
        assert_eq!((tc.value, tc.std_error), (n as f64, 0.0));
    }

    #[test]
    fn input_validation() {
        let m = single_edge();
        let p = params(1.0, 4, 10, Splitting::Lie);
        assert!(matches!(entry_estimate(&m, &[1.0, 0.0], 2, &p), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(entry_estimate(&m, &[1.0, f64::NAN], 0, &p), Err(Error::InvalidVector(_))));
        assert!(matches!(entry_estimate(&m, &[1.0], 0, &p), Err(Error::DimensionMismatch { .. })));
        assert!(entry_estimate(&m, &[1.0, -1.0], 0, &p).is_ok());
        assert!(matches!(vector_estimate(&m, &[1.0, -1.0], &p), Err(Error::InvalidVector(_))));
        assert!(matches!(vector_estimate(&m, &[0.0, 0.0], &p), Err(Error::InvalidVector(_))));
    }

    #[test]
    fn single_edge_closed_forms() {
        // D = I commutes with L, so both splittings are exact:
        // exp(A) = [[cosh 1, sinh 1], [sinh 1, cosh 1]].
        let m = single_edge();
        let cosh1 = 1f64.cosh();
        let e = std::f64::consts::E;
        for s in [Splitting::Lie, Splitting::Strang] {
            let p = params(1.0, 32, 1_000_000, s);
            let entry = entry_estimate(&m, &[1.0, 0.0], 0, &p).unwrap();
            assert!(within(entry.value, cosh1, entry.std_error), "{s}: {entry:?}");

            let ve = vector_estimate(&m, &[1.0, 1.0], &p).unwrap();
            for (x, se) in ve.values.iter().zip(&ve.entry_std_errors) {
                assert!(within(*x, e, *se), "{s}: {x} vs e, se {se}");
            }

            let tc = tc_estimate(&m, &p).unwrap();
            assert!(within(tc.value, 2.0 * e, tc.std_error), "{s}: {tc:?}");
        }
    }

    #[test]
    fn vector_bookkeeping_identity() {
        let a = SparseSymmetric::from_triplets(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (3, 3, 1.0)]).unwrap();
        let m = split(&a).unwrap();
        let v = [0.0, 1.0, 2.0, 0.5];
        for s in [Splitting::Lie, Splitting::Strang] {
            let ve = vector_estimate(&m, &v, &params(1.0, 10, 5000, s)).unwrap();
            let total: f64 = ve.values.iter().sum();
            assert!((total - ve.functional_mean).abs() < 1e-12 * total);
            assert_eq!(ve.v_sum, 3.5);
            assert!(ve.values.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn results_independent_of_worker_count() {
        let n = 30;
        let a = SparseSymmetric::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)).chain([(0, 15), (3, 20)])).unwrap();
        let m = split(&a).unwrap();
        let p = params(1.0, 8, 5000, Splitting::Strang);
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                (
                    tc_estimate(&m, &p).unwrap(),
                    vector_estimate(&m, &vec![1.0; n], &p).unwrap(),
                    entry_estimate(&m, &vec![1.0; n], 3, &p).unwrap(),
                )
            })
        };
        assert_eq!(run(1), run(3));
    }
}
