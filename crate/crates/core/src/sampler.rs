//! Continuous-time Markov chain paths over the graph of a [`SplitMatrix`].
//!
//! The chain is generated by `Q = -L`: in state `i` it waits an `Exp(L_ii)`
//! time and then jumps to `j != i` with probability `|L_ij| / L_ii`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::SplitMatrix;

/// Deterministic random stream addressed by `(seed, stream id)`.
///
/// Backed by ChaCha8, whose 64-bit stream parameter gives `2^64` independent
/// sequences per seed, so sample `l` can own stream `l` regardless of which
/// worker runs it.
#[derive(Clone, Debug)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::from_seed(expand_seed(seed));
        rng.set_stream(stream);
        RngStream { rng }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `(0, 1]`.
    #[inline]
    pub fn uniform_open0(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` (`n > 0`), via Lemire's widening multiply.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        ((self.rng.next_u64() as u128 * n as u128) >> 64) as usize
    }
}

// SplitMix64 expansion of the 64-bit seed into a 256-bit ChaCha key.
fn expand_seed(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        chunk.copy_from_slice(&(z ^ (z >> 31)).to_le_bytes());
    }
    key
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathSegmentResult {
    pub end_state: usize,
    pub jumps: u64,
}

/// Waiting time `Exp(rate)` by inverse transform; `rate == 0` never fires.
pub fn exp_time(rng: &mut RngStream, rate: f64) -> Result<f64> {
    if !(rate >= 0.0) {
        return Err(Error::NegativeRate(rate));
    }
    Ok(exp_time_unchecked(rng, rate))
}

#[inline]
fn exp_time_unchecked(rng: &mut RngStream, rate: f64) -> f64 {
    // The variate is consumed even for rate 0 so that draw sequences do not
    // depend on which nodes are isolated.
    let u = rng.uniform_open0();
    if rate == 0.0 {
        return f64::INFINITY;
    }
    -u.ln() / rate
}

/// Next state after leaving `i`.
pub fn jump(rng: &mut RngStream, m: &SplitMatrix, i: usize) -> Result<usize> {
    if i >= m.n() {
        return Err(Error::IndexOutOfRange { index: i, n: m.n() });
    }
    if m.rate()[i] == 0.0 {
        return Err(Error::IsolatedNode(i));
    }
    Ok(jump_unchecked(rng, m, i))
}

#[inline]
fn jump_unchecked(rng: &mut RngStream, m: &SplitMatrix, i: usize) -> usize {
    let targets = m.row_targets(i);
    if m.is_uniform_row(i) {
        return targets[rng.below(targets.len())];
    }
    let cumulative = m.row_cumulative(i);
    let total = *cumulative.last().unwrap();
    let u = rng.uniform() * total;
    // First k with cumulative[k] > u; zero-weight entries never exist.
    let k = cumulative.partition_point(|&c| c <= u).min(targets.len() - 1);
    targets[k]
}

/// Runs the chain from `start` for duration `dt`, with a fresh exponential
/// clock at the start of the segment.
pub fn advance(rng: &mut RngStream, m: &SplitMatrix, start: usize, dt: f64) -> Result<PathSegmentResult> {
    if start >= m.n() {
        return Err(Error::IndexOutOfRange { index: start, n: m.n() });
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("segment duration must be positive, got {dt}")));
    }
    let mut state = start;
    let mut jumps = 0;
    let mut tau = exp_time_unchecked(rng, m.rate()[state]);
    while tau < dt {
        state = jump_unchecked(rng, m, state);
        jumps += 1;
        tau += exp_time_unchecked(rng, m.rate()[state]);
    }
    Ok(PathSegmentResult { end_state: state, jumps })
}

/// [`advance`] specialized to a fixed `dt`.
///
/// Most segments contain no jump at all when `rate * dt` is small. The first
/// waiting time exceeds `dt` exactly when its uniform variate is at most
/// `exp(-rate * dt)`, so those segments are decided by one comparison against
/// a per-node threshold instead of a logarithm. Near the threshold the exact
/// `-ln(u) / rate` comparison is used, which keeps the draw sequence and the
/// outcome identical to [`advance`].
#[derive(Debug, Clone)]
pub struct SegmentSampler<'a> {
    m: &'a SplitMatrix,
    dt: f64,
    stay: Vec<f64>,
}

const THRESHOLD_MARGIN: f64 = 1.0 - 1e-9;

impl<'a> SegmentSampler<'a> {
    pub fn new(m: &'a SplitMatrix, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("segment duration must be positive, got {dt}")));
        }
        let stay = m.rate().iter().map(|&r| (-r * dt).exp() * THRESHOLD_MARGIN).collect();
        Ok(SegmentSampler { m, dt, stay })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    #[inline]
    pub fn advance(&self, rng: &mut RngStream, start: usize) -> PathSegmentResult {
        let u = rng.uniform_open0();
        if u <= self.stay[start] {
            return PathSegmentResult { end_state: start, jumps: 0 };
        }
        let rate = self.m.rate();
        let mut state = start;
        let mut jumps = 0;
        let mut tau = if rate[state] == 0.0 { f64::INFINITY } else { -u.ln() / rate[state] };
        while tau < self.dt {
            state = jump_unchecked(rng, self.m, state);
            jumps += 1;
            tau += exp_time_unchecked(rng, rate[state]);
        }
        PathSegmentResult { end_state: state, jumps }
    }
}
