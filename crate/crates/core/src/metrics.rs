//! Communicability metrics and ranking comparison.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::GraphStats;

/// Scores with their descending order; ties go to the lower index.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedVector {
    scores: Vec<f64>,
    order: Vec<usize>,
}

impl RankedVector {
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Node indices from most to least important.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

pub fn rank(values: &[f64]) -> Result<RankedVector> {
    if let Some(k) = values.iter().position(|x| x.is_nan()) {
        return Err(Error::InvalidVector(format!("entry {k} is NaN")));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    Ok(RankedVector { scores: values.to_vec(), order })
}

/// Intersection similarity of the top `K = ceil(top_fraction * n)` nodes:
/// `(1/K) sum_{i<=K} |X_i sym.diff. Y_i| / (2i)` with `X_i`, `Y_i` the top-`i`
/// node sets. 0 for identical rankings, 1 for disjoint ones.
pub fn isim(x: &RankedVector, y: &RankedVector, top_fraction: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if !(top_fraction > 0.0 && top_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("top fraction must lie in (0, 1], got {top_fraction}")));
    }
    let n = x.len();
    if n == 0 {
        return Ok(0.0);
    }
    let k = ((top_fraction * n as f64).ceil() as usize).clamp(1, n);
    // Symmetric difference size tracked incrementally: a node enters the
    // difference when it first appears in one prefix and leaves it when the
    // other prefix catches up.
    let mut in_x: HashSet<usize> = HashSet::with_capacity(k);
    let mut in_y: HashSet<usize> = HashSet::with_capacity(k);
    let mut diff = 0usize;
    let mut total = 0.0;
    for i in 0..k {
        let (a, b) = (x.order[i], y.order[i]);
        if a == b {
            in_x.insert(a);
            in_y.insert(b);
        } else {
            in_x.insert(a);
            if in_y.contains(&a) {
                diff -= 1;
            } else {
                diff += 1;
            }
            in_y.insert(b);
            if in_x.contains(&b) {
                diff -= 1;
            } else {
                diff += 1;
            }
        }
        total += diff as f64 / (2.0 * (i + 1) as f64);
    }
    Ok(total / k as f64)
}

pub fn normalized_tc(tc: f64, n: usize) -> f64 {
    tc / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaRule {
    Fixed(f64),
    InverseLambdaMax,
    InverseDmax,
}

impl fmt::Display for BetaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaRule::Fixed(b) => write!(f, "{b}"),
            BetaRule::InverseLambdaMax => f.write_str("lmax"),
            BetaRule::InverseDmax => f.write_str("dmax"),
        }
    }
}

impl FromStr for BetaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lmax" | "lambda" => Ok(BetaRule::InverseLambdaMax),
            "dmax" => Ok(BetaRule::InverseDmax),
            other => other
                .parse::<f64>()
                .map(BetaRule::Fixed)
                .map_err(|_| Error::InvalidParameter(format!("unknown beta rule `{other}`"))),
        }
    }
}

pub fn resolve_beta(rule: BetaRule, stats: &GraphStats) -> Result<f64> {
    let inverse = |x: f64, what: &str| {
        if x > 0.0 && x.is_finite() {
            Ok(1.0 / x)
        } else {
            Err(Error::InvalidParameter(format!("{what} = {x} has no usable inverse")))
        }
    };
    match rule {
        BetaRule::Fixed(b) if b > 0.0 && b.is_finite() => Ok(b),
        BetaRule::Fixed(b) => Err(Error::InvalidParameter(format!("beta must be positive, got {b}"))),
        BetaRule::InverseLambdaMax => match stats.lambda_max {
            Some(l) => inverse(l, "lambda_max"),
            None => Err(Error::InvalidParameter("lambda_max has not been estimated".into())),
        },
        BetaRule::InverseDmax => inverse(stats.dmax, "dmax"),
    }
}

/// Least-squares slope of `ln y` against `ln x`. Points with a nonpositive
/// coordinate are skipped; `None` if fewer than two remain.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(sxy / sxx)
}
