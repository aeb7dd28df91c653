//! Dense deterministic reference for small matrices: `exp(beta A) v`, the
//! exact Lie and Strang splitting products, the leading local-error
//! commutator terms, and the split/statistical error decomposition.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimator::{PathParams, Splitting, VectorEstimate};
use crate::graph::SplitMatrix;

pub const DEFAULT_ORACLE_CAP: usize = 2000;
pub const ORACLE_CAP_ENV: &str = "EXPMC_ORACLE_CAP";

/// Largest `n` the dense routines accept; `EXPMC_ORACLE_CAP` overrides the
/// default of 2000.
pub fn oracle_cap() -> usize {
    std::env::var(ORACLE_CAP_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_ORACLE_CAP)
}

fn check_cap(n: usize) -> Result<()> {
    let cap = oracle_cap();
    if n > cap {
        return Err(Error::OracleCapExceeded { n, cap });
    }
    Ok(())
}

/// Square dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix(DMatrix::identity(n, n))
    }

    pub fn from_row_major(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        if let Some(k) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: k / n, col: k % n, value: data[k] });
        }
        Ok(DenseMatrix(DMatrix::from_row_slice(n, n, data)))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        DenseMatrix(DMatrix::from_diagonal(&DVector::from_row_slice(d)))
    }

    /// `A = D - L` of a split matrix, scaled by `scale`.
    pub fn from_split(m: &SplitMatrix, scale: f64) -> Self {
        let n = m.n();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = scale * (m.d()[i] - m.rate()[i]);
            for (j, w) in m.neighbors(i) {
                a[(i, j)] = scale * w;
            }
        }
        DenseMatrix(a)
    }

    /// `L` of a split matrix, scaled by `scale`.
    pub fn laplacian(m: &SplitMatrix, scale: f64) -> Self {
        let n = m.n();
        let mut l = DMatrix::zeros(n, n);
        for i in 0..n {
            l[(i, i)] = scale * m.rate()[i];
            for (j, w) in m.neighbors(i) {
                l[(i, j)] = -scale * w;
            }
        }
        DenseMatrix(l)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (&self.0 * DVector::from_column_slice(x)).as_slice().to_vec()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        (&self.0 - &other.0).amax()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

// Padé coefficients b_0..b_m of the [m/m] approximant to exp, and the 1-norm
// thresholds below which each degree is accurate to unit roundoff.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(f64, &[f64]); 4] = [
    (1.495585217958292e-2, &PADE3),
    (2.53939833006323e-1, &PADE5),
    (9.504178996162932e-1, &PADE7),
    (2.097847961257068e0, &PADE9),
];
const THETA13: f64 = 5.371920351148152;

/// `exp(A)` by scaling and squaring with a Padé approximant of degree 3 to
/// 13, chosen from the 1-norm of `A`.
pub fn dense_expm(a: &DenseMatrix) -> Result<DenseMatrix> {
    check_cap(a.n())?;
    let a = &a.0;
    let n = a.nrows();
    let ident = DMatrix::<f64>::identity(n, n);
    let norm = norm1(a);
    if !norm.is_finite() {
        return Err(Error::ExpmOverflow(norm));
    }

    for &(theta, b) in &THETA {
        if norm <= theta {
            let a2 = a * a;
            let mut even_pow = ident.clone();
            let mut u = DMatrix::zeros(n, n);
            let mut v = DMatrix::zeros(n, n);
            for k in (0..b.len()).step_by(2) {
                v += b[k] * &even_pow;
                u += b[k + 1] * &even_pow;
                even_pow = &even_pow * &a2;
            }
            let u = a * u;
            return pade_solve(u, v);
        }
    }

    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    if s > 1023 {
        return Err(Error::ExpmOverflow(norm));
    }
    let a = a * 2f64.powi(-s);
    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (b[13] * &a6 + b[11] * &a4 + b[9] * &a2);
    let u = &a * (inner_u + b[7] * &a6 + b[5] * &a4 + b[3] * &a2 + b[1] * &ident);
    let inner_v = &a6 * (b[12] * &a6 + b[10] * &a4 + b[8] * &a2);
    let v = inner_v + b[6] * &a6 + b[4] * &a4 + b[2] * &a2 + b[0] * &ident;
    let mut x = pade_solve(u, v)?.0;
    for _ in 0..s {
        x = &x * &x;
    }
    if x.iter().any(|e| !e.is_finite()) {
        return Err(Error::ExpmOverflow(norm));
    }
    Ok(DenseMatrix(x))
}

fn pade_solve(u: DMatrix<f64>, v: DMatrix<f64>) -> Result<DenseMatrix> {
    let p = &v + &u;
    let q = v - u;
    let x = q.lu().solve(&p).ok_or_else(|| Error::InvalidParameter("singular Padé denominator".into()))?;
    if x.iter().any(|e| !e.is_finite()) {
        return Err(Error::ExpmOverflow(f64::INFINITY));
    }
    Ok(DenseMatrix(x))
}

fn check_vec(m: &SplitMatrix, v: &[f64]) -> Result<()> {
    if v.len() != m.n() {
        return Err(Error::DimensionMismatch { expected: m.n(), found: v.len() });
    }
    Ok(())
}

/// `exp(beta A) v` through the dense exponential.
pub fn exact_action(m: &SplitMatrix, v: &[f64], beta: f64) -> Result<Vec<f64>> {
    check_vec(m, v)?;
    check_cap(m.n())?;
    Ok(dense_expm(&DenseMatrix::from_split(m, beta))?.mul_vec(v))
}

/// The splitting vector `(exp(-dt L) exp(dt D))^N v` (Lie) or
/// `(exp(dt D/2) exp(-dt L) exp(dt D/2))^N v` (Strang), with `exp(-dt L)`
/// formed once.
pub fn splitting_product(m: &SplitMatrix, v: &[f64], p: &PathParams) -> Result<Vec<f64>> {
    check_vec(m, v)?;
    check_cap(m.n())?;
    p.validate()?;
    let dt = p.dt();
    let transition = dense_expm(&DenseMatrix::laplacian(m, -dt))?.0;
    let mut x = DVector::from_column_slice(v);
    match p.splitting {
        Splitting::Lie => {
            let full = DVector::from_iterator(m.n(), m.d().iter().map(|d| (dt * d).exp()));
            for _ in 0..p.n_steps {
                x = &transition * x.component_mul(&full);
            }
        }
        Splitting::Strang => {
            let half = DVector::from_iterator(m.n(), m.d().iter().map(|d| (0.5 * dt * d).exp()));
            for _ in 0..p.n_steps {
                x = (&transition * x.component_mul(&half)).component_mul(&half);
            }
        }
    }
    Ok(x.as_slice().to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Norm {
    #[default]
    LInf,
    L1,
}

impl Norm {
    pub fn of(self, x: &[f64]) -> f64 {
        match self {
            Norm::LInf => x.iter().map(|v| v.abs()).fold(0.0, f64::max),
            Norm::L1 => x.iter().map(|v| v.abs()).sum(),
        }
    }

    pub fn distance(self, x: &[f64], y: &[f64]) -> f64 {
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.of(&diff)
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::LInf => "linf",
            Norm::L1 => "l1",
        })
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linf" | "inf" => Ok(Norm::LInf),
            "l1" | "1" => Ok(Norm::L1),
            other => Err(Error::InvalidParameter(format!("unknown norm `{other}`"))),
        }
    }
}

/// Leading local-error terms of one splitting step applied to `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorBounds {
    /// `|| dt^2/2 [D, L] v ||_inf`
    pub lie_local: f64,
    /// `|| dt^3 (1/12 [D,[D,L]] - 1/24 [L,[L,D]]) v ||_inf`
    pub strang_local: f64,
    /// `2 dmax^3 dt^2`
    pub tc_bound: f64,
    /// `(1, dt^2/2 [D, L] v)`; zero for `v = 1` since `L 1 = 0` and `1^T L = 0`.
    pub lie_tc_projection: f64,
}

/// `[D, L] x = D (L x) - L (D x)`.
pub fn commutator_dl(m: &SplitMatrix, x: &[f64]) -> Vec<f64> {
    let d = m.d();
    let lx = m.apply_laplacian(x);
    let dx: Vec<f64> = x.iter().zip(d).map(|(a, b)| a * b).collect();
    let ldx = m.apply_laplacian(&dx);
    lx.iter().zip(d).zip(&ldx).map(|((l, di), ld)| di * l - ld).collect()
}

/// Evaluated with sparse products only, so the dense cap does not apply.
pub fn commutator_bounds(m: &SplitMatrix, dt: f64, v: &[f64]) -> Result<CommutatorBounds> {
    check_vec(m, v)?;
    let d = m.d();
    let scale = |x: &[f64], s: f64| x.iter().map(|a| a * s).collect::<Vec<_>>();
    let dmul = |x: &[f64]| x.iter().zip(d).map(|(a, b)| a * b).collect::<Vec<_>>();

    let dl_v = commutator_dl(m, v);
    // [D,[D,L]] v = D [D,L] v - [D,L] D v
    let d_dl_v: Vec<f64> = dmul(&dl_v).iter().zip(commutator_dl(m, &dmul(v))).map(|(a, b)| a - b).collect();
    // [L,D] = -[D,L], so [L,[L,D]] v = -(L [D,L] v - [D,L] L v)
    let l_dl_v = m.apply_laplacian(&dl_v);
    let dl_lv = commutator_dl(m, &m.apply_laplacian(v));
    let l_ld_v: Vec<f64> = l_dl_v.iter().zip(&dl_lv).map(|(a, b)| -(a - b)).collect();

    let lie = scale(&dl_v, 0.5 * dt * dt);
    let strang: Vec<f64> = d_dl_v.iter().zip(&l_ld_v).map(|(a, b)| dt.powi(3) * (a / 12.0 - b / 24.0)).collect();
    Ok(CommutatorBounds {
        lie_local: Norm::LInf.of(&lie),
        strang_local: Norm::LInf.of(&strang),
        tc_bound: 2.0 * m.dmax().powi(3) * dt * dt,
        lie_tc_projection: lie.iter().sum(),
    })
}

/// Error split into the deterministic splitting part and the statistical
/// part; `eps_total` is their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorDecomposition {
    pub eps_total: f64,
    pub eps_split: f64,
    pub eps_stat: f64,
    /// Direct distance between the Monte Carlo result and the exact action;
    /// never exceeds `eps_total`.
    pub eps_observed: f64,
    /// `2 dmax^3 dt^2`
    pub tc_bound: f64,
}

impl ErrorDecomposition {
    /// Scalar version (absolute errors), e.g. for total communicability.
    pub fn scalar(truth: f64, split: f64, mc: f64, tc_bound: f64) -> Self {
        let eps_split = (truth - split).abs();
        let eps_stat = (split - mc).abs();
        ErrorDecomposition {
            eps_total: eps_split + eps_stat,
            eps_split,
            eps_stat,
            eps_observed: (truth - mc).abs(),
            tc_bound,
        }
    }
}

pub fn decompose_error(
    m: &SplitMatrix,
    v: &[f64],
    p: &PathParams,
    mc: &VectorEstimate,
    norm: Norm,
) -> Result<ErrorDecomposition> {
    if mc.values.len() != m.n() {
        return Err(Error::DimensionMismatch { expected: m.n(), found: mc.values.len() });
    }
    let truth = exact_action(m, v, p.beta)?;
    let split = splitting_product(m, v, p)?;
    let eps_split = norm.distance(&truth, &split);
    let eps_stat = norm.distance(&split, &mc.values);
    Ok(ErrorDecomposition {
        eps_total: eps_split + eps_stat,
        eps_split,
        eps_stat,
        eps_observed: norm.distance(&truth, &mc.values),
        tc_bound: 2.0 * m.dmax().powi(3) * p.dt() * p.dt(),
    })
}
