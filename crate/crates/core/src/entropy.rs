//! Entropy series: Garsia entropy, goldenshift entropies, Fibonacci exponents.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use thiserror::Error;

use crate::goldfield::{fib_u64, GoldenNumber, LAMBDA_F64};
use crate::graph::{self, log_lambda, GraphError, LevelTable};

pub const SERIES_LIMIT: u32 = 28;
pub const APPENDIX_D_LIMIT: u32 = 16;

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error("series depth {0} outside 1..={SERIES_LIMIT}")]
    Depth(u32),
    #[error("appendix depth {0} outside 2..={APPENDIX_D_LIMIT}")]
    AppendixDepth(u32),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("unknown measure {0}")]
    UnknownMeasure(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Erdos,
    Lebesgue,
}

impl FromStr for MeasureKind {
    type Err = EntropyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "erdos" | "mu" => Ok(Self::Erdos),
            "lebesgue" | "m" => Ok(Self::Lebesgue),
            other => Err(EntropyError::UnknownMeasure(other.into())),
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Erdos => "erdos",
            Self::Lebesgue => "lebesgue",
        })
    }
}

/// A truncated series with a rigorous tail bracket.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesResult {
    /// midpoint of the bracket
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub terms_used: u32,
    /// the truncated sum with no tail correction
    pub partial: f64,
}

impl SeriesResult {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    fn from_bounds(lower: f64, upper: f64, terms_used: u32, partial: f64) -> Self {
        Self {
            estimate: 0.5 * (lower + upper),
            lower,
            upper,
            terms_used,
            partial,
        }
    }
}

/// Λ = log_λ 2.
pub fn big_lambda() -> f64 {
    log_lambda(2.0)
}

/// Neumaier-compensated sum.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

/// log_λ F_k for the paper-indexed Fibonacci numbers.
fn log_fib(k: usize) -> f64 {
    if k <= 90 {
        log_lambda(fib_u64(k) as f64)
    } else {
        (k as f64 + 1.0) - log_lambda(5f64.sqrt())
    }
}

const TAIL_TERMS: u32 = 400;

/// Σ_{n>N} 2·3^{n-1}·g(n)/4^n for g(n) = log_λ(n+1) and g(n) = log_λ F_{n+1} (F_0 = F_1 = 1).
fn k_tail(n: u32) -> (f64, f64) {
    let w = |m: u32| 2.0 * 0.75f64.powi(m as i32) / 3.0;
    let lo = compensated_sum((n + 1..n + TAIL_TERMS).map(|m| w(m) * log_lambda(m as f64 + 1.0)));
    let hi = compensated_sum((n + 1..n + TAIL_TERMS).map(|m| w(m) * log_fib(m as usize + 1)));
    (lo, hi)
}

fn check_depth(n: u32) -> Result<(), EntropyError> {
    if n == 0 || n > SERIES_LIMIT {
        return Err(EntropyError::Depth(n));
    }
    Ok(())
}

/// k_1 … k_N.
pub fn k_series(n: u32) -> Result<Vec<f64>, EntropyError> {
    check_depth(n)?;
    (1..=n).map(|j| Ok(graph::k_n(j)?)).collect()
}

/// ℓ_1 … ℓ_N.
pub fn l_series(n: u32) -> Result<Vec<f64>, EntropyError> {
    check_depth(n)?;
    (1..=n).map(|j| Ok(graph::l_n(j)?)).collect()
}

fn k_weighted_sum(ks: &[f64]) -> f64 {
    compensated_sum(ks.iter().enumerate().map(|(i, k)| k / 4f64.powi(i as i32 + 1)))
}

/// H_μ = Λ − (1/18)Σ k_n/4^n.
pub fn h_mu(n: u32) -> Result<SeriesResult, EntropyError> {
    let ks = k_series(n)?;
    Ok(h_mu_from_k(&ks))
}

pub fn h_mu_from_k(ks: &[f64]) -> SeriesResult {
    let n = ks.len() as u32;
    let lam = big_lambda();
    let s = k_weighted_sum(ks);
    let (tlo, thi) = k_tail(n);
    SeriesResult::from_bounds(lam - (s + thi) / 18.0, lam - (s + tlo) / 18.0, n, lam - s / 18.0)
}

/// E_μ = Λ − H_μ.
pub fn e_mu(n: u32) -> Result<SeriesResult, EntropyError> {
    let h = h_mu(n)?;
    let lam = big_lambda();
    Ok(SeriesResult::from_bounds(lam - h.upper, lam - h.lower, n, lam - h.partial))
}

/// h_m(S) = Σ_n 2^{n-1}(2n+1)λ^{-2n-1}, summed in closed form.
pub fn h_m_s() -> GoldenNumber {
    let x = GoldenNumber::lambda_pow(-1);
    let r = &GoldenNumber::from(2) * &GoldenNumber::lambda_pow(-2);
    let one_minus = &GoldenNumber::one() - &r;
    let sq = &one_minus * &one_minus;
    let a = (&GoldenNumber::from(2) * &r).checked_div(&sq).expect("nonzero");
    let b = r.checked_div(&one_minus).expect("nonzero");
    let half = GoldenNumber::new(1, 0, 2).expect("nonzero");
    &(&half * &x) * &(&a + &b)
}

/// Σ_{n≤N} 2^{n-1}(2n+1)λ^{-2n-1}.
pub fn h_m_s_partial(n: u32) -> f64 {
    compensated_sum((1..=n).map(|j| {
        0.5 * (2.0 * LAMBDA_F64.powi(-2)).powi(j as i32) * (2 * j + 1) as f64 / LAMBDA_F64
    }))
}

/// h_μ(S) = −Σ_B μ_X(B) log_λ μ_X(B), blocks of length ≤ 2N+1 plus a tail bracket.
pub fn h_mu_s(n: u32) -> Result<SeriesResult, EntropyError> {
    check_depth(n)?;
    let mut levels = Vec::with_capacity(n as usize);
    for j in 1..=n {
        let len = 2 * j + 1;
        let g = move |k: u64| {
            let m = k as f64 / 2f64.powi(len as i32);
            -m * log_lambda(m)
        };
        levels.push(graph::euclid_sum(j, &g)?);
    }
    let s = compensated_sum(levels);
    let lam = big_lambda();
    // block-length part of the tail is exact: Σ_{n>N}(2n+1)⅓(¾)^n Λ
    let len_tail = lam
        * compensated_sum((n + 1..n + TAIL_TERMS).map(|j| (2 * j + 1) as f64 * 0.75f64.powi(j as i32) / 3.0));
    let (tlo, thi) = k_tail(n);
    Ok(SeriesResult::from_bounds(
        s + len_tail - thi / 2.0,
        s + len_tail - tlo / 2.0,
        n,
        s,
    ))
}

/// E log_λ f(B_1) / E|B_1| for the Lebesgue block law.
pub fn e_m(n: u32) -> Result<SeriesResult, EntropyError> {
    let ls = l_series(n)?;
    let w = |j: u32| LAMBDA_F64.powi(-(2 * j as i32) - 1);
    let s = compensated_sum(ls.iter().enumerate().map(|(i, l)| l * w(i as u32 + 1)));
    let cnt = |j: u32| 2f64.powi(j as i32 - 1);
    let tlo = compensated_sum((n + 1..n + TAIL_TERMS).map(|j| cnt(j) * log_lambda(j as f64 + 1.0) * w(j)));
    let thi = compensated_sum((n + 1..n + TAIL_TERMS).map(|j| cnt(j) * log_fib(j as usize + 1) * w(j)));
    let mean = h_m_s().to_f64();
    Ok(SeriesResult::from_bounds((s + tlo) / mean, (s + thi) / mean, n, s / mean))
}

/// Expected length of the first block.
pub fn mean_block_length(kind: MeasureKind) -> GoldenNumber {
    match kind {
        MeasureKind::Erdos => {
            // ⅓Σ(2n+1)r^n with r = ¾
            let r = BigRational::new(BigInt::from(3), BigInt::from(4));
            let one = BigRational::from_integer(BigInt::from(1));
            let om = &one - &r;
            let two = BigRational::from_integer(BigInt::from(2));
            let v = (&two * &r / (&om * &om) + &r / &om) / BigRational::from_integer(BigInt::from(3));
            GoldenNumber::new(v.numer().clone(), 0, v.denom().clone()).expect("nonzero")
        }
        MeasureKind::Lebesgue => h_m_s(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AppendixDReport {
    pub n_half: u32,
    /// 2N+1
    pub n: u32,
    pub h_n: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative_residual: f64,
    /// H_n / (⅓(Λ−H_μ)n2^n) at n = 2N+1
    pub ratio: f64,
}

/// Middle entropies H_1 … H_max.
pub fn middle_entropies(max: u32) -> Vec<f64> {
    let mut t = LevelTable::root();
    let mut out = Vec::with_capacity(max as usize);
    for _ in 1..=max {
        t.advance();
        out.push(t.middle_entropy());
    }
    out
}

/// Both sides of the middle-entropy recursion and the asymptotic ratio.
pub fn appendix_d_checks(n_half: u32) -> Result<AppendixDReport, EntropyError> {
    if !(2..=APPENDIX_D_LIMIT).contains(&n_half) {
        return Err(EntropyError::AppendixDepth(n_half));
    }
    let n = 2 * n_half + 1;
    let hs = middle_entropies(n);
    let ks = k_series(n_half)?;
    appendix_d_from(n_half, &hs, &ks, h_mu(26)?.estimate)
}

/// As `appendix_d_checks`, reusing precomputed H_j (index j−1), k_j and H_μ.
pub fn appendix_d_from(n_half: u32, hs: &[f64], ks: &[f64], h_mu_value: f64) -> Result<AppendixDReport, EntropyError> {
    let n = 2 * n_half + 1;
    if hs.len() < n as usize || ks.len() < n_half as usize {
        return Err(EntropyError::AppendixDepth(n_half));
    }
    let h = |j: u32| hs[j as usize - 1];
    let first = compensated_sum((1..n_half).map(|j| 3f64.powi(j as i32) * h(2 * n_half - 2 * j)));
    let second = k_weighted_sum(&ks[..n_half as usize]);
    let rhs = 2.0 / 3.0 * first + 4f64.powi(n_half as i32) * second / 3.0;
    let h_n = h(n);
    let residual = h_n - rhs;
    let ratio = 3.0 * h_n / ((big_lambda() - h_mu_value) * n as f64 * 2f64.powi(n as i32));
    Ok(AppendixDReport {
        n_half,
        n,
        h_n,
        rhs,
        residual,
        relative_residual: residual.abs() / h_n,
        ratio,
    })
}
