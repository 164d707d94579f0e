//! Streaming normalization, block tokenization, the goldenshift and seeded
//! Monte-Carlo estimators.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::entropy::MeasureKind;
use crate::goldfield::{GoldenNumber, LAMBDA_F64};
use crate::graph::{log_lambda, pairwise_sum};
use crate::measures::{mu_interval, Interval, MeasureError};
use crate::words::{parse_blocks, value, Block, TwoSidedWord, WordError};

/// Independent chains per simulation; fixed so results do not depend on the
/// worker count.
pub const CHAINS: u64 = 16;
pub const DIMENSION_DIGIT_LIMIT: usize = 48;
const STALL_WARN: usize = 10_000;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("need at least {need} complete blocks, found {found}")]
    InsufficientBlocks { need: usize, found: usize },
    #[error("point outside the Fibonacci-baker domain")]
    OutsideDomain,
    #[error("word is not in the block-start set")]
    NotInX0,
    #[error("{0}")]
    BadParameter(String),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

fn chain_rng(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

/// Initial law of the canonical-digit Markov chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkovStart {
    /// (λ^{-1}, λ^{-2}): digits of a Lebesgue-uniform point
    Lebesgue,
    /// (λ/√5, λ^{-1}/√5)
    Stationary,
}

/// Canonical digits of an m-distributed point.
pub struct CanonicalSampler<R> {
    rng: R,
    prev: Option<u8>,
    start: MarkovStart,
}

impl<R: Rng> CanonicalSampler<R> {
    pub fn new(rng: R, start: MarkovStart) -> Self {
        Self {
            rng,
            prev: None,
            start,
        }
    }
}

impl<R: Rng> Iterator for CanonicalSampler<R> {
    type Item = u8;
    fn next(&mut self) -> Option<u8> {
        let p_one = match (self.prev, self.start) {
            (Some(1), _) => 0.0,
            (Some(_), _) | (None, MarkovStart::Lebesgue) => LAMBDA_F64.powi(-2),
            (None, MarkovStart::Stationary) => 1.0 / (LAMBDA_F64 * 5f64.sqrt()),
        };
        let d = (self.rng.gen::<f64>() < p_one) as u8;
        self.prev = Some(d);
        Some(d)
    }
}

pub fn markov_canonical_sampler(seed: u64, n: usize) -> Vec<u8> {
    CanonicalSampler::new(ChaCha8Rng::seed_from_u64(seed), MarkovStart::Lebesgue)
        .take(n)
        .collect()
}

/// Fair bits from a generator, 64 per draw.
pub struct BitSource<R> {
    rng: R,
    word: u64,
    left: u32,
}

impl<R: RngCore> BitSource<R> {
    pub fn new(rng: R) -> Self {
        Self {
            rng,
            word: 0,
            left: 0,
        }
    }
}

impl<R: RngCore> Iterator for BitSource<R> {
    type Item = u8;
    fn next(&mut self) -> Option<u8> {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        let b = (self.word & 1) as u8;
        self.word >>= 1;
        self.left -= 1;
        Some(b)
    }
}

/// Online normalization of Σ ε_k λ^{-k-1}.
///
/// The first emitted digit is the carry cell, so the output is the canonical
/// expansion of the point whose digits are fed in shifted by one place.
#[derive(Clone, Debug)]
pub struct StreamNormalizer {
    pending: Vec<u8>,
    emitted: usize,
    since_flush: usize,
}

impl Default for StreamNormalizer {
    fn default() -> Self {
        Self::new()
    }
}

impl StreamNormalizer {
    pub fn new() -> Self {
        Self {
            pending: vec![0],
            emitted: 0,
            since_flush: 0,
        }
    }

    pub fn emitted(&self) -> usize {
        self.emitted
    }

    pub fn pending(&self) -> &[u8] {
        &self.pending
    }

    /// Feeds one digit and appends any finalized digits to `out`.
    pub fn push(&mut self, bit: u8, out: &mut Vec<u8>) {
        let buf = &mut self.pending;
        buf.push(bit);
        if bit == 1 {
            let mut j = buf.len() - 1;
            while j >= 2 && buf[j] == 1 && buf[j - 1] == 1 && buf[j - 2] == 0 {
                buf[j - 2] = 1;
                buf[j - 1] = 0;
                buf[j] = 0;
                j -= 2;
            }
        }
        let n = buf.len();
        if n > 4 && buf[n - 4..].iter().all(|&d| d == 0) {
            let cut = n - 4;
            out.extend_from_slice(&buf[..cut]);
            buf.drain(..cut);
            self.emitted += cut;
            self.since_flush = 0;
        } else {
            self.since_flush += 1;
            if self.since_flush == STALL_WARN {
                log::warn!("normalizer buffer at {} digits without a flush", buf.len());
            }
        }
    }

    /// Everything still pending, as if the input ended here with zeros.
    pub fn finish(self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.pending);
    }
}

/// Adapts a digit source into the canonical μ-digit stream.
pub struct Normalized<I> {
    src: I,
    norm: StreamNormalizer,
    ready: std::collections::VecDeque<u8>,
    scratch: Vec<u8>,
}

impl<I: Iterator<Item = u8>> Normalized<I> {
    pub fn new(src: I) -> Self {
        Self {
            src,
            norm: StreamNormalizer::new(),
            ready: Default::default(),
            scratch: Vec::new(),
        }
    }
}

impl<I: Iterator<Item = u8>> Iterator for Normalized<I> {
    type Item = u8;
    fn next(&mut self) -> Option<u8> {
        while self.ready.is_empty() {
            let b = self.src.next()?;
            self.norm.push(b, &mut self.scratch);
            self.ready.extend(self.scratch.drain(..));
        }
        self.ready.pop_front()
    }
}

/// Splits an admissible digit stream into blocks, dropping the prefix before
/// the first 1.
#[derive(Clone, Debug, Default)]
pub struct BlockTokenizer {
    current: Vec<u8>,
    zeros: usize,
    started: bool,
}

impl BlockTokenizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, d: u8) -> Option<Block> {
        if !self.started {
            if d == 1 {
                self.started = true;
                self.current.push(1);
            }
            return None;
        }
        if d == 0 {
            self.current.push(0);
            self.zeros += 1;
            return None;
        }
        let closes = self.zeros >= 2 && self.zeros.is_multiple_of(2);
        self.zeros = 0;
        if closes {
            let blk = Block::from_word(&self.current).expect("tokenizer keeps block shape");
            self.current.clear();
            self.current.push(1);
            Some(blk)
        } else {
            self.current.push(1);
            None
        }
    }

    /// The unfinished block.
    pub fn pending(&self) -> &[u8] {
        &self.current
    }
}

/// Iterator over complete blocks of a digit stream.
pub struct Blocks<I> {
    src: I,
    tok: BlockTokenizer,
}

impl<I: Iterator<Item = u8>> Iterator for Blocks<I> {
    type Item = Block;
    fn next(&mut self) -> Option<Block> {
        loop {
            let d = self.src.next()?;
            if let Some(b) = self.tok.push(d) {
                return Some(b);
            }
        }
    }
}

pub fn tokenize_blocks<I: Iterator<Item = u8>>(src: I) -> Blocks<I> {
    Blocks {
        src,
        tok: BlockTokenizer::new(),
    }
}

/// Drops the first `steps` blocks of a word starting with 1.
pub fn goldenshift(w: &[u8], steps: usize) -> Result<Vec<u8>, DynamicsError> {
    let (blocks, _) = parse_blocks(w)?;
    if blocks.len() < steps {
        return Err(DynamicsError::InsufficientBlocks {
            need: steps,
            found: blocks.len(),
        });
    }
    let cut: usize = blocks[..steps].iter().map(|b| b.len()).sum();
    Ok(w[cut..].to_vec())
}

/// Δ_B: points whose expansion starts with B·1.
pub fn delta_interval(b: &Block) -> Result<Interval, DynamicsError> {
    let mut w = b.word();
    w.push(1);
    Ok(Interval::cylinder(&w)?)
}

/// S on Δ_B: x ↦ λ^{|B|}(x − value(B)).
pub fn goldenshift_value(x: &GoldenNumber, b: &Block) -> GoldenNumber {
    &(x - &value(&b.word())) * &GoldenNumber::lambda_pow(b.len() as i64)
}

/// |B_1| for the word read from index 1, which must open a block.
pub fn tower_return_time(w: &TwoSidedWord) -> Result<usize, DynamicsError> {
    if w.digit(1) != 1 {
        return Err(DynamicsError::NotInX0);
    }
    let lowest = *w.support().first().expect("nonempty");
    let mut zeros = 0i64;
    let mut k = 0i64;
    while k >= lowest && w.digit(k) == 0 {
        zeros += 1;
        k -= 1;
    }
    if k < lowest || zeros < 2 || zeros % 2 != 0 {
        return Err(DynamicsError::NotInX0);
    }
    let last = *w.support().last().expect("nonempty");
    let mut tok = BlockTokenizer::new();
    for j in 1..=last + 1 {
        if let Some(b) = tok.push(w.digit(j)) {
            return Ok(b.len());
        }
    }
    Err(DynamicsError::NotInX0)
}

/// A value with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn within(&self, target: f64, tol: f64) -> bool {
        (self.value - target).abs() <= tol
    }
}

const CLASSES: usize = 5;

#[derive(Clone, Debug, Default)]
struct ChainStats {
    blocks: u64,
    b1: u64,
    len_sum: f64,
    len_sq: f64,
    logf_sum: f64,
    logf_sq: f64,
    cross: f64,
    class_hist: BTreeMap<u32, u64>,
    hist: BTreeMap<Block, u64>,
    pairs: [[u64; CLASSES]; CLASSES],
}

fn class_index(b: &Block) -> usize {
    (b.n() as usize).min(CLASSES) - 1
}

fn run_chain(kind: MeasureKind, seed: u64, chain: u64, n_blocks: u64, keep_hist: bool) -> ChainStats {
    let rng = chain_rng(seed, chain);
    let blocks: Box<dyn Iterator<Item = Block>> = match kind {
        MeasureKind::Erdos => Box::new(tokenize_blocks(Normalized::new(BitSource::new(rng)))),
        MeasureKind::Lebesgue => Box::new(tokenize_blocks(CanonicalSampler::new(rng, MarkovStart::Lebesgue))),
    };
    let mut st = ChainStats::default();
    let mut prev: Option<usize> = None;
    for b in blocks.take(n_blocks as usize) {
        let len = b.len() as f64;
        let lf = log_lambda(b.cardinality() as f64);
        st.blocks += 1;
        st.b1 += (b.parts() == [1]) as u64;
        st.len_sum += len;
        st.len_sq += len * len;
        st.logf_sum += lf;
        st.logf_sq += lf * lf;
        st.cross += lf * len;
        *st.class_hist.entry(b.n()).or_default() += 1;
        let c = class_index(&b);
        match prev.take() {
            Some(p) => st.pairs[p][c] += 1,
            None => prev = Some(c),
        }
        if keep_hist {
            *st.hist.entry(b).or_default() += 1;
        }
    }
    st
}

/// Empirical block statistics from one seeded run.
#[derive(Clone, Debug, Serialize)]
pub struct SimReport {
    pub measure: MeasureKind,
    pub seed: u64,
    pub chains: u64,
    pub samples: u64,
    pub total_length: u64,
    pub p_b1: Estimate,
    pub mean_length: Estimate,
    /// blocks per digit
    pub block_start_frequency: Estimate,
    /// Σ log_λ f(B_i) / Σ |B_i|
    pub exponent: Estimate,
    /// n ↦ count of blocks of length 2n+1
    pub class_histogram: BTreeMap<u32, u64>,
    /// block ↦ count, empty unless requested
    pub block_histogram: BTreeMap<String, u64>,
    /// non-overlapping consecutive pairs by class (n = 1, 2, 3, 4, ≥5)
    pub pair_table: [[u64; CLASSES]; CLASSES],
}

pub fn simulate_block_stats(kind: MeasureKind, seed: u64, n_blocks: u64) -> Result<SimReport, DynamicsError> {
    simulate(kind, seed, n_blocks, false)
}

pub fn simulate(kind: MeasureKind, seed: u64, n_blocks: u64, keep_hist: bool) -> Result<SimReport, DynamicsError> {
    if n_blocks == 0 {
        return Err(DynamicsError::BadParameter("n_blocks must be positive".into()));
    }
    let per = |c: u64| n_blocks / CHAINS + (c < n_blocks % CHAINS) as u64;
    let stats: Vec<ChainStats> = (0..CHAINS)
        .into_par_iter()
        .map(|c| run_chain(kind, seed, c, per(c), keep_hist))
        .collect();

    let n = stats.iter().map(|s| s.blocks).sum::<u64>() as f64;
    let sum = |f: fn(&ChainStats) -> f64| pairwise_sum(&stats.iter().map(f).collect::<Vec<_>>());
    let len_sum = sum(|s| s.len_sum);
    let len_sq = sum(|s| s.len_sq);
    let lf_sum = sum(|s| s.logf_sum);
    let lf_sq = sum(|s| s.logf_sq);
    let cross = sum(|s| s.cross);
    let b1 = stats.iter().map(|s| s.b1).sum::<u64>() as f64;

    let p = b1 / n;
    let mean_len = len_sum / n;
    let var_len = (len_sq / n - mean_len * mean_len).max(0.0);
    let se_len = (var_len / n).sqrt();
    let r = lf_sum / len_sum;
    // delta method for a ratio of means: Var(Y − rX)/(n X̄²)
    let mean_lf = lf_sum / n;
    let var_resid = (lf_sq / n - 2.0 * r * cross / n + r * r * len_sq / n) - (mean_lf - r * mean_len).powi(2);
    let se_r = (var_resid.max(0.0) / n).sqrt() / mean_len;

    let mut class_histogram = BTreeMap::new();
    let mut block_histogram: BTreeMap<Block, u64> = BTreeMap::new();
    let mut pair_table = [[0u64; CLASSES]; CLASSES];
    for s in &stats {
        for (k, v) in &s.class_hist {
            *class_histogram.entry(*k).or_default() += v;
        }
        for (k, v) in &s.hist {
            *block_histogram.entry(k.clone()).or_default() += v;
        }
        for (row, src) in pair_table.iter_mut().zip(&s.pairs) {
            for (cell, v) in row.iter_mut().zip(src) {
                *cell += v;
            }
        }
    }
    Ok(SimReport {
        measure: kind,
        seed,
        chains: CHAINS,
        samples: n as u64,
        total_length: len_sum as u64,
        p_b1: Estimate {
            value: p,
            se: (p * (1.0 - p) / n).sqrt(),
        },
        mean_length: Estimate {
            value: mean_len,
            se: se_len,
        },
        block_start_frequency: Estimate {
            value: 1.0 / mean_len,
            se: se_len / (mean_len * mean_len),
        },
        exponent: Estimate { value: r, se: se_r },
        class_histogram,
        block_histogram: block_histogram.into_iter().map(|(b, c)| (b.to_string(), c)).collect(),
        pair_table,
    })
}

/// Pearson chi-square independence test on the pair table.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: u32,
    /// 1% critical value
    pub critical: f64,
    pub reject: bool,
}

pub fn chi_square_independence(table: &[[u64; CLASSES]; CLASSES]) -> ChiSquare {
    let total: u64 = table.iter().flatten().sum();
    let rows: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<u64> = (0..CLASSES).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let mut stat = 0.0;
    for i in 0..CLASSES {
        for j in 0..CLASSES {
            let e = rows[i] as f64 * cols[j] as f64 / total as f64;
            if e > 0.0 {
                stat += (table[i][j] as f64 - e).powi(2) / e;
            }
        }
    }
    let critical = 32.000;
    ChiSquare {
        statistic: stat,
        df: 16,
        critical,
        reject: stat > critical,
    }
}

/// Σ log_λ f(B_i) / Σ |B_i| over a simulated block stream.
pub fn estimate_exponent(kind: MeasureKind, seed: u64, n_blocks: u64) -> Result<Estimate, DynamicsError> {
    if n_blocks < 1000 {
        return Err(DynamicsError::BadParameter("need at least 1000 blocks".into()));
    }
    Ok(simulate_block_stats(kind, seed, n_blocks)?.exponent)
}

pub fn estimate_e_mu(seed: u64, n_blocks: u64) -> Result<Estimate, DynamicsError> {
    estimate_exponent(MeasureKind::Erdos, seed, n_blocks)
}

/// Natural logarithm of a positive big rational.
pub fn ln_rational(x: &BigRational) -> f64 {
    fn ln_int(n: &BigInt) -> f64 {
        let bits = n.bits();
        if bits <= 1000 {
            return n.to_f64().expect("finite").ln();
        }
        let shift = bits - 64;
        (n >> shift).to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
    }
    assert!(x.is_positive());
    ln_int(x.numer()) - ln_int(x.denom())
}

/// −log_λ μ(Y_n)/n for Y_n = [v, v+λ^{-n}) with v the prefix value.
pub fn dimension_of_prefix(prefix: &[u8]) -> Result<f64, DynamicsError> {
    let n = prefix.len();
    let v = value(prefix);
    let one = GoldenNumber::one();
    let mut hi = &v + &GoldenNumber::lambda_pow(-(n as i64));
    if hi > one {
        hi = one;
    }
    let m = mu_interval(&Interval::new(v, hi)?)?;
    if m.is_zero() {
        return Err(DynamicsError::BadParameter("null interval".into()));
    }
    Ok(-ln_rational(&m) / LAMBDA_F64.ln() / n as f64)
}

/// Mean of −log_λ μ(Y_n)/n over μ-typical prefixes.
pub fn estimate_dimension(seed: u64, n_digits: usize, n_samples: usize) -> Result<Estimate, DynamicsError> {
    if n_digits == 0 || n_digits > DIMENSION_DIGIT_LIMIT || n_samples == 0 {
        return Err(DynamicsError::BadParameter(format!(
            "need 1 ≤ digits ≤ {DIMENSION_DIGIT_LIMIT} and samples ≥ 1"
        )));
    }
    let vals: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let prefix: Vec<u8> = Normalized::new(BitSource::new(chain_rng(seed, i))).take(n_digits).collect();
            dimension_of_prefix(&prefix)
        })
        .collect::<Result<_, _>>()?;
    let n = vals.len() as f64;
    let mean = pairwise_sum(&vals) / n;
    let var = pairwise_sum(&vals.iter().map(|x| (x - mean).powi(2)).collect::<Vec<_>>()) / (n - 1.0).max(1.0);
    Ok(Estimate {
        value: mean,
        se: (var / n).sqrt(),
    })
}

/// The Fibonacci-baker map on Y = [0,1)² ∖ [λ^{-1},1)².
pub fn fibonacci_baker(x: &GoldenNumber, y: &GoldenNumber) -> Result<(GoldenNumber, GoldenNumber), DynamicsError> {
    let (zero, one, li) = (GoldenNumber::zero(), GoldenNumber::one(), GoldenNumber::lambda_pow(-1));
    let inside = |v: &GoldenNumber| *v >= zero && *v < one;
    if !inside(x) || !inside(y) || (*x >= li && *y >= li) {
        return Err(DynamicsError::OutsideDomain);
    }
    Ok(if *x < li {
        (x.mul_lambda(), y.div_lambda())
    } else {
        (&x.mul_lambda() - &one, &y.div_lambda() + &li)
    })
}

pub fn fibonacci_baker_f64(x: f64, y: f64) -> Result<(f64, f64), DynamicsError> {
    let li = 1.0 / LAMBDA_F64;
    let inside = |v: f64| (0.0..1.0).contains(&v);
    if !inside(x) || !inside(y) || (x >= li && y >= li) {
        return Err(DynamicsError::OutsideDomain);
    }
    Ok(if x < li {
        (x * LAMBDA_F64, y * li)
    } else {
        (x * LAMBDA_F64 - 1.0, y * li + li)
    })
}

pub fn fibonacci_baker_steps(
    x: &GoldenNumber,
    y: &GoldenNumber,
    steps: usize,
) -> Result<(GoldenNumber, GoldenNumber), DynamicsError> {
    let mut p = (x.clone(), y.clone());
    for _ in 0..steps {
        p = fibonacci_baker(&p.0, &p.1)?;
    }
    Ok(p)
}
