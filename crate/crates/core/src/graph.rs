//! Fibonacci graph levels, the Euclidean tree and the adic successor.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::goldfield::{fib_u64, LAMBDA_F64};
use crate::words::{anti_normalize, maximize};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("level {n} exceeds the limit {limit}")]
    TooDeep { n: u32, limit: u32 },
    #[error("level must be at least 1")]
    ZeroLevel,
    #[error("path is maximal: no 011 in head")]
    Maximal,
    #[error("path is minimal: no 100 in head")]
    Minimal,
    #[error("bad level cache: {0}")]
    BadCache(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub const BRUTE_LIMIT: u32 = 22;
pub const LEVEL_LIMIT: u32 = 44;
pub const CACHE_LIMIT: u32 = 60;
pub const EUCLID_MATERIALIZE_LIMIT: u32 = 24;
pub const EUCLID_LIMIT: u32 = 28;

const CACHE_MAGIC: &[u8; 4] = b"FIBL";
const CACHE_VERSION: u8 = 1;

pub(crate) fn log_lambda(x: f64) -> f64 {
    x.ln() / LAMBDA_F64.ln()
}

/// Pairwise sum, independent of thread count.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => {
            let mut s = 0.0;
            for x in xs {
                s += x;
            }
            s
        }
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// f_n(k), k = 0 … F_{n+2} − 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelTable {
    n: u32,
    counts: Vec<u32>,
}

impl LevelTable {
    /// Level 0: the single vertex 0.
    pub fn root() -> Self {
        Self {
            n: 0,
            counts: vec![1],
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn get(&self, k: usize) -> u32 {
        self.counts.get(k).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// f_{n+1}(k) = f_n(k) + f_n(k − F_{n+1}), updated in place.
    pub fn advance(&mut self) {
        let n = self.n + 1;
        let shift = fib_u64(n as usize) as usize;
        let len = fib_u64(n as usize + 2) as usize - 1;
        self.counts.resize(len, 0);
        for k in (shift..len).rev() {
            self.counts[k] += self.counts[k - shift];
        }
        self.n = n;
    }

    pub fn mass(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn is_palindrome(&self) -> bool {
        let c = &self.counts;
        (0..c.len() / 2).all(|k| c[k] == c[c.len() - 1 - k])
    }

    /// H^{(n)} in base λ.
    pub fn entropy(&self) -> f64 {
        let total = 2f64.powi(self.n as i32);
        let terms: Vec<f64> = self
            .counts
            .iter()
            .map(|&c| {
                let p = c as f64 / total;
                -p * log_lambda(p)
            })
            .collect();
        pairwise_sum(&terms)
    }

    /// H_n = Σ_{k=F_n}^{F_{n+1}-1} f_n(k) log_λ f_n(k).
    pub fn middle_entropy(&self) -> f64 {
        let lo = fib_u64(self.n as usize) as usize;
        let hi = fib_u64(self.n as usize + 1) as usize;
        let terms: Vec<f64> = self.counts[lo..hi.min(self.counts.len())]
            .iter()
            .map(|&c| c as f64 * log_lambda(c as f64))
            .collect();
        pairwise_sum(&terms)
    }

    pub fn write_cache(&self, path: &Path) -> Result<(), GraphError> {
        if self.n > CACHE_LIMIT {
            return Err(GraphError::TooDeep {
                n: self.n,
                limit: CACHE_LIMIT,
            });
        }
        let mut f = io::BufWriter::new(fs::File::create(path)?);
        f.write_all(CACHE_MAGIC)?;
        f.write_all(&[CACHE_VERSION])?;
        f.write_all(&self.n.to_le_bytes())?;
        for &c in &self.counts {
            f.write_all(&(c as u64).to_le_bytes())?;
        }
        f.flush()?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self, GraphError> {
        let mut f = io::BufReader::new(fs::File::open(path)?);
        let mut head = [0u8; 9];
        f.read_exact(&mut head)
            .map_err(|_| GraphError::BadCache("truncated header".into()))?;
        if &head[..4] != CACHE_MAGIC {
            return Err(GraphError::BadCache("magic".into()));
        }
        if head[4] != CACHE_VERSION {
            return Err(GraphError::BadCache(format!("version {}", head[4])));
        }
        let n = u32::from_le_bytes(head[5..9].try_into().expect("4 bytes"));
        if n > CACHE_LIMIT {
            return Err(GraphError::BadCache(format!("level {n}")));
        }
        let len = fib_u64(n as usize + 2) as usize - 1;
        let mut counts = Vec::with_capacity(len);
        let mut buf = [0u8; 8];
        for _ in 0..len {
            f.read_exact(&mut buf)
                .map_err(|_| GraphError::BadCache("truncated body".into()))?;
            let v = u64::from_le_bytes(buf);
            counts.push(u32::try_from(v).map_err(|_| GraphError::BadCache("count".into()))?);
        }
        if f.read(&mut buf)? != 0 {
            return Err(GraphError::BadCache("trailing bytes".into()));
        }
        Ok(Self { n, counts })
    }
}

pub fn level_frequencies(n: u32) -> Result<LevelTable, GraphError> {
    if n == 0 {
        return Err(GraphError::ZeroLevel);
    }
    if n > LEVEL_LIMIT {
        return Err(GraphError::TooDeep {
            n,
            limit: LEVEL_LIMIT,
        });
    }
    let mut t = LevelTable::root();
    for _ in 0..n {
        t.advance();
    }
    Ok(t)
}

/// Loads level n from `dir` when cached, else computes and stores it.
/// A cache file that exists but does not parse is an error.
pub fn level_frequencies_cached(n: u32, dir: &Path) -> Result<LevelTable, GraphError> {
    let path = dir.join(format!("level-{n}.fibl"));
    if path.exists() {
        let t = LevelTable::read_cache(&path)?;
        if t.n != n {
            return Err(GraphError::BadCache(format!("file holds level {}", t.n)));
        }
        return Ok(t);
    }
    let t = level_frequencies(n)?;
    if n <= CACHE_LIMIT {
        fs::create_dir_all(dir)?;
        t.write_cache(&path)?;
    }
    Ok(t)
}

/// Full table by enumerating all 2^n digit vectors, k = Σ ε_j F_{n+1-j}.
pub fn brute_table(n: u32) -> Result<Vec<u32>, GraphError> {
    if n > BRUTE_LIMIT {
        return Err(GraphError::TooDeep {
            n,
            limit: BRUTE_LIMIT,
        });
    }
    let weights: Vec<usize> = (1..=n as usize).map(|j| fib_u64(n as usize + 1 - j) as usize).collect();
    let len = fib_u64(n as usize + 2) as usize - 1;
    let mut out = vec![0u32; len];
    for mask in 0u64..1 << n {
        let k: usize = weights
            .iter()
            .enumerate()
            .filter(|(j, _)| mask >> j & 1 == 1)
            .map(|(_, w)| w)
            .sum();
        out[k] += 1;
    }
    Ok(out)
}

pub fn brute_count(n: u32, k: usize) -> Result<u32, GraphError> {
    Ok(brute_table(n)?.get(k).copied().unwrap_or(0))
}

pub fn level_entropy(n: u32) -> Result<f64, GraphError> {
    Ok(level_frequencies(n)?.entropy())
}

pub fn garsia_estimate(n: u32) -> Result<f64, GraphError> {
    Ok(level_entropy(n)? / n as f64)
}

pub fn middle_entropy(n: u32) -> Result<f64, GraphError> {
    Ok(level_frequencies(n)?.middle_entropy())
}

/// A node (k, i) of the Euclidean tree at depth `level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EuclidPair {
    pub k: u64,
    pub i: u64,
    pub level: u32,
}

fn check_euclid(n: u32, limit: u32) -> Result<(), GraphError> {
    if n == 0 {
        return Err(GraphError::ZeroLevel);
    }
    if n > limit {
        return Err(GraphError::TooDeep { n, limit });
    }
    Ok(())
}

/// Level n of the tree, left to right; children of (k,i) are (k+i,i), (k+i,k).
pub fn euclid_level(n: u32) -> Result<Vec<EuclidPair>, GraphError> {
    check_euclid(n, EUCLID_MATERIALIZE_LIMIT)?;
    let mut lvl = vec![EuclidPair {
        k: 2,
        i: 1,
        level: 1,
    }];
    for d in 2..=n {
        lvl = lvl
            .iter()
            .flat_map(|p| {
                [
                    EuclidPair {
                        k: p.k + p.i,
                        i: p.i,
                        level: d,
                    },
                    EuclidPair {
                        k: p.k + p.i,
                        i: p.k,
                        level: d,
                    },
                ]
            })
            .collect();
    }
    Ok(lvl)
}

/// Depth-first sum of g(k) over level n, with a fixed tree-shaped reduction.
fn tree_sum(k: u64, i: u64, depth: u32, n: u32, g: &(impl Fn(u64) -> f64 + Sync)) -> f64 {
    if depth == n {
        return g(k);
    }
    if n - depth > 16 {
        let (a, b) = rayon::join(
            || tree_sum(k + i, i, depth + 1, n, g),
            || tree_sum(k + i, k, depth + 1, n, g),
        );
        a + b
    } else {
        tree_sum(k + i, i, depth + 1, n, g) + tree_sum(k + i, k, depth + 1, n, g)
    }
}

/// Σ g(k) over the k-components of level n.
pub fn euclid_sum(n: u32, g: &(impl Fn(u64) -> f64 + Sync)) -> Result<f64, GraphError> {
    check_euclid(n, EUCLID_LIMIT)?;
    Ok(tree_sum(2, 1, 1, n, g))
}

/// k_n = Σ k log_λ k over level n.
pub fn k_n(n: u32) -> Result<f64, GraphError> {
    check_euclid(n, EUCLID_LIMIT)?;
    Ok(tree_sum(2, 1, 1, n, &|k| k as f64 * log_lambda(k as f64)))
}

/// ℓ_n = Σ log_λ k over level n.
pub fn l_n(n: u32) -> Result<f64, GraphError> {
    check_euclid(n, EUCLID_LIMIT)?;
    Ok(tree_sum(2, 1, 1, n, &|k| log_lambda(k as f64)))
}

/// Visits (p, q) for every composition of n; parts are prepended.
fn for_each_composition(n: u32, f: &mut impl FnMut(u64, u64)) {
    fn go(rest: u32, p: u64, q: u64, f: &mut impl FnMut(u64, u64)) {
        for a in 1..=rest {
            let (np, nq) = (q, a as u64 * q + p);
            if a == rest {
                f(np, nq);
            } else {
                go(rest - a, np, nq, f);
            }
        }
    }
    go(n, 0, 1, f);
}

/// Σ (p+q) log_λ(p+q) over compositions of n.
pub fn k_n_by_compositions(n: u32) -> Result<f64, GraphError> {
    check_euclid(n, EUCLID_LIMIT)?;
    let mut terms = Vec::with_capacity(1 << (n - 1).min(27));
    for_each_composition(n, &mut |p, q| {
        let s = (p + q) as f64;
        terms.push(s * log_lambda(s));
    });
    Ok(pairwise_sum(&terms))
}

/// Σ log_λ(p+q) over compositions of n.
pub fn l_n_by_compositions(n: u32) -> Result<f64, GraphError> {
    check_euclid(n, EUCLID_LIMIT)?;
    let mut terms = Vec::new();
    for_each_composition(n, &mut |p, q| terms.push(log_lambda((p + q) as f64)));
    Ok(pairwise_sum(&terms))
}

/// (min, max, Σ) of p+q over compositions of n.
pub fn composition_stats(n: u32) -> (u64, u64, u64) {
    let (mut lo, mut hi, mut sum) = (u64::MAX, 0, 0);
    for_each_composition(n, &mut |p, q| {
        lo = lo.min(p + q);
        hi = hi.max(p + q);
        sum += p + q;
    });
    (lo, hi, sum)
}

/// The k-components of level j in increasing order of the matching block words.
pub fn phi_frequencies(j: u32) -> Result<Vec<u64>, GraphError> {
    check_euclid(j, EUCLID_MATERIALIZE_LIMIT)?;
    Ok(crate::words::enumerate_blocks(j)
        .iter()
        .map(|b| b.cardinality())
        .collect())
}

/// A path of the graph: a mutable finite head followed by an untouched tail.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AdicPath {
    pub head: Vec<u8>,
}

impl AdicPath {
    pub fn new(head: Vec<u8>) -> Self {
        Self { head }
    }
}

fn find(head: &[u8], pat: [u8; 3]) -> Option<usize> {
    head.windows(3).position(|w| w == pat)
}

/// Immediate successor within the equivalence class.
pub fn adic_successor(p: &AdicPath) -> Result<AdicPath, GraphError> {
    let k = find(&p.head, [0, 1, 1]).ok_or(GraphError::Maximal)?;
    let mut head = anti_normalize(&p.head[..k]);
    head.extend_from_slice(&[1, 0, 0]);
    head.extend_from_slice(&p.head[k + 3..]);
    Ok(AdicPath { head })
}

/// Inverse of [`adic_successor`].
pub fn adic_predecessor(p: &AdicPath) -> Result<AdicPath, GraphError> {
    let k = find(&p.head, [1, 0, 0]).ok_or(GraphError::Minimal)?;
    let mut head = maximize(&p.head[..k]);
    head.extend_from_slice(&[0, 1, 1]);
    head.extend_from_slice(&p.head[k + 3..]);
    Ok(AdicPath { head })
}
