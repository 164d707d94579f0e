//! 0-1 words, normalization, equivalence classes, blocks.
//!
//! One-sided words are plain `[u8]` slices of 0/1 digits; index 0 holds ε_1,
//! so `value(w) = Σ w[k-1] λ^{-k}`.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::goldfield::{in_class_f, GoldenNumber, LAMBDA_F64};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("invalid digit `{0}` (expected 0 or 1)")]
    BadDigit(char),
    #[error("value {0} outside [0,1)")]
    OutOfRange(String),
    #[error("word length {len} exceeds oracle limit {limit}")]
    TooLong { len: usize, limit: usize },
    #[error("word must start with 1")]
    NotInI0,
    #[error("not a block word: {0}")]
    NotABlock(String),
    #[error("block needs at least one positive part")]
    EmptyBlock,
    #[error("count overflow")]
    Overflow,
    #[error("cannot parse `{0}`")]
    Parse(String),
}

/// Upper length limit for the enumeration oracle.
pub const CLASS_ORACLE_LIMIT: usize = 25;

pub fn parse_bits(s: &str) -> Result<Vec<u8>, WordError> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            c => Err(WordError::BadDigit(c)),
        })
        .collect()
}

pub fn bits_to_string(w: &[u8]) -> String {
    w.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

pub fn is_admissible(w: &[u8]) -> bool {
    w.windows(2).all(|p| p[0] & p[1] == 0)
}

/// Σ w_k λ^{-k}, exact.
pub fn value(w: &[u8]) -> GoldenNumber {
    // Horner from the right in Z[λ]: v ← (v + w_k)/λ
    let (mut a, mut b) = (BigInt::zero(), BigInt::zero());
    for &d in w.iter().rev() {
        if d == 1 {
            a += 1;
        }
        let na = &b - &a;
        b = std::mem::replace(&mut a, na);
    }
    GoldenNumber::from_zl(a, b)
}

/// First `max_len` greedy digits of x ∈ [0,1).
pub fn greedy_expansion(x: &GoldenNumber, max_len: usize) -> Result<Vec<u8>, WordError> {
    if x.signum() < 0 || *x >= GoldenNumber::one() {
        return Err(WordError::OutOfRange(x.to_string()));
    }
    let mut out = Vec::with_capacity(max_len);
    let mut y = x.clone();
    for _ in 0..max_len {
        y = y.mul_lambda();
        if y >= GoldenNumber::one() {
            out.push(1);
            y = &y - &GoldenNumber::one();
        } else {
            out.push(0);
        }
    }
    Ok(out)
}

/// Rewrites 011 → 100 in place, left to right with local backtracking.
fn rewrite_up(buf: &mut [u8]) {
    let mut i = 0;
    while i + 2 < buf.len() {
        if buf[i] == 0 && buf[i + 1] == 1 && buf[i + 2] == 1 {
            buf[i] = 1;
            buf[i + 1] = 0;
            buf[i + 2] = 0;
            i = i.saturating_sub(2);
        } else {
            i += 1;
        }
    }
}

/// Normalizes w; returns the position-0 carry and the admissible word.
pub fn normalize(w: &[u8]) -> (u8, Vec<u8>) {
    let mut buf = Vec::with_capacity(w.len() + 1);
    buf.push(0);
    buf.extend_from_slice(w);
    rewrite_up(&mut buf);
    let carry = buf[0];
    buf.remove(0);
    (carry, buf)
}

/// Lexicographically maximal word of the same length and value reachable by
/// 011 → 100 without a carry cell.
pub fn maximize(w: &[u8]) -> Vec<u8> {
    let mut buf = w.to_vec();
    rewrite_up(&mut buf);
    buf
}

/// Lazy form: rewrites 100 → 011 until none is left.
pub fn anti_normalize(w: &[u8]) -> Vec<u8> {
    let mut buf = w.to_vec();
    let mut i = 0;
    while i + 2 < buf.len() {
        if buf[i] == 1 && buf[i + 1] == 0 && buf[i + 2] == 0 {
            buf[i] = 0;
            buf[i + 1] = 1;
            buf[i + 2] = 1;
            i = i.saturating_sub(2);
        } else {
            i += 1;
        }
    }
    buf
}

/// All words of length |w| with the value of w, by closure under 011 ↔ 100.
pub fn equivalence_class(w: &[u8]) -> Result<BTreeSet<Vec<u8>>, WordError> {
    if w.len() > CLASS_ORACLE_LIMIT {
        return Err(WordError::TooLong {
            len: w.len(),
            limit: CLASS_ORACLE_LIMIT,
        });
    }
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(w.to_vec());
    queue.push_back(w.to_vec());
    while let Some(u) = queue.pop_front() {
        for i in 0..u.len().saturating_sub(2) {
            let t = [u[i], u[i + 1], u[i + 2]];
            let r = match t {
                [0, 1, 1] => [1, 0, 0],
                [1, 0, 0] => [0, 1, 1],
                _ => continue,
            };
            let mut v = u.clone();
            v[i..i + 3].copy_from_slice(&r);
            if seen.insert(v.clone()) {
                queue.push_back(v);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Number of same-length 0-1 words with the value of w.
///
/// Counts u with Σ (w_k − u_k) λ^{-k} = 0 through the carry
/// D_k = λ D_{k-1} + (w_k − u_k) ∈ Z[λ]; only |D_k| < λ can return to 0.
pub fn cardinality(w: &[u8]) -> Result<u128, WordError> {
    let mut states: HashMap<(i64, i64), u128> = HashMap::new();
    states.insert((0, 0), 1);
    for &wk in w {
        let mut next: HashMap<(i64, i64), u128> = HashMap::with_capacity(states.len() * 2);
        for (&(a, b), &c) in &states {
            // λ(a + bλ) = b + (a+b)λ
            let (la, lb) = (b, a + b);
            for uk in 0..=1u8 {
                let na = la + wk as i64 - uk as i64;
                let v = na as f64 + lb as f64 * LAMBDA_F64;
                if v.abs() >= LAMBDA_F64 - 1e-9 {
                    continue;
                }
                let e = next.entry((na, lb)).or_insert(0);
                *e = e.checked_add(c).ok_or(WordError::Overflow)?;
            }
        }
        states = next;
    }
    Ok(states.get(&(0, 0)).copied().unwrap_or(0))
}

/// A block 1(00)^{a_1}(01)^{a_2}…(00)^{a_t} (t odd) or 1(01)^{a_1}(00)^{a_2}…(00)^{a_t} (t even).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block {
    parts: Vec<u32>,
}

impl Block {
    pub fn new(parts: Vec<u32>) -> Result<Self, WordError> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(WordError::EmptyBlock);
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Σ a_i; the block has length 2n+1.
    pub fn n(&self) -> u32 {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        2 * self.n() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when the word starts 1(00)…, i.e. t is odd.
    pub fn starts_with_00(&self) -> bool {
        self.parts.len() % 2 == 1
    }

    pub fn word(&self) -> Vec<u8> {
        let mut w = Vec::with_capacity(self.len());
        w.push(1);
        let first: [u8; 2] = if self.starts_with_00() { [0, 0] } else { [0, 1] };
        for (i, &a) in self.parts.iter().enumerate() {
            let tok = if i % 2 == 0 {
                first
            } else {
                [0, 1 - first[1]]
            };
            for _ in 0..a {
                w.extend_from_slice(&tok);
            }
        }
        w
    }

    pub fn from_word(w: &[u8]) -> Result<Self, WordError> {
        let bad = || WordError::NotABlock(bits_to_string(w));
        if w.len() < 3 || w[0] != 1 || w.len().is_multiple_of(2) {
            return Err(bad());
        }
        let mut parts: Vec<u32> = Vec::new();
        let mut last: Option<u8> = None;
        for tok in w[1..].chunks(2) {
            if tok[0] != 0 {
                return Err(bad());
            }
            if last == Some(tok[1]) {
                *parts.last_mut().expect("run open") += 1;
            } else {
                parts.push(1);
                last = Some(tok[1]);
            }
        }
        if last != Some(0) {
            return Err(bad());
        }
        Ok(Self { parts })
    }

    /// (p, q) with p/q = [a_1, …, a_t].
    pub fn cf(&self) -> (u64, u64) {
        let (mut p, mut q) = (0u64, 1u64);
        for &a in self.parts.iter().rev() {
            (p, q) = (q, a as u64 * q + p);
        }
        (p, q)
    }

    /// f(B) = p + q.
    pub fn cardinality(&self) -> u64 {
        let (p, q) = self.cf();
        p + q
    }
}

pub fn block_cf(b: &Block) -> (u64, u64) {
    b.cf()
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|a| a.to_string()).collect();
        write!(f, "B({})", s.join(","))
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Block {
    type Err = WordError;

    /// Accepts `B(1,2)`, `1,2` or a block word such as `1010000`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let inner = t
            .strip_prefix("B(")
            .and_then(|r| r.strip_suffix(')'))
            .map(str::to_string);
        match inner {
            Some(list) => Self::parse_list(&list, s),
            None if t.contains(',') => Self::parse_list(t, s),
            None => Self::from_word(&parse_bits(t)?),
        }
    }
}

impl Block {
    fn parse_list(list: &str, orig: &str) -> Result<Self, WordError> {
        let parts = list
            .split(',')
            .map(|p| p.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| WordError::Parse(orig.to_string()))?;
        Self::new(parts)
    }
}

/// All blocks of length 2n+1 (one per composition of n), in increasing word order.
pub fn enumerate_blocks(n: u32) -> Vec<Block> {
    let mut out = Vec::with_capacity(1usize << n.saturating_sub(1).min(40));
    let mut cur = Vec::new();
    compositions(n, &mut cur, &mut out);
    out.sort_by_cached_key(Block::word);
    out
}

fn compositions(rest: u32, cur: &mut Vec<u32>, out: &mut Vec<Block>) {
    if rest == 0 {
        if !cur.is_empty() {
            out.push(Block { parts: cur.clone() });
        }
        return;
    }
    for a in 1..=rest {
        cur.push(a);
        compositions(rest - a, cur, out);
        cur.pop();
    }
}

pub fn concat_blocks(blocks: &[Block]) -> Vec<u8> {
    blocks.iter().flat_map(|b| b.word()).collect()
}

/// Splits w (w_1 = 1) into complete blocks and the unfinished tail.
///
/// A block ends right before a 1 whose preceding zero-run has even length.
pub fn parse_blocks(w: &[u8]) -> Result<(Vec<Block>, Vec<u8>), WordError> {
    if w.first() != Some(&1) {
        return Err(WordError::NotInI0);
    }
    let mut blocks = Vec::new();
    let mut start = 0usize;
    let mut zeros = 0usize;
    for (i, &d) in w.iter().enumerate().skip(1) {
        if d == 0 {
            zeros += 1;
            continue;
        }
        if zeros >= 2 && zeros.is_multiple_of(2) {
            blocks.push(Block::from_word(&w[start..i])?);
            start = i;
        }
        zeros = 0;
    }
    Ok((blocks, w[start..].to_vec()))
}

/// Finite-support two-sided word; index k carries weight λ^{-k}.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct TwoSidedWord {
    support: BTreeSet<i64>,
}

impl TwoSidedWord {
    pub fn new(support: impl IntoIterator<Item = i64>) -> Self {
        Self {
            support: support.into_iter().collect(),
        }
    }

    pub fn unit(k: i64) -> Self {
        Self::new([k])
    }

    pub fn support(&self) -> &BTreeSet<i64> {
        &self.support
    }

    pub fn digit(&self, k: i64) -> u8 {
        self.support.contains(&k) as u8
    }

    pub fn is_admissible(&self) -> bool {
        self.support
            .iter()
            .zip(self.support.iter().skip(1))
            .all(|(a, b)| b - a > 1)
    }

    pub fn value(&self) -> GoldenNumber {
        value_of_support(self.support.iter().copied())
    }

    /// Shift τ̃: every index moves down by one.
    pub fn shift(&self) -> Self {
        Self::new(self.support.iter().map(|k| k - 1))
    }

    pub fn translate(&self, by: i64) -> Self {
        Self::new(self.support.iter().map(|k| k + by))
    }
}

/// Σ λ^{-k} over a multiset of indices.
pub fn value_of_support(indices: impl IntoIterator<Item = i64>) -> GoldenNumber {
    let mut acc = GoldenNumber::zero();
    for k in indices {
        acc = &acc + &GoldenNumber::lambda_pow(-k);
    }
    acc
}

/// The admissible finite-support word with value v ≥ 0, v ∈ Z[λ].
pub fn greedy_two_sided(v: &GoldenNumber) -> TwoSidedWord {
    assert!(v.signum() >= 0, "negative value");
    assert!(v.is_integral(), "value outside Z[λ]");
    let mut rest = v.clone();
    let mut support = Vec::new();
    let lam = LAMBDA_F64.ln();
    while !rest.is_zero() {
        let f = rest.to_f64();
        let mut e = (f.ln() / lam).floor() as i64;
        // settle the exponent exactly
        while GoldenNumber::lambda_pow(e + 1) <= rest {
            e += 1;
        }
        while GoldenNumber::lambda_pow(e) > rest {
            e -= 1;
        }
        rest = &rest - &GoldenNumber::lambda_pow(e);
        support.push(-e);
    }
    TwoSidedWord::new(support)
}

/// Admissible word of equal value.
pub fn two_sided_normalize(w: &TwoSidedWord) -> TwoSidedWord {
    greedy_two_sided(&w.value())
}

/// Normalizes a formal sum of unit digits (indices may repeat).
pub fn normalize_multiset(indices: impl IntoIterator<Item = i64>) -> TwoSidedWord {
    greedy_two_sided(&value_of_support(indices))
}

impl fmt::Display for TwoSidedWord {
    /// Digits from the lowest to the highest index, `|` between indices 0 and 1.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (Some(&lo), Some(&hi)) = (self.support.first(), self.support.last()) else {
            return write!(f, "|");
        };
        let lo = lo.min(1);
        let hi = hi.max(0);
        let mut s = String::new();
        for k in lo..=hi {
            if k == 1 {
                s.push('|');
            }
            s.push(if self.support.contains(&k) { '1' } else { '0' });
        }
        write!(f, "{s}")
    }
}

impl fmt::Debug for TwoSidedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.support.iter().map(|k| format!("{k}:1")).collect();
        write!(f, "[{}]", v.join(";"))
    }
}

impl FromStr for TwoSidedWord {
    type Err = WordError;

    /// `10|01` digit form (last left digit is index 0), or a support list
    /// `-1:1;2:1` / `-1;2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Some((left, right)) = t.split_once('|') {
            let l = parse_bits(left)?;
            let r = parse_bits(right)?;
            let mut sup = Vec::new();
            for (i, &d) in l.iter().rev().enumerate() {
                if d == 1 {
                    sup.push(-(i as i64));
                }
            }
            for (i, &d) in r.iter().enumerate() {
                if d == 1 {
                    sup.push(i as i64 + 1);
                }
            }
            return Ok(Self::new(sup));
        }
        let mut sup = Vec::new();
        for item in t.split(';').map(str::trim).filter(|x| !x.is_empty()) {
            let (idx, d) = item.split_once(':').unwrap_or((item, "1"));
            let k: i64 = idx.trim().parse().map_err(|_| WordError::Parse(s.into()))?;
            match d.trim() {
                "1" => sup.push(k),
                "0" => {}
                _ => return Err(WordError::Parse(s.into())),
            }
        }
        Ok(Self::new(sup))
    }
}

/// (e_j, n_j) with e_j the value of the j-th block word and n_j its length.
pub fn arithmetic_block_expansion(blocks: &[Block]) -> Vec<(GoldenNumber, u32)> {
    blocks
        .iter()
        .map(|b| (value(&b.word()), b.len() as u32))
        .collect()
}

/// Σ_j e_j λ^{-(n_1+…+n_{j-1})}.
pub fn reconstruct(expansion: &[(GoldenNumber, u32)]) -> GoldenNumber {
    let mut acc = GoldenNumber::zero();
    let mut shift = 0i64;
    for (e, n) in expansion {
        acc = &acc + &(e * &GoldenNumber::lambda_pow(-shift));
        shift += *n as i64;
    }
    acc
}

/// Writes e = mλ − n; returns (m, n).
pub fn e_as_m_lambda_minus_n(e: &GoldenNumber) -> Option<(BigInt, BigInt)> {
    e.is_integral().then(|| (e.n().clone(), -e.m()))
}

/// e = mλ − n with n ∈ 𝓕 and n = ⌊mλ⌋.
pub fn e_in_class_form(e: &GoldenNumber) -> bool {
    let Some((m, n)) = e_as_m_lambda_minus_n(e) else {
        return false;
    };
    let floor = (&GoldenNumber::integer(m) * &GoldenNumber::lambda()).floor();
    n.is_positive() && n == floor && n.to_u64().is_some_and(in_class_f)
}

/// Height h(e): index of the last 1 in the canonical expansion of e ∈ (0,1).
pub fn height(e: &GoldenNumber) -> Option<usize> {
    // finite expansions of Z[λ] elements stay short for block values
    let w = greedy_expansion(e, 256).ok()?;
    w.iter().rposition(|&d| d == 1).map(|i| i + 1)
}
