//! Exact Erdős measure μ, the invariant measure ν, block laws and densities.
//!
//! μ is the law of Σ ε_k λ^{-k-1} with iid fair ε_k. Its distribution function
//! G(x) = μ[0,x) satisfies G(x) = ½(G(λx) + G(λx − λ^{-1})) with G = 0 on
//! (−∞,0] and G = 1 on [1,∞). On Z[λ] the recursion visits finitely many
//! states; they may form cycles, so each strongly connected component is
//! solved as a linear system over Q.

use std::cell::RefCell;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::goldfield::GoldenNumber;
use crate::graph::LevelTable;
use crate::words::{is_admissible, value, Block};

pub type Q = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MeasureError {
    #[error("{0} outside [0,1]")]
    OutOfRange(String),
    #[error("no exact evaluation for {0}: endpoint must lie in Z[λ] with moderate coefficients")]
    UnsupportedExact(String),
    #[error("interval endpoints out of order")]
    Reversed,
    #[error("interval crosses a band boundary")]
    StraddlesBands,
    #[error("no constancy region for {0}")]
    NoSuchRegion(String),
    #[error("empty interval")]
    Empty,
}

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn lp(k: i64) -> GoldenNumber {
    GoldenNumber::lambda_pow(k)
}

/// Half-open [lo, hi) ⊆ [0,1].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: GoldenNumber,
    hi: GoldenNumber,
}

impl Interval {
    pub fn new(lo: GoldenNumber, hi: GoldenNumber) -> Result<Self, MeasureError> {
        if lo.signum() < 0 {
            return Err(MeasureError::OutOfRange(lo.to_string()));
        }
        if hi > GoldenNumber::one() {
            return Err(MeasureError::OutOfRange(hi.to_string()));
        }
        if lo > hi {
            return Err(MeasureError::Reversed);
        }
        Ok(Self { lo, hi })
    }

    pub fn unit() -> Self {
        Self {
            lo: GoldenNumber::zero(),
            hi: GoldenNumber::one(),
        }
    }

    /// Points whose canonical expansion starts with the admissible word w.
    pub fn cylinder(w: &[u8]) -> Result<Self, MeasureError> {
        if !is_admissible(w) {
            return Err(MeasureError::NoSuchRegion(crate::words::bits_to_string(w)));
        }
        let lo = value(w);
        let n = w.len() as i64;
        let width = if w.last() == Some(&1) { lp(-n - 1) } else { lp(-n) };
        let hi = &lo + &width;
        Self::new(lo, hi)
    }

    pub fn lo(&self) -> &GoldenNumber {
        &self.lo
    }

    pub fn hi(&self) -> &GoldenNumber {
        &self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// (E + s) mod 1 as at most two intervals.
    pub fn translate_mod1(&self, s: &GoldenNumber) -> Vec<Interval> {
        let lo = &self.lo + s;
        let shift = GoldenNumber::integer(lo.floor());
        let lo = &lo - &shift;
        let hi = &(&self.hi + s) - &shift;
        let one = GoldenNumber::one();
        if hi <= one {
            vec![Interval { lo, hi }]
        } else {
            vec![
                Interval { lo, hi: one.clone() },
                Interval {
                    lo: GoldenNumber::zero(),
                    hi: &hi - &one,
                },
            ]
        }
    }

    /// E + s, required to stay inside [0,1].
    pub fn translate(&self, s: &GoldenNumber) -> Result<Interval, MeasureError> {
        Interval::new(&self.lo + s, &self.hi + s)
    }

    /// Pieces of E cut at λ^{-2} and λ^{-1}.
    pub fn split_bands(&self) -> Vec<Interval> {
        let mut cuts = vec![self.lo.clone()];
        for c in [lp(-2), lp(-1)] {
            if self.lo < c && c < self.hi {
                cuts.push(c);
            }
        }
        cuts.push(self.hi.clone());
        cuts.windows(2)
            .map(|w| Interval {
                lo: w[0].clone(),
                hi: w[1].clone(),
            })
            .collect()
    }

    pub fn band(&self) -> Result<Band, MeasureError> {
        if self.hi <= lp(-2) {
            Ok(Band::Low)
        } else if self.lo >= lp(-2) && self.hi <= lp(-1) {
            Ok(Band::Mid)
        } else if self.lo >= lp(-1) {
            Ok(Band::High)
        } else {
            Err(MeasureError::StraddlesBands)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Band {
    /// [0, λ^{-2})
    Low,
    /// [λ^{-2}, λ^{-1})
    Mid,
    /// [λ^{-1}, 1]
    High,
}

type Zl = (i128, i128);

const COEF_LIMIT: i128 = 1 << 60;

fn zl_sign((a, b): Zl) -> i32 {
    let p = 2 * a + b;
    let qq = b;
    if p >= 0 && qq >= 0 {
        return (p != 0 || qq != 0) as i32;
    }
    if p <= 0 && qq <= 0 {
        return -1;
    }
    let d = p * p - 5 * qq * qq;
    if p > 0 {
        if d > 0 {
            1
        } else {
            -1
        }
    } else if d > 0 {
        -1
    } else {
        1
    }
}

fn kids((a, b): Zl) -> [Zl; 2] {
    // λx and λx − λ^{-1}, with λ^{-1} = −1 + λ
    [(b, a + b), (b + 1, a + b - 1)]
}

fn boundary(x: Zl) -> Option<Q> {
    if zl_sign(x) <= 0 {
        Some(Q::zero())
    } else if zl_sign((x.0 - 1, x.1)) >= 0 {
        Some(Q::one())
    } else {
        None
    }
}

/// Memoized exact evaluator of G(x) = μ[0,x).
#[derive(Default)]
pub struct MuEngine {
    memo: HashMap<Zl, Q>,
}

impl MuEngine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    fn to_zl(x: &GoldenNumber) -> Result<Zl, MeasureError> {
        let err = || MeasureError::UnsupportedExact(x.to_string());
        if !x.is_integral() {
            return Err(err());
        }
        let a = x.m().to_i128().ok_or_else(err)?;
        let b = x.n().to_i128().ok_or_else(err)?;
        if a.abs() > COEF_LIMIT || b.abs() > COEF_LIMIT {
            return Err(err());
        }
        Ok((a, b))
    }

    fn lookup(&self, x: Zl) -> Option<Q> {
        boundary(x).or_else(|| self.memo.get(&x).cloned())
    }

    pub fn cdf(&mut self, x: &GoldenNumber) -> Result<Q, MeasureError> {
        if x.signum() < 0 || *x > GoldenNumber::one() {
            return Err(MeasureError::OutOfRange(x.to_string()));
        }
        let z = Self::to_zl(x)?;
        if let Some(v) = self.lookup(z) {
            return Ok(v);
        }
        self.solve_from(z);
        Ok(self.memo[&z].clone())
    }

    pub fn interval(&mut self, e: &Interval) -> Result<Q, MeasureError> {
        if e.is_empty() {
            return Ok(Q::zero());
        }
        Ok(self.cdf(&e.hi)? - self.cdf(&e.lo)?)
    }

    /// μ((E + s) mod 1).
    pub fn shifted(&mut self, e: &Interval, s: &GoldenNumber) -> Result<Q, MeasureError> {
        let mut acc = Q::zero();
        for piece in e.translate_mod1(s) {
            acc += self.interval(&piece)?;
        }
        Ok(acc)
    }

    /// Tarjan over the unresolved states reachable from `start`.
    fn solve_from(&mut self, start: Zl) {
        struct Frame {
            v: Zl,
            next: usize,
        }
        let mut index: HashMap<Zl, usize> = HashMap::new();
        let mut low: HashMap<Zl, usize> = HashMap::new();
        let mut on_stack: HashMap<Zl, bool> = HashMap::new();
        let mut stack: Vec<Zl> = Vec::new();
        let mut calls = vec![Frame { v: start, next: 0 }];
        let mut counter = 0usize;
        index.insert(start, counter);
        low.insert(start, counter);
        counter += 1;
        stack.push(start);
        on_stack.insert(start, true);

        while let Some(top) = calls.last_mut() {
            let v = top.v;
            if top.next < 2 {
                let w = kids(v)[top.next];
                top.next += 1;
                if boundary(w).is_some() || self.memo.contains_key(&w) {
                    continue;
                }
                match index.get(&w) {
                    None => {
                        index.insert(w, counter);
                        low.insert(w, counter);
                        counter += 1;
                        stack.push(w);
                        on_stack.insert(w, true);
                        calls.push(Frame { v: w, next: 0 });
                    }
                    Some(&iw) => {
                        if on_stack.get(&w).copied().unwrap_or(false) {
                            let lv = low[&v].min(iw);
                            low.insert(v, lv);
                        }
                    }
                }
                continue;
            }
            calls.pop();
            if low[&v] == index[&v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("scc member");
                    on_stack.insert(w, false);
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                self.solve_component(&comp);
            }
            if let Some(parent) = calls.last() {
                let lp_ = low[&parent.v].min(low[&v]);
                low.insert(parent.v, lp_);
            }
        }
    }

    fn solve_component(&mut self, comp: &[Zl]) {
        let half = q(1, 2);
        if comp.len() == 1 {
            let v = comp[0];
            let [k1, k2] = kids(v);
            if k1 != v && k2 != v {
                let s = self.lookup(k1).expect("resolved") + self.lookup(k2).expect("resolved");
                self.memo.insert(v, s * &half);
                return;
            }
        }
        let n = comp.len();
        let pos: HashMap<Zl, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut a = vec![vec![Q::zero(); n + 1]; n];
        for (i, &v) in comp.iter().enumerate() {
            a[i][i] += Q::one();
            for w in kids(v) {
                match pos.get(&w) {
                    Some(&j) => a[i][j] -= &half,
                    None => a[i][n] += self.lookup(w).expect("resolved") * &half,
                }
            }
        }
        for c in 0..n {
            let p = (c..n).find(|&r| !a[r][c].is_zero()).expect("nonsingular");
            a.swap(c, p);
            let pivot = a[c][c].clone();
            for x in a[c].iter_mut() {
                *x /= &pivot;
            }
            for r in 0..n {
                if r != c && !a[r][c].is_zero() {
                    let f = a[r][c].clone();
                    let row_c = a[c].clone();
                    for (x, y) in a[r].iter_mut().zip(row_c.iter()) {
                        *x -= &f * y;
                    }
                }
            }
        }
        for (i, &v) in comp.iter().enumerate() {
            self.memo.insert(v, a[i][n].clone());
        }
    }

    pub fn nu(&mut self, e: &Interval) -> Result<Q, MeasureError> {
        let mut acc = Q::zero();
        for piece in e.split_bands() {
            if piece.is_empty() {
                continue;
            }
            acc += self.nu_band(&piece)?;
        }
        Ok(acc)
    }

    fn nu_band(&mut self, e: &Interval) -> Result<Q, MeasureError> {
        let m = self.interval(e)?;
        Ok(match e.band()? {
            Band::Low => {
                q(2, 3) * m + q(1, 3) * self.shifted(e, &lp(-2))? + q(1, 6) * self.shifted(e, &lp(-1))?
            }
            Band::Mid => q(2, 3) * m + q(1, 3) * self.shifted(e, &lp(-2))?,
            Band::High => q(1, 2) * m + q(1, 3) * self.shifted(e, &lp(-2))?,
        })
    }
}

thread_local! {
    static ENGINE: RefCell<MuEngine> = RefCell::new(MuEngine::new());
}

/// Runs `f` with this thread's shared engine.
pub fn with_engine<R>(f: impl FnOnce(&mut MuEngine) -> R) -> R {
    ENGINE.with(|e| f(&mut e.borrow_mut()))
}

pub fn mu_cdf(x: &GoldenNumber) -> Result<Q, MeasureError> {
    with_engine(|e| e.cdf(x))
}

pub fn mu_interval(e: &Interval) -> Result<Q, MeasureError> {
    with_engine(|m| m.interval(e))
}

pub fn mu_shifted(e: &Interval, s: &GoldenNumber) -> Result<Q, MeasureError> {
    with_engine(|m| m.shifted(e, s))
}

pub fn nu_interval(e: &Interval) -> Result<Q, MeasureError> {
    with_engine(|m| m.nu(e))
}

/// Σ_{k/F_{n+2} ∈ E} f_n(k)/2^n.
pub fn theta_approx(e: &Interval, table: &LevelTable) -> Q {
    let n = table.n();
    let den = crate::goldfield::fib(n as usize + 2);
    let ceil = |x: &GoldenNumber| -> i64 {
        let scaled = x * &GoldenNumber::integer(den.clone());
        (-(-scaled).floor()).to_i64().expect("index fits")
    };
    let a = ceil(&e.lo).max(0) as usize;
    let b = (ceil(&e.hi).max(0) as usize).min(table.len());
    let s: u64 = table.counts()[a.min(b)..b].iter().map(|&c| c as u64).sum();
    Q::new(BigInt::from(s), BigInt::one() << n)
}

/// T^{-1}E for T x = {λx}.
pub fn t_preimage(e: &Interval) -> Vec<Interval> {
    let linv = lp(-1);
    let one = GoldenNumber::one();
    let mut out = vec![Interval {
        lo: e.lo.div_lambda(),
        hi: e.hi.div_lambda(),
    }];
    if e.lo < linv {
        let lo = (&e.lo + &one).div_lambda();
        let hi = (&e.hi + &one).div_lambda();
        out.push(Interval {
            lo,
            hi: if hi > one { one } else { hi },
        });
    }
    out
}

fn merge(mut v: Vec<Interval>) -> Vec<Interval> {
    v.retain(|i| !i.is_empty());
    v.sort_by(|a, b| a.lo.cmp(&b.lo));
    let mut out: Vec<Interval> = Vec::with_capacity(v.len());
    for i in v {
        match out.last_mut() {
            Some(last) if last.hi >= i.lo => {
                if i.hi > last.hi {
                    last.hi = i.hi;
                }
            }
            _ => out.push(i),
        }
    }
    out
}

/// T^{-n}E as disjoint sorted intervals.
pub fn t_preimage_n(e: &Interval, n: u32) -> Vec<Interval> {
    let mut cur = vec![e.clone()];
    for _ in 0..n {
        cur = merge(cur.iter().flat_map(t_preimage).collect());
    }
    cur
}

/// μ(T^{-n}E).
pub fn pushforward_t_mu(e: &Interval, n: u32) -> Result<Q, MeasureError> {
    with_engine(|m| {
        let mut acc = Q::zero();
        for piece in t_preimage_n(e, n) {
            acc += m.interval(&piece)?;
        }
        Ok(acc)
    })
}

/// Lebesgue measure of a block cylinder, λ^{-|B|}.
pub fn block_cylinder_m(b: &Block) -> GoldenNumber {
    lp(-(b.len() as i64))
}

/// Lebesgue mass of all blocks of length 2n+1: 2^{n-1}λ^{-2n-1}.
pub fn block_class_m(n: u32) -> GoldenNumber {
    &GoldenNumber::integer(BigInt::one() << (n - 1)) * &lp(-(2 * n as i64 + 1))
}

/// Stationary block law (p+q)/2^{|B|}.
pub fn block_cylinder_mu(b: &Block) -> Q {
    Q::new(BigInt::from(b.cardinality()), BigInt::one() << b.len())
}

/// ⅓(¾)^n.
pub fn block_class_mu(n: u32) -> Q {
    Q::new(BigInt::from(3).pow(n), BigInt::from(3) * BigInt::from(4).pow(n))
}

/// μ(first block = B | ε_1 = 1).
pub fn mu_first_block(b: &Block) -> Result<Q, MeasureError> {
    let mut w = b.word();
    w.push(1);
    let i0 = Interval::new(lp(-1), GoldenNumber::one())?;
    Ok(mu_interval(&Interval::cylinder(&w)?)? / mu_interval(&i0)?)
}

/// ν(first block = B | ε_1 = 1).
pub fn nu_first_block(b: &Block) -> Q {
    let (p, qq) = b.cf();
    let (p, qq) = (Q::from_integer(p.into()), Q::from_integer(qq.into()));
    let num = if b.starts_with_00() {
        q(4, 5) * p + q(6, 5) * qq
    } else {
        q(6, 5) * p + q(4, 5) * qq
    };
    num / Q::from_integer(BigInt::from(2) * BigInt::from(4).pow(b.n()))
}

/// ν(1(00)^k 1) = (2+3k)/(18·4^k).
pub fn nu_x0_term(k: u32) -> Q {
    Q::new(
        BigInt::from(2 + 3 * k as i64),
        BigInt::from(18) * BigInt::from(4).pow(k),
    )
}

/// ν̃X̃_0 = Σ_{k≥1} (2+3k)/(18·4^k), summed in closed form.
pub fn nu_x0() -> Q {
    let r = q(1, 4);
    let one = Q::one();
    let geo = &r / (&one - &r);
    let arith = &r / ((&one - &r) * (&one - &r));
    (q(2, 1) * geo + q(3, 1) * arith) / q(18, 1)
}

/// The constancy regions of d(Rμ)/dμ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DensityCase {
    /// band 1, quotient μ(E+λ^{-1})/μE = k
    I { k: u32 },
    /// band 1 below a closed block; a/b by the parity of t
    IBlock { k: u32, block: Block },
    /// band 2, quotient μ(E−λ^{-2})/μE = 1/k
    II { k: u32 },
    IIBlock { k: u32, block: Block },
    /// band 3 near λ^{-1}, quotient 1
    III,
    /// band 3, E − λ^{-2} inside the closed block 0B1
    IIIBlock { block: Block },
}

impl DensityCase {
    pub fn name(&self) -> &'static str {
        match self {
            Self::I { .. } => "I",
            Self::IBlock { block, .. } => {
                if block.starts_with_00() {
                    "Ia"
                } else {
                    "Ib"
                }
            }
            Self::II { .. } => "II",
            Self::IIBlock { block, .. } => {
                if block.starts_with_00() {
                    "IIa"
                } else {
                    "IIb"
                }
            }
            Self::III => "III",
            Self::IIIBlock { block } => {
                if block.starts_with_00() {
                    "IIIa"
                } else {
                    "IIIb"
                }
            }
        }
    }

    /// The piecewise-constant value.
    pub fn value(&self) -> Result<Q, MeasureError> {
        let pq = |b: &Block| {
            let (p, qq) = b.cf();
            (p as i64, qq as i64)
        };
        match self {
            Self::I { k } if *k >= 1 => Ok(q(*k as i64, 1)),
            Self::IBlock { k, block } if *k >= 1 => {
                let (p, qq) = pq(block);
                let k = *k as i64;
                Ok(if block.starts_with_00() {
                    q(k * p + (k + 1) * qq, p + qq)
                } else {
                    q((k + 1) * p + k * qq, p + qq)
                })
            }
            Self::II { k } if *k >= 2 => Ok(q(1, *k as i64)),
            Self::IIBlock { k, block } if *k >= 1 => {
                let (p, qq) = pq(block);
                let k = *k as i64;
                Ok(if block.starts_with_00() {
                    q(p + qq, k * p + (k + 1) * qq)
                } else {
                    q(p + qq, (k + 1) * p + k * qq)
                })
            }
            Self::III => Ok(Q::one()),
            Self::IIIBlock { block } => {
                let (p, qq) = pq(block);
                Ok(if block.starts_with_00() {
                    q(p + qq, qq)
                } else {
                    q(p + qq, p)
                })
            }
            _ => Err(MeasureError::NoSuchRegion(format!("{self:?}"))),
        }
    }

    /// Canonical word of the cylinder carrying the constant value
    /// (for IIIBlock, the cylinder of E − λ^{-2}).
    pub fn region_word(&self) -> Result<Vec<u8>, MeasureError> {
        self.value()?;
        let closed = |b: &Block| {
            let mut w = b.word();
            w.push(1);
            w
        };
        Ok(match self {
            Self::I { k } => {
                let mut w = vec![0; 2 * *k as usize + 1];
                w.push(1);
                w
            }
            Self::IBlock { k, block } => [vec![0; 2 * *k as usize + 2], closed(block)].concat(),
            Self::II { k } => {
                let mut w = vec![0, 1];
                w.extend(std::iter::repeat_n(0, 2 * *k as usize - 2));
                w.push(1);
                w
            }
            Self::IIBlock { k, block } => {
                let mut w = vec![0, 1];
                w.extend(std::iter::repeat_n(0, 2 * (*k as usize - 1) + 1));
                w.extend(closed(block));
                w
            }
            Self::III => vec![1, 0, 0, 0],
            Self::IIIBlock { block } => [vec![0], closed(block)].concat(),
        })
    }

    /// Translation s with the constant quotient μ(E+s)/μE.
    pub fn shift(&self) -> GoldenNumber {
        match self {
            Self::I { .. } | Self::IBlock { .. } => lp(-1),
            _ => -lp(-2),
        }
    }

    /// The region as an interval.
    pub fn region(&self) -> Result<Interval, MeasureError> {
        let cyl = Interval::cylinder(&self.region_word()?)?;
        match self {
            Self::IIIBlock { .. } => cyl.translate(&lp(-2)),
            _ => Ok(cyl),
        }
    }

    /// Exact μ(E+s)/μE for E inside the region.
    pub fn quotient(&self, e: &Interval) -> Result<Q, MeasureError> {
        if !self.region()?.contains_interval(e) {
            return Err(MeasureError::NoSuchRegion(format!("{e:?} not in {self:?}")));
        }
        let m = mu_interval(e)?;
        if m.is_zero() {
            return Err(MeasureError::Empty);
        }
        Ok(mu_interval(&e.translate(&self.shift())?)? / m)
    }
}

pub fn density_r(case: &DensityCase) -> Result<Q, MeasureError> {
    case.value()
}

/// d(E) = μ(E + λ^{-2} mod 1)/μE, the density of the rotated measure.
pub fn density_d(e: &Interval) -> Result<Q, MeasureError> {
    let m = mu_interval(e)?;
    if m.is_zero() {
        return Err(MeasureError::Empty);
    }
    Ok(mu_shifted(e, &lp(-2))? / m)
}

pub fn density_t_formula(d: &Q) -> Q {
    (d + Q::one()) / q(2, 1)
}

/// dν/dμ from d(x) and, on the low band, d(x+λ^{-1}).
pub fn density_nu_mu_formula(band: Band, d: &Q, d_at_shift: Option<&Q>) -> Result<Q, MeasureError> {
    Ok(match band {
        Band::Low => {
            let ds = d_at_shift.ok_or(MeasureError::NoSuchRegion("low band needs d(x+λ^{-1})".into()))?;
            q(2, 3) + q(1, 3) * d + q(1, 6) / ds
        }
        Band::Mid => q(2, 3) + q(1, 3) * d,
        Band::High => q(1, 2) + q(1, 3) * d,
    })
}

/// μ(T^{-1}E)/μE.
pub fn density_t(e: &Interval) -> Result<Q, MeasureError> {
    let m = mu_interval(e)?;
    if m.is_zero() {
        return Err(MeasureError::Empty);
    }
    Ok(pushforward_t_mu(e, 1)? / m)
}

/// νE/μE on a band piece.
pub fn density_nu_mu(e: &Interval) -> Result<Q, MeasureError> {
    e.band()?;
    let m = mu_interval(e)?;
    if m.is_zero() {
        return Err(MeasureError::Empty);
    }
    Ok(nu_interval(e)? / m)
}

/// μ(λ^{-1}G + λ^{-2})/μ(λ^{-1}G) for G inside [λ^{-2n}, λ^{-2n+1}].
pub fn polymorphism_ratio(g: &Interval) -> Result<Q, MeasureError> {
    let n = polymorphism_band(g)?;
    let _ = n;
    let inner = Interval::new(g.lo.div_lambda(), g.hi.div_lambda())?;
    let m = mu_interval(&inner)?;
    if m.is_zero() {
        return Err(MeasureError::Empty);
    }
    Ok(mu_interval(&inner.translate(&lp(-2))?)? / m)
}

/// n with G ⊆ [λ^{-2n}, λ^{-2n+1}].
pub fn polymorphism_band(g: &Interval) -> Result<u32, MeasureError> {
    if g.is_empty() || g.lo.signum() <= 0 {
        return Err(MeasureError::StraddlesBands);
    }
    for n in 1..=200u32 {
        let lo = lp(-2 * n as i64);
        if g.lo >= lo {
            return if g.hi <= lp(-2 * n as i64 + 1) {
                Ok(n)
            } else {
                Err(MeasureError::StraddlesBands)
            };
        }
    }
    Err(MeasureError::StraddlesBands)
}

pub fn to_decimal(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn is_nonnegative(x: &Q) -> bool {
    !x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::level_frequencies;
    use crate::words::{enumerate_blocks, parse_bits};
    use proptest::prelude::*;

    fn b(s: &str) -> Vec<u8> {
        parse_bits(s).unwrap()
    }

    fn iv(lo: GoldenNumber, hi: GoldenNumber) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn admissible_words(n: usize) -> Vec<Vec<u8>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|w: Vec<u8>| {
                    let mut v = vec![[w.clone(), vec![0]].concat()];
                    if w.last() != Some(&1) {
                        v.push([w, vec![1]].concat());
                    }
                    v
                })
                .collect();
        }
        out
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(mu_cdf(&lp(-2)).unwrap(), q(1, 3));
        assert_eq!(mu_cdf(&lp(-1)).unwrap(), q(2, 3));
        assert_eq!(mu_cdf(&lp(-5)).unwrap(), q(1, 24));
        assert_eq!(mu_cdf(&GoldenNumber::zero()).unwrap(), Q::zero());
        assert_eq!(mu_cdf(&GoldenNumber::one()).unwrap(), Q::one());
        assert!(mu_cdf(&lp(1)).is_err());
        assert!(matches!(
            mu_cdf(&GoldenNumber::new(1, 0, 2).unwrap()),
            Err(MeasureError::UnsupportedExact(_))
        ));
    }

    #[test]
    fn zero_endpoint_asymptotics() {
        for n in 2..=30 {
            assert_eq!(mu_cdf(&lp(-n)).unwrap(), q(4, 3) / Q::from_integer(BigInt::one() << n));
        }
    }

    #[test]
    fn interval_examples() {
        assert_eq!(mu_interval(&iv(lp(-1), GoldenNumber::one())).unwrap(), q(1, 3));
        assert_eq!(mu_interval(&Interval::unit()).unwrap(), Q::one());
        assert_eq!(mu_interval(&iv(lp(-2), lp(-1))).unwrap(), q(1, 3));
        let t = level_frequencies(20).unwrap();
        let th = theta_approx(&iv(GoldenNumber::zero(), lp(-2)), &t);
        assert!((to_decimal(&th) - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn theta_converges() {
        let e = Interval::cylinder(&b("0100")).unwrap();
        let exact = to_decimal(&mu_interval(&e).unwrap());
        let mut t = crate::graph::LevelTable::root();
        for n in 1..=22 {
            t.advance();
            if n >= 10 {
                let err = (to_decimal(&theta_approx(&e, &t)) - exact).abs();
                assert!(err <= 2f64.powi(-n + 8), "n={n} err={err}");
            }
        }
    }

    #[test]
    fn nu_examples() {
        let one = GoldenNumber::one();
        let bands = [
            iv(GoldenNumber::zero(), lp(-2)),
            iv(lp(-2), lp(-1)),
            iv(lp(-1), one.clone()),
        ];
        let v: Vec<Q> = bands.iter().map(|e| nu_interval(e).unwrap()).collect();
        assert_eq!(v, vec![q(4, 9), q(5, 18), q(5, 18)]);
        assert_eq!(nu_interval(&Interval::unit()).unwrap(), Q::one());
    }

    #[test]
    fn pushforward_examples() {
        let e = iv(GoldenNumber::zero(), lp(-2));
        assert_eq!(pushforward_t_mu(&e, 0).unwrap(), q(1, 3));
        let sub = Interval::cylinder(&b("0010")).unwrap();
        let m = |s: &GoldenNumber| mu_shifted(&sub, s).unwrap();
        let (a, b2, c) = (m(&GoldenNumber::zero()), m(&lp(-2)), m(&lp(-1)));
        assert_eq!(pushforward_t_mu(&sub, 1).unwrap(), (&a + &b2) / q(2, 1));
        assert_eq!(
            pushforward_t_mu(&sub, 2).unwrap(),
            q(3, 4) * &a + q(1, 4) * &b2 + q(1, 4) * &c
        );
        assert_eq!(
            pushforward_t_mu(&sub, 3).unwrap(),
            q(5, 8) * &a + q(3, 8) * &b2 + q(1, 8) * &c
        );
    }

    #[test]
    fn pushforward_converges_to_nu() {
        for w in ["0100", "1001", "00101", "10"] {
            let e = Interval::cylinder(&b(w)).unwrap();
            let nu = nu_interval(&e).unwrap();
            for n in 1..=14u32 {
                let err = (pushforward_t_mu(&e, n).unwrap() - &nu).abs();
                assert!(to_decimal(&err) <= 2f64.powi(-(n as i32)), "{w} n={n}");
            }
        }
    }

    #[test]
    fn t_invariance_of_nu() {
        for w in admissible_words(7) {
            let e = Interval::cylinder(&w).unwrap();
            let pre: Q = t_preimage(&e).iter().map(|i| nu_interval(i).unwrap()).sum();
            assert_eq!(pre, nu_interval(&e).unwrap(), "{w:?}");
        }
    }

    #[test]
    fn eq_1_7_on_cylinders() {
        for w in admissible_words(8) {
            let e = Interval::cylinder(&w).unwrap();
            let lhs = pushforward_t_mu(&e, 1).unwrap();
            let rhs = (mu_interval(&e).unwrap() + mu_shifted(&e, &lp(-2)).unwrap()) / q(2, 1);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn block_law_examples() {
        let b1 = Block::new(vec![1]).unwrap();
        assert_eq!(block_cylinder_mu(&b1), q(1, 4));
        assert_eq!(block_class_mu(2), q(3, 16));
        assert_eq!(block_cylinder_m(&b1), lp(-3));
        let total: Q = (1..=60).map(block_class_mu).sum();
        assert!((to_decimal(&total) - 1.0).abs() < 1e-7);
        let total_m: f64 = (1..=60).map(|n| block_class_m(n).to_f64()).sum();
        assert!((total_m - 1.0).abs() < 1e-6);
        for n in 1..=8 {
            let s: Q = enumerate_blocks(n).iter().map(block_cylinder_mu).sum();
            assert_eq!(s, block_class_mu(n));
            let sm = enumerate_blocks(n)
                .iter()
                .fold(GoldenNumber::zero(), |acc, b| &acc + &block_cylinder_m(b));
            assert_eq!(sm, block_class_m(n));
        }
    }

    #[test]
    fn block_product_law() {
        let i0 = mu_interval(&iv(lp(-1), GoldenNumber::one())).unwrap();
        for n1 in 1..=3 {
            for n2 in 1..=3 {
                if 2 * (n1 + n2) + 2 > 14 {
                    continue;
                }
                for b1 in enumerate_blocks(n1) {
                    let first = mu_first_block(&b1).unwrap();
                    for b2 in enumerate_blocks(n2) {
                        let w = [b1.word(), b2.word(), vec![1]].concat();
                        let m = mu_interval(&Interval::cylinder(&w).unwrap()).unwrap();
                        assert_eq!(m, &first * &i0 * block_cylinder_mu(&b2), "{b1} {b2}");
                    }
                }
            }
        }
    }

    #[test]
    fn first_block_law_differs_from_stationary() {
        // B(2) = 10000: stationary 3/32, first block 1/8
        let b2 = Block::new(vec![2]).unwrap();
        assert_eq!(block_cylinder_mu(&b2), q(3, 32));
        assert_ne!(mu_first_block(&b2).unwrap(), block_cylinder_mu(&b2));
        for n in 1..=10 {
            let s: Q = enumerate_blocks(n).iter().map(|b| mu_first_block(b).unwrap()).sum();
            assert_eq!(s, q(1, 4) * q(3, 4).pow(n as i32 - 1));
        }
    }

    #[test]
    fn nu_first_block_examples() {
        assert_eq!(nu_first_block(&Block::new(vec![1]).unwrap()), q(1, 4));
        assert_eq!(nu_first_block(&Block::new(vec![1, 1]).unwrap()), q(7, 80));
        assert_eq!(nu_x0(), q(1, 9));
        let i0 = nu_interval(&iv(lp(-1), GoldenNumber::one())).unwrap();
        for n in 1..=4 {
            for blk in enumerate_blocks(n) {
                let w = [blk.word(), vec![1]].concat();
                let v = nu_interval(&Interval::cylinder(&w).unwrap()).unwrap();
                assert_eq!(v / &i0, nu_first_block(&blk));
            }
        }
        for k in 1..=8 {
            let mut w = vec![1];
            w.extend(vec![0; 2 * k as usize]);
            w.push(1);
            let v = nu_interval(&Interval::cylinder(&w).unwrap()).unwrap();
            assert_eq!(v, nu_x0_term(k));
        }
    }

    #[test]
    fn nu_positivity() {
        for r in 1..=10 {
            for w in admissible_words(r) {
                let v = nu_interval(&Interval::cylinder(&w).unwrap()).unwrap();
                assert!(v >= Q::new(BigInt::one(), BigInt::one() << (r + 3)), "{w:?}");
            }
        }
    }

    fn sub_cylinders(word: &[u8]) -> Vec<Interval> {
        let tails: &[&[u8]] = &[&[], &[0], &[0, 0], &[0, 1], &[0, 1, 0], &[0, 0, 1], &[0, 0, 0, 1, 0]];
        tails
            .iter()
            .map(|t| Interval::cylinder(&[word, t].concat()).unwrap())
            .collect()
    }

    fn check_case(case: DensityCase) {
        let region = case.region().unwrap();
        let want = case.value().unwrap();
        let word = case.region_word().unwrap();
        for sub in sub_cylinders(&word) {
            let sub = match case {
                DensityCase::IIIBlock { .. } => sub.translate(&lp(-2)).unwrap(),
                _ => sub,
            };
            assert!(region.contains_interval(&sub));
            assert_eq!(case.quotient(&sub).unwrap(), want, "{case:?}");
        }
    }

    #[test]
    fn density_examples() {
        assert_eq!(density_r(&DensityCase::I { k: 2 }).unwrap(), q(2, 1));
        let b1 = Block::new(vec![1]).unwrap();
        assert_eq!(density_r(&DensityCase::IBlock { k: 1, block: b1.clone() }).unwrap(), q(3, 2));
        assert_eq!(density_r(&DensityCase::IIIBlock { block: b1 }).unwrap(), q(2, 1));
        assert!(density_r(&DensityCase::II { k: 1 }).is_err());
        assert_eq!(density_t_formula(&q(2, 1)), q(3, 2));
        assert_eq!(density_nu_mu_formula(Band::Mid, &q(3, 2), None).unwrap(), q(7, 6));
    }

    #[test]
    fn density_cases_match_quotients() {
        let blocks: Vec<Block> = (1..=4)
            .flat_map(enumerate_blocks)
            .filter(|b| b.parts().len() <= 3)
            .collect();
        for k in 1..=5 {
            check_case(DensityCase::I { k });
            for blk in &blocks {
                check_case(DensityCase::IBlock { k, block: blk.clone() });
                check_case(DensityCase::IIBlock { k, block: blk.clone() });
            }
        }
        for k in 2..=5 {
            check_case(DensityCase::II { k });
        }
        check_case(DensityCase::III);
        for blk in &blocks {
            check_case(DensityCase::IIIBlock { block: blk.clone() });
        }
    }

    #[test]
    fn printed_case_i_band_is_off_by_one() {
        // on (λ^{-4}, λ^{-3}) the exact quotient is 1, not 2
        let e = Interval::cylinder(&b("0001")).unwrap();
        assert_eq!(e, iv(lp(-4), lp(-3)));
        let r = mu_interval(&e.translate(&lp(-1)).unwrap()).unwrap() / mu_interval(&e).unwrap();
        assert_eq!(r, Q::one());
    }

    #[test]
    fn density_t_and_nu_mu() {
        for w in admissible_words(6) {
            let e = Interval::cylinder(&w).unwrap();
            let Ok(band) = e.band() else { continue };
            let d = density_d(&e).unwrap();
            assert_eq!(density_t(&e).unwrap(), density_t_formula(&d));
            let ds = match band {
                Band::Low => Some(density_d(&e.translate(&lp(-1)).unwrap()).unwrap()),
                _ => None,
            };
            assert_eq!(density_nu_mu(&e).unwrap(), density_nu_mu_formula(band, &d, ds.as_ref()).unwrap());
        }
        for depth in 1..=8 {
            let total: Q = admissible_words(depth)
                .iter()
                .flat_map(|w| Interval::cylinder(w).unwrap().split_bands())
                .map(|e| {
                    let m = mu_interval(&e).unwrap();
                    if m.is_zero() {
                        Q::zero()
                    } else {
                        density_nu_mu(&e).unwrap() * m
                    }
                })
                .sum();
            assert_eq!(total, Q::one());
        }
    }

    #[test]
    fn polymorphism_examples() {
        for n in 1..=4u32 {
            let base = {
                let mut w = vec![0; 2 * n as usize - 1];
                w.push(1);
                w
            };
            for tail in [vec![], vec![0], vec![0, 1], vec![0, 0, 1], vec![0, 1, 0, 1]] {
                let g = Interval::cylinder(&[base.clone(), tail].concat()).unwrap();
                assert_eq!(polymorphism_band(&g).unwrap(), n);
                assert_eq!(polymorphism_ratio(&g).unwrap(), q(n as i64, 1));
            }
        }
        let straddle = iv(lp(-3), lp(-1));
        assert!(polymorphism_ratio(&straddle).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn eq_1_7_random(w in prop::collection::vec(0u8..2, 1..12), extra in 0u8..3) {
            let mut w = w;
            for i in 1..w.len() {
                if w[i - 1] == 1 { w[i] = 0; }
            }
            let lo = value(&w);
            let width = lp(-(w.len() as i64) - 1 - extra as i64);
            let hi = &lo + &width;
            prop_assume!(hi <= GoldenNumber::one());
            let e = iv(lo, hi);
            let lhs = pushforward_t_mu(&e, 1).unwrap();
            let rhs = (mu_interval(&e).unwrap() + mu_shifted(&e, &lp(-2)).unwrap()) / q(2, 1);
            prop_assert_eq!(lhs, rhs);
            let pre: Q = t_preimage(&e).iter().map(|i| nu_interval(i).unwrap()).sum();
            prop_assert_eq!(pre, nu_interval(&e).unwrap());
        }
    }
}
