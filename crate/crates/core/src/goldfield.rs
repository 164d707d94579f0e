//! Exact arithmetic in Q(λ), λ = (1+√5)/2.
//!
//! A [`GoldenNumber`] is stored as `(m + nλ)/d` in lowest terms with `d > 0`.
//! Comparisons, floors and reductions mod 1 use integer arithmetic only.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Floating value of λ, for estimates and reporting only.
pub const LAMBDA_F64: f64 = 1.618_033_988_749_895;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("argument must be positive, got {0}")]
    NonPositive(i64),
    #[error("cannot parse golden number `{0}`")]
    Parse(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GoldenNumber {
    m: BigInt,
    n: BigInt,
    d: BigInt,
}

impl GoldenNumber {
    pub fn new(
        m: impl Into<BigInt>,
        n: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Result<Self, FieldError> {
        let d = d.into();
        if d.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        Ok(Self::canonical(m.into(), n.into(), d))
    }

    /// `a + bλ`, an element of Z[λ].
    pub fn from_zl(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        Self {
            m: a.into(),
            n: b.into(),
            d: BigInt::one(),
        }
    }

    pub fn integer(a: impl Into<BigInt>) -> Self {
        Self::from_zl(a, 0)
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn one() -> Self {
        Self::integer(1)
    }

    pub fn lambda() -> Self {
        Self::from_zl(0, 1)
    }

    /// √5 = 2λ − 1.
    pub fn sqrt5() -> Self {
        Self::from_zl(-1, 2)
    }

    /// 1/√5 = (2λ − 1)/5.
    pub fn inv_sqrt5() -> Self {
        Self::canonical(BigInt::from(-1), BigInt::from(2), BigInt::from(5))
    }

    /// λ^k for any integer k.
    pub fn lambda_pow(k: i64) -> Self {
        let mut a = BigInt::one();
        let mut b = BigInt::zero();
        if k >= 0 {
            for _ in 0..k {
                // (a + bλ)λ = b + (a+b)λ
                let nb = &a + &b;
                a = std::mem::replace(&mut b, nb);
            }
        } else {
            for _ in 0..(-k) {
                // (a + bλ)/λ = (b − a) + aλ
                let na = &b - &a;
                b = std::mem::replace(&mut a, na);
            }
        }
        Self::from_zl(a, b)
    }

    fn canonical(mut m: BigInt, mut n: BigInt, mut d: BigInt) -> Self {
        if m.is_zero() && n.is_zero() {
            return Self::zero();
        }
        let g = m.gcd(&n).gcd(&d);
        if !g.is_one() {
            m /= &g;
            n /= &g;
            d /= &g;
        }
        if d.is_negative() {
            m = -m;
            n = -n;
            d = -d;
        }
        Self { m, n, d }
    }

    pub fn m(&self) -> &BigInt {
        &self.m
    }

    pub fn n(&self) -> &BigInt {
        &self.n
    }

    pub fn d(&self) -> &BigInt {
        &self.d
    }

    /// True when the number lies in Z[λ].
    pub fn is_integral(&self) -> bool {
        self.d.is_one()
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero() && self.n.is_zero()
    }

    /// Galois conjugate, λ ↦ 1 − λ.
    pub fn conj(&self) -> Self {
        Self::canonical(&self.m + &self.n, -&self.n, self.d.clone())
    }

    pub fn trace(&self) -> BigRational {
        BigRational::new(BigInt::from(2) * &self.m + &self.n, self.d.clone())
    }

    pub fn norm(&self) -> BigRational {
        let num = &self.m * &self.m + &self.m * &self.n - &self.n * &self.n;
        BigRational::new(num, &self.d * &self.d)
    }

    pub fn inv(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let n0 = &self.m * &self.m + &self.m * &self.n - &self.n * &self.n;
        Ok(Self::canonical(
            &self.d * (&self.m + &self.n),
            -(&self.d * &self.n),
            n0,
        ))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, FieldError> {
        Ok(self * &rhs.inv()?)
    }

    pub fn mul_lambda(&self) -> Self {
        Self::canonical(self.n.clone(), &self.m + &self.n, self.d.clone())
    }

    pub fn div_lambda(&self) -> Self {
        Self::canonical(&self.n - &self.m, self.m.clone(), self.d.clone())
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self::canonical(
            &self.m * r.numer(),
            &self.n * r.numer(),
            &self.d * r.denom(),
        )
    }

    /// Sign of the real embedding.
    pub fn signum(&self) -> i8 {
        // value·2d = p + q√5
        let p = BigInt::from(2) * &self.m + &self.n;
        let q = &self.n;
        sign_p_q_sqrt5(&p, q)
    }

    /// floor of the real embedding.
    pub fn floor(&self) -> BigInt {
        let p = BigInt::from(2) * &self.m + &self.n;
        let q = &self.n;
        let five_q2 = BigInt::from(5) * q * q;
        let t = if q.is_negative() {
            -(Roots::sqrt(&five_q2) + BigInt::one())
        } else {
            Roots::sqrt(&five_q2)
        };
        let two_d = BigInt::from(2) * &self.d;
        let c = (p + t).div_floor(&two_d);
        let next = self - &Self::integer(&c + 1);
        if next.signum() >= 0 {
            c + 1
        } else {
            c
        }
    }

    pub fn mod1(&self) -> Self {
        self - &Self::integer(self.floor())
    }

    /// Nearest f64 to the real embedding (cancellation handled through the conjugate).
    pub fn to_f64(&self) -> f64 {
        let p = BigInt::from(2) * &self.m + &self.n;
        let q = &self.n;
        let two_d = BigInt::from(2) * &self.d;
        let s5 = 5f64.sqrt();
        if p.is_negative() == q.is_negative() || p.is_zero() || q.is_zero() {
            let pf = BigRational::new(p, two_d.clone()).to_f64().unwrap_or(f64::NAN);
            let qf = BigRational::new(q.clone(), two_d).to_f64().unwrap_or(f64::NAN);
            pf + qf * s5
        } else {
            // p + q√5 = (p² − 5q²)/(p − q√5)
            let num = &p * &p - BigInt::from(5) * q * q;
            let scale = p.abs().max(q.abs());
            let pf = BigRational::new(p, scale.clone()).to_f64().unwrap_or(f64::NAN);
            let qf = BigRational::new(q.clone(), scale.clone()).to_f64().unwrap_or(f64::NAN);
            let den = pf - qf * s5;
            BigRational::new(num, scale * two_d)
                .to_f64()
                .unwrap_or(f64::NAN)
                / den
        }
    }

    /// As a rational, if the λ-coefficient vanishes.
    pub fn to_rational(&self) -> Option<BigRational> {
        self.n
            .is_zero()
            .then(|| BigRational::new(self.m.clone(), self.d.clone()))
    }
}

/// Sign of p + q√5 with integers only.
fn sign_p_q_sqrt5(p: &BigInt, q: &BigInt) -> i8 {
    let sp = p.signum();
    let sq = q.signum();
    let (sp, sq) = (
        sp.to_i8().unwrap_or_default(),
        sq.to_i8().unwrap_or_default(),
    );
    if sp >= 0 && sq >= 0 {
        return if sp > 0 || sq > 0 { 1 } else { 0 };
    }
    if sp <= 0 && sq <= 0 {
        return -1;
    }
    let p2 = p * p;
    let q2 = BigInt::from(5) * q * q;
    match p2.cmp(&q2) {
        Ordering::Greater => sp,
        _ => sq,
    }
}

impl PartialOrd for GoldenNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GoldenNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum().cmp(&0)
    }
}

impl<'a> Add<&'a GoldenNumber> for &'a GoldenNumber {
    type Output = GoldenNumber;
    fn add(self, rhs: &GoldenNumber) -> GoldenNumber {
        if self.d == rhs.d {
            return GoldenNumber::canonical(&self.m + &rhs.m, &self.n + &rhs.n, self.d.clone());
        }
        GoldenNumber::canonical(
            &self.m * &rhs.d + &rhs.m * &self.d,
            &self.n * &rhs.d + &rhs.n * &self.d,
            &self.d * &rhs.d,
        )
    }
}

impl<'a> Sub<&'a GoldenNumber> for &'a GoldenNumber {
    type Output = GoldenNumber;
    fn sub(self, rhs: &GoldenNumber) -> GoldenNumber {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a GoldenNumber> for &'a GoldenNumber {
    type Output = GoldenNumber;
    fn mul(self, rhs: &GoldenNumber) -> GoldenNumber {
        let nn = &self.n * &rhs.n;
        GoldenNumber::canonical(
            &self.m * &rhs.m + &nn,
            &self.m * &rhs.n + &self.n * &rhs.m + nn,
            &self.d * &rhs.d,
        )
    }
}

impl Neg for &GoldenNumber {
    type Output = GoldenNumber;
    fn neg(self) -> GoldenNumber {
        GoldenNumber {
            m: -&self.m,
            n: -&self.n,
            d: self.d.clone(),
        }
    }
}

impl Neg for GoldenNumber {
    type Output = GoldenNumber;
    fn neg(self) -> GoldenNumber {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<GoldenNumber> for GoldenNumber {
            type Output = GoldenNumber;
            fn $f(self, rhs: GoldenNumber) -> GoldenNumber {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a GoldenNumber> for GoldenNumber {
            type Output = GoldenNumber;
            fn $f(self, rhs: &GoldenNumber) -> GoldenNumber {
                (&self).$f(rhs)
            }
        }
        impl<'a> $tr<GoldenNumber> for &'a GoldenNumber {
            type Output = GoldenNumber;
            fn $f(self, rhs: GoldenNumber) -> GoldenNumber {
                self.$f(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl From<i64> for GoldenNumber {
    fn from(v: i64) -> Self {
        Self::integer(v)
    }
}

impl fmt::Display for GoldenNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = match (self.m.is_zero(), self.n.is_zero()) {
            (_, true) => self.m.to_string(),
            (true, false) => coef_l(&self.n),
            (false, false) => {
                let l = coef_l(&self.n.abs());
                let op = if self.n.is_negative() { '-' } else { '+' };
                format!("{}{}{}", self.m, op, l)
            }
        };
        if self.d.is_one() {
            write!(f, "{body}")
        } else if self.n.is_zero() || self.m.is_zero() {
            write!(f, "{body}/{}", self.d)
        } else {
            write!(f, "({body})/{}", self.d)
        }
    }
}

fn coef_l(n: &BigInt) -> String {
    if n.is_one() {
        "L".into()
    } else if *n == BigInt::from(-1) {
        "-L".into()
    } else {
        format!("{n}*L")
    }
}

impl fmt::Debug for GoldenNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Grammar: `expr [/ int]`, where `expr` is a signed sum of terms
/// `int`, `int*L`, `L`, `L^k`, `int*L^k`, optionally parenthesised.
/// A leading `.` reads a 0-1 digit string as Σ ε_k λ^{-k}.
impl FromStr for GoldenNumber {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || FieldError::Parse(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(digits) = t.strip_prefix('.') {
            if digits.is_empty() || !digits.chars().all(|c| c == '0' || c == '1') {
                return Err(err());
            }
            let mut v = Self::zero();
            for c in digits.chars().rev() {
                if c == '1' {
                    v = &v + &Self::one();
                }
                v = v.div_lambda();
            }
            return Ok(v);
        }
        let (expr, den) = match t.rfind('/') {
            Some(i) => {
                let d: BigInt = t[i + 1..].parse().map_err(|_| err())?;
                (&t[..i], d)
            }
            None => (t.as_str(), BigInt::one()),
        };
        let expr = expr
            .strip_prefix('(')
            .and_then(|e| e.strip_suffix(')'))
            .unwrap_or(expr);
        if expr.is_empty() {
            return Err(err());
        }
        let mut acc = Self::zero();
        let mut rest = expr;
        while !rest.is_empty() {
            let (neg, body) = match rest.as_bytes()[0] {
                b'+' => (false, &rest[1..]),
                b'-' => (true, &rest[1..]),
                _ => (false, rest),
            };
            let end = body[1.min(body.len())..]
                .find(['+', '-'])
                .map(|i| i + 1)
                .unwrap_or(body.len());
            // `L^-2`: the minus belongs to the exponent
            let end = if end < body.len() && body[..end].ends_with('^') {
                body[end + 1..]
                    .find(['+', '-'])
                    .map(|i| i + end + 1)
                    .unwrap_or(body.len())
            } else {
                end
            };
            let term = parse_term(&body[..end]).ok_or_else(err)?;
            acc = if neg { &acc - &term } else { &acc + &term };
            rest = &body[end..];
        }
        let d = Self::integer(den);
        acc.checked_div(&d).map_err(|_| err())
    }
}

fn parse_term(t: &str) -> Option<GoldenNumber> {
    if t.is_empty() {
        return None;
    }
    let (coef, lpart) = match t.find('L') {
        None => return t.parse::<BigInt>().ok().map(GoldenNumber::integer),
        Some(i) => {
            let c = t[..i].strip_suffix('*').unwrap_or(&t[..i]);
            let c = if c.is_empty() {
                BigInt::one()
            } else {
                c.parse::<BigInt>().ok()?
            };
            (c, &t[i + 1..])
        }
    };
    let k: i64 = if lpart.is_empty() {
        1
    } else {
        lpart.strip_prefix('^')?.parse().ok()?
    };
    Some(&GoldenNumber::integer(coef) * &GoldenNumber::lambda_pow(k))
}

/// Fibonacci numbers in the paper's indexing, F_0 = F_1 = 1, F_2 = 2.
/// Classical indexing (F'_0 = 0, F'_1 = 1) appears only in [`fib_classical`].
#[derive(Debug, Clone)]
pub struct FibSeq {
    fib: Vec<BigInt>,
    lucas: Vec<BigInt>,
}

impl FibSeq {
    pub fn new(len: usize) -> Self {
        let len = len.max(2);
        let mut fib = vec![BigInt::one(), BigInt::one()];
        let mut lucas = vec![BigInt::from(2), BigInt::one()];
        while fib.len() < len {
            let k = fib.len();
            fib.push(&fib[k - 1] + &fib[k - 2]);
            lucas.push(&lucas[k - 1] + &lucas[k - 2]);
        }
        Self { fib, lucas }
    }

    /// F_k (paper indexing).
    pub fn fib(&self, k: usize) -> &BigInt {
        &self.fib[k]
    }

    /// Lucas L_k, L_0 = 2, L_1 = 1.
    pub fn lucas(&self, k: usize) -> &BigInt {
        &self.lucas[k]
    }

    pub fn len(&self) -> usize {
        self.fib.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fib.is_empty()
    }
}

/// F_k in the paper's indexing.
pub fn fib(k: usize) -> BigInt {
    let (mut a, mut b) = (BigInt::one(), BigInt::one());
    for _ in 0..k {
        let c = &a + &b;
        a = std::mem::replace(&mut b, c);
    }
    a
}

/// F_k as u64 (paper indexing); valid for k ≤ 91.
pub fn fib_u64(k: usize) -> u64 {
    let (mut a, mut b) = (1u64, 1u64);
    for _ in 0..k {
        let c = a + b;
        a = b;
        b = c;
    }
    a
}

/// Classical Fibonacci F'_k, F'_0 = 0, F'_1 = 1.
pub fn fib_classical(k: usize) -> BigInt {
    if k == 0 {
        BigInt::zero()
    } else {
        fib(k - 1)
    }
}

pub fn lucas(k: usize) -> BigInt {
    let (mut a, mut b) = (BigInt::from(2), BigInt::one());
    for _ in 0..k {
        let c = &a + &b;
        a = std::mem::replace(&mut b, c);
    }
    a
}

/// Zeckendorf digits (ε_1, …, ε_k) of N with N = Σ ε_i F_i.
pub fn zeckendorf(n: u64) -> Result<Vec<u8>, FieldError> {
    if n == 0 {
        return Err(FieldError::NonPositive(0));
    }
    let mut fibs = vec![1u64, 2];
    while let Some(next) = fibs[fibs.len() - 1].checked_add(fibs[fibs.len() - 2]) {
        if next > n {
            break;
        }
        fibs.push(next);
    }
    // fibs[i] = F_{i+1}
    let mut top = fibs.iter().rposition(|&f| f <= n).unwrap_or(0);
    let mut digits = vec![0u8; top + 1];
    let mut rest = n;
    loop {
        digits[top] = 1;
        rest -= fibs[top];
        if rest == 0 {
            break;
        }
        top = fibs[..top.saturating_sub(1)]
            .iter()
            .rposition(|&f| f <= rest)
            .expect("greedy remainder below F_1");
    }
    Ok(digits)
}

/// Class 𝓕: ε_1 = 1 and every even-indexed Zeckendorf digit vanishes.
pub fn in_class_f(n: u64) -> bool {
    match zeckendorf(n) {
        Ok(z) => z[0] == 1 && z.iter().skip(1).step_by(2).all(|&e| e == 0),
        Err(_) => false,
    }
}

/// All (u, v), 0 ≤ u ≤ bound, v ≥ 0, with u² − 5v² = ±4, by increasing u.
///
/// These are exactly (L_k, F'_k), since u + v√5 = 2λ^k.
pub fn pell_solutions(bound: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let (mut l0, mut l1) = (2u64, 1u64);
    let (mut f0, mut f1) = (0u64, 1u64);
    while l0 <= bound {
        out.push((l0, f0));
        let (l2, f2) = (l0 + l1, f0 + f1);
        (l0, l1) = (l1, l2);
        (f0, f1) = (f1, f2);
    }
    out.sort_unstable();
    out
}

/// ξ = (m + nλ)/5 lies in the group G iff 2n − m ≡ 0 (mod 5).
pub fn in_group_g(m: i64, n: i64) -> bool {
    (2 * n as i128 - m as i128).rem_euclid(5) == 0
}

/// Returns (s, k) with ξ = s·λ^k/√5 for ξ = (m + nλ)/5, or None.
pub fn classify_xi(m: i64, n: i64) -> Option<(i8, i64)> {
    if !in_group_g(m, n) || (m == 0 && n == 0) {
        return None;
    }
    let xi = GoldenNumber::new(m, n, 5).ok()?;
    // ξ√5 must be a unit of Z[λ]
    let u = &xi * &GoldenNumber::sqrt5();
    if !u.is_integral() {
        return None;
    }
    let nm = u.norm();
    if !(nm.is_one() || nm == -BigRational::one()) {
        return None;
    }
    let s: i8 = u.signum();
    let mut v = if s < 0 { -u } else { u };
    let one = GoldenNumber::one();
    let mut k = 0i64;
    while v > GoldenNumber::lambda() {
        v = v.div_lambda();
        k += 1;
    }
    while v < one {
        v = v.mul_lambda();
        k -= 1;
    }
    if v > one {
        v = v.div_lambda();
        k += 1;
    }
    (v == one).then_some((s, k))
}
