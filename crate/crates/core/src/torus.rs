//! Arithmetic coding of the Fibonacci automorphism on finite-support words.

use std::fmt;

use thiserror::Error;

use crate::goldfield::{classify_xi, in_group_g, GoldenNumber};
use crate::words::{normalize_multiset, TwoSidedWord};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TorusError {
    #[error("word is not admissible")]
    NotAdmissible,
    #[error("ξ = ({0} + {1}λ)/5 is not in G")]
    NotInGroup(i64, i64),
    #[error("kernel index {0} outside 0..=3")]
    KernelIndex(u8),
    #[error("k = {0} must be at least 2")]
    FibIndex(i64),
}

/// A point of T², each coordinate reduced to [0,1).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusPoint {
    pub x: GoldenNumber,
    pub y: GoldenNumber,
}

impl TorusPoint {
    pub fn new(x: GoldenNumber, y: GoldenNumber) -> Self {
        Self { x: x.mod1(), y: y.mod1() }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(&self.x + &o.x, &self.y + &o.y)
    }

    /// Sup-norm distance to the origin.
    pub fn norm(&self) -> f64 {
        let d = |v: &GoldenNumber| {
            let f = v.to_f64();
            f.min(1.0 - f)
        };
        d(&self.x).max(d(&self.y))
    }

    pub fn distance(&self, o: &Self) -> f64 {
        Self::new(&self.x - &o.x, &self.y - &o.y).norm()
    }
}

impl fmt::Display for TorusPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

fn check(w: &TwoSidedWord) -> Result<(), TorusError> {
    if w.is_admissible() {
        Ok(())
    } else {
        Err(TorusError::NotAdmissible)
    }
}

fn weighted(w: &TwoSidedWord, xi: &GoldenNumber) -> TorusPoint {
    let v = &w.value() * xi;
    TorusPoint::new(v.clone(), v.div_lambda())
}

/// (Σ ε_k λ^{-k}, Σ ε_k λ^{-k-1}) mod 1.
pub fn ell(w: &TwoSidedWord) -> Result<TorusPoint, TorusError> {
    check(w)?;
    Ok(weighted(w, &GoldenNumber::one()))
}

/// As `ell` with every weight divided by √5.
pub fn l_map(w: &TwoSidedWord) -> Result<TorusPoint, TorusError> {
    check(w)?;
    Ok(weighted(w, &GoldenNumber::inv_sqrt5()))
}

/// P(e_n) = e_{n-1} + e_{n+1}, extended additively and normalized.
pub fn p_map(w: &TwoSidedWord) -> TwoSidedWord {
    normalize_multiset(w.support().iter().flat_map(|&k| [k - 1, k + 1]))
}

/// A(x, y) = (x + 2y, 2x − y).
pub fn a_map(p: &TorusPoint) -> TorusPoint {
    let two = GoldenNumber::from(2);
    TorusPoint::new(&p.x + &(&two * &p.y), &(&two * &p.x) - &p.y)
}

/// T̃(x, y) = (x + y, x).
pub fn t_map(p: &TorusPoint) -> TorusPoint {
    TorusPoint::new(&p.x + &p.y, p.x.clone())
}

/// Support of the truncated kernel element τ̃^j(0.100)^∞ over periods m ∈ [−t, t].
pub fn kernel_element(j: u8, t: u32) -> Result<TwoSidedWord, TorusError> {
    if j > 3 {
        return Err(TorusError::KernelIndex(j));
    }
    let t = t as i64;
    Ok(TwoSidedWord::new((-t..=t).map(|m| 1 - j as i64 + 4 * m)))
}

/// Torus distance from ell(ε^{(j)} truncated to `periods`) to the origin.
pub fn kernel_probe(j: u8, periods: u32) -> Result<f64, TorusError> {
    Ok(ell(&kernel_element(j, periods)?)?.norm())
}

/// The admissible two-sided word of F_k (F_0 = F_1 = 1).
pub fn fib_two_sided(k: i64) -> Result<TwoSidedWord, TorusError> {
    if k < 2 {
        return Err(TorusError::FibIndex(k));
    }
    let (stop, last) = if k % 2 == 0 { (-k + 3, -k) } else { (-k + 5, -k + 1) };
    let mut exps = Vec::new();
    let mut e = k - 1;
    while e >= stop {
        exps.push(e);
        e -= 4;
    }
    exps.push(last);
    Ok(TwoSidedWord::new(exps.into_iter().map(|e| -e)))
}

/// (Σ ε_k ξλ^{-k}, Σ ε_k ξλ^{-k-1}) mod 1 for ξ = (m + nλ)/5 ∈ G.
pub fn xi_map(m: i64, n: i64, w: &TwoSidedWord) -> Result<TorusPoint, TorusError> {
    if !in_group_g(m, n) {
        return Err(TorusError::NotInGroup(m, n));
    }
    check(w)?;
    let xi = GoldenNumber::new(m, n, 5).expect("nonzero");
    Ok(weighted(w, &xi))
}

/// One-to-one a.e. exactly for ξ = ±λ^k/√5.
pub fn xi_bijective(m: i64, n: i64) -> Result<bool, TorusError> {
    if !in_group_g(m, n) {
        return Err(TorusError::NotInGroup(m, n));
    }
    Ok(classify_xi(m, n).is_some())
}

/// w plus each truncated kernel element, normalized: five words with
/// (approximately) the same ell-image.
pub fn kernel_fiber(w: &TwoSidedWord, periods: u32) -> Vec<TwoSidedWord> {
    let mut out = vec![w.clone()];
    for j in 0..4 {
        let k = kernel_element(j, periods).expect("index in range");
        out.push(normalize_multiset(w.support().iter().chain(k.support().iter()).copied()));
    }
    out
}
