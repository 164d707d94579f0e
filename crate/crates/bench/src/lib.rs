//! Fixtures shared by the benchmarks.

use goldenshift::goldfield::GoldenNumber;

/// Deterministic admissible word of length `len` (xorshift bits, no 11).
pub fn admissible_word(seed: u64, len: usize) -> Vec<u8> {
    let mut s = seed.max(1);
    let mut w = Vec::with_capacity(len);
    for _ in 0..len {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        let d = if w.last() == Some(&1) { 0 } else { (s & 1) as u8 };
        w.push(d);
    }
    w
}

/// Deterministic 0-1 word with no admissibility constraint.
pub fn raw_word(seed: u64, len: usize) -> Vec<u8> {
    let mut s = seed.max(1);
    (0..len)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s & 1) as u8
        })
        .collect()
}

/// Points λ^{-k}, k = 2..=n, as exact golden numbers.
pub fn lambda_powers(n: i64) -> Vec<GoldenNumber> {
    (2..=n).map(|k| GoldenNumber::lambda_pow(-k)).collect()
}
