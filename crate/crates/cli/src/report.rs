//! The reproduction report: reference constants with pass/fail.

use goldenshift::dynamics::{chi_square_independence, estimate_dimension, simulate_block_stats};
use goldenshift::entropy::{self, MeasureKind};
use goldenshift::goldfield::{fib, GoldenNumber, LAMBDA_F64};
use goldenshift::graph::{brute_table, phi_frequencies, LevelTable};
use goldenshift::measures::{mu_cdf, mu_interval, nu_interval, nu_x0, pushforward_t_mu, DensityCase, Interval, Q};
use goldenshift::torus::{fib_two_sided, kernel_probe};
use goldenshift::words::{cardinality, enumerate_blocks, equivalence_class};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};

use crate::output::Record;
use crate::CliError;

fn row(id: u32, quantity: &str, value: String, target: &str, pass: bool) -> Record {
    Record::new()
        .with("criterion", id)
        .with("quantity", quantity)
        .with("value", value)
        .with("target", target)
        .with("pass", pass)
}

fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn lp(k: i64) -> GoldenNumber {
    GoldenNumber::lambda_pow(k)
}

pub fn report(seed: u64, blocks: u64) -> Result<Vec<Record>, CliError> {
    let mut rows = Vec::new();

    let ok = (1..=8).all(|n| {
        enumerate_blocks(n).iter().all(|b| {
            let w = b.word();
            let oracle = equivalence_class(&w).map(|c| c.len() as u128).ok();
            oracle.is_some() && oracle == cardinality(&w).ok() && oracle == Some(b.cardinality() as u128)
        })
    });
    rows.push(row(1, "f(B) = p+q, |B| ≤ 17", ok.to_string(), "true", ok));

    let ok = (1..=20u32).all(|n| {
        let bs = enumerate_blocks(n);
        bs.len() == 1 << (n - 1) && bs.iter().map(|b| b.cardinality()).sum::<u64>() == 2 * 3u64.pow(n - 1)
    });
    rows.push(row(2, "block census n ≤ 20", ok.to_string(), "true", ok));

    let mut t = LevelTable::root();
    let mut ok = true;
    for n in 1..=30u32 {
        t.advance();
        if n <= 16 {
            ok &= brute_table(n)? == t.counts();
        }
        ok &= t.mass() == 1u64 << n;
    }
    rows.push(row(3, "f_n = brute (n ≤ 16), Σf_n = 2^n (n ≤ 30)", ok.to_string(), "true", ok));

    let bands = [
        Interval::new(GoldenNumber::zero(), lp(-2))?,
        Interval::new(lp(-2), lp(-1))?,
        Interval::new(lp(-1), GoldenNumber::one())?,
    ];
    let mus: Vec<String> = bands.iter().map(|e| mu_interval(e).map(|v| v.to_string())).collect::<Result<_, _>>()?;
    rows.push(row(4, "μ bands", mus.join(" "), "1/3 1/3 1/3", mus.iter().all(|m| m == "1/3")));
    let ok = (2..=30).all(|n| mu_cdf(&lp(-n)).ok() == Some(q(4, 3) / Q::from_integer(BigInt::one() << n)));
    rows.push(row(4, "μ[0,λ^-n) = (4/3)2^-n", ok.to_string(), "true", ok));
    let nus: Vec<String> = bands.iter().map(|e| nu_interval(e).map(|v| v.to_string())).collect::<Result<_, _>>()?;
    rows.push(row(4, "ν bands", nus.join(" "), "4/9 5/18 5/18", nus == ["4/9", "5/18", "5/18"]));
    rows.push(row(4, "ν̃X̃_0", nu_x0().to_string(), "1/9", nu_x0() == q(1, 9)));

    let e = Interval::cylinder(&[0, 1, 0, 0])?;
    let nu = nu_interval(&e)?;
    let c: f64 = (1..=20u32)
        .map(|n| {
            pushforward_t_mu(&e, n)
                .map(|m| (m - &nu).abs().to_f64().unwrap_or(f64::NAN) * 2f64.powi(n as i32))
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    rows.push(row(5, "C in |μT^-nE − νE| ≤ C2^-n, E = [0100]", format!("{c:.6}"), "finite", c.is_finite()));

    let exact = entropy::h_m_s();
    let gap = (entropy::h_m_s_partial(60) - exact.to_f64()).abs();
    let target = &(&GoldenNumber::from(4) * &GoldenNumber::lambda()) + &GoldenNumber::from(3);
    rows.push(row(6, "h_m(S) closed form", exact.to_string(), "3+4*L", exact == target));
    rows.push(row(6, "h_m(S) partial(60) gap", format!("{gap:.3e}"), "≤ 1e-8", gap <= 1e-8));
    let ks = entropy::k_series(26)?;
    let h = entropy::h_mu_from_k(&ks);
    rows.push(row(
        6,
        "H_μ(26) bracket",
        format!("[{:.6}, {:.6}]", h.lower, h.upper),
        "∋ 0.995713, width ≤ 3e-3",
        h.contains(0.995713) && h.width() <= 3e-3,
    ));
    let hs = entropy::h_mu_s(26)?;
    rows.push(row(
        6,
        "h_μ(S)(26) bracket",
        format!("[{:.6}, {:.6}]", hs.lower, hs.upper),
        "∋ 8.961417, = 9H_μ",
        hs.contains(8.961417) && (hs.estimate - 9.0 * h.estimate).abs() <= 1e-12,
    ));
    let lam = entropy::big_lambda();
    let (elo, ehi) = (lam - h.upper, lam - h.lower);
    rows.push(row(6, "E_μ bracket", format!("[{elo:.5}, {ehi:.5}]"), "∋ 0.44469", elo <= 0.44469 && 0.44469 <= ehi));

    let phi = phi_frequencies(3)?;
    rows.push(row(7, "phi_frequencies(3)", format!("{phi:?}"), "[4, 5, 5, 4]", phi == [4, 5, 5, 4]));

    let er = simulate_block_stats(MeasureKind::Erdos, seed, blocks)?;
    let le = simulate_block_stats(MeasureKind::Lebesgue, seed, blocks)?;
    rows.push(row(8, "P̂(B(1))", format!("{:.5}", er.p_b1.value), "0.250 ± 0.0013", er.p_b1.within(0.25, 0.0013)));
    rows.push(row(8, "mean |B| (erdos)", format!("{:.4}", er.mean_length.value), "9 ± 0.03", er.mean_length.within(9.0, 0.03)));
    rows.push(row(
        8,
        "mean |B| (lebesgue)",
        format!("{:.4}", le.mean_length.value),
        "9.472 ± 0.05",
        le.mean_length.within(9.472, 0.05),
    ));
    rows.push(row(
        8,
        "block-start frequency",
        format!("{:.5}", er.block_start_frequency.value),
        "1/9 ± 0.002",
        er.block_start_frequency.within(1.0 / 9.0, 0.002),
    ));
    rows.push(row(8, "E_μ estimate", format!("{:.5}", er.exponent.value), "0.4447 ± 0.005", er.exponent.within(0.4447, 0.005)));
    let chi = chi_square_independence(&er.pair_table);
    rows.push(row(8, "χ² block independence", format!("{:.2}", chi.statistic), "≤ 32.0 (df 16)", !chi.reject));

    let d = estimate_dimension(seed, 40, 200)?;
    rows.push(row(9, "dimension n=40", format!("{:.4}", d.value), "0.9957 ± 0.02", d.within(0.9957, 0.02)));

    let s = goldenshift::graph::adic_successor(&goldenshift::graph::AdicPath::new(vec![1, 0, 0, 0, 1, 1]))?;
    let sw: String = s.head.iter().map(|d| char::from(b'0' + d)).collect();
    rows.push(row(10, "successor(100011)", sw.clone(), "011100", sw == "011100"));

    let r = kernel_probe(0, 11)? / kernel_probe(0, 10)?;
    rows.push(row(
        11,
        "kernel decay per period",
        format!("{r:.5}"),
        "λ^-4 ≈ 0.14590",
        (r / LAMBDA_F64.powi(-4) - 1.0).abs() < 0.05,
    ));
    let ok = (2..=40i64).all(|k| {
        fib_two_sided(k).map(|w| w.value() == GoldenNumber::integer(fib(k as usize))).unwrap_or(false)
    });
    rows.push(row(11, "fib_two_sided exact, k ≤ 40", ok.to_string(), "true", ok));

    for case in [DensityCase::I { k: 3 }, DensityCase::II { k: 2 }, DensityCase::III] {
        let want = case.value()?;
        let sub = Interval::cylinder(&[case.region_word()?, vec![0, 1]].concat())?;
        let got = case.quotient(&sub)?;
        rows.push(row(12, &format!("density {case:?}"), got.to_string(), &want.to_string(), got == want));
    }

    let hs_mid = entropy::middle_entropies(33);
    let ks16 = entropy::k_series(16)?;
    let r11 = entropy::appendix_d_from(5, &hs_mid, &ks16, h.estimate)?.ratio;
    let r31 = entropy::appendix_d_from(15, &hs_mid, &ks16, h.estimate)?.ratio;
    rows.push(row(
        13,
        "H_n/(⅓(Λ−H_μ)n2^n) at 11, 31",
        format!("{r11:.4} {r31:.4}"),
        "31 in [0.8,1.2], closer to 1",
        (0.8..=1.2).contains(&r31) && (r31 - 1.0).abs() < (r11 - 1.0).abs(),
    ));
    Ok(rows)
}
