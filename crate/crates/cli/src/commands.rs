//! Subcommand bodies. Each returns an [`Output`] for the renderer.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use num_traits::ToPrimitive;
use serde_json::Value;

use goldenshift::dynamics::{self, chi_square_independence, estimate_dimension};
use goldenshift::entropy::{self, MeasureKind, SeriesResult};
use goldenshift::goldfield::GoldenNumber;
use goldenshift::graph::{
    adic_predecessor, adic_successor, k_n, l_n, level_frequencies, level_frequencies_cached, AdicPath,
};
use goldenshift::measures::{mu_interval, nu_interval, Interval, Q};
use goldenshift::torus::{ell, kernel_fiber, l_map};
use goldenshift::words::{
    anti_normalize, bits_to_string, cardinality as word_cardinality, enumerate_blocks, greedy_expansion,
    greedy_two_sided, maximize, normalize as word_normalize, parse_bits, parse_blocks, value, Block,
    TwoSidedWord,
};

use crate::output::{Format, Record, Renderer};
use crate::{CliError, Quantity};

pub struct Output {
    records: Vec<Record>,
    /// replaces the text rendering
    text: Option<String>,
    /// replaces the JSON rendering
    json: Option<Value>,
}

impl Output {
    pub fn records(records: Vec<Record>) -> Self {
        Self { records, text: None, json: None }
    }

    fn one(r: Record) -> Self {
        Self::records(vec![r])
    }

    fn with_text(mut self, t: impl Into<String>) -> Self {
        self.text = Some(t.into());
        self
    }

    pub fn render(&self, r: &Renderer, out: &mut impl Write) -> std::io::Result<()> {
        match (r.format, &self.text, &self.json) {
            (Format::Text, Some(t), _) => writeln!(out, "{t}"),
            (Format::Json, _, Some(v)) => writeln!(out, "{}", serde_json::to_string_pretty(v)?),
            _ => r.render(&self.records, out),
        }
    }
}

fn q_decimal(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn expand(x: &str, digits: usize, two_sided: bool) -> Result<Output, CliError> {
    let v: GoldenNumber = x.parse()?;
    if two_sided {
        let w = greedy_two_sided(&v);
        if w.value() != v {
            return Err(CliError::Usage(format!("{v} has no finite expansion (not in Z[λ] ∩ [0,∞))")));
        }
        return Ok(Output::one(
            Record::new()
                .with("x", v.to_string())
                .with("word", w.to_string())
                .with("support", format!("{w:?}")),
        ));
    }
    let w = greedy_expansion(&v, digits)?;
    Ok(Output::one(
        Record::new()
            .with("x", v.to_string())
            .float("decimal", v.to_f64())
            .with("digits", bits_to_string(&w)),
    ))
}

pub fn normalize(word: &str, lazy: bool, max: bool) -> Result<Output, CliError> {
    let w = parse_bits(word)?;
    let (form, carry, out) = if lazy {
        ("lazy", 0, anti_normalize(&w))
    } else if max {
        ("max", 0, maximize(&w))
    } else {
        let (c, n) = word_normalize(&w);
        ("normal", c, n)
    };
    Ok(Output::one(
        Record::new()
            .with("input", bits_to_string(&w))
            .with("form", form)
            .with("carry", carry)
            .with("word", bits_to_string(&out))
            .with("value", value(&w).to_string()),
    ))
}

fn block_record(b: &Block) -> Record {
    let (p, q) = b.cf();
    Record::new()
        .with("block", b.to_string())
        .with("word", bits_to_string(&b.word()))
        .with("n", b.n())
        .with("length", b.len())
        .with("p", p)
        .with("q", q)
        .with("cardinality", b.cardinality())
}

pub fn blocks(word: Option<&str>, enumerate: Option<u32>) -> Result<Output, CliError> {
    if let Some(n) = enumerate {
        if n == 0 || n > 24 {
            return Err(CliError::Usage("--enumerate needs 1 ≤ n ≤ 24".into()));
        }
        return Ok(Output::records(enumerate_blocks(n).iter().map(block_record).collect()));
    }
    let w = parse_bits(word.unwrap_or_default())?;
    let (bs, tail) = parse_blocks(&w)?;
    let mut rows: Vec<Record> = bs.iter().map(|b| block_record(b).with("kind", "block")).collect();
    if !tail.is_empty() {
        rows.push(
            Record::new()
                .with("block", "")
                .with("word", bits_to_string(&tail))
                .with("n", Value::Null)
                .with("length", tail.len())
                .with("p", Value::Null)
                .with("q", Value::Null)
                .with("cardinality", Value::Null)
                .with("kind", "tail"),
        );
    }
    Ok(Output::records(rows))
}

pub fn cardinality(word: &str) -> Result<Output, CliError> {
    let w = parse_bits(word)?;
    let c = word_cardinality(&w)?;
    Ok(Output::one(Record::new().with("word", bits_to_string(&w)).with("cardinality", c.to_string()))
        .with_text(c.to_string()))
}

pub fn measure(nu: bool, cylinder: Option<&str>, lo: Option<&str>, hi: Option<&str>) -> Result<Output, CliError> {
    let e = match (cylinder, lo, hi) {
        (Some(c), _, _) => Interval::cylinder(&parse_bits(c)?)?,
        (None, Some(a), Some(b)) => Interval::new(a.parse()?, b.parse()?)?,
        _ => return Err(CliError::Usage("give lo and hi, or --cylinder".into())),
    };
    let m = if nu { nu_interval(&e)? } else { mu_interval(&e)? };
    Ok(Output::one(
        Record::new()
            .with("measure", if nu { "nu" } else { "mu" })
            .with("lo", e.lo().to_string())
            .with("hi", e.hi().to_string())
            .with("value", m.to_string())
            .float("decimal", q_decimal(&m)),
    )
    .with_text(m.to_string()))
}

fn series_record(quantity: &str, r: &SeriesResult, elapsed: f64) -> Record {
    Record::new()
        .with("quantity", quantity)
        .float("estimate", r.estimate)
        .float("lower", r.lower)
        .float("upper", r.upper)
        .with("terms", r.terms_used)
        .float("runtime_ms", elapsed)
}

pub fn entropy(quantity: Quantity, terms: Option<u32>, cache: Option<&Path>) -> Result<Output, CliError> {
    let start = Instant::now();
    let ms = |s: Instant| s.elapsed().as_secs_f64() * 1e3;
    let name = quantity.name();
    let series = |f: fn(u32) -> Result<SeriesResult, entropy::EntropyError>| -> Result<Output, CliError> {
        let r = f(terms.unwrap_or(26))?;
        Ok(Output::one(series_record(name, &r, ms(start)).float("partial", r.partial)))
    };
    match quantity {
        Quantity::HMu => series(entropy::h_mu),
        Quantity::HMuS => series(entropy::h_mu_s),
        Quantity::EMu => series(entropy::e_mu),
        Quantity::EM => series(entropy::e_m),
        Quantity::HMS => {
            let n = terms.unwrap_or(60);
            let exact = entropy::h_m_s();
            let x = exact.to_f64();
            let partial = entropy::h_m_s_partial(n);
            Ok(Output::one(
                Record::new()
                    .with("quantity", name)
                    .float("estimate", x)
                    .float("lower", x)
                    .float("upper", x)
                    .with("terms", n)
                    .float("runtime_ms", ms(start))
                    .with("exact", exact.to_string())
                    .float("partial", partial),
            ))
        }
        Quantity::Level => {
            let n = terms.unwrap_or(20);
            let t = match cache {
                Some(dir) => level_frequencies_cached(n, dir)?,
                None => level_frequencies(n)?,
            };
            let h = t.entropy() / n as f64;
            Ok(Output::one(
                Record::new()
                    .with("quantity", name)
                    .float("estimate", h)
                    .float("lower", h)
                    .float("upper", h)
                    .with("terms", n)
                    .float("runtime_ms", ms(start))
                    .float("level_entropy", t.entropy())
                    .float("middle_entropy", t.middle_entropy())
                    .with("mass", t.mass()),
            ))
        }
    }
}

pub fn knseries(max: u32) -> Result<Output, CliError> {
    let rows = (1..=max)
        .map(|n| Ok(Record::new().with("n", n).float("k_n", k_n(n)?).float("l_n", l_n(n)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Output::records(rows))
}

pub fn simulate(kind: MeasureKind, seed: u64, blocks: u64, histogram: bool) -> Result<Output, CliError> {
    let r = dynamics::simulate(kind, seed, blocks, histogram)?;
    let chi = chi_square_independence(&r.pair_table);
    let rec = Record::new()
        .with("measure", kind.to_string())
        .with("seed", seed)
        .with("chains", r.chains)
        .with("blocks", r.samples)
        .with("total_length", r.total_length)
        .float("p_b1", r.p_b1.value)
        .float("p_b1_se", r.p_b1.se)
        .float("mean_length", r.mean_length.value)
        .float("mean_length_se", r.mean_length.se)
        .float("block_start_frequency", r.block_start_frequency.value)
        .float("block_start_frequency_se", r.block_start_frequency.se)
        .float("exponent", r.exponent.value)
        .float("exponent_se", r.exponent.se)
        .float("chi_square", chi.statistic)
        .with("chi_square_df", chi.df)
        .with("independence_rejected", chi.reject);
    let mut full = serde_json::to_value(&r).map_err(|e| CliError::Usage(e.to_string()))?;
    full["chi_square"] = serde_json::to_value(chi).map_err(|e| CliError::Usage(e.to_string()))?;
    if !histogram {
        if let Some(o) = full.as_object_mut() {
            o.remove("block_histogram");
        }
    }
    Ok(Output { records: vec![rec], text: None, json: Some(full) })
}

pub fn dimension(seed: u64, digits: usize, samples: usize) -> Result<Output, CliError> {
    let d = estimate_dimension(seed, digits, samples)?;
    Ok(Output::one(
        Record::new()
            .with("seed", seed)
            .with("digits", digits)
            .with("samples", samples)
            .float("dimension", d.value)
            .float("se", d.se),
    ))
}

pub fn adic(head: &str, steps: usize, backward: bool) -> Result<Output, CliError> {
    let mut cur = AdicPath::new(parse_bits(head)?);
    let mut rows = vec![Record::new().with("step", 0).with("head", bits_to_string(&cur.head))];
    for i in 1..=steps {
        let next = if backward { adic_predecessor(&cur) } else { adic_successor(&cur) };
        match next {
            Ok(p) => cur = p,
            Err(e) if i == 1 => return Err(e.into()),
            Err(_) => break,
        }
        let step = if backward { -(i as i64) } else { i as i64 };
        rows.push(Record::new().with("step", step).with("head", bits_to_string(&cur.head)));
    }
    Ok(Output::records(rows))
}

fn point(r: Record, prefix: &str, p: &goldenshift::torus::TorusPoint) -> Record {
    r.with(&format!("{prefix}_x"), p.x.to_string())
        .with(&format!("{prefix}_y"), p.y.to_string())
        .float(&format!("{prefix}_x_decimal"), p.x.to_f64())
        .float(&format!("{prefix}_y_decimal"), p.y.to_f64())
}

pub fn torus(word: &str, kernel: Option<u32>) -> Result<Output, CliError> {
    let w: TwoSidedWord = word.parse()?;
    let e = ell(&w)?;
    match kernel {
        None => {
            let r = Record::new().with("word", w.to_string()).with("support", format!("{w:?}"));
            Ok(Output::one(point(point(r, "ell", &e), "l", &l_map(&w)?)))
        }
        Some(t) => {
            let rows = kernel_fiber(&w, t)
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let p = ell(v)?;
                    Ok(Record::new()
                        .with("member", i)
                        .with("support", format!("{v:?}"))
                        .float("distance", p.distance(&e)))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(Output::records(rows))
        }
    }
}
