//! Correlation statistics of orbit words against arithmetic functions.

use crate::config::{ExperimentConfig, Format, Statistic, SystemKind};
use crate::emit::{self, Manifest, Series, Table};
use crate::nt::{LambdaTable, MuTable};
use crate::poly::C64;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpError {
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("cannot build the orbit word: {0}")]
    Source(String),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Correlation {
    pub n: u64,
    /// `(1/N) |sum mu(n) (x_n - mean x)|`.
    pub centered: f64,
    /// `(1/N) |sum mu(n) x_n|`.
    pub raw: f64,
}

/// Correlation of `x_1..x_N` with `mu(1..N)`, `N = x.len()`.
pub fn moebius_correlation(x: &[u8], mu: &MuTable) -> Result<Correlation, ExpError> {
    let n = x.len() as u64;
    if mu.len() < n {
        return Err(ExpError::Capacity(format!("mu table covers {} < {n}", mu.len())));
    }
    if n == 0 {
        return Err(ExpError::Domain("empty word".into()));
    }
    let mut dot = 0i64;
    let mut mertens = 0i64;
    let mut ones = 0i64;
    for (i, &xi) in x.iter().enumerate() {
        let m = mu.get(i as u64 + 1) as i64;
        dot += m * xi as i64;
        mertens += m;
        ones += xi as i64;
    }
    let nf = n as f64;
    let mean = ones as f64 / nf;
    Ok(Correlation { n, centered: (dot as f64 - mean * mertens as f64).abs() / nf, raw: dot.unsigned_abs() as f64 / nf })
}

/// `(1/N) |sum_{n <= N} x_{pn} x_{qn}|` and its mean-centered variant, with
/// the mean taken over the whole word.
pub fn bilinear_prime_correlation(x: &[u8], p: u64, q: u64, n: u64) -> Result<Correlation, ExpError> {
    let need = p.max(q).checked_mul(n).ok_or_else(|| ExpError::Capacity("index overflow".into()))?;
    if need > x.len() as u64 {
        return Err(ExpError::Capacity(format!("index {need} beyond word length {}", x.len())));
    }
    if n == 0 || p == 0 || q == 0 {
        return Err(ExpError::Domain("p, q and N must be positive".into()));
    }
    let mean = x.iter().map(|&v| v as u64).sum::<u64>() as f64 / x.len() as f64;
    let mut raw = 0u64;
    let mut centered = 0.0;
    for k in 1..=n {
        let a = x[(p * k - 1) as usize];
        let b = x[(q * k - 1) as usize];
        raw += (a * b) as u64;
        centered += (a as f64 - mean) * (b as f64 - mean);
    }
    let nf = n as f64;
    Ok(Correlation { n, centered: centered.abs() / nf, raw: raw as f64 / nf })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PntStatistic {
    pub n: u64,
    /// `sum x_j Lambda(j + n0)`.
    pub lhs: f64,
    /// `q/phi(q) sum x_j [gcd(j + n0, q) = 1]`.
    pub main: f64,
    /// `sum x_j`.
    pub plain: f64,
    pub rel_main: f64,
    pub rel_plain: f64,
    /// `|lhs - main| / ((N + n0) / sqrt(log q))`, absent for `q = 1`.
    pub error_ratio: Option<f64>,
}

/// Prime-weighted sum of `x_1..x_N` shifted by `offset`, against the
/// coprimality main term modulo `q`.
pub fn pnt_statistic(x: &[u8], lambda: &LambdaTable, q: u64, offset: u64) -> Result<PntStatistic, ExpError> {
    let n = x.len() as u64;
    if q == 0 {
        return Err(ExpError::Domain("modulus must be positive".into()));
    }
    if lambda.len() < n + offset {
        return Err(ExpError::Capacity(format!("Lambda table covers {} < {}", lambda.len(), n + offset)));
    }
    let mut terms = Vec::with_capacity(x.len());
    let mut coprime = 0u64;
    let mut plain = 0u64;
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0 {
            continue;
        }
        let j = i as u64 + 1 + offset;
        terms.push(xi as f64 * lambda.get(j));
        plain += xi as u64;
        if num_integer::gcd(j, q) == 1 {
            coprime += xi as u64;
        }
    }
    let lhs = crate::poly::pairwise_sum(&terms);
    let main = q as f64 / crate::nt::totient(q) as f64 * coprime as f64;
    let plain = plain as f64;
    let rel = |v: f64| {
        if v == 0.0 {
            if lhs == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (lhs - v).abs() / v
        }
    };
    let error_ratio = (q >= 2).then(|| (lhs - main).abs() / ((n + offset) as f64 / (q as f64).ln().sqrt()));
    Ok(PntStatistic { n, lhs, main, plain, rel_main: rel(main), rel_plain: rel(plain), error_ratio })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Residue {
    pub n: u64,
    /// `|sum_{j = a (q)} x_j - (1/q) sum x_j| / N`.
    pub discrepancy: f64,
    /// `max_{0 < k < q} |(1/N) sum e_q(kj) x_j|`.
    pub bound: f64,
}

impl Residue {
    pub fn inequality_holds(&self) -> bool {
        self.discrepancy <= self.bound + 1e-12
    }
}

/// Discrepancy of `x_1..x_N` on the class `a` modulo `q` and the
/// exponential-sum quantity dominating it.
pub fn residue_equidistribution(x: &[u8], q: u64, a: u64) -> Result<Residue, ExpError> {
    if q == 0 || a >= q {
        return Err(ExpError::Domain(format!("need q >= 1 and 0 <= a < q, got q = {q}, a = {a}")));
    }
    let n = x.len() as u64;
    if n == 0 {
        return Err(ExpError::Domain("empty word".into()));
    }
    let mut class = vec![0u64; q as usize];
    for (i, &xi) in x.iter().enumerate() {
        class[((i as u64 + 1) % q) as usize] += xi as u64;
    }
    let total: u64 = class.iter().sum();
    let nf = n as f64;
    let discrepancy = (class[a as usize] as f64 - total as f64 / q as f64).abs() / nf;
    let mut bound = 0.0f64;
    for k in 1..q {
        let s: C64 = class.iter().enumerate().map(|(r, &c)| crate::poly::e(((k * r as u64) % q) as f64 / q as f64) * c as f64).sum();
        bound = bound.max(s.norm() / nf);
    }
    Ok(Residue { n, discrepancy, bound })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayVerdict {
    pub first: f64,
    pub last: f64,
    /// `last <= first / 2`.
    pub improved: bool,
}

/// Factor-2 improvement from the first to the last entry of a series.
pub fn decay_verdict(series: &[f64]) -> Option<DecayVerdict> {
    let (&first, &last) = (series.first()?, series.last()?);
    Some(DecayVerdict { first, last, improved: last <= first / 2.0 })
}

/// First `len` symbols of the configured system's orbit word.
pub fn orbit_word(cfg: &ExperimentConfig, config_dir: &Path, len: u64) -> Result<Vec<u8>, ExpError> {
    let src = |e: &dyn std::fmt::Display| ExpError::Source(e.to_string());
    let rank_one = |spec: crate::word::RankOneSpec| -> Result<Vec<u8>, ExpError> {
        let top = spec.levels();
        if spec.height_u128(top) < len as u128 {
            return Err(ExpError::Capacity(format!("top word has {} < {len} symbols", spec.height_u128(top))));
        }
        spec.word(top).and_then(|w| w.materialize_capped(0, len as u128, u64::MAX)).map_err(|e| src(&e))
    };
    let levels_for = |growth: u64| {
        let mut h = 1u128;
        let mut l = 0;
        while h < len as u128 {
            h = h * growth as u128 + 1;
            l += 1;
        }
        l.max(1)
    };
    match cfg.system {
        SystemKind::Chacon => {
            let l = levels_for((cfg.chacon_p + cfg.chacon_q).max(2) as u64);
            rank_one(crate::word::make_chacon(&vec![cfg.chacon_p; l], &vec![cfg.chacon_q; l]).map_err(|e| src(&e))?)
        }
        SystemKind::Katok => {
            let l = levels_for((2 * cfg.katok_p).max(2) as u64);
            rank_one(crate::word::make_katok(&vec![cfg.katok_p; l]).map_err(|e| src(&e))?)
        }
        SystemKind::Spec => {
            let path = crate::config::resolve(&config_dir.join("config"), &cfg.spec_file);
            let text = std::fs::read_to_string(&path).map_err(|e| ExpError::Io(format!("{}: {e}", path.display())))?;
            rank_one(crate::word::parse_spec(&text).map_err(|e| src(&e))?)
        }
        SystemKind::Iet => {
            let bits = crate::iet::DEFAULT_BITS;
            let alpha = crate::iet::parse_real(&cfg.iet_alpha, bits).map_err(|e| src(&e))?;
            let beta = crate::iet::parse_real(&cfg.iet_beta, bits).map_err(|e| src(&e))?;
            let x0 = crate::iet::parse_real(&cfg.iet_x0, bits).map_err(|e| src(&e))?;
            let params = crate::iet::IetParams::with_x0(alpha, beta, x0, bits).map_err(|e| src(&e))?;
            let code = crate::iet::orbit_coding(&params, crate::iet::Lin::X0, len as usize).map_err(|e| src(&e))?;
            Ok(crate::iet::project(&code, cfg.iet_letter))
        }
        SystemKind::Random => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
            Ok((0..len).map(|_| rng.gen_bool(cfg.random_density) as u8).collect())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub n: u64,
    pub statistic: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub rows: Vec<Row>,
    pub verdicts: Vec<(String, DecayVerdict)>,
    pub assertions: Vec<Assertion>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn series(&self, statistic: &str) -> Vec<(u64, f64)> {
        self.rows.iter().filter(|r| r.statistic == statistic).map(|r| (r.n, r.value)).collect()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["n", "statistic", "value"]);
        for r in &self.rows {
            t.push(vec![r.n.to_string(), r.statistic.clone(), r.value.to_string()]);
        }
        t
    }
}

const DECAYING: [&str; 3] = ["moebius_centered", "integral_normalized", "residue_discrepancy"];

/// Computes every configured statistic over the length schedule.
pub fn run_experiment(cfg: &ExperimentConfig, config_dir: &Path) -> Result<RunReport, ExpError> {
    let has = |s: Statistic| cfg.statistics.contains(&s);
    let n_max = *cfg.schedule.last().ok_or_else(|| ExpError::Domain("empty schedule".into()))?;
    let stretch = if has(Statistic::Bilinear) { cfg.primes.iter().map(|&(p, q)| p.max(q)).max().unwrap_or(1) } else { 1 };
    let len = n_max.checked_mul(stretch).ok_or_else(|| ExpError::Capacity("word length overflow".into()))?;
    let x = orbit_word(cfg, config_dir, len)?;
    let nt = |e: crate::nt::NtError| ExpError::Capacity(e.to_string());
    let mu = if has(Statistic::Moebius) || has(Statistic::Integral) || has(Statistic::Arcs) {
        Some(crate::nt::mu_cached(n_max).map_err(nt)?)
    } else {
        None
    };
    let lambda = if has(Statistic::Pnt) { Some(crate::nt::lambda_cached(n_max + cfg.pnt_offset).map_err(nt)?) } else { None };
    let mu_vec = mu.as_ref().filter(|_| has(Statistic::Integral) || has(Statistic::Arcs)).map(|t| t.to_vec(n_max));
    let mut rows = Vec::new();
    let mut assertions = Vec::new();
    for &n in &cfg.schedule {
        let w = &x[..n as usize];
        let mut push = |name: String, value: f64| rows.push(Row { n, statistic: name, value });
        for &stat in &cfg.statistics {
            match stat {
                Statistic::Moebius => {
                    let c = moebius_correlation(w, mu.as_ref().unwrap())?;
                    push("moebius_centered".into(), c.centered);
                    push("moebius_raw".into(), c.raw);
                }
                Statistic::Bilinear => {
                    for &(p, q) in &cfg.primes {
                        let c = bilinear_prime_correlation(&x, p, q, n)?;
                        push(format!("bilinear_{p}_{q}_centered"), c.centered);
                        push(format!("bilinear_{p}_{q}_raw"), c.raw);
                    }
                }
                Statistic::Pnt => {
                    let s = pnt_statistic(w, lambda.as_ref().unwrap(), cfg.pnt_modulus, cfg.pnt_offset)?;
                    push("pnt_lhs".into(), s.lhs);
                    push("pnt_main".into(), s.main);
                    push("pnt_plain".into(), s.plain);
                    push("pnt_rel_main".into(), s.rel_main);
                    push("pnt_rel_plain".into(), s.rel_plain);
                    if let Some(r) = s.error_ratio {
                        push("pnt_error_ratio".into(), r);
                    }
                }
                Statistic::Residue => {
                    let r = residue_equidistribution(w, cfg.residue_modulus, cfg.residue_class)?;
                    push("residue_discrepancy".into(), r.discrepancy);
                    push("residue_bound".into(), r.bound);
                    assertions.push(Assertion { name: format!("residue_inequality_{n}"), pass: r.inequality_holds() });
                }
                Statistic::Integral => {
                    let v = crate::arcs::moebius_disjointness_integral(w, mu_vec.as_ref().unwrap());
                    push("integral_normalized".into(), v / n as f64);
                }
                Statistic::Arcs => {
                    let mut params = crate::arcs::BreakdownParams::defaults(n);
                    params.tau = cfg.tau;
                    if cfg.q0 > 0 {
                        params.q_max = cfg.q0;
                    }
                    let b = crate::arcs::per_family_breakdown(w, &mu_vec.as_ref().unwrap()[..n as usize], &params)
                        .map_err(|e| ExpError::Domain(e.to_string()))?;
                    push("arcs_total_normalized".into(), b.total / n as f64);
                    push("arcs_rest_fraction".into(), b.rest / b.total);
                }
            }
        }
    }
    let report = RunReport { rows, verdicts: Vec::new(), assertions };
    let mut names: Vec<String> = DECAYING.iter().map(|s| s.to_string()).collect();
    names.extend(cfg.primes.iter().map(|(p, q)| format!("bilinear_{p}_{q}_centered")));
    let mut verdicts = Vec::new();
    for name in names {
        let series: Vec<f64> = report.series(&name).into_iter().map(|(_, v)| v).collect();
        if let Some(v) = decay_verdict(&series) {
            verdicts.push((name, v));
        }
    }
    let mut assertions = report.assertions;
    if cfg.assert_decay {
        assertions.extend(verdicts.iter().map(|(name, v)| Assertion { name: format!("decay_{name}"), pass: v.improved }));
    }
    Ok(RunReport { rows: report.rows, verdicts, assertions })
}

/// Writes the configured formats into `out_dir`, returning the paths.
pub fn write_outputs(cfg: &ExperimentConfig, report: &RunReport, out_dir: &Path, timestamp: u64) -> Result<Vec<PathBuf>, ExpError> {
    let io = |e: std::io::Error| ExpError::Io(e.to_string());
    std::fs::create_dir_all(out_dir).map_err(io)?;
    let params = cfg.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let manifest = Manifest::new(&cfg.to_text(), params, cfg.seed, timestamp);
    let mut paths = Vec::new();
    for &f in &cfg.formats {
        let path = out_dir.join(format!("{}.{}", cfg.name, f.name()));
        let text = match f {
            Format::Csv => emit::to_csv(&manifest, &report.table()),
            Format::Json => emit::to_json(&manifest, report),
            Format::Svg => {
                let mut names: Vec<&str> = Vec::new();
                for r in &report.rows {
                    if !names.contains(&r.statistic.as_str()) {
                        names.push(&r.statistic);
                    }
                }
                let series: Vec<Series> = names
                    .iter()
                    .filter(|n| DECAYING.contains(n) || n.ends_with("_centered") || n.starts_with("pnt_rel"))
                    .map(|n| Series { name: n.to_string(), points: report.series(n).into_iter().map(|(k, v)| (k as f64, v)).collect() })
                    .collect();
                emit::svg_loglog(&cfg.name, &series)
            }
        };
        std::fs::write(&path, text).map_err(io)?;
        paths.push(path);
    }
    Ok(paths)
}
