use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rank1::arcs::moebius_disjointness_integral;
use rank1::arcs::{enumerate_family, per_family_breakdown, BreakdownParams};
use rank1::cert::{g_pair, is_prime_u64, puiseux_precheck, resultant_at, resultant_test, Modulus, SpacerPattern, Verdict, MERSENNE61};
use rank1::config::{parse_config_str, Format};
use rank1::emit::strip_timestamp;
use rank1::experiments::{moebius_correlation, pnt_statistic, run_experiment, write_outputs};
use rank1::iet::{
    check_conditions, induce, orbit_coding, params_from_expansion, project, standard_base, verify_round_trip, ExpansionStep, IetParams,
    Lin, DEFAULT_BITS,
};
use rank1::nt::{sieve_lambda, sieve_mu, totient};
use rank1::poly::{bilinear_identity_check, build_pw, recursion_pw_words, riesz_degree, riesz_product};
use rank1::word::{chacon_classical, make_chacon, make_katok, RankOneSpec};
use rank1::wordsys::{chain_word, from_rank_one_rigid, l1_growth_check, RigidParams};
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn riesz_normalization() -> Outcome {
    let spec = chacon_classical(8);
    let mut worst = 0.0f64;
    for n in 1..=6 {
        let m = (2 * riesz_degree(&spec, n) + 1).next_power_of_two() as usize;
        let g = riesz_product(&spec, n, m).unwrap();
        let mean = g.values.iter().sum::<f64>() / m as f64;
        worst = worst.max((mean - 1.0).abs());
    }
    outcome(worst <= 1e-6, format!("max |mean - 1| = {worst:.2e} over n <= 6 (tol 1e-6)"))
}

fn recursion_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = 0;
    for _ in 0..50 {
        let mut parts: Vec<(Vec<u8>, u64)> = Vec::new();
        let mut total = 0u64;
        for _ in 0..rng.gen_range(1..8) {
            let len = rng.gen_range(1..600u64);
            let k = rng.gen_range(1..6u64);
            if total + len * k > 1 << 14 {
                break;
            }
            total += len * k;
            parts.push(((0..len).map(|_| rng.gen_range(0..=1)).collect(), k));
        }
        if parts.is_empty() {
            parts.push((vec![1], 1));
        }
        let mut word = Vec::new();
        for (w, k) in &parts {
            for _ in 0..*k {
                word.extend_from_slice(w);
            }
        }
        let spec: Vec<(&[u8], u64, u64)> = parts.iter().map(|(w, k)| (&w[..], *k, w.len() as u64)).collect();
        let rec = recursion_pw_words(&spec).unwrap();
        let direct = build_pw(&word);
        if rec.len() != direct.len() || direct.terms().any(|(f, c)| rec.coeff(f) != c) {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("{bad} of 50 decompositions differ"))
}

fn bilinear_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = 0;
    let mut done = 0;
    while done < 20 {
        let (p, q) = (rng.gen_range(1..20u64), rng.gen_range(1..20u64));
        if p == q || num_integer::gcd(p, q) != 1 {
            continue;
        }
        let n = rng.gen_range(1..2000);
        let mut coeffs = || (0..n).map(|_| Complex::new(rng.gen_range(-50..50i64), rng.gen_range(-50..50i64))).collect::<Vec<_>>();
        let (f, g) = (coeffs(), coeffs());
        let (lhs, rhs) = bilinear_identity_check(&f, &g, p, q).unwrap();
        bad += (lhs != rhs) as usize;
        done += 1;
    }
    outcome(bad == 0, format!("{bad} of 20 instances differ"))
}

fn patterns(v: u32, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 1..v {
        out = out.into_iter().flat_map(|a| (0..=max).map(move |x| [a.clone(), vec![x]].concat())).collect();
    }
    out
}

fn certificate_sweep() -> Outcome {
    let mut counts = [0usize; 2];
    let mut bad = Vec::new();
    for v in 2..=6u32 {
        let primes: Vec<u64> = (2..=100).filter(|&p| is_prime_u64(p) && p % v as u64 == 1 % v as u64).collect();
        for a in patterns(v, 4) {
            let pat = SpacerPattern::new(v, a.clone()).unwrap();
            for (i, &p) in primes.iter().enumerate() {
                for &q in &primes[i + 1..] {
                    let verdict = resultant_test(&pat, p, q).unwrap().verdict;
                    let want = if pat.a_plus() > pat.a_minus() { Verdict::Certified } else { Verdict::Degenerate };
                    counts[(verdict == Verdict::Certified) as usize] += 1;
                    if verdict != want || puiseux_precheck(&pat) != (verdict == Verdict::Certified) {
                        bad.push(format!("v={v} a={a:?} p={p} q={q}"));
                    }
                }
            }
        }
    }
    let m = Modulus { p: MERSENNE61 };
    let mut oracle_bad = 0;
    let lines: Vec<serde_json::Value> = include_str!("oracles/resultant_oracle.jsonl")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    for c in &lines {
        let v = c["v"].as_u64().unwrap() as u32;
        let a = c["a"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap() as u32).collect();
        let pat = SpacerPattern::new(v, a).unwrap();
        let (p, q) = (c["p"].as_u64().unwrap(), c["q"].as_u64().unwrap());
        let zero = c["zero"].as_bool().unwrap();
        let verdict = resultant_test(&pat, p, q).unwrap().verdict;
        let mut ok = verdict == if zero { Verdict::Degenerate } else { Verdict::Certified };
        if !zero {
            let (g1, g2) = g_pair(&pat, p, q);
            let want: u64 = c["value_at_2_mod"].as_str().unwrap().parse().unwrap();
            ok &= resultant_at(&g1, &g2, 2, &m) == Some(want);
        }
        oracle_bad += (!ok) as usize;
    }
    outcome(
        bad.is_empty() && oracle_bad == 0,
        format!(
            "{} certified, {} degenerate, {} mismatches{}; oracle {}/{} agree",
            counts[1],
            counts[0],
            bad.len(),
            bad.first().map(|s| format!(" (first {s})")).unwrap_or_default(),
            lines.len() - oracle_bad,
            lines.len()
        ),
    )
}

fn moebius_decay() -> Outcome {
    let spec = chacon_classical(14);
    let mu = sieve_mu(1_000_000).unwrap();
    let prefix = spec.word(13).unwrap().materialize(0, 1_000_000).unwrap();
    let c4 = moebius_correlation(&prefix[..10_000], &mu).unwrap().centered.abs();
    let c6 = moebius_correlation(&prefix, &mu).unwrap().centered.abs();
    let muv = mu.to_vec(1_000_000);
    let integral: Vec<f64> = [8, 10, 12]
        .into_iter()
        .map(|lv| {
            let w = spec.word(lv).unwrap().materialize_all().unwrap();
            moebius_disjointness_integral(&w, &muv) / w.len() as f64
        })
        .collect();
    let corr_ok = c6 <= 0.5 * c4;
    let int_ok = integral[2] <= 0.5 * integral[0];
    outcome(
        corr_ok && int_ok,
        format!(
            "centered {c4:.3e} -> {c6:.3e} (ratio {:.3}, {}); integral/N {:.4} -> {:.4} -> {:.4} (ratio {:.3}, {}); need ratio <= 0.5",
            c6 / c4,
            if corr_ok { "ok" } else { "fails" },
            integral[0],
            integral[1],
            integral[2],
            integral[2] / integral[0],
            if int_ok { "ok" } else { "fails" }
        ),
    )
}

fn exponent_decrease() -> Outcome {
    let n: Vec<u32> = (1..=12).collect();
    let chains: [(&str, RankOneSpec); 4] = [
        ("chacon", chacon_classical(14)),
        ("chacon p=q=n", make_chacon(&n, &n).unwrap()),
        ("katok p=2", make_katok(&[2; 14]).unwrap()),
        ("katok p=n", make_katok(&n).unwrap()),
    ];
    let mut all = true;
    let mut parts = Vec::new();
    for (name, spec) in chains {
        let sys = from_rank_one_rigid(&spec, RigidParams { r_bound: 8 }).unwrap();
        let levels: Vec<usize> = (0..=sys.levels()).filter(|&s| (1_000..=1_000_000).contains(&sys.len(chain_word(s)))).collect();
        let rows = l1_growth_check(&sys, levels[0]..=*levels.last().unwrap(), 1 << 21).unwrap();
        let ok = rows.len() >= 2 && rows.windows(2).all(|w| w[1].exponent < w[0].exponent);
        all &= ok;
        let col: Vec<String> = rows.iter().map(|r| format!("{:.4}", r.exponent)).collect();
        parts.push(format!("{name} [{}] {}", col.join(", "), if ok { "ok" } else { "not decreasing" }));
    }
    outcome(all, parts.join("; "))
}

const QUADRATIC: [(&str, &str); 10] = [
    ("(sqrt(5)-1)/4", "(sqrt(2)-1)/2"),
    ("(sqrt(2)-1)/4", "(sqrt(3)-1)/4"),
    ("(sqrt(2)-1)/3", "(sqrt(3)-1)/3"),
    ("(sqrt(2)-1)/2", "(sqrt(5)-1)/8"),
    ("(sqrt(2)-1)/4", "(sqrt(6)-1)/8"),
    ("(sqrt(2)-1)/3", "(sqrt(7)-1)/6"),
    ("(sqrt(2)-1)/4", "(sqrt(10)-1)/12"),
    ("(sqrt(2)-1)/2", "(sqrt(13)-1)/12"),
    ("(sqrt(3)-1)/4", "(sqrt(2)-1)/4"),
    ("(sqrt(3)-1)/4", "(sqrt(2)-1)/2"),
];

fn iet_round_trip() -> Outcome {
    let mut bad = Vec::new();
    for (a, b) in QUADRATIC {
        let p = IetParams::parse(a, b, DEFAULT_BITS).unwrap();
        let exp = match induce(&p, 10) {
            Ok(e) => e,
            Err(e) => {
                bad.push(format!("{a}, {b}: {e}"));
                continue;
            }
        };
        if !exp.levels.iter().all(|l| l.words.invariants_hold()) {
            bad.push(format!("{a}, {b}: length invariants"));
        }
        for k in 1..=exp.depth() {
            match verify_round_trip(&p, &exp, k, 100_000) {
                Ok(rt) if rt.checked == 100_000 => {}
                Ok(rt) => bad.push(format!("{a}, {b}: level {k} checked {}", rt.checked)),
                Err(e) => bad.push(format!("{a}, {b}: {e}")),
            }
        }
    }
    outcome(bad.is_empty(), format!("10 pairs, depth 10, 1e5 symbols at every level; {} failures {:?}", bad.len(), bad))
}

fn pnt_sanity() -> Outcome {
    let n = 1_000_000u64;
    let lam = sieve_lambda(n).unwrap();
    let ones = vec![1u8; n as usize];
    let s = pnt_statistic(&ones, &lam, 1, 0).unwrap();
    let pattern = [ExpansionStep { n: 4, m: 5, eps: 1 }, ExpansionStep { n: 4, m: 5, eps: -1 }];
    let p = params_from_expansion(&standard_base(), &pattern, 60, DEFAULT_BITS).unwrap();
    let regime = induce(&p, 10).map(|e| check_conditions(&e.steps, 3).unwrap().applicable).unwrap_or(false);
    let code = orbit_coding(&p, Lin::ZERO, n as usize).unwrap();
    let rel: Vec<f64> = (1..=3).map(|l| pnt_statistic(&project(&code, l), &lam, 1, 0).unwrap().rel_plain).collect();
    let worst = rel.iter().copied().fold(0.0, f64::max);
    outcome(
        s.rel_plain < 0.03 && regime && worst < 0.1,
        format!(
            "psi(1e6) = {:.0}, rel {:.2e} (tol 0.03); iet regime {regime}, rel by letter {:.4} {:.4} {:.4} (tol 0.1)",
            s.lhs, s.rel_plain, rel[0], rel[1], rel[2]
        ),
    )
}

fn arc_machinery() -> Outcome {
    let mut count_bad = 0;
    for e in 0..=10 {
        let q = 1u64 << e;
        let f = enumerate_family(q, 1, 1 << 40).unwrap();
        let want: u64 = (q..2 * q).map(totient).sum();
        count_bad += (f.arcs.len() as u64 != want) as usize;
    }
    let mut worst = 0.0f64;
    for lv in [6, 8, 10] {
        let w = chacon_classical(lv).word(lv).unwrap().materialize_all().unwrap();
        let n = w.len() as u64;
        let mu = sieve_mu(n).unwrap().to_vec(n);
        let b = per_family_breakdown(&w, &mu, &BreakdownParams::defaults(n)).unwrap();
        let sum: f64 = b.rows.iter().map(|r| r.integral).sum::<f64>() + b.rest;
        worst = worst.max((sum - b.total).abs() / b.total);
    }
    outcome(
        count_bad == 0 && worst <= 0.005,
        format!("{count_bad} totient mismatches for Q <= 2^10; worst reassembly error {worst:.2e} (tol 5e-3)"),
    )
}

fn determinism() -> Outcome {
    let mut cfg = parse_config_str("system = chacon\nschedule = 1000, 10000\nstatistics = moebius, pnt, residue, integral\n").unwrap();
    cfg.formats = vec![Format::Csv, Format::Json];
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut csvs = Vec::new();
    for (i, d) in dirs.iter().enumerate() {
        let report = run_experiment(&cfg, d.path()).unwrap();
        let files = write_outputs(&cfg, &report, d.path(), 1000 + i as u64).unwrap();
        let csv = files.iter().find(|f| f.extension().is_some_and(|e| e == "csv")).unwrap();
        csvs.push(std::fs::read_to_string(csv).unwrap());
    }
    let same = strip_timestamp(&csvs[0]) == strip_timestamp(&csvs[1]);
    outcome(same && csvs[0] != csvs[1], format!("csv identical modulo timestamp: {same}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("riesz normalization", riesz_normalization),
        ("polynomial recursion", recursion_oracle),
        ("bilinear identity", bilinear_identity),
        ("certificate sweep", certificate_sweep),
        ("moebius decay", moebius_decay),
        ("l1 exponent decrease", exponent_decrease),
        ("iet round trip", iet_round_trip),
        ("pnt sanity", pnt_sanity),
        ("arc machinery", arc_machinery),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let o = run();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {:>2} {name}: {} [{:.1}s]", i + 1, o.detail, t.elapsed().as_secs_f64());
        failed += (!o.pass) as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
