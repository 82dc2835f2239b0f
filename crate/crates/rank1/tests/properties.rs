use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rank1::arcs::{per_family_breakdown, BreakdownParams};
use rank1::cert::{g_pair, resultant_at, rho_defect, LaurentPoly2, Modulus, SpacerPattern, YPoly, MERSENNE61};
use rank1::config::{parse_config_str, ExperimentConfig, Format, Statistic, SystemKind};
use rank1::experiments::residue_equidistribution;
use rank1::iet::{step_inverse_rational, step_rational};
use rank1::nt::{dirichlet_approx, mu_exp_sum, sieve_mu};
use rank1::poly::{build_pj, build_pw, eval_grid, eval_word_grid, grid_size, recursion_pw_words};
use rank1::word::{make_chacon, make_katok, RankOneSpec};
use rank1::wordsys::{chain_word, from_rank_one_rigid, RigidParams};

fn rank_one_spec() -> impl Strategy<Value = RankOneSpec> {
    prop::collection::vec((2u32..=4, 0u32..=3), 1..=5).prop_flat_map(|levels| {
        let cuts: Vec<u32> = levels.iter().map(|l| l.0).collect();
        let strat: Vec<_> = levels.iter().map(|&(w, a)| prop::collection::vec(0..=a, (w - 1) as usize)).collect();
        (Just(cuts), strat).prop_map(|(cuts, spacers)| RankOneSpec::new(cuts, spacers).unwrap())
    })
}

fn bits(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..=1, 1..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn length_is_height_and_recursion_holds(spec in rank_one_spec()) {
        let mut prev = spec.word(0).unwrap().materialize_all().unwrap();
        for n in 1..=spec.levels() {
            let w = spec.word(n).unwrap().materialize_all().unwrap();
            prop_assert_eq!(w.len() as u128, spec.height_u128(n));
            let mut want = prev.clone();
            for &a in spec.spacers(n - 1) {
                want.extend(std::iter::repeat_n(1u8, a as usize));
                want.extend_from_slice(&prev);
            }
            prop_assert_eq!(&w[..want.len()], &want[..]);
            prop_assert!(w[want.len()..].iter().all(|&s| s == 1));
            prev = w;
        }
    }

    #[test]
    fn parseval(word in bits(3000)) {
        let grid = eval_word_grid(&word, grid_size(word.len() as u128, 8));
        let l2: f64 = grid.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / grid.values.len() as f64;
        let ones = word.iter().filter(|&&b| b == 1).count() as f64;
        prop_assert!((l2 - ones).abs() <= 1e-9 * ones.max(1.0));
    }

    #[test]
    fn pj_bounded_by_sqrt_w(spec in rank_one_spec()) {
        for j in 0..spec.levels() {
            let p = build_pj(&spec, j).unwrap();
            let g = eval_grid(&p, grid_size(p.degree() as u128 + 1, 8));
            let w = (spec.cut(j) as f64).sqrt();
            prop_assert!(g.values.iter().all(|v| v.norm() <= w + 1e-9));
        }
    }

    #[test]
    fn recursion_matches_direct(parts in prop::collection::vec((bits(40), 1u64..5), 1..5)) {
        let mut word = Vec::new();
        for (w, k) in &parts {
            for _ in 0..*k {
                word.extend_from_slice(w);
            }
        }
        let spec: Vec<(&[u8], u64, u64)> = parts.iter().map(|(w, k)| (&w[..], *k, w.len() as u64)).collect();
        let rec = recursion_pw_words(&spec).unwrap();
        let direct = build_pw(&word);
        prop_assert_eq!(rec.len(), direct.len());
        for (f, c) in direct.terms() {
            prop_assert_eq!(rec.coeff(f), c);
        }
    }

    #[test]
    fn expsum_trivial_bound(theta in 0.0f64..1.0, n in 1u64..5000) {
        let mu = sieve_mu(5000).unwrap();
        prop_assert!(mu_exp_sum(&mu, theta, n).unwrap().norm() <= n as f64 + 1e-9);
    }

    #[test]
    fn dirichlet_inequality(theta in -3.0f64..3.0, m in 1u64..100_000) {
        let r = dirichlet_approx(theta, m);
        prop_assert!(r.q >= 1 && r.q <= m);
        prop_assert_eq!(num_integer::gcd(r.a.unsigned_abs(), r.q), 1);
        prop_assert!(r.beta.abs() <= 1.0 / (r.q as f64 * m as f64) * (1.0 + 1e-12));
    }

    #[test]
    fn arcs_reassemble(word in prop::collection::vec(0u8..=1, 256..2500), shift in 0u64..1000) {
        let n = word.len() as u64;
        let mu = sieve_mu(n + shift).unwrap().to_vec(n + shift);
        let b = per_family_breakdown(&word, &mu[shift as usize..], &BreakdownParams::defaults(n)).unwrap();
        let sum: f64 = b.rows.iter().map(|r| r.integral).sum::<f64>() + b.rest;
        prop_assert!((sum - b.total).abs() <= 0.005 * b.total.max(1e-12));
    }

    #[test]
    fn residue_inequality(word in bits(2000), q in 1u64..30, a in 0u64..30) {
        let r = residue_equidistribution(&word, q, a % q).unwrap();
        prop_assert!(r.inequality_holds(), "{:?}", r);
    }

    #[test]
    fn rigid_chain_is_consistent(p in prop::collection::vec(1u32..4, 1..6), q in prop::collection::vec(1u32..4, 6)) {
        let spec = make_chacon(&p, &q[..p.len()]).unwrap();
        let sys = from_rank_one_rigid(&spec, RigidParams { r_bound: 8 }).unwrap();
        for s in 0..=sys.levels() {
            let want = spec.word(s).unwrap().materialize_all().unwrap();
            prop_assert_eq!(sys.materialize(chain_word(s), 1 << 22).unwrap(), want);
            if let Some(d) = sys.decomp(chain_word(s)) {
                prop_assert!(d.parts.len() < 8);
            }
        }
        let spec = make_katok(&p).unwrap();
        let sys = from_rank_one_rigid(&spec, RigidParams { r_bound: 8 }).unwrap();
        let top = spec.word(spec.levels()).unwrap().materialize_all().unwrap();
        prop_assert_eq!(sys.materialize(chain_word(sys.levels()), 1 << 22).unwrap(), top);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn resultant_independent_of_term_order(
        a in prop::collection::vec(0u32..=3, 2),
        pair in prop::sample::select(vec![(7u64, 13u64), (7, 19), (13, 19), (7, 31)]),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let pattern = SpacerPattern::new(3, a).unwrap();
        let (p, q) = pair;
        let (g1, g2) = g_pair(&pattern, p, q);
        let f = rank1::cert::build_f(&pattern, p, q);
        let mut terms: Vec<(i64, i64, BigInt)> = f.terms().map(|(i, j, c)| (i, j, c.clone())).collect();
        terms.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let mut shuffled = LaurentPoly2::new();
        for (i, j, c) in terms {
            shuffled.add_term(i, j, c);
        }
        prop_assert_eq!(&shuffled, &f);
        let lift = |l: &LaurentPoly2| YPoly::from_laurent(&l.shift(0, -l.min_exponents().1)).coeffs;
        prop_assert_eq!(lift(&shuffled), lift(&f));
        let m = Modulus { p: MERSENNE61 };
        let mut rev = g1.clone();
        rev.coeffs.iter_mut().for_each(|c| c.reverse());
        prop_assert_eq!(resultant_at(&rev, &g2, 2, &m), resultant_at(&g1, &g2, 2, &m));
    }

    #[test]
    fn rho_in_unit_interval(a in prop::collection::vec(0u32..=4, 1..4)) {
        let v = a.len() as u32 + 1;
        let (p, q) = [(3, 5), (7, 13), (5, 13)][a.len() - 1];
        let pattern = SpacerPattern::new(v, a).unwrap();
        let g = rho_defect(&pattern, p, q, 16, 16);
        prop_assert!(g.rho.iter().all(|&r| (0.0..=1.0 + 1e-12).contains(&r)));
    }
}

#[test]
fn iet_step_is_a_bijection_on_rationals() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let den = rng.gen_range(3i64..10_000);
        let a = rng.gen_range(1..=den / 2);
        let b = rng.gen_range(1..den - a);
        let alpha = BigRational::new(a.into(), den.into());
        let beta = BigRational::new(b.into(), den.into());
        let x = BigRational::new(rng.gen_range(0..den).into(), den.into());
        let y = step_rational(&alpha, &beta, &x).unwrap();
        assert!(y >= BigRational::from_integer(0.into()) && y < BigRational::from_integer(1.into()));
        assert_eq!(step_inverse_rational(&alpha, &beta, &y).unwrap(), x);
    }
}

#[test]
fn config_round_trip() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let word = |rng: &mut rand_chacha::ChaCha8Rng| -> String {
        let chars = b"abcxyz0123456789()+-*/._ ";
        let n = rng.gen_range(1..12);
        let s: String = (0..n).map(|_| chars[rng.gen_range(0..chars.len())] as char).collect();
        s.trim().to_string()
    };
    let systems = [SystemKind::Chacon, SystemKind::Katok, SystemKind::Spec, SystemKind::Iet, SystemKind::Random];
    let stats = [Statistic::Moebius, Statistic::Bilinear, Statistic::Pnt, Statistic::Residue, Statistic::Integral, Statistic::Arcs];
    for _ in 0..100 {
        let mut schedule = vec![rng.gen_range(1..1000u64)];
        for _ in 0..rng.gen_range(0..5) {
            let last = *schedule.last().unwrap();
            schedule.push(last + rng.gen_range(1..100_000));
        }
        let modulus = rng.gen_range(1..50u64);
        let mut spec_file = word(&mut rng);
        if spec_file.is_empty() {
            spec_file.push('f');
        }
        let cfg = ExperimentConfig {
            name: word(&mut rng),
            system: systems[rng.gen_range(0..systems.len())],
            chacon_p: rng.gen_range(1..9),
            chacon_q: rng.gen_range(1..9),
            katok_p: rng.gen_range(1..9),
            spec_file,
            iet_alpha: word(&mut rng),
            iet_beta: word(&mut rng),
            iet_x0: word(&mut rng),
            iet_letter: rng.gen_range(1..=3),
            random_density: rng.gen_range(0.0..=1.0),
            schedule,
            primes: (0..rng.gen_range(0..4)).map(|_| (rng.gen_range(1..100), rng.gen_range(1..100))).collect(),
            statistics: stats.iter().copied().filter(|_| rng.gen_bool(0.5)).collect(),
            tau: rng.gen_range(1e-6..0.333),
            q0: rng.gen_range(0..64),
            pnt_modulus: rng.gen_range(1..100),
            pnt_offset: rng.gen_range(0..1000),
            residue_modulus: modulus,
            residue_class: rng.gen_range(0..modulus),
            seed: rng.gen(),
            out_dir: word(&mut rng),
            formats: [Format::Csv, Format::Json, Format::Svg].into_iter().filter(|_| rng.gen_bool(0.5)).collect(),
            assert_decay: rng.gen_bool(0.5),
        };
        assert_eq!(parse_config_str(&cfg.to_text()).unwrap(), cfg);
    }
}
