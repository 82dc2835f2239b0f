use num_bigint::BigInt;
use num_traits::Zero;
use rank1::cert::{exact_resultant, g_pair, resultant_at, resultant_test, Modulus, SpacerPattern, Verdict, MERSENNE61};
use serde_json::Value;

fn cases() -> Vec<Value> {
    include_str!("oracles/resultant_oracle.jsonl")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn pattern(c: &Value) -> (SpacerPattern, u64, u64) {
    let v = c["v"].as_u64().unwrap() as u32;
    let a = c["a"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap() as u32).collect();
    (SpacerPattern::new(v, a).unwrap(), c["p"].as_u64().unwrap(), c["q"].as_u64().unwrap())
}

#[test]
fn verdicts_match_oracle() {
    for c in cases() {
        let (pat, p, q) = pattern(&c);
        let want = if c["zero"].as_bool().unwrap() { Verdict::Degenerate } else { Verdict::Certified };
        assert_eq!(resultant_test(&pat, p, q).unwrap().verdict, want, "{c}");
    }
}

#[test]
fn modular_values_match_oracle() {
    let m = Modulus { p: MERSENNE61 };
    for c in cases().iter().filter(|c| !c["zero"].as_bool().unwrap()) {
        let (pat, p, q) = pattern(c);
        let (g1, g2) = g_pair(&pat, p, q);
        let want: u64 = c["value_at_2_mod"].as_str().unwrap().parse().unwrap();
        assert_eq!(resultant_at(&g1, &g2, 2, &m), Some(want), "{c}");
    }
}

#[test]
fn exact_resultant_matches_oracle() {
    let c = &cases()[2];
    let (pat, p, q) = pattern(c);
    let (g1, g2) = g_pair(&pat, p, q);
    let r = exact_resultant(&g1, &g2, 1 << 30).unwrap();
    assert_eq!(r.len() - 1, c["degree"].as_u64().unwrap() as usize);
    assert_eq!(r.last().unwrap(), &c["lead"].as_str().unwrap().parse::<BigInt>().unwrap());
    let low = r.iter().position(|x| !x.is_zero()).unwrap();
    assert_eq!(low, c["low_deg"].as_u64().unwrap() as usize);
    assert_eq!(r.iter().filter(|x| !x.is_zero()).count(), c["nterms"].as_u64().unwrap() as usize);
}
