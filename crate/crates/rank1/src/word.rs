//! Rank-one words built by cutting and stacking.
//!
//! A [`RankOneSpec`] stores the cut counts `w_n` and spacer runs `a_{n,j}`.
//! Words `B_n` are never built eagerly; [`SymbolicWord::materialize`]
//! descends the recursion and only emits the requested range.

use num_bigint::BigUint;
use num_traits::One;
use std::fmt;

pub const DEFAULT_CAP: u64 = 1 << 26;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WordError {
    #[error("level {level}: cut count {w} must be at least 2")]
    CutTooSmall { level: usize, w: u32 },
    #[error("level {level}: expected {expected} spacer entries (or one more for a trailing run), got {got}")]
    SpacerCount { level: usize, expected: usize, got: usize },
    #[error("level {level}: bound violated ({what})")]
    BoundViolated { level: usize, what: String },
    #[error("level {level} is not defined (spec has {max} levels)")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("range {start}..{end} exceeds the word length {len}")]
    Bounds { start: u128, end: u128, len: String },
    #[error("range of {requested} symbols exceeds the materialization cap {cap}")]
    Capacity { requested: u128, cap: u64 },
    #[error("spec line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Cutting-and-stacking data. Level `n` glues `w_n` copies of `B_n`
/// with spacer runs `a_{n,1..w_n-1}` between them; a level may carry one
/// extra entry, a run appended after the last copy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankOneSpec {
    cuts: Vec<u32>,
    spacers: Vec<Vec<u32>>,
    declared_bounds: Option<(u32, u32)>,
    lens: Vec<u128>,
}

impl RankOneSpec {
    pub fn new(cuts: Vec<u32>, spacers: Vec<Vec<u32>>) -> Result<Self, WordError> {
        if cuts.len() != spacers.len() {
            return Err(WordError::SpacerCount { level: cuts.len().min(spacers.len()), expected: cuts.len(), got: spacers.len() });
        }
        for (n, (&w, a)) in cuts.iter().zip(&spacers).enumerate() {
            if w < 2 {
                return Err(WordError::CutTooSmall { level: n, w });
            }
            let need = w as usize - 1;
            if a.len() != need && a.len() != need + 1 {
                return Err(WordError::SpacerCount { level: n, expected: need, got: a.len() });
            }
        }
        let mut lens = Vec::with_capacity(cuts.len() + 1);
        lens.push(1u128);
        for (w, a) in cuts.iter().zip(&spacers) {
            let h = *lens.last().unwrap();
            let spacer: u128 = a.iter().map(|&x| x as u128).sum();
            lens.push(h.saturating_mul(*w as u128).saturating_add(spacer));
        }
        Ok(RankOneSpec { cuts, spacers, declared_bounds: None, lens })
    }

    /// Declares `w_n <= w_max` and `a_{n,j} <= a_max`, checking every level.
    pub fn with_bounds(mut self, w_max: u32, a_max: u32) -> Result<Self, WordError> {
        for n in 0..self.levels() {
            if self.cuts[n] > w_max {
                return Err(WordError::BoundViolated { level: n, what: format!("w = {} > {}", self.cuts[n], w_max) });
            }
            if let Some(&a) = self.spacers[n].iter().find(|&&a| a > a_max) {
                return Err(WordError::BoundViolated { level: n, what: format!("a = {} > {}", a, a_max) });
            }
        }
        self.declared_bounds = Some((w_max, a_max));
        Ok(self)
    }

    /// Number of defined cut levels; words exist for levels `0..=levels()`.
    pub fn levels(&self) -> usize {
        self.cuts.len()
    }

    pub fn cut(&self, n: usize) -> u32 {
        self.cuts[n]
    }

    /// Spacer runs of level `n`, including a trailing run when present.
    pub fn spacers(&self, n: usize) -> &[u32] {
        &self.spacers[n]
    }

    pub fn cuts(&self) -> &[u32] {
        &self.cuts
    }

    pub fn declared_bounds(&self) -> Option<(u32, u32)> {
        self.declared_bounds
    }

    /// Observed `(max w_n, max a_{n,j})` over the defined levels.
    pub fn bounds(&self) -> (u32, u32) {
        let w = self.cuts.iter().copied().max().unwrap_or(0);
        let a = self.spacers.iter().flatten().copied().max().unwrap_or(0);
        (w, a)
    }

    /// Height as a saturating `u128`; exact below `u128::MAX`.
    pub fn height_u128(&self, n: usize) -> u128 {
        self.lens[n]
    }

    /// Partial sums of `sum_j a_{n,j} / (w_n h_n)`.
    pub fn summability_partial_sums(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.levels());
        for n in 0..self.levels() {
            let a: f64 = self.spacers[n].iter().map(|&x| x as f64).sum();
            acc += a / (self.cuts[n] as f64 * self.lens[n] as f64);
            out.push(acc);
        }
        out
    }

    /// `s_n(k) = a_{n,1} + ... + a_{n,k}` for `k = 0..w_n`.
    pub fn offsets(&self, n: usize) -> Vec<u64> {
        let w = self.cuts[n] as usize;
        let mut s = vec![0u64; w];
        for k in 1..w {
            s[k] = s[k - 1] + self.spacers[n][k - 1] as u64;
        }
        s
    }

    pub fn word(&self, level: usize) -> Result<SymbolicWord<'_>, WordError> {
        if level > self.levels() {
            return Err(WordError::LevelOutOfRange { level, max: self.levels() });
        }
        Ok(SymbolicWord { spec: self, level })
    }
}

/// `h_n` by the exact recursion.
pub fn height(spec: &RankOneSpec, n: usize) -> Result<BigUint, WordError> {
    if n > spec.levels() {
        return Err(WordError::LevelOutOfRange { level: n, max: spec.levels() });
    }
    let mut h = BigUint::one();
    for k in 0..n {
        let s: u64 = spec.spacers[k].iter().map(|&x| x as u64).sum();
        h = h * spec.cuts[k] + s;
    }
    Ok(h)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpacerProfile {
    pub min: u32,
    pub max: u32,
    pub uniform: bool,
}

/// Min and max spacer run at level `n` (trailing run included).
pub fn spacer_profile(spec: &RankOneSpec, n: usize) -> SpacerProfile {
    let a = &spec.spacers[n];
    let min = a.iter().copied().min().unwrap_or(0);
    let max = a.iter().copied().max().unwrap_or(0);
    SpacerProfile { min, max, uniform: min == max }
}

/// `B_{n+1} = B_n^{p_n} 1 B_n^{q_n}`.
pub fn make_chacon(p: &[u32], q: &[u32]) -> Result<RankOneSpec, WordError> {
    assert_eq!(p.len(), q.len(), "p and q sequences must have equal length");
    let mut cuts = Vec::new();
    let mut spacers = Vec::new();
    for (n, (&pn, &qn)) in p.iter().zip(q).enumerate() {
        if pn == 0 || qn == 0 {
            return Err(WordError::Parse { line: 0, msg: format!("level {n}: chacon needs p, q >= 1") });
        }
        let w = pn + qn;
        let mut a = vec![0u32; (w - 1) as usize];
        a[(pn - 1) as usize] = 1;
        cuts.push(w);
        spacers.push(a);
    }
    RankOneSpec::new(cuts, spacers)
}

/// `B_{n+1} = B_n^{p_n} (B_n 1)^{p_n}`.
pub fn make_katok(p: &[u32]) -> Result<RankOneSpec, WordError> {
    let mut cuts = Vec::new();
    let mut spacers = Vec::new();
    for (n, &pn) in p.iter().enumerate() {
        if pn == 0 {
            return Err(WordError::Parse { line: 0, msg: format!("level {n}: katok needs p >= 1") });
        }
        let w = 2 * pn;
        let a: Vec<u32> = (1..=w).map(|j| u32::from(j > pn)).collect();
        cuts.push(w);
        spacers.push(a);
    }
    RankOneSpec::new(cuts, spacers)
}

/// Classical Chacon: `B_{n+1} = B_n B_n 1 B_n`.
pub fn chacon_classical(levels: usize) -> RankOneSpec {
    make_chacon(&vec![2; levels], &vec![1; levels]).expect("valid chacon parameters")
}

#[derive(Clone, Copy, Debug)]
pub struct SymbolicWord<'a> {
    spec: &'a RankOneSpec,
    level: usize,
}

impl<'a> SymbolicWord<'a> {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn spec(&self) -> &'a RankOneSpec {
        self.spec
    }

    pub fn len(&self) -> BigUint {
        height(self.spec, self.level).expect("level checked at construction")
    }

    pub fn len_u128(&self) -> u128 {
        self.spec.lens[self.level]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Symbols `start..end` with the default cap.
    pub fn materialize(&self, start: u128, end: u128) -> Result<Vec<u8>, WordError> {
        self.materialize_capped(start, end, DEFAULT_CAP)
    }

    pub fn materialize_capped(&self, start: u128, end: u128, cap: u64) -> Result<Vec<u8>, WordError> {
        let len = self.len_u128();
        if start > end || end > len {
            return Err(WordError::Bounds { start, end, len: self.len().to_string() });
        }
        if end - start > cap as u128 {
            return Err(WordError::Capacity { requested: end - start, cap });
        }
        let mut out = Vec::with_capacity((end - start) as usize);
        fill(self.spec, self.level, start, end, &mut out);
        Ok(out)
    }

    pub fn materialize_all(&self) -> Result<Vec<u8>, WordError> {
        self.materialize(0, self.len_u128())
    }
}

impl fmt::Display for SymbolicWord<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B_{} (length {})", self.level, self.len())
    }
}

fn fill(spec: &RankOneSpec, level: usize, lo: u128, hi: u128, out: &mut Vec<u8>) {
    if lo >= hi {
        return;
    }
    if level == 0 {
        out.push(0);
        return;
    }
    let n = level - 1;
    let h = spec.lens[n];
    let w = spec.cuts[n] as usize;
    let a = &spec.spacers[n];
    let mut pos: u128 = 0;
    for k in 0..w {
        let end = pos.saturating_add(h);
        if end > lo && pos < hi {
            fill(spec, n, lo.max(pos) - pos, hi.min(end) - pos, out);
        }
        pos = end;
        if pos >= hi {
            return;
        }
        if let Some(&run) = a.get(k) {
            let end = pos + run as u128;
            if end > lo {
                let from = lo.max(pos);
                let to = hi.min(end);
                out.extend(std::iter::repeat_n(1u8, (to - from) as usize));
            }
            pos = end;
            if pos >= hi {
                return;
            }
        }
    }
}

/// Renders a 0/1 word as text.
pub fn to_bitstring(w: &[u8]) -> String {
    w.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

pub fn from_bitstring(s: &str) -> Vec<u8> {
    s.bytes().filter(|b| *b == b'0' || *b == b'1').map(|b| b - b'0').collect()
}

fn parse_list(s: &str, line: usize) -> Result<Vec<u32>, WordError> {
    let mut out = Vec::new();
    for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let (v, rep) = match tok.split_once('*') {
            Some((v, r)) => (v.trim(), r.trim()),
            None => (tok, "1"),
        };
        let v: u32 = v.parse().map_err(|_| WordError::Parse { line, msg: format!("bad integer {v:?}") })?;
        let rep: usize = rep.parse().map_err(|_| WordError::Parse { line, msg: format!("bad repeat count {rep:?}") })?;
        out.extend(std::iter::repeat_n(v, rep));
    }
    Ok(out)
}

/// Parses the key-value spec format.
///
/// ```text
/// family = chacon
/// p = 2*10
/// q = 1*10
/// ```
///
/// `family = custom` takes `cuts = 3*4` and `spacers = 0,1; 0,1; (0,1)*2`.
/// Lists accept `value*count` repetition; groups in `spacers` accept
/// `(list)*count`.
pub fn parse_spec(text: &str) -> Result<RankOneSpec, WordError> {
    let mut kv: Vec<(String, String, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| WordError::Parse { line: i + 1, msg: "expected key = value".into() })?;
        kv.push((k.trim().to_string(), v.trim().to_string(), i + 1));
    }
    let get = |key: &str| kv.iter().find(|(k, _, _)| k == key).map(|(_, v, l)| (v.as_str(), *l));
    for (k, _, l) in &kv {
        if !["family", "cuts", "spacers", "p", "q", "bound_w", "bound_a"].contains(&k.as_str()) {
            return Err(WordError::Parse { line: *l, msg: format!("unknown key {k:?}") });
        }
    }
    let family = get("family").map(|(v, _)| v).unwrap_or("custom");
    let spec = match family {
        "chacon" => {
            let (p, lp) = get("p").ok_or(WordError::Parse { line: 0, msg: "chacon needs p".into() })?;
            let (q, lq) = get("q").ok_or(WordError::Parse { line: 0, msg: "chacon needs q".into() })?;
            let p = parse_list(p, lp)?;
            let q = parse_list(q, lq)?;
            if p.len() != q.len() {
                return Err(WordError::Parse { line: lq, msg: "p and q lists differ in length".into() });
            }
            make_chacon(&p, &q)?
        }
        "katok" => {
            let (p, lp) = get("p").ok_or(WordError::Parse { line: 0, msg: "katok needs p".into() })?;
            make_katok(&parse_list(p, lp)?)?
        }
        "custom" => {
            let (c, lc) = get("cuts").ok_or(WordError::Parse { line: 0, msg: "custom spec needs cuts".into() })?;
            let cuts = parse_list(c, lc)?;
            let (s, ls) = get("spacers").ok_or(WordError::Parse { line: 0, msg: "custom spec needs spacers".into() })?;
            let mut spacers = Vec::new();
            for group in s.split(';').map(str::trim).filter(|g| !g.is_empty()) {
                if let Some(rest) = group.strip_prefix('(') {
                    let (inner, tail) = rest.split_once(')').ok_or_else(|| WordError::Parse { line: ls, msg: "unclosed '('".into() })?;
                    let rep = match tail.trim().strip_prefix('*') {
                        Some(r) => {
                            r.trim().parse::<usize>().map_err(|_| WordError::Parse { line: ls, msg: format!("bad repeat {r:?}") })?
                        }
                        None => 1,
                    };
                    let list = parse_list(inner, ls)?;
                    for _ in 0..rep {
                        spacers.push(list.clone());
                    }
                } else {
                    spacers.push(parse_list(group, ls)?);
                }
            }
            RankOneSpec::new(cuts, spacers).map_err(|e| match e {
                WordError::Parse { .. } => e,
                other => WordError::Parse { line: ls, msg: other.to_string() },
            })?
        }
        other => return Err(WordError::Parse { line: 0, msg: format!("unknown family {other:?}") }),
    };
    match (get("bound_w"), get("bound_a")) {
        (Some((w, lw)), Some((a, la))) => {
            let w = w.parse().map_err(|_| WordError::Parse { line: lw, msg: "bad bound_w".into() })?;
            let a = a.parse().map_err(|_| WordError::Parse { line: la, msg: "bad bound_a".into() })?;
            spec.with_bounds(w, a)
        }
        (None, None) => Ok(spec),
        _ => Err(WordError::Parse { line: 0, msg: "bound_w and bound_a must be given together".into() }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expand_naive(spec: &RankOneSpec, level: usize) -> Vec<u8> {
        let mut b = vec![0u8];
        for n in 0..level {
            let mut next = Vec::new();
            for k in 0..spec.cut(n) as usize {
                next.extend_from_slice(&b);
                if let Some(&r) = spec.spacers(n).get(k) {
                    next.extend(std::iter::repeat_n(1, r as usize));
                }
            }
            b = next;
        }
        b
    }

    #[test]
    fn chacon_heights() {
        let s = chacon_classical(4);
        assert_eq!(height(&s, 0).unwrap(), BigUint::from(1u32));
        assert_eq!(height(&s, 1).unwrap(), BigUint::from(4u32));
        assert_eq!(height(&s, 2).unwrap(), BigUint::from(13u32));
        let b2 = s.word(2).unwrap().materialize_all().unwrap();
        assert_eq!(b2.len(), 13);
    }

    #[test]
    fn chacon_words() {
        let s = chacon_classical(3);
        assert_eq!(to_bitstring(&s.word(1).unwrap().materialize(0, 4).unwrap()), "0010");
        assert_eq!(to_bitstring(&s.word(2).unwrap().materialize(0, 13).unwrap()), "0010001010010");
        assert_eq!(to_bitstring(&s.word(0).unwrap().materialize(0, 1).unwrap()), "0");
    }

    #[test]
    fn generalized_chacon_and_katok() {
        let c21 = make_chacon(&[2], &[1]).unwrap();
        assert_eq!(to_bitstring(&c21.word(1).unwrap().materialize_all().unwrap()), "0010");
        let c11 = make_chacon(&[1], &[1]).unwrap();
        assert_eq!(to_bitstring(&c11.word(1).unwrap().materialize_all().unwrap()), "010");
        let k1 = make_katok(&[1]).unwrap();
        assert_eq!(to_bitstring(&k1.word(1).unwrap().materialize_all().unwrap()), "001");
    }

    #[test]
    fn literal_rules_hold() {
        let p = [1, 2, 3, 2, 1, 3, 2, 1];
        let q = [2, 1, 1, 3, 2, 1, 1, 2];
        let c = make_chacon(&p, &q).unwrap();
        let k = make_katok(&p).unwrap();
        for n in 0..p.len() {
            let bn = c.word(n).unwrap().materialize_all().unwrap();
            let mut want = Vec::new();
            for _ in 0..p[n] {
                want.extend_from_slice(&bn);
            }
            want.push(1);
            for _ in 0..q[n] {
                want.extend_from_slice(&bn);
            }
            assert_eq!(c.word(n + 1).unwrap().materialize_all().unwrap(), want);

            let bn = k.word(n).unwrap().materialize_all().unwrap();
            let mut want = Vec::new();
            for _ in 0..p[n] {
                want.extend_from_slice(&bn);
            }
            for _ in 0..p[n] {
                want.extend_from_slice(&bn);
                want.push(1);
            }
            assert_eq!(k.word(n + 1).unwrap().materialize_all().unwrap(), want);
        }
    }

    #[test]
    fn profiles() {
        let c = chacon_classical(2);
        assert_eq!(spacer_profile(&c, 1), SpacerProfile { min: 0, max: 1, uniform: false });
        let u = RankOneSpec::new(vec![3, 3], vec![vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(spacer_profile(&u, 0), SpacerProfile { min: 1, max: 1, uniform: true });
        let k = make_katok(&[1, 2, 3]).unwrap();
        for n in 0..3 {
            assert_eq!(spacer_profile(&k, n), SpacerProfile { min: 0, max: 1, uniform: false });
        }
    }

    #[test]
    fn ranges_and_errors() {
        let s = chacon_classical(6);
        let w = s.word(6).unwrap();
        let full = w.materialize_all().unwrap();
        assert_eq!(full, expand_naive(&s, 6));
        assert_eq!(w.materialize(100, 250).unwrap(), full[100..250].to_vec());
        assert!(matches!(w.materialize(0, 10_000), Err(WordError::Bounds { .. })));
        assert!(matches!(w.materialize_capped(0, 100, 10), Err(WordError::Capacity { .. })));
        assert!(RankOneSpec::new(vec![1], vec![vec![]]).is_err());
    }

    #[test]
    fn deep_levels_stay_lazy() {
        let s = chacon_classical(90);
        let w = s.word(90).unwrap();
        assert_eq!(w.len_u128(), u128::MAX);
        let head = w.materialize(0, 13).unwrap();
        assert_eq!(to_bitstring(&head), "0010001010010");
        let h = height(&s, 90).unwrap();
        assert_eq!(h, (BigUint::from(3u32).pow(91) - 1u32) / 2u32);
    }

    #[test]
    fn spec_file() {
        let s = parse_spec("family = chacon\np = 2*5\nq = 1*5\n").unwrap();
        assert_eq!(s, chacon_classical(5));
        let c = parse_spec("family = custom\ncuts = 3*2\nspacers = (0,1)*2\n").unwrap();
        assert_eq!(c, chacon_classical(2));
        let e = parse_spec("family = custom\ncutz = 3\n").unwrap_err();
        assert!(matches!(e, WordError::Parse { line: 2, .. }));
        assert!(parse_spec("family = chacon\np = 2\nq = 1\nbound_w = 3\nbound_a = 1\n").is_ok());
        assert!(parse_spec("family = chacon\np = 2\nq = 1\nbound_w = 2\nbound_a = 1\n").is_err());
    }

    #[test]
    fn summability_monotone() {
        let s = chacon_classical(10);
        let ps = s.summability_partial_sums();
        assert!(ps.windows(2).all(|w| w[1] >= w[0]));
        let bound: f64 = (0..10).map(|n| 1.0 / s.height_u128(n) as f64).sum();
        assert!(*ps.last().unwrap() <= bound + 1e-12);
    }
}
