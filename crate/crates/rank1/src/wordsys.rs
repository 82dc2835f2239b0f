//! Symbolic systems whose level-`n` words factor as
//! `W = W_1^{k_1} ... W_r^{k_r}` over words of lower levels.

use crate::poly::{eval_word_grid, grid_size, l1_norm};
use crate::word::{from_bitstring, to_bitstring, RankOneSpec, WordError};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SysError {
    #[error("structure error: {0}")]
    Structure(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Word `index` of level `level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordRef {
    pub level: usize,
    pub index: usize,
}

/// `W_1^{k_1} ... W_r^{k_r}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomp {
    pub parts: Vec<(WordRef, u64)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordSystem {
    base: Vec<Vec<u8>>,
    levels: Vec<Vec<Decomp>>,
    r_bound: usize,
    lens: Vec<Vec<u128>>,
}

impl WordSystem {
    pub fn new(base: Vec<Vec<u8>>, r_bound: usize) -> Result<Self, SysError> {
        if base.is_empty() || base.iter().any(|w| w.is_empty()) {
            return Err(SysError::Structure("level 0 needs nonempty words".into()));
        }
        let lens = vec![base.iter().map(|w| w.len() as u128).collect()];
        Ok(WordSystem { base, levels: Vec::new(), r_bound, lens })
    }

    /// Appends level `levels() + 1`.
    pub fn push_level(&mut self, words: Vec<Decomp>) -> Result<(), SysError> {
        let n = self.levels.len() + 1;
        if words.is_empty() {
            return Err(SysError::Structure(format!("level {n} is empty")));
        }
        let mut lens = Vec::with_capacity(words.len());
        for (i, d) in words.iter().enumerate() {
            if d.parts.is_empty() {
                return Err(SysError::Structure(format!("level {n} word {i} has no parts")));
            }
            if d.parts.len() >= self.r_bound {
                return Err(SysError::Structure(format!("level {n} word {i} has r = {} >= r_bound = {}", d.parts.len(), self.r_bound)));
            }
            let mut len: u128 = 0;
            for &(r, k) in &d.parts {
                if r.level >= n || r.index >= self.lens[r.level].len() {
                    return Err(SysError::Structure(format!("level {n} word {i}: bad reference {r:?}")));
                }
                if k == 0 {
                    return Err(SysError::Structure(format!("level {n} word {i}: zero exponent")));
                }
                len = len.saturating_add(self.lens[r.level][r.index].saturating_mul(k as u128));
            }
            lens.push(len);
        }
        self.levels.push(words);
        self.lens.push(lens);
        Ok(())
    }

    /// Highest level.
    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    pub fn r_bound(&self) -> usize {
        self.r_bound
    }

    pub fn words_at(&self, level: usize) -> usize {
        self.lens[level].len()
    }

    pub fn decomp(&self, r: WordRef) -> Option<&Decomp> {
        if r.level == 0 {
            None
        } else {
            self.levels[r.level - 1].get(r.index)
        }
    }

    pub fn len(&self, r: WordRef) -> u128 {
        self.lens[r.level][r.index]
    }

    pub fn materialize(&self, r: WordRef, cap: usize) -> Result<Vec<u8>, SysError> {
        let len = self.len(r);
        if len > cap as u128 {
            return Err(SysError::Capacity(format!("word of length {len} exceeds cap {cap}")));
        }
        let mut out = Vec::with_capacity(len as usize);
        self.fill(r, &mut out);
        Ok(out)
    }

    fn fill(&self, r: WordRef, out: &mut Vec<u8>) {
        match self.decomp(r) {
            None => out.extend_from_slice(&self.base[r.index]),
            Some(d) => {
                for &(p, k) in &d.parts {
                    let start = out.len();
                    self.fill(p, out);
                    let end = out.len();
                    for _ in 1..k {
                        out.extend_from_within(start..end);
                    }
                }
            }
        }
    }

    /// Words of level `<= floor` reached by expanding references above it.
    pub fn constituents(&self, r: WordRef, floor: usize) -> Vec<WordRef> {
        let mut out = Vec::new();
        let mut stack = vec![r];
        let mut seen = std::collections::HashSet::new();
        while let Some(w) = stack.pop() {
            if !seen.insert(w) {
                continue;
            }
            if w.level <= floor {
                out.push(w);
                continue;
            }
            for &(p, _) in &self.decomp(w).unwrap().parts {
                stack.push(p);
            }
        }
        out.sort();
        out
    }

    /// Parses `n: W = W[l,i]^k ...` lines; level 0 lines give bits.
    pub fn parse(text: &str, r_bound: usize) -> Result<Self, SysError> {
        let mut base = Vec::new();
        let mut pending: Vec<Vec<Decomp>> = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let perr = |msg: String| SysError::Parse { line, msg };
            let body = raw.split('#').next().unwrap().trim();
            if body.is_empty() {
                continue;
            }
            let (lvl, rest) = body.split_once(':').ok_or_else(|| perr("expected 'n: W = ...'".into()))?;
            let lvl: usize = lvl.trim().parse().map_err(|_| perr(format!("bad level {:?}", lvl.trim())))?;
            let rhs = rest
                .trim()
                .strip_prefix('W')
                .and_then(|s| s.trim_start().strip_prefix('='))
                .ok_or_else(|| perr("expected 'W ='".into()))?
                .trim();
            if lvl == 0 {
                if rhs.is_empty() || !rhs.chars().all(|c| c == '0' || c == '1') {
                    return Err(perr("level 0 words are bit strings".into()));
                }
                if !pending.is_empty() {
                    return Err(perr("level 0 words must come first".into()));
                }
                base.push(from_bitstring(rhs));
                continue;
            }
            if lvl > pending.len() + 1 {
                return Err(perr(format!("level {lvl} defined before level {}", pending.len() + 1)));
            }
            let mut parts = Vec::new();
            for tok in rhs.split_whitespace() {
                parts.push(parse_part(tok).map_err(&perr)?);
            }
            if lvl == pending.len() + 1 {
                pending.push(Vec::new());
            }
            pending[lvl - 1].push(Decomp { parts });
        }
        let mut sys = WordSystem::new(base, r_bound)?;
        for lv in pending {
            sys.push_level(lv)?;
        }
        Ok(sys)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for w in &self.base {
            s.push_str(&format!("0: W = {}\n", to_bitstring(w)));
        }
        for (n, lv) in self.levels.iter().enumerate() {
            for d in lv {
                let parts: Vec<String> = d.parts.iter().map(|(r, k)| format!("W[{},{}]^{}", r.level, r.index, k)).collect();
                s.push_str(&format!("{}: W = {}\n", n + 1, parts.join(" ")));
            }
        }
        s
    }
}

fn parse_part(tok: &str) -> Result<(WordRef, u64), String> {
    let inner = tok.strip_prefix("W[").ok_or_else(|| format!("bad part {tok:?}"))?;
    let (refs, rest) = inner.split_once(']').ok_or_else(|| format!("bad part {tok:?}"))?;
    let (l, i) = refs.split_once(',').ok_or_else(|| format!("expected W[level,index] in {tok:?}"))?;
    let level = l.trim().parse().map_err(|_| format!("bad level in {tok:?}"))?;
    let index = i.trim().parse().map_err(|_| format!("bad index in {tok:?}"))?;
    let k = match rest.strip_prefix('^') {
        Some(k) => k.parse().map_err(|_| format!("bad exponent in {tok:?}"))?,
        None if rest.is_empty() => 1,
        None => return Err(format!("bad part {tok:?}")),
    };
    Ok((WordRef { level, index }, k))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RigidParams {
    pub r_bound: usize,
}

/// Builds the chain `W_s = B_s` with level 0 `{1, B_0}`. Level `s + 1`
/// groups the stacking units of `B_{s+1}` into the fewest powers of
/// `W_s`, `1^a` and `W_s 1^a`. Each `W_s 1^a` used is an extra word of
/// level `s` whose parts are those of `W_s` followed by `1^a`.
pub fn from_rank_one_rigid(spec: &RankOneSpec, params: RigidParams) -> Result<WordSystem, SysError> {
    let levels = spec.levels();
    let groupings: Vec<(Vec<Group>, Vec<u32>)> = (0..levels)
        .map(|s| {
            let w = spec.cut(s) as usize;
            let runs: Vec<u32> = (0..w).map(|k| spec.spacers(s).get(k).copied().unwrap_or(0)).collect();
            group_units(&runs)
        })
        .collect();
    for (s, (g, _)) in groupings.iter().enumerate() {
        if g.len() >= params.r_bound {
            return Err(SysError::Structure(format!(
                "level {}: {} groups, not in the rigid regime for r_bound {}",
                s + 1,
                g.len(),
                params.r_bound
            )));
        }
    }
    let spacer = WordRef { level: 0, index: 0 };
    let empty = Vec::new();
    let needed = |s: usize| if s < levels { &groupings[s].1 } else { &empty };
    let mut base = vec![vec![1u8], vec![0u8]];
    for &a in needed(0) {
        let mut v = vec![0u8];
        v.extend(std::iter::repeat_n(1u8, a as usize));
        base.push(v);
    }
    let mut sys = WordSystem::new(base, params.r_bound)?;
    let mut top = WordRef { level: 0, index: 1 };
    let mut aux_first = 2;
    for s in 0..levels {
        let aux = |a: u32| WordRef { level: s, index: aux_first + needed(s).iter().position(|&x| x == a).unwrap() };
        let main: Vec<(WordRef, u64)> = groupings[s]
            .0
            .iter()
            .map(|g| match *g {
                Group::Top(k) => (top, k),
                Group::Spacer(a) => (spacer, a as u64),
                Group::TopSpacer(a, k) => (aux(a), k),
            })
            .collect();
        let mut words = vec![Decomp { parts: main.clone() }];
        for &a in needed(s + 1) {
            let mut parts = main.clone();
            match parts.last_mut() {
                Some((r, k)) if *r == spacer => *k += a as u64,
                _ => parts.push((spacer, a as u64)),
            }
            words.push(Decomp { parts });
        }
        sys.push_level(words)?;
        top = WordRef { level: s + 1, index: 0 };
        aux_first = 1;
    }
    Ok(sys)
}

/// Top word of the chain.
pub fn chain_top(sys: &WordSystem) -> WordRef {
    if sys.levels() == 0 {
        WordRef { level: 0, index: 1 }
    } else {
        WordRef { level: sys.levels(), index: 0 }
    }
}

/// `W_s` of a chain built by [`from_rank_one_rigid`].
pub fn chain_word(s: usize) -> WordRef {
    if s == 0 {
        WordRef { level: 0, index: 1 }
    } else {
        WordRef { level: s, index: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Group {
    Top(u64),
    Spacer(u32),
    TopSpacer(u32, u64),
}

/// Fewest groups covering the units `B 1^{a_0}, B 1^{a_1}, ...`: either
/// `B^k 1^a` over units whose runs vanish except possibly the last, or
/// `(B 1^a)^k` over units sharing a run `a > 0`. Also returns the run
/// values used in the second form.
fn group_units(runs: &[u32]) -> (Vec<Group>, Vec<u32>) {
    let w = runs.len();
    let mut best: Vec<Option<Vec<Group>>> = vec![None; w + 1];
    best[0] = Some(Vec::new());
    for i in 0..w {
        let Some(prefix) = best[i].clone() else { continue };
        let relax = |j: usize, add: &[Group], best: &mut Vec<Option<Vec<Group>>>| {
            if best[j].as_ref().is_none_or(|b| prefix.len() + add.len() < b.len()) {
                let mut g = prefix.clone();
                g.extend_from_slice(add);
                best[j] = Some(g);
            }
        };
        for j in i + 1..=w {
            let a = runs[j - 1];
            let k = (j - i) as u64;
            if a == 0 {
                relax(j, &[Group::Top(k)], &mut best);
            } else {
                relax(j, &[Group::Top(k), Group::Spacer(a)], &mut best);
                break;
            }
        }
        let a = runs[i];
        if a > 0 {
            let mut j = i;
            while j < w && runs[j] == a {
                j += 1;
                relax(j, &[Group::TopSpacer(a, (j - i) as u64)], &mut best);
            }
        }
    }
    let groups = best[w].clone().unwrap_or_default();
    let mut needed: Vec<u32> = groups.iter().filter_map(|g| if let Group::TopSpacer(a, _) = g { Some(*a) } else { None }).collect();
    needed.sort_unstable();
    needed.dedup();
    (groups, needed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRow {
    pub s: usize,
    /// `min |W| / max |W'|` over words `W` and their level-`(n-s)` constituents.
    pub beta: f64,
    pub log_beta_over_s: f64,
    pub c0_s: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    /// Least `s0` with `beta(s) > C0 s` for every `s >= s0` in range.
    pub s0: Option<usize>,
}

/// Measures `beta(s)` for every `(n, s)` with `1 <= s <= n`.
pub fn check_growth(sys: &WordSystem, c0: f64) -> GrowthReport {
    let top = sys.levels();
    let mut beta = vec![f64::INFINITY; top + 1];
    for n in 1..=top {
        for index in 0..sys.words_at(n) {
            let w = WordRef { level: n, index };
            let len = sys.len(w) as f64;
            for s in 1..=n {
                let m = sys.constituents(w, n - s).iter().map(|&c| sys.len(c)).max().unwrap() as f64;
                beta[s] = beta[s].min(len / m);
            }
        }
    }
    let rows: Vec<GrowthRow> = (1..=top)
        .map(|s| GrowthRow {
            s,
            beta: beta[s],
            log_beta_over_s: beta[s].ln() / s as f64,
            c0_s: c0 * s as f64,
            pass: beta[s] > c0 * s as f64,
        })
        .collect();
    let s0 = match rows.iter().rposition(|r| !r.pass) {
        None if rows.is_empty() => None,
        None => Some(1),
        Some(i) if i + 1 < rows.len() => Some(rows[i + 1].s),
        Some(_) => None,
    };
    GrowthReport { rows, s0 }
}

/// `|W_{top - C}| / |W_top|` along a chain built by [`from_rank_one_rigid`].
pub fn chain_ratio(sys: &WordSystem, chain_c: usize) -> Option<f64> {
    let top = sys.levels();
    if chain_c > top {
        return None;
    }
    Some(sys.len(chain_word(top - chain_c)) as f64 / sys.len(chain_word(top)) as f64)
}

/// `||P_W||_1` by a Riemann sum on `grid_size(|W|, 8)` points.
pub fn measured_l1(word: &[u8]) -> f64 {
    l1_norm(&eval_word_grid(word, grid_size(word.len() as u128, 8)).abs())
}

#[derive(Clone, Debug, PartialEq)]
pub struct L1Row {
    pub level: usize,
    pub len: u128,
    pub l1: f64,
    /// `log ||P_W||_1 / log |W|`.
    pub exponent: f64,
}

/// `||P_{W_s}||_1` along the chain for `s` in `levels`.
pub fn l1_growth_check(sys: &WordSystem, levels: std::ops::RangeInclusive<usize>, cap: usize) -> Result<Vec<L1Row>, SysError> {
    let mut rows = Vec::new();
    for s in levels {
        let r = chain_word(s);
        let word = sys.materialize(r, cap)?;
        let l1 = measured_l1(&word);
        rows.push(L1Row { level: s, len: word.len() as u128, l1, exponent: l1.ln() / (word.len() as f64).ln() });
    }
    Ok(rows)
}

/// True when the exponent column strictly decreases.
pub fn exponent_decreasing(rows: &[L1Row]) -> bool {
    rows.windows(2).all(|w| w[1].exponent < w[0].exponent)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    pub measured: f64,
    /// `sum_i log(2 + k_i) ||P_{W_i}||_1` with measured part norms.
    pub one_step: f64,
    /// The same sum with every part norm replaced by its own bound, down
    /// to level 0 where norms are measured.
    pub recursive: f64,
    /// `measured / recursive`.
    pub ratio: f64,
}

/// Right-hand side of `||P_W||_1 <~ sum log(2 + k_i) ||P_{W_i}||_1` with
/// constant 1.
pub fn iterate_l1_bound(sys: &WordSystem, r: WordRef, cap: usize) -> Result<BoundRow, SysError> {
    let mut measured_cache = std::collections::HashMap::new();
    let mut measured = |w: WordRef| -> Result<f64, SysError> {
        if let Some(&v) = measured_cache.get(&w) {
            return Ok(v);
        }
        let v = measured_l1(&sys.materialize(w, cap)?);
        measured_cache.insert(w, v);
        Ok(v)
    };
    let mut bound_cache = std::collections::HashMap::new();
    fn bound(
        sys: &WordSystem,
        w: WordRef,
        measured: &mut dyn FnMut(WordRef) -> Result<f64, SysError>,
        cache: &mut std::collections::HashMap<WordRef, f64>,
    ) -> Result<f64, SysError> {
        if let Some(&v) = cache.get(&w) {
            return Ok(v);
        }
        let v = match sys.decomp(w) {
            None => measured(w)?,
            Some(d) => {
                let mut acc = 0.0;
                for &(p, k) in &d.parts {
                    acc += (2.0 + k as f64).ln() * bound(sys, p, measured, cache)?;
                }
                acc
            }
        };
        cache.insert(w, v);
        Ok(v)
    }
    let m = measured(r)?;
    let one_step = match sys.decomp(r) {
        None => m,
        Some(d) => {
            let mut acc = 0.0;
            for &(p, k) in &d.parts {
                acc += (2.0 + k as f64).ln() * measured(p)?;
            }
            acc
        }
    };
    let recursive = bound(sys, r, &mut measured, &mut bound_cache)?;
    Ok(BoundRow { measured: m, one_step, recursive, ratio: m / recursive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::{chacon_classical, make_chacon, make_katok};

    fn doubling(levels: usize) -> WordSystem {
        let mut sys = WordSystem::new(vec![vec![1, 0]], 4).unwrap();
        for n in 1..=levels {
            sys.push_level(vec![Decomp { parts: vec![(WordRef { level: n - 1, index: 0 }, 2)] }]).unwrap();
        }
        sys
    }

    #[test]
    fn chacon_chain_reproduces_words() {
        let spec = chacon_classical(6);
        let sys = from_rank_one_rigid(&spec, RigidParams { r_bound: 8 }).unwrap();
        for s in 0..=6 {
            let want = spec.word(s).unwrap().materialize_all().unwrap();
            assert_eq!(sys.materialize(chain_word(s), 1 << 20).unwrap(), want);
        }
        assert_eq!(sys.decomp(chain_word(3)).unwrap().parts.len(), 3);
    }

    #[test]
    fn general_chacon_and_katok_groups() {
        let spec = make_chacon(&[2, 3, 4], &[2, 3, 4]).unwrap();
        let sys = from_rank_one_rigid(&spec, RigidParams { r_bound: 8 }).unwrap();
        let d = sys.decomp(chain_word(2)).unwrap();
        assert_eq!(d.parts, vec![(chain_word(1), 3), (WordRef { level: 0, index: 0 }, 1), (chain_word(1), 3)]);
        let spec = make_katok(&[2, 3, 4]).unwrap();
        let sys = from_rank_one_rigid(&spec, RigidParams { r_bound: 8 }).unwrap();
        for s in 1..=3 {
            assert_eq!(sys.decomp(chain_word(s)).unwrap().parts.len(), 2);
            let want = spec.word(s).unwrap().materialize_all().unwrap();
            assert_eq!(sys.materialize(chain_word(s), 1 << 20).unwrap(), want);
        }
    }

    #[test]
    fn rigid_regime_enforced() {
        let spec = RankOneSpec::new(vec![6], vec![vec![1, 2, 1, 2, 1]]).unwrap();
        assert!(matches!(from_rank_one_rigid(&spec, RigidParams { r_bound: 3 }), Err(SysError::Structure(_))));
    }

    #[test]
    fn doubling_growth() {
        let sys = doubling(8);
        let rep = check_growth(&sys, 1.0);
        for row in &rep.rows {
            assert_eq!(row.beta, 2f64.powi(row.s as i32));
        }
        assert_eq!(rep.s0, Some(1));
        let rep = check_growth(&sys, 10.0);
        assert_eq!(rep.s0, Some(6));
    }

    #[test]
    fn file_round_trip() {
        let spec = make_katok(&[2, 3]).unwrap();
        let sys = from_rank_one_rigid(&spec, RigidParams { r_bound: 8 }).unwrap();
        let text = sys.to_text();
        assert_eq!(WordSystem::parse(&text, 8).unwrap(), sys);
        let err = WordSystem::parse("0: W = 01\n1: W = W[0,0]^2\n1: W = W[1,0]^2\n", 8).unwrap_err();
        assert!(matches!(err, SysError::Structure(_)));
        let err = WordSystem::parse("0: W = 01\n1: W = W[0,0]^x\n", 8).unwrap_err();
        assert_eq!(err, SysError::Parse { line: 2, msg: "bad exponent in \"W[0,0]^x\"".into() });
    }

    #[test]
    fn dirichlet_l1() {
        let n = 1000u32;
        let l1 = measured_l1(&vec![1u8; (2 * n + 1) as usize]);
        let want = 4.0 / std::f64::consts::PI.powi(2) * (n as f64).ln() + 1.2703;
        assert!((l1 - want).abs() / want < 0.01, "{l1} vs {want}");
    }

    #[test]
    fn single_part_bound() {
        let mut sys = WordSystem::new(vec![vec![1, 0, 1, 1]], 4).unwrap();
        sys.push_level(vec![Decomp { parts: vec![(WordRef { level: 0, index: 0 }, 1)] }]).unwrap();
        let b = iterate_l1_bound(&sys, WordRef { level: 1, index: 0 }, 1 << 20).unwrap();
        assert!((b.one_step - 3f64.ln() * b.measured).abs() < 1e-12);
        assert!((b.ratio - 1.0 / 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn all_spacer_exponent_tends_to_zero() {
        let mut sys = WordSystem::new(vec![vec![1]], 4).unwrap();
        for n in 1..=5 {
            sys.push_level(vec![Decomp { parts: vec![(WordRef { level: n - 1, index: 0 }, 10)] }]).unwrap();
        }
        let rows = l1_growth_check(&sys, 3..=5, 1 << 20).unwrap();
        assert!(exponent_decreasing(&rows));
        assert!(rows[2].exponent < 0.2);
        let b = iterate_l1_bound(&sys, WordRef { level: 1, index: 0 }, 1 << 20).unwrap();
        assert!(b.measured <= b.one_step);
    }

    #[test]
    fn chacon_bound_ratio_bounded() {
        let sys = from_rank_one_rigid(&chacon_classical(9), RigidParams { r_bound: 8 }).unwrap();
        for s in 1..=9 {
            let b = iterate_l1_bound(&sys, chain_word(s), 1 << 20).unwrap();
            assert!(b.ratio > 0.0 && b.ratio <= 1.0, "level {s}: {b:?}");
        }
    }
}
