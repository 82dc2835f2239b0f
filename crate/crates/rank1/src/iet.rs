//! Three-interval exchange, its orbit coding and the three-interval
//! expansion extracted by first-return induction.
//!
//! Points are exact integer forms `c0 + ca*alpha + cb*beta + cx*x0`.
//! Order is decided in `f64` when safe, otherwise exactly (rational
//! parameters) or in fixed point with a configurable number of bits.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::cmp::Ordering;

pub const DEFAULT_BITS: u32 = 512;
const MAX_RETURN: usize = 1 << 22;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum IetError {
    #[error("parse error in {input:?}: {msg}")]
    Parse { input: String, msg: String },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precision exhausted comparing points (raise the bit count or the parameters violate Keane)")]
    Precision,
    #[error("level {level}: no template fits ({detail})")]
    TemplateMismatch { level: usize, detail: String },
    #[error("capacity exceeded: {0}")]
    Capacity(String),
}

/// A real number known exactly (rational) or to fixed precision.
#[derive(Clone, Debug, PartialEq)]
pub enum Real {
    Rational(BigRational),
    /// `floor(value * 2^bits)`.
    Fixed {
        mant: BigInt,
        bits: u32,
    },
}

impl Real {
    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Real::Fixed { mant, bits } => {
                let shift = bits.saturating_sub(60);
                let top: BigInt = mant >> shift;
                top.to_f64().unwrap() * 2f64.powi(-((bits - shift) as i32))
            }
        }
    }

    /// `floor(value * 2^bits)`.
    pub fn fixed(&self, bits: u32) -> BigInt {
        match self {
            Real::Rational(r) => {
                let num = r.numer() << bits as usize;
                num_integer::Integer::div_floor(&num, r.denom())
            }
            Real::Fixed { mant, bits: b } => {
                if *b >= bits {
                    mant >> (b - bits) as usize
                } else {
                    mant << (bits - b) as usize
                }
            }
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Real::Rational(_))
    }
}

/// Parses `+ - * /`, parentheses, decimals and `sqrt(...)`.
pub fn parse_real(input: &str, bits: u32) -> Result<Real, IetError> {
    let work = bits + 64;
    let toks: Vec<char> = input.chars().filter(|c| !c.is_whitespace()).collect();
    let mut p = Parser { toks: &toks, pos: 0, work, input };
    let v = p.expr()?;
    if p.pos != toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(match v {
        Real::Rational(r) => Real::Rational(r),
        Real::Fixed { mant, bits: b } => Real::Fixed { mant: mant >> (b - bits) as usize, bits },
    })
}

struct Parser<'a> {
    toks: &'a [char],
    pos: usize,
    work: u32,
    input: &'a str,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> IetError {
        IetError::Parse { input: self.input.to_string(), msg: format!("{msg} at offset {}", self.pos) }
    }

    fn peek(&self) -> Option<char> {
        self.toks.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Real, IetError> {
        let mut v = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let r = self.term()?;
            v = self.binop(v, r, c)?;
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<Real, IetError> {
        let mut v = self.factor()?;
        while let Some(c @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let r = self.factor()?;
            v = self.binop(v, r, c)?;
        }
        Ok(v)
    }

    fn factor(&mut self) -> Result<Real, IetError> {
        match self.peek() {
            Some('-') => {
                self.pos += 1;
                let v = self.factor()?;
                self.binop(Real::Rational(BigRational::zero()), v, '-')
            }
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some('s') => {
                let word: String = self.toks[self.pos..].iter().take(5).collect();
                if word != "sqrt(" {
                    return Err(self.err("unknown identifier"));
                }
                self.pos += 4;
                let v = self.factor()?;
                self.sqrt(v)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == '.') {
                    self.pos += 1;
                }
                let s: String = self.toks[start..self.pos].iter().collect();
                decimal(&s).ok_or_else(|| self.err("bad number")).map(Real::Rational)
            }
            _ => Err(self.err("expected a number")),
        }
    }

    fn binop(&self, l: Real, r: Real, op: char) -> Result<Real, IetError> {
        if let (Real::Rational(a), Real::Rational(b)) = (&l, &r) {
            return Ok(Real::Rational(match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                _ => {
                    if b.is_zero() {
                        return Err(self.err("division by zero"));
                    }
                    a / b
                }
            }));
        }
        let w = self.work;
        let (a, b) = (l.fixed(w), r.fixed(w));
        let mant = match op {
            '+' => a + b,
            '-' => a - b,
            '*' => (a * b) >> w as usize,
            _ => {
                if b.is_zero() {
                    return Err(self.err("division by zero"));
                }
                (a << w as usize) / b
            }
        };
        Ok(Real::Fixed { mant, bits: w })
    }

    fn sqrt(&self, v: Real) -> Result<Real, IetError> {
        if let Real::Rational(r) = &v {
            if r.is_negative() {
                return Err(self.err("sqrt of a negative number"));
            }
            let (n, d) = (r.numer().sqrt(), r.denom().sqrt());
            if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
                return Ok(Real::Rational(BigRational::new(n, d)));
            }
        }
        let w = self.work;
        let m = v.fixed(2 * w);
        if m.is_negative() {
            return Err(self.err("sqrt of a negative number"));
        }
        Ok(Real::Fixed { mant: m.sqrt(), bits: w })
    }
}

fn decimal(s: &str) -> Option<BigRational> {
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, f),
        None => (s, ""),
    };
    if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().ok()?;
    let den = BigInt::from(10u32).pow(frac.len() as u32);
    Some(BigRational::new(num, den))
}

/// `c[0] + c[1] alpha + c[2] beta + c[3] x0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize)]
pub struct Lin(pub [i128; 4]);

impl Lin {
    pub const ZERO: Lin = Lin([0; 4]);
    pub const ONE: Lin = Lin([1, 0, 0, 0]);
    pub const ALPHA: Lin = Lin([0, 1, 0, 0]);
    pub const BETA: Lin = Lin([0, 0, 1, 0]);
    pub const X0: Lin = Lin([0, 0, 0, 1]);

    pub fn add(self, o: Lin) -> Lin {
        Lin([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2], self.0[3] + o.0[3]])
    }

    pub fn sub(self, o: Lin) -> Lin {
        Lin([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2], self.0[3] - o.0[3]])
    }
}

/// Parameters and the comparison machinery.
#[derive(Clone, Debug)]
pub struct IetParams {
    vals: [Real; 3],
    floats: [f64; 3],
    fixed: [BigInt; 3],
    bits: u32,
}

impl IetParams {
    pub fn new(alpha: Real, beta: Real, bits: u32) -> Result<Self, IetError> {
        Self::with_x0(alpha, beta, Real::Rational(BigRational::zero()), bits)
    }

    pub fn with_x0(alpha: Real, beta: Real, x0: Real, bits: u32) -> Result<Self, IetError> {
        let (af, bf) = (alpha.to_f64(), beta.to_f64());
        let p = IetParams {
            floats: [af, bf, x0.to_f64()],
            fixed: [alpha.fixed(bits), beta.fixed(bits), x0.fixed(bits)],
            vals: [alpha, beta, x0],
            bits,
        };
        let z = Lin::ZERO;
        if p.cmp(Lin::ALPHA, z)? != Ordering::Greater || p.cmp(Lin::BETA, z)? != Ordering::Greater {
            return Err(IetError::Domain("need alpha, beta > 0".into()));
        }
        if p.cmp(Lin::ALPHA.add(Lin::BETA), Lin::ONE)? != Ordering::Less {
            return Err(IetError::Domain("need alpha + beta < 1".into()));
        }
        if p.cmp(Lin::X0, z)? == Ordering::Less || p.cmp(Lin::X0, Lin::ONE)? != Ordering::Less {
            return Err(IetError::Domain("x0 must lie in [0, 1)".into()));
        }
        Ok(p)
    }

    pub fn parse(alpha: &str, beta: &str, bits: u32) -> Result<Self, IetError> {
        Self::new(parse_real(alpha, bits)?, parse_real(beta, bits)?, bits)
    }

    pub fn alpha(&self) -> f64 {
        self.floats[0]
    }

    pub fn beta(&self) -> f64 {
        self.floats[1]
    }

    pub fn value(&self, x: Lin) -> f64 {
        x.0[0] as f64 + x.0[1] as f64 * self.floats[0] + x.0[2] as f64 * self.floats[1] + x.0[3] as f64 * self.floats[2]
    }

    pub fn cmp(&self, x: Lin, y: Lin) -> Result<Ordering, IetError> {
        let d = x.sub(y);
        if d == Lin::ZERO {
            return Ok(Ordering::Equal);
        }
        let approx = self.value(d);
        let mag: f64 = d.0.iter().map(|c| (*c as f64).abs()).sum();
        if approx.abs() > mag * 1e-14 {
            return Ok(approx.partial_cmp(&0.0).unwrap());
        }
        let used: Vec<usize> = (0..3).filter(|&i| d.0[i + 1] != 0).collect();
        if used.iter().all(|&i| self.vals[i].is_rational()) {
            let mut v = BigRational::from_integer(d.0[0].into());
            for &i in &used {
                if let Real::Rational(r) = &self.vals[i] {
                    v += r * BigRational::from_integer(d.0[i + 1].into());
                }
            }
            return Ok(v.cmp(&BigRational::zero()));
        }
        let mut acc = BigInt::from(d.0[0]) << self.bits as usize;
        let mut err = BigInt::zero();
        for i in 0..3 {
            if d.0[i + 1] != 0 {
                acc += &self.fixed[i] * d.0[i + 1];
                if !self.vals[i].is_rational() || !self.is_exact_fixed(i) {
                    err += BigInt::from(d.0[i + 1]).abs();
                }
            }
        }
        if acc.abs() > err {
            Ok(acc.cmp(&BigInt::zero()))
        } else if err.is_zero() {
            Ok(Ordering::Equal)
        } else {
            Err(IetError::Precision)
        }
    }

    fn is_exact_fixed(&self, i: usize) -> bool {
        match &self.vals[i] {
            Real::Rational(r) => (r.numer() << self.bits as usize) % r.denom() == BigInt::zero(),
            Real::Fixed { .. } => false,
        }
    }

    fn lt(&self, x: Lin, y: Lin) -> Result<bool, IetError> {
        Ok(self.cmp(x, y)? == Ordering::Less)
    }
}

/// Branch index (`0, 1, 2`) of `x` and its translation.
fn branch(params: &IetParams, x: Lin) -> Result<(u8, Lin), IetError> {
    let ab = Lin::ALPHA.add(Lin::BETA);
    if params.lt(x, Lin::ALPHA)? {
        Ok((0, Lin::ONE.sub(Lin::ALPHA)))
    } else if params.lt(x, ab)? {
        Ok((1, Lin([1, -2, -1, 0])))
    } else {
        Ok((2, Lin([0, -1, -1, 0])))
    }
}

fn check_unit(params: &IetParams, x: Lin) -> Result<(), IetError> {
    if params.lt(x, Lin::ZERO)? || !params.lt(x, Lin::ONE)? {
        return Err(IetError::Domain("point outside [0, 1)".into()));
    }
    Ok(())
}

/// `T x`: `x+1-a` on `[0,a)`, `x+1-2a-b` on `[a,a+b)`, `x-a-b` on `[a+b,1)`.
pub fn step(params: &IetParams, x: Lin) -> Result<Lin, IetError> {
    check_unit(params, x)?;
    Ok(x.add(branch(params, x)?.1))
}

/// `T^{-1} y`.
pub fn step_inverse(params: &IetParams, y: Lin) -> Result<Lin, IetError> {
    check_unit(params, y)?;
    let base = base_iet();
    base.finv(params, y, false).map(|(x, _)| x)
}

/// `T x` over exact rationals.
pub fn step_rational(alpha: &BigRational, beta: &BigRational, x: &BigRational) -> Result<BigRational, IetError> {
    let one = BigRational::one();
    if x.is_negative() || x >= &one {
        return Err(IetError::Domain("point outside [0, 1)".into()));
    }
    Ok(if x < alpha {
        x + &one - alpha
    } else if x < &(alpha + beta) {
        x + &one - alpha - alpha - beta
    } else {
        x - alpha - beta
    })
}

/// `T^{-1} y` over exact rationals.
pub fn step_inverse_rational(alpha: &BigRational, beta: &BigRational, y: &BigRational) -> Result<BigRational, IetError> {
    let one = BigRational::one();
    if y.is_negative() || y >= &one {
        return Err(IetError::Domain("point outside [0, 1)".into()));
    }
    let ab = alpha + beta;
    Ok(if y >= &(&one - alpha) {
        y - &one + alpha
    } else if y >= &(&one - alpha - beta) {
        y - &one + alpha + alpha + beta
    } else {
        y + ab
    })
}

/// Interval letters `1, 2, 3` visited by `x0, T x0, ...`.
pub fn orbit_coding(params: &IetParams, x0: Lin, length: usize) -> Result<Vec<u8>, IetError> {
    check_unit(params, x0)?;
    let mut out = Vec::with_capacity(length);
    let mut x = x0;
    for _ in 0..length {
        let (b, t) = branch(params, x)?;
        out.push(b + 1);
        x = x.add(t);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub lo: Lin,
    pub hi: Lin,
    pub shift: Lin,
    pub label: u8,
}

/// A piecewise translation of `[lo, hi)` onto itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Iet {
    pub lo: Lin,
    pub hi: Lin,
    pub pieces: Vec<Piece>,
}

fn base_iet() -> Iet {
    let a = Lin::ALPHA;
    let ab = Lin::ALPHA.add(Lin::BETA);
    Iet {
        lo: Lin::ZERO,
        hi: Lin::ONE,
        pieces: vec![
            Piece { lo: Lin::ZERO, hi: a, shift: Lin::ONE.sub(a), label: 1 },
            Piece { lo: a, hi: ab, shift: Lin([1, -2, -1, 0]), label: 2 },
            Piece { lo: ab, hi: Lin::ONE, shift: Lin([0, -1, -1, 0]), label: 3 },
        ],
    }
}

impl Iet {
    pub fn apply(&self, p: &IetParams, x: Lin) -> Result<(Lin, u8), IetError> {
        for pc in &self.pieces {
            if !p.lt(x, pc.lo)? && p.lt(x, pc.hi)? {
                return Ok((x.add(pc.shift), pc.label));
            }
        }
        Err(IetError::Domain("point outside the interval".into()))
    }

    /// Preimage of `y`; with `left`, preimage of the left limit at `y`.
    pub fn finv(&self, p: &IetParams, y: Lin, left: bool) -> Result<(Lin, u8), IetError> {
        for pc in &self.pieces {
            let (lo, hi) = (pc.lo.add(pc.shift), pc.hi.add(pc.shift));
            let inside = if left { p.lt(lo, y)? && !p.lt(hi, y)? } else { !p.lt(y, lo)? && p.lt(y, hi)? };
            if inside {
                return Ok((y.sub(pc.shift), pc.label));
            }
        }
        Err(IetError::Domain("point outside the image".into()))
    }

    /// First-return map to `[u, v)` with return words over this map's labels.
    pub fn induce(&self, p: &IetParams, u: Lin, v: Lin) -> Result<Vec<(Lin, Lin, Lin, Vec<u8>)>, IetError> {
        let mut cuts = vec![u, v];
        let inner = |x: Lin| -> Result<bool, IetError> { Ok(p.lt(u, x)? && p.lt(x, v)?) };
        let ds: Vec<Lin> = self.pieces[1..].iter().map(|pc| pc.lo).collect();
        for &d in &ds {
            if inner(d)? {
                cuts.push(d);
            }
        }
        let mut sources = vec![(u, false), (v, true)];
        sources.extend(ds.iter().map(|&d| (d, false)));
        for (e, left) in sources {
            let mut y = e;
            for it in 0..=MAX_RETURN {
                if it == MAX_RETURN {
                    return Err(IetError::Capacity("backward orbit did not return".into()));
                }
                y = self.finv(p, y, left)?.0;
                if inner(y)? {
                    cuts.push(y);
                    break;
                }
                if p.cmp(y, u)? == Ordering::Equal || p.cmp(y, v)? == Ordering::Equal {
                    break;
                }
            }
        }
        let mut err = None;
        cuts.sort_by(|a, b| {
            p.cmp(*a, *b).unwrap_or_else(|e| {
                err = Some(e);
                Ordering::Equal
            })
        });
        if let Some(e) = err {
            return Err(e);
        }
        cuts.dedup();
        let mut pieces: Vec<(Lin, Lin, Lin, Vec<u8>)> = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if p.cmp(lo, hi)? == Ordering::Equal {
                continue;
            }
            let mut x = lo;
            let mut word = Vec::new();
            loop {
                let (nx, l) = self.apply(p, x)?;
                x = nx;
                word.push(l);
                if !p.lt(x, u)? && p.lt(x, v)? {
                    break;
                }
                if word.len() >= MAX_RETURN {
                    return Err(IetError::Capacity("first return too long".into()));
                }
            }
            let shift = x.sub(lo);
            match pieces.last_mut() {
                Some(last) if last.3 == word && last.2 == shift => last.1 = hi,
                _ => pieces.push((lo, hi, shift, word)),
            }
        }
        Ok(pieces)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExpansionStep {
    pub n: u64,
    pub m: u64,
    pub eps: i8,
}

/// Words of level `k` in terms of level `k-1` (`0, 1, 2` = `A, B, C`).
pub fn template(step: ExpansionStep) -> [Vec<u8>; 3] {
    let (n, m) = (step.n as usize, step.m as usize);
    let head = |b_count: usize| {
        let mut w = vec![0u8; n - 1];
        w.push(2);
        w.extend(std::iter::repeat_n(1u8, b_count));
        w
    };
    if step.eps == 1 {
        let mut a = head(m - 1);
        a.push(0);
        [a, head(m), head(m - 1)]
    } else {
        let mut b = head(m - 1);
        b.push(0);
        let mut c = head(m);
        c.push(0);
        [head(m), b, c]
    }
}

/// Lengths `(a_k, b_k, c_k)` and the level's words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReturnWords {
    pub a: u128,
    pub b: u128,
    pub c: u128,
}

impl ReturnWords {
    pub fn lengths(&self) -> [u128; 3] {
        [self.a, self.b, self.c]
    }

    /// `|a - b| = 1` and `c <= 2a`.
    pub fn invariants_hold(&self) -> bool {
        self.a.abs_diff(self.b) == 1 && self.c <= 2 * self.a
    }
}

#[derive(Clone, Debug)]
pub struct Level {
    pub iet: Iet,
    /// Words of this level over the previous level's labels (over the
    /// interval letters at level 0).
    pub defs: [Vec<u8>; 3],
    pub words: ReturnWords,
}

#[derive(Clone, Debug)]
pub struct Expansion {
    pub start: &'static str,
    pub steps: Vec<ExpansionStep>,
    pub levels: Vec<Level>,
}

fn lengths(prev: &[u128; 3], defs: &[Vec<u8>; 3]) -> Result<[u128; 3], IetError> {
    let mut out = [0u128; 3];
    for (i, d) in defs.iter().enumerate() {
        for &l in d {
            out[i] = out[i].checked_add(prev[l as usize]).ok_or_else(|| IetError::Capacity("word length overflow".into()))?;
        }
    }
    Ok(out)
}

fn next_level(p: &IetParams, cur: &Level, level: usize) -> Result<(ExpansionStep, Level), IetError> {
    let mismatch = |detail: String| IetError::TemplateMismatch { level, detail };
    let cp = cur.iet.pieces.iter().find(|pc| pc.label == 2).ok_or_else(|| mismatch("no C piece".into()))?;
    let (u, v) = (cp.lo, cp.hi);
    let pcs = cur.iet.induce(p, u, v)?;
    let mut xy = Vec::new();
    for (_, _, _, w) in &pcs {
        if w.first() != Some(&2) {
            return Err(mismatch("return word does not start with C".into()));
        }
        let x = w[1..].iter().take_while(|&&l| l == 1).count();
        let y = w.len() - 1 - x;
        if w[1 + x..].iter().any(|&l| l != 0) {
            return Err(mismatch("return word not of the form C B^x A^y".into()));
        }
        xy.push((x as u64, y as u64));
    }
    if xy.len() != 3 {
        return Err(mismatch(format!("{} return words", xy.len())));
    }
    let mut sorted = xy.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != 3 {
        return Err(mismatch("repeated return word".into()));
    }
    let min_x = xy.iter().map(|t| t.0).min().unwrap();
    let max_x = xy.iter().map(|t| t.0).max().unwrap();
    let min_y = xy.iter().map(|t| t.1).min().unwrap();
    let mut fit = None;
    for n in 1..=min_y + 1 {
        for eps in [1i8, -1] {
            let m = if eps == 1 { min_x + 1 } else { max_x };
            if m == 0 {
                continue;
            }
            let want: [(u64, u64); 3] = if eps == 1 { [(m - 1, n), (m, n - 1), (m - 1, n - 1)] } else { [(m, n - 1), (m - 1, n), (m, n)] };
            let mut ws = want.to_vec();
            ws.sort_unstable();
            if ws == sorted {
                fit = Some((ExpansionStep { n, m, eps }, want));
            }
        }
    }
    let (st, want) = fit.ok_or_else(|| mismatch(format!("pairs {xy:?}")))?;
    let mut shift = Lin::ZERO;
    let mut y = u;
    for _ in 1..st.n {
        let (py, l) = cur.iet.finv(p, y, false)?;
        if l != 0 {
            return Err(mismatch("pull-back leaves the A piece".into()));
        }
        shift = shift.add(y.sub(py));
        y = py;
    }
    let mut pieces = Vec::new();
    for ((lo, hi, t, _), &(x, yy)) in pcs.iter().zip(&xy) {
        let label = want.iter().position(|&w| w == (x, yy)).unwrap() as u8;
        pieces.push(Piece { lo: lo.sub(shift), hi: hi.sub(shift), shift: *t, label });
    }
    let defs = template(st);
    for (&(x, yy), (_, _, _, w)) in xy.iter().zip(&pcs) {
        let label = want.iter().position(|&q| q == (x, yy)).unwrap();
        let mut full = vec![0u8; st.n as usize - 1];
        full.extend_from_slice(w);
        full.truncate(full.len() - (st.n as usize - 1));
        if full != defs[label] {
            return Err(mismatch("extracted word differs from template".into()));
        }
    }
    let lens = lengths(&cur.words.lengths(), &defs)?;
    let iet = Iet { lo: u.sub(shift), hi: v.sub(shift), pieces };
    Ok((st, Level { iet, defs, words: ReturnWords { a: lens[0], b: lens[1], c: lens[2] } }))
}

const PERMS: [[u8; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn start_intervals() -> [(&'static str, Lin, Lin); 4] {
    [
        ("[0, 1-a)", Lin::ZERO, Lin::ONE.sub(Lin::ALPHA)),
        ("[0, a+b)", Lin::ZERO, Lin::ALPHA.add(Lin::BETA)),
        ("[a, 1)", Lin::ALPHA, Lin::ONE),
        ("[1-a-b, 1)", Lin([1, -1, -1, 0]), Lin::ONE),
    ]
}

/// Induces to `depth` levels beyond level 0. Level 0 is the first-return
/// map to the first start interval, and the first labelling of its three
/// pieces with `|a_0 - b_0| = 1`, `c_0 <= 2 a_0`, that reaches the depth.
pub fn induce(params: &IetParams, depth: usize) -> Result<Expansion, IetError> {
    let base = base_iet();
    let mut deepest: Option<(usize, IetError)> = None;
    for (name, u, v) in start_intervals() {
        let pcs = base.induce(params, u, v)?;
        if pcs.len() != 3 {
            continue;
        }
        for perm in PERMS {
            let mut defs: [Vec<u8>; 3] = Default::default();
            let mut pieces = Vec::new();
            for (i, (lo, hi, t, w)) in pcs.iter().enumerate() {
                defs[perm[i] as usize] = w.clone();
                pieces.push(Piece { lo: *lo, hi: *hi, shift: *t, label: perm[i] });
            }
            let words = ReturnWords { a: defs[0].len() as u128, b: defs[1].len() as u128, c: defs[2].len() as u128 };
            if !words.invariants_hold() {
                continue;
            }
            let mut levels = vec![Level { iet: Iet { lo: u, hi: v, pieces }, defs, words }];
            let mut steps = Vec::new();
            let mut failure = None;
            while steps.len() < depth {
                match next_level(params, levels.last().unwrap(), steps.len() + 1) {
                    Ok((st, lv)) => {
                        steps.push(st);
                        levels.push(lv);
                    }
                    Err(e) => {
                        failure = Some(e);
                        break;
                    }
                }
            }
            match failure {
                None => return Ok(Expansion { start: name, steps, levels }),
                Some(e) => {
                    if deepest.as_ref().is_none_or(|(d, _)| steps.len() > *d) {
                        deepest = Some((steps.len(), e));
                    }
                }
            }
        }
    }
    Err(deepest.map(|(_, e)| e).unwrap_or(IetError::TemplateMismatch { level: 0, detail: "no start interval with three pieces".into() }))
}

impl Expansion {
    pub fn depth(&self) -> usize {
        self.steps.len()
    }

    /// First `limit` interval letters of word `label` at `level`.
    pub fn word_prefix(&self, level: usize, label: u8, limit: usize) -> Vec<u8> {
        let defs: Vec<[Vec<u8>; 3]> = self.levels.iter().map(|l| l.defs.clone()).collect();
        expand_prefix(&defs, level, label, limit)
    }
}

/// Materializes a word from a chain of definitions, stopping at `limit`.
pub fn expand_prefix(defs: &[[Vec<u8>; 3]], level: usize, label: u8, limit: usize) -> Vec<u8> {
    fn go(defs: &[[Vec<u8>; 3]], level: usize, label: u8, limit: usize, out: &mut Vec<u8>) {
        if out.len() >= limit {
            return;
        }
        if level == 0 {
            let w = &defs[0][label as usize];
            out.extend_from_slice(&w[..w.len().min(limit - out.len())]);
            return;
        }
        for &l in &defs[level][label as usize] {
            go(defs, level - 1, l, limit, out);
            if out.len() >= limit {
                return;
            }
        }
    }
    let mut out = Vec::new();
    go(defs, level, label, limit, &mut out);
    out
}

/// Definitions rebuilt from level-0 words and the fitted steps alone.
pub fn reexpand(base: &[Vec<u8>; 3], steps: &[ExpansionStep]) -> Vec<[Vec<u8>; 3]> {
    let mut out = vec![base.clone()];
    out.extend(steps.iter().map(|&s| template(s)));
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundTrip {
    pub level: usize,
    pub symbols: usize,
    /// Complete return words walked.
    pub returns: usize,
    /// Symbols compared against re-expanded words.
    pub checked: usize,
}

/// Walks the orbit of the left end of `J_k` for `symbols` steps and checks
/// that, at each return to `J_k`, the coding continues with the re-expanded
/// word of the piece containing the point.
pub fn verify_round_trip(params: &IetParams, exp: &Expansion, level: usize, symbols: usize) -> Result<RoundTrip, String> {
    let defs = reexpand(&exp.levels[0].defs, &exp.steps[..level]);
    let lv = &exp.levels[level];
    let coding = orbit_coding(params, lv.iet.lo, symbols).map_err(|e| e.to_string())?;
    let mut x = lv.iet.lo;
    let mut pos = 0usize;
    let mut returns = 0;
    let mut checked = 0;
    while pos < symbols {
        let label = lv
            .iet
            .pieces
            .iter()
            .find(|pc| params.cmp(x, pc.lo).is_ok_and(|o| o != Ordering::Less) && params.lt(x, pc.hi).unwrap_or(false))
            .ok_or_else(|| format!("orbit point at {pos} is not in J_{level}"))?
            .label;
        let len = exp.levels[level].words.lengths()[label as usize];
        let want = expand_prefix(&defs, level, label, symbols - pos);
        if coding[pos..pos + want.len()] != want[..] {
            return Err(format!("level {level}: mismatch in return word starting at {pos}"));
        }
        checked = pos + want.len();
        if (len as usize) > symbols - pos {
            break;
        }
        for _ in 0..len {
            x = step(params, x).map_err(|e| e.to_string())?;
        }
        pos += len as usize;
        returns += 1;
    }
    Ok(RoundTrip { level, symbols, returns, checked })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub steps: usize,
    /// `inf_k min(n_k, m_k) / (n_k + m_k)`.
    pub inf_ratio: f64,
    pub min_nm: u64,
    pub c0: u64,
    pub ratio_positive: bool,
    pub above_c0: bool,
    pub applicable: bool,
}

pub fn check_conditions(steps: &[ExpansionStep], c0: u64) -> Result<ConditionReport, IetError> {
    if steps.is_empty() {
        return Err(IetError::Domain("no steps".into()));
    }
    let inf_ratio = steps.iter().map(|s| s.n.min(s.m) as f64 / (s.n + s.m) as f64).fold(f64::INFINITY, f64::min);
    let min_nm = steps.iter().map(|s| s.n.min(s.m)).min().unwrap();
    let ratio_positive = inf_ratio > 0.0;
    let above_c0 = min_nm > c0;
    Ok(ConditionReport { steps: steps.len(), inf_ratio, min_nm, c0, ratio_positive, above_c0, applicable: ratio_positive && above_c0 })
}

/// `{0,1}` projection: `1` where the letter equals `one`.
pub fn project(word: &[u8], one: u8) -> Vec<u8> {
    word.iter().map(|&l| (l == one) as u8).collect()
}

/// Level-0 words `A = 2`, `B = 13`, `C = 3` of the first return to `[0, 1-a)`
/// for parameters near the diagonal.
pub fn standard_base() -> [Vec<u8>; 3] {
    [vec![2], vec![1, 3], vec![3]]
}

/// Rational `(a, b)` read off as the letter-1 and letter-2 frequencies of
/// `C_K`, where the chain repeats `pattern` up to `levels` steps above `base`.
pub fn params_from_expansion(base: &[Vec<u8>; 3], pattern: &[ExpansionStep], levels: usize, bits: u32) -> Result<IetParams, IetError> {
    if pattern.is_empty() || pattern.iter().any(|s| s.n == 0 || s.m == 0 || s.eps.abs() != 1) {
        return Err(IetError::Domain("expansion steps need n, m >= 1 and eps = +-1".into()));
    }
    let count = |w: &[u8], prev: &[[BigInt; 3]]| {
        let mut c: [BigInt; 3] = Default::default();
        for &l in w {
            for (ci, pi) in c.iter_mut().zip(&prev[l as usize]) {
                *ci += pi;
            }
        }
        c
    };
    let letters: Vec<[BigInt; 3]> = (0..3)
        .map(|i| {
            let mut c: [BigInt; 3] = Default::default();
            c[i] = BigInt::one();
            c
        })
        .collect();
    let mut counts: Vec<[BigInt; 3]> = base.iter().map(|w| count(&w.iter().map(|l| l - 1).collect::<Vec<_>>(), &letters)).collect();
    for k in 0..levels {
        counts = template(pattern[k % pattern.len()]).iter().map(|w| count(w, &counts)).collect();
    }
    let [c1, c2, c3] = &counts[2];
    let total = c1 + c2 + c3;
    IetParams::new(Real::Rational(BigRational::new(c1.clone(), total.clone())), Real::Rational(BigRational::new(c2.clone(), total)), bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> IetParams {
        IetParams::parse("(sqrt(5)-1)/4", "(sqrt(2)-1)/2", DEFAULT_BITS).unwrap()
    }

    #[test]
    fn parse_values() {
        let r = parse_real("(sqrt(5)-1)/4", 512).unwrap();
        assert!((r.to_f64() - (5f64.sqrt() - 1.0) / 4.0).abs() < 1e-15);
        assert_eq!(parse_real("3/10", 64).unwrap(), Real::Rational(BigRational::new(3.into(), 10.into())));
        assert_eq!(parse_real("0.3", 64).unwrap(), Real::Rational(BigRational::new(3.into(), 10.into())));
        assert_eq!(parse_real("sqrt(9/4)", 64).unwrap(), Real::Rational(BigRational::new(3.into(), 2.into())));
        assert!(parse_real("sqrt(", 64).is_err());
        assert!(parse_real("1/0", 64).is_err());
    }

    #[test]
    fn step_examples() {
        let p = IetParams::parse("0.3", "0.2", 128).unwrap();
        let one_minus_a = Lin::ONE.sub(Lin::ALPHA);
        assert_eq!(step(&p, Lin::ZERO).unwrap(), one_minus_a);
        assert_eq!(p.cmp(step(&p, Lin::ALPHA).unwrap(), Lin([1, -1, -1, 0])).unwrap(), Ordering::Equal);
        let x = Lin([0, 3, 0, 0]);
        assert!((p.value(step(&p, x).unwrap()) - 0.4).abs() < 1e-15);
        assert!(step(&p, Lin::ONE).is_err());
        let a = BigRational::new(3.into(), 10.into());
        let b = BigRational::new(1.into(), 5.into());
        let y = step_rational(&a, &b, &BigRational::new(9.into(), 10.into())).unwrap();
        assert_eq!(y, BigRational::new(2.into(), 5.into()));
    }

    #[test]
    fn golden_chain() {
        let p = golden();
        let e = induce(&p, 12).unwrap();
        assert_eq!(e.depth(), 12);
        for lv in &e.levels {
            assert!(lv.words.invariants_hold(), "{:?}", lv.words);
        }
        for k in [0, 1, 2, 5, 12] {
            let rt = verify_round_trip(&p, &e, k, 20_000).unwrap();
            assert_eq!(rt.checked, 20_000);
        }
    }

    #[test]
    fn template_lengths() {
        let prev = [5u128, 6, 4];
        let st = ExpansionStep { n: 2, m: 3, eps: 1 };
        let l = lengths(&prev, &template(st)).unwrap();
        assert_eq!(l[0], (st.n as u128 - 1) * 5 + 4 + (st.m as u128 - 1) * 6 + 5);
        assert_eq!(l[1], 5 + 4 + 18);
        assert_eq!(l[2], 5 + 4 + 12);
    }

    #[test]
    fn condition_examples() {
        let r = check_conditions(&[ExpansionStep { n: 5, m: 5, eps: 1 }; 3], 3).unwrap();
        assert_eq!((r.inf_ratio, r.min_nm), (0.5, 5));
        assert!(r.applicable);
        let r = check_conditions(&[ExpansionStep { n: 5, m: 5, eps: 1 }, ExpansionStep { n: 1, m: 100, eps: -1 }], 2).unwrap();
        assert!(r.inf_ratio <= 1.0 / 101.0);
        assert!(!r.above_c0);
    }

    #[test]
    fn designed_expansion_is_recovered() {
        let pattern = [ExpansionStep { n: 4, m: 5, eps: 1 }, ExpansionStep { n: 4, m: 5, eps: -1 }];
        let p = params_from_expansion(&standard_base(), &pattern, 60, DEFAULT_BITS).unwrap();
        let exp = induce(&p, 10).unwrap();
        for (k, st) in exp.steps.iter().enumerate() {
            assert_eq!(*st, pattern[k % 2]);
        }
        let rep = check_conditions(&exp.steps, 3).unwrap();
        assert!(rep.applicable);
        let rt = verify_round_trip(&p, &exp, 4, 20_000).unwrap();
        assert_eq!(rt.checked, 20_000);
    }
}
