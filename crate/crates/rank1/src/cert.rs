//! Disjointness certificate for a spacer pattern.
//!
//! Exact branch: the resultant in `y` of `g1 = y^{(v-1)q} f(x,y)` and
//! `g2 = y^q f(1/x,1/y)`. Numerical branch: the `rho` defect and the
//! measure of the set where the trigonometric minorant is small.

use crate::poly::{e, C64};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CertError {
    #[error("invalid pattern: {0}")]
    Pattern(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("exact resultant too large (estimated {0} modular evaluations)")]
    TooLarge(u128),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpacerPattern {
    v: u32,
    a: Vec<u32>,
}

impl SpacerPattern {
    /// `a` holds `a(1..v-1)`.
    pub fn new(v: u32, a: Vec<u32>) -> Result<Self, CertError> {
        if v < 2 {
            return Err(CertError::Pattern("v must be at least 2".into()));
        }
        if a.len() != v as usize - 1 {
            return Err(CertError::Pattern(format!("expected {} spacer values, got {}", v - 1, a.len())));
        }
        Ok(SpacerPattern { v, a })
    }

    pub fn v(&self) -> u32 {
        self.v
    }

    pub fn a(&self) -> &[u32] {
        &self.a
    }

    pub fn a_plus(&self) -> u32 {
        *self.a.iter().max().unwrap()
    }

    pub fn a_minus(&self) -> u32 {
        *self.a.iter().min().unwrap()
    }

    pub fn is_degenerate(&self) -> bool {
        self.a_plus() == self.a_minus()
    }

    /// `s(k) = a(1) + ... + a(k)`, `k = 0..v`.
    pub fn offsets(&self) -> Vec<i64> {
        let mut s = vec![0i64; self.v as usize];
        for k in 1..self.v as usize {
            s[k] = s[k - 1] + self.a[k - 1] as i64;
        }
        s
    }
}

/// Two-variable Laurent polynomial with integer coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LaurentPoly2 {
    terms: BTreeMap<(i64, i64), BigInt>,
}

impl LaurentPoly2 {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `c x^i y^j`.
    pub fn add_term(&mut self, i: i64, j: i64, c: impl Into<BigInt>) {
        let c = c.into();
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((i, j)).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, i64, &BigInt)> {
        self.terms.iter().map(|(&(i, j), c)| (i, j, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, i: i64, j: i64) -> BigInt {
        self.terms.get(&(i, j)).cloned().unwrap_or_default()
    }

    /// Multiplies by `x^di y^dj`.
    pub fn shift(&self, di: i64, dj: i64) -> Self {
        LaurentPoly2 { terms: self.terms.iter().map(|(&(i, j), c)| ((i + di, j + dj), c.clone())).collect() }
    }

    /// `f(1/x, 1/y)`.
    pub fn invert(&self) -> Self {
        LaurentPoly2 { terms: self.terms.iter().map(|(&(i, j), c)| ((-i, -j), c.clone())).collect() }
    }

    /// Substitutes `y = x^k`, giving a Laurent polynomial in `x`.
    pub fn substitute_y_power(&self, k: i64) -> BTreeMap<i64, BigInt> {
        let mut out: BTreeMap<i64, BigInt> = BTreeMap::new();
        for (&(i, j), c) in &self.terms {
            *out.entry(i + k * j).or_default() += c;
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn min_exponents(&self) -> (i64, i64) {
        let i = self.terms.keys().map(|k| k.0).min().unwrap_or(0);
        let j = self.terms.keys().map(|k| k.1).min().unwrap_or(0);
        (i, j)
    }

    pub fn max_exponents(&self) -> (i64, i64) {
        let i = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        let j = self.terms.keys().map(|k| k.1).max().unwrap_or(0);
        (i, j)
    }

    /// Sum of absolute values of the coefficients.
    pub fn l1(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).sum()
    }
}

/// The four-group polynomial
/// `y^p sum_k x^{a(k)p} + y^{-(v-1)p} x^{-p S} - y^q sum_k x^{a(k)q} - y^{-(v-1)q} x^{-q S}`,
/// `S = sum_k a(k)`.
pub fn build_f(pattern: &SpacerPattern, p: u64, q: u64) -> LaurentPoly2 {
    let (p, q) = (p as i64, q as i64);
    let v = pattern.v as i64;
    let s: i64 = pattern.a.iter().map(|&x| x as i64).sum();
    let mut f = LaurentPoly2::new();
    for &ak in &pattern.a {
        f.add_term(ak as i64 * p, p, 1);
        f.add_term(ak as i64 * q, q, -1);
    }
    f.add_term(-p * s, -(v - 1) * p, 1);
    f.add_term(-q * s, -(v - 1) * q, -1);
    f
}

/// Polynomial in `y` whose coefficients are sparse polynomials in `x`
/// with nonnegative exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YPoly {
    pub coeffs: Vec<Vec<(u64, i64)>>,
}

impl YPoly {
    /// From a Laurent polynomial with `y`-exponents `>= 0`, clearing `x`
    /// denominators by the smallest power of `x` that does it.
    pub fn from_laurent(l: &LaurentPoly2) -> Self {
        let (imin, jmin) = l.min_exponents();
        assert!(jmin >= 0, "negative y exponent");
        let xs = (-imin).max(0);
        let deg = l.max_exponents().1 as usize;
        let mut coeffs = vec![Vec::new(); deg + 1];
        for (i, j, c) in l.terms() {
            coeffs[j as usize].push(((i + xs) as u64, c.to_i64().expect("small coefficient")));
        }
        for c in &mut coeffs {
            c.sort_unstable();
        }
        YPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn max_x_degree(&self) -> u64 {
        self.coeffs.iter().flatten().map(|t| t.0).max().unwrap_or(0)
    }

    pub fn l1(&self) -> u64 {
        self.coeffs.iter().flatten().map(|t| t.1.unsigned_abs()).sum()
    }

    fn eval_x_mod(&self, x0: u64, m: &Modulus) -> Vec<u64> {
        self.coeffs.iter().map(|c| c.iter().fold(0u64, |acc, &(ex, co)| m.add(acc, m.mul(m.from_i64(co), m.pow(x0, ex))))).collect()
    }
}

/// The pair `(g1, g2)` with `x` denominators cleared.
pub fn g_pair(pattern: &SpacerPattern, p: u64, q: u64) -> (YPoly, YPoly) {
    let f = build_f(pattern, p, q);
    let v = pattern.v as i64;
    let g1 = f.shift(0, (v - 1) * q as i64);
    let g2 = f.invert().shift(0, q as i64);
    (YPoly::from_laurent(&g1), YPoly::from_laurent(&g2))
}

/// Arithmetic mod a prime below `2^63`.
#[derive(Clone, Copy, Debug)]
pub struct Modulus {
    pub p: u64,
}

impl Modulus {
    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let t = a as u128 * b as u128;
        if self.p == MERSENNE61 {
            let r = (t as u64 & MERSENNE61) + (t >> 61) as u64;
            let r = (r & MERSENNE61) + (r >> 61);
            if r >= MERSENNE61 {
                r - MERSENNE61
            } else {
                r
            }
        } else {
            (t % self.p as u128) as u64
        }
    }
    pub fn pow(&self, mut b: u64, mut ex: u64) -> u64 {
        let mut r = 1 % self.p;
        b %= self.p;
        while ex > 0 {
            if ex & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            ex >>= 1;
        }
        r
    }
    pub fn inv(&self, a: u64) -> u64 {
        self.pow(a, self.p - 2)
    }
    pub fn from_i64(&self, c: i64) -> u64 {
        c.rem_euclid(self.p as i64) as u64
    }
}

pub const MERSENNE61: u64 = (1 << 61) - 1;

/// Deterministic Miller-Rabin for `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let m = Modulus { p: n };
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = m.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = m.mul(x, x);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// The `k` largest primes below `2^61`.
pub fn big_primes(k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    let mut n = MERSENNE61;
    while out.len() < k {
        if is_prime_u64(n) {
            out.push(n);
        }
        n -= 2;
    }
    out
}

fn trim(a: &mut Vec<u64>) {
    while a.len() > 1 && *a.last().unwrap() == 0 {
        a.pop();
    }
}

/// Resultant of univariate polynomials over `F_p` with formal degrees
/// `a.len()-1`, `b.len()-1` (leading coefficients must be nonzero).
pub fn resultant_mod(a: &[u64], b: &[u64], m: &Modulus) -> u64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    let mut acc = 1u64;
    loop {
        let da = a.len() - 1;
        let db = b.len() - 1;
        if db == 0 {
            if b[0] == 0 {
                return 0;
            }
            return m.mul(acc, m.pow(b[0], da as u64));
        }
        if da == 0 {
            if a[0] == 0 {
                return 0;
            }
            return m.mul(acc, m.pow(a[0], db as u64));
        }
        if da < db {
            if (da * db) % 2 == 1 {
                acc = m.sub(0, acc);
            }
            std::mem::swap(&mut a, &mut b);
            continue;
        }
        let lb = *b.last().unwrap();
        let inv = m.inv(lb);
        let mut r = a.clone();
        for i in (db..=da).rev() {
            let c = m.mul(r[i], inv);
            if c != 0 {
                for j in 0..=db {
                    r[i - db + j] = m.sub(r[i - db + j], m.mul(c, b[j]));
                }
            }
        }
        r.truncate(db.max(1));
        trim(&mut r);
        if r.len() == 1 && r[0] == 0 {
            return 0;
        }
        let dr = r.len() - 1;
        if (da * db) % 2 == 1 {
            acc = m.sub(0, acc);
        }
        acc = m.mul(acc, m.pow(lb, (da - dr) as u64));
        a = b;
        b = r;
    }
}

/// `Res_y(g1, g2)(x0) mod p`, or `None` when a `y`-leading coefficient
/// vanishes at `x0`.
pub fn resultant_at(g1: &YPoly, g2: &YPoly, x0: u64, m: &Modulus) -> Option<u64> {
    let a = g1.eval_x_mod(x0, m);
    let b = g2.eval_x_mod(x0, m);
    if *a.last().unwrap() == 0 || *b.last().unwrap() == 0 {
        return None;
    }
    Some(resultant_mod(&a, &b, m))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evidence {
    /// `Res(x0) mod p != 0`.
    NonzeroValue { x0: u64, prime: u64, value: u64 },
    /// `y = x^{-a}` is a common root of both polynomials for every `x`.
    CommonRoot { a: i64 },
    /// Full resultant computed exactly.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResultantReport {
    pub verdict: Verdict,
    pub evidence: Evidence,
}

fn check_pair(pattern: &SpacerPattern, p: u64, q: u64) -> Result<(), CertError> {
    if p == q {
        return Err(CertError::Precondition("p and q must differ".into()));
    }
    if p > q {
        return Err(CertError::Precondition("expected p < q".into()));
    }
    if !is_prime_u64(p) || !is_prime_u64(q) {
        return Err(CertError::Precondition("p and q must be prime".into()));
    }
    let v = pattern.v as u64;
    if p % v != 1 % v || q % v != 1 % v {
        return Err(CertError::Precondition(format!("need p = 1 = q mod {v}")));
    }
    Ok(())
}

/// Decides whether the resultant vanishes identically.
pub fn resultant_test(pattern: &SpacerPattern, p: u64, q: u64) -> Result<ResultantReport, CertError> {
    check_pair(pattern, p, q)?;
    let (g1, g2) = g_pair(pattern, p, q);
    let m = Modulus { p: MERSENNE61 };
    for x0 in [2u64, 3, 5, 7, 11, 13] {
        if let Some(value) = resultant_at(&g1, &g2, x0, &m) {
            if value != 0 {
                return Ok(ResultantReport { verdict: Verdict::Certified, evidence: Evidence::NonzeroValue { x0, prime: m.p, value } });
            }
        }
    }
    if let Some(a) = common_root_witness(pattern, p, q) {
        return Ok(ResultantReport { verdict: Verdict::Degenerate, evidence: Evidence::CommonRoot { a } });
    }
    let res = exact_resultant(&g1, &g2, 1 << 26)?;
    let verdict = if res.iter().all(|c| c.is_zero()) { Verdict::Degenerate } else { Verdict::Certified };
    Ok(ResultantReport { verdict, evidence: Evidence::Exact })
}

/// Checks `f(x, x^{-a}) = 0` and `f(1/x, x^{a}) = 0` exactly for the
/// pattern's constant spacer `a`.
pub fn common_root_witness(pattern: &SpacerPattern, p: u64, q: u64) -> Option<i64> {
    if !pattern.is_degenerate() {
        return None;
    }
    let a = pattern.a_minus() as i64;
    let f = build_f(pattern, p, q);
    let first = f.substitute_y_power(-a);
    let second = f.invert().substitute_y_power(-a);
    (first.is_empty() && second.is_empty()).then_some(a)
}

/// Exact `Res_y(g1, g2)` as dense coefficients in `x`, by evaluation at
/// many points modulo several primes and CRT.
pub fn exact_resultant(g1: &YPoly, g2: &YPoly, max_work: u128) -> Result<Vec<BigInt>, CertError> {
    let n1 = g1.degree() as u64;
    let n2 = g2.degree() as u64;
    let dx = n2 * g1.max_x_degree() + n1 * g2.max_x_degree();
    let bound_bits = n2 as f64 * (g1.l1() as f64).log2() + n1 as f64 * (g2.l1() as f64).log2() + 2.0;
    let nprimes = (bound_bits / 60.0).ceil() as usize + 1;
    let work = (dx as u128 + 1) * nprimes as u128 * ((n1 + n2) as u128).pow(2);
    if work > max_work * 1024 {
        return Err(CertError::TooLarge(work));
    }
    let primes = big_primes(nprimes + 1);
    let mut residues: Vec<Vec<u64>> = Vec::new();
    for &pr in &primes {
        let m = Modulus { p: pr };
        let mut xs = Vec::with_capacity(dx as usize + 1);
        let mut ys = Vec::with_capacity(dx as usize + 1);
        let mut x0 = 1u64;
        while xs.len() < dx as usize + 1 {
            if let Some(v) = resultant_at(g1, g2, x0, &m) {
                xs.push(x0);
                ys.push(v);
            }
            x0 += 1;
        }
        residues.push(interpolate(&xs, &ys, &m));
    }
    let check = residues.pop().unwrap();
    let check_prime = primes[nprimes];
    let used = &primes[..nprimes];
    let mut out = Vec::with_capacity(dx as usize + 1);
    for i in 0..=dx as usize {
        let r: Vec<u64> = residues.iter().map(|v| v[i]).collect();
        out.push(crt_symmetric(&r, used));
    }
    for (i, c) in out.iter().enumerate() {
        let want = (c % BigInt::from(check_prime) + BigInt::from(check_prime)) % BigInt::from(check_prime);
        assert_eq!(want.to_u64().unwrap(), check[i], "CRT check failed at coefficient {i}");
    }
    while out.len() > 1 && out.last().unwrap().is_zero() {
        out.pop();
    }
    Ok(out)
}

/// Newton interpolation mod `p`, returned in the monomial basis.
pub fn interpolate(xs: &[u64], ys: &[u64], m: &Modulus) -> Vec<u64> {
    let n = xs.len();
    let mut c = ys.to_vec();
    for j in 1..n {
        let dens: Vec<u64> = (j..n).map(|i| m.sub(xs[i] % m.p, xs[i - j] % m.p)).collect();
        let invs = batch_inverse(&dens, m);
        for i in (j..n).rev() {
            let num = m.sub(c[i], c[i - 1]);
            c[i] = m.mul(num, invs[i - j]);
        }
    }
    let mut poly = vec![0u64; n];
    for k in (0..n).rev() {
        let mut next = vec![0u64; n];
        for i in 0..n {
            if poly[i] == 0 {
                continue;
            }
            if i + 1 < n {
                next[i + 1] = m.add(next[i + 1], poly[i]);
            }
            next[i] = m.sub(next[i], m.mul(poly[i], xs[k] % m.p));
        }
        next[0] = m.add(next[0], c[k]);
        poly = next;
    }
    poly
}

/// Inverses of nonzero residues with a single modular exponentiation.
pub fn batch_inverse(a: &[u64], m: &Modulus) -> Vec<u64> {
    let mut prefix = Vec::with_capacity(a.len());
    let mut acc = 1u64;
    for &x in a {
        prefix.push(acc);
        acc = m.mul(acc, x);
    }
    let mut inv = m.inv(acc);
    let mut out = vec![0u64; a.len()];
    for i in (0..a.len()).rev() {
        out[i] = m.mul(inv, prefix[i]);
        inv = m.mul(inv, a[i]);
    }
    out
}

fn crt_symmetric(res: &[u64], primes: &[u64]) -> BigInt {
    let mut x = BigInt::zero();
    let mut modulus = BigInt::one();
    for (&r, &p) in res.iter().zip(primes) {
        let pb = BigInt::from(p);
        let m = Modulus { p };
        let cur = ((&x % &pb) + &pb) % &pb;
        let diff = m.sub(r, cur.to_u64().unwrap());
        let mm = (&modulus % &pb).to_u64().unwrap();
        let t = m.mul(diff, m.inv(mm));
        x += &modulus * BigInt::from(t);
        modulus *= pb;
    }
    let half = &modulus / 2;
    if x > half {
        x -= modulus;
    }
    x
}

/// Dense polynomial in `x` with integer coefficients.
type ZPoly = Vec<BigInt>;

fn zp_trim(a: &mut ZPoly) {
    while a.len() > 1 && a.last().unwrap().is_zero() {
        a.pop();
    }
    if a.is_empty() {
        a.push(BigInt::zero());
    }
}

fn zp_is_zero(a: &ZPoly) -> bool {
    a.iter().all(|c| c.is_zero())
}

fn zp_mul(a: &ZPoly, b: &ZPoly) -> ZPoly {
    if zp_is_zero(a) || zp_is_zero(b) {
        return vec![BigInt::zero()];
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    zp_trim(&mut out);
    out
}

fn zp_sub(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let n = a.len().max(b.len());
    let mut out: ZPoly = (0..n).map(|i| a.get(i).cloned().unwrap_or_default() - b.get(i).cloned().unwrap_or_default()).collect();
    zp_trim(&mut out);
    out
}

/// Exact division in `Z[x]`; panics if the division is not exact.
fn zp_div_exact(a: &ZPoly, b: &ZPoly) -> ZPoly {
    if zp_is_zero(a) {
        return vec![BigInt::zero()];
    }
    let mut r = a.clone();
    zp_trim(&mut r);
    let db = b.len() - 1;
    let lb = b.last().unwrap().clone();
    if r.len() < b.len() {
        panic!("inexact polynomial division");
    }
    let mut q = vec![BigInt::zero(); r.len() - db];
    for i in (0..q.len()).rev() {
        let c = &r[i + db];
        if c.is_zero() {
            continue;
        }
        assert!((c % &lb).is_zero(), "inexact polynomial division");
        let t = c / &lb;
        for j in 0..=db {
            r[i + j] -= &t * &b[j];
        }
        q[i] = t;
    }
    assert!(zp_is_zero(&r), "inexact polynomial division");
    zp_trim(&mut q);
    q
}

/// Sylvester matrix of `g1`, `g2` in `y` over `Z[x]`.
pub fn sylvester(g1: &YPoly, g2: &YPoly) -> Vec<Vec<ZPoly>> {
    let n1 = g1.degree();
    let n2 = g2.degree();
    let size = n1 + n2;
    let dense = |c: &Vec<(u64, i64)>| -> ZPoly {
        let d = c.iter().map(|t| t.0).max().unwrap_or(0) as usize;
        let mut out = vec![BigInt::zero(); d + 1];
        for &(ex, co) in c {
            out[ex as usize] += co;
        }
        zp_trim(&mut out);
        out
    };
    let c1: Vec<ZPoly> = g1.coeffs.iter().rev().map(dense).collect();
    let c2: Vec<ZPoly> = g2.coeffs.iter().rev().map(dense).collect();
    let mut m = vec![vec![vec![BigInt::zero()]; size]; size];
    for i in 0..n2 {
        for (j, c) in c1.iter().enumerate() {
            m[i][i + j] = c.clone();
        }
    }
    for i in 0..n1 {
        for (j, c) in c2.iter().enumerate() {
            m[n2 + i][i + j] = c.clone();
        }
    }
    m
}

/// Fraction-free Bareiss determinant over `Z[x]`.
pub fn bareiss_det(mut m: Vec<Vec<ZPoly>>) -> ZPoly {
    let n = m.len();
    if n == 0 {
        return vec![BigInt::one()];
    }
    let mut sign = false;
    let mut prev: ZPoly = vec![BigInt::one()];
    for k in 0..n - 1 {
        if zp_is_zero(&m[k][k]) {
            match (k + 1..n).find(|&r| !zp_is_zero(&m[r][k])) {
                Some(r) => {
                    m.swap(k, r);
                    sign = !sign;
                }
                None => return vec![BigInt::zero()],
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = zp_sub(&zp_mul(&m[i][j], &m[k][k]), &zp_mul(&m[i][k], &m[k][j]));
                m[i][j] = zp_div_exact(&t, &prev);
            }
        }
        prev = m[k][k].clone();
    }
    let mut d = m[n - 1][n - 1].clone();
    if sign {
        d = d.into_iter().map(|c| -c).collect();
    }
    zp_trim(&mut d);
    d
}

/// Pass iff `a_+ > a_-`.
pub fn puiseux_precheck(pattern: &SpacerPattern) -> bool {
    pattern.a_plus() > pattern.a_minus()
}

/// `v^{-1/2} sum_{k<v} e(k psi + s(k) theta)`.
pub fn pattern_poly(offsets: &[i64], theta: f64, psi: f64) -> C64 {
    let v = offsets.len() as f64;
    offsets.iter().enumerate().map(|(k, &s)| e(k as f64 * psi + s as f64 * theta)).sum::<C64>() / v.sqrt()
}

#[derive(Clone, Debug)]
pub struct RhoGrid {
    pub theta: Vec<f64>,
    /// `rho(theta)`, maximized over the `psi` grid.
    pub rho: Vec<f64>,
    /// `min_eta` of the minorant, for each `theta`.
    pub minorant: Vec<f64>,
}

/// `rho(theta) = max_psi (1/v) sum_r |P(p theta, p psi + p r/v)| |P(q theta, q psi + q r/v)|`
/// and `min_eta |f(e(theta), e(eta))| / v^3` on `t_points x e_points` grids.
pub fn rho_defect(pattern: &SpacerPattern, p: u64, q: u64, t_points: usize, e_points: usize) -> RhoGrid {
    let s = pattern.offsets();
    let v = pattern.v as usize;
    let vf = v as f64;
    let (pf, qf) = (p as f64, q as f64);
    let mut theta = Vec::with_capacity(t_points);
    let mut rho = Vec::with_capacity(t_points);
    let mut minorant = Vec::with_capacity(t_points);
    let k_psi_p: Vec<Vec<C64>> = (0..e_points)
        .map(|u| {
            let psi = u as f64 / e_points as f64;
            (0..v).map(|k| e((k as f64 * pf * psi).fract())).collect()
        })
        .collect();
    let k_psi_q: Vec<Vec<C64>> = (0..e_points)
        .map(|u| {
            let psi = u as f64 / e_points as f64;
            (0..v).map(|k| e((k as f64 * qf * psi).fract())).collect()
        })
        .collect();
    let k_r_p: Vec<Vec<C64>> = (0..v).map(|r| (0..v).map(|k| e(((k * r) as u64 * p % v as u64) as f64 / vf)).collect()).collect();
    let k_r_q: Vec<Vec<C64>> = (0..v).map(|r| (0..v).map(|k| e(((k * r) as u64 * q % v as u64) as f64 / vf)).collect()).collect();
    let f = build_f(pattern, p, q);
    let fterms: Vec<(i64, i64, f64)> = f.terms().map(|(i, j, c)| (i, j, c.to_f64().unwrap())).collect();
    for t in 0..t_points {
        let th = t as f64 / t_points as f64;
        theta.push(th);
        let sp: Vec<C64> = s.iter().map(|&sk| e((sk as f64 * pf * th).fract())).collect();
        let sq: Vec<C64> = s.iter().map(|&sk| e((sk as f64 * qf * th).fract())).collect();
        let mut best = 0.0f64;
        for u in 0..e_points {
            let mut acc = 0.0;
            for r in 0..v {
                let mut a = C64::default();
                let mut b = C64::default();
                for k in 0..v {
                    a += sp[k] * k_psi_p[u][k] * k_r_p[r][k];
                    b += sq[k] * k_psi_q[u][k] * k_r_q[r][k];
                }
                acc += a.norm() * b.norm();
            }
            best = best.max(acc / (vf * vf));
        }
        rho.push(best);
        let xs: BTreeMap<i64, C64> = fterms.iter().map(|&(i, _, _)| (i, e((i as f64 * th).rem_euclid(1.0)))).collect();
        let mut low = f64::INFINITY;
        for u in 0..e_points {
            let eta = u as f64 / e_points as f64;
            let val: C64 = fterms.iter().map(|&(i, j, c)| xs[&i] * e((j as f64 * eta).rem_euclid(1.0)) * c).sum();
            low = low.min(val.norm());
        }
        minorant.push(low / (vf * vf * vf));
    }
    RhoGrid { theta, rho, minorant }
}

/// Fraction of the `theta` grid where the minorant is below `eps1`.
pub fn omega_measure(grid: &RhoGrid, eps1: f64) -> f64 {
    grid.minorant.iter().filter(|&&m| m < eps1).count() as f64 / grid.minorant.len() as f64
}

/// Largest possible gap between the grid minimum over `eta` and the true
/// minimum: Lipschitz constant of the minorant in `eta` times half a cell.
pub fn minorant_resolution(pattern: &SpacerPattern, p: u64, q: u64, e_points: usize) -> f64 {
    let f = build_f(pattern, p, q);
    let lip: f64 = f.terms().map(|(_, j, c)| c.abs().to_f64().unwrap() * j.unsigned_abs() as f64).sum::<f64>() * std::f64::consts::TAU;
    let v = pattern.v as f64;
    lip * 0.5 / e_points as f64 / (v * v * v)
}
