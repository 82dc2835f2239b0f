//! Arithmetic tables and exponential sums.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

pub const SEGMENT: usize = 1 << 22;
pub const MU_CAP: u64 = 1_000_000_000;
pub const LAMBDA_CAP: u64 = 1 << 28;
pub const MU_MAGIC: &[u8; 8] = b"RANK1MU\0";
pub const LAMBDA_MAGIC: &[u8; 8] = b"RANK1LM\0";
pub const RENORM: usize = 1 << 14;

#[derive(Debug, thiserror::Error)]
pub enum NtError {
    #[error("table size {n} exceeds capacity {cap}")]
    Capacity { n: u64, cap: u64 },
    #[error("table covers 1..={have}, need {need}")]
    Range { have: u64, need: u64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("only {found} admissible primes in range, {wanted} requested")]
    Exhausted { found: usize, wanted: usize },
    #[error("bad table file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Mu,
    Lambda,
}

impl std::str::FromStr for Kind {
    type Err = NtError;
    fn from_str(s: &str) -> Result<Self, NtError> {
        match s {
            "mu" => Ok(Kind::Mu),
            "lambda" => Ok(Kind::Lambda),
            other => Err(NtError::Domain(format!("unknown table kind {other:?}"))),
        }
    }
}

/// `mu(n)` packed at two bits per entry: 0, 1 (for +1), 2 (for -1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuTable {
    n: u64,
    packed: Vec<u8>,
}

impl MuTable {
    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `mu(k)` for `1 <= k <= N`.
    #[inline]
    pub fn get(&self, k: u64) -> i8 {
        debug_assert!(k >= 1 && k <= self.n);
        let i = (k - 1) as usize;
        match (self.packed[i >> 2] >> ((i & 3) * 2)) & 3 {
            1 => 1,
            2 => -1,
            _ => 0,
        }
    }

    fn set(&mut self, k: u64, v: i8) {
        let i = (k - 1) as usize;
        let code = match v {
            1 => 1u8,
            -1 => 2,
            _ => 0,
        };
        let b = &mut self.packed[i >> 2];
        *b &= !(3 << ((i & 3) * 2));
        *b |= code << ((i & 3) * 2);
    }

    /// `mu(1..=n)` as a dense vector.
    pub fn to_vec(&self, n: u64) -> Vec<i8> {
        (1..=n.min(self.n)).map(|k| self.get(k)).collect()
    }

    pub fn mertens(&self, n: u64) -> i64 {
        (1..=n.min(self.n)).map(|k| self.get(k) as i64).sum()
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<(), NtError> {
        w.write_all(MU_MAGIC)?;
        w.write_all(&self.n.to_le_bytes())?;
        w.write_all(&self.packed)?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self, NtError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MU_MAGIC {
            return Err(NtError::Format("bad magic".into()));
        }
        let mut nb = [0u8; 8];
        r.read_exact(&mut nb)?;
        let n = u64::from_le_bytes(nb);
        let mut packed = vec![0u8; (n as usize).div_ceil(4)];
        r.read_exact(&mut packed)?;
        Ok(MuTable { n, packed })
    }
}

/// `Lambda(n)` stored as the prime base of `n` (0 when `n` is not a prime power).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaTable {
    base: Vec<u32>,
}

impl LambdaTable {
    pub fn len(&self) -> u64 {
        self.base.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    #[inline]
    pub fn get(&self, k: u64) -> f64 {
        match self.base[(k - 1) as usize] {
            0 => 0.0,
            p => (p as f64).ln(),
        }
    }

    pub fn prime_base(&self, k: u64) -> u32 {
        self.base[(k - 1) as usize]
    }

    /// Chebyshev `psi(n)`.
    pub fn psi(&self, n: u64) -> f64 {
        let v: Vec<f64> = (1..=n.min(self.len())).map(|k| self.get(k)).collect();
        crate::poly::pairwise_sum(&v)
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<(), NtError> {
        w.write_all(LAMBDA_MAGIC)?;
        w.write_all(&(self.base.len() as u64).to_le_bytes())?;
        for b in &self.base {
            w.write_all(&b.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self, NtError> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != LAMBDA_MAGIC {
            return Err(NtError::Format("bad magic".into()));
        }
        let mut nb = [0u8; 8];
        r.read_exact(&mut nb)?;
        let n = u64::from_le_bytes(nb) as usize;
        let mut raw = vec![0u8; n * 4];
        r.read_exact(&mut raw)?;
        let base = raw.chunks_exact(4).map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
        Ok(LambdaTable { base })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArithmeticTable {
    Mu(MuTable),
    Lambda(LambdaTable),
}

/// Primes `<= n` by a plain sieve.
pub fn small_primes(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let mut comp = vec![false; n as usize + 1];
    let mut out = Vec::new();
    for i in 2..=n as usize {
        if !comp[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n as usize {
                comp[j] = true;
                j += i;
            }
        }
    }
    out
}

pub fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Segmented sieve for `mu(1..=n)`.
pub fn sieve_mu(n: u64) -> Result<MuTable, NtError> {
    sieve_mu_capped(n, MU_CAP)
}

pub fn sieve_mu_capped(n: u64, cap: u64) -> Result<MuTable, NtError> {
    if n > cap {
        return Err(NtError::Capacity { n, cap });
    }
    let primes = small_primes(isqrt(n));
    let mut table = MuTable { n, packed: vec![0u8; (n as usize).div_ceil(4)] };
    let mut lo = 1u64;
    let mut rem = vec![0u64; SEGMENT];
    let mut sign = vec![0i8; SEGMENT];
    while lo <= n {
        let hi = (lo + SEGMENT as u64 - 1).min(n);
        let len = (hi - lo + 1) as usize;
        for i in 0..len {
            rem[i] = lo + i as u64;
            sign[i] = 1;
        }
        for &p in &primes {
            let start = lo.div_ceil(p) * p;
            let mut k = start;
            while k <= hi {
                let i = (k - lo) as usize;
                sign[i] = -sign[i];
                rem[i] /= p;
                k += p;
            }
            let pp = p * p;
            let mut k = lo.div_ceil(pp) * pp;
            while k <= hi {
                sign[(k - lo) as usize] = 0;
                k += pp;
            }
        }
        for i in 0..len {
            let mut s = sign[i];
            if s != 0 && rem[i] > 1 {
                s = -s;
            }
            table.set(lo + i as u64, s);
        }
        lo = hi + 1;
    }
    Ok(table)
}

/// Segmented sieve for `Lambda(1..=n)`.
pub fn sieve_lambda(n: u64) -> Result<LambdaTable, NtError> {
    if n > LAMBDA_CAP {
        return Err(NtError::Capacity { n, cap: LAMBDA_CAP });
    }
    if n > u32::MAX as u64 {
        return Err(NtError::Capacity { n, cap: u32::MAX as u64 });
    }
    let primes = small_primes(isqrt(n));
    let mut base = vec![0u32; n as usize];
    let mut comp = vec![false; SEGMENT];
    let mut lo = 2u64;
    while lo <= n {
        let hi = (lo + SEGMENT as u64 - 1).min(n);
        let len = (hi - lo + 1) as usize;
        comp[..len].iter_mut().for_each(|c| *c = false);
        for &p in &primes {
            let mut k = (lo.div_ceil(p) * p).max(p * p);
            while k <= hi {
                comp[(k - lo) as usize] = true;
                k += p;
            }
        }
        for i in 0..len {
            if !comp[i] {
                base[(lo + i as u64 - 1) as usize] = (lo + i as u64) as u32;
            }
        }
        lo = hi + 1;
    }
    for &p in &primes {
        let mut q = p * p;
        while q <= n {
            base[(q - 1) as usize] = p as u32;
            q = match q.checked_mul(p) {
                Some(v) => v,
                None => break,
            };
        }
    }
    Ok(LambdaTable { base })
}

pub fn sieve(kind: Kind, n: u64) -> Result<ArithmeticTable, NtError> {
    Ok(match kind {
        Kind::Mu => ArithmeticTable::Mu(sieve_mu(n)?),
        Kind::Lambda => ArithmeticTable::Lambda(sieve_lambda(n)?),
    })
}

/// Cache directory from `RANK1_CACHE_DIR`, if set.
pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("RANK1_CACHE_DIR").map(PathBuf::from)
}

fn cache_path(dir: &Path, kind: Kind, n: u64) -> PathBuf {
    match kind {
        Kind::Mu => dir.join(format!("mu_{n}.bin")),
        Kind::Lambda => dir.join(format!("lambda_{n}.bin")),
    }
}

/// `mu` table, read from or written to the cache directory when one is set.
pub fn mu_cached(n: u64) -> Result<MuTable, NtError> {
    if let Some(dir) = cache_dir() {
        let path = cache_path(&dir, Kind::Mu, n);
        if let Ok(f) = std::fs::File::open(&path) {
            if let Ok(t) = MuTable::read_from(std::io::BufReader::new(f)) {
                if t.len() == n {
                    return Ok(t);
                }
            }
        }
        let t = sieve_mu(n)?;
        std::fs::create_dir_all(&dir)?;
        let tmp = path.with_extension("tmp");
        t.write_to(std::io::BufWriter::new(std::fs::File::create(&tmp)?))?;
        std::fs::rename(&tmp, &path)?;
        return Ok(t);
    }
    sieve_mu(n)
}

pub fn lambda_cached(n: u64) -> Result<LambdaTable, NtError> {
    if let Some(dir) = cache_dir() {
        let path = cache_path(&dir, Kind::Lambda, n);
        if let Ok(f) = std::fs::File::open(&path) {
            if let Ok(t) = LambdaTable::read_from(std::io::BufReader::new(f)) {
                if t.len() == n {
                    return Ok(t);
                }
            }
        }
        let t = sieve_lambda(n)?;
        std::fs::create_dir_all(&dir)?;
        let tmp = path.with_extension("tmp");
        {
            let mut w = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
            t.write_to(&mut w)?;
            w.flush()?;
        }
        std::fs::rename(&tmp, &path)?;
        return Ok(t);
    }
    sieve_lambda(n)
}

/// `(m theta) mod 1` with the product error folded back in.
#[inline]
pub fn frac_mul(m: u64, theta: f64) -> f64 {
    let mf = m as f64;
    let p = mf * theta;
    let err = mf.mul_add(theta, -p);
    let f = p - p.floor() + err;
    f - f.floor()
}

/// `sum_{m=1}^N mu(m) e(m theta)`, rotating incrementally and re-anchoring
/// every `RENORM` steps. Block sums are reduced pairwise.
pub fn mu_exp_sum(table: &MuTable, theta: f64, n: u64) -> Result<crate::poly::C64, NtError> {
    use crate::poly::{e, C64};
    if n > table.len() {
        return Err(NtError::Range { have: table.len(), need: n });
    }
    let step = e(theta);
    let mut blocks: Vec<C64> = Vec::with_capacity((n as usize) / RENORM + 1);
    let mut m = 1u64;
    while m <= n {
        let end = (m + RENORM as u64 - 1).min(n);
        let mut z = e(frac_mul(m, theta));
        let mut acc = C64::default();
        for k in m..=end {
            match table.get(k) {
                1 => acc += z,
                -1 => acc -= z,
                _ => {}
            }
            z *= step;
        }
        blocks.push(acc);
        m = end + 1;
    }
    Ok(pairwise_csum(&blocks))
}

pub fn pairwise_csum(v: &[crate::poly::C64]) -> crate::poly::C64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_csum(&v[..mid]) + pairwise_csum(&v[mid..])
}

#[derive(Clone, Debug, PartialEq)]
pub struct RationalApprox {
    pub a: i64,
    pub q: u64,
    pub beta: f64,
}

/// `a/q` with `q <= m_bound`, `gcd(a, q) = 1` and `|theta - a/q| <= 1/(q m_bound)`,
/// the last continued-fraction convergent with denominator in range.
/// The float `theta` is expanded exactly.
pub fn dirichlet_approx(theta: f64, m_bound: u64) -> RationalApprox {
    assert!(m_bound >= 1, "m_bound must be at least 1");
    assert!(theta.is_finite());
    let x = BigRational::from_float(theta).expect("finite");
    let (mut num, mut den) = (x.numer().clone(), x.denom().clone());
    let (mut p0, mut q0) = (BigInt::from(1), BigInt::from(0));
    let a0 = num.div_floor(&den);
    let (mut p1, mut q1) = (a0.clone(), BigInt::from(1));
    let r = &num - &a0 * &den;
    num = den;
    den = r;
    let bound = BigInt::from(m_bound);
    while !den.is_zero() {
        let ak = num.div_floor(&den);
        let p2 = &ak * &p1 + &p0;
        let q2 = &ak * &q1 + &q0;
        if q2 > bound {
            break;
        }
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let r = &num - &ak * &den;
        num = den;
        den = r;
    }
    let a = p1.to_i64().expect("numerator fits i64");
    let q = q1.to_u64().expect("denominator fits u64");
    let exact = x - BigRational::new(p1, q1);
    let beta = exact.to_f64().unwrap();
    let ok = exact.abs() * BigRational::from_integer(BigInt::from(q) * BigInt::from(m_bound)) <= BigRational::from_integer(1.into());
    assert!(ok, "Dirichlet inequality violated for theta={theta}, M={m_bound}");
    RationalApprox { a, q, beta }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VinogradovBounds {
    pub b1: f64,
    pub b2: f64,
}

/// `B1 = c (q^{1/2} x^{-1/2} + q^{-1/2} + x^{-1/5})^{1/2} (log x)^4 x` and
/// `B2 = C ((q + x|beta|)^{-1/4} + x^{-tau/4}) x (log x)^4`.
pub fn vinogradov_bound(x: f64, q: f64, beta: f64, tau: f64, c: f64, big_c: f64) -> Result<VinogradovBounds, NtError> {
    if x < 2.0 {
        return Err(NtError::Domain("x must be at least 2".into()));
    }
    if q < 1.0 {
        return Err(NtError::Domain("q must be at least 1".into()));
    }
    let l4 = x.ln().powi(4);
    let inner = q.sqrt() / x.sqrt() + 1.0 / q.sqrt() + x.powf(-0.2);
    let b1 = c * inner.sqrt() * l4 * x;
    let b2 = big_c * ((q + x * beta.abs()).powf(-0.25) + x.powf(-tau / 4.0)) * x * l4;
    Ok(VinogradovBounds { b1, b2 })
}

/// Primes `p` in `[lo, hi]` with `p > w_bound` and `p = 1 mod v` for every
/// `v` in `moduli`; errors unless at least `count` exist.
pub fn admissible_primes(w_bound: u64, moduli: &[u64], lo: u64, hi: u64, count: usize) -> Result<Vec<u64>, NtError> {
    let mut out = Vec::new();
    for p in small_primes(hi) {
        if p < lo || p <= w_bound {
            continue;
        }
        if moduli.iter().all(|&v| v == 0 || p % v == 1 % v) {
            out.push(p);
            if out.len() == count {
                return Ok(out);
            }
        }
    }
    Err(NtError::Exhausted { found: out.len(), wanted: count })
}

/// Euler's totient by trial division.
pub fn totient(mut n: u64) -> u64 {
    let mut r = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            r -= r / p;
        }
        p += 1;
    }
    if n > 1 {
        r -= r / n;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mu_naive(mut n: u64) -> i8 {
        let mut s = 1i8;
        let mut p = 2;
        while p * p <= n {
            if n.is_multiple_of(p) {
                n /= p;
                if n.is_multiple_of(p) {
                    return 0;
                }
                s = -s;
            }
            p += 1;
        }
        if n > 1 {
            s = -s;
        }
        s
    }

    #[test]
    fn mu_values() {
        let t = sieve_mu(100_000).unwrap();
        assert_eq!([t.get(1), t.get(2), t.get(4), t.get(6)], [1, -1, 0, 1]);
        for n in 1..=100_000 {
            assert_eq!(t.get(n), mu_naive(n), "n={n}");
        }
        assert_eq!(t.mertens(10_000), -23);
    }

    #[test]
    fn lambda_values() {
        let t = sieve_lambda(100_000).unwrap();
        assert!((t.get(8) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(t.get(6), 0.0);
        assert_eq!(t.get(1), 0.0);
        assert!((t.get(97) - 97f64.ln()).abs() < 1e-15);
        let psi = t.psi(100_000);
        assert!(psi > 0.9e5 && psi < 1.1e5);
    }

    #[test]
    fn segment_boundaries() {
        let n = SEGMENT as u64 + 1000;
        let t = sieve_mu(n).unwrap();
        for k in (SEGMENT as u64 - 50)..=n {
            assert_eq!(t.get(k), mu_naive(k));
        }
    }

    #[test]
    fn binary_roundtrip() {
        let t = sieve_mu(1234).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..8], MU_MAGIC);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 1234);
        assert_eq!(MuTable::read_from(&buf[..]).unwrap(), t);
        let l = sieve_lambda(999).unwrap();
        let mut buf = Vec::new();
        l.write_to(&mut buf).unwrap();
        assert_eq!(LambdaTable::read_from(&buf[..]).unwrap(), l);
    }

    #[test]
    fn exp_sums() {
        let t = sieve_mu(10_000).unwrap();
        let s = mu_exp_sum(&t, 0.0, 10_000).unwrap();
        assert!((s.re + 23.0).abs() < 1e-9 && s.im.abs() < 1e-9);
        let th = 0.3271;
        let s1 = mu_exp_sum(&t, th, 1).unwrap();
        assert!((s1 - crate::poly::e(th)).norm() < 1e-15);
        let half = mu_exp_sum(&t, 0.5, 10).unwrap();
        let brute: i64 = (1..=10).map(|m| mu_naive(m) as i64 * if m % 2 == 0 { 1 } else { -1 }).sum();
        assert!((half.re - brute as f64).abs() < 1e-12);
        let th = 0.123456789;
        let direct: crate::poly::C64 = (1..=10_000u64).map(|m| crate::poly::e(frac_mul(m, th)) * t.get(m) as f64).sum();
        assert!((mu_exp_sum(&t, th, 10_000).unwrap() - direct).norm() < 1e-8);
    }

    #[test]
    fn dirichlet_examples() {
        let r = dirichlet_approx(0.14159265, 100);
        assert_eq!((r.a, r.q), (1, 7));
        let r = dirichlet_approx(1.0 / 3.0, 3);
        assert_eq!((r.a, r.q), (1, 3));
        assert!(r.beta.abs() < 1e-15);
        let r = dirichlet_approx(0.5 + 1e-9, 10);
        assert_eq!((r.a, r.q), (1, 2));
    }

    #[test]
    fn vinogradov_examples() {
        let b = vinogradov_bound(1e6, 100.0, 0.0, 0.25, 1.0, 1.0).unwrap();
        let want = 0.17310f64.sqrt() * 13.815510557964274f64.powi(4) * 1e6;
        assert!((b.b1 / want - 1.0).abs() < 1e-4);
        let inner = 1010f64.powf(-0.25);
        assert!((inner - 0.1774).abs() < 1e-4);
        let b = vinogradov_bound(1e6, 1.0, 0.0, 0.25, 1.0, 1.0).unwrap();
        assert!(b.b1 >= 1e6);
        assert!(vinogradov_bound(1.5, 1.0, 0.0, 0.25, 1.0, 1.0).is_err());
    }

    #[test]
    fn admissible_examples() {
        assert_eq!(admissible_primes(3, &[3], 5, 50, 6).unwrap(), vec![7, 13, 19, 31, 37, 43]);
        assert_eq!(admissible_primes(3, &[2, 3], 5, 50, 6).unwrap(), vec![7, 13, 19, 31, 37, 43]);
        assert_eq!(admissible_primes(10, &[], 1, 100, 3).unwrap(), vec![11, 13, 17]);
        assert!(matches!(admissible_primes(3, &[3], 5, 50, 7), Err(NtError::Exhausted { found: 6, wanted: 7 })));
    }
}
