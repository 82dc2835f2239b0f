//! Trigonometric polynomials on the circle `T = R/Z`.
//!
//! `e(x) = exp(2 pi i x)`. Grid samples live at `theta_t = t / M`.

use crate::word::RankOneSpec;
use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rustfft::FftPlanner;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

pub type C64 = Complex64;

/// Above this many terms grid evaluation goes through an FFT.
pub const DIRECT_TERMS_LIMIT: usize = 1 << 12;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("frequency overflow at level {level}: height exceeds 2^62, use residue evaluation")]
    Overflow { level: usize },
    #[error("level {level} not defined by the spec (max {max})")]
    Level { level: usize, max: usize },
    #[error("part {index}: declared length {declared} but word has length {actual}")]
    Structure { index: usize, declared: u64, actual: u64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("grid of {requested} points exceeds capacity {cap}")]
    Capacity { requested: usize, cap: usize },
}

#[inline]
pub fn e(x: f64) -> C64 {
    let (s, c) = (TAU * x).sin_cos();
    C64::new(c, s)
}

/// `e(k / m)` for integer `k`, via two small tables.
#[derive(Clone, Debug)]
pub struct Roots {
    m: u64,
    split: u64,
    lo: Vec<C64>,
    hi: Vec<C64>,
}

impl Roots {
    pub fn new(m: u64) -> Self {
        assert!(m > 0);
        let split = ((m as f64).sqrt().ceil() as u64).max(1);
        let lo = (0..split).map(|l| e(l as f64 / m as f64)).collect();
        let hi = (0..m.div_ceil(split)).map(|h| e((h * split) as f64 / m as f64)).collect();
        Roots { m, split, lo, hi }
    }

    pub fn modulus(&self) -> u64 {
        self.m
    }

    #[inline]
    pub fn get(&self, k: u64) -> C64 {
        let k = k % self.m;
        self.hi[(k / self.split) as usize] * self.lo[(k % self.split) as usize]
    }

    #[inline]
    pub fn get_signed(&self, k: i64) -> C64 {
        self.get(k.rem_euclid(self.m as i64) as u64)
    }
}

/// Sparse map from frequency to coefficient.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrigPoly {
    terms: BTreeMap<i64, C64>,
}

impl TrigPoly {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(0, C64::new(1.0, 0.0))
    }

    pub fn monomial(freq: i64, c: C64) -> Self {
        let mut p = Self::new();
        p.add_term(freq, c);
        p
    }

    pub fn add_term(&mut self, freq: i64, c: C64) {
        let slot = self.terms.entry(freq).or_insert(C64::new(0.0, 0.0));
        *slot += c;
        if *slot == C64::new(0.0, 0.0) {
            self.terms.remove(&freq);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.terms.iter().map(|(&f, &c)| (f, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, freq: i64) -> C64 {
        self.terms.get(&freq).copied().unwrap_or_default()
    }

    /// Largest `|m|` with a nonzero coefficient.
    pub fn degree(&self) -> u64 {
        self.terms.keys().map(|f| f.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn eval(&self, theta: f64) -> C64 {
        self.terms.iter().map(|(&f, &c)| c * e(f as f64 * theta)).sum()
    }

    /// `sum |c_m|^2`, the squared L2 norm.
    pub fn l2_norm_sq(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn shift(&self, by: i64) -> Self {
        TrigPoly { terms: self.terms.iter().map(|(&f, &c)| (f + by, c)).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = Self::new();
        for (&f, &c) in &self.terms {
            out.add_term(f, c * s);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&f, &c) in &other.terms {
            out.add_term(f, c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::new();
        for (&f, &c) in &self.terms {
            for (&g, &d) in &other.terms {
                out.add_term(f + g, c * d);
            }
        }
        out
    }

    /// `theta -> P(k theta)`.
    pub fn dilate(&self, k: i64) -> Self {
        let mut out = Self::new();
        for (&f, &c) in &self.terms {
            out.add_term(f * k, c);
        }
        out
    }
}

/// Equispaced samples `theta_t = t / M`.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleGrid<T> {
    pub values: Vec<T>,
}

impl<T: Copy> CircleGrid<T> {
    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn theta(&self, t: usize) -> f64 {
        t as f64 / self.values.len() as f64
    }
}

impl CircleGrid<C64> {
    pub fn abs(&self) -> CircleGrid<f64> {
        CircleGrid { values: self.values.iter().map(|v| v.norm()).collect() }
    }
}

/// `P_j = w_j^{-1/2} sum_{k<w_j} e((k h_j + s_j(k)) theta)`.
pub fn build_pj(spec: &RankOneSpec, j: usize) -> Result<TrigPoly, PolyError> {
    if j >= spec.levels() {
        return Err(PolyError::Level { level: j, max: spec.levels() });
    }
    let h = spec.height_u128(j);
    if h > (1u128 << 62) {
        return Err(PolyError::Overflow { level: j });
    }
    let w = spec.cut(j);
    let c = C64::new(1.0 / (w as f64).sqrt(), 0.0);
    let mut p = TrigPoly::new();
    for (k, s) in spec.offsets(j).into_iter().enumerate() {
        let f = (k as u128) * h + s as u128;
        let f = i64::try_from(f).map_err(|_| PolyError::Overflow { level: j })?;
        p.add_term(f, c);
    }
    Ok(p)
}

/// Frequencies of `P_j` reduced mod `m`; exact at any level.
pub fn pj_residues(spec: &RankOneSpec, j: usize, m: u64) -> Result<Vec<u64>, PolyError> {
    if j >= spec.levels() {
        return Err(PolyError::Level { level: j, max: spec.levels() });
    }
    let h = spec.height_u128(j);
    let hm = if h < u128::MAX {
        (h % m as u128) as u64
    } else {
        let big = crate::word::height(spec, j).map_err(|e| PolyError::Domain(e.to_string()))?;
        (big % BigUint::from(m)).to_u64().unwrap()
    };
    Ok(spec.offsets(j).into_iter().enumerate().map(|(k, s)| ((k as u128 * hm as u128 + s as u128) % m as u128) as u64).collect())
}

/// `P_W = sum_{m=1}^{|W|} x_m e(m theta)`.
pub fn build_pw(word: &[u8]) -> TrigPoly {
    let mut p = TrigPoly::new();
    for (i, &x) in word.iter().enumerate() {
        if x != 0 {
            p.add_term(i as i64 + 1, C64::new(x as f64, 0.0));
        }
    }
    p
}

/// Inverse DFT of `buf` in place: `out_t = sum_k buf_k e(k t / n)`.
pub fn inverse_dft(buf: &mut [C64]) {
    if buf.is_empty() {
        return;
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(buf.len());
    fft.process(buf);
}

/// Samples of `sum_m c_m e(m theta)` on an `M`-point grid.
pub fn eval_grid(poly: &TrigPoly, m: usize) -> CircleGrid<C64> {
    if poly.len() <= 64 || (poly.len() <= DIRECT_TERMS_LIMIT && poly.len() * m <= 1 << 24) {
        let roots = Roots::new(m as u64);
        let residues: Vec<(u64, C64)> = poly.terms().map(|(f, c)| (f.rem_euclid(m as i64) as u64, c)).collect();
        let values = (0..m as u64).map(|t| residues.iter().map(|&(r, c)| c * roots.get(r * t % m as u64)).sum()).collect();
        return CircleGrid { values };
    }
    let mut buf = vec![C64::default(); m];
    for (f, c) in poly.terms() {
        buf[f.rem_euclid(m as i64) as usize] += c;
    }
    inverse_dft(&mut buf);
    CircleGrid { values: buf }
}

/// Pointwise product of factor grids.
pub fn eval_product_grid(factors: &[TrigPoly], m: usize) -> CircleGrid<C64> {
    let mut values = vec![C64::new(1.0, 0.0); m];
    for f in factors {
        let g = eval_grid(f, m);
        for (v, x) in values.iter_mut().zip(g.values) {
            *v *= x;
        }
    }
    CircleGrid { values }
}

/// Samples of a dense real sequence `sum_{i} c_i e((i + first) theta)`.
pub fn eval_dense_grid(coeffs: &[f64], first: i64, m: usize) -> CircleGrid<C64> {
    let mut buf = vec![C64::default(); m];
    for (i, &c) in coeffs.iter().enumerate() {
        if c != 0.0 {
            buf[(i as i64 + first).rem_euclid(m as i64) as usize] += c;
        }
    }
    inverse_dft(&mut buf);
    CircleGrid { values: buf }
}

/// Grid samples of `P_W`; `P_W(theta_t)` at index `t`.
pub fn eval_word_grid(word: &[u8], m: usize) -> CircleGrid<C64> {
    let coeffs: Vec<f64> = word.iter().map(|&x| x as f64).collect();
    eval_dense_grid(&coeffs, 1, m)
}

/// Values at `t = stride * u + offset`, `u < m / stride`, from an
/// `(m / stride)`-point transform. Memory is `O(m / stride)`.
pub fn eval_dense_slab(coeffs: &[f64], first: i64, m: usize, stride: usize, offset: usize, roots: &Roots) -> Vec<C64> {
    assert!(m.is_multiple_of(stride) && offset < stride);
    assert_eq!(roots.modulus(), m as u64);
    let len = m / stride;
    let mut buf = vec![C64::default(); len];
    for (i, &c) in coeffs.iter().enumerate() {
        if c != 0.0 {
            let f = (i as i64 + first).rem_euclid(m as i64) as u64;
            let tw = roots.get(f * offset as u64 % m as u64);
            buf[(f % len as u64) as usize] += tw * c;
        }
    }
    inverse_dft(&mut buf);
    buf
}

/// `D_k(x) = sum_{j<k} e(j x)` where `x = r / M` is given by the residue `r`.
pub fn dirichlet_at(k: u64, r: u64, roots: &Roots) -> C64 {
    if r.is_multiple_of(roots.modulus()) {
        return C64::new(k as f64, 0.0);
    }
    let num = roots.get(k % roots.modulus() * r % roots.modulus()) - 1.0;
    let den = roots.get(r) - 1.0;
    num / den
}

/// `D_k(x)` at a real point.
pub fn dirichlet(k: u64, x: f64) -> C64 {
    let frac = x - x.round();
    if frac.abs() < 1e-15 {
        return C64::new(k as f64, 0.0);
    }
    (e(k as f64 * frac) - 1.0) / (e(frac) - 1.0)
}

/// One factor of `W = W_1^{k_1} ... W_r^{k_r}`.
#[derive(Clone, Debug)]
pub struct RecursionPart {
    pub poly: TrigPoly,
    pub reps: u64,
    pub len: u64,
}

/// Assembles `P_W` from the parts:
/// `P_W = sum_i e((k_1 l_1 + ... + k_{i-1} l_{i-1}) theta) P_{W_i}(theta) D_{k_i}(l_i theta)`.
pub fn recursion_pw(parts: &[RecursionPart]) -> Result<TrigPoly, PolyError> {
    let mut out = TrigPoly::new();
    let mut offset: i64 = 0;
    for (i, part) in parts.iter().enumerate() {
        if part.poly.degree() > part.len {
            return Err(PolyError::Structure { index: i, declared: part.len, actual: part.poly.degree() });
        }
        let mut kernel = TrigPoly::new();
        for j in 0..part.reps {
            kernel.add_term((j * part.len) as i64, C64::new(1.0, 0.0));
        }
        out = out.add(&part.poly.mul(&kernel).shift(offset));
        offset += (part.reps * part.len) as i64;
    }
    Ok(out)
}

/// [`recursion_pw`] from explicit words, checking the declared lengths.
pub fn recursion_pw_words(parts: &[(&[u8], u64, u64)]) -> Result<TrigPoly, PolyError> {
    let mut rp = Vec::with_capacity(parts.len());
    for (i, &(w, k, l)) in parts.iter().enumerate() {
        if w.len() as u64 != l {
            return Err(PolyError::Structure { index: i, declared: l, actual: w.len() as u64 });
        }
        rp.push(RecursionPart { poly: build_pw(w), reps: k, len: l });
    }
    recursion_pw(&rp)
}

/// `R_n(theta_t) = prod_{j=1}^n |P_j(theta_t)|^2`.
pub fn riesz_product(spec: &RankOneSpec, n: usize, m: usize) -> Result<CircleGrid<f64>, PolyError> {
    let mut values = vec![1.0f64; m];
    let roots = Roots::new(m as u64);
    for j in 1..=n {
        let freqs = pj_residues(spec, j, m as u64)?;
        let c = 1.0 / spec.cut(j) as f64;
        for (t, v) in values.iter_mut().enumerate() {
            let s: C64 = freqs.iter().map(|&f| roots.get(f * t as u64 % m as u64)).sum();
            *v *= s.norm_sqr() * c;
        }
    }
    Ok(CircleGrid { values })
}

/// Degree of `prod_{j=1}^n P_j`, i.e. `sum_j ((w_j - 1) h_j + s_j(w_j - 1))`.
pub fn riesz_degree(spec: &RankOneSpec, n: usize) -> u128 {
    (1..=n)
        .map(|j| {
            let w = spec.cut(j) as u128;
            (w - 1) * spec.height_u128(j) + *spec.offsets(j).last().unwrap() as u128
        })
        .sum()
}

/// `|prod_j P_j(p theta)| |prod_j P_j(q theta)|` on the grid, set to zero on
/// `(-eps, eps)`.
pub fn riesz_correlation(spec: &RankOneSpec, n: usize, p: u64, q: u64, m: usize, eps: f64) -> Result<CircleGrid<f64>, PolyError> {
    let roots = Roots::new(m as u64);
    let mut values = vec![1.0f64; m];
    for j in 1..=n {
        let freqs = pj_residues(spec, j, m as u64)?;
        let c = 1.0 / spec.cut(j) as f64;
        let fp: Vec<u64> = freqs.iter().map(|&f| f * p % m as u64).collect();
        let fq: Vec<u64> = freqs.iter().map(|&f| f * q % m as u64).collect();
        for (t, v) in values.iter_mut().enumerate() {
            let a: C64 = fp.iter().map(|&f| roots.get(f * t as u64 % m as u64)).sum();
            let b: C64 = fq.iter().map(|&f| roots.get(f * t as u64 % m as u64)).sum();
            *v *= a.norm() * b.norm() * c;
        }
    }
    for (t, v) in values.iter_mut().enumerate() {
        let th = t as f64 / m as f64;
        if th.min(1.0 - th) < eps {
            *v = 0.0;
        }
    }
    Ok(CircleGrid { values })
}

/// Riemann sum `(1/M) sum_t v_t`.
pub fn l1_norm(grid: &CircleGrid<f64>) -> f64 {
    pairwise_sum(&grid.values) / grid.values.len() as f64
}

/// Deterministic pairwise summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 256 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// A closed-open interval `[lo, hi)` of the circle in unwrapped
/// coordinates; `hi - lo <= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Length of the overlap of `[a, b)` with the union of `arcs`, all mod 1.
pub fn overlap_mod1(a: f64, b: f64, arcs: &[Interval]) -> f64 {
    let mut total = 0.0;
    for arc in arcs {
        let shift = (a - arc.lo).floor();
        for k in [-1.0, 0.0, 1.0] {
            let lo = arc.lo + shift + k;
            let hi = arc.hi + shift + k;
            let o = b.min(hi) - a.max(lo);
            if o > 0.0 {
                total += o;
            }
        }
    }
    total
}

/// Riemann sum restricted to `arcs`: each sample stands for the midpoint
/// cell `[theta_t - 1/2M, theta_t + 1/2M)` and is weighted by the part of
/// the cell inside the arcs.
pub fn restricted_l1(grid: &CircleGrid<f64>, arcs: &[Interval]) -> f64 {
    let m = grid.values.len() as f64;
    let half = 0.5 / m;
    let mut acc = 0.0;
    for arc in arcs {
        let first = ((arc.lo - half) * m).floor() as i64;
        let last = ((arc.hi + half) * m).ceil() as i64;
        for t in first..=last {
            let th = t as f64 / m;
            let lo = (th - half).max(arc.lo);
            let hi = (th + half).min(arc.hi);
            if hi > lo {
                acc += grid.values[t.rem_euclid(grid.values.len() as i64) as usize] * (hi - lo);
            }
        }
    }
    acc
}

/// Riemann-sum L1 norm with grid doubling until the relative change is
/// below `tol`. Returns `(value, grid size)`.
pub fn l1_converged<F>(mut sample: F, m0: usize, tol: f64, max_m: usize) -> (f64, usize)
where
    F: FnMut(usize) -> f64,
{
    let mut m = m0;
    let mut prev = sample(m);
    while m * 2 <= max_m {
        m *= 2;
        let next = sample(m);
        let rel = (next - prev).abs() / next.abs().max(1e-300);
        prev = next;
        if rel < tol {
            break;
        }
    }
    (prev, m)
}

/// Grid size `>= oversample * degree`, rounded up to a power of two.
pub fn grid_size(degree: u128, oversample: u64) -> usize {
    let need = (degree.max(1) * oversample as u128).max(16);
    need.next_power_of_two() as usize
}

/// `int_0^1 [sum f(n) e(p n t)] conj[sum g(n) e(q n t)] dt` by frequency
/// matching, and `sum_{k <= N/max(p,q)} f(qk) conj(g(pk))`.
/// `f[0]` is `f(1)`.
pub fn bilinear_identity_check(
    f: &[num_complex::Complex<i64>],
    g: &[num_complex::Complex<i64>],
    p: u64,
    q: u64,
) -> Result<(num_complex::Complex<i64>, num_complex::Complex<i64>), PolyError> {
    use num_complex::Complex;
    if p == q {
        return Err(PolyError::Domain("p and q must differ".into()));
    }
    if num_integer::gcd(p, q) != 1 {
        return Err(PolyError::Domain("p and q must be coprime".into()));
    }
    let n = f.len().max(g.len());
    let mut fg: BTreeMap<u64, Complex<i64>> = BTreeMap::new();
    for (i, c) in f.iter().enumerate() {
        *fg.entry(p * (i as u64 + 1)).or_default() += c;
    }
    let mut lhs = Complex::new(0i64, 0i64);
    for (i, c) in g.iter().enumerate() {
        if let Some(a) = fg.get(&(q * (i as u64 + 1))) {
            lhs += a * c.conj();
        }
    }
    let n1 = n as u64 / p.max(q);
    let mut rhs = Complex::new(0i64, 0i64);
    for k in 1..=n1 {
        let fi = f.get((q * k - 1) as usize).copied().unwrap_or_default();
        let gi = g.get((p * k - 1) as usize).copied().unwrap_or_default();
        rhs += fi * gi.conj();
    }
    Ok((lhs, rhs))
}

/// `P_{B_n}(theta)` through the stacking recursion, `O(sum_j w_j)` work.
pub fn eval_spec_word_at(spec: &RankOneSpec, level: usize, theta: f64) -> C64 {
    let mut val = C64::default();
    for n in 0..level {
        let h = spec.height_u128(n) as f64;
        let mut pos = 0.0f64;
        let mut copies = C64::default();
        let mut runs = C64::default();
        let base = e(theta);
        for k in 0..spec.cut(n) as usize {
            copies += e((pos * theta).rem_euclid(1.0));
            pos += h;
            if let Some(&a) = spec.spacers(n).get(k) {
                if a > 0 {
                    runs += e((pos * theta).rem_euclid(1.0)) * base * dirichlet(a as u64, theta);
                }
                pos += a as f64;
            }
        }
        val = val * copies + runs;
    }
    val
}

/// Evaluates `P_W` at an arbitrary point for an explicit word.
pub fn eval_word_at(word: &[u8], theta: f64) -> C64 {
    let step = e(theta);
    let mut z = step;
    let mut acc = C64::default();
    for (i, &x) in word.iter().enumerate() {
        if i % 4096 == 0 {
            z = e(((i as f64 + 1.0) * theta).fract());
        }
        if x != 0 {
            acc += z * x as f64;
        }
        z *= step;
    }
    acc
}
