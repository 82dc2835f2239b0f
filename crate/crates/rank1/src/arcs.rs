//! Farey arc families and restricted integrals over them.
//!
//! `q ~ Q` means `q in [Q, 2Q)`; `|theta - a/q| ~ K/N` means the distance
//! lies in `[K/N, 2K/N)`. Major arcs use `[0, 1/N)`.

use crate::poly::{eval_dense_slab, grid_size, inverse_dft, l1_norm, pairwise_sum, restricted_l1, CircleGrid, Interval, Roots, C64};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ArcError {
    #[error("arcs around {a1}/{q1} and {a2}/{q2} overlap (radius {radius})")]
    Overlap { a1: u64, q1: u64, a2: u64, q2: u64, radius: f64 },
    #[error("invalid arc parameters: {0}")]
    Domain(String),
}

/// Annulus `inner <= |theta - a/q| < outer` around a reduced fraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FareyArc {
    pub a: u64,
    pub q: u64,
    pub inner: f64,
    pub outer: f64,
}

impl FareyArc {
    pub fn center(&self) -> f64 {
        self.a as f64 / self.q as f64
    }

    /// One interval when `inner = 0`, otherwise two.
    pub fn intervals(&self) -> Vec<Interval> {
        let c = self.center();
        if self.inner == 0.0 {
            vec![Interval { lo: c - self.outer, hi: c + self.outer }]
        } else {
            vec![Interval { lo: c - self.outer, hi: c - self.inner }, Interval { lo: c + self.inner, hi: c + self.outer }]
        }
    }

    pub fn measure(&self) -> f64 {
        2.0 * (self.outer - self.inner)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcKind {
    /// `V_Q`: `|theta - a/q| < 1/N`.
    Major,
    /// `V_{Q,K}`: `|theta - a/q| in [K/N, 2K/N)`.
    Annulus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArcFamily {
    pub q: u64,
    pub k: u64,
    pub n: u64,
    pub kind: ArcKind,
    pub arcs: Vec<FareyArc>,
}

impl ArcFamily {
    pub fn intervals(&self) -> Vec<Interval> {
        self.arcs.iter().flat_map(|a| a.intervals()).collect()
    }

    pub fn measure(&self) -> f64 {
        self.arcs.iter().map(|a| a.measure()).sum()
    }

    /// `2 (3Q^2/pi^2) (2K/N) 2`, a sanity ceiling on the measure.
    pub fn measure_ceiling(&self) -> f64 {
        let q = self.q as f64;
        let k = self.k.max(1) as f64;
        2.0 * (3.0 * (2.0 * q) * (2.0 * q) / std::f64::consts::PI.powi(2)) * (2.0 * k / self.n as f64) * 2.0
    }
}

/// Reduced fractions `a/q` in `[0, 1)` with `q <= order`, increasing,
/// by the next-term recurrence of the Farey sequence.
pub fn farey_sequence(order: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, order);
    out.push((a, b));
    while c < d {
        let k = (order + b) / d;
        let (na, nb) = (k * c - a, k * d - b);
        a = c;
        b = d;
        c = na;
        d = nb;
        out.push((a, b));
    }
    out
}

fn build_family(q_lo: u64, k: u64, n: u64, kind: ArcKind) -> Result<ArcFamily, ArcError> {
    if q_lo == 0 || n == 0 {
        return Err(ArcError::Domain("Q and N must be positive".into()));
    }
    let (inner, outer) = match kind {
        ArcKind::Major => (0.0, 1.0 / n as f64),
        ArcKind::Annulus => {
            if k == 0 {
                return Err(ArcError::Domain("K must be positive".into()));
            }
            (k as f64 / n as f64, 2.0 * k as f64 / n as f64)
        }
    };
    let arcs: Vec<FareyArc> =
        farey_sequence(2 * q_lo - 1).into_iter().filter(|&(_, q)| q >= q_lo).map(|(a, q)| FareyArc { a, q, inner, outer }).collect();
    check_disjoint(&arcs)?;
    Ok(ArcFamily { q: q_lo, k, n, kind, arcs })
}

fn check_disjoint(sorted: &[FareyArc]) -> Result<(), ArcError> {
    let Some(first) = sorted.first() else { return Ok(()) };
    let last = sorted.last().unwrap();
    let mut pairs: Vec<(&FareyArc, &FareyArc, f64)> = sorted.windows(2).map(|w| (&w[0], &w[1], w[1].center() - w[0].center())).collect();
    pairs.push((last, first, first.center() + 1.0 - last.center()));
    for (x, y, gap) in pairs {
        if gap < x.outer + y.outer {
            return Err(ArcError::Overlap { a1: x.a, q1: x.q, a2: y.a, q2: y.q, radius: x.outer.max(y.outer) });
        }
    }
    Ok(())
}

/// `V_{Q,K}`.
pub fn enumerate_family(q: u64, k: u64, n: u64) -> Result<ArcFamily, ArcError> {
    build_family(q, k, n, ArcKind::Annulus)
}

/// `V_Q`.
pub fn enumerate_major(q: u64, n: u64) -> Result<ArcFamily, ArcError> {
    build_family(q, 0, n, ArcKind::Major)
}

/// Checks that no two arcs of different families intersect.
pub fn check_families_disjoint(families: &[ArcFamily]) -> Result<(), ArcError> {
    let mut all: Vec<FareyArc> = families.iter().flat_map(|f| f.arcs.iter().copied()).collect();
    all.sort_by(|x, y| x.center().total_cmp(&y.center()).then(x.inner.total_cmp(&y.inner)));
    let mut lo = 0;
    while lo < all.len() {
        let mut hi = lo;
        while hi + 1 < all.len() && all[hi + 1].a * all[lo].q == all[lo].a * all[hi + 1].q {
            hi += 1;
        }
        for w in all[lo..=hi].windows(2) {
            if w[1].inner < w[0].outer {
                return Err(ArcError::Overlap { a1: w[0].a, q1: w[0].q, a2: w[1].a, q2: w[1].q, radius: w[0].outer });
            }
        }
        lo = hi + 1;
    }
    let mut merged: Vec<FareyArc> = Vec::new();
    for arc in all {
        match merged.last_mut() {
            Some(m) if m.a * arc.q == arc.a * m.q => m.outer = m.outer.max(arc.outer),
            _ => merged.push(FareyArc { inner: 0.0, ..arc }),
        }
    }
    check_disjoint(&merged)
}

/// The circle minus the union of the families, as intervals.
pub fn complement(families: &[ArcFamily]) -> Result<Vec<Interval>, ArcError> {
    check_families_disjoint(families)?;
    let mut ivs: Vec<Interval> = families.iter().flat_map(|f| f.intervals()).collect();
    if ivs.is_empty() {
        return Ok(vec![Interval { lo: 0.0, hi: 1.0 }]);
    }
    ivs.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    let mut gaps = Vec::new();
    for w in ivs.windows(2) {
        if w[1].lo > w[0].hi {
            gaps.push(Interval { lo: w[0].hi, hi: w[1].lo });
        }
    }
    let (first, last) = (ivs[0], ivs[ivs.len() - 1]);
    if first.lo + 1.0 > last.hi {
        gaps.push(Interval { lo: last.hi, hi: first.lo + 1.0 });
    }
    Ok(gaps)
}

/// Grid cells an interval must span to be integrated on the grid.
pub const MIN_ARC_POINTS: f64 = 16.0;
/// Midpoint-rule points per interval for local integration.
pub const LOCAL_POINTS: usize = 64;

/// Midpoint rule for `f` on `[lo, hi)`.
pub fn local_integral(iv: Interval, f: &dyn Fn(f64) -> f64) -> f64 {
    let h = (iv.hi - iv.lo) / LOCAL_POINTS as f64;
    let vals: Vec<f64> = (0..LOCAL_POINTS).map(|i| f((iv.lo + (i as f64 + 0.5) * h).rem_euclid(1.0))).collect();
    pairwise_sum(&vals) * h
}

/// Integral of a nonnegative function over a set of intervals, using the
/// grid where each interval spans at least [`MIN_ARC_POINTS`] cells and
/// `local` otherwise.
pub fn intervals_l1(grid: &CircleGrid<f64>, ivs: &[Interval], local: &dyn Fn(f64) -> f64) -> f64 {
    let m = grid.size() as f64;
    let mut coarse = Vec::new();
    let mut acc = 0.0;
    for &iv in ivs {
        if (iv.hi - iv.lo) * m >= MIN_ARC_POINTS {
            coarse.push(iv);
        } else {
            acc += local_integral(iv, local);
        }
    }
    acc + restricted_l1(grid, &coarse)
}

/// `int_family |P|` from grid samples of `|P|`, refining thin arcs with
/// `local(theta) = |P(theta)|`.
pub fn arc_l1(grid: &CircleGrid<f64>, family: &ArcFamily, local: &dyn Fn(f64) -> f64) -> f64 {
    intervals_l1(grid, &family.intervals(), local)
}

/// `S(theta) = sum_{m <= N} mu(m) e(m theta)` at one point.
pub fn mu_sum_at(mu: &[i8], theta: f64) -> C64 {
    let coeffs: Vec<f64> = mu.iter().map(|&x| x as f64).collect();
    dense_at(&coeffs, theta)
}

fn dense_at(coeffs: &[f64], theta: f64) -> C64 {
    let step = crate::poly::e(theta);
    let mut acc = C64::default();
    for (block, chunk) in coeffs.chunks(4096).enumerate() {
        let mut z = crate::poly::e(((block as f64 * 4096.0 + 1.0) * theta).rem_euclid(1.0));
        let mut s = C64::default();
        for &c in chunk {
            if c != 0.0 {
                s += z * c;
            }
            z *= step;
        }
        acc += s;
    }
    acc
}

/// Samples of `|P_W(theta)| |S(theta)|` on an `m`-point grid, built from
/// slabs of at most `2^20` points.
pub fn moebius_integrand_grid(word: &[u8], mu: &[i8], m: usize) -> CircleGrid<f64> {
    let w: Vec<f64> = word.iter().map(|&x| x as f64).collect();
    let u: Vec<f64> = mu.iter().map(|&x| x as f64).collect();
    let slab = m.min(1 << 20);
    let stride = m / slab;
    let mut values = vec![0.0; m];
    if stride == 1 {
        let mut a = vec![C64::default(); m];
        let mut b = vec![C64::default(); m];
        for (i, &c) in w.iter().enumerate() {
            a[(i + 1) % m] += c;
        }
        for (i, &c) in u.iter().enumerate() {
            b[(i + 1) % m] += c;
        }
        inverse_dft(&mut a);
        inverse_dft(&mut b);
        for t in 0..m {
            values[t] = a[t].norm() * b[t].norm();
        }
        return CircleGrid { values };
    }
    let roots = Roots::new(m as u64);
    for r in 0..stride {
        let a = eval_dense_slab(&w, 1, m, stride, r, &roots);
        let b = eval_dense_slab(&u, 1, m, stride, r, &roots);
        for j in 0..slab {
            values[j * stride + r] = a[j].norm() * b[j].norm();
        }
    }
    CircleGrid { values }
}

/// Grid size used for the Moebius integral of a length-`n` word.
pub fn moebius_grid_size(n: usize) -> usize {
    grid_size(n as u128, MIN_ARC_POINTS as u64)
}

/// `int_T |P_W| |sum_{m <= N} mu(m) e(m theta)|`, `N = |W|`.
pub fn moebius_disjointness_integral(word: &[u8], mu: &[i8]) -> f64 {
    let n = word.len();
    assert!(mu.len() >= n, "mu table shorter than the word");
    l1_norm(&moebius_integrand_grid(word, &mu[..n], moebius_grid_size(n)))
}

#[derive(Clone, Copy, Debug)]
pub struct BreakdownParams {
    pub q_max: u64,
    pub k_max: u64,
    pub tau: f64,
    /// Exponent `A` in the `(log N)^{-A}` column.
    pub a_exp: f64,
    /// Replace `(log N)^3` by `(log(2+K))^3` in the bound columns.
    pub refined: bool,
}

impl BreakdownParams {
    /// `Q, K <= N^{1/8}`, `tau = 1/4`, `A = 2`.
    pub fn defaults(n: u64) -> Self {
        let cap = (n as f64).powf(0.125).floor().max(1.0) as u64;
        let pow2 = |x: u64| if x <= 1 { 1 } else { 1u64 << (63 - x.leading_zeros()) };
        BreakdownParams { q_max: pow2(cap), k_max: pow2(cap), tau: 0.25, a_exp: 2.0, refined: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BreakdownRow {
    pub q: u64,
    /// `0` marks the major family `V_Q`.
    pub k: u64,
    pub arc_count: usize,
    pub integral: f64,
    pub bound_249: f64,
    pub bound_250: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Breakdown {
    pub n: u64,
    pub total: f64,
    pub rows: Vec<BreakdownRow>,
    /// Integral over the complement of all listed families.
    pub rest: f64,
}

/// `int |P_W||S|` split over `V_Q` and `V_{Q,K}` for dyadic `Q <= q_max`,
/// `K <= k_max`, with the two bound columns at constant 1.
pub fn per_family_breakdown(word: &[u8], mu: &[i8], params: &BreakdownParams) -> Result<Breakdown, ArcError> {
    let n = word.len() as u64;
    if !(params.tau > 0.0 && params.tau < 1.0 / 3.0) {
        return Err(ArcError::Domain(format!("tau = {} outside (0, 1/3)", params.tau)));
    }
    let nf = n as f64;
    if params.q_max as f64 > nf.powf(1.0 - params.tau) || params.k_max as f64 > nf.powf(params.tau) {
        return Err(ArcError::Domain("need Q <= N^(1-tau) and K <= N^tau".into()));
    }
    let mu = &mu[..n as usize];
    let grid = moebius_integrand_grid(word, mu, moebius_grid_size(n as usize));
    let total = l1_norm(&grid);
    let wf: Vec<f64> = word.iter().map(|&x| x as f64).collect();
    let local = |t: f64| dense_at(&wf, t).norm() * mu_sum_at(mu, t).norm();
    let mut families = Vec::new();
    let mut q = 1;
    while q <= params.q_max {
        families.push(enumerate_major(q, n)?);
        let mut k = 1;
        while k <= params.k_max {
            families.push(enumerate_family(q, k, n)?);
            k *= 2;
        }
        q *= 2;
    }
    check_families_disjoint(&families)?;
    let logn = nf.ln();
    let mut rows = Vec::new();
    let mut covered = 0.0;
    for fam in &families {
        let integral = arc_l1(&grid, fam, &local);
        covered += integral;
        let qk = (fam.q + fam.k) as f64;
        let log3 = if params.refined { (2.0 + fam.k as f64).ln().powi(3) } else { logn.powi(3) };
        rows.push(BreakdownRow {
            q: fam.q,
            k: fam.k,
            arc_count: fam.arcs.len(),
            integral,
            bound_249: log3 * logn.powi(4) * qk.powf(-0.2) * nf,
            bound_250: (fam.q as f64).powi(2) * fam.k.max(1) as f64 * logn.powf(-params.a_exp) * nf,
        });
    }
    Ok(Breakdown { n, total, rows, rest: total - covered })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nt::totient;
    use crate::poly::{eval_word_at, eval_word_grid};

    #[test]
    fn small_families() {
        let f = enumerate_family(1, 1, 100).unwrap();
        assert_eq!(f.arcs.len(), 1);
        assert_eq!((f.arcs[0].a, f.arcs[0].q), (0, 1));
        let f = enumerate_family(2, 1, 100).unwrap();
        let fr: Vec<(u64, u64)> = f.arcs.iter().map(|a| (a.a, a.q)).collect();
        assert_eq!(fr, vec![(1, 3), (1, 2), (2, 3)]);
        assert!(f.measure() <= f.measure_ceiling());
    }

    #[test]
    fn totient_counts() {
        for q in [1u64, 2, 3, 5, 8, 16, 33, 64] {
            let f = enumerate_family(q, 1, 1 << 30).unwrap();
            let want: u64 = (q..2 * q).map(totient).sum();
            assert_eq!(f.arcs.len() as u64, want);
        }
    }

    #[test]
    fn overlap_detected() {
        assert!(matches!(enumerate_family(8, 4, 64), Err(ArcError::Overlap { .. })));
    }

    #[test]
    fn single_term_gives_measure() {
        let word = [1u8];
        let grid = eval_word_grid(&word, 1 << 12).abs();
        let fam = enumerate_family(4, 2, 1 << 12).unwrap();
        let v = arc_l1(&grid, &fam, &|_| 1.0);
        assert!((v - fam.measure()).abs() < 1e-12);
        let thin = enumerate_family(4, 1, 1 << 20).unwrap();
        let v = arc_l1(&grid, &thin, &|t| eval_word_at(&word, t).norm());
        assert!((v - thin.measure()).abs() < 1e-12);
    }

    #[test]
    fn whole_circle_is_l1() {
        let word: Vec<u8> = (0..300).map(|i| ((i * 7) % 5 == 0) as u8).collect();
        let grid = eval_word_grid(&word, 1 << 12).abs();
        let full = restricted_l1(&grid, &[Interval { lo: 0.0, hi: 1.0 }]);
        assert!((full - l1_norm(&grid)).abs() < 1e-9 * l1_norm(&grid));
    }

    #[test]
    fn zero_mu_gives_zero() {
        let word = [0u8, 1, 1, 0, 1];
        assert_eq!(moebius_disjointness_integral(&word, &[0; 5]), 0.0);
    }
}
