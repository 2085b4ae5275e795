//! Periodic points of Hénon maps and linearizing coordinates on the
//! unstable manifolds of saddles.
//!
//! Periodic orbits are found by Newton's method on the whole orbit at once
//! (multiple shooting). Because `y_{i+1} = x_i` along any orbit, an orbit of
//! period `n` is fixed by its `x`-coordinates alone, which satisfy the cyclic
//! recurrence
//!
//! ```text
//! x_{i+1} + b·x_{i−1} + x_i² − a = 0      (indices mod n)
//! ```
//!
//! Solving this system never forms `Df^n`, whose entries grow like `λ_u^n`.

mod linearize;

pub use linearize::{
    linearize, linearize_stable, Jet, Linearization, ManifoldChart, DEFAULT_SERIES_ORDER, DEFECT_THRESHOLD,
};

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{HenonParams, Point2, C64};
use crate::error::{invalid, Result};
use crate::rng;

/// Largest period accepted by [`find_periodic`].
pub const MAX_PERIOD: u32 = 12;
/// Two solutions closer than this (sup norm) are the same point.
pub const DEDUP_TOL: f64 = 1e-6;
/// Eigenvalue moduli within this margin of 1 count as neutral.
pub const HYPERBOLICITY_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchKind {
    /// Starting points in `C^n`.
    ComplexGrid,
    /// Real starting points; Newton stays real, so only real orbits are found.
    RealGrid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Saddle,
    Attracting,
    Repelling,
    NonHyperbolic,
}

/// Budget for the Newton search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Random starts per expected point: `starts_per_point · 2^n` in total.
    pub starts_per_point: u32,
    pub max_newton_steps: u32,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            starts_per_point: 20,
            max_newton_steps: 60,
        }
    }
}

/// A periodic point with its eigendata.
///
/// `period` is the minimal period; eigenvalues are those of `Df^period` at
/// `location`, ordered so that `|eigen_unstable| ≥ |eigen_stable|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleRecord {
    pub location: Point2,
    pub period: u32,
    pub eigen_unstable: C64,
    pub eigen_stable: C64,
    /// Unit eigenvector for `eigen_unstable`, first nonzero component real positive.
    pub unstable_vector: [C64; 2],
    /// Largest one-step defect `‖f(p_i) − p_{i+1}‖∞` along the orbit.
    pub residual: f64,
    pub stability: Stability,
    /// Index of the orbit this point belongs to within its search result.
    pub orbit: usize,
}

impl SaddleRecord {
    pub fn is_saddle(&self) -> bool {
        self.stability == Stability::Saddle
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.location.is_real(tol) && self.eigen_unstable.im.abs() <= tol && self.eigen_stable.im.abs() <= tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSearch {
    pub params: HenonParams,
    /// The `n` in `f^n(p) = p`.
    pub n: u32,
    pub search: SearchKind,
    pub seed: u64,
    /// Every point found with `f^n(p) = p`, orbits kept contiguous.
    pub records: Vec<SaddleRecord>,
    /// Fewer than `2^n` points were found by a complex search.
    pub undercount: bool,
}

impl PeriodicSearch {
    pub fn expected_count(&self) -> usize {
        1usize << self.n
    }

    /// Points of minimal period exactly `n`.
    pub fn exact_period(&self) -> impl Iterator<Item = &SaddleRecord> {
        self.records.iter().filter(move |r| r.period == self.n)
    }

    pub fn saddles(&self) -> impl Iterator<Item = &SaddleRecord> {
        self.records.iter().filter(|r| r.is_saddle())
    }
}

/// All points with `f^n(p) = p` reachable from the seeded starts.
pub fn find_periodic(
    params: &HenonParams,
    n: u32,
    search: SearchKind,
    budget: &SearchBudget,
    seed: u64,
) -> Result<PeriodicSearch> {
    if !(1..=MAX_PERIOD).contains(&n) {
        return Err(invalid("n", format!("period must lie in 1..={MAX_PERIOD}")));
    }
    if search == SearchKind::RealGrid && !params.is_real() {
        return Err(invalid("search", "real search needs real parameters"));
    }
    let expected = 1usize << n;
    let mut orbits: Vec<Vec<C64>> = Vec::new();

    let itineraries = itinerary_starts(params, n, search);
    absorb(&mut orbits, solve_batch(params, &itineraries, budget));

    let total = budget.starts_per_point as usize * expected;
    let batch = expected.max(64);
    let mut done = 0usize;
    while done < total && !(search == SearchKind::ComplexGrid && count_points(&orbits) >= expected) {
        let hi = total.min(done + batch);
        let starts: Vec<Vec<C64>> = (done..hi)
            .into_par_iter()
            .map(|i| random_start(params, n, search, seed, i as u64))
            .collect();
        absorb(&mut orbits, solve_batch(params, &starts, budget));
        done = hi;
    }

    canonical_sort(&mut orbits);
    let mut records = Vec::new();
    for (idx, orbit) in orbits.iter().enumerate() {
        records.extend(orbit_records(params, orbit, idx));
    }
    let undercount = search == SearchKind::ComplexGrid && records.len() < expected;
    Ok(PeriodicSearch {
        params: *params,
        n,
        search,
        seed,
        records,
        undercount,
    })
}

/// Anti-integrable starts `x_i = ±√a`, one per sign pattern.
fn itinerary_starts(params: &HenonParams, n: u32, search: SearchKind) -> Vec<Vec<C64>> {
    let a = params.a();
    let root = match search {
        SearchKind::ComplexGrid => a.sqrt(),
        SearchKind::RealGrid => {
            if a.re > 0.0 {
                C64::new(a.re.sqrt(), 0.0)
            } else {
                return Vec::new();
            }
        }
    };
    (0..1u32 << n)
        .map(|bits| (0..n).map(|i| if bits >> i & 1 == 1 { root } else { -root }).collect())
        .collect()
}

/// Chebyshev-distributed start in the polydisk of radius `R`.
fn random_start(params: &HenonParams, n: u32, search: SearchKind, seed: u64, index: u64) -> Vec<C64> {
    let mut g = rng::stream(seed, index);
    let r = params.radius();
    let pi = std::f64::consts::PI;
    (0..n)
        .map(|_| match search {
            SearchKind::RealGrid => C64::new(r * (pi * g.random::<f64>()).cos(), 0.0),
            SearchKind::ComplexGrid => {
                let re = r * (pi * g.random::<f64>()).cos();
                let im = r * (pi * g.random::<f64>()).cos();
                C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
        })
        .collect()
}

fn solve_batch(params: &HenonParams, starts: &[Vec<C64>], budget: &SearchBudget) -> Vec<Vec<C64>> {
    starts
        .par_iter()
        .filter_map(|s| newton_orbit(params, s.clone(), budget.max_newton_steps))
        .map(|xs| minimal_cycle(&xs))
        .collect()
}

fn count_points(orbits: &[Vec<C64>]) -> usize {
    orbits.iter().map(Vec::len).sum()
}

/// Residuals `F_i = x_{i+1} + b·x_{i−1} + x_i² − a`.
pub(crate) fn orbit_residual(params: &HenonParams, xs: &[C64]) -> Vec<C64> {
    let n = xs.len();
    let (a, b) = (params.a(), params.b());
    (0..n)
        .map(|i| xs[(i + 1) % n] + b * xs[(i + n - 1) % n] + xs[i] * xs[i] - a)
        .collect()
}

fn orbit_jacobian(params: &HenonParams, xs: &[C64]) -> DMatrix<C64> {
    let n = xs.len();
    let mut j = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 0..n {
        j[(i, i)] += xs[i] * 2.0;
        j[(i, (i + 1) % n)] += C64::new(1.0, 0.0);
        j[(i, (i + n - 1) % n)] += params.b();
    }
    j
}

fn sup(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Newton's method on the orbit system. Returns the converged `x`-cycle.
pub(crate) fn newton_orbit(params: &HenonParams, mut xs: Vec<C64>, max_steps: u32) -> Option<Vec<C64>> {
    let limit = 4.0 * params.radius();
    let scale = params.radius().max(params.a().norm());
    let mut converged_steps = 0;
    for _ in 0..max_steps {
        let f = orbit_residual(params, &xs);
        let res = sup(&f);
        let j = orbit_jacobian(params, &xs);
        let rhs = DVector::from_iterator(xs.len(), f.iter().map(|z| -z));
        let delta = j.lu().solve(&rhs);
        let Some(delta) = delta else {
            // singular Jacobian: accept only if we are already on a root
            return (res <= 1e-12 * scale).then_some(xs);
        };
        let step = delta.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (x, d) in xs.iter_mut().zip(delta.iter()) {
            *x += d;
        }
        if !xs
            .iter()
            .all(|x| x.norm() <= limit && x.re.is_finite() && x.im.is_finite())
        {
            return None;
        }
        if step <= 1e-14 * scale || res <= 1e-15 * scale {
            converged_steps += 1;
            if converged_steps >= 2 {
                break;
            }
        }
    }
    let res = sup(&orbit_residual(params, &xs));
    (res <= 1e-10 * scale).then_some(xs)
}

/// Reduce a solution of the period-`n` system to its minimal cycle.
fn minimal_cycle(xs: &[C64]) -> Vec<C64> {
    let n = xs.len();
    for k in 1..n {
        if !n.is_multiple_of(k) {
            continue;
        }
        let tol = 1e-8 * sup(xs).max(1.0);
        if (0..n).all(|i| (xs[(i + k) % n] - xs[i]).norm() <= tol) {
            return xs[..k].to_vec();
        }
    }
    xs.to_vec()
}

/// Rotate a cycle so that it starts at its lexicographically smallest entry.
fn rotate_canonical(xs: &mut [C64]) {
    let start = (0..xs.len())
        .min_by(|&i, &j| {
            lex(&xs[i])
                .partial_cmp(&lex(&xs[j]))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    xs.rotate_left(start);
}

/// Ordering key, coarsened so that roundoff cannot flip comparisons.
fn lex(z: &C64) -> (f64, f64) {
    let q = |t: f64| (t * 1e9).round();
    (q(z.re), q(z.im))
}

/// Merge new cycles into `orbits`, dropping duplicates (any rotation).
fn absorb(orbits: &mut Vec<Vec<C64>>, new: Vec<Vec<C64>>) {
    for mut cyc in new {
        let k = cyc.len();
        let dup = orbits
            .iter()
            .any(|o| o.len() == k && (0..k).any(|r| (0..k).all(|i| (o[(i + r) % k] - cyc[i]).norm() <= DEDUP_TOL)));
        if !dup {
            rotate_canonical(&mut cyc);
            orbits.push(cyc);
        }
    }
}

fn canonical_sort(orbits: &mut [Vec<C64>]) {
    orbits.sort_by(|u, v| {
        u.len().cmp(&v.len()).then_with(|| {
            let key = |o: &Vec<C64>| o.iter().map(lex).collect::<Vec<_>>();
            key(u).partial_cmp(&key(v)).unwrap_or(std::cmp::Ordering::Equal)
        })
    });
}

/// Orbit points `p_i = (x_i, x_{i−1})` of an `x`-cycle.
pub(crate) fn cycle_points(xs: &[C64]) -> Vec<Point2> {
    let k = xs.len();
    (0..k).map(|i| Point2::new(xs[i], xs[(i + k - 1) % k])).collect()
}

/// `Df^k` at `orbit[start]`, following the orbit.
pub(crate) fn orbit_differential(params: &HenonParams, orbit: &[Point2], start: usize) -> Matrix2<C64> {
    let k = orbit.len();
    let mut m = Matrix2::identity();
    for j in 0..k {
        m = params.differential(orbit[(start + j) % k]) * m;
    }
    m
}

/// Eigenvalues of a 2×2 matrix ordered by decreasing modulus, using the
/// known determinant for the small one.
pub(crate) fn eigenpair(m: &Matrix2<C64>, det: C64) -> (C64, C64) {
    let tr = m[(0, 0)] + m[(1, 1)];
    let disc = (tr * tr - det * 4.0).sqrt();
    let l1 = if (tr + disc).norm() >= (tr - disc).norm() {
        (tr + disc) / 2.0
    } else {
        (tr - disc) / 2.0
    };
    let l2 = if l1.norm() > 0.0 { det / l1 } else { tr - l1 };
    (l1, l2)
}

/// Unit eigenvector of `m` for `lambda`, normalised so that its first
/// nonzero component is real and positive.
pub(crate) fn unit_eigenvector(m: &Matrix2<C64>, lambda: C64) -> [C64; 2] {
    let v1 = [m[(0, 1)], lambda - m[(0, 0)]];
    let v2 = [lambda - m[(1, 1)], m[(1, 0)]];
    let n1 = (v1[0].norm_sqr() + v1[1].norm_sqr()).sqrt();
    let n2 = (v2[0].norm_sqr() + v2[1].norm_sqr()).sqrt();
    let (v, nrm) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
    if nrm == 0.0 {
        return [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    }
    let mut v = [v[0] / nrm, v[1] / nrm];
    let lead = if v[0].norm() > 1e-12 { v[0] } else { v[1] };
    let phase = lead.conj() / lead.norm();
    v[0] *= phase;
    v[1] *= phase;
    v
}

fn classify(lu: C64, ls: C64) -> Stability {
    let (mu, ms) = (lu.norm(), ls.norm());
    if mu > 1.0 + HYPERBOLICITY_MARGIN && ms < 1.0 - HYPERBOLICITY_MARGIN {
        Stability::Saddle
    } else if mu < 1.0 - HYPERBOLICITY_MARGIN {
        Stability::Attracting
    } else if ms > 1.0 + HYPERBOLICITY_MARGIN {
        Stability::Repelling
    } else {
        Stability::NonHyperbolic
    }
}

/// One record per point of the cycle `xs`.
pub(crate) fn orbit_records(params: &HenonParams, xs: &[C64], orbit_index: usize) -> Vec<SaddleRecord> {
    let pts = cycle_points(xs);
    let k = pts.len();
    let residual = sup(&orbit_residual(params, xs));
    let det = params.b().powu(k as u32);
    (0..k)
        .map(|i| {
            let m = orbit_differential(params, &pts, i);
            let (lu, ls) = eigenpair(&m, det);
            SaddleRecord {
                location: pts[i],
                period: k as u32,
                eigen_unstable: lu,
                eigen_stable: ls,
                unstable_vector: unit_eigenvector(&m, lu),
                residual,
                stability: classify(lu, ls),
                orbit: orbit_index,
            }
        })
        .collect()
}

/// Record for a point already known to be periodic (polished here).
pub fn record_at(params: &HenonParams, p: Point2, period: u32) -> Result<SaddleRecord> {
    let mut xs = Vec::with_capacity(period as usize);
    let mut q = p;
    for _ in 0..period {
        xs.push(q.x);
        q = params.forward(q);
    }
    let xs = newton_orbit(params, xs, 30).ok_or(crate::Error::NonConvergence {
        what: "periodic orbit polish",
        defect: q.dist(&p),
    })?;
    Ok(orbit_records(params, &xs, 0).swap_remove(0))
}

/// Both fixed points from the closed form, as records.
pub fn fixed_point_records(params: &HenonParams) -> Vec<SaddleRecord> {
    params
        .fixed_points()
        .iter()
        .enumerate()
        .map(|(i, fp)| {
            let mut r = orbit_records(params, &[fp.x], i).swap_remove(0);
            r.orbit = i;
            r
        })
        .collect()
}

/// The fixed saddle with the largest `|λ_u|`, used as the default for pictures.
pub fn default_saddle(params: &HenonParams) -> Option<SaddleRecord> {
    fixed_point_records(params)
        .into_iter()
        .filter(|r| r.is_saddle())
        .max_by(|u, v| u.eigen_unstable.norm().total_cmp(&v.eigen_unstable.norm()))
}

/// Plain-text JSON form of a search result.
pub fn to_json(search: &PeriodicSearch) -> String {
    serde_json::to_string_pretty(search).expect("records serialize")
}

pub fn from_json(s: &str) -> Result<PeriodicSearch> {
    serde_json::from_str(s).map_err(|e| crate::Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs() -> HenonParams {
        HenonParams::real(6.0, 0.3).unwrap()
    }

    #[test]
    fn fixed_points_of_horseshoe() {
        let r = find_periodic(&hs(), 1, SearchKind::ComplexGrid, &SearchBudget::default(), 0).unwrap();
        assert_eq!(r.records.len(), 2);
        for rec in &r.records {
            let x = rec.location.x;
            assert!((x * x + x * 1.3 - 6.0).norm() < 1e-10);
            assert!(rec.is_saddle());
        }
    }

    #[test]
    fn period_two_pair() {
        let r = find_periodic(&hs(), 2, SearchKind::ComplexGrid, &SearchBudget::default(), 0).unwrap();
        assert_eq!(r.records.len(), 4);
        let two: Vec<_> = r.exact_period().collect();
        assert_eq!(two.len(), 2);
        // Eliminating y: the 2-cycle x-values solve x² − (1 + b)x + (1 + b)² − a = 0.
        let (x1, x2) = (two[0].location.x, two[1].location.x);
        assert!((x1 + x2 - 1.3).norm() < 1e-10);
        assert!((x1 * x2 - (1.69 - 6.0)).norm() < 1e-10);
    }

    #[test]
    fn complex_fixed_points_need_complex_search() {
        let p = HenonParams::real(-10.0, 0.3).unwrap();
        let c = find_periodic(&p, 1, SearchKind::ComplexGrid, &SearchBudget::default(), 0).unwrap();
        assert_eq!(c.records.len(), 2);
        assert!(c.records.iter().all(|r| r.location.x.im.abs() > 1.0));
        let r = find_periodic(&p, 1, SearchKind::RealGrid, &SearchBudget::default(), 0).unwrap();
        assert!(r.records.is_empty());
    }

    #[test]
    fn period_guard() {
        assert!(find_periodic(&hs(), 13, SearchKind::ComplexGrid, &SearchBudget::default(), 0).is_err());
        assert!(find_periodic(&hs(), 0, SearchKind::ComplexGrid, &SearchBudget::default(), 0).is_err());
    }

    #[test]
    fn eigenvector_convention() {
        for rec in fixed_point_records(&hs()) {
            let v = rec.unstable_vector;
            let nrm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            assert!((nrm - 1.0).abs() < 1e-12);
            assert!(v[0].im == 0.0 && v[0].re > 0.0);
            let m = hs().differential(rec.location);
            let mv = m * nalgebra::Vector2::new(v[0], v[1]);
            assert!((mv[0] - rec.eigen_unstable * v[0]).norm() < 1e-8);
            assert!((mv[1] - rec.eigen_unstable * v[1]).norm() < 1e-8);
        }
    }

    #[test]
    fn search_is_deterministic_and_serializes() {
        let b = SearchBudget::default();
        let r1 = find_periodic(&hs(), 4, SearchKind::ComplexGrid, &b, 9).unwrap();
        let r2 = find_periodic(&hs(), 4, SearchKind::ComplexGrid, &b, 9).unwrap();
        assert_eq!(r1, r2);
        let back = from_json(&to_json(&r1)).unwrap();
        assert_eq!(back, r1);
    }

    #[test]
    fn default_saddle_has_largest_expansion() {
        let s = default_saddle(&hs()).unwrap();
        assert!(s.eigen_unstable.norm() > 6.0);
        assert!(s.location.x.re < 0.0);
    }
}
