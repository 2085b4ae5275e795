//! Linearizing coordinates `φ` on unstable manifolds of saddle orbits.
//!
//! Each point `p_i` of an orbit of period `n` carries a power series
//! `φ_i(z) = Σ (c_k, d_k) z^k` with `φ_i(0) = p_i`, `φ_i'(0) = v_i` and
//! `f(φ_i(z)) = φ_{i+1}(μ_i z)`, where `Π μ_i = λ_u`. Composing around the
//! orbit gives `f^n(φ_0(z)) = φ_0(λ_u z)`. Matching powers of `z` turns the
//! conjugacy into one cyclic `n × n` linear system per order.
//!
//! Outside the disk where the truncated series is accurate, `φ_0` is
//! extended by `φ_0(λ^m w) = f^{nm}(φ_0(w))`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{cycle_points, newton_orbit, record_at, SaddleRecord};
use crate::dynamics::{HenonParams, Point2, C64};
use crate::error::{invalid, Error, Result};

pub const DEFAULT_SERIES_ORDER: usize = 64;
const MAX_SERIES_ORDER: usize = 200;
/// Functional-equation defect accepted by [`linearize`].
pub const DEFECT_THRESHOLD: f64 = 1e-8;
const SAMPLES: usize = 64;
/// Largest series term allowed inside the trusted disk; bounds cancellation.
const MAX_TERM: f64 = 1e4;

/// Value and first two `z`-derivatives of a chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub p: Point2,
    pub dp: Point2,
    pub ddp: Point2,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Linearization {
    pub saddle: SaddleRecord,
    params: HenonParams,
    pub k_max: usize,
    lambda: C64,
    /// Series coefficients of `x` and `y` for the chart at `saddle.location`.
    cx: Vec<C64>,
    cy: Vec<C64>,
    /// Radius on which the truncated series is trusted.
    pub series_radius: f64,
    /// `sup ‖f^n(φ(z)) − φ(λz)‖∞` on `|z| = test_radius`, both sides by series.
    pub defect: f64,
    pub test_radius: f64,
}

/// Linearizing coordinate of `saddle` up to order `k_max`.
pub fn linearize(params: &HenonParams, saddle: &SaddleRecord, k_max: usize) -> Result<Linearization> {
    if !saddle.is_saddle() {
        return Err(invalid("saddle", "point is not a saddle"));
    }
    if !(2..=MAX_SERIES_ORDER).contains(&k_max) {
        return Err(invalid(
            "k_max",
            format!("series order must lie in 2..={MAX_SERIES_ORDER}"),
        ));
    }
    let n = saddle.period as usize;
    let mut xs = Vec::with_capacity(n);
    let mut q = saddle.location;
    for _ in 0..n {
        xs.push(q.x);
        q = params.forward(q);
    }
    let xs = newton_orbit(params, xs, 30).ok_or(Error::NonConvergence {
        what: "saddle orbit",
        defect: q.dist(&saddle.location),
    })?;
    let orbit = cycle_points(&xs);
    let lambda = saddle.eigen_unstable;
    let b = params.b();

    // push the tangent vector around the orbit; the last factor closes the product
    let mut v = vec![saddle.unstable_vector; n];
    let mut mu = vec![C64::new(1.0, 0.0); n];
    let mut prod = C64::new(1.0, 0.0);
    for i in 0..n.saturating_sub(1) {
        let w = params.differential(orbit[i]) * nalgebra::Vector2::new(v[i][0], v[i][1]);
        let scale = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt() / (v[i][0].norm_sqr() + v[i][1].norm_sqr()).sqrt();
        mu[i] = C64::new(scale, 0.0);
        prod *= mu[i];
        v[i + 1] = [w[0] / scale, w[1] / scale];
    }
    mu[n - 1] = lambda / prod;

    // c[i][k]: x-coefficients of the chart at p_i
    let mut c = vec![vec![C64::new(0.0, 0.0); k_max + 1]; n];
    for i in 0..n {
        c[i][0] = orbit[i].x;
        c[i][1] = v[i][0];
    }
    for k in 2..=k_max {
        let mut a = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        let mut rhs = DVector::from_element(n, C64::new(0.0, 0.0));
        for i in 0..n {
            let prev = (i + n - 1) % n;
            a[(i, (i + 1) % n)] += mu[i].powu(k as u32);
            a[(i, i)] += c[i][0] * 2.0;
            a[(i, prev)] += b * mu[prev].powu(k as u32).inv();
            let conv: C64 = (1..k).map(|j| c[i][j] * c[i][k - j]).sum();
            rhs[i] = -conv;
        }
        let sol = a.lu().solve(&rhs).ok_or(Error::NonConvergence {
            what: "linearization coefficients",
            defect: f64::INFINITY,
        })?;
        for i in 0..n {
            c[i][k] = sol[i];
        }
    }
    let cx = c[0].clone();
    let last = n - 1;
    let cy: Vec<C64> = (0..=k_max)
        .map(|k| match k {
            0 => orbit[0].y,
            _ => c[last][k] * mu[last].powu(k as u32).inv(),
        })
        .collect();

    let mut lin = Linearization {
        saddle: SaddleRecord {
            location: orbit[0],
            ..saddle.clone()
        },
        params: *params,
        k_max,
        lambda,
        cx,
        cy,
        series_radius: 0.0,
        defect: f64::INFINITY,
        test_radius: 0.0,
    };
    lin.series_radius = lin.trusted_radius();
    lin.test_radius = (lin.series_radius / lambda.norm()).min(1.0);
    lin.defect = lin.measure_defect(lin.test_radius);
    if !(lin.defect < DEFECT_THRESHOLD) {
        return Err(Error::NonConvergence {
            what: "linearization",
            defect: lin.defect,
        });
    }
    Ok(lin)
}

/// Linearizing chart of the stable manifold, built on the inverse map.
pub fn linearize_stable(params: &HenonParams, saddle: &SaddleRecord, k_max: usize) -> Result<ManifoldChart> {
    let h = params.inverse_conjugate();
    let q = params.to_inverse_chart(saddle.location);
    let rec = record_at(&h, q, saddle.period)?;
    Ok(ManifoldChart {
        original: *params,
        lin: linearize(&h, &rec, k_max)?,
        stable: true,
    })
}

impl Linearization {
    pub fn params(&self) -> &HenonParams {
        &self.params
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn period(&self) -> u32 {
        self.saddle.period
    }

    pub fn coefficients(&self) -> (&[C64], &[C64]) {
        (&self.cx, &self.cy)
    }

    /// The truncated series itself; accurate for `|w| ≤ series_radius`.
    pub fn series(&self, w: C64) -> Point2 {
        Point2::new(horner(&self.cx, w), horner(&self.cy, w))
    }

    pub fn series_jet(&self, w: C64) -> Jet {
        let (x, dx, ddx) = horner_jet(&self.cx, w);
        let (y, dy, ddy) = horner_jet(&self.cy, w);
        Jet {
            p: Point2::new(x, y),
            dp: Point2::new(dx, dy),
            ddp: Point2::new(ddx, ddy),
        }
    }

    /// Write `z = λ^m w` with `|w| ≤ series_radius`.
    pub fn reduce(&self, z: C64) -> (C64, u32) {
        let r = z.norm();
        if r <= self.series_radius {
            return (z, 0);
        }
        let m = ((r / self.series_radius).ln() / self.lambda.norm().ln())
            .ceil()
            .max(1.0) as u32;
        (z / self.lambda.powu(m), m)
    }

    /// `φ(z)`; may overflow to a non-finite point far out on the manifold.
    pub fn eval(&self, z: C64) -> Point2 {
        let (w, m) = self.reduce(z);
        let mut p = self.series(w);
        for _ in 0..m * self.saddle.period {
            p = self.params.forward(p);
            if !p.is_finite() {
                break;
            }
        }
        p
    }

    fn trusted_radius(&self) -> f64 {
        let k = self.cx.len() - 1;
        let weight = |j: usize| self.cx[j].norm() + self.cy[j].norm();
        let ok = |r: f64| {
            let size = (0..=k).map(|j| weight(j) * r.powi(j as i32)).fold(1.0, f64::max);
            let tail = (k.saturating_sub(3)..=k)
                .map(|j| weight(j) * r.powi(j as i32))
                .fold(0.0, f64::max);
            tail <= 1e-17 * size && size <= MAX_TERM
        };
        let (mut lo, mut hi) = (1e-6f64, 1e6f64);
        if !ok(lo) {
            return lo;
        }
        for _ in 0..80 {
            let mid = (lo * hi).sqrt();
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn measure_defect(&self, radius: f64) -> f64 {
        (0..SAMPLES)
            .map(|j| {
                let z = C64::from_polar(radius, std::f64::consts::TAU * j as f64 / SAMPLES as f64);
                let mut p = self.series(z);
                for _ in 0..self.saddle.period {
                    p = self.params.forward(p);
                }
                p.dist(&self.series(self.lambda * z))
            })
            .fold(0.0, f64::max)
    }
}

fn horner(c: &[C64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &ck| acc * z + ck)
}

fn horner_jet(c: &[C64], z: C64) -> (C64, C64, C64) {
    let zero = C64::new(0.0, 0.0);
    let (mut p, mut dp, mut ddp) = (zero, zero, zero);
    for &ck in c.iter().rev() {
        ddp = ddp * z + dp * 2.0;
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp, ddp)
}

/// A linearizing chart on either invariant manifold of a saddle.
#[derive(Clone, Debug)]
pub struct ManifoldChart {
    pub original: HenonParams,
    /// For stable charts, the linearization of the inverse-conjugate map.
    pub lin: Linearization,
    pub stable: bool,
}

impl ManifoldChart {
    pub fn unstable(lin: Linearization) -> Self {
        Self {
            original: lin.params,
            lin,
            stable: false,
        }
    }

    /// Point of the manifold in the original coordinates.
    pub fn eval(&self, z: C64) -> Point2 {
        let p = self.lin.eval(z);
        if self.stable {
            self.original.from_inverse_chart(p)
        } else {
            p
        }
    }

    pub fn series(&self, w: C64) -> Point2 {
        let p = self.lin.series(w);
        if self.stable {
            self.original.from_inverse_chart(p)
        } else {
            p
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::saddles::{default_saddle, find_periodic, SearchBudget, SearchKind};

    fn hs() -> HenonParams {
        HenonParams::real(6.0, 0.3).unwrap()
    }

    #[test]
    fn passes_through_saddle() {
        let s = default_saddle(&hs()).unwrap();
        let lin = linearize(&hs(), &s, DEFAULT_SERIES_ORDER).unwrap();
        assert_eq!(lin.eval(C64::new(0.0, 0.0)), lin.saddle.location);
        assert!(lin.saddle.location.dist(&s.location) < 1e-12);
    }

    #[test]
    fn derivative_is_unstable_vector() {
        let s = default_saddle(&hs()).unwrap();
        let lin = linearize(&hs(), &s, DEFAULT_SERIES_ORDER).unwrap();
        let h = 1e-6;
        let d = (lin.eval(C64::new(h, 0.0)) - lin.eval(C64::new(0.0, 0.0))).to_vector() / C64::new(h, 0.0);
        assert!((d[0] - s.unstable_vector[0]).norm() < 1e-4);
        assert!((d[1] - s.unstable_vector[1]).norm() < 1e-4);
    }

    #[test]
    fn second_order_coefficient_by_hand() {
        // n = 1: c_2 (λ² + 2x + bλ^{-2}) = −c_1²
        let s = default_saddle(&hs()).unwrap();
        let lin = linearize(&hs(), &s, 8).unwrap();
        let (cx, _) = lin.coefficients();
        let l = lin.lambda();
        let lhs = cx[2] * (l * l + s.location.x * 2.0 + 0.3 / (l * l));
        assert!((lhs + cx[1] * cx[1]).norm() < 1e-14);
    }

    #[test]
    fn extension_agrees_with_series() {
        let s = default_saddle(&hs()).unwrap();
        let lin = linearize(&hs(), &s, DEFAULT_SERIES_ORDER).unwrap();
        let z = C64::new(0.3, 0.2);
        let mut p = lin.series(z);
        p = hs().forward(p);
        let far = lin.eval(z * lin.lambda() * (1.0 + 1e-15));
        assert!(p.dist(&far) < 1e-8 * p.sup_norm().max(1.0));
    }

    #[test]
    fn period_two_saddle() {
        let r = find_periodic(&hs(), 2, SearchKind::RealGrid, &SearchBudget::default(), 1).unwrap();
        let s = r.exact_period().next().unwrap().clone();
        let lin = linearize(&hs(), &s, DEFAULT_SERIES_ORDER).unwrap();
        assert!(lin.defect < 1e-8);
    }

    #[test]
    fn stable_chart_lies_in_stable_manifold() {
        let s = default_saddle(&hs()).unwrap();
        let ch = linearize_stable(&hs(), &s, DEFAULT_SERIES_ORDER).unwrap();
        assert!(ch.eval(C64::new(0.0, 0.0)).dist(&s.location) < 1e-12);
        // forward iteration amplifies roundoff by |λ_u| per step, so stay short
        let mut p = ch.eval(C64::new(0.05, 0.0));
        for _ in 0..6 {
            p = hs().forward(p);
        }
        assert!(p.dist(&s.location) < 1e-6);
    }

    #[test]
    fn rejects_non_saddle_and_bad_order() {
        let s = default_saddle(&hs()).unwrap();
        assert!(linearize(&hs(), &s, 1).is_err());
        let mut t = s.clone();
        t.stability = crate::saddles::Stability::Attracting;
        assert!(linearize(&hs(), &t, 10).is_err());
    }
}
