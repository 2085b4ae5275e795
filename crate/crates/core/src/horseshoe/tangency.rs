//! Near-tangencies between stable and unstable manifolds of real fixed
//! saddles.
//!
//! Pieces of `W^u_q` and `W^s_p` come from the linearizing charts on the
//! real axis, grown over a few fundamental domains and refined until
//! consecutive samples inside the box are at most `h_max` apart. A fold of
//! `W^u_q` that approaches `W^s_p` without crossing shows up as a local
//! minimum of the distance that keeps its sign. The closest such fold over
//! all pairs `(p, q)` is fitted by a parabola over the tangent line of
//! `W^s_p`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{HenonParams, Point2, C64};
use crate::error::{Error, Result};
use crate::saddles::{fixed_point_records, linearize, linearize_stable, ManifoldChart, DEFAULT_SERIES_ORDER};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangencyConfig {
    /// Fundamental domains added beyond the local piece.
    pub generations: u32,
    /// Largest gap between consecutive samples inside the box.
    pub h_max: f64,
    /// Half-width of the fit window along the tangent line.
    pub fit_half_width: f64,
    /// Points in the fit window.
    pub fit_points: usize,
}

impl Default for TangencyConfig {
    fn default() -> Self {
        Self {
            generations: 2,
            h_max: 2e-3,
            fit_half_width: 0.05,
            fit_points: 401,
        }
    }
}

/// `|c1|` below this counts as vanishing slope.
pub const LINEAR_TOL: f64 = 1e-3;
/// `|c2|` above this counts as a genuine fold.
pub const QUADRATIC_MIN: f64 = 0.1;
/// Fit residual relative to `|c2|·w²` below this counts as quadratic.
pub const RESIDUAL_RATIO_MAX: f64 = 0.1;

/// Closest folded approach found for one pair of fixed points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairApproach {
    pub p: usize,
    pub q: usize,
    /// Unsigned distance at the fold, `None` if no fold approaches.
    pub distance: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangencyReport {
    pub a: f64,
    pub b: f64,
    /// Index of the fixed point carrying the stable manifold.
    pub p: usize,
    /// Index of the fixed point carrying the unstable manifold.
    pub q: usize,
    pub p_location: [f64; 2],
    pub q_location: [f64; 2],
    /// `(ξ, η)` in the fit frame: offset along and across the tangent line.
    pub samples: Vec<[f64; 2]>,
    /// Tip of the fold of `W^u_q`.
    pub location: Point2,
    /// `η ≈ c0 + c1 ξ + c2 ξ²`; `c0` is the signed gap.
    pub coefficients: [f64; 3],
    /// Root-mean-square fit residual.
    pub residual_rms: f64,
    pub residual_max: f64,
    pub fit_half_width: f64,
    pub pairs: Vec<PairApproach>,
}

impl TangencyReport {
    /// Leading order is quadratic: slope below [`LINEAR_TOL`], curvature
    /// above [`QUADRATIC_MIN`], residual under [`RESIDUAL_RATIO_MAX`] of the
    /// quadratic term at the window edge.
    pub fn quadratic_dominant(&self) -> bool {
        let [_, c1, c2] = self.coefficients;
        c1.abs() < LINEAR_TOL && c2.abs() > QUADRATIC_MIN && self.residual_ratio() < RESIDUAL_RATIO_MAX
    }

    pub fn residual_ratio(&self) -> f64 {
        self.residual_rms / (self.coefficients[2].abs() * self.fit_half_width.powi(2))
    }
}

type P2 = [f64; 2];

fn sub(u: P2, v: P2) -> P2 {
    [u[0] - v[0], u[1] - v[1]]
}

fn dot(u: P2, v: P2) -> f64 {
    u[0] * v[0] + u[1] * v[1]
}

fn cross(u: P2, v: P2) -> f64 {
    u[0] * v[1] - u[1] * v[0]
}

fn norm(u: P2) -> f64 {
    dot(u, u).sqrt()
}

/// Real curve `t ↦ chart(t)`.
struct RealChart {
    chart: ManifoldChart,
}

impl RealChart {
    fn at(&self, t: f64) -> P2 {
        let p = self.chart.eval(C64::new(t, 0.0));
        [p.x.re, p.y.re]
    }

    fn lambda(&self) -> f64 {
        self.chart.lin.lambda().norm()
    }
}

struct Curve {
    t: Vec<f64>,
    pts: Vec<P2>,
}

fn inside(p: P2, r: f64) -> bool {
    p[0].is_finite() && p[1].is_finite() && p[0].abs() <= r && p[1].abs() <= r
}

/// Parameter where the curve first leaves the box, searching outward.
fn exit_parameter(c: &RealChart, sign: f64, r: f64) -> f64 {
    let mut t = 1e-6;
    while t < 1e12 {
        if !inside(c.at(sign * t), r) {
            return t;
        }
        t *= 1.05;
    }
    t
}

/// Samples `[−t1, t1]` and then each fundamental domain
/// `±[t1 λ^(g−1), t1 λ^g]` for `g = 1..=generations`.
fn sample_curve(c: &RealChart, t1: f64, generations: u32, r: f64, h_max: f64) -> Curve {
    const COARSE: usize = 20_000;
    let lam = c.lambda();
    let mut knots: Vec<f64> = (0..=COARSE)
        .map(|i| -t1 + 2.0 * t1 * i as f64 / COARSE as f64)
        .collect();
    for g in 1..=generations as i32 {
        let (lo, hi) = (t1 * lam.powi(g - 1), t1 * lam.powi(g));
        for i in 1..=COARSE {
            let t = lo + (hi - lo) * i as f64 / COARSE as f64;
            knots.push(t);
            knots.push(-t);
        }
    }
    knots.sort_by(f64::total_cmp);
    let ps: Vec<P2> = knots.iter().map(|&t| c.at(t)).collect();
    let mut out = Curve {
        t: vec![knots[0]],
        pts: vec![ps[0]],
    };
    for i in 0..knots.len() - 1 {
        refine(c, (knots[i], ps[i]), (knots[i + 1], ps[i + 1]), r, h_max, 40, &mut out);
    }
    out
}

/// Appends samples strictly after `a` up to and including `b`.
fn refine(c: &RealChart, a: (f64, P2), b: (f64, P2), r: f64, h_max: f64, depth: u32, out: &mut Curve) {
    let relevant = inside(a.1, r) || inside(b.1, r);
    if relevant && depth > 0 && !(norm(sub(a.1, b.1)) <= h_max) {
        let tm = 0.5 * (a.0 + b.0);
        let m = (tm, c.at(tm));
        refine(c, a, m, r, h_max, depth - 1, out);
        refine(c, m, b, r, h_max, depth - 1, out);
    } else {
        out.t.push(b.0);
        out.pts.push(b.1);
    }
}

/// Bucketed segments of a curve for short-range distance queries.
struct SegmentIndex<'a> {
    curve: &'a Curve,
    cell: f64,
    r: f64,
    side: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> SegmentIndex<'a> {
    fn new(curve: &'a Curve, r: f64, cell: f64, h_max: f64) -> Self {
        let side = (2.0 * r / cell).ceil() as usize + 1;
        let mut buckets = vec![Vec::new(); side * side];
        for i in 0..curve.pts.len().saturating_sub(1) {
            let (u, v) = (curve.pts[i], curve.pts[i + 1]);
            if inside(u, r) && inside(v, r) && norm(sub(u, v)) <= 1.01 * h_max {
                let mid = [0.5 * (u[0] + v[0]), 0.5 * (u[1] + v[1])];
                let k = Self::key(mid, r, cell, side);
                buckets[k].push(i as u32);
            }
        }
        Self {
            curve,
            cell,
            r,
            side,
            buckets,
        }
    }

    fn coords(p: P2, r: f64, cell: f64, side: usize) -> (usize, usize) {
        let f = |v: f64| (((v + r) / cell).floor().max(0.0) as usize).min(side - 1);
        (f(p[0]), f(p[1]))
    }

    fn key(p: P2, r: f64, cell: f64, side: usize) -> usize {
        let (i, j) = Self::coords(p, r, cell, side);
        j * side + i
    }

    /// Signed distance to the nearest indexed segment within one cell, with
    /// its index and the foot point.
    fn nearest(&self, p: P2) -> Option<(f64, usize, P2)> {
        let (ci, cj) = Self::coords(p, self.r, self.cell, self.side);
        let mut best: Option<(f64, usize, P2)> = None;
        for j in cj.saturating_sub(1)..=(cj + 1).min(self.side - 1) {
            for i in ci.saturating_sub(1)..=(ci + 1).min(self.side - 1) {
                for &s in &self.buckets[j * self.side + i] {
                    let s = s as usize;
                    let (u, v) = (self.curve.pts[s], self.curve.pts[s + 1]);
                    let d = sub(v, u);
                    let len2 = dot(d, d);
                    let w = if len2 > 0.0 {
                        (dot(sub(p, u), d) / len2).clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                    let foot = [u[0] + w * d[0], u[1] + w * d[1]];
                    let dist = norm(sub(p, foot));
                    if best.is_none_or(|b| dist < b.0.abs()) {
                        let sign = if cross(d, sub(p, u)) >= 0.0 { 1.0 } else { -1.0 };
                        best = Some((sign * dist, s, foot));
                    }
                }
            }
        }
        best.filter(|b| b.0.abs() < self.cell)
    }
}

struct Approach {
    u_index: usize,
    s_index: usize,
    foot: P2,
}

/// Unit tangent of `s` at segment `j` from a chord over nearby samples.
fn tangent(s: &Curve, j: usize) -> P2 {
    let lo = j.saturating_sub(8);
    let hi = (j + 9).min(s.pts.len() - 1);
    let d = sub(s.pts[hi], s.pts[lo]);
    [d[0] / norm(d), d[1] / norm(d)]
}

/// Folds of `u` near `s`: samples where the direction of `u` turns through
/// the tangent direction of the nearest piece of `s`.
fn fold_candidates(u: &Curve, s: &SegmentIndex, r: f64, h_max: f64) -> Vec<Approach> {
    let near: Vec<Option<(f64, usize, P2)>> = u
        .pts
        .iter()
        .map(|&p| if inside(p, r) { s.nearest(p) } else { None })
        .collect();
    let turn = |i: usize, si: usize| cross(tangent(s.curve, si), sub(u.pts[i + 1], u.pts[i]));
    let mut out: Vec<Approach> = Vec::new();
    for i in 1..u.pts.len().saturating_sub(2) {
        let (Some((_, si, foot)), Some((_, sj, _))) = (near[i], near[i + 1]) else {
            continue;
        };
        let continuous = (i - 1..=i + 1).all(|k| norm(sub(u.pts[k + 1], u.pts[k])) <= 1.01 * h_max);
        if !continuous || si.abs_diff(sj) > 64 {
            continue;
        }
        if turn(i - 1, si).signum() != turn(i + 1, si).signum() && turn(i - 1, si) != 0.0 {
            let p = u.pts[i];
            if !out.iter().any(|o| norm(sub(u.pts[o.u_index], p)) < 10.0 * h_max) {
                out.push(Approach {
                    u_index: i,
                    s_index: si,
                    foot,
                });
            }
        }
    }
    out
}

/// Least-squares `η = c0 + c1 ξ + c2 ξ²`; returns coefficients and residuals.
fn fit_quadratic(xs: &[f64], ys: &[f64]) -> Option<([f64; 3], Vec<f64>)> {
    let a = nalgebra::DMatrix::from_fn(xs.len(), 3, |i, j| xs[i].powi(j as i32));
    let y = nalgebra::DVector::from_column_slice(ys);
    let c = a.clone().svd(true, true).solve(&y, 1e-14).ok()?;
    let res = (&a * &c - &y).iter().copied().collect();
    Some(([c[0], c[1], c[2]], res))
}

struct Fit {
    coefficients: [f64; 3],
    residual_rms: f64,
    residual_max: f64,
    samples: Vec<[f64; 2]>,
    tip: P2,
}

/// Parabola fit of `u` near sample `i` in the frame of the segment `j` of
/// `s`, recentred on its own vertex until the slope vanishes.
fn fit_fold(uc: &RealChart, u: &Curve, i: usize, s: &Curve, j: usize, foot: P2, cfg: &TangencyConfig) -> Option<Fit> {
    let tan = tangent(s, j);
    let nrm = [-tan[1], tan[0]];
    let frame = |p: P2| {
        let v = sub(p, foot);
        (dot(v, tan), dot(v, nrm))
    };
    let w = cfg.fit_half_width;
    let mut center_t = u.t[i];
    let mut center_xi = frame(u.pts[i]).0;
    for _ in 0..30 {
        let mut dt = (u.t[i + 1] - u.t[i - 1]).abs().max(f64::MIN_POSITIVE);
        for _ in 0..60 {
            let lo = frame(uc.at(center_t - dt)).0 - center_xi;
            let hi = frame(uc.at(center_t + dt)).0 - center_xi;
            if lo.abs().min(hi.abs()) >= w {
                break;
            }
            dt *= 2.0;
        }
        let n = cfg.fit_points;
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        let mut ts = Vec::with_capacity(n);
        for k in 0..n {
            let t = center_t - dt + 2.0 * dt * k as f64 / (n - 1) as f64;
            let (xi, eta) = frame(uc.at(t));
            if (xi - center_xi).abs() <= w {
                xs.push(xi - center_xi);
                ys.push(eta);
                ts.push(t);
            }
        }
        if xs.len() < 8 {
            return None;
        }
        let (c, res) = fit_quadratic(&xs, &ys)?;
        if c[2] == 0.0 {
            return None;
        }
        let shift = -c[1] / (2.0 * c[2]);
        if shift.abs() > w {
            return None;
        }
        let k_tip = (0..xs.len()).min_by(|&a, &b| (xs[a] - shift).abs().total_cmp(&(xs[b] - shift).abs()))?;
        if shift.abs() < 1e-12 || c[1].abs() < 1e-10 {
            let rms = (res.iter().map(|r| r * r).sum::<f64>() / res.len() as f64).sqrt();
            let max = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
            let stride = (xs.len() / 100).max(1);
            return Some(Fit {
                coefficients: c,
                residual_rms: rms,
                residual_max: max,
                samples: xs.iter().zip(&ys).step_by(stride).map(|(&x, &y)| [x, y]).collect(),
                tip: uc.at(ts[k_tip]),
            });
        }
        center_xi += shift;
        center_t = ts[k_tip];
    }
    None
}

/// The closest folded approach of an unstable manifold to a stable one
/// among the real fixed saddles of `f_{a,b}`, with a parabola fit.
pub fn find_tangency(a: f64, b: f64, cfg: &TangencyConfig) -> Result<TangencyReport> {
    let params = HenonParams::real(a, b)?;
    let fixed: Vec<_> = fixed_point_records(&params)
        .into_iter()
        .enumerate()
        .filter(|(_, r)| r.is_saddle() && r.is_real(1e-9))
        .collect();
    if fixed.is_empty() {
        return Err(Error::NonConvergence {
            what: "tangency search (no real fixed saddle)",
            defect: f64::INFINITY,
        });
    }
    let r = 1.25 * params.tight_radius();
    let grow = |chart: ManifoldChart| {
        let c = RealChart { chart };
        let t1 = exit_parameter(&c, 1.0, r).max(exit_parameter(&c, -1.0, r));
        let curve = sample_curve(&c, t1, cfg.generations, r, cfg.h_max);
        (c, curve)
    };
    let mut unstable = Vec::new();
    let mut stable = Vec::new();
    for (k, rec) in &fixed {
        let lin = linearize(&params, rec, DEFAULT_SERIES_ORDER)?;
        unstable.push((*k, grow(ManifoldChart::unstable(lin))));
        stable.push((*k, grow(linearize_stable(&params, rec, DEFAULT_SERIES_ORDER)?)));
    }

    let cell = 0.25;
    let mut pairs = Vec::new();
    let mut best: Option<(usize, usize, Fit)> = None;
    for (p, (_, sc)) in &stable {
        let index = SegmentIndex::new(sc, r, cell, cfg.h_max);
        for (q, (uc, ucurve)) in &unstable {
            let fits = fold_candidates(ucurve, &index, r, cfg.h_max)
                .into_iter()
                .filter_map(|c| fit_fold(uc, ucurve, c.u_index, sc, c.s_index, c.foot, cfg));
            let closest = fits.min_by(|x, y| x.coefficients[0].abs().total_cmp(&y.coefficients[0].abs()));
            pairs.push(PairApproach {
                p: *p,
                q: *q,
                distance: closest.as_ref().map(|f| f.coefficients[0].abs()),
            });
            if let Some(f) = closest {
                if best
                    .as_ref()
                    .is_none_or(|(_, _, b)| f.coefficients[0].abs() < b.coefficients[0].abs())
                {
                    best = Some((*p, *q, f));
                }
            }
        }
    }
    let Some((p, q, fit)) = best else {
        return Err(Error::NonConvergence {
            what: "tangency search (no fold near a stable manifold)",
            defect: f64::INFINITY,
        });
    };
    let loc = |k: usize| {
        let l = fixed.iter().find(|(i, _)| *i == k).expect("enumerated").1.location;
        [l.x.re, l.y.re]
    };
    Ok(TangencyReport {
        a,
        b,
        p,
        q,
        p_location: loc(p),
        q_location: loc(q),
        samples: fit.samples,
        location: Point2::real(fit.tip[0], fit.tip[1]),
        coefficients: fit.coefficients,
        residual_rms: fit.residual_rms,
        residual_max: fit.residual_max,
        fit_half_width: cfg.fit_half_width,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_fit_recovers_coefficients() {
        let xs: Vec<f64> = (0..21).map(|i| -0.1 + 0.01 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 - 2.0 * x + 3.0 * x * x).collect();
        let (c, res) = fit_quadratic(&xs, &ys).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] + 2.0).abs() < 1e-10 && (c[2] - 3.0).abs() < 1e-9);
        assert!(res.iter().all(|r| r.abs() < 1e-12));
    }
}
