//! Horseshoe certificates for real Hénon maps.
//!
//! Everything bounded under `f` and `f⁻¹` lies in `B = [−β, β]²`, where `β`
//! is the positive root of `r² = (1 + |b|) r + |a|`. If
//! `a − (1 + |b|) β > 0`, then `B ∩ f⁻¹(B)` is two vertical strips, each
//! mapped across `B`. Hyperbolicity is then checked on a cover of the
//! invariant set by grid boxes. The cover is pruned to boxes with both a
//! successor and a predecessor. Slope intervals are pushed along all graph
//! paths of length `k` until a cone is mapped into itself with uniform
//! expansion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::interval::{Box2, Interval};
use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorseshoeConfig {
    /// Boxes per side of the planar grid.
    pub grid: u32,
    /// Intervals across `[−β, β]` for the one-dimensional check.
    pub grid_1d: u32,
    /// Cone slopes tried, in order.
    pub kappas: Vec<f64>,
    /// Longest path length used for cone checks.
    pub max_steps: u32,
    /// Required expansion is `1 + margin` per `k` steps.
    pub margin: f64,
}

impl Default for HorseshoeConfig {
    fn default() -> Self {
        Self {
            grid: 256,
            grid_1d: 1024,
            kappas: vec![0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0],
            max_steps: 8,
            margin: 1e-3,
        }
    }
}

impl HorseshoeConfig {
    /// Coarse settings for parameter-plane scans.
    pub fn fast() -> Self {
        Self {
            grid: 48,
            grid_1d: 256,
            max_steps: 4,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(4..=4096).contains(&self.grid) {
            return Err(invalid("grid", "must lie in 4..=4096"));
        }
        if !(4..=1 << 20).contains(&self.grid_1d) {
            return Err(invalid("grid_1d", "must lie in 4..=2^20"));
        }
        if self.kappas.is_empty() || self.kappas.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
            return Err(invalid("kappas", "need at least one positive finite slope"));
        }
        if !(1..=64).contains(&self.max_steps) {
            return Err(invalid("max_steps", "must lie in 1..=64"));
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(invalid("margin", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertMode {
    Planar,
    /// The quadratic map `x ↦ a − x²`: no `y`-direction, no stable cone.
    OneDimensional,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingData {
    /// Upper bound for `β`.
    pub box_radius: f64,
    /// Lower bound for `a − (1 + |b|) β`; the strips exist when positive.
    pub margin: f64,
    /// `x`-ranges of the two strips `{x < 0}` and `{x > 0}`.
    pub strips: [[f64; 2]; 2],
}

/// Cone data that passed: slope `kappa` after `steps` iterations with
/// total expansion at least `expansion`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeCheck {
    pub kappa: f64,
    pub steps: u32,
    pub expansion: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorseshoeCertificate {
    pub a: f64,
    pub b: f64,
    pub mode: CertMode,
    pub trapping_box: Box2,
    pub crossing: CrossingData,
    pub unstable: Option<ConeCheck>,
    pub stable: Option<ConeCheck>,
    /// Per-step expansion `min(E_u^{1/k_u}, E_s^{1/k_s})`, 0 if unverified.
    pub expansion: f64,
    /// Boxes left after pruning.
    pub boxes: usize,
    pub verified: bool,
    /// First inequality that could not be verified.
    pub failure: Option<String>,
}

/// Box grid with edges `i → j` whenever the interval image of box `i`
/// meets box `j`.
struct Graph {
    boxes: Vec<Box2>,
    succ: Vec<Vec<u32>>,
    pred: Vec<Vec<u32>>,
}

fn nodes(radius: f64, n: u32) -> Vec<f64> {
    let h = 2.0 * radius / n as f64;
    let mut t: Vec<f64> = (0..=n).map(|i| -radius + i as f64 * h).collect();
    t[0] = -radius;
    t[n as usize] = radius;
    t
}

/// Indices of cells `[t_i, t_{i+1}]` that can meet `iv`, padded by one.
fn cell_range(t: &[f64], iv: Interval) -> Option<(usize, usize)> {
    let n = t.len() - 1;
    if iv.hi < t[0] || iv.lo > t[n] {
        return None;
    }
    let h = (t[n] - t[0]) / n as f64;
    let lo = (((iv.lo - t[0]) / h).floor() as i64 - 1).clamp(0, n as i64 - 1) as usize;
    let hi = (((iv.hi - t[0]) / h).floor() as i64 + 1).clamp(0, n as i64 - 1) as usize;
    Some((lo, hi))
}

fn prune(succ: &mut [Vec<u32>], pred: &mut [Vec<u32>]) -> Vec<bool> {
    let n = succ.len();
    let mut alive = vec![true; n];
    let mut out_deg: Vec<usize> = succ.iter().map(Vec::len).collect();
    let mut in_deg: Vec<usize> = pred.iter().map(Vec::len).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&i| out_deg[i] == 0 || in_deg[i] == 0).collect();
    while let Some(i) = stack.pop() {
        if !alive[i] {
            continue;
        }
        alive[i] = false;
        for &j in &succ[i] {
            let j = j as usize;
            in_deg[j] -= 1;
            if alive[j] && in_deg[j] == 0 {
                stack.push(j);
            }
        }
        for &j in &pred[i] {
            let j = j as usize;
            out_deg[j] -= 1;
            if alive[j] && out_deg[j] == 0 {
                stack.push(j);
            }
        }
    }
    for i in 0..n {
        if alive[i] {
            succ[i].retain(|&j| alive[j as usize]);
            pred[i].retain(|&j| alive[j as usize]);
        } else {
            succ[i].clear();
            pred[i].clear();
        }
    }
    alive
}

fn compact(boxes: Vec<Box2>, mut succ: Vec<Vec<u32>>, mut pred: Vec<Vec<u32>>) -> Graph {
    let alive = prune(&mut succ, &mut pred);
    let mut remap = vec![u32::MAX; boxes.len()];
    let mut next = 0u32;
    for (i, &a) in alive.iter().enumerate() {
        if a {
            remap[i] = next;
            next += 1;
        }
    }
    let keep = |v: &Vec<u32>| v.iter().map(|&j| remap[j as usize]).collect::<Vec<u32>>();
    let mut g = Graph {
        boxes: Vec::new(),
        succ: Vec::new(),
        pred: Vec::new(),
    };
    for i in 0..boxes.len() {
        if alive[i] {
            g.boxes.push(boxes[i]);
            g.succ.push(keep(&succ[i]));
            g.pred.push(keep(&pred[i]));
        }
    }
    g
}

/// `β` as an interval: the positive root of `r² = c r + |a|`.
fn beta(c: Interval, abs_a: f64) -> Interval {
    let disc = c.sqr() + Interval::point(abs_a).scale(4.0);
    (c + disc.sqrt()).scale(0.5)
}

fn crossing(a: f64, c: Interval, beta: Interval) -> (f64, [[f64; 2]; 2]) {
    let margin = (Interval::point(a) - c * beta).lo;
    let inner = if margin > 0.0 {
        Interval::point(margin).sqrt().lo
    } else {
        0.0
    };
    (margin, [[-beta.hi, -inner], [inner, beta.hi]])
}

/// Planar certificate for `f(x, y) = (a − b·y − x², x)`.
pub fn certify_horseshoe(a: f64, b: f64, cfg: &HorseshoeConfig) -> Result<HorseshoeCertificate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("a", "parameters must be finite"));
    }
    if b == 0.0 {
        return Err(invalid("b", "must be nonzero"));
    }
    cfg.validate()?;
    let bi = Interval::point(b);
    let c = Interval::point(1.0) + Interval::point(b.abs());
    let beta = beta(c, a.abs());
    let r = beta.hi;
    let (margin, strips) = crossing(a, c, beta);
    let trap = Box2::new(Interval::new(-r, r), Interval::new(-r, r));
    let mut cert = HorseshoeCertificate {
        a,
        b,
        mode: CertMode::Planar,
        trapping_box: trap,
        crossing: CrossingData {
            box_radius: r,
            margin,
            strips,
        },
        unstable: None,
        stable: None,
        expansion: 0.0,
        boxes: 0,
        verified: false,
        failure: None,
    };
    if !(margin > 0.0) {
        cert.failure = Some(format!("crossing: a − (1+|b|)β ≥ {margin:e} is not positive"));
        return Ok(cert);
    }

    let t = nodes(r, cfg.grid);
    let n = cfg.grid as usize;
    let inner = strips[1][0];
    let id = |i: usize, j: usize| i * n + j;
    let mut boxes = Vec::with_capacity(n * n);
    let mut in_strip = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            let bx = Box2::new(Interval::new(t[i], t[i + 1]), Interval::new(t[j], t[j + 1]));
            in_strip[id(i, j)] = bx.x.mag() >= inner;
            boxes.push(bx);
        }
    }
    let mut succ = vec![Vec::new(); n * n];
    let mut pred = vec![Vec::new(); n * n];
    for i in 0..n {
        for j in 0..n {
            let k = id(i, j);
            if !in_strip[k] {
                continue;
            }
            let bx = boxes[k];
            let x1 = Interval::point(a) - bi * bx.y - bx.x.sqr();
            let (Some((i0, i1)), Some((j0, j1))) = (cell_range(&t, x1), cell_range(&t, bx.x)) else {
                continue;
            };
            for ii in i0..=i1 {
                for jj in j0..=j1 {
                    let m = id(ii, jj);
                    let target = &boxes[m];
                    if in_strip[m] && target.x.intersects(&x1) && target.y.intersects(&bx.x) {
                        succ[k].push(m as u32);
                        pred[m].push(k as u32);
                    }
                }
            }
        }
    }
    let g = compact(boxes, succ, pred);
    cert.boxes = g.boxes.len();
    if g.boxes.is_empty() {
        cert.failure = Some("no box survives pruning".into());
        return Ok(cert);
    }

    let unstable = cfg.kappas.iter().find_map(|&k| unstable_cone(&g, b, k, cfg));
    let Some(u) = unstable else {
        cert.failure = Some("unstable cone: no slope and path length gave invariance with expansion".into());
        return Ok(cert);
    };
    cert.unstable = Some(u);
    let stable = cfg.kappas.iter().find_map(|&k| stable_cone(&g, b, k, cfg));
    let Some(s) = stable else {
        cert.failure = Some("stable cone: no slope and path length gave invariance with expansion".into());
        return Ok(cert);
    };
    cert.stable = Some(s);
    cert.expansion = u
        .expansion
        .powf(1.0 / u.steps as f64)
        .min(s.expansion.powf(1.0 / s.steps as f64));
    cert.verified = true;
    Ok(cert)
}

/// Push the cone `|w| ≤ κ|u|` forward: slope `s = w/u` becomes
/// `1/(−2x − b s)` and `|u|` grows by `|−2x − b s|`.
fn unstable_cone(g: &Graph, b: f64, kappa: f64, cfg: &HorseshoeConfig) -> Option<ConeCheck> {
    let step = |bx: &Box2, s: Interval| {
        let d = bx.x.scale(-2.0) - s.scale(b);
        d.recip().map(|r| (r, d.mig()))
    };
    cone_dp(g, kappa, cfg, &g.pred, step)
}

/// Push the cone `|u| ≤ κ|w|` backward: slope `t = u/w` becomes
/// `−b/(t + 2y)` and `|w|` grows by `|t + 2y|/|b|`.
fn stable_cone(g: &Graph, b: f64, kappa: f64, cfg: &HorseshoeConfig) -> Option<ConeCheck> {
    let inv_b = Interval::point(b.abs()).recip().expect("b is nonzero");
    let step = |bx: &Box2, t: Interval| {
        let d = t + bx.y.scale(2.0);
        d.recip().map(|r| (r.scale(-b), (Interval::point(d.mig()) * inv_b).lo))
    };
    cone_dp(g, kappa, cfg, &g.succ, step)
}

/// Slope hulls and expansion minima over all paths of length `j`, for
/// `j = 1..=max_steps`; succeeds at the first `j` where every box passes.
/// `incoming[t]` lists the boxes whose step lands in box `t`.
fn cone_dp(
    g: &Graph,
    kappa: f64,
    cfg: &HorseshoeConfig,
    incoming: &[Vec<u32>],
    step: impl Fn(&Box2, Interval) -> Option<(Interval, f64)> + Sync,
) -> Option<ConeCheck> {
    let cone = Interval::new(-kappa, kappa);
    let n = g.boxes.len();
    let mut slope = vec![cone; n];
    let mut gain = vec![1.0f64; n];
    for j in 1..=cfg.max_steps {
        let out: Option<Vec<(Interval, f64)>> = (0..n)
            .into_par_iter()
            .map(|i| step(&g.boxes[i], slope[i]).map(|(s, e)| (s, (e * gain[i]).next_down())))
            .collect();
        let out = out?;
        let next: Vec<(Interval, f64)> = incoming
            .par_iter()
            .map(|src| {
                let mut it = src.iter().map(|&s| out[s as usize]);
                let first = it.next().expect("pruned graph has no sources");
                it.fold(first, |(h, m), (s, e)| (h.hull(&s), m.min(e)))
            })
            .collect();
        let inside = next.iter().all(|(s, _)| s.subset_of(&cone));
        let min_gain = next.iter().map(|&(_, e)| e).fold(f64::INFINITY, f64::min);
        if inside && min_gain >= 1.0 + cfg.margin {
            return Some(ConeCheck {
                kappa,
                steps: j,
                expansion: min_gain,
            });
        }
        (slope, gain) = next.into_iter().unzip();
    }
    None
}

/// The same strip-and-expansion logic for `x ↦ a − x²`.
pub fn certify_horseshoe_1d(a: f64, cfg: &HorseshoeConfig) -> Result<HorseshoeCertificate> {
    if !a.is_finite() {
        return Err(invalid("a", "must be finite"));
    }
    cfg.validate()?;
    let c = Interval::point(1.0);
    let beta = beta(c, a.abs());
    let r = beta.hi;
    let (margin, strips) = crossing(a, c, beta);
    let mut cert = HorseshoeCertificate {
        a,
        b: 0.0,
        mode: CertMode::OneDimensional,
        trapping_box: Box2::new(Interval::new(-r, r), Interval::point(0.0)),
        crossing: CrossingData {
            box_radius: r,
            margin,
            strips,
        },
        unstable: None,
        stable: None,
        expansion: 0.0,
        boxes: 0,
        verified: false,
        failure: None,
    };
    if !(margin > 0.0) {
        cert.failure = Some(format!("crossing: a − β ≥ {margin:e} is not positive"));
        return Ok(cert);
    }
    let t = nodes(r, cfg.grid_1d);
    let n = cfg.grid_1d as usize;
    let inner = strips[1][0];
    let boxes: Vec<Box2> = (0..n)
        .map(|i| Box2::new(Interval::new(t[i], t[i + 1]), Interval::point(0.0)))
        .collect();
    let mut succ = vec![Vec::new(); n];
    let mut pred = vec![Vec::new(); n];
    for i in 0..n {
        if boxes[i].x.mag() < inner {
            continue;
        }
        let img = Interval::point(a) - boxes[i].x.sqr();
        let Some((lo, hi)) = cell_range(&t, img) else { continue };
        for j in lo..=hi {
            if boxes[j].x.mag() >= inner && boxes[j].x.intersects(&img) {
                succ[i].push(j as u32);
                pred[j].push(i as u32);
            }
        }
    }
    let g = compact(boxes, succ, pred);
    cert.boxes = g.boxes.len();
    if g.boxes.is_empty() {
        cert.failure = Some("no interval survives pruning".into());
        return Ok(cert);
    }
    // with no second direction the slope stays 0 and only |f'| = |2x| matters
    let step = |bx: &Box2, _s: Interval| Some((Interval::point(0.0), bx.x.scale(2.0).mig()));
    match cone_dp(&g, 1.0, cfg, &g.pred, step) {
        Some(u) => {
            cert.expansion = u.expansion.powf(1.0 / u.steps as f64);
            cert.unstable = Some(u);
            cert.verified = true;
        }
        None => cert.failure = Some("expansion: |(f^k)'| ≤ 1 + margin on some path".into()),
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_horseshoe_certifies() {
        let c = certify_horseshoe(10.0, 0.3, &HorseshoeConfig::default()).unwrap();
        assert!(c.verified, "{:?}", c.failure);
        assert!(c.expansion > 1.0);
    }

    #[test]
    fn negative_jacobian_certifies() {
        let c = certify_horseshoe(10.0, -0.3, &HorseshoeConfig::fast()).unwrap();
        assert!(c.verified, "{:?}", c.failure);
    }

    #[test]
    fn attracting_regime_fails_at_crossing() {
        let c = certify_horseshoe(1.0, 0.3, &HorseshoeConfig::default()).unwrap();
        assert!(!c.verified);
        assert!(c.failure.unwrap().starts_with("crossing"));
    }

    #[test]
    fn one_dimensional_threshold() {
        let cfg = HorseshoeConfig::default();
        assert!(certify_horseshoe_1d(2.5, &cfg).unwrap().verified);
        assert!(!certify_horseshoe_1d(1.9, &cfg).unwrap().verified);
        assert!(!certify_horseshoe_1d(2.0, &cfg).unwrap().verified);
    }

    #[test]
    fn zero_b_rejected() {
        assert!(certify_horseshoe(5.0, 0.0, &HorseshoeConfig::default()).is_err());
    }
}
