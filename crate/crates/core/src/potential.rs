//! Green functions `G±(p) = lim 2^{-n} log⁺‖f^{±n}(p)‖` of a Hénon map and
//! an empirical equilibrium measure built from saddle orbits.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::dynamics::{walk_to_escape, Direction, HenonParams, Point2};
use crate::error::{invalid, Result};
use crate::oracle1d::{neg_log1m, GreenValue};
use crate::saddles::{find_periodic, SearchBudget, SearchKind};

pub const DEFAULT_DEPTH: u32 = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn direction(self) -> Direction {
        match self {
            Sign::Plus => Direction::Forward,
            Sign::Minus => Direction::Backward,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenPairValue {
    pub plus: GreenValue,
    pub minus: GreenValue,
}

impl GreenPairValue {
    /// Neither orbit was seen to escape.
    pub fn in_k(&self) -> bool {
        self.plus.assumed_in_k_flag() && self.minus.assumed_in_k_flag()
    }
}

pub fn green_2d(params: &HenonParams, p: Point2, sign: Sign, tol: f64) -> Result<GreenValue> {
    green_2d_with_depth(params, p, sign, tol, DEFAULT_DEPTH)
}

pub fn green_pair(params: &HenonParams, p: Point2, tol: f64) -> Result<GreenPairValue> {
    Ok(GreenPairValue {
        plus: green_2d(params, p, Sign::Plus, tol)?,
        minus: green_2d(params, p, Sign::Minus, tol)?,
    })
}

/// `G±(p)` within `tol`, assuming `p ∈ K±` after `depth` uncertified steps.
///
/// Past certification the leading coordinate `u` dominates, and one step
/// multiplies it by `−u·(1 − δ)` (times `1/b` backwards) with
/// `|δ| ≤ (|a| + c·|u|)/|u|²`, `c = |b|` forwards and `1` backwards.
pub fn green_2d_with_depth(params: &HenonParams, p: Point2, sign: Sign, tol: f64, depth: u32) -> Result<GreenValue> {
    if !(tol >= 1e-12) {
        return Err(invalid("tol", "must be at least 1e-12"));
    }
    let dir = sign.direction();
    let Some((k, mut q)) = walk_to_escape(params, p, dir, depth) else {
        return Ok(GreenValue::assumed_in_k(depth));
    };
    let a = params.a().norm();
    let (c, shift) = match sign {
        Sign::Plus => (params.b().norm(), 0.0),
        Sign::Minus => (1.0, params.b().norm().ln()),
    };
    let lead = |q: &Point2| match sign {
        Sign::Plus => q.x.norm(),
        Sign::Minus => q.y.norm(),
    };
    let mut n = k;
    loop {
        let u = lead(&q);
        let scale = 0.5f64.powi(n as i32);
        let delta = (a + c * u) / u / u;
        let tail = scale * neg_log1m(delta.min(1.0));
        let next = params.step(q, dir);
        if tail <= 0.5 * tol || !u.is_finite() || !next.is_finite() {
            let value = (scale * (u.ln() - shift)).max(0.0);
            return Ok(GreenValue {
                value,
                error_bound: tail + 4.0 * f64::EPSILON * value.abs(),
                escaped_at: Some(k),
                iterations_used: n,
            });
        }
        q = next;
        n += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSample2D {
    pub points: Vec<Point2>,
    /// Minimal period of each point.
    pub source_periods: Vec<u32>,
    /// Periods at which fewer than `2^n` periodic points were found.
    pub undercount: Vec<u32>,
    pub seed: u64,
}

impl MeasureSample2D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Saddle points of exact period `n ∈ periods`, each orbit complete.
pub fn sample_mu(
    params: &HenonParams,
    periods: RangeInclusive<u32>,
    budget: &SearchBudget,
    seed: u64,
) -> Result<MeasureSample2D> {
    if *periods.start() < 1 || *periods.end() > crate::saddles::MAX_PERIOD || periods.is_empty() {
        return Err(invalid("period_range", "must be a nonempty subrange of 1..=12"));
    }
    let mut out = MeasureSample2D {
        points: Vec::new(),
        source_periods: Vec::new(),
        undercount: Vec::new(),
        seed,
    };
    for n in periods {
        let found = find_periodic(
            params,
            n,
            SearchKind::ComplexGrid,
            budget,
            crate::rng::split_seed(seed, n as u64),
        )?;
        if found.undercount {
            out.undercount.push(n);
        }
        for rec in found.exact_period().filter(|r| r.is_saddle()) {
            out.points.push(rec.location);
            out.source_periods.push(n);
        }
    }
    Ok(out)
}
