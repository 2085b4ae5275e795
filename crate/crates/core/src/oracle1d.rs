//! Potential theory of the quadratic family `f_a(x) = a − x²`.
//!
//! Everything here is either exact or carries a certified error bound, so
//! the module doubles as the reference against which the two-variable code
//! is checked.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Deadline;
use crate::dynamics::{escape_time_1d, QuadParam, C64};
use crate::error::{invalid, Result};
use crate::rng;

/// Default number of iterations before a point is assumed to lie in `K`.
pub const DEFAULT_DEPTH: u32 = 10_000;

/// A Green-function evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenValue {
    pub value: f64,
    pub error_bound: f64,
    /// First step at which escape was certified.
    pub escaped_at: Option<u32>,
    pub iterations_used: u32,
}

impl GreenValue {
    pub(crate) fn assumed_in_k(iterations: u32) -> Self {
        Self {
            value: 0.0,
            error_bound: 0.0,
            escaped_at: None,
            iterations_used: iterations,
        }
    }

    /// No escape was seen within the budget, so the value 0 is an assumption.
    pub fn assumed_in_k_flag(&self) -> bool {
        self.escaped_at.is_none()
    }
}

/// `−log(1 − t)` for `0 ≤ t < 1`.
pub(crate) fn neg_log1m(t: f64) -> f64 {
    -(-t).ln_1p()
}

/// Green function `G(z) = lim 2^{-n} log⁺|f^n(z)|`, within `tol`.
pub fn green_1d(param: &QuadParam, z: C64, tol: f64) -> Result<GreenValue> {
    green_1d_with_depth(param, z, tol, DEFAULT_DEPTH)
}

pub fn green_1d_with_depth(param: &QuadParam, z: C64, tol: f64, depth: u32) -> Result<GreenValue> {
    if !(tol >= 1e-14) {
        return Err(invalid("tol", "must be at least 1e-14"));
    }
    let Some((k, mut x)) = escape_time_1d(param, z, depth) else {
        return Ok(GreenValue::assumed_in_k(depth));
    };
    let a = param.a().norm();
    let mut n = k;
    loop {
        let m = x.norm();
        // log|f(w)| = 2 log|w| + log|1 − a/w²|; the tail past step n is at
        // most 2^{-n} · (−log(1 − |a|/|x_n|²)).
        let ratio = (a / m) / m;
        let scale = 0.5f64.powi(n as i32);
        let tail = scale * neg_log1m(ratio);
        if tail <= tol * 0.5 || !m.is_finite() || ratio == 0.0 {
            let value = scale * m.ln();
            let rounding = 4.0 * f64::EPSILON * value.abs();
            return Ok(GreenValue {
                value,
                error_bound: tail + rounding,
                escaped_at: Some(k),
                iterations_used: n,
            });
        }
        let next = param.apply(x);
        if !(next.re.is_finite() && next.im.is_finite()) {
            // |x|² overflows; the tail at the current step is already below
            // 2^{-n} · |a|/|x|² which is far under any admissible tolerance.
            let value = scale * m.ln();
            return Ok(GreenValue {
                value,
                error_bound: tail + 4.0 * f64::EPSILON * value.abs(),
                escaped_at: Some(k),
                iterations_used: n,
            });
        }
        x = next;
        n += 1;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Connectivity1D {
    /// The critical orbit stayed uncertified for `depth` steps.
    Connected {
        depth: u32,
    },
    Disconnected {
        escape_step: u32,
    },
    /// The computation was cut short by its budget.
    Undecided,
}

/// Fatou's criterion on the single critical point `0`.
pub fn connectivity_1d(param: &QuadParam, max_iter: u32) -> Result<Connectivity1D> {
    connectivity_1d_with_deadline(param, max_iter, Deadline::none())
}

pub fn connectivity_1d_with_deadline(param: &QuadParam, max_iter: u32, deadline: Deadline) -> Result<Connectivity1D> {
    if max_iter < 1 {
        return Err(invalid("max_iter", "must be at least 1"));
    }
    const CHUNK: u32 = 1 << 16;
    let radius = param.escape_radius();
    let mut x = C64::new(0.0, 0.0);
    let mut done = 0u32;
    while done < max_iter {
        if deadline.expired() {
            return Ok(Connectivity1D::Undecided);
        }
        let stop = max_iter.min(done.saturating_add(CHUNK));
        for k in done..stop {
            if x.norm() > radius {
                return Ok(Connectivity1D::Disconnected { escape_step: k });
            }
            x = param.apply(x);
        }
        done = stop;
    }
    if x.norm() > radius {
        return Ok(Connectivity1D::Disconnected { escape_step: max_iter });
    }
    Ok(Connectivity1D::Connected { depth: max_iter })
}

/// Empirical sample of the harmonic measure of `K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSample1D {
    pub points: Vec<C64>,
    pub seed: u64,
    pub depth: u32,
}

/// Random backward iteration from the base point `R₁ + 1`: each sample
/// takes `depth` inverse-branch steps `x ↦ ±√(a − x)` with fair signs.
pub fn brolin_sample(param: &QuadParam, n_points: usize, depth: u32, seed: u64) -> Result<MeasureSample1D> {
    if depth < 20 {
        return Err(invalid("depth", "must be at least 20"));
    }
    if n_points < 1 {
        return Err(invalid("n_points", "must be at least 1"));
    }
    let a = param.a();
    let base = C64::new(param.escape_radius() + 1.0, 0.0);
    let points = (0..n_points)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i as u64);
            let mut z = base;
            for _ in 0..depth {
                let w = (a - z).sqrt();
                z = if rng.random::<bool>() { w } else { -w };
            }
            z
        })
        .collect();
    Ok(MeasureSample1D { points, seed, depth })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentMethod {
    CriticalFormula,
    ErgodicAverage,
    /// Average of `(1/n) log |eigenvalue|` over saddle orbits.
    PeriodicOrbits,
}

/// Lyapunov exponent of the measure of maximal entropy, with its derived
/// entropy and dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub value: f64,
    pub method: ExponentMethod,
    pub stderr: f64,
    /// Sample points discarded at the log singularity (ergodic method only).
    pub rejected: usize,
}

impl ExponentEstimate {
    /// Entropy of the measure: `log 2`.
    pub fn entropy(&self) -> f64 {
        std::f64::consts::LN_2
    }

    /// `dim = h / λ`.
    pub fn dimension(&self) -> f64 {
        self.entropy() / self.value
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovBudget {
    pub tol: f64,
    pub n_points: usize,
    pub depth: u32,
    pub seed: u64,
}

impl Default for LyapunovBudget {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            n_points: 100_000,
            depth: 60,
            seed: 0,
        }
    }
}

/// Samples closer than this to the critical point are dropped by the ergodic method.
pub const SINGULARITY_GUARD: f64 = 1e-12;

pub fn lyapunov_1d(param: &QuadParam, method: ExponentMethod, budget: &LyapunovBudget) -> Result<ExponentEstimate> {
    match method {
        ExponentMethod::CriticalFormula => {
            let g = green_1d(param, C64::new(0.0, 0.0), budget.tol)?;
            Ok(ExponentEstimate {
                value: std::f64::consts::LN_2 + g.value,
                method,
                stderr: g.error_bound,
                rejected: 0,
            })
        }
        ExponentMethod::ErgodicAverage => {
            let sample = brolin_sample(param, budget.n_points, budget.depth, budget.seed)?;
            let logs: Vec<f64> = sample
                .points
                .iter()
                .filter(|x| x.norm() >= SINGULARITY_GUARD)
                .map(|x| (x.norm() * 2.0).ln())
                .collect();
            let rejected = sample.points.len() - logs.len();
            if logs.len() < 2 {
                return Err(invalid("n_points", "too few usable samples"));
            }
            let (mean, stderr) = mean_stderr(&logs);
            Ok(ExponentEstimate {
                value: mean,
                method,
                stderr,
                rejected,
            })
        }
        ExponentMethod::PeriodicOrbits => Err(invalid(
            "method",
            "periodic-orbit averages are computed by estimate_lambda",
        )),
    }
}

pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
