use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::critical::{find_unstable_critical_points, CriticalConfig};
use super::exponents::estimate_lambda;
use super::{check_grid, default_linearization, Provenance, SliceImage, Window};
use crate::dynamics::{HenonParams, C64};
use crate::error::{invalid, Error, Result};
use crate::horseshoe::{certify_horseshoe, HorseshoeConfig};
use crate::potential::sample_mu;
use crate::saddles::SearchBudget;

/// A rectangle of parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ParamRegion {
    /// Real `a ∈ [a0, a1]` horizontally, real `b ∈ [b0, b1]` vertically.
    #[serde(rename = "ab")]
    AB { a0: f64, a1: f64, b0: f64, b1: f64 },
    /// Complex `a` in `window`, `b` fixed.
    ComplexA { b: C64, window: Window },
}

impl ParamRegion {
    fn window(&self) -> Result<Window> {
        match *self {
            ParamRegion::AB { a0, a1, b0, b1 } => Window::new(a0, b0, a1, b1),
            ParamRegion::ComplexA { b, window } => {
                if b.norm() == 0.0 {
                    return Err(invalid("b", "must be nonzero"));
                }
                Ok(window)
            }
        }
    }

    /// Parameters at a point of the region's window.
    fn params_at(&self, w: C64) -> Result<HenonParams> {
        match *self {
            ParamRegion::AB { .. } => HenonParams::real(w.re, w.im),
            ParamRegion::ComplexA { b, .. } => HenonParams::new(w, b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Probe {
    /// Critical points of `G⁺` on the default saddle's unstable manifold.
    Connectivity,
    /// Interval-arithmetic horseshoe certificate (real parameters only).
    Horseshoe,
    /// Excess of the saddle-orbit `λ⁺` over `log 2`.
    EscapeOfMeasure,
}

/// Per-cell verdict stored in the status byte of a parameter image.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
#[serde(rename_all = "snake_case")]
pub enum ProbeOutcome {
    /// Disconnected, or no certificate.
    Negative = 0,
    /// Connected at resolution, or certified horseshoe.
    Positive = 1,
    Undecided = 2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeBudget {
    /// Side of the `z`-grid searched for critical points.
    pub grid: u32,
    pub depth: u32,
    /// Half-width of the `z`-window around the saddle.
    pub window_radius: f64,
    pub green_min: f64,
    /// Largest period sampled by the measure probe.
    pub max_period: u32,
    /// Upper bound on the estimated number of map evaluations.
    pub cost_cap: f64,
}

impl Default for ProbeBudget {
    fn default() -> Self {
        Self {
            grid: 64,
            depth: 200,
            window_radius: 3.0,
            green_min: 1e-7,
            max_period: 6,
            cost_cap: 5e11,
        }
    }
}

/// λ⁺ − log 2 above this is disconnected, below `CONNECTED_EXCESS` connected.
const DISCONNECTED_EXCESS: f64 = 0.05;
const CONNECTED_EXCESS: f64 = 0.01;

fn cell_cost(probe: Probe, budget: &ProbeBudget) -> f64 {
    match probe {
        Probe::Connectivity => (budget.grid as f64).powi(2) * budget.depth as f64,
        Probe::Horseshoe => 2e6,
        Probe::EscapeOfMeasure => {
            2f64.powi(budget.max_period as i32 + 1) * 20.0 * 60.0 * budget.max_period.pow(3) as f64
        }
    }
}

/// Runs a cheap verdict at every cell of a parameter region.
pub fn render_parameter_plane(
    region: ParamRegion,
    probe: Probe,
    width: u32,
    height: u32,
    budget: &ProbeBudget,
) -> Result<SliceImage> {
    check_grid(width, height, budget.depth)?;
    let window = region.window()?;
    if probe == Probe::Connectivity && budget.grid < 3 {
        return Err(invalid("grid", "need at least 3 cells per side"));
    }
    if !(1..=crate::saddles::MAX_PERIOD).contains(&budget.max_period) {
        return Err(invalid("max_period", "must lie in 1..=12"));
    }
    let cost = cell_cost(probe, budget) * width as f64 * height as f64;
    if cost > budget.cost_cap {
        return Err(Error::Resource(format!(
            "estimated cost {cost:.2e} exceeds the cap {:.2e}",
            budget.cost_cap
        )));
    }
    let cells: Vec<(f32, u8)> = (0..width * height)
        .into_par_iter()
        .map(|k| {
            let w = window.cell_center(k % width, k / width, width, height);
            match region.params_at(w) {
                Ok(p) => run_probe(&p, probe, budget),
                Err(_) => (0.0, ProbeOutcome::Undecided),
            }
        })
        .map(|(r, o)| (r, o as u8))
        .collect();
    let (rate, status) = cells.into_iter().unzip();
    Ok(SliceImage {
        width,
        height,
        window,
        rate,
        status,
        provenance: Provenance::Parameter {
            region,
            probe,
            budget: *budget,
        },
    })
}

/// One probe at one parameter; failures inside the probe are `Undecided`.
pub(crate) fn run_probe(params: &HenonParams, probe: Probe, budget: &ProbeBudget) -> (f32, ProbeOutcome) {
    match probe {
        Probe::Connectivity => {
            let Ok(lin) = default_linearization(params) else {
                return (0.0, ProbeOutcome::Undecided);
            };
            let Ok(window) = Window::centered(C64::new(0.0, 0.0), budget.window_radius) else {
                return (0.0, ProbeOutcome::Undecided);
            };
            let cfg = CriticalConfig {
                green_min: budget.green_min,
                ..CriticalConfig::default()
            };
            match find_unstable_critical_points(&lin, window, budget.grid, budget.depth, &cfg) {
                Ok(pts) if pts.is_empty() => (0.0, ProbeOutcome::Positive),
                Ok(pts) => match pts
                    .iter()
                    .filter(|p| p.certified)
                    .map(|p| p.green_value)
                    .reduce(f64::max)
                {
                    Some(g) => (g as f32, ProbeOutcome::Negative),
                    None => (0.0, ProbeOutcome::Undecided),
                },
                Err(_) => (0.0, ProbeOutcome::Undecided),
            }
        }
        Probe::Horseshoe => {
            if !params.is_real() {
                return (0.0, ProbeOutcome::Undecided);
            }
            match certify_horseshoe(params.a().re, params.b().re, &HorseshoeConfig::fast()) {
                Ok(c) if c.verified => (c.expansion as f32, ProbeOutcome::Positive),
                Ok(_) => (0.0, ProbeOutcome::Negative),
                Err(_) => (0.0, ProbeOutcome::Undecided),
            }
        }
        Probe::EscapeOfMeasure => {
            let sample = sample_mu(params, 1..=budget.max_period, &SearchBudget::default(), 0);
            match sample.and_then(|s| estimate_lambda(params, &s)) {
                Ok(l) => {
                    let excess = l.plus.value - std::f64::consts::LN_2;
                    let outcome = if excess > DISCONNECTED_EXCESS {
                        ProbeOutcome::Negative
                    } else if excess < CONNECTED_EXCESS {
                        ProbeOutcome::Positive
                    } else {
                        ProbeOutcome::Undecided
                    };
                    (excess as f32, outcome)
                }
                Err(_) => (0.0, ProbeOutcome::Undecided),
            }
        }
    }
}
