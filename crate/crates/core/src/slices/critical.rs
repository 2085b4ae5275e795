use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_grid, green_jet, ConnectivityVerdict, Evidence, Verdict, Window};
use crate::dynamics::C64;
use crate::error::{invalid, Result};
use crate::saddles::Linearization;

/// Critical point of `G⁺` restricted to the unstable manifold, in the
/// linearizing coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointRecord {
    pub z: C64,
    pub green_value: f64,
    pub gradient_norm: f64,
    /// Inside the search window and with `g` above the green threshold.
    pub certified: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalConfig {
    pub gradient_tol: f64,
    pub green_min: f64,
    pub newton_steps: u32,
}

impl Default for CriticalConfig {
    fn default() -> Self {
        Self {
            gradient_tol: 1e-6,
            green_min: 1e-4,
            newton_steps: 40,
        }
    }
}

/// Local minima of `|∇g|` on a `resolution²` grid, refined by Newton's
/// method on the holomorphic derivative `q` (`|∇g| = |q|`).
pub fn find_unstable_critical_points(
    lin: &Linearization,
    window: Window,
    resolution: u32,
    depth: u32,
    cfg: &CriticalConfig,
) -> Result<Vec<CriticalPointRecord>> {
    check_grid(resolution, resolution, depth)?;
    if resolution < 3 {
        return Err(invalid("resolution", "need at least 3 cells per side"));
    }
    if !(cfg.gradient_tol > 0.0 && cfg.green_min >= 0.0) {
        return Err(invalid("critical", "thresholds must be positive"));
    }
    let n = resolution;
    let grid: Vec<Option<(f64, f64)>> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let z = window.cell_center(k % n, k / n, n, n);
            green_jet(lin, z, depth).map(|j| (j.g, j.q.norm()))
        })
        .collect();

    let at = |i: u32, j: u32| grid[(j * n + i) as usize];
    let mut seeds = Vec::new();
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let Some((g, s)) = at(i, j) else { continue };
            if g <= cfg.green_min {
                continue;
            }
            let is_min = (-1i64..=1).all(|dj| {
                (-1i64..=1).all(|di| {
                    (di == 0 && dj == 0)
                        || at((i as i64 + di) as u32, (j as i64 + dj) as u32).is_some_and(|(_, t)| s <= t)
                })
            });
            if is_min {
                seeds.push(window.cell_center(i, j, n, n));
            }
        }
    }

    let cell = window.cell_size(n, n);
    let refined: Vec<CriticalPointRecord> = seeds
        .par_iter()
        .filter_map(|&z0| refine(lin, z0, depth, cfg, window, cell))
        .collect();

    let mut out: Vec<CriticalPointRecord> = Vec::new();
    for r in refined {
        if !out.iter().any(|o| (o.z - r.z).norm() < 0.5 * cell) {
            out.push(r);
        }
    }
    out.sort_by(|u, v| u.z.re.total_cmp(&v.z.re).then(u.z.im.total_cmp(&v.z.im)));
    Ok(out)
}

fn refine(
    lin: &Linearization,
    z0: C64,
    depth: u32,
    cfg: &CriticalConfig,
    window: Window,
    cell: f64,
) -> Option<CriticalPointRecord> {
    let mut z = z0;
    let mut jet = green_jet(lin, z, depth)?;
    for _ in 0..cfg.newton_steps {
        if jet.q.norm() < 1e-3 * cfg.gradient_tol || jet.dq.norm() == 0.0 {
            break;
        }
        let step = jet.q / jet.dq;
        // a Newton step longer than a few cells has left the basin of the seed
        if step.norm() > 4.0 * cell {
            return None;
        }
        z -= step;
        jet = green_jet(lin, z, depth)?;
    }
    if !(jet.q.norm() < cfg.gradient_tol) || !(jet.g > 0.0) {
        return None;
    }
    let margin = cell;
    let interior = z.re > window.x0 + margin
        && z.re < window.x1 - margin
        && z.im > window.y0 + margin
        && z.im < window.y1 - margin;
    Some(CriticalPointRecord {
        z,
        green_value: jet.g,
        gradient_norm: jet.q.norm(),
        certified: interior && jet.g > cfg.green_min,
    })
}

pub(crate) fn verdict_from_points(
    points: &[CriticalPointRecord],
    window: Window,
    resolution: u32,
    depth: u32,
) -> ConnectivityVerdict {
    let certified = points.iter().find(|p| p.certified);
    let (verdict, evidence) = match certified {
        Some(p) => (Verdict::UnstablyDisconnected, Some(Evidence::CriticalPoint(*p))),
        None if points.is_empty() => (Verdict::UnstablyConnectedAtResolution, None),
        None => (Verdict::Undecided, None),
    };
    ConnectivityVerdict {
        verdict,
        evidence,
        method: "critical_points".into(),
        window,
        width: resolution,
        height: resolution,
        depth,
    }
}
