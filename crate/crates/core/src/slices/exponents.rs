use serde::{Deserialize, Serialize};

use crate::dynamics::HenonParams;
use crate::error::{invalid, Result};
use crate::oracle1d::{mean_stderr, ExponentEstimate, ExponentMethod};
use crate::potential::MeasureSample2D;
use crate::saddles::{eigenpair, orbit_differential};

/// Both Lyapunov exponents of the saddle-orbit measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovPair {
    pub plus: ExponentEstimate,
    pub minus: ExponentEstimate,
    pub orbits: usize,
}

/// `λ⁺` and `λ⁻` as averages of `(1/n) log|λ_u|` and `(1/n) log|λ_s|` over
/// the sample, recomputing the eigenvalues along each orbit.
///
/// Orbits are stored contiguously in the sample; the standard error uses
/// the spread between orbits.
pub fn estimate_lambda(params: &HenonParams, sample: &MeasureSample2D) -> Result<LyapunovPair> {
    if sample.is_empty() {
        return Err(invalid("sample", "must be nonempty"));
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut weights = Vec::new();
    let mut start = 0;
    while start < sample.points.len() {
        let n = sample.source_periods[start] as usize;
        let end = (start + n).min(sample.points.len());
        let orbit = &sample.points[start..end];
        let m = orbit_differential(params, orbit, 0);
        let det = params.b().powu(orbit.len() as u32);
        let (lu, ls) = eigenpair(&m, det);
        let k = orbit.len() as f64;
        plus.push(lu.norm().ln() / k);
        minus.push(ls.norm().ln() / k);
        weights.push(orbit.len());
        start = end;
    }
    let orbits = plus.len();
    let estimate = |vals: &[f64]| {
        // each orbit point carries equal weight
        let total: usize = weights.iter().sum();
        let mean = vals.iter().zip(&weights).map(|(v, &w)| v * w as f64).sum::<f64>() / total as f64;
        let (_, stderr) = mean_stderr(vals);
        ExponentEstimate {
            value: mean,
            method: ExponentMethod::PeriodicOrbits,
            stderr,
            rejected: 0,
        }
    };
    Ok(LyapunovPair {
        plus: estimate(&plus),
        minus: estimate(&minus),
        orbits,
    })
}
