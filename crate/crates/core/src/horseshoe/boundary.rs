//! Bisection for the boundary of the horseshoe locus along a line of
//! constant `b`.
//!
//! Above the boundary a certificate verifies. Below it the census finds a
//! complete complex count with missing real points. Parameters where
//! neither fires split the search into two independent bisections, one
//! per predicate.

use serde::{Deserialize, Serialize};

use super::census::{entropy_census, CensusRow, EntropyVerdict};
use super::certify::{certify_horseshoe, HorseshoeConfig};
use super::tangency::{find_tangency, TangencyConfig, TangencyReport};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Census periods `1..=n` for the lower predicate.
    pub n: u32,
    /// Stop once each open sub-bracket is narrower than this.
    pub tol: f64,
    /// Predicate evaluations allowed after the endpoint checks.
    pub max_evaluations: u32,
    pub horseshoe: HorseshoeConfig,
    /// `None` skips the tangency search.
    pub tangency: Option<TangencyConfig>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            n: 6,
            tol: 1e-3,
            max_evaluations: 60,
            horseshoe: HorseshoeConfig::default(),
            tangency: Some(TangencyConfig::default()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanStep {
    pub a: f64,
    pub certified: bool,
    pub census: EntropyVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryScan {
    pub b: f64,
    /// Largest `a` seen with an inconsistent census.
    pub a_lo: f64,
    /// Smallest `a` seen with a verified certificate.
    pub a_hi: f64,
    /// Points strictly inside `(a_lo, a_hi)` where neither predicate fired.
    pub gap: Option<[f64; 2]>,
    pub steps: Vec<ScanStep>,
    /// Census at the bracket midpoint; real counts below `2^n` there are
    /// reported, not judged.
    pub midpoint_census: Vec<CensusRow>,
    pub tangency: Option<TangencyReport>,
    /// Why the tangency search produced nothing, if it did not.
    pub tangency_error: Option<String>,
}

impl BoundaryScan {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a_lo + self.a_hi)
    }
}

struct Predicates<'a> {
    b: f64,
    cfg: &'a ScanConfig,
    steps: Vec<ScanStep>,
}

impl Predicates<'_> {
    /// `(certified, census inconsistent)`; both at once aborts the scan.
    fn eval(&mut self, a: f64) -> Result<(bool, bool)> {
        let cert = certify_horseshoe(a, self.b, &self.cfg.horseshoe)?.verified;
        let census = entropy_census(a, self.b, self.cfg.n)?.verdict;
        self.steps.push(ScanStep {
            a,
            certified: cert,
            census,
        });
        let low = census == EntropyVerdict::Inconsistent;
        if cert && low {
            return Err(Error::Inconsistent(format!(
                "at a = {a}, b = {} the certificate verifies but the census up to n = {} is inconsistent",
                self.b, self.cfg.n
            )));
        }
        Ok((cert, low))
    }
}

/// Brackets the horseshoe-locus boundary on `a_bracket` at fixed `b` and
/// looks for the tangency at the upper end.
pub fn boundary_scan(b: f64, a_bracket: (f64, f64), cfg: &ScanConfig) -> Result<BoundaryScan> {
    let (mut lo, mut hi) = a_bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid("a_bracket", "need finite a_lo < a_hi"));
    }
    if !(cfg.tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let mut pr = Predicates {
        b,
        cfg,
        steps: Vec::new(),
    };
    if !pr.eval(hi)?.0 {
        return Err(invalid(
            "a_bracket",
            format!("no certificate at the upper end a = {hi}"),
        ));
    }
    if !pr.eval(lo)?.1 {
        return Err(invalid(
            "a_bracket",
            format!("census is not inconsistent at the lower end a = {lo}"),
        ));
    }

    // invariant: lo < gap_lo ≤ gap_hi < hi, neither predicate fires on the gap ends
    let mut gap: Option<(f64, f64)> = None;
    for _ in 0..cfg.max_evaluations {
        let m = match gap {
            None if hi - lo > cfg.tol => 0.5 * (lo + hi),
            Some((g0, g1)) if g0 - lo > cfg.tol && g0 - lo >= hi - g1 => 0.5 * (lo + g0),
            Some((_, g1)) if hi - g1 > cfg.tol => 0.5 * (g1 + hi),
            _ => break,
        };
        let (cert, low) = pr.eval(m)?;
        if cert {
            hi = m;
            gap = gap.filter(|&(_, g1)| g1 < m).map(|(g0, g1)| (g0, g1.min(m)));
        } else if low {
            lo = m;
            gap = gap.filter(|&(g0, _)| g0 > m);
        } else {
            gap = Some(gap.map_or((m, m), |(g0, g1)| (g0.min(m), g1.max(m))));
        }
    }

    let mid = 0.5 * (lo + hi);
    let midpoint_census = entropy_census(mid, b, cfg.n)?.rows;
    let (tangency, tangency_error) = match &cfg.tangency {
        None => (None, None),
        Some(t) => match find_tangency(hi, b, t) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        },
    };
    Ok(BoundaryScan {
        b,
        a_lo: lo,
        a_hi: hi,
        gap: gap.map(|(g0, g1)| [g0, g1]),
        steps: pr.steps,
        midpoint_census,
        tangency,
        tangency_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ScanConfig {
        ScanConfig {
            n: 4,
            tol: 0.05,
            horseshoe: HorseshoeConfig::fast(),
            tangency: None,
            ..ScanConfig::default()
        }
    }

    #[test]
    fn bracket_keeps_its_predicates() {
        let s = boundary_scan(0.1, (1.0, 8.0), &quick()).unwrap();
        assert!(s.a_lo < s.a_hi);
        let at = |a: f64| s.steps.iter().find(|st| st.a == a).unwrap();
        assert!(at(s.a_hi).certified);
        assert_eq!(at(s.a_lo).census, EntropyVerdict::Inconsistent);
    }

    #[test]
    fn bad_bracket_rejected() {
        assert!(boundary_scan(0.1, (8.0, 1.0), &quick()).is_err());
        assert!(boundary_scan(0.1, (1.0, 1.5), &quick()).is_err());
    }
}
