//! Real and complex periodic-point counts.
//!
//! A horseshoe has exactly `2^n` real points with `f^n(p) = p`, and these
//! are all the complex ones too. When the complex count is complete but
//! the real count falls short, some periodic point leaves `R²`, so the real
//! map cannot have maximal entropy.

use serde::{Deserialize, Serialize};

use crate::dynamics::HenonParams;
use crate::error::{invalid, Result};
use crate::rng::split_seed;
use crate::saddles::{find_periodic, SaddleRecord, SearchBudget, SearchKind, DEDUP_TOL};

/// Largest `n` accepted by [`entropy_census`].
pub const CENSUS_MAX_N: u32 = 10;
/// Imaginary parts below this count as real.
pub const REAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub n: u32,
    /// Distinct real points with `f^n(p) = p`.
    pub real: usize,
    /// Distinct complex points with `f^n(p) = p`.
    pub complex: usize,
    /// The complex search found fewer than `2^n` points.
    pub undercount: bool,
    /// `log(real) / n`, 0 when no real point was found.
    pub growth_rate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyVerdict {
    /// `real = complex = 2^n` for every computed `n`.
    Consistent,
    /// Some complete complex count has fewer real points.
    Inconsistent,
    /// Neither: some complex count is short and no row shows a real deficit.
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyCensus {
    pub a: f64,
    pub b: f64,
    pub rows: Vec<CensusRow>,
    pub verdict: EntropyVerdict,
    /// What the verdict does and does not establish.
    pub note: String,
}

impl EntropyCensus {
    /// The verdict restricted to `n ≤ n_max`.
    pub fn verdict_up_to(&self, n_max: u32) -> EntropyVerdict {
        verdict(self.rows.iter().filter(|r| r.n <= n_max))
    }
}

const NOTE: &str = "proxy: periodic points are dense in J, so a complete complex count with \
                    fewer real points shows J ⊄ R²; agreement up to the computed n is evidence, not proof";

fn verdict<'a>(rows: impl Iterator<Item = &'a CensusRow> + Clone) -> EntropyVerdict {
    let full = |r: &CensusRow| 1usize << r.n;
    if rows.clone().any(|r| !r.undercount && r.real < full(r)) {
        EntropyVerdict::Inconsistent
    } else if rows.clone().all(|r| r.real == full(r) && r.complex == full(r)) {
        EntropyVerdict::Consistent
    } else {
        EntropyVerdict::Undetermined
    }
}

/// Real points of the complex search merged with those of a real search.
fn real_points(complex: &[SaddleRecord], real: &[SaddleRecord]) -> usize {
    let mut pts: Vec<_> = complex
        .iter()
        .filter(|r| r.location.is_real(REAL_TOL))
        .map(|r| r.location)
        .collect();
    for r in real {
        if !pts.iter().any(|p| p.dist(&r.location) < DEDUP_TOL) {
            pts.push(r.location);
        }
    }
    pts.len()
}

/// Counts of real and complex points with `f^n(p) = p` for `n = 1..=n_max`.
pub fn entropy_census(a: f64, b: f64, n_max: u32) -> Result<EntropyCensus> {
    if !(1..=CENSUS_MAX_N).contains(&n_max) {
        return Err(invalid("n_max", format!("must lie in 1..={CENSUS_MAX_N}")));
    }
    let params = HenonParams::real(a, b)?;
    let budget = SearchBudget::default();
    let mut rows = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let seed = split_seed(0, n as u64);
        let c = find_periodic(&params, n, SearchKind::ComplexGrid, &budget, seed)?;
        let r = find_periodic(&params, n, SearchKind::RealGrid, &budget, seed)?;
        let real = real_points(&c.records, &r.records);
        rows.push(CensusRow {
            n,
            real,
            complex: c.records.len().max(real),
            undercount: c.undercount,
            growth_rate: if real > 0 { (real as f64).ln() / n as f64 } else { 0.0 },
        });
    }
    Ok(EntropyCensus {
        a,
        b,
        verdict: verdict(rows.iter()),
        rows,
        note: NOTE.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horseshoe_census_is_full() {
        let c = entropy_census(10.0, 0.3, 6).unwrap();
        for r in &c.rows {
            assert_eq!((r.real, r.complex), (1 << r.n, 1 << r.n), "n = {}", r.n);
        }
        assert_eq!(c.verdict, EntropyVerdict::Consistent);
        let g = c.rows[5].growth_rate;
        assert!((0.6..=std::f64::consts::LN_2 + 1e-12).contains(&g));
    }

    #[test]
    fn attracting_regime_is_inconsistent() {
        let c = entropy_census(1.0, 0.3, 4).unwrap();
        assert!(c.rows.iter().any(|r| r.complex > r.real));
        assert_eq!(c.verdict, EntropyVerdict::Inconsistent);
    }

    #[test]
    fn n_max_guard() {
        assert!(entropy_census(10.0, 0.3, 11).is_err());
        assert!(entropy_census(10.0, 0.3, 0).is_err());
    }
}
