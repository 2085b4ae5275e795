//! Real Hénon maps: horseshoe certificates, periodic-point censuses, the
//! boundary of the horseshoe locus and tangencies found there.

mod boundary;
mod census;
mod certify;
pub mod interval;
mod tangency;
mod text;

pub use boundary::{boundary_scan, BoundaryScan, ScanConfig, ScanStep};
pub use census::{entropy_census, CensusRow, EntropyCensus, EntropyVerdict, CENSUS_MAX_N, REAL_TOL};
pub use certify::{
    certify_horseshoe, certify_horseshoe_1d, CertMode, ConeCheck, CrossingData, HorseshoeCertificate, HorseshoeConfig,
};
pub use interval::{Box2, Interval};
pub use tangency::{
    find_tangency, PairApproach, TangencyConfig, TangencyReport, LINEAR_TOL, QUADRATIC_MIN, RESIDUAL_RATIO_MAX,
};
pub use text::{certificate_from_text, certificate_to_text, hex_f64, parse_hex_f64, tangency_to_text};
