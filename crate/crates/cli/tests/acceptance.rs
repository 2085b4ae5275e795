//! Acceptance suite: one PASS/FAIL line per criterion, each judged at its
//! stated tolerance and runtime limit. Runs without the libtest harness so
//! the lines appear in the test log.

use std::f64::consts::{LN_2, PI};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use henonlab::degree::{dynamical_degree, CoefficientMode, MapWord};
use henonlab::horseshoe::{
    boundary_scan, certify_horseshoe, certify_horseshoe_1d, entropy_census, EntropyVerdict, HorseshoeConfig, ScanConfig,
};
use henonlab::oracle1d::{
    brolin_sample, connectivity_1d, green_1d, lyapunov_1d, Connectivity1D, ExponentMethod, LyapunovBudget,
};
use henonlab::potential::sample_mu;
use henonlab::rng::split_seed;
use henonlab::saddles::{find_periodic, SearchBudget, SearchKind};
use henonlab::slices::{
    connectivity, default_linearization, estimate_lambda, find_unstable_critical_points, ConnectivityConfig,
    CriticalConfig, Verdict,
};
use henonlab::{HenonParams, Point2, QuadParam, C64};

type Check = Result<String, String>;

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Check,
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn judge(ok: bool, measured: String) -> Check {
    if ok {
        Ok(measured)
    } else {
        Err(measured)
    }
}

fn henon(a: f64, b: f64) -> HenonParams {
    HenonParams::real(a, b).expect("valid parameters")
}

fn arcsine_ks(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let cdf = |x: f64| 0.5 + (x / 2.0).clamp(-1.0, 1.0).asin() / PI;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

fn one_dimensional_anchors() -> Check {
    let q = QuadParam::real(2.0).map_err(|e| e.to_string())?;
    let g = green_1d(&q, C64::new(0.0, 0.0), 1e-12)
        .map_err(|e| e.to_string())?
        .value;
    let lam = lyapunov_1d(&q, ExponentMethod::CriticalFormula, &LyapunovBudget::default())
        .map_err(|e| e.to_string())?
        .value;
    let sample = brolin_sample(&q, 10_000, 60, 0).map_err(|e| e.to_string())?;
    let mut xs: Vec<f64> = sample.points.iter().map(|z| z.re).collect();
    let ks = arcsine_ks(&mut xs);
    judge(
        g.abs() <= 1e-9 && (lam - LN_2).abs() <= 1e-6 && ks < 0.02,
        format!(
            "G(0) = {g:e} (tol 1e-9); |λ − ln 2| = {:e} (tol 1e-6); KS = {ks:.4} (tol 0.02)",
            (lam - LN_2).abs()
        ),
    )
}

/// Bounded iff the critical orbit stays finite and below `1e10` for 10⁶ steps.
fn brute_force_bounded(a: f64) -> bool {
    let mut x = 0.0f64;
    for _ in 0..1_000_000 {
        x = a - x * x;
        if x.is_nan() || x.abs() >= 1e10 {
            return false;
        }
    }
    true
}

fn one_dimensional_cross_method() -> Check {
    let mut worst: f64 = 0.0;
    let mut mismatches = Vec::new();
    for k in 0..20 {
        let a = -2.0 + 6.0 * k as f64 / 19.0;
        let q = QuadParam::real(a).map_err(|e| e.to_string())?;
        let budget = LyapunovBudget::default();
        let f = lyapunov_1d(&q, ExponentMethod::CriticalFormula, &budget).map_err(|e| e.to_string())?;
        let e = lyapunov_1d(&q, ExponentMethod::ErgodicAverage, &budget).map_err(|e| e.to_string())?;
        let sigma = f.stderr.hypot(e.stderr);
        worst = worst.max((f.value - e.value).abs() / sigma);
        let connected = matches!(connectivity_1d(&q, 1_000_000), Ok(Connectivity1D::Connected { .. }));
        if connected != brute_force_bounded(a) {
            mismatches.push(a);
        }
    }
    judge(
        worst <= 3.0 && mismatches.is_empty(),
        format!("max |λ_f − λ_e|/stderr = {worst:.3} (tol 3); connectivity mismatches at {mismatches:?}"),
    )
}

fn degree_growth() -> Check {
    let r = dynamical_degree(&MapWord::henon(henon(6.0, 0.3)), 5, CoefficientMode::Auto).map_err(|e| e.to_string())?;
    judge(
        r.sequence == [2, 4, 8, 16, 32] && (r.estimate - 2.0).abs() < 1e-12,
        format!("sequence {:?}, degree estimate {}", r.sequence, r.estimate),
    )
}

fn saddle_census() -> Check {
    let (a, b) = (6.0, 0.3);
    let p = henon(a, b);
    let mut rows = Vec::new();
    let mut ok = true;
    let mut fixed_err: f64 = 0.0;
    for n in 1..=6u32 {
        let s = find_periodic(
            &p,
            n,
            SearchKind::ComplexGrid,
            &SearchBudget::default(),
            split_seed(0, n as u64),
        )
        .map_err(|e| e.to_string())?;
        let real = s.records.iter().filter(|r| r.is_real(1e-8)).count();
        let saddles = s.saddles().count();
        ok &= s.records.len() == 1 << n && real == 1 << n && saddles == 1 << n;
        rows.push(format!("n={n}: {}/{}/{}", s.records.len(), real, saddles));
        if n == 1 {
            let disc = ((1.0 + b) * (1.0f64 + b) + 4.0 * a).sqrt();
            let roots = [(-(1.0 + b) + disc) / 2.0, (-(1.0 + b) - disc) / 2.0];
            for r in &s.records {
                let d = roots
                    .iter()
                    .map(|&x| r.location.dist(&Point2::real(x, x)))
                    .fold(f64::INFINITY, f64::min);
                fixed_err = fixed_err.max(d);
            }
        }
    }
    judge(
        ok && fixed_err <= 1e-10,
        format!(
            "count/real/saddle {}; fixed-point error {fixed_err:e} (tol 1e-10)",
            rows.join(", ")
        ),
    )
}

fn henon_step(a: f64, b: f64, p: Point2) -> Point2 {
    Point2::new(a - b * p.y - p.x * p.x, p.x)
}

fn linearization_defect() -> Check {
    let (a, b) = (6.0, 0.3);
    let lin = default_linearization(&henon(a, b)).map_err(|e| e.to_string())?;
    let lambda = lin.lambda();
    let mut sup: f64 = 0.0;
    for k in 0..3600 {
        let z = C64::from_polar(1.0, 2.0 * PI * k as f64 / 3600.0);
        let mut q = lin.eval(z);
        for _ in 0..lin.period() {
            q = henon_step(a, b, q);
        }
        sup = sup.max(q.dist(&lin.eval(lambda * z)));
    }
    judge(sup < 1e-8, format!("sup defect {sup:e} (tol 1e-8)"))
}

fn exponent_identities() -> Check {
    let p = henon(6.0, 0.3);
    let sample = sample_mu(&p, 1..=6, &SearchBudget::default(), 0).map_err(|e| e.to_string())?;
    let pair = estimate_lambda(&p, &sample).map_err(|e| e.to_string())?;
    let sum = pair.plus.value + pair.minus.value;
    let lin = default_linearization(&p).map_err(|e| e.to_string())?;
    let cfg = ConnectivityConfig::default();
    let crit = find_unstable_critical_points(
        &lin,
        cfg.window,
        cfg.resolution,
        cfg.render.depth,
        &CriticalConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let certified = crit.iter().filter(|c| c.certified).count();
    judge(
        (sum - 0.3f64.ln()).abs() <= 0.02 && pair.plus.value > LN_2 + 0.1 && certified > 0,
        format!(
            "|λ⁺ + λ⁻ − log 0.3| = {:.2e} (tol 0.02); λ⁺ − log 2 = {:.4} (need > 0.1); certified critical points {certified}",
            (sum - 0.3f64.ln()).abs(),
            pair.plus.value - LN_2
        ),
    )
}

fn connectivity_agreement() -> Check {
    let battery: [(C64, f64, Option<Verdict>); 10] = [
        (C64::new(6.0, 0.0), 0.3, Some(Verdict::UnstablyDisconnected)),
        (C64::new(0.1, 0.0), 0.1, Some(Verdict::UnstablyConnectedAtResolution)),
        (C64::new(0.3, 0.0), 0.1, None),
        (C64::new(0.0, 0.0), 0.2, None),
        (C64::new(0.5, 0.0), -0.1, None),
        (C64::new(0.2, 0.2), 0.05, None),
        (C64::new(10.0, 0.0), 0.3, None),
        (C64::new(5.0, 0.0), -0.3, None),
        (C64::new(4.0, 0.0), 0.1, None),
        (C64::new(3.0, 0.0), 0.05, None),
    ];
    let mut bad = Vec::new();
    for (a, b, want) in battery {
        let p = HenonParams::new(a, C64::new(b, 0.0)).map_err(|e| e.to_string())?;
        let r = connectivity(&p, &ConnectivityConfig::default()).map_err(|e| e.to_string())?;
        let opposite = r.components.verdict != Verdict::Undecided
            && r.critical.verdict != Verdict::Undecided
            && r.components.verdict != r.critical.verdict;
        if opposite || want.is_some_and(|w| w != r.verdict) {
            bad.push(format!(
                "({a}, {b}): {:?} vs {:?}",
                r.components.verdict, r.critical.verdict
            ));
        }
    }
    judge(bad.is_empty(), format!("10 parameters, inconsistent: {bad:?}"))
}

fn horseshoe_machinery() -> Check {
    let cfg = HorseshoeConfig::default();
    let hi = certify_horseshoe(10.0, 0.3, &cfg).map_err(|e| e.to_string())?.verified;
    let lo_cert = certify_horseshoe(1.0, 0.3, &cfg).map_err(|e| e.to_string())?.verified;
    let lo_census = entropy_census(1.0, 0.3, 6).map_err(|e| e.to_string())?.verdict;
    let (mut lo, mut up) = (1.5, 2.5);
    let verified = |a: f64| certify_horseshoe_1d(a, &cfg).map(|c| c.verified);
    if verified(lo).map_err(|e| e.to_string())? || !verified(up).map_err(|e| e.to_string())? {
        return Err("1D certificate does not bracket the boundary on [1.5, 2.5]".into());
    }
    while up - lo > 1e-4 {
        let m = 0.5 * (lo + up);
        if verified(m).map_err(|e| e.to_string())? {
            up = m;
        } else {
            lo = m;
        }
    }
    let boundary = 0.5 * (lo + up);
    judge(
        hi && !lo_cert && lo_census == EntropyVerdict::Inconsistent && (boundary - 2.0).abs() <= 0.05,
        format!(
            "a=10: verified {hi}; a=1: verified {lo_cert}, census {lo_census:?}; 1D boundary {boundary:.5} (tol 0.05 of 2)"
        ),
    )
}

fn boundary_scans() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for b in [0.01, -0.01] {
        let s = boundary_scan(b, (1.5, 4.0), &ScanConfig::default()).map_err(|e| e.to_string())?;
        let mid = s.midpoint();
        let t = s
            .tangency
            .as_ref()
            .ok_or_else(|| format!("b = {b}: no tangency: {:?}", s.tangency_error))?;
        let structure = if b > 0.0 { t.p == t.q } else { t.p != t.q };
        ok &= (mid - 2.0).abs() <= 0.2 && t.quadratic_dominant() && structure;
        parts.push(format!(
            "b={b}: bracket [{:.4}, {:.4}] midpoint {mid:.4}, fit c2 = {:.3} c1 = {:.1e} quadratic {} fixed points ({}, {})",
            s.a_lo,
            s.a_hi,
            t.coefficients[2],
            t.coefficients[1],
            t.quadratic_dominant(),
            t.p,
            t.q
        ));
    }
    judge(ok, parts.join("; "))
}

const CLI_RUNS: &[&[&str]] = &[
    &["green", "--a", "2", "--x", "0.5"],
    &["green", "--a", "6", "--b", "0.3", "--x", "1", "--y", "1"],
    &["connectivity-1d", "--a", "0.1"],
    &[
        "lyapunov-1d",
        "--a",
        "2",
        "--method",
        "ergodic-average",
        "--n-points",
        "20000",
    ],
    &["saddles", "--a", "6", "--b", "0.3", "--n", "4"],
    &[
        "render-slice",
        "--a",
        "6",
        "--b",
        "0.3",
        "--res",
        "512",
        "--depth",
        "200",
        "--out",
        "s.hslc",
    ],
    &[
        "render-slice",
        "--a",
        "6",
        "--b",
        "0.3",
        "--res",
        "128",
        "--out",
        "s.png",
    ],
    &["connectivity-2d", "--a", "6", "--b", "0.3", "--res", "128"],
    &[
        "render-param",
        "--probe",
        "horseshoe",
        "--ab",
        "1",
        "10",
        "-0.3",
        "0.3",
        "--res",
        "12",
    ],
    &["lambda", "--a", "6", "--b", "0.3", "--max-period", "5"],
    &["horseshoe-certify", "--a", "10", "--b", "0.3"],
    &["census", "--a", "6", "--b", "0.3", "--n", "5"],
    &["boundary-scan", "--b", "0.01", "--bracket", "1.5", "4.0"],
];

fn cli_artifact(dir: &Path, args: &[&str], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_henonlab"))
        .args(args)
        .current_dir(dir)
        .env("HENONLAB_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} exited {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let files: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    let artifact = files
        .iter()
        .find(|p| !p.to_string_lossy().ends_with(".manifest.json"))
        .ok_or("no artifact written")?;
    if files.len() != 2 {
        return Err(format!(
            "{args:?} wrote {} files, expected artifact and manifest",
            files.len()
        ));
    }
    std::fs::read(artifact).map_err(|e| e.to_string())
}

fn cli_determinism() -> Check {
    let mut differing = Vec::new();
    for (k, args) in CLI_RUNS.iter().enumerate() {
        let d1 = tempfile::tempdir().map_err(|e| e.to_string())?;
        let d2 = tempfile::tempdir().map_err(|e| e.to_string())?;
        let first = cli_artifact(d1.path(), args, "4")?;
        let second = cli_artifact(d2.path(), args, "1")?;
        if first != second {
            differing.push(k);
        }
    }
    judge(
        differing.is_empty(),
        format!(
            "{} commands run twice (4 threads, then 1), differing: {differing:?}",
            CLI_RUNS.len()
        ),
    )
}

fn main() {
    let criteria = [
        Criterion {
            name: "1D exact anchors",
            limit: secs(10),
            run: one_dimensional_anchors,
        },
        Criterion {
            name: "1D cross-method",
            limit: secs(120),
            run: one_dimensional_cross_method,
        },
        Criterion {
            name: "degree growth",
            limit: secs(5),
            run: degree_growth,
        },
        Criterion {
            name: "saddle census at a=6, b=0.3",
            limit: secs(120),
            run: saddle_census,
        },
        Criterion {
            name: "linearization defect",
            limit: secs(5),
            run: linearization_defect,
        },
        Criterion {
            name: "exponent identities",
            limit: secs(120),
            run: exponent_identities,
        },
        Criterion {
            name: "connectivity method agreement",
            limit: secs(300),
            run: connectivity_agreement,
        },
        Criterion {
            name: "horseshoe machinery",
            limit: secs(120),
            run: horseshoe_machinery,
        },
        Criterion {
            name: "boundary scan b=±0.01",
            limit: secs(600),
            run: boundary_scans,
        },
        Criterion {
            name: "CLI determinism",
            limit: secs(600),
            run: cli_determinism,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let took = start.elapsed();
        let in_time = took <= c.limit;
        let (pass, detail) = match result {
            Ok(m) => (in_time, m),
            Err(m) => (false, m),
        };
        println!(
            "{} {}: {detail}; runtime {:.2} s (limit {} s)",
            if pass { "PASS" } else { "FAIL" },
            c.name,
            took.as_secs_f64(),
            c.limit.as_secs()
        );
        failed += usize::from(!pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
