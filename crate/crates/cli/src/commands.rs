use std::fmt::Write;

use henonlab::budget::Deadline;
use henonlab::horseshoe::{
    boundary_scan, certificate_to_text, certify_horseshoe, certify_horseshoe_1d, entropy_census, HorseshoeConfig,
    ScanConfig, TangencyConfig,
};
use henonlab::oracle1d::{
    connectivity_1d_with_deadline, green_1d_with_depth, lyapunov_1d, Connectivity1D, ExponentMethod, LyapunovBudget,
};
use henonlab::potential::{green_2d_with_depth, sample_mu, Sign};
use henonlab::saddles::{find_periodic, to_json, SearchBudget, SearchKind};
use henonlab::slices::{
    connectivity, estimate_lambda, stable_connectivity, ConnectivityConfig, ParamRegion, Probe, ProbeBudget,
    RenderConfig, Window,
};
use henonlab::{Error, HenonParams, Point2, QuadParam, C64};
use serde::Serialize;
use serde_json::json;

use crate::args::*;
use crate::tiles::{dyn_image, encode, param_image, DynRequest, Encoding, ParamRequest};

/// Why a run failed, with its exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Exit 2.
    Validation(String),
    /// Exit 3.
    Budget(String),
    /// Exit 1.
    Other(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Other(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "validation error: {m}"),
            Failure::Budget(m) => write!(f, "budget exhausted: {m}"),
            Failure::Other(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::Format(_) => Failure::Validation(e.to_string()),
            Error::Resource(_) => Failure::Budget(e.to_string()),
            Error::NonConvergence { .. } | Error::Inconsistent(_) => Failure::Other(e.to_string()),
        }
    }
}

fn invalid(field: &str, reason: &str) -> Failure {
    Failure::Validation(format!("invalid {field}: {reason}"))
}

/// What a finished run produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub artifact: Vec<u8>,
    /// File name used when `--out` is absent.
    pub default_name: &'static str,
    /// Human-readable lines for standard output.
    pub summary: String,
    /// The wall-clock budget ran out and the artifact is marked partial.
    pub partial: bool,
}

fn json_bytes(v: &impl Serialize) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("report serializes");
    out.push(b'\n');
    out
}

fn outcome(artifact: Vec<u8>, default_name: &'static str, summary: String) -> Outcome {
    Outcome {
        artifact,
        default_name,
        summary,
        partial: false,
    }
}

fn window(v: &[f64]) -> Result<Window, Failure> {
    match v {
        [x0, y0, x1, y1] => Ok(Window::new(*x0, *y0, *x1, *y1)?),
        _ => Err(invalid("window", "needs four numbers")),
    }
}

fn params(m: &MapArgs) -> Result<HenonParams, Failure> {
    Ok(HenonParams::new(m.a, m.b)?)
}

/// Runs every subcommand except `serve`.
pub fn execute(cli: &Cli) -> Result<Outcome, Failure> {
    if let Some(s) = cli.budget_secs {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(invalid("budget_secs", "must be a finite nonnegative number"));
        }
    }
    let enc = cli.out.as_deref().map(Encoding::from_path).unwrap_or(Encoding::Hslc);
    match &cli.command {
        Command::Green(g) => green(g),
        Command::Connectivity1d(c) => {
            let q = QuadParam::new(c.a)?;
            let r = connectivity_1d_with_deadline(&q, c.max_iter, Deadline::from_secs(cli.budget_secs))?;
            let partial = r == Connectivity1D::Undecided;
            let summary = format!("{}\n", serde_json::to_string(&r).expect("verdict serializes"));
            Ok(Outcome {
                artifact: json_bytes(&json!({ "a": c.a, "result": r, "partial": partial })),
                default_name: "connectivity-1d.json",
                summary,
                partial,
            })
        }
        Command::Lyapunov1d(l) => {
            let q = QuadParam::new(l.a)?;
            let method = match l.method {
                Method1d::CriticalFormula => ExponentMethod::CriticalFormula,
                Method1d::ErgodicAverage => ExponentMethod::ErgodicAverage,
            };
            let budget = LyapunovBudget {
                tol: l.tol,
                n_points: l.n_points,
                depth: l.depth,
                seed: cli.seed,
            };
            let e = lyapunov_1d(&q, method, &budget)?;
            let summary = format!(
                "value = {}\nstderr = {}\ndimension = {}\n",
                e.value,
                e.stderr,
                e.dimension()
            );
            Ok(outcome(json_bytes(&e), "lyapunov-1d.json", summary))
        }
        Command::Saddles(s) => {
            let p = params(&s.map)?;
            let kind = match s.search {
                SearchArg::Complex => SearchKind::ComplexGrid,
                SearchArg::Real => SearchKind::RealGrid,
            };
            let budget = SearchBudget {
                starts_per_point: s.starts_per_point,
                max_newton_steps: s.max_newton_steps,
            };
            let found = find_periodic(&p, s.n, kind, &budget, cli.seed)?;
            let summary = format!(
                "points = {} of {}\nsaddles = {}\nundercount = {}\n",
                found.records.len(),
                found.expected_count(),
                found.saddles().count(),
                found.undercount
            );
            let mut text = to_json(&found).into_bytes();
            text.push(b'\n');
            Ok(outcome(text, "saddles.json", summary))
        }
        Command::RenderSlice(r) => {
            let req = DynRequest {
                a: r.map.a,
                b: r.map.b,
                saddle: r.saddle,
                window: window(&r.window)?,
                width: r.res,
                height: r.height.unwrap_or(r.res),
                depth: r.depth,
                thicken: r.thicken,
            };
            let img = dyn_image(&req)?;
            let summary = format!(
                "size = {}x{}\nbounded_fraction = {}\n",
                img.width,
                img.height,
                img.bounded_fraction()
            );
            Ok(outcome(encode(&img, enc), "slice.hslc", summary))
        }
        Command::Connectivity2d(c) => {
            let p = params(&c.map)?;
            let cfg = ConnectivityConfig {
                window: Window::centered(C64::new(0.0, 0.0), c.radius)?,
                resolution: c.res,
                render: RenderConfig {
                    depth: c.depth,
                    ..RenderConfig::default()
                },
                ..ConnectivityConfig::default()
            };
            let r = if c.stable {
                stable_connectivity(&p, &cfg)?
            } else {
                connectivity(&p, &cfg)?
            };
            let summary = format!(
                "verdict = {}\ncomponents = {}\ncritical = {}\n",
                verdict_name(&r.verdict),
                verdict_name(&r.components.verdict),
                verdict_name(&r.critical.verdict)
            );
            Ok(outcome(json_bytes(&r), "connectivity-2d.json", summary))
        }
        Command::RenderParam(r) => {
            let region = match (&r.ab, &r.a_window, r.b) {
                (Some(ab), None, _) => match ab[..] {
                    [a0, a1, b0, b1] => ParamRegion::AB { a0, a1, b0, b1 },
                    _ => return Err(invalid("ab", "needs four numbers")),
                },
                (None, Some(w), Some(b)) => ParamRegion::ComplexA { b, window: window(w)? },
                _ => return Err(invalid("region", "give --ab, or --a-window with --b")),
            };
            let probe = match r.probe {
                ProbeArg::Connectivity => Probe::Connectivity,
                ProbeArg::Horseshoe => Probe::Horseshoe,
                ProbeArg::EscapeOfMeasure => Probe::EscapeOfMeasure,
            };
            let req = ParamRequest {
                region,
                probe,
                width: r.res,
                height: r.height.unwrap_or(r.res),
                budget: ProbeBudget {
                    grid: r.grid,
                    depth: r.depth,
                    max_period: r.max_period,
                    cost_cap: r.cost_cap,
                    ..ProbeBudget::default()
                },
            };
            let img = param_image(&req)?;
            let positive = img.status.iter().filter(|&&s| s == 1).count();
            let summary = format!("size = {}x{}\npositive_cells = {positive}\n", img.width, img.height);
            Ok(outcome(encode(&img, enc), "param.hslc", summary))
        }
        Command::Lambda(l) => {
            let p = params(&l.map)?;
            let sample = sample_mu(&p, l.min_period..=l.max_period, &SearchBudget::default(), cli.seed)?;
            let pair = estimate_lambda(&p, &sample)?;
            let summary = format!(
                "lambda_plus = {}\nlambda_minus = {}\nsum = {}\n",
                pair.plus.value,
                pair.minus.value,
                pair.plus.value + pair.minus.value
            );
            let report = json!({
                "params": p,
                "lambda": pair,
                "sample_points": sample.len(),
                "undercount": sample.undercount,
            });
            Ok(outcome(json_bytes(&report), "lambda.json", summary))
        }
        Command::HorseshoeCertify(h) => {
            let mut cfg = HorseshoeConfig::default();
            if let Some(s) = h.max_steps {
                cfg.max_steps = s;
            }
            let c = match h.b {
                Some(b) => {
                    if let Some(g) = h.grid {
                        cfg.grid = g;
                    }
                    certify_horseshoe(h.a, b, &cfg)?
                }
                None => {
                    if let Some(g) = h.grid {
                        cfg.grid_1d = g;
                    }
                    certify_horseshoe_1d(h.a, &cfg)?
                }
            };
            let mut summary = format!("verified = {}\n", c.verified);
            if let Some(f) = &c.failure {
                writeln!(summary, "failure = {f}").expect("string write");
            }
            Ok(outcome(
                certificate_to_text(&c).into_bytes(),
                "certificate.txt",
                summary,
            ))
        }
        Command::Census(c) => {
            let census = entropy_census(c.a, c.b, c.n)?;
            let mut summary = String::new();
            for r in &census.rows {
                writeln!(summary, "n = {}  real = {}  complex = {}", r.n, r.real, r.complex).expect("string write");
            }
            writeln!(
                summary,
                "verdict = {}",
                serde_json::to_string(&census.verdict).expect("verdict serializes")
            )
            .expect("string write");
            Ok(outcome(json_bytes(&census), "census.json", summary))
        }
        Command::BoundaryScan(s) => {
            let [lo, hi] = s.bracket[..] else {
                return Err(invalid("bracket", "needs two numbers"));
            };
            let cfg = ScanConfig {
                n: s.n,
                tol: s.tol,
                max_evaluations: s.max_evaluations,
                horseshoe: HorseshoeConfig::default(),
                tangency: (!s.no_tangency).then(TangencyConfig::default),
            };
            let scan = boundary_scan(s.b, (lo, hi), &cfg)?;
            let mut summary = format!(
                "bracket = [{}, {}]\nmidpoint = {}\n",
                scan.a_lo,
                scan.a_hi,
                scan.midpoint()
            );
            if let Some(t) = &scan.tangency {
                writeln!(
                    summary,
                    "tangency = fixed points ({}, {}), c2 = {}, c1 = {}, quadratic_dominant = {}",
                    t.p,
                    t.q,
                    t.coefficients[2],
                    t.coefficients[1],
                    t.quadratic_dominant()
                )
                .expect("string write");
            }
            if let Some(e) = &scan.tangency_error {
                writeln!(summary, "tangency_error = {e}").expect("string write");
            }
            Ok(outcome(json_bytes(&scan), "boundary-scan.json", summary))
        }
        Command::Serve(_) => Err(invalid("command", "serve is not a batch command")),
    }
}

fn verdict_name(v: &impl Serialize) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn green(g: &GreenArgs) -> Result<Outcome, Failure> {
    match g.b {
        None => {
            let q = QuadParam::new(g.a)?;
            let v = green_1d_with_depth(&q, g.x, g.tol, g.depth)?;
            let summary = format!("value = {}\nerror_bound = {}\n", v.value, v.error_bound);
            Ok(outcome(
                json_bytes(&json!({ "a": g.a, "z": g.x, "green": v })),
                "green.json",
                summary,
            ))
        }
        Some(b) => {
            let p = HenonParams::new(g.a, b)?;
            let pt = Point2::new(g.x, g.y);
            let plus = green_2d_with_depth(&p, pt, Sign::Plus, g.tol, g.depth)?;
            let minus = green_2d_with_depth(&p, pt, Sign::Minus, g.tol, g.depth)?;
            let summary = format!("plus = {}\nminus = {}\n", plus.value, minus.value);
            let report = json!({ "params": p, "point": pt, "plus": plus, "minus": minus });
            Ok(outcome(json_bytes(&report), "green.json", summary))
        }
    }
}
