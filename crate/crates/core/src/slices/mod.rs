//! Escape-rate pictures of `W^u_p ∩ K⁺` drawn in the linearizing plane of a
//! saddle, the two connectivity tests built on them, Lyapunov exponents from
//! saddle orbits, and parameter-plane scans.
//!
//! A pixel at `z` shows `g(z) = G⁺(φ_p(z))`. Points of `K⁺` have `g = 0`
//! and are drawn black.

mod components;
mod critical;
mod exponents;
mod format;
mod param;

pub use components::detect_compact_components;
pub use critical::{find_unstable_critical_points, CriticalConfig, CriticalPointRecord};
pub use exponents::{estimate_lambda, LyapunovPair};
pub use format::{palette, read_hslc, summary_json, write_hslc, write_ppm, HSLC_MAGIC, HSLC_VERSION};
pub use param::{render_parameter_plane, ParamRegion, Probe, ProbeBudget, ProbeOutcome};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{in_escape_region, Direction, HenonParams, Point2, C64, PERIODICITY_EPS};
use crate::error::{invalid, Result};
use crate::saddles::{default_saddle, linearize, Linearization, DEFAULT_SERIES_ORDER, DEFECT_THRESHOLD};

pub const MAX_SIDE: u32 = 16_384;
pub const MAX_DEPTH: u32 = 100_000;

/// Rectangle `[x0, x1] × [y0, y1]` in a complex coordinate plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Window {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(invalid("window", "corners must be finite"));
        }
        if !(x1 > x0 && y1 > y0) {
            return Err(invalid("window", "must have x1 > x0 and y1 > y0"));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn centered(center: C64, radius: f64) -> Result<Self> {
        Self::new(
            center.re - radius,
            center.im - radius,
            center.re + radius,
            center.im + radius,
        )
    }

    /// Center of cell `(i, j)`; row 0 is the top edge `y1`.
    pub fn cell_center(&self, i: u32, j: u32, width: u32, height: u32) -> C64 {
        let dx = (self.x1 - self.x0) / width as f64;
        let dy = (self.y1 - self.y0) / height as f64;
        C64::new(self.x0 + (i as f64 + 0.5) * dx, self.y1 - (j as f64 + 0.5) * dy)
    }

    pub fn cell_size(&self, width: u32, height: u32) -> f64 {
        ((self.x1 - self.x0) / width as f64).max((self.y1 - self.y0) / height as f64)
    }

    pub fn contains(&self, z: C64) -> bool {
        (self.x0..=self.x1).contains(&z.re) && (self.y0..=self.y1).contains(&z.im)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Escaped = 0,
    /// Not certified to escape within the depth.
    Bounded = 1,
    /// Escapes, but the distance estimate puts `K⁺` inside the cell.
    NearK = 2,
}

impl CellStatus {
    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Self::Escaped),
            1 => Some(Self::Bounded),
            2 => Some(Self::NearK),
            _ => None,
        }
    }

    /// Counted as part of `K⁺` by the component test.
    pub fn counts_as_bounded(self) -> bool {
        self != Self::Escaped
    }
}

/// The saddle an image was drawn around.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleRef {
    pub location: Point2,
    pub period: u32,
    pub eigen_unstable: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Dynamical {
        params: HenonParams,
        saddle: SaddleRef,
        series_order: usize,
        depth: u32,
        thicken: f64,
    },
    Parameter {
        region: ParamRegion,
        probe: Probe,
        budget: ProbeBudget,
    },
}

/// A grid of cells with an `f32` rate and a status byte each, row-major
/// from the top-left corner.
///
/// Dynamical images store `G⁺∘φ` and a [`CellStatus`]; parameter images
/// store the probe's score and a [`ProbeOutcome`].
#[derive(Clone, Debug, PartialEq)]
pub struct SliceImage {
    pub width: u32,
    pub height: u32,
    pub window: Window,
    pub rate: Vec<f32>,
    pub status: Vec<u8>,
    pub provenance: Provenance,
}

impl SliceImage {
    pub fn index(&self, i: u32, j: u32) -> usize {
        (j * self.width + i) as usize
    }

    pub fn cell_status(&self, i: u32, j: u32) -> CellStatus {
        CellStatus::from_byte(self.status[self.index(i, j)]).unwrap_or(CellStatus::Bounded)
    }

    pub fn bounded_fraction(&self) -> f64 {
        let n = self
            .status
            .iter()
            .filter(|&&s| CellStatus::from_byte(s).is_some_and(CellStatus::counts_as_bounded))
            .count();
        n as f64 / self.status.len() as f64
    }

    pub fn depth(&self) -> Option<u32> {
        match self.provenance {
            Provenance::Dynamical { depth, .. } => Some(depth),
            Provenance::Parameter { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub depth: u32,
    /// Cells whose distance estimate to `K⁺` is below `thicken · cell size`
    /// are marked [`CellStatus::NearK`].
    pub thicken: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            depth: 200,
            thicken: 1.0,
        }
    }
}

fn check_grid(width: u32, height: u32, depth: u32) -> Result<()> {
    if width == 0 || height == 0 || width > MAX_SIDE || height > MAX_SIDE {
        return Err(invalid("resolution", format!("sides must lie in 1..={MAX_SIDE}")));
    }
    if depth == 0 || depth > MAX_DEPTH {
        return Err(invalid("depth", format!("must lie in 1..={MAX_DEPTH}")));
    }
    Ok(())
}

/// Escape-rate picture of the unstable slice in `window`.
pub fn render_slice(
    lin: &Linearization,
    window: Window,
    width: u32,
    height: u32,
    cfg: &RenderConfig,
) -> Result<SliceImage> {
    check_grid(width, height, cfg.depth)?;
    if !(lin.defect < DEFECT_THRESHOLD) {
        return Err(invalid(
            "linearization",
            format!(
                "functional-equation defect {:e} exceeds {DEFECT_THRESHOLD:e}",
                lin.defect
            ),
        ));
    }
    if !(cfg.thicken >= 0.0 && cfg.thicken.is_finite()) {
        return Err(invalid("thicken", "must be a finite nonnegative number"));
    }
    let cell = window.cell_size(width, height);
    let cells: Vec<(f32, u8)> = (0..height)
        .into_par_iter()
        .flat_map_iter(|j| {
            (0..width).map(move |i| {
                let z = window.cell_center(i, j, width, height);
                pixel(lin, z, cfg.depth, cfg.thicken * cell)
            })
        })
        .collect();
    let (rate, status) = cells.into_iter().unzip();
    Ok(SliceImage {
        width,
        height,
        window,
        rate,
        status,
        provenance: Provenance::Dynamical {
            params: *lin.params(),
            saddle: SaddleRef {
                location: lin.saddle.location,
                period: lin.saddle.period,
                eigen_unstable: lin.saddle.eigen_unstable,
            },
            series_order: lin.k_max,
            depth: cfg.depth,
            thicken: cfg.thicken,
        },
    })
}

fn pixel(lin: &Linearization, z: C64, depth: u32, near: f64) -> (f32, u8) {
    match green_jet(lin, z, depth) {
        None => (0.0, CellStatus::Bounded as u8),
        Some(j) => {
            let rate = (j.g as f32).clamp(f32::MIN_POSITIVE, f32::MAX);
            let grad = j.q.norm();
            let status = if grad > 0.0 && j.g / grad < near {
                CellStatus::NearK
            } else {
                CellStatus::Escaped
            };
            (rate, status as u8)
        }
    }
}

/// `g = G⁺∘φ` at `z`, with `q = ∂h/∂z` and `dq = ∂²h/∂z²` for a local
/// holomorphic `h` with `g = Re h`; so `|∇g| = |q|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct GreenJet {
    pub g: f64,
    pub q: C64,
    pub dq: C64,
    /// First certified step counted from `φ(z)`.
    pub escaped_at: u32,
}

/// Once |x| passes this, the remaining tail of log|x|/2^n is negligible.
const SETTLE: f64 = 1e12;
const SETTLE_STEPS: u32 = 64;

pub(crate) fn green_jet(lin: &Linearization, z: C64, depth: u32) -> Option<GreenJet> {
    let params = lin.params();
    let (w, m) = lin.reduce(z);
    let lead = m * lin.period();
    let jet = lin.series_jet(w);
    let s = lin.lambda().powu(m).inv();
    let (mut x, mut y) = (jet.p.x, jet.p.y);
    let (mut dx, mut dy) = (jet.dp.x * s, jet.dp.y * s);
    let (mut ddx, mut ddy) = (jet.ddp.x * s * s, jet.ddp.y * s * s);
    let (a, b) = (params.a(), params.b());
    let radius = params.radius();

    let mut saved = Point2::new(x, y);
    let mut next_save = 1u32;
    let budget = depth.saturating_add(lead);
    let mut certified = None;
    let mut n = 0u32;
    loop {
        let p = Point2::new(x, y);
        if certified.is_none() && (in_escape_region(&p, radius, Direction::Forward) || !p.is_finite()) {
            certified = Some(n);
        }
        if let Some(k) = certified {
            if x.norm() > SETTLE || n >= k + SETTLE_STEPS {
                break;
            }
        } else if n >= budget {
            return None;
        }
        let nx = a - b * y - x * x;
        let ndx = -(b * dy) - x * dx * 2.0;
        let nddx = -(b * ddy) - (dx * dx + x * ddx) * 2.0;
        if !(nx.norm().is_finite() && ndx.norm().is_finite() && nddx.norm().is_finite()) {
            if certified.is_none() {
                certified = Some(n);
            }
            break;
        }
        (y, dy, ddy) = (x, dx, ddx);
        (x, dx, ddx) = (nx, ndx, nddx);
        n += 1;
        if certified.is_none() {
            let q = Point2::new(x, y);
            if q.dist(&saved) <= PERIODICITY_EPS * saved.sup_norm().max(1.0) {
                return None;
            }
            if n == next_save {
                saved = q;
                next_save = next_save.saturating_mul(2);
            }
        }
    }
    let k = certified?;
    // g(z) = 2^{lead} G⁺(φ(w)) ≈ 2^{lead − n} log|x_n|
    let scale = 2f64.powi(lead as i32 - n as i32);
    let r = dx / x;
    Some(GreenJet {
        g: scale * x.norm().ln(),
        q: r * scale,
        dq: (ddx / x - r * r) * scale,
        escaped_at: k.saturating_sub(lead),
    })
}

/// Linearization of the default saddle, as used for pictures.
pub fn default_linearization(params: &HenonParams) -> Result<Linearization> {
    let saddle = default_saddle(params).ok_or_else(|| invalid("params", "no saddle fixed point"))?;
    linearize(params, &saddle, DEFAULT_SERIES_ORDER)
}

/// Result of a connectivity test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    UnstablyConnectedAtResolution,
    UnstablyDisconnected,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Evidence {
    /// Bounding box of a bounded component that avoids the window edge.
    Component {
        cells: [u32; 4],
        window: Window,
        size: usize,
    },
    CriticalPoint(CriticalPointRecord),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityVerdict {
    pub verdict: Verdict,
    pub evidence: Option<Evidence>,
    pub method: String,
    pub window: Window,
    pub width: u32,
    pub height: u32,
    pub depth: u32,
}

/// Merge two verdicts; opposite certainties give `Undecided`.
pub fn combine(u: Verdict, v: Verdict) -> Verdict {
    use Verdict::*;
    match (u, v) {
        (x, y) if x == y => x,
        (Undecided, x) | (x, Undecided) => x,
        _ => Undecided,
    }
}

/// Settings for [`connectivity`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityConfig {
    pub window: Window,
    pub resolution: u32,
    pub render: RenderConfig,
    pub critical: CriticalConfig,
}

impl Default for ConnectivityConfig {
    fn default() -> Self {
        Self {
            window: Window::centered(C64::new(0.0, 0.0), 3.0).expect("static window"),
            resolution: 256,
            render: RenderConfig::default(),
            critical: CriticalConfig::default(),
        }
    }
}

/// Both connectivity tests on the default saddle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub params: HenonParams,
    pub saddle: SaddleRef,
    pub components: ConnectivityVerdict,
    pub critical: ConnectivityVerdict,
    pub critical_points: Vec<CriticalPointRecord>,
    pub verdict: Verdict,
}

pub fn connectivity(params: &HenonParams, cfg: &ConnectivityConfig) -> Result<ConnectivityReport> {
    let lin = default_linearization(params)?;
    connectivity_with(&lin, cfg)
}

pub fn connectivity_with(lin: &Linearization, cfg: &ConnectivityConfig) -> Result<ConnectivityReport> {
    let img = render_slice(lin, cfg.window, cfg.resolution, cfg.resolution, &cfg.render)?;
    let components = detect_compact_components(&img);
    let points = find_unstable_critical_points(lin, cfg.window, cfg.resolution, cfg.render.depth, &cfg.critical)?;
    let critical = critical::verdict_from_points(&points, cfg.window, cfg.resolution, cfg.render.depth);
    Ok(ConnectivityReport {
        params: *lin.params(),
        saddle: SaddleRef {
            location: lin.saddle.location,
            period: lin.saddle.period,
            eigen_unstable: lin.saddle.eigen_unstable,
        },
        verdict: combine(components.verdict, critical.verdict),
        components,
        critical,
        critical_points: points,
    })
}

/// The same tests on the stable slice, run through the inverse map.
pub fn stable_connectivity(params: &HenonParams, cfg: &ConnectivityConfig) -> Result<ConnectivityReport> {
    connectivity(&params.inverse_conjugate(), cfg)
}
