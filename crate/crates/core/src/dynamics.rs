//! The quadratic family `x ↦ a − x²` and the Hénon family
//! `(x, y) ↦ (a − b·y − x², x)`, with iteration and a filtration-based
//! escape test.
//!
//! Escape is only ever certified in one direction: a point is reported as
//! escaped when it has entered the region of the filtration where the
//! relevant coordinate grows monotonically to infinity. "Bounded" means no
//! certificate was produced within the iteration budget.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type C64 = Complex64;

/// Relative tolerance used by the periodicity check in [`escape_time`].
pub(crate) const PERIODICITY_EPS: f64 = 1e-13;

/// Parameter of the one-variable quadratic map `f_a(x) = a − x²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadParam {
    a: C64,
}

impl QuadParam {
    pub fn new(a: C64) -> Result<Self> {
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(invalid("a", "must be finite"));
        }
        Ok(Self { a })
    }

    pub fn real(a: f64) -> Result<Self> {
        Self::new(C64::new(a, 0.0))
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    #[inline]
    pub fn apply(&self, x: C64) -> C64 {
        self.a - x * x
    }

    /// Escape radius: beyond it `|f(x)| > |x|` and the orbit tends to infinity.
    pub fn escape_radius(&self) -> f64 {
        let m = self.a.norm();
        2f64.max((1.0 + (1.0 + 4.0 * m).sqrt()) / 2.0).max(m)
    }
}

/// Parameters `(a, b)` of the Hénon map `f(x, y) = (a − b·y − x², x)`.
///
/// The Jacobian determinant of `f` is `b` everywhere, so `b ≠ 0` makes the
/// map a polynomial diffeomorphism of `C²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct HenonParams {
    a: C64,
    b: C64,
    radius: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    a: C64,
    b: C64,
}

impl TryFrom<RawParams> for HenonParams {
    type Error = crate::Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        HenonParams::new(raw.a, raw.b)
    }
}

impl From<HenonParams> for RawParams {
    fn from(p: HenonParams) -> Self {
        RawParams { a: p.a, b: p.b }
    }
}

impl HenonParams {
    pub fn new(a: C64, b: C64) -> Result<Self> {
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(invalid("a", "must be finite"));
        }
        if !(b.re.is_finite() && b.im.is_finite()) {
            return Err(invalid("b", "must be finite"));
        }
        if b == C64::new(0.0, 0.0) {
            return Err(invalid("b", "the Jacobian b must be nonzero"));
        }
        let radius = filtration_radius(a.norm(), b.norm()).max(2.0);
        Ok(Self { a, b, radius })
    }

    pub fn real(a: f64, b: f64) -> Result<Self> {
        Self::new(C64::new(a, 0.0), C64::new(b, 0.0))
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    /// Algebraic degree of the map.
    pub fn degree(&self) -> u32 {
        2
    }

    /// `det Df`, which is the constant `b`.
    pub fn jacobian(&self) -> C64 {
        self.b
    }

    /// Filtration radius `R = max(2, β)` where `β` is the positive root of
    /// `r² = (1 + |b|)·r + |a|`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The tight filtration constant `β` (without the `max(2, ·)` floor).
    /// The set of points bounded in both time directions lies in the
    /// bidisk of this radius.
    pub fn tight_radius(&self) -> f64 {
        filtration_radius(self.a.norm(), self.b.norm())
    }

    pub fn is_real(&self) -> bool {
        self.a.im == 0.0 && self.b.im == 0.0
    }

    #[inline]
    pub fn forward(&self, p: Point2) -> Point2 {
        Point2::new(self.a - self.b * p.y - p.x * p.x, p.x)
    }

    #[inline]
    pub fn backward(&self, p: Point2) -> Point2 {
        Point2::new(p.y, (self.a - p.x - p.y * p.y) / self.b)
    }

    #[inline]
    pub fn step(&self, p: Point2, dir: Direction) -> Point2 {
        match dir {
            Direction::Forward => self.forward(p),
            Direction::Backward => self.backward(p),
        }
    }

    /// `Df` at `p`.
    pub fn differential(&self, p: Point2) -> Matrix2<C64> {
        Matrix2::new(-p.x * 2.0, -self.b, C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    /// `D(f⁻¹)` at `p`.
    pub fn inverse_differential(&self, p: Point2) -> Matrix2<C64> {
        let one = C64::new(1.0, 0.0);
        Matrix2::new(C64::new(0.0, 0.0), one, -one / self.b, -p.y * 2.0 / self.b)
    }

    /// Fixed points: `x = y` with `x² + (1 + b)x − a = 0`.
    pub fn fixed_points(&self) -> [Point2; 2] {
        let s = C64::new(1.0, 0.0) + self.b;
        let disc = (s * s + self.a * 4.0).sqrt();
        // pick the root that avoids cancellation, recover the other from the product
        let x1 = if (-s + disc).norm() >= (-s - disc).norm() {
            (-s + disc) / 2.0
        } else {
            (-s - disc) / 2.0
        };
        let x2 = if x1.norm() > 0.0 { -self.a / x1 } else { -s };
        [Point2::new(x1, x1), Point2::new(x2, x2)]
    }

    /// Parameters of the Hénon map `h` conjugate to `f⁻¹`:
    /// `f⁻¹ = ψ ∘ h ∘ ψ⁻¹` with `ψ(u, v) = (b·v, b·u)`, where
    /// `h = f_{a/b², 1/b}`.
    pub fn inverse_conjugate(&self) -> HenonParams {
        let one = C64::new(1.0, 0.0);
        HenonParams::new(self.a / (self.b * self.b), one / self.b).expect("a/b² and 1/b are finite and 1/b is nonzero")
    }

    /// `ψ⁻¹`: coordinates of `f` to coordinates of [`Self::inverse_conjugate`].
    pub fn to_inverse_chart(&self, p: Point2) -> Point2 {
        Point2::new(p.y / self.b, p.x / self.b)
    }

    /// `ψ`: coordinates of [`Self::inverse_conjugate`] back to those of `f`.
    pub fn from_inverse_chart(&self, q: Point2) -> Point2 {
        Point2::new(self.b * q.y, self.b * q.x)
    }
}

fn filtration_radius(a: f64, b: f64) -> f64 {
    let s = 1.0 + b;
    (s + (s * s + 4.0 * a).sqrt()) / 2.0
}

/// A point of `C²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: C64,
    pub y: C64,
}

impl Point2 {
    pub const fn new(x: C64, y: C64) -> Self {
        Self { x, y }
    }

    pub fn real(x: f64, y: f64) -> Self {
        Self::new(C64::new(x, 0.0), C64::new(y, 0.0))
    }

    pub fn sup_norm(&self) -> f64 {
        self.x.norm().max(self.y.norm())
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).norm().max((self.y - other.y).norm())
    }

    pub fn is_finite(&self) -> bool {
        self.x.re.is_finite() && self.x.im.is_finite() && self.y.re.is_finite() && self.y.im.is_finite()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.x.im.abs() <= tol && self.y.im.abs() <= tol
    }

    pub fn to_vector(self) -> Vector2<C64> {
        Vector2::new(self.x, self.y)
    }

    pub fn from_vector(v: Vector2<C64>) -> Self {
        Self::new(v[0], v[1])
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn reverse(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// Outcome of [`iterate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Iterate {
    Reached(Point2),
    /// The orbit overflowed to a non-finite value after `step` steps.
    Escaped {
        step: u64,
    },
}

impl Iterate {
    pub fn point(self) -> Option<Point2> {
        match self {
            Iterate::Reached(p) => Some(p),
            Iterate::Escaped { .. } => None,
        }
    }
}

/// `f^n(p)`; negative `n` iterates the inverse.
pub fn iterate(params: &HenonParams, p: Point2, n: i64) -> Iterate {
    let dir = if n >= 0 {
        Direction::Forward
    } else {
        Direction::Backward
    };
    let mut q = p;
    for k in 0..n.unsigned_abs() {
        q = params.step(q, dir);
        if !q.is_finite() {
            return Iterate::Escaped { step: k + 1 };
        }
    }
    Iterate::Reached(q)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Escape {
    /// First step at which the filtration certified escape, and the sup-norm there.
    Escaped {
        step: u32,
        magnitude: f64,
    },
    Bounded,
}

impl Escape {
    pub fn escaped(&self) -> bool {
        matches!(self, Escape::Escaped { .. })
    }
}

/// Whether `p` lies in the escaping region of the filtration for `dir`:
/// the leading coordinate exceeds `radius` and dominates the other one.
#[inline]
pub(crate) fn in_escape_region(p: &Point2, radius: f64, dir: Direction) -> bool {
    let (lead, other) = match dir {
        Direction::Forward => (p.x.norm(), p.y.norm()),
        Direction::Backward => (p.y.norm(), p.x.norm()),
    };
    lead > radius && lead >= other
}

/// Orbit walk shared by the escape test and the Green functions.
/// Returns the certified point and its step, or `None` if the orbit stayed
/// uncertified for `max_iter` steps or was detected as numerically periodic.
pub(crate) fn walk_to_escape(params: &HenonParams, p: Point2, dir: Direction, max_iter: u32) -> Option<(u32, Point2)> {
    let radius = params.radius();
    let mut q = p;
    let mut saved = p;
    let mut next_save = 1u32;
    for k in 0..=max_iter {
        if in_escape_region(&q, radius, dir) || !q.is_finite() {
            return Some((k, q));
        }
        if k == max_iter {
            break;
        }
        q = params.step(q, dir);
        // Brent-style periodicity check: compare against a point saved at
        // power-of-two steps; a numerically closed orbit never escapes.
        if q.dist(&saved) <= PERIODICITY_EPS * saved.sup_norm().max(1.0) {
            return None;
        }
        if k + 1 == next_save {
            saved = q;
            next_save = next_save.saturating_mul(2);
        }
    }
    None
}

/// Filtration escape test. `max_iter ≥ 1`.
pub fn escape_time(params: &HenonParams, p: Point2, dir: Direction, max_iter: u32) -> Result<Escape> {
    if max_iter < 1 {
        return Err(invalid("max_iter", "must be at least 1"));
    }
    Ok(match walk_to_escape(params, p, dir, max_iter) {
        Some((step, q)) => Escape::Escaped {
            step,
            magnitude: q.sup_norm(),
        },
        None => Escape::Bounded,
    })
}

/// Escape test for the quadratic map: certified once `|x| > R₁`.
pub fn escape_time_1d(param: &QuadParam, z: C64, max_iter: u32) -> Option<(u32, C64)> {
    let radius = param.escape_radius();
    let mut x = z;
    for k in 0..=max_iter {
        if x.norm() > radius || !(x.re.is_finite() && x.im.is_finite()) {
            return Some((k, x));
        }
        if k == max_iter {
            break;
        }
        x = param.apply(x);
    }
    None
}
