//! Words in the Friedland–Milnor factor classes and the algebraic degree
//! growth of their iterates.
//!
//! Iterates are built symbolically by post-composing one factor at a time
//! onto a pair of bivariate polynomials, so a Hénon factor costs a single
//! squaring. Coefficients live either in `C64` or, when every parameter in
//! the word is an integer, in exact big integers so that cancellation can
//! never hide or fake a degree.

use std::ops::{Add, Mul, Neg};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dynamics::{HenonParams, C64};
use crate::error::{invalid, Error, Result};

/// Largest number of monomials a single iterate may carry.
pub const MAX_TERMS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Factor {
    /// `(x, y) ↦ M·(x, y) + t`, `M` invertible.
    Affine {
        m: [[C64; 2]; 2],
        t: [C64; 2],
    },
    /// `(x, y) ↦ (α·x + p(y), β·y + γ)` with `αβ ≠ 0`; `p` lists the
    /// coefficients of `p` from the constant term up.
    Elementary {
        alpha: C64,
        p: Vec<C64>,
        beta: C64,
        gamma: C64,
    },
    Henon(HenonParams),
}

impl Factor {
    pub fn degree(&self) -> u32 {
        match self {
            Factor::Affine { .. } => 1,
            Factor::Elementary { p, .. } => {
                let d = p.iter().rposition(|c| *c != C64::zero()).unwrap_or(0);
                (d as u32).max(1)
            }
            Factor::Henon(h) => h.degree(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Factor::Affine { m, .. } => {
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                if det.norm() == 0.0 {
                    return Err(invalid("word", "affine factor is not invertible"));
                }
            }
            Factor::Elementary { alpha, beta, .. } => {
                if alpha.norm() == 0.0 || beta.norm() == 0.0 {
                    return Err(invalid("word", "elementary factor needs αβ ≠ 0"));
                }
            }
            Factor::Henon(_) => {}
        }
        Ok(())
    }

    fn scalars(&self) -> Vec<C64> {
        match self {
            Factor::Affine { m, t } => vec![m[0][0], m[0][1], m[1][0], m[1][1], t[0], t[1]],
            Factor::Elementary { alpha, p, beta, gamma } => {
                let mut v = vec![*alpha, *beta, *gamma];
                v.extend_from_slice(p);
                v
            }
            Factor::Henon(h) => vec![h.a(), h.b()],
        }
    }
}

/// A nonempty composition `f = F_k ∘ … ∘ F_1` (factors listed in the order
/// they are applied).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapWord {
    factors: Vec<Factor>,
}

impl MapWord {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(invalid("word", "must contain at least one factor"));
        }
        for f in &factors {
            f.validate()?;
        }
        Ok(Self { factors })
    }

    pub fn henon(params: HenonParams) -> Self {
        Self {
            factors: vec![Factor::Henon(params)],
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Upper bound for `deg f` from the factor degrees.
    pub fn degree_bound(&self) -> u64 {
        self.factors.iter().map(|f| f.degree() as u64).product()
    }

    fn is_integral(&self) -> bool {
        self.factors
            .iter()
            .flat_map(|f| f.scalars())
            .all(|c| c.im == 0.0 && c.re.fract() == 0.0 && c.re.abs() < 1e15)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientMode {
    /// Exact integers when the word allows it, floating point otherwise.
    #[default]
    Auto,
    Float,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    /// `deg f^1, …, deg f^{n_max}`.
    pub sequence: Vec<u64>,
    /// `(deg f^{n_max})^{1/n_max}`.
    pub estimate: f64,
    /// The dynamical degree when it is known in closed form for this word.
    pub exact: Option<u64>,
    pub exact_arithmetic: bool,
}

/// Degree sequence and dynamical-degree estimate of `word`.
pub fn dynamical_degree(word: &MapWord, n_max: u32, mode: CoefficientMode) -> Result<DegreeReport> {
    if n_max < 1 {
        return Err(invalid("n_max", "must be at least 1"));
    }
    let bound = (word.degree_bound() as f64).powi(n_max as i32);
    let predicted_terms = (bound + 1.0) * (bound + 2.0) / 2.0;
    if predicted_terms > MAX_TERMS as f64 {
        return Err(Error::Resource(format!(
            "iterate {n_max} may carry {predicted_terms:.3e} terms (limit {MAX_TERMS})"
        )));
    }
    let exact_arithmetic = match mode {
        CoefficientMode::Float => false,
        CoefficientMode::Exact => {
            if !word.is_integral() {
                return Err(invalid("word", "exact mode needs integer coefficients"));
            }
            true
        }
        CoefficientMode::Auto => word.is_integral(),
    };
    let sequence = if exact_arithmetic {
        degree_sequence::<BigInt>(word, n_max)
    } else {
        degree_sequence::<C64>(word, n_max)
    };
    let last = *sequence.last().expect("n_max ≥ 1");
    let estimate = (last as f64).powf(1.0 / n_max as f64);

    let henon_count = word.factors.iter().filter(|f| matches!(f, Factor::Henon(_))).count();
    let exact = if henon_count == word.factors.len() {
        Some(word.degree_bound())
    } else if henon_count == 0 {
        Some(1)
    } else {
        None
    };
    Ok(DegreeReport {
        sequence,
        estimate,
        exact,
        exact_arithmetic,
    })
}

fn degree_sequence<T: Coeff>(word: &MapWord, n_max: u32) -> Vec<u64> {
    let mut pair = (Poly2::<T>::x(), Poly2::<T>::y());
    let mut out = Vec::with_capacity(n_max as usize);
    for _ in 0..n_max {
        for f in &word.factors {
            pair = apply_factor(f, &pair);
        }
        out.push(pair.0.degree().max(pair.1.degree()) as u64);
    }
    out
}

fn apply_factor<T: Coeff>(f: &Factor, (p, q): &(Poly2<T>, Poly2<T>)) -> (Poly2<T>, Poly2<T>) {
    match f {
        Factor::Affine { m, t } => {
            let c = |z: C64| T::from_c64(z);
            let nx = &(&p.scale(&c(m[0][0])) + &q.scale(&c(m[0][1]))) + &Poly2::constant(c(t[0]));
            let ny = &(&p.scale(&c(m[1][0])) + &q.scale(&c(m[1][1]))) + &Poly2::constant(c(t[1]));
            (nx, ny)
        }
        Factor::Elementary {
            alpha,
            p: coeffs,
            beta,
            gamma,
        } => {
            let mut nx = p.scale(&T::from_c64(*alpha));
            let mut power = Poly2::constant(T::one());
            for (k, ck) in coeffs.iter().enumerate() {
                if k > 0 {
                    power = &power * q;
                }
                if *ck != C64::zero() {
                    nx = &nx + &power.scale(&T::from_c64(*ck));
                }
            }
            let ny = &q.scale(&T::from_c64(*beta)) + &Poly2::constant(T::from_c64(*gamma));
            (nx, ny)
        }
        Factor::Henon(h) => {
            let nx = &(&Poly2::constant(T::from_c64(h.a())) + &q.scale(&-T::from_c64(h.b()))) + &-(p * p);
            (nx, p.clone())
        }
    }
}

/// Coefficient ring for [`Poly2`].
pub trait Coeff: Clone + Zero + One + Neg<Output = Self> + for<'a> Add<&'a Self, Output = Self> {
    fn from_c64(z: C64) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
}

impl Coeff for C64 {
    fn from_c64(z: C64) -> Self {
        z
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
}

impl Coeff for BigInt {
    fn from_c64(z: C64) -> Self {
        debug_assert!(z.im == 0.0 && z.re.fract() == 0.0);
        BigInt::from(z.re as i64)
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
}

/// Dense bivariate polynomial: `coeffs[i][j]` multiplies `x^i y^j`, `i + j ≤ deg`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly2<T> {
    coeffs: Vec<Vec<T>>,
}

impl<T: Coeff> Poly2<T> {
    pub fn constant(c: T) -> Self {
        Self { coeffs: vec![vec![c]] }
    }

    pub fn x() -> Self {
        Self {
            coeffs: vec![vec![T::zero(), T::zero()], vec![T::one()]],
        }
    }

    pub fn y() -> Self {
        Self {
            coeffs: vec![vec![T::zero(), T::one()], vec![T::zero()]],
        }
    }

    fn zeros(deg: usize) -> Self {
        Self {
            coeffs: (0..=deg).map(|i| vec![T::zero(); deg + 1 - i]).collect(),
        }
    }

    fn table_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Total degree of the support (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        let mut d = 0;
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    d = d.max(i + j);
                }
            }
        }
        d
    }

    pub fn coeff(&self, i: usize, j: usize) -> T {
        self.coeffs
            .get(i)
            .and_then(|row| row.get(j))
            .cloned()
            .unwrap_or_else(T::zero)
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.iter().flatten().filter(|c| !c.is_zero()).count()
    }

    pub fn scale(&self, s: &T) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .map(|row| row.iter().map(|c| c.mul_ref(s)).collect())
                .collect(),
        }
    }

    fn trimmed(mut self) -> Self {
        let d = self.degree();
        self.coeffs.truncate(d + 1);
        for (i, row) in self.coeffs.iter_mut().enumerate() {
            row.truncate(d + 1 - i);
        }
        self
    }
}

impl<T: Coeff> Add for &Poly2<T> {
    type Output = Poly2<T>;
    fn add(self, rhs: &Poly2<T>) -> Poly2<T> {
        let deg = self.table_degree().max(rhs.table_degree());
        let mut out: Poly2<T> = Poly2::zeros(deg);
        for src in [self, rhs] {
            for (i, row) in src.coeffs.iter().enumerate() {
                for (j, c) in row.iter().enumerate() {
                    out.coeffs[i][j] = out.coeffs[i][j].clone() + c;
                }
            }
        }
        out.trimmed()
    }
}

impl<T: Coeff> Neg for Poly2<T> {
    type Output = Poly2<T>;
    fn neg(self) -> Poly2<T> {
        Poly2 {
            coeffs: self
                .coeffs
                .into_iter()
                .map(|row| row.into_iter().map(|c| -c).collect())
                .collect(),
        }
    }
}

impl<T: Coeff> Mul for &Poly2<T> {
    type Output = Poly2<T>;
    fn mul(self, rhs: &Poly2<T>) -> Poly2<T> {
        let deg = self.table_degree() + rhs.table_degree();
        let mut out: Poly2<T> = Poly2::zeros(deg);
        let rhs_terms: Vec<(usize, usize, &T)> = rhs
            .coeffs
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, c)| (i, j, c)))
            .filter(|(_, _, c)| !c.is_zero())
            .collect();
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                for &(k, l, d) in &rhs_terms {
                    let slot = &mut out.coeffs[i + k][j + l];
                    *slot = slot.clone() + &c.mul_ref(d);
                }
            }
        }
        out.trimmed()
    }
}

/// Evaluate a polynomial with `C64` coefficients (test helper and sanity checks).
pub fn eval_c64(p: &Poly2<C64>, x: C64, y: C64) -> C64 {
    let mut acc = C64::zero();
    for (i, row) in p.coeffs.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            acc += c * x.powu(i as u32) * y.powu(j as u32);
        }
    }
    acc
}

/// Convert an exact coefficient to `f64` (lossy).
pub fn bigint_to_f64(b: &BigInt) -> f64 {
    b.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn single_henon_doubles() {
        let word = MapWord::henon(HenonParams::real(6.0, 0.3).unwrap());
        let r = dynamical_degree(&word, 5, CoefficientMode::Auto).unwrap();
        assert_eq!(r.sequence, vec![2, 4, 8, 16, 32]);
        assert_eq!(r.exact, Some(2));
        assert!((r.estimate - 2.0).abs() < 1e-12);
        assert!(!r.exact_arithmetic);
    }

    #[test]
    fn integer_word_uses_exact_mode() {
        let word = MapWord::henon(HenonParams::real(2.0, -1.0).unwrap());
        let r = dynamical_degree(&word, 6, CoefficientMode::Auto).unwrap();
        assert!(r.exact_arithmetic);
        assert_eq!(r.sequence, vec![2, 4, 8, 16, 32, 64]);
    }

    #[test]
    fn affine_word_has_degree_one() {
        let word = MapWord::new(vec![Factor::Affine {
            m: [[c(2.0), c(1.0)], [c(1.0), c(1.0)]],
            t: [c(0.5), c(-3.0)],
        }])
        .unwrap();
        let r = dynamical_degree(&word, 7, CoefficientMode::Auto).unwrap();
        assert_eq!(r.sequence, vec![1; 7]);
        assert_eq!(r.exact, Some(1));
    }

    #[test]
    fn two_henon_factors() {
        let word = MapWord::new(vec![
            Factor::Henon(HenonParams::real(1.0, 0.5).unwrap()),
            Factor::Henon(HenonParams::real(-0.3, 2.0).unwrap()),
        ])
        .unwrap();
        let r = dynamical_degree(&word, 3, CoefficientMode::Auto).unwrap();
        assert_eq!(r.sequence, vec![4, 16, 64]);
        assert_eq!(r.exact, Some(4));
    }

    #[test]
    fn elementary_word_stays_bounded() {
        // (x, y) ↦ (x + y³, 2y + 1): triangular, degree of iterates stays 3.
        let word = MapWord::new(vec![Factor::Elementary {
            alpha: c(1.0),
            p: vec![c(0.0), c(0.0), c(0.0), c(1.0)],
            beta: c(2.0),
            gamma: c(1.0),
        }])
        .unwrap();
        let r = dynamical_degree(&word, 4, CoefficientMode::Exact).unwrap();
        assert_eq!(r.sequence, vec![3, 3, 3, 3]);
        assert_eq!(r.exact, Some(1));
    }

    #[test]
    fn exact_mode_catches_cancellation() {
        // (x, y) ↦ (a − by − x², x) followed by (X, Y) ↦ (X + Y², Y) is the
        // affine map (x, y) ↦ (a − by, x): the quadratic terms cancel.
        let word = MapWord::new(vec![
            Factor::Henon(HenonParams::real(3.0, 1.0).unwrap()),
            Factor::Elementary {
                alpha: c(1.0),
                p: vec![c(0.0), c(0.0), c(1.0)],
                beta: c(1.0),
                gamma: c(0.0),
            },
        ])
        .unwrap();
        let r = dynamical_degree(&word, 3, CoefficientMode::Exact).unwrap();
        assert_eq!(r.sequence, vec![1, 1, 1]);
        assert_eq!(r.exact, None);
    }

    #[test]
    fn guard_rejects_huge_iterates() {
        let word = MapWord::henon(HenonParams::real(1.0, 1.0).unwrap());
        assert!(matches!(
            dynamical_degree(&word, 12, CoefficientMode::Float),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn symbolic_iterate_matches_numeric() {
        let params = HenonParams::real(1.4, 0.3).unwrap();
        let word = MapWord::henon(params);
        let mut pair = (Poly2::<C64>::x(), Poly2::<C64>::y());
        for _ in 0..3 {
            pair = apply_factor(&word.factors[0], &pair);
        }
        let pt = crate::Point2::real(0.3, -0.2);
        let num = crate::dynamics::iterate(&params, pt, 3).point().unwrap();
        assert!((eval_c64(&pair.0, pt.x, pt.y) - num.x).norm() < 1e-12);
        assert!((eval_c64(&pair.1, pt.x, pt.y) - num.y).norm() < 1e-12);
    }
}
