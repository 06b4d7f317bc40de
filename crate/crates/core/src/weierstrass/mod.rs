//! Weierstrass models over Q.
//!
//! A model is `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`. Points do not
//! carry their model; every operation takes it explicitly.

mod group;
mod minimal;
mod transform;

use std::fmt;

use rug::{Integer, Rational};

use crate::error::{Error, Result};

pub use group::{
    add_points, division_polynomial, double_x, naive_x_height, negate, scalar_mul, sub_points,
};
pub use minimal::{minimal_model, minimal_model_with_bound};
pub use transform::ModelTransform;

/// The b-, c-invariants, discriminant and j-invariant of a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveInvariants {
    pub b2: Rational,
    pub b4: Rational,
    pub b6: Rational,
    pub b8: Rational,
    pub c4: Rational,
    pub c6: Rational,
    pub discriminant: Rational,
    pub j: Rational,
}

/// Standard invariant formulas; fails with `SingularModel` when the
/// discriminant vanishes.
pub fn compute_invariants(a: &[Rational; 5]) -> Result<CurveInvariants> {
    let [a1, a2, a3, a4, a6] = a;
    let b2 = Rational::from(a1 * a1) + Rational::from(4 * a2);
    let b4 = Rational::from(a1 * a3) + Rational::from(2 * a4);
    let b6 = Rational::from(a3 * a3) + Rational::from(4 * a6);
    let b8 = Rational::from(a1 * a1) * a6 + Rational::from(4 * a2) * a6
        - Rational::from(a1 * a3) * a4
        + Rational::from(a2 * a3) * a3
        - Rational::from(a4 * a4);
    let c4 = Rational::from(&b2 * &b2) - Rational::from(24 * &b4);
    let c6 = -Rational::from(&b2 * &b2) * &b2 + Rational::from(36 * &b2) * &b4
        - Rational::from(216 * &b6);
    let discriminant = -Rational::from(&b2 * &b2) * &b8
        - Rational::from(8 * &b4) * &b4 * &b4
        - Rational::from(27 * &b6) * &b6
        + Rational::from(9 * &b2) * &b4 * &b6;
    if discriminant == 0 {
        return Err(Error::SingularModel);
    }
    let j = Rational::from(&c4 * &c4) * &c4 / &discriminant;
    Ok(CurveInvariants {
        b2,
        b4,
        b6,
        b8,
        c4,
        c6,
        discriminant,
        j,
    })
}

/// A nonsingular Weierstrass model with cached invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeierstrassModel {
    a: [Rational; 5],
    inv: CurveInvariants,
}

impl WeierstrassModel {
    pub fn new(a: [Rational; 5]) -> Result<Self> {
        let inv = compute_invariants(&a)?;
        Ok(WeierstrassModel { a, inv })
    }

    pub fn from_ints(a: [i64; 5]) -> Result<Self> {
        Self::new(a.map(Rational::from))
    }

    pub fn a1(&self) -> &Rational {
        &self.a[0]
    }
    pub fn a2(&self) -> &Rational {
        &self.a[1]
    }
    pub fn a3(&self) -> &Rational {
        &self.a[2]
    }
    pub fn a4(&self) -> &Rational {
        &self.a[3]
    }
    pub fn a6(&self) -> &Rational {
        &self.a[4]
    }

    pub fn a_invariants(&self) -> &[Rational; 5] {
        &self.a
    }

    pub fn invariants(&self) -> &CurveInvariants {
        &self.inv
    }

    pub fn discriminant(&self) -> &Rational {
        &self.inv.discriminant
    }

    pub fn j_invariant(&self) -> &Rational {
        &self.inv.j
    }

    pub fn is_integral(&self) -> bool {
        self.a.iter().all(|c| *c.denom() == 1)
    }

    /// Integer a-invariants, if the model is integral.
    pub fn integer_coefficients(&self) -> Option<[Integer; 5]> {
        if !self.is_integral() {
            return None;
        }
        Some(self.a.clone().map(|c| c.into_numer_denom().0))
    }

    /// Left side minus right side of the model equation at `(x, y)`.
    pub fn equation_residual(&self, x: &Rational, y: &Rational) -> Rational {
        let [a1, a2, a3, a4, a6] = &self.a;
        let lhs = Rational::from(y * y) + Rational::from(a1 * x) * y + Rational::from(a3 * y);
        let rhs = Rational::from(x * x) * x
            + Rational::from(a2 * x) * x
            + Rational::from(a4 * x)
            + a6;
        lhs - rhs
    }

    pub fn contains(&self, p: &CurvePoint) -> bool {
        match p {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => self.equation_residual(x, y) == 0,
        }
    }
}

impl fmt::Display for WeierstrassModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}, {}, {}, {}]",
            self.a[0], self.a[1], self.a[2], self.a[3], self.a[4]
        )
    }
}

/// A rational point, affine or the point at infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CurvePoint {
    Infinity,
    Affine { x: Rational, y: Rational },
}

impl CurvePoint {
    pub fn affine(x: impl Into<Rational>, y: impl Into<Rational>) -> Self {
        CurvePoint::Affine {
            x: x.into(),
            y: y.into(),
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, CurvePoint::Infinity)
    }

    pub fn x(&self) -> Option<&Rational> {
        match self {
            CurvePoint::Infinity => None,
            CurvePoint::Affine { x, .. } => Some(x),
        }
    }

    pub fn coords(&self) -> Result<(&Rational, &Rational)> {
        match self {
            CurvePoint::Infinity => Err(Error::InfinityInput),
            CurvePoint::Affine { x, y } => Ok((x, y)),
        }
    }
}

impl fmt::Display for CurvePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvePoint::Infinity => write!(f, "O"),
            CurvePoint::Affine { x, y } => write!(f, "({x},{y})"),
        }
    }
}
