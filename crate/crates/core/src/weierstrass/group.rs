use rug::Rational;

use super::{CurvePoint, WeierstrassModel};
use crate::error::{Error, Result};
use crate::exactnum::ln_abs_int;

pub fn negate(model: &WeierstrassModel, p: &CurvePoint) -> CurvePoint {
    match p {
        CurvePoint::Infinity => CurvePoint::Infinity,
        CurvePoint::Affine { x, y } => {
            let ny = -(y + Rational::from(model.a1() * x)) - model.a3();
            CurvePoint::Affine {
                x: x.clone(),
                y: ny,
            }
        }
    }
}

/// Chord-and-tangent addition.
pub fn add_points(model: &WeierstrassModel, p: &CurvePoint, q: &CurvePoint) -> CurvePoint {
    let (x1, y1, x2, y2) = match (p, q) {
        (CurvePoint::Infinity, _) => return q.clone(),
        (_, CurvePoint::Infinity) => return p.clone(),
        (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => {
            (x1, y1, x2, y2)
        }
    };
    let [a1, a2, a3, a4, a6] = model.a_invariants();

    let (slope, intercept) = if x1 == x2 {
        let opposite = Rational::from(y1 + y2) + Rational::from(a1 * x2) + a3;
        if opposite == 0 {
            return CurvePoint::Infinity;
        }
        let den = Rational::from(2 * y1) + Rational::from(a1 * x1) + a3;
        let num = Rational::from(3 * x1) * x1 + Rational::from(2 * a2) * x1 + a4
            - Rational::from(a1 * y1);
        let nu = -Rational::from(x1 * x1) * x1 + Rational::from(a4 * x1) + Rational::from(2 * a6)
            - Rational::from(a3 * y1);
        (num / &den, nu / den)
    } else {
        let dx = Rational::from(x2 - x1);
        let slope = Rational::from(y2 - y1) / &dx;
        let intercept = (Rational::from(y1 * x2) - Rational::from(y2 * x1)) / dx;
        (slope, intercept)
    };

    let x3 = Rational::from(&slope * &slope) + Rational::from(a1 * &slope) - a2 - x1 - x2;
    let y3 = -Rational::from(&slope + a1) * &x3 - intercept - a3;
    CurvePoint::Affine { x: x3, y: y3 }
}

pub fn sub_points(model: &WeierstrassModel, p: &CurvePoint, q: &CurvePoint) -> CurvePoint {
    add_points(model, p, &negate(model, q))
}

/// `n * P` by double-and-add.
pub fn scalar_mul(model: &WeierstrassModel, n: i64, p: &CurvePoint) -> CurvePoint {
    let base = if n < 0 { negate(model, p) } else { p.clone() };
    let mut k = n.unsigned_abs();
    let mut acc = CurvePoint::Infinity;
    let mut pow = base;
    while k > 0 {
        if k & 1 == 1 {
            acc = add_points(model, &acc, &pow);
        }
        k >>= 1;
        if k > 0 {
            pow = add_points(model, &pow, &pow);
        }
    }
    acc
}

/// `psi_n(P)` for `1 <= n <= 5`, with `psi_2 = 2y + a1 x + a3`.
pub fn division_polynomial(model: &WeierstrassModel, n: i64, p: &CurvePoint) -> Result<Rational> {
    if !(1..=5).contains(&n) {
        return Err(Error::DivisionIndex(n));
    }
    let (x, y) = p.coords()?;
    let inv = model.invariants();
    let (b2, b4, b6, b8) = (&inv.b2, &inv.b4, &inv.b6, &inv.b8);

    let psi2 = Rational::from(2 * y) + Rational::from(model.a1() * x) + model.a3();
    let x2 = Rational::from(x * x);
    let x3 = Rational::from(&x2 * x);
    let x4 = Rational::from(&x2 * &x2);
    let psi3 = Rational::from(3 * &x4)
        + Rational::from(b2 * &x3)
        + Rational::from(3 * b4) * &x2
        + Rational::from(3 * b6) * x
        + b8;
    if n == 1 {
        return Ok(Rational::from(1));
    }
    if n == 2 {
        return Ok(psi2);
    }
    if n == 3 {
        return Ok(psi3);
    }
    let x5 = Rational::from(&x4 * x);
    let x6 = Rational::from(&x3 * &x3);
    let quartic_part = Rational::from(2 * &x6)
        + Rational::from(b2 * &x5)
        + Rational::from(5 * b4) * &x4
        + Rational::from(10 * b6) * &x3
        + Rational::from(10 * b8) * &x2
        + (Rational::from(b2 * b8) - Rational::from(b4 * b6)) * x
        + (Rational::from(b4 * b8) - Rational::from(b6 * b6));
    let psi4 = Rational::from(&psi2 * &quartic_part);
    if n == 4 {
        return Ok(psi4);
    }
    // psi_5 = psi_4 psi_2^3 - psi_1 psi_3^3
    let psi2_cubed = Rational::from(&psi2 * &psi2) * &psi2;
    let psi3_cubed = Rational::from(&psi3 * &psi3) * &psi3;
    Ok(psi4 * psi2_cubed - psi3_cubed)
}

/// `log max(|num x|, den x)`; zero at infinity.
pub fn naive_x_height(p: &CurvePoint) -> f64 {
    match p.x() {
        None => 0.0,
        Some(x) => {
            let num = if *x.numer() == 0 {
                0.0
            } else {
                ln_abs_int(x.numer())
            };
            num.max(ln_abs_int(x.denom()))
        }
    }
}

/// x-coordinate of `2P` from `x(P)` alone; `None` when `2P` is the point at
/// infinity.
pub fn double_x(model: &WeierstrassModel, x: &Rational) -> Option<Rational> {
    let inv = model.invariants();
    let x2 = Rational::from(x * x);
    let den = Rational::from(4 * x) * &x2
        + Rational::from(&inv.b2 * &x2)
        + Rational::from(2 * &inv.b4) * x
        + &inv.b6;
    if den == 0 {
        return None;
    }
    let num = Rational::from(&x2 * &x2)
        - Rational::from(&inv.b4 * &x2)
        - Rational::from(2 * &inv.b6) * x
        - &inv.b8;
    Some(num / den)
}
