//! Local heights at finite primes.
//!
//! Normalized so that `lambda_p >= (delta_p / 12) log p` on points with
//! nonsingular reduction. Singular points are handled by the component
//! fraction at multiplicative primes and by the division relation at
//! additive primes.

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::exactnum::valuation_or_inf;
use crate::localdata::{LocalReductionData, ReductionType};
use crate::weierstrass::{division_polynomial, scalar_mul, sub_points, CurvePoint, WeierstrassModel};

use super::b2_periodic;

/// Largest multiplier tried by the division relation.
const MAX_DIVISION_INDEX: i64 = 5;

/// True iff `P` reduces to a nonsingular point mod `p` (the point at infinity
/// included). The model must be integral at `p`.
pub fn in_e0(model: &WeierstrassModel, p: &Integer, pt: &CurvePoint) -> bool {
    let (x, y) = match pt {
        CurvePoint::Infinity => return true,
        CurvePoint::Affine { x, y } => (x, y),
    };
    if matches!(valuation_or_inf(x, p), Some(v) if v < 0) {
        return true;
    }
    let [a1, a2, a3, a4, _] = model.a_invariants();
    let fx = Rational::from(3 * x) * x + Rational::from(2 * a2) * x + a4 - Rational::from(a1 * y);
    let fy = Rational::from(2 * y) + Rational::from(a1 * x) + a3;
    let divisible = |v: &Rational| valuation_or_inf(v, p).is_none_or(|k| k > 0);
    !(divisible(&fx) && divisible(&fy))
}

/// Height of a point known to lie in `E0`.
fn e0_height(local: &LocalReductionData, x: &Rational) -> f64 {
    let logp = local.log_p();
    let pole = valuation_or_inf(x, &local.p).map_or(0, |v| (-v).max(0));
    0.5 * pole as f64 * logp + local.delta as f64 / 12.0 * logp
}

fn ord_or_err(q: &Rational, p: &Integer) -> Result<i64> {
    valuation_or_inf(q, p).ok_or_else(|| {
        Error::InvariantViolation("division polynomial vanished at a non-torsion multiple".into())
    })
}

/// `lambda_p(P)` on a minimal model.
pub fn nonarch_local_height(
    model: &WeierstrassModel,
    local: &LocalReductionData,
    pt: &CurvePoint,
) -> Result<f64> {
    let (x, _) = pt.coords()?;
    if in_e0(model, &local.p, pt) {
        return Ok(e0_height(local, x));
    }
    match local.reduction {
        ReductionType::SplitMultiplicative | ReductionType::NonsplitMultiplicative => {
            let r = component_fraction(model, local, pt)?;
            Ok(0.5 * b2_periodic(r.to_f64()) * local.delta as f64 * local.log_p())
        }
        ReductionType::Additive => division_relation_height(model, local, pt),
        ReductionType::Good => Err(Error::InvariantViolation(format!(
            "singular reduction at good prime {}",
            local.p
        ))),
    }
}

/// `lambda_p(P)` through `lambda(nP) = n^2 lambda(P) - log|psi_n(P)| +
/// ((n^2-1)/12) log|Delta|`, with the least `n` putting `nP` in `E0`.
///
/// When `nP = O` first, uses `kP = +-P` for `k = n + 1` (or `n - 1` if
/// `n + 1` exceeds the available division polynomials).
pub fn division_relation_height(
    model: &WeierstrassModel,
    local: &LocalReductionData,
    pt: &CurvePoint,
) -> Result<f64> {
    pt.coords()?;
    let p = &local.p;
    let logp = local.log_p();
    let delta = local.delta as f64;
    for n in 1..=MAX_DIVISION_INDEX {
        let q = scalar_mul(model, n, pt);
        if let CurvePoint::Infinity = q {
            let k = if n < MAX_DIVISION_INDEX { n + 1 } else { n - 1 };
            let kk = (k * k - 1) as f64;
            let ord = ord_or_err(&division_polynomial(model, k, pt)?, p)?;
            return Ok((-(ord as f64) * logp + kk / 12.0 * delta * logp) / kk);
        }
        if in_e0(model, p, &q) {
            let lam_q = e0_height(local, q.x().expect("affine"));
            let nn = (n * n) as f64;
            let ord = ord_or_err(&division_polynomial(model, n, pt)?, p)?;
            return Ok((lam_q - ord as f64 * logp + (nn - 1.0) / 12.0 * delta * logp) / nn);
        }
    }
    Err(Error::InvariantViolation(format!(
        "no multiple up to {MAX_DIVISION_INDEX} reaches E0 at {p}"
    )))
}

/// Component fraction `r(P)` in `[0, 1/2]`, reduced modulo `t <-> 1 - t`.
pub fn component_fraction(
    model: &WeierstrassModel,
    local: &LocalReductionData,
    pt: &CurvePoint,
) -> Result<Rational> {
    if !local.reduction.is_multiplicative() {
        return Err(Error::NotMultiplicative(local.p.clone()));
    }
    if in_e0(model, &local.p, pt) {
        return Ok(Rational::new());
    }
    let (x, y) = pt.coords()?;
    let psi2 = Rational::from(2 * y) + Rational::from(model.a1() * x) + model.a3();
    let delta = i64::from(local.delta);
    // a component i <= delta/2 has ord psi_2 = i; the middle one may exceed it
    let b = valuation_or_inf(&psi2, &local.p).unwrap_or(i64::MAX);
    if b.saturating_mul(2) >= delta {
        Ok(Rational::from((1, 2)))
    } else {
        Ok(Rational::from((b, delta)))
    }
}

/// `(i_v, j_v)` for `P - Q` at a multiplicative prime.
pub fn ij_decomposition(
    model: &WeierstrassModel,
    local: &LocalReductionData,
    p: &CurvePoint,
    q: &CurvePoint,
) -> Result<(f64, f64)> {
    if !local.reduction.is_multiplicative() {
        return Err(Error::NotMultiplicative(local.p.clone()));
    }
    if p == q {
        return Err(Error::EqualPoints);
    }
    let d = sub_points(model, p, q);
    let lambda = nonarch_local_height(model, local, &d)?;
    let r = component_fraction(model, local, &d)?;
    let j = 0.5 * b2_periodic(r.to_f64()) * local.delta as f64 * local.log_p();
    Ok((lambda - j, j))
}
