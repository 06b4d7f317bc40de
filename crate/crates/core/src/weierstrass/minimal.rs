//! Global minimal models by the Laska-Kraus-Connell procedure.

use rug::{Integer, Rational};

use super::{ModelTransform, WeierstrassModel};
use crate::error::{Error, Result};
use crate::exactnum::PowRef;
use crate::exactnum::{factorize, ord_int, DEFAULT_FACTOR_BOUND};

/// Globally minimal model in reduced form (`a1, a3 in {0,1}`,
/// `a2 in {-1,0,1}`) together with the transform from the input model.
pub fn minimal_model(model: &WeierstrassModel) -> Result<(WeierstrassModel, ModelTransform)> {
    minimal_model_with_bound(model, DEFAULT_FACTOR_BOUND)
}

pub fn minimal_model_with_bound(
    model: &WeierstrassModel,
    factor_bound: u32,
) -> Result<(WeierstrassModel, ModelTransform)> {
    let to_integral = integral_scaling(model);
    let integral = to_integral.apply(model)?;

    let inv = integral.invariants();
    let c4 = inv.c4.numer().clone();
    let c6 = inv.c6.numer().clone();
    let disc = inv.discriminant.numer().clone();

    let g = Integer::from(c6.square_ref()).gcd(&disc);
    let mut u = Integer::from(1);
    for (p, _) in factorize(&g, factor_bound)?.factors() {
        let mut d = ord_int(&g, p).unwrap_or(0) / 12;
        if d == 0 {
            continue;
        }
        if *p == 2 {
            let a = Integer::from(&c4 >> (4 * d));
            let b = Integer::from(&c6 >> (6 * d));
            let b4 = Integer::from(b.mod_u(4));
            let b32 = b.mod_u(32);
            if b4 != 3 && !(a.mod_u(16) == 0 && (b32 == 0 || b32 == 8)) {
                d -= 1;
            }
        } else if *p == 3 && ord_int(&c6, p) == Some(6 * d + 2) {
            d -= 1;
        }
        u *= p.pow_ref(d);
    }

    let u4 = u.pow_ref(4);
    let u6 = u.pow_ref(6);
    let c4r = Integer::from(&c4 / &u4);
    let c6r = Integer::from(&c6 / &u6);

    let mut b2 = Integer::from(Integer::from(-&c6r).mod_u(12));
    if b2 > 6 {
        b2 -= 12;
    }
    let b4 = exact_div(Integer::from(b2.square_ref()) - &c4r, 24)?;
    let b6 = exact_div(
        -b2.pow_ref(3) + Integer::from(36 * &b2) * &b4 - &c6r,
        216,
    )?;
    let a1 = Integer::from(b2.mod_u(2));
    let a3 = Integer::from(b6.mod_u(2));
    let a2 = exact_div(Integer::from(&b2 - &a1), 4)?;
    let a4 = exact_div(&b4 - Integer::from(&a1 * &a3), 2)?;
    let a6 = exact_div(Integer::from(&b6 - &a3), 4)?;
    let reduced = WeierstrassModel::new([a1, a2, a3, a4, a6].map(Rational::from))?;

    let step = transform_between(&integral, &reduced, &Rational::from(u))?;
    Ok((reduced, to_integral.then(&step)))
}

fn exact_div(n: Integer, d: i32) -> Result<Integer> {
    if !n.is_divisible(&Integer::from(d)) {
        return Err(Error::InvariantViolation(format!(
            "minimal model: {n} not divisible by {d}"
        )));
    }
    Ok(n / d)
}

/// `u = 1/D` with D the lcm of all coefficient denominators.
fn integral_scaling(model: &WeierstrassModel) -> ModelTransform {
    let d = model
        .a_invariants()
        .iter()
        .fold(Integer::from(1), |acc, a| acc.lcm(a.denom()));
    ModelTransform {
        u: Rational::from((Integer::from(1), d)),
        ..ModelTransform::identity()
    }
}

/// Recovers `(r, s, t)` for a known scaling `u` between isomorphic models.
fn transform_between(
    from: &WeierstrassModel,
    to: &WeierstrassModel,
    u: &Rational,
) -> Result<ModelTransform> {
    for sign in [1, -1] {
        let u = Rational::from(u * sign);
        let [a1, a2, a3, ..] = from.a_invariants();
        let [b1, b2, b3, ..] = to.a_invariants();
        let s = (Rational::from(&u * b1) - a1) / 2;
        let r = (u.pow_ref(2) * b2 - a2 + Rational::from(&s * a1)
            + Rational::from(&s * &s))
            / 3;
        let t = (u.pow_ref(3) * b3 - a3 - Rational::from(&r * a1)) / 2;
        let tr = ModelTransform { u, r, s, t };
        if tr.apply(from)? == *to {
            return Ok(tr);
        }
    }
    Err(Error::InvariantViolation(
        "minimal model: no transform reproduces the reduced model".into(),
    ))
}
