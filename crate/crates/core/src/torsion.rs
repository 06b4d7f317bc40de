//! Rational torsion: an order bound from point counts at small good primes
//! and exact enumeration by Lutz-Nagell on the short model
//! `Y^2 = X^3 - 27 c4 X - 54 c6`.

use std::cmp::Ordering;
use std::fmt;

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::exactnum::{factorize, ord_int, DEFAULT_FACTOR_BOUND};
use crate::weierstrass::{scalar_mul, CurvePoint, WeierstrassModel};

/// Number of good odd primes whose point counts bound the torsion order.
const BOUND_PRIMES: usize = 5;
/// Only primes below this are used for the bound.
const BOUND_PRIME_LIMIT: u32 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TorsionStructure {
    /// `Z/n`.
    Cyclic(u32),
    /// `Z/2 x Z/2m`.
    Product(u32),
}

impl fmt::Display for TorsionStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TorsionStructure::Cyclic(1) => f.write_str("trivial"),
            TorsionStructure::Cyclic(n) => write!(f, "Z/{n}"),
            TorsionStructure::Product(m) => write!(f, "Z/2 x Z/{}", 2 * m),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionSubgroup {
    pub order: u32,
    pub structure: TorsionStructure,
    /// The point at infinity first, then affine points ordered by `(x, y)`.
    pub points: Vec<CurvePoint>,
    /// gcd of the point counts used as the order bound.
    pub reduction_bound: u64,
}

fn integral_coefficients(model: &WeierstrassModel) -> Result<[Integer; 5]> {
    model
        .integer_coefficients()
        .ok_or_else(|| Error::InvariantViolation("torsion needs an integral model".into()))
}

/// `#E(F_p)` for an odd prime `p` of good reduction, by enumeration.
pub fn point_count_mod_p(model: &WeierstrassModel, p: u32) -> Result<u64> {
    let pz = Integer::from(p);
    let disc = model.discriminant();
    let bad = || Error::BadPrime(pz.clone());
    if p < 3 || !crate::exactnum::is_prime(&pz) || !model.is_integral() {
        return Err(bad());
    }
    if disc.numer().is_divisible(&pz) {
        return Err(bad());
    }
    let inv = model.invariants();
    let red = |q: &Rational| -> u64 {
        let r = Integer::from(q.numer() % &pz);
        let r = if r < 0 { r + &pz } else { r };
        r.to_u64().expect("residue fits")
    };
    let p64 = u64::from(p);
    let (b2, b4, b6) = (red(&inv.b2), red(&inv.b4), red(&inv.b6));
    let mut is_square = vec![false; p as usize];
    for y in 0..p64 {
        is_square[(y * y % p64) as usize] = true;
    }
    // (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
    let mut count = 1u64;
    for x in 0..p64 {
        let f = ((4 * x % p64 + b2) % p64 * x % p64 * x % p64 + 2 * b4 % p64 * x % p64 + b6) % p64;
        count += if f == 0 {
            1
        } else if is_square[f as usize] {
            2
        } else {
            0
        };
    }
    Ok(count)
}

/// gcd of `#E(F_p)` over the first few good odd primes, with the primes used.
pub fn reduction_bound(model: &WeierstrassModel) -> Result<(u64, Vec<u32>)> {
    let mut g = 0u64;
    let mut used = Vec::new();
    for p in (3..BOUND_PRIME_LIMIT).filter(|&p| crate::exactnum::is_prime(&Integer::from(p))) {
        if used.len() == BOUND_PRIMES {
            break;
        }
        match point_count_mod_p(model, p) {
            Ok(n) => {
                g = gcd(g, n);
                used.push(p);
            }
            Err(Error::BadPrime(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if used.is_empty() {
        return Err(Error::InvariantViolation("no good odd prime below 100".into()));
    }
    Ok((g, used))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Integer roots of `X^3 + a X + b`.
fn integer_cubic_roots(a: &Integer, b: &Integer) -> Vec<Integer> {
    let g = |x: &Integer| -> Integer { Integer::from(x * x) * x + Integer::from(a * x) + b };
    // Cauchy bound on the roots
    let hi = Integer::from(a.abs_ref()).max(Integer::from(b.abs_ref())) + 1;
    let lo = Integer::from(-&hi);
    // monotone pieces, split at the critical points +-c, c = sqrt(-a/3)
    let pieces = if *a < 0 {
        let third: Integer = Integer::from(-a) / 3;
        let cf = third.clone().sqrt();
        let exact = Integer::from(&cf * &cf) * 3 == Integer::from(-a);
        let cc = if exact { cf.clone() } else { Integer::from(&cf + 1) };
        vec![
            (lo, Integer::from(-&cc)),
            (Integer::from(-&cf), cf),
            (cc, hi),
        ]
    } else {
        vec![(lo, hi)]
    };
    let mut roots = Vec::new();
    for (l, h) in pieces {
        if l > h {
            continue;
        }
        let (gl, gh) = (g(&l), g(&h));
        if gl == 0 {
            roots.push(l.clone());
        }
        if gh == 0 {
            roots.push(h.clone());
        }
        // need a strict sign change inside
        if gl.cmp0() == gh.cmp0() || gl == 0 || gh == 0 {
            continue;
        }
        let increasing = gl < 0;
        let (mut l, mut h) = (l, h);
        while Integer::from(&h - &l) > 1 {
            let mid = Integer::from(&l + &h) >> 1;
            let v = g(&mid);
            if v == 0 {
                roots.push(mid);
                break;
            }
            if (v > 0) == increasing {
                h = mid;
            } else {
                l = mid;
            }
        }
    }
    roots.sort();
    roots.dedup();
    roots
}

/// Positive divisors of `n`, from a factorization.
fn divisors(factors: &[(Integer, u32)]) -> Vec<Integer> {
    let mut out = vec![Integer::from(1)];
    for (p, e) in factors {
        let mut next = Vec::with_capacity(out.len() * (*e as usize + 1));
        for d in &out {
            let mut v = d.clone();
            for _ in 0..=*e {
                next.push(v.clone());
                v *= p;
            }
        }
        out = next;
    }
    out
}

fn point_order(model: &WeierstrassModel, t: &CurvePoint, bound: u64) -> Option<u32> {
    (1..=bound as i64)
        .find(|&k| scalar_mul(model, k, t).is_infinity())
        .map(|k| k as u32)
}

pub fn torsion_subgroup(model: &WeierstrassModel) -> Result<TorsionSubgroup> {
    torsion_subgroup_with_bound(model, DEFAULT_FACTOR_BOUND)
}

pub fn torsion_subgroup_with_bound(model: &WeierstrassModel, factor_bound: u32) -> Result<TorsionSubgroup> {
    let [a1, _, a3, _, _] = integral_coefficients(model)?;
    let (bound, _) = reduction_bound(model)?;
    let inv = model.invariants();
    let c4 = inv.c4.numer().clone();
    let c6 = inv.c6.numer().clone();
    let a = Integer::from(-27 * &c4);
    let b = Integer::from(-54 * &c6);

    // Y^2 divides 2^12 3^12 Delta
    let disc = inv.discriminant.numer().clone();
    let fac = factorize(&disc, factor_bound)?;
    let mut yfactors: Vec<(Integer, u32)> = Vec::new();
    for p in [2u32, 3] {
        let pz = Integer::from(p);
        let e = 12 + ord_int(&disc, &pz).unwrap_or(0);
        yfactors.push((pz, e / 2));
    }
    for (p, e) in fac.factors() {
        if *p > 3 && *e >= 2 {
            yfactors.push((p.clone(), e / 2));
        }
    }
    let mut ys = vec![Integer::new()];
    ys.extend(divisors(&yfactors));

    let mut points = vec![CurvePoint::Infinity];
    if bound > 1 {
        for ybig in &ys {
            let rhs = &b - Integer::from(ybig * ybig);
            for xbig in integer_cubic_roots(&a, &rhs) {
                // X = 36 x + 3 b2, Y = 108 (2y + a1 x + a3)
                let x: Rational = (Rational::from(&xbig) - Rational::from(3 * &inv.b2)) / 36;
                for sign in [1, -1] {
                    if sign == -1 && *ybig == 0 {
                        continue;
                    }
                    let psi2 = Rational::from(Integer::from(ybig * sign)) / 108;
                    let y = (psi2 - Rational::from(&a1 * &x) - &a3) / 2;
                    let t = CurvePoint::Affine { x: x.clone(), y };
                    if model.contains(&t) && point_order(model, &t, bound).is_some() {
                        points.push(t);
                    }
                }
            }
        }
    }
    points.sort_by(point_cmp);
    points.dedup();

    let order = points.len() as u32;
    if bound % u64::from(order) != 0 {
        return Err(Error::InvariantViolation(format!(
            "torsion order {order} does not divide reduction bound {bound}"
        )));
    }
    let two_torsion = points
        .iter()
        .filter(|t| scalar_mul(model, 2, t).is_infinity())
        .count();
    let structure = if two_torsion == 4 {
        TorsionStructure::Product(order / 4)
    } else {
        TorsionStructure::Cyclic(order)
    };
    if !mazur_allows(structure) {
        return Err(Error::InvariantViolation(format!(
            "torsion structure {structure} is not on Mazur's list"
        )));
    }
    Ok(TorsionSubgroup {
        order,
        structure,
        points,
        reduction_bound: bound,
    })
}

fn point_cmp(a: &CurvePoint, b: &CurvePoint) -> Ordering {
    match (a, b) {
        (CurvePoint::Infinity, CurvePoint::Infinity) => Ordering::Equal,
        (CurvePoint::Infinity, _) => Ordering::Less,
        (_, CurvePoint::Infinity) => Ordering::Greater,
        (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => {
            x1.cmp(x2).then_with(|| y1.cmp(y2))
        }
    }
}

/// Mazur's list, used only as a consistency check.
pub fn mazur_allows(s: TorsionStructure) -> bool {
    match s {
        TorsionStructure::Cyclic(n) => (1..=10).contains(&n) || n == 12,
        TorsionStructure::Product(m) => (1..=4).contains(&m),
    }
}
