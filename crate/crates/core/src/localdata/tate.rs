//! Tate's algorithm over Z_p on an integral, globally minimal model.

use rug::Integer;

use super::{Kodaira, LocalReductionData, ReductionType};
use crate::error::{Error, Result};
use crate::exactnum::PowRef;
use crate::exactnum::{inv_mod, legendre, modp, ord_int};
use crate::weierstrass::WeierstrassModel;

/// Integral model with in-place `(r, s, t)` shifts (u = 1).
#[derive(Clone, Debug)]
pub(crate) struct IntModel {
    pub a1: Integer,
    pub a2: Integer,
    pub a3: Integer,
    pub a4: Integer,
    pub a6: Integer,
}

impl IntModel {
    pub fn from_model(model: &WeierstrassModel) -> Result<Self> {
        let [a1, a2, a3, a4, a6] = model
            .integer_coefficients()
            .ok_or_else(|| Error::InvariantViolation("model is not integral".into()))?;
        Ok(IntModel { a1, a2, a3, a4, a6 })
    }

    pub fn b2(&self) -> Integer {
        Integer::from(self.a1.square_ref()) + Integer::from(4 * &self.a2)
    }
    pub fn b4(&self) -> Integer {
        Integer::from(&self.a1 * &self.a3) + Integer::from(2 * &self.a4)
    }
    pub fn b6(&self) -> Integer {
        Integer::from(self.a3.square_ref()) + Integer::from(4 * &self.a6)
    }
    pub fn b8(&self) -> Integer {
        let (a1, a2, a3, a4, a6) = (&self.a1, &self.a2, &self.a3, &self.a4, &self.a6);
        Integer::from(a1.square_ref()) * a6 + Integer::from(4 * a2) * a6
            - Integer::from(a1 * a3) * a4
            + Integer::from(a2 * a3) * a3
            - Integer::from(a4.square_ref())
    }
    pub fn c4(&self) -> Integer {
        let b2 = self.b2();
        Integer::from(b2.square_ref()) - 24 * self.b4()
    }
    pub fn c6(&self) -> Integer {
        let b2 = self.b2();
        -b2.pow_ref(3) + Integer::from(36 * &b2) * self.b4() - 216 * self.b6()
    }
    pub fn discriminant(&self) -> Integer {
        let (b2, b4, b6, b8) = (self.b2(), self.b4(), self.b6(), self.b8());
        -Integer::from(b2.square_ref()) * &b8 - Integer::from(8 * &b4) * &b4 * &b4
            - Integer::from(27 * &b6) * &b6
            + Integer::from(9 * &b2) * &b4 * &b6
    }

    /// `x -> x + r`, `y -> y + s x + t`.
    pub fn shift(&mut self, r: &Integer, s: &Integer, t: &Integer) {
        let (a1, a2, a3, a4, a6) = (&self.a1, &self.a2, &self.a3, &self.a4, &self.a6);
        let rs = Integer::from(r * s);
        let na1 = a1 + Integer::from(2 * s);
        let na2 = (a2 - Integer::from(s * a1)) + Integer::from(3 * r)
            - Integer::from(s * s);
        let na3 = (a3 + Integer::from(r * a1)) + Integer::from(2 * t);
        let na4 = (a4 - Integer::from(s * a3)) + Integer::from(2 * r) * a2
            - Integer::from(t + &rs) * a1
            + Integer::from(3 * r) * r
            - Integer::from(2 * s) * t;
        let na6 = (a6 + Integer::from(r * a4))
            + Integer::from(r * r) * a2
            + Integer::from(r * r) * r
            - Integer::from(t * a3)
            - Integer::from(t * t)
            - Integer::from(r * t) * a1;
        self.a1 = na1;
        self.a2 = na2;
        self.a3 = na3;
        self.a4 = na4;
        self.a6 = na6;
    }
}

fn ord(n: &Integer, p: &Integer) -> u32 {
    ord_int(n, p).unwrap_or(u32::MAX)
}

fn divides_pow(n: &Integer, p: &Integer, k: u32) -> bool {
    ord(n, p) >= k
}

/// `(n / p^k) mod p`, assuming `p^k | n`.
fn reduced_quotient(n: &Integer, p: &Integer, k: u32) -> Integer {
    let pk = p.pow_ref(k);
    modp(&Integer::from(n / &pk), p)
}

fn half_mod(p: &Integer) -> Integer {
    inv_mod(&Integer::from(2), p).expect("p odd")
}

/// Whether `a X^2 + b X + c` (with `a` a unit) has a root in F_p.
fn quadratic_has_root(a: &Integer, b: &Integer, c: &Integer, p: &Integer) -> bool {
    if *p == 2 {
        return (0..2).any(|x| {
            let v = Integer::from(a * (x * x)) + Integer::from(b * x) + c;
            v.is_even()
        });
    }
    let disc = Integer::from(b.square_ref()) - Integer::from(4 * a) * c;
    legendre(&disc, p) >= 0
}

/// Roots in F_p with multiplicity of a monic cubic `T^3 + b T^2 + c T + d`.
#[derive(Debug, PartialEq, Eq)]
enum CubicRoots {
    Distinct(usize),
    Double(Integer),
    Triple(Integer),
}

fn cubic_root_structure(b: &Integer, c: &Integer, d: &Integer, p: &Integer) -> CubicRoots {
    let eval = |t: &Integer, k: &Integer, l: &Integer, m: &Integer| -> Integer {
        modp(
            &(t.pow_ref(3) + Integer::from(k * t) * t + Integer::from(l * t) + m),
            p,
        )
    };
    if *p <= 3 {
        // brute force with multiplicities via synthetic division
        let pu = p.to_u32().unwrap();
        let mut roots: Vec<(Integer, u32)> = Vec::new();
        for x in 0..pu {
            let x = Integer::from(x);
            if eval(&x, b, c, d) != 0 {
                continue;
            }
            // divide by (T - x): quotient T^2 + (b + x) T + (c + x(b + x))
            let q1 = Integer::from(b + &x);
            let q0 = c + Integer::from(&x * &q1);
            let mut mult = 1;
            let v2 = modp(&(Integer::from(x.square_ref()) + Integer::from(&q1 * &x) + &q0), p);
            if v2 == 0 {
                mult += 1;
                // remaining linear factor T + (q1 + x)
                if modp(&(Integer::from(&q1 + &x) + &x), p) == 0 {
                    mult += 1;
                }
            }
            roots.push((x, mult));
        }
        if let Some((x, _)) = roots.iter().find(|(_, m)| *m == 3) {
            return CubicRoots::Triple(x.clone());
        }
        if let Some((x, _)) = roots.iter().find(|(_, m)| *m == 2) {
            return CubicRoots::Double(x.clone());
        }
        return CubicRoots::Distinct(roots.len());
    }
    let bb = Integer::from(b.square_ref());
    let disc = Integer::from(&bb * c) * c - 4 * c.pow_ref(3)
        - Integer::from(4 * &bb) * b * d
        - Integer::from(27 * d) * d
        + Integer::from(18 * b) * c * d;
    if modp(&disc, p) != 0 {
        return CubicRoots::Distinct(count_roots_mod_p(&[d.clone(), c.clone(), b.clone()], p));
    }
    let x = &bb - Integer::from(3 * c);
    if modp(&x, p) == 0 {
        let inv3 = inv_mod(&Integer::from(3), p).unwrap();
        return CubicRoots::Triple(modp(&(-Integer::from(b * &inv3)), p));
    }
    let num = Integer::from(9 * d) - Integer::from(b * c);
    let den = inv_mod(&Integer::from(2 * &x), p).unwrap();
    CubicRoots::Double(modp(&(num * den), p))
}

/// Number of distinct roots in F_p of a monic cubic with lower coefficients
/// `[c0, c1, c2]`, via `deg gcd(f, T^p - T)`.
fn count_roots_mod_p(lower: &[Integer; 3], p: &Integer) -> usize {
    let f: Vec<Integer> = vec![
        modp(&lower[0], p),
        modp(&lower[1], p),
        modp(&lower[2], p),
        Integer::from(1),
    ];
    let xp = poly_powmod(&[Integer::new(), Integer::from(1)], p, &f, p);
    let mut g = xp;
    while g.len() < 2 {
        g.push(Integer::new());
    }
    g[1] -= 1;
    let g = poly_trim(g.into_iter().map(|c| modp(&c, p)).collect());
    let h = poly_gcd(f, g, p);
    h.len().saturating_sub(1)
}

fn poly_trim(mut a: Vec<Integer>) -> Vec<Integer> {
    while a.last().is_some_and(|c| *c == 0) {
        a.pop();
    }
    a
}

fn poly_mulmod(a: &[Integer], b: &[Integer], f: &[Integer], p: &Integer) -> Vec<Integer> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![Integer::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            prod[i + j] += Integer::from(x * y);
        }
    }
    poly_rem(prod.into_iter().map(|c| modp(&c, p)).collect(), f, p)
}

fn poly_rem(mut a: Vec<Integer>, f: &[Integer], p: &Integer) -> Vec<Integer> {
    a = poly_trim(a);
    let df = f.len() - 1;
    let lead_inv = inv_mod(&f[df], p).unwrap();
    while a.len() > df {
        let top = a.len() - 1;
        let coef = modp(&Integer::from(&a[top] * &lead_inv), p);
        for (i, fc) in f.iter().enumerate() {
            let idx = top - df + i;
            a[idx] = modp(&(Integer::from(&a[idx]) - Integer::from(&coef * fc)), p);
        }
        a = poly_trim(a);
    }
    a
}

fn poly_powmod(base: &[Integer], e: &Integer, f: &[Integer], p: &Integer) -> Vec<Integer> {
    let mut result = vec![Integer::from(1)];
    let mut b = poly_rem(base.to_vec(), f, p);
    let bits = e.significant_bits();
    for i in 0..bits {
        if e.get_bit(i) {
            result = poly_mulmod(&result, &b, f, p);
        }
        b = poly_mulmod(&b, &b, f, p);
    }
    result
}

fn poly_gcd(a: Vec<Integer>, b: Vec<Integer>, p: &Integer) -> Vec<Integer> {
    let (mut a, mut b) = (poly_trim(a), poly_trim(b));
    while !b.is_empty() {
        let r = poly_rem(a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Split test for multiplicative reduction: residue of `-c6` for `p >= 5`,
/// tangent slopes at the node for `p` in {2, 3}.
pub(crate) fn split_test(model: &IntModel, p: &Integer) -> Result<bool> {
    let c4 = model.c4();
    let disc = model.discriminant();
    if ord(&disc, p) == 0 || ord(&c4, p) > 0 {
        return Err(Error::NotMultiplicative(p.clone()));
    }
    if *p >= 5 {
        return Ok(legendre(&-model.c6(), p) == 1);
    }
    let mut m = model.clone();
    move_singular_point_to_origin(&mut m, p)?;
    // node tangents: T^2 + a1 T - a2 = 0 over F_p
    Ok(quadratic_has_root(&Integer::from(1), &m.a1, &Integer::from(-&m.a2), p))
}

fn move_singular_point_to_origin(m: &mut IntModel, p: &Integer) -> Result<()> {
    let (r, t) = if *p <= 3 {
        let pu = p.to_i64().unwrap();
        let mut found = None;
        'search: for x in 0..pu {
            for y in 0..pu {
                let (xi, yi) = (Integer::from(x), Integer::from(y));
                let f = Integer::from(yi.square_ref())
                    + Integer::from(&m.a1 * &xi) * &yi
                    + Integer::from(&m.a3 * &yi)
                    - xi.pow_ref(3)
                    - Integer::from(&m.a2 * &xi) * &xi
                    - Integer::from(&m.a4 * &xi)
                    - &m.a6;
                let fx = Integer::from(&m.a1 * &yi)
                    - Integer::from(3 * &xi) * &xi
                    - Integer::from(2 * &m.a2) * &xi
                    - &m.a4;
                let fy = Integer::from(2 * &yi) + Integer::from(&m.a1 * &xi) + &m.a3;
                if [f, fx, fy].iter().all(|v| v.is_divisible(p)) {
                    found = Some((xi, yi));
                    break 'search;
                }
            }
        }
        found.ok_or_else(|| Error::InvariantViolation(format!("no singular point mod {p}")))?
    } else {
        let c4 = m.c4();
        let b2 = m.b2();
        let r = if c4.is_divisible(p) {
            -(&b2 * inv_mod(&Integer::from(12), p).unwrap())
        } else {
            let num = m.c6() + Integer::from(&b2 * &c4);
            -num * inv_mod(&Integer::from(12 * &c4), p).unwrap()
        };
        let r = modp(&r, p);
        let t = modp(
            &(-Integer::from(&m.a1 * &r + &m.a3) * half_mod(p)),
            p,
        );
        (r, t)
    };
    m.shift(&r, &Integer::new(), &t);
    if !(m.a3.is_divisible(p) && m.a4.is_divisible(p) && m.a6.is_divisible(p)) {
        return Err(Error::InvariantViolation(format!(
            "singular point not moved to origin mod {p}"
        )));
    }
    Ok(())
}

fn check(cond: bool, what: &str, p: &Integer) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvariantViolation(format!(
            "tate at {p}: {what}"
        )))
    }
}

/// Runs Tate's algorithm at `p` on an integral minimal model.
pub(crate) fn tate(model: &WeierstrassModel, p: &Integer) -> Result<LocalReductionData> {
    let mut m = IntModel::from_model(model)?;
    let disc = m.discriminant();
    let delta = ord(&disc, p);
    let finish = |kodaira: Kodaira, tamagawa: u32, reduction: ReductionType| {
        let components = kodaira.components();
        LocalReductionData {
            p: p.clone(),
            delta,
            eta: delta + 1 - components,
            m: components,
            c: tamagawa,
            kodaira,
            reduction,
        }
    };
    if delta == 0 {
        return Ok(finish(Kodaira::I0, 1, ReductionType::Good));
    }
    let c4 = m.c4();
    if !c4.is_divisible(p) {
        let split = split_test(&m, p)?;
        let (c, reduction) = if split {
            (delta, ReductionType::SplitMultiplicative)
        } else {
            (2 - delta % 2, ReductionType::NonsplitMultiplicative)
        };
        return Ok(finish(Kodaira::In(delta), c, reduction));
    }

    move_singular_point_to_origin(&mut m, p)?;
    let add = ReductionType::Additive;

    if ord(&m.a6, p) < 2 {
        return Ok(finish(Kodaira::II, 1, add));
    }
    if ord(&m.b8(), p) < 3 {
        return Ok(finish(Kodaira::III, 2, add));
    }
    if ord(&m.b6(), p) < 3 {
        let a3t = reduced_quotient(&m.a3, p, 1);
        let a6t = reduced_quotient(&m.a6, p, 2);
        let c = if quadratic_has_root(&Integer::from(1), &a3t, &(-a6t), p) {
            3
        } else {
            1
        };
        return Ok(finish(Kodaira::IV, c, add));
    }

    // p | a1, a2; p^2 | a3, a4; p^3 | a6
    let s = if *p == 2 {
        modp(&m.a2, p)
    } else {
        modp(&(-(&m.a1 * half_mod(p))), p)
    };
    m.shift(&Integer::new(), &s, &Integer::new());
    let t = if *p == 2 {
        2 * reduced_quotient(&m.a6, p, 2)
    } else {
        let q = reduced_quotient(&m.a3, p, 1);
        p * modp(&(-q * half_mod(p)), p)
    };
    m.shift(&Integer::new(), &Integer::new(), &t);
    check(
        divides_pow(&m.a1, p, 1)
            && divides_pow(&m.a2, p, 1)
            && divides_pow(&m.a3, p, 2)
            && divides_pow(&m.a4, p, 2)
            && divides_pow(&m.a6, p, 3),
        "step 6 divisibility",
        p,
    )?;

    let b = reduced_quotient(&m.a2, p, 1);
    let c = reduced_quotient(&m.a4, p, 2);
    let d = reduced_quotient(&m.a6, p, 3);
    match cubic_root_structure(&b, &c, &d, p) {
        CubicRoots::Distinct(n) => Ok(finish(Kodaira::I0Star, 1 + n as u32, add)),
        CubicRoots::Double(root) => {
            let r = Integer::from(p * &root);
            m.shift(&r, &Integer::new(), &Integer::new());
            check(
                !divides_pow(&m.a2, p, 2)
                    && divides_pow(&m.a4, p, 3)
                    && divides_pow(&m.a6, p, 4),
                "double root at origin",
                p,
            )?;
            let (n, c) = in_star_loop(&mut m, p)?;
            Ok(finish(Kodaira::InStar(n), c, add))
        }
        CubicRoots::Triple(root) => {
            let r = Integer::from(p * &root);
            m.shift(&r, &Integer::new(), &Integer::new());
            check(
                divides_pow(&m.a2, p, 2) && divides_pow(&m.a4, p, 3) && divides_pow(&m.a6, p, 4),
                "triple root at origin",
                p,
            )?;
            let a3t = reduced_quotient(&m.a3, p, 2);
            let a6t = reduced_quotient(&m.a6, p, 4);
            let disc = Integer::from(a3t.square_ref()) + Integer::from(4 * &a6t);
            if !disc.is_divisible(p) {
                let c = if quadratic_has_root(&Integer::from(1), &a3t, &Integer::from(-&a6t), p)
                {
                    3
                } else {
                    1
                };
                return Ok(finish(Kodaira::IVStar, c, add));
            }
            let y0 = double_root_monic(&a3t, &a6t, p);
            let p2 = Integer::from(p.square_ref());
            m.shift(&Integer::new(), &Integer::new(), &Integer::from(&p2 * &y0));
            check(
                divides_pow(&m.a3, p, 3) && divides_pow(&m.a6, p, 5),
                "IV* shift",
                p,
            )?;
            if ord(&m.a4, p) < 4 {
                return Ok(finish(Kodaira::IIIStar, 2, add));
            }
            if ord(&m.a6, p) < 6 {
                return Ok(finish(Kodaira::IIStar, 1, add));
            }
            Err(Error::InvariantViolation(format!(
                "tate at {p}: model is not minimal"
            )))
        }
    }
}

/// Double root of `Y^2 + b Y - c` over F_p when its discriminant vanishes.
fn double_root_monic(b: &Integer, c: &Integer, p: &Integer) -> Integer {
    if *p == 2 {
        // Y^2 = c in F_2
        return modp(c, p);
    }
    modp(&(-(b * half_mod(p))), p)
}

/// The I_n^* subprocedure; returns `(n, c)`.
fn in_star_loop(m: &mut IntModel, p: &Integer) -> Result<(u32, u32)> {
    let mut ix: u32 = 3;
    let mut iy: u32 = 3;
    loop {
        let a2t = reduced_quotient(&m.a2, p, 1);
        let a3t = reduced_quotient(&m.a3, p, iy - 1);
        let a6t = reduced_quotient(&m.a6, p, ix + iy - 2);
        let disc = Integer::from(a3t.square_ref()) + Integer::from(4 * &a6t);
        if !disc.is_divisible(p) {
            let c = if quadratic_has_root(&Integer::from(1), &a3t, &Integer::from(-&a6t), p) {
                4
            } else {
                2
            };
            return Ok((ix + iy - 5, c));
        }
        let y0 = double_root_monic(&a3t, &a6t, p);
        let my = p.pow_ref(iy - 1);
        m.shift(&Integer::new(), &Integer::new(), &Integer::from(&my * &y0));
        iy += 1;
        check(
            divides_pow(&m.a3, p, iy - 1) && divides_pow(&m.a6, p, ix + iy - 2),
            "I_n* y-shift",
            p,
        )?;

        let a4t = reduced_quotient(&m.a4, p, ix);
        let a6t = reduced_quotient(&m.a6, p, ix + iy - 2);
        let disc = Integer::from(a4t.square_ref()) - Integer::from(4 * &a2t) * &a6t;
        if !disc.is_divisible(p) {
            let c = if quadratic_has_root(&a2t, &a4t, &a6t, p) { 4 } else { 2 };
            return Ok((ix + iy - 5, c));
        }
        let x0 = if *p == 2 {
            modp(&(&a6t * inv_mod(&a2t, p).unwrap()), p)
        } else {
            let den = inv_mod(&Integer::from(2 * &a2t), p).unwrap();
            modp(&(-Integer::from(&a4t * &den)), p)
        };
        let mx = p.pow_ref(ix - 1);
        m.shift(&Integer::from(&mx * &x0), &Integer::new(), &Integer::new());
        ix += 1;
        check(
            divides_pow(&m.a4, p, ix) && divides_pow(&m.a6, p, ix + iy - 2),
            "I_n* x-shift",
            p,
        )?;
        if ix + iy > 200 {
            return Err(Error::InvariantViolation("I_n* loop did not terminate".into()));
        }
    }
}
