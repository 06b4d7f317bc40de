//! Exact integer and rational arithmetic support: factorization, primality
//! and p-adic valuations.
//!
//! Arbitrary-precision values are GMP-backed (`rug`). Everything else here
//! (trial division, Brent's variant of Pollard rho, Miller-Rabin) is local so
//! that factorizations are reproducible across platforms and library
//! versions.

use std::f64::consts::LN_2;

pub use rug::{Integer, Rational};
use rug::ops::Pow;

use crate::error::{Error, Result};

/// Owned powers of borrowed values.
pub trait PowRef {
    fn pow_ref(&self, e: u32) -> Self;
}

impl PowRef for Integer {
    fn pow_ref(&self, e: u32) -> Integer {
        Integer::from(self.pow(e))
    }
}

impl PowRef for Rational {
    fn pow_ref(&self, e: u32) -> Rational {
        Rational::from(self.pow(e))
    }
}

/// Default trial-division bound.
pub const DEFAULT_FACTOR_BOUND: u32 = 100_000;

/// Number of rho polynomials `x^2 + c` tried before giving up on a cofactor.
const RHO_ATTEMPTS: u32 = 12;
/// Iteration cap per rho polynomial.
const RHO_ITERATIONS: u64 = 1 << 22;

/// Miller-Rabin bases 2..=41; deterministic below 3.3 * 10^24.
const MR_BASES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];
/// Extra bases used above the deterministic range.
const MR_EXTRA_BASES: [u32; 12] = [43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97];

/// A signed prime factorization `sign * prod p^e` with strictly increasing
/// primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    sign: i32,
    factors: Vec<(Integer, u32)>,
}

impl Factorization {
    pub fn sign(&self) -> i32 {
        self.sign
    }

    pub fn factors(&self) -> &[(Integer, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = &Integer> {
        self.factors.iter().map(|(p, _)| p)
    }

    pub fn exponent_of(&self, p: &Integer) -> u32 {
        self.factors
            .iter()
            .find(|(q, _)| q == p)
            .map_or(0, |(_, e)| *e)
    }

    /// Multiplies the factorization back out.
    pub fn value(&self) -> Integer {
        let mut acc = Integer::from(self.sign);
        for (p, e) in &self.factors {
            acc *= p.pow_ref(*e);
        }
        acc
    }

    fn from_unsorted(sign: i32, mut primes: Vec<Integer>) -> Self {
        primes.sort();
        let mut factors: Vec<(Integer, u32)> = Vec::new();
        for p in primes {
            match factors.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => factors.push((p, 1)),
            }
        }
        Factorization { sign, factors }
    }
}

/// Factors a nonzero integer: trial division up to `bound`, then Miller-Rabin
/// and Pollard rho on whatever is left.
pub fn factorize(n: &Integer, bound: u32) -> Result<Factorization> {
    if *n == 0 {
        return Err(Error::ZeroInput);
    }
    let sign = if *n < 0 { -1 } else { 1 };
    let mut m = Integer::from(n.abs_ref());
    let mut primes = Vec::new();

    let mut d: u32 = 2;
    while d <= bound.max(2) {
        if Integer::from(d) * d > m {
            break;
        }
        while m.is_divisible_u(d) {
            m.div_exact_u_mut(d);
            primes.push(Integer::from(d));
        }
        d = if d == 2 { 3 } else { d + 2 };
    }
    if m == 1 {
        return Ok(Factorization::from_unsorted(sign, primes));
    }
    let bound_sq = Integer::from(bound) * bound;
    if m <= bound_sq || Integer::from(d) * d > m {
        primes.push(m);
        return Ok(Factorization::from_unsorted(sign, primes));
    }

    let mut stack = vec![m];
    while let Some(c) = stack.pop() {
        if c == 1 {
            continue;
        }
        if is_prime(&c) {
            primes.push(c);
            continue;
        }
        if let Some(root) = perfect_power_root(&c) {
            let k = {
                let mut t = c.clone();
                t.remove_factor_mut(&root)
            };
            for _ in 0..k {
                stack.push(root.clone());
            }
            continue;
        }
        match pollard_rho(&c) {
            Some(f) => {
                let g = Integer::from(&c / &f);
                stack.push(f);
                stack.push(g);
            }
            None => return Err(Error::UnfactoredPart(c)),
        }
    }
    Ok(Factorization::from_unsorted(sign, primes))
}

fn perfect_power_root(n: &Integer) -> Option<Integer> {
    if !n.is_perfect_power() {
        return None;
    }
    let bits = n.significant_bits();
    for k in (2..=bits).rev() {
        let (root, rem) = n.clone().root_rem(Integer::new(), k);
        if rem == 0 && root > 1 {
            return Some(root);
        }
    }
    None
}

/// Miller-Rabin with bases 2..41, which is a proof below 3.3 * 10^24; above
/// that range twelve more prime bases are added.
pub fn is_prime(n: &Integer) -> bool {
    if *n < 2 {
        return false;
    }
    for &b in MR_BASES.iter().chain(MR_EXTRA_BASES.iter()) {
        if *n == b {
            return true;
        }
        if n.is_divisible_u(b) {
            return false;
        }
    }
    let n_minus_1 = Integer::from(n - 1u32);
    let s = n_minus_1.find_one(0).unwrap_or(0);
    let d = Integer::from(&n_minus_1 >> s);

    let witness = |a: u32| -> bool {
        let mut x = match Integer::from(a).pow_mod(&d, n) {
            Ok(x) => x,
            Err(_) => return false,
        };
        if x == 1 || x == n_minus_1 {
            return false;
        }
        for _ in 1..s {
            x = x.square() % n;
            if x == n_minus_1 {
                return false;
            }
        }
        true
    };

    let limit: Integer = "3317044064679887385961981".parse().unwrap();
    let extra: &[u32] = if *n < limit { &[] } else { &MR_EXTRA_BASES };
    !MR_BASES.iter().chain(extra).any(|&a| witness(a))
}

/// Brent's cycle-finding variant of Pollard rho with deterministic seeds.
fn pollard_rho(n: &Integer) -> Option<Integer> {
    if n.is_even() {
        return Some(Integer::from(2));
    }
    for c in 1..=RHO_ATTEMPTS {
        let f = |x: &Integer| -> Integer { (x.clone().square() + c) % n };
        let mut y = Integer::from(2);
        let mut r: u64 = 1;
        let mut q = Integer::from(1);
        let mut g = Integer::from(1);
        let mut x = Integer::new();
        let mut ys = Integer::new();
        let m: u64 = 128;
        let mut steps: u64 = 0;
        while g == 1 && steps < RHO_ITERATIONS {
            x.clone_from(&y);
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys.clone_from(&y);
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    let diff = Integer::from(&x - &y).abs();
                    q = q * diff % n;
                }
                g = q.clone().gcd(n);
                k += m;
            }
            steps += r;
            r *= 2;
        }
        if g == *n {
            loop {
                ys = f(&ys);
                g = Integer::from(&x - &ys).abs().gcd(n);
                if g > 1 {
                    break;
                }
            }
        }
        if g > 1 && g != *n {
            return Some(g);
        }
    }
    None
}

/// Exponent of `p` in a nonzero integer.
pub fn ord_int(n: &Integer, p: &Integer) -> Option<u32> {
    if *n == 0 {
        return None;
    }
    let mut m = n.clone();
    Some(m.remove_factor_mut(p))
}

/// `ord_p(q)` for nonzero rational `q`.
pub fn valuation(q: &Rational, p: &Integer) -> Result<i64> {
    if *q == 0 {
        return Err(Error::ZeroInput);
    }
    let num = ord_int(q.numer(), p).unwrap_or(0) as i64;
    let den = ord_int(q.denom(), p).unwrap_or(0) as i64;
    Ok(num - den)
}

/// Valuation where zero maps to `None` (used as +infinity by callers).
pub fn valuation_or_inf(q: &Rational, p: &Integer) -> Option<i64> {
    valuation(q, p).ok()
}

/// Natural log of |n| for nonzero `n`, accurate for arbitrarily large inputs.
pub fn ln_abs_int(n: &Integer) -> f64 {
    let (m, e) = n.to_f64_exp();
    m.abs().ln() + f64::from(e) * LN_2
}

/// Natural log of |q| for nonzero `q`.
pub fn ln_abs(q: &Rational) -> f64 {
    ln_abs_int(q.numer()) - ln_abs_int(q.denom())
}

/// Least nonnegative residue.
pub fn modp(a: &Integer, p: &Integer) -> Integer {
    let mut r = Integer::from(a % p);
    if r < 0 {
        r += p;
    }
    r
}

/// Inverse of `a` modulo prime `p`; `None` if `p | a`.
pub fn inv_mod(a: &Integer, p: &Integer) -> Option<Integer> {
    modp(a, p).invert(p).ok()
}

/// Legendre symbol for an odd prime `p`.
pub fn legendre(a: &Integer, p: &Integer) -> i32 {
    modp(a, p).legendre(p)
}

/// Converts an exact rational to an integer if it is one.
pub fn as_integer(q: &Rational) -> Option<Integer> {
    (*q.denom() == 1).then(|| q.numer().clone())
}
