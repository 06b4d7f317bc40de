//! Néron local heights, canonical heights and height-discriminant sums.
//!
//! Normalization: `h(P) = 1/2 lim 4^-n h_x(2^n P)`, half of what most
//! software reports. Local heights satisfy
//! `lambda_v(nP) = n^2 lambda_v(P) - log|psi_n(P)|_v + ((n^2 - 1)/12) log|Delta|_v`
//! at every place and sum to the canonical height.

mod arch;
mod nonarch;
mod torus;

use std::fmt;

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::exactnum::{factorize, ln_abs_int, DEFAULT_FACTOR_BOUND};
use crate::localdata::{global_data_with_bound, GlobalReductionData, LocalReductionData};
use crate::weierstrass::{sub_points, CurvePoint, WeierstrassModel};

pub use arch::arch_local_height;
pub use nonarch::{
    component_fraction, division_relation_height, ij_decomposition, in_e0, nonarch_local_height,
};
pub use torus::{j_tau, reduce_tau, torus_neron, TorusPoint};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeightConfig {
    pub series_tol: f64,
    pub doubling_oracle_steps: u32,
}

impl Default for HeightConfig {
    fn default() -> Self {
        HeightConfig {
            series_tol: 1e-12,
            doubling_oracle_steps: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Infinity,
    Prime(Integer),
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Infinity => f.write_str("inf"),
            Place::Prime(p) => write!(f, "p{p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalHeightBreakdown {
    pub place: Place,
    pub lambda: f64,
    /// Component fraction, at multiplicative primes.
    pub r_value: Option<Rational>,
    pub i_part: Option<f64>,
    pub j_part: Option<f64>,
}

/// Periodic second Bernoulli polynomial `{t}^2 - {t} + 1/6`.
pub fn b2_periodic(t: f64) -> f64 {
    let f = t - t.floor();
    f * f - f + 1.0 / 6.0
}

/// `1/2 4^-n h_x(2^n P)` with exact doubling on the given model.
pub fn doubling_limit_height(model: &WeierstrassModel, pt: &CurvePoint, steps: u32) -> f64 {
    let x = match pt.x() {
        None => return 0.0,
        Some(x) => x,
    };
    // b-invariants over a common denominator
    let inv = model.invariants();
    let bs = [&inv.b2, &inv.b4, &inv.b6, &inv.b8];
    let mut den = Integer::from(1);
    for b in bs {
        den.lcm_mut(b.denom());
    }
    let [b2, b4, b6, b8] = bs.map(|b| b.numer() * Integer::from(&den / b.denom()));
    // common factors of the doubled pair divide the resultant, a power of
    // Delta up to small constants, so gcds are taken modulo a multiple of it
    let disc = model.discriminant();
    let mut res = disc.numer() * Integer::from(disc.denom().square_ref());
    res = Integer::from(res.square_ref()).square() * Integer::from(den.square_ref()).square().square();
    res *= Integer::from(Integer::u_pow_u(6, 16));
    res.abs_mut();
    // x = X / Z in lowest terms
    let (mut xn, mut zn) = (x.numer().clone(), x.denom().clone());
    for _ in 0..steps {
        let x2 = Integer::from(xn.square_ref());
        let z2 = Integer::from(zn.square_ref());
        let xz = Integer::from(&xn * &zn);
        // Z^4 and X Z^3
        let z4 = Integer::from(z2.square_ref());
        let xz3 = Integer::from(&xz * &z2);
        let x2z2 = Integer::from(&x2 * &z2);
        let mut num = Integer::from(x2.square_ref()) * &den;
        num -= Integer::from(&b4 * &x2z2);
        num -= Integer::from(&b6 * &xz3) * 2u32;
        num -= Integer::from(&b8 * &z4);
        let mut dn = Integer::from(&x2 * &xz) * 4u32 * &den;
        dn += Integer::from(&b2 * &x2z2);
        dn += Integer::from(&b4 * &xz3) * 2u32;
        dn += Integer::from(&b6 * &z4);
        if dn == 0 {
            return 0.0;
        }
        let g = Integer::from(Integer::from(&num % &res).gcd_ref(&res));
        let g = g.gcd(&Integer::from(&dn % &res));
        num.div_exact_mut(&g);
        dn.div_exact_mut(&g);
        if dn < 0 {
            num = -num;
            dn = -dn;
        }
        xn = num;
        zn = dn;
    }
    let h = ln_abs_int(&xn).max(ln_abs_int(&zn));
    0.5 * h / 4f64.powi(steps as i32)
}

/// Heights on a fixed curve. Points are given on the input model and are
/// moved to the minimal model internally.
#[derive(Clone, Debug)]
pub struct CurveHeights {
    input: WeierstrassModel,
    data: GlobalReductionData,
    config: HeightConfig,
}

impl CurveHeights {
    pub fn new(model: &WeierstrassModel, config: HeightConfig) -> Result<Self> {
        Self::with_factor_bound(model, config, DEFAULT_FACTOR_BOUND)
    }

    pub fn with_factor_bound(
        model: &WeierstrassModel,
        config: HeightConfig,
        factor_bound: u32,
    ) -> Result<Self> {
        let data = global_data_with_bound(model, factor_bound)?;
        Ok(Self::from_data(model.clone(), data, config))
    }

    pub fn from_data(input: WeierstrassModel, data: GlobalReductionData, config: HeightConfig) -> Self {
        CurveHeights {
            input,
            data,
            config,
        }
    }

    pub fn data(&self) -> &GlobalReductionData {
        &self.data
    }

    pub fn input_model(&self) -> &WeierstrassModel {
        &self.input
    }

    pub fn minimal(&self) -> &WeierstrassModel {
        &self.data.minimal
    }

    pub fn config(&self) -> &HeightConfig {
        &self.config
    }

    pub fn to_minimal(&self, pt: &CurvePoint) -> CurvePoint {
        self.data.transform.map_point(pt)
    }

    fn local_data(&self, p: &Integer) -> LocalReductionData {
        self.data.local_or_good(p)
    }

    /// `lambda_v(P)` for `P` on the input model.
    pub fn local_height(&self, place: &Place, pt: &CurvePoint) -> Result<f64> {
        let m = self.to_minimal(pt);
        match place {
            Place::Infinity => arch_local_height(self.minimal(), &m, &self.config),
            Place::Prime(p) => nonarch_local_height(self.minimal(), &self.local_data(p), &m),
        }
    }

    /// Sum of `lambda_p(P)` over all good primes: half the log of the part
    /// of the denominator of `x` prime to the bad primes.
    pub fn good_primes_height(&self, pt: &CurvePoint) -> Result<f64> {
        let m = self.to_minimal(pt);
        let (x, _) = m.coords()?;
        let mut den = x.denom().clone();
        for p in self.data.bad_primes() {
            den.remove_factor_mut(p);
        }
        Ok(0.5 * ln_abs_int(&den))
    }

    pub fn canonical_height(&self, pt: &CurvePoint) -> Result<f64> {
        if pt.is_infinity() {
            return Ok(0.0);
        }
        let mut h = self.local_height(&Place::Infinity, pt)?;
        for p in self.data.bad_primes() {
            h += self.local_height(&Place::Prime(p.clone()), pt)?;
        }
        Ok(h + self.good_primes_height(pt)?)
    }

    /// Places where `lambda_v(P)` can be nonzero: the real place, the bad
    /// primes and the good primes dividing the denominator of `x(P)`.
    pub fn support(&self, pt: &CurvePoint) -> Result<Vec<Place>> {
        let m = self.to_minimal(pt);
        let (x, _) = m.coords()?;
        let mut primes: Vec<Integer> = self.data.bad_primes().cloned().collect();
        let den = x.denom();
        if *den != 1 {
            let root = den.clone().sqrt();
            for p in factorize(&root, DEFAULT_FACTOR_BOUND)?.primes() {
                if !primes.contains(p) {
                    primes.push(p.clone());
                }
            }
        }
        primes.sort();
        let mut places = vec![Place::Infinity];
        places.extend(primes.into_iter().map(Place::Prime));
        Ok(places)
    }

    /// Per-place local heights of `P`, with the `(r, i, j)` split at
    /// multiplicative primes (taken against the origin, `i + j = lambda`).
    pub fn breakdown(&self, pt: &CurvePoint) -> Result<Vec<LocalHeightBreakdown>> {
        let m = self.to_minimal(pt);
        self.support(pt)?
            .into_iter()
            .map(|place| {
                let lambda = self.local_height(&place, pt)?;
                let mut row = LocalHeightBreakdown {
                    place: place.clone(),
                    lambda,
                    r_value: None,
                    i_part: None,
                    j_part: None,
                };
                if let Place::Prime(p) = &place {
                    let local = self.local_data(p);
                    if local.reduction.is_multiplicative() {
                        let r = component_fraction(self.minimal(), &local, &m)?;
                        let j = 0.5 * b2_periodic(r.to_f64()) * local.delta as f64 * local.log_p();
                        row.r_value = Some(r);
                        row.i_part = Some(lambda - j);
                        row.j_part = Some(j);
                    }
                }
                Ok(row)
            })
            .collect()
    }

    /// `(i_v, j_v)` of `P - Q` at a multiplicative prime.
    pub fn ij_decomposition(&self, p: &Integer, a: &CurvePoint, b: &CurvePoint) -> Result<(f64, f64)> {
        ij_decomposition(self.minimal(), &self.local_data(p), &self.to_minimal(a), &self.to_minimal(b))
    }

    /// Pairwise differences `P_i - P_j`, `i != j`, on the input model.
    fn differences(&self, z: &[CurvePoint]) -> Result<Vec<CurvePoint>> {
        check_distinct(z)?;
        let mut out = Vec::with_capacity(z.len() * z.len().saturating_sub(1));
        for (i, a) in z.iter().enumerate() {
            for (j, b) in z.iter().enumerate() {
                if i != j {
                    out.push(sub_points(&self.input, a, b));
                }
            }
        }
        Ok(out)
    }

    /// `Lambda_v(Z) = N^-2 sum_{i != j} lambda_v(P_i - P_j)`.
    pub fn lambda_sum(&self, z: &[CurvePoint], place: &Place) -> Result<f64> {
        let n = z.len() as f64;
        let mut s = 0.0;
        for d in self.differences(z)? {
            s += self.local_height(place, &d)?;
        }
        Ok(s / (n * n))
    }

    /// Good-prime part of `Lambda(Z)`, summed over all good primes at once.
    pub fn good_primes_lambda_sum(&self, z: &[CurvePoint]) -> Result<f64> {
        let n = z.len() as f64;
        let mut s = 0.0;
        for d in self.differences(z)? {
            s += self.good_primes_height(&d)?;
        }
        Ok(s / (n * n))
    }

    /// `Lambda(Z) = N^-2 sum_{i,j} h(P_i - P_j)`.
    pub fn height_disc_sum(&self, z: &[CurvePoint]) -> Result<f64> {
        let n = z.len() as f64;
        let mut s = 0.0;
        for d in self.differences(z)? {
            s += self.canonical_height(&d)?;
        }
        Ok(s / (n * n))
    }

    pub fn doubling_limit_height(&self, pt: &CurvePoint) -> f64 {
        doubling_limit_height(&self.input, pt, self.config.doubling_oracle_steps)
    }
}

fn check_distinct(z: &[CurvePoint]) -> Result<()> {
    if z.is_empty() {
        return Err(Error::EmptySet);
    }
    for (i, a) in z.iter().enumerate() {
        if z[i + 1..].contains(a) {
            return Err(Error::DuplicatePoints);
        }
    }
    Ok(())
}

pub fn canonical_height(model: &WeierstrassModel, pt: &CurvePoint, config: &HeightConfig) -> Result<f64> {
    if pt.is_infinity() {
        return Ok(0.0);
    }
    CurveHeights::new(model, *config)?.canonical_height(pt)
}

pub fn lambda_sum(
    model: &WeierstrassModel,
    z: &[CurvePoint],
    place: &Place,
    config: &HeightConfig,
) -> Result<f64> {
    CurveHeights::new(model, *config)?.lambda_sum(z, place)
}

pub fn height_disc_sum(model: &WeierstrassModel, z: &[CurvePoint], config: &HeightConfig) -> Result<f64> {
    CurveHeights::new(model, *config)?.height_disc_sum(z)
}

#[cfg(test)]
mod tests;
