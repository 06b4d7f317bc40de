//! Néron function on a complex torus `C / (Z + tau Z)` and the modular
//! `j`-function, both by q-series after reducing `tau` to the fundamental
//! domain.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::{b2_periodic, HeightConfig};

const MAX_TERMS: usize = 10_000;

/// `z = t1 + t2 * tau` on the torus of `tau`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusPoint {
    pub t1: f64,
    pub t2: f64,
    pub tau: Complex64,
}

impl TorusPoint {
    pub fn new(t1: f64, t2: f64, tau: Complex64) -> Self {
        TorusPoint { t1, t2, tau }
    }

    /// Same point of the torus described with `tau` in the fundamental
    /// domain `|tau| >= 1`, `|Re tau| <= 1/2`.
    pub fn reduced(&self) -> TorusPoint {
        let (tau, [a, b, c, d]) = reduce_tau(self.tau);
        let (a, b, c, d) = (a as f64, b as f64, c as f64, d as f64);
        TorusPoint {
            t1: a * self.t1 - b * self.t2,
            t2: -c * self.t1 + d * self.t2,
            tau,
        }
    }
}

/// Reduces `tau` to the fundamental domain; returns the reduced value and
/// `[a, b, c, d]` with `tau' = (a tau + b) / (c tau + d)`.
pub fn reduce_tau(tau: Complex64) -> (Complex64, [i64; 4]) {
    let mut t = tau;
    let mut m = [1i64, 0, 0, 1];
    for _ in 0..1000 {
        let k = t.re.round();
        if k != 0.0 {
            t.re -= k;
            let k = k as i64;
            m = [m[0] - k * m[2], m[1] - k * m[3], m[2], m[3]];
        }
        if t.norm_sqr() < 1.0 - 1e-15 {
            t = -t.inv();
            m = [-m[2], -m[3], m[0], m[1]];
        } else {
            break;
        }
    }
    (t, m)
}

fn nome(tau: Complex64) -> Complex64 {
    (Complex64::new(0.0, 2.0 * PI) * tau).exp()
}

/// `j(tau) = E4^3 / Delta` with `Delta = q prod (1 - q^n)^24`, which equals
/// `(E4^3 - E6^2) / 1728` without the cancellation for small `q`.
pub fn j_tau(tau: Complex64) -> Complex64 {
    let (t, _) = reduce_tau(tau);
    let q = nome(t);
    let mut e4 = Complex64::new(0.0, 0.0);
    let mut prod = Complex64::new(1.0, 0.0);
    let mut qn = q;
    for n in 1..MAX_TERMS {
        let nf = n as f64;
        e4 += qn / (1.0 - qn) * nf.powi(3);
        prod *= (1.0 - qn).powi(24);
        if qn.norm() * nf.powi(3) < 1e-18 {
            break;
        }
        qn *= q;
    }
    let e4 = 1.0 + 240.0 * e4;
    e4 * e4 * e4 / (q * prod)
}

/// Néron function
/// `lambda(z) = -1/2 B2(t2) log|q| - log|1 - w| - sum_n log|(1 - q^n w)(1 - q^n / w)|`
/// with `w = e^{2 pi i z}`, `q = e^{2 pi i tau}`.
pub fn torus_neron(z: &TorusPoint, config: &HeightConfig) -> Result<f64> {
    neron_series(&z.reduced(), config)
}

/// Series evaluation with the given `tau`, reduced or not.
fn neron_series(r: &TorusPoint, config: &HeightConfig) -> Result<f64> {
    // periodicity and evenness put t2 in [0, 1/2]
    let (mut t1, mut t2) = (r.t1 - r.t1.floor(), r.t2 - r.t2.floor());
    if t2 > 0.5 {
        t1 = -t1;
        t2 = 1.0 - t2;
    }
    if t2 == 0.0 && (t1 - t1.round()).abs() < 1e-300 {
        return Err(Error::LatticePoint);
    }
    let tau = r.tau;
    let q = nome(tau);
    let w = (Complex64::new(0.0, 2.0 * PI) * (t1 + t2 * tau)).exp();
    let log_q = q.norm().ln();
    let one = Complex64::new(1.0, 0.0);

    let first = (one - w).norm();
    if first == 0.0 {
        return Err(Error::LatticePoint);
    }
    let mut value = -0.5 * b2_periodic(t2) * log_q - first.ln();
    let aq = q.norm();
    let winv = w.inv();
    let mut qn = q;
    for n in 1..MAX_TERMS {
        let term = ((one - qn * w) * (one - qn * winv)).norm().ln();
        value -= term;
        // remaining terms are bounded by 2|q|^{n+1/2} / (1 - |q|) each factor
        let tail = 4.0 * aq.powf(n as f64 + 0.5) / (1.0 - aq);
        if tail < config.series_tol {
            return Ok(value);
        }
        qn *= q;
    }
    Err(Error::NonConvergent)
}
