//! Local height at the real place.
//!
//! Duplication series in `t = 1/x` after translating `x` so that every real
//! point has `x >= 1`. On the translated model `t` stays in `(0, 1]` along
//! the whole doubling orbit, so the series converges for every point.

use rug::Rational;

use crate::error::{Error, Result};
use crate::exactnum::ln_abs;
use crate::weierstrass::{CurvePoint, WeierstrassModel};

use super::HeightConfig;

const MAX_TERMS: usize = 200;

/// Real coefficients of `4x^3 + b2 x^2 + 2 b4 x + b6` and `b8`.
#[derive(Clone, Copy, Debug)]
struct RealB {
    b2: f64,
    b4: f64,
    b6: f64,
    b8: f64,
}

impl RealB {
    fn of(model: &WeierstrassModel) -> Self {
        let inv = model.invariants();
        RealB {
            b2: inv.b2.to_f64(),
            b4: inv.b4.to_f64(),
            b6: inv.b6.to_f64(),
            b8: inv.b8.to_f64(),
        }
    }

    fn cubic(&self, x: f64) -> f64 {
        ((4.0 * x + self.b2) * x + 2.0 * self.b4) * x + self.b6
    }

    /// b-invariants after `x = x' + r`.
    fn shifted(&self, r: f64) -> Self {
        let RealB { b2, b4, b6, b8 } = *self;
        RealB {
            b2: b2 + 12.0 * r,
            b4: b4 + r * b2 + 6.0 * r * r,
            b6: b6 + 2.0 * r * b4 + r * r * b2 + 4.0 * r.powi(3),
            b8: b8 + 3.0 * r * b6 + 3.0 * r * r * b4 + r.powi(3) * b2 + 3.0 * r.powi(4),
        }
    }

    /// Smallest real root of the 2-division cubic.
    fn smallest_root(&self) -> f64 {
        let bound = 1.0 + [self.b2 / 4.0, self.b4 / 2.0, self.b6 / 4.0]
            .iter()
            .fold(0.0f64, |m, c| m.max(c.abs()));
        // critical points of the cubic
        let (a, b, c) = (12.0, 2.0 * self.b2, 2.0 * self.b4);
        let disc = b * b - 4.0 * a * c;
        let (lo, hi) = if disc <= 0.0 {
            (-bound, bound)
        } else {
            let s = disc.sqrt();
            let c1 = (-b - s) / (2.0 * a);
            let c2 = (-b + s) / (2.0 * a);
            if self.cubic(c1) >= 0.0 {
                (-bound, c1)
            } else {
                (c2, bound)
            }
        };
        bisect(|x| self.cubic(x), lo, hi)
    }
}

/// Root of an increasing-through-zero function on `[lo, hi]`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `lambda_infinity(P)`.
pub fn arch_local_height(
    model: &WeierstrassModel,
    pt: &CurvePoint,
    config: &HeightConfig,
) -> Result<f64> {
    let (x, _) = pt.coords()?;
    let b = RealB::of(model);
    let shift = b.smallest_root() - 1.0;
    let sb = b.shifted(shift);

    let log_x = shifted_log(x, shift);
    let mut t = (-log_x).exp();

    let mut sum = 0.0;
    let mut weight = 1.0;
    for _ in 0..MAX_TERMS {
        let t2 = t * t;
        let w = 4.0 * t + sb.b2 * t2 + 2.0 * sb.b4 * t2 * t + sb.b6 * t2 * t2;
        let z = 1.0 - sb.b4 * t2 - 2.0 * sb.b6 * t2 * t - sb.b8 * t2 * t2;
        if !(z.is_finite() && z > 0.0 && w.is_finite()) {
            return Err(Error::NonConvergent);
        }
        let lz = z.ln();
        sum += weight * lz;
        if weight * (1.0 + lz.abs()) < config.series_tol {
            let log_disc = ln_abs(model.discriminant());
            return Ok(0.5 * log_x + sum / 8.0 - log_disc / 12.0);
        }
        t = w / z;
        weight /= 4.0;
    }
    Err(Error::NonConvergent)
}

/// `ln(x - shift)` for real points, which satisfy `x - shift >= 1`.
fn shifted_log(x: &Rational, shift: f64) -> f64 {
    let xf = x.to_f64();
    if xf.is_finite() && xf.abs() < 1e12 {
        return (xf - shift).ln();
    }
    let lx = ln_abs(x);
    lx + (-shift * (-lx).exp()).ln_1p()
}
