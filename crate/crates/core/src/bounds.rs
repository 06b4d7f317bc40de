//! Explicit bounds: torsion order, Lang-type height lower bound, small-point
//! threshold, and the local lemmas on height-discriminant sums. Each check
//! produces a [`BoundReport`] comparing a computed `lhs` with a bound `rhs`.

use std::f64::consts::E;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{ln_abs, valuation};
use crate::heights::{j_tau, reduce_tau, torus_neron, CurveHeights, HeightConfig, Place, TorusPoint};
use crate::localdata::{LocalReductionData, ReductionType};
use crate::weierstrass::CurvePoint;

/// Numerical constants of the bounds. [`PaperConstants::default`] gives the
/// published values; other values are only useful for mutation runs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PaperConstants {
    pub c1: f64,
    pub c2: f64,
    pub lang_denominator_base: f64,
    /// `2^13 * 3`.
    pub threshold_divisor: f64,
    /// Coefficients of `log N`, `log+ |j|` and the constant in the
    /// archimedean lemma: `1/2`, `1/12`, `16/5`.
    pub elkies: (f64, f64, f64),
    /// Sampling radius and factor of the torus lemma: `1/24`, `1/288`.
    pub torus: (f64, f64),
    /// `e / (e - 1)`.
    pub tlem_factor: f64,
}

impl Default for PaperConstants {
    fn default() -> Self {
        PaperConstants {
            c1: 134_861.0,
            c2: 104_613.0,
            lang_denominator_base: 1e15,
            threshold_divisor: f64::from((1u32 << 13) * 3),
            elkies: (0.5, 1.0 / 12.0, 16.0 / 5.0),
            torus: (1.0 / 24.0, 1.0 / 288.0),
            tlem_factor: E / (E - 1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub d: u32,
    pub sigma: f64,
    pub log_norm_discriminant: f64,
}

impl BoundInputs {
    pub fn new(d: u32, sigma: f64, log_norm_discriminant: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvariantViolation("degree must be at least 1".into()));
        }
        if !(sigma >= 1.0 && sigma.is_finite()) {
            return Err(Error::InvariantViolation(format!("sigma {sigma} is below 1")));
        }
        if !(log_norm_discriminant >= 0.0 && log_norm_discriminant.is_finite()) {
            return Err(Error::InvariantViolation(format!(
                "log norm discriminant {log_norm_discriminant} is negative"
            )));
        }
        Ok(BoundInputs {
            d,
            sigma,
            log_norm_discriminant,
        })
    }

    /// `d sigma^2`.
    fn d_sigma2(&self) -> f64 {
        f64::from(self.d) * self.sigma * self.sigma
    }
}

/// `c1 d sigma^2 log(c2 d sigma^2)`.
pub fn torsion_bound(inputs: &BoundInputs, k: &PaperConstants) -> f64 {
    let s = inputs.d_sigma2();
    k.c1 * s * (k.c2 * s).ln()
}

/// `1 / (10^15 d^3 sigma^6 log^2(c2 d sigma^2))`.
pub fn lang_constant(inputs: &BoundInputs, k: &PaperConstants) -> f64 {
    let s = inputs.d_sigma2();
    let l = (k.c2 * s).ln();
    1.0 / (k.lang_denominator_base * s.powi(3) * l * l)
}

/// `log |N(Delta)| / (24576 d sigma^2)`.
pub fn small_height_threshold(inputs: &BoundInputs, k: &PaperConstants) -> f64 {
    inputs.log_norm_discriminant / (k.threshold_divisor * inputs.d_sigma2())
}

/// `e/(e-1) (A log A + B)`, an upper bound for every `N >= 1` with
/// `N <= A log N + B`.
pub fn tlem_bound(a: f64, b: f64, k: &PaperConstants) -> f64 {
    k.tlem_factor * (a * a.ln() + b)
}

/// Scan limit for [`tlem_brute`].
pub const TLEM_SCAN_LIMIT: u64 = 10_000;

/// Largest `N` in `1..=10^4` with `N <= A log N + B`, or 0.
pub fn tlem_brute(a: f64, b: f64) -> u64 {
    (1..=TLEM_SCAN_LIMIT)
        .rev()
        .find(|&n| n as f64 <= a * (n as f64).ln() + b)
        .unwrap_or(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundStatus {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for BoundStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundStatus::Pass => "pass",
            BoundStatus::Fail => "fail",
            BoundStatus::Skipped => "skipped",
        })
    }
}

/// One inequality check. `margin >= 0` means the inequality holds with room.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub label: String,
    pub check: String,
    pub place: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub status: BoundStatus,
    /// Set size, sample index or the reason a check was skipped.
    pub context: String,
}

impl BoundReport {
    fn new(check: &str, lhs: f64, rhs: f64, margin: f64, status: BoundStatus) -> Self {
        BoundReport {
            label: String::new(),
            check: check.to_string(),
            place: String::new(),
            lhs,
            rhs,
            margin,
            status,
            context: String::new(),
        }
    }

    fn status_of(margin: f64, slack: f64) -> BoundStatus {
        if margin >= -slack {
            BoundStatus::Pass
        } else {
            BoundStatus::Fail
        }
    }

    /// `lhs <= rhs + slack`.
    pub fn at_most(check: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        let margin = rhs - lhs;
        Self::new(check, lhs, rhs, margin, Self::status_of(margin, slack))
    }

    /// `lhs >= rhs - slack`.
    pub fn at_least(check: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        let margin = lhs - rhs;
        Self::new(check, lhs, rhs, margin, Self::status_of(margin, slack))
    }

    /// Exact integer equality.
    pub fn equal(check: &str, lhs: i64, rhs: i64) -> Self {
        let margin = -((lhs - rhs).abs() as f64);
        let status = if lhs == rhs {
            BoundStatus::Pass
        } else {
            BoundStatus::Fail
        };
        Self::new(check, lhs as f64, rhs as f64, margin, status)
    }

    /// `|lhs - rhs| <= tol`.
    pub fn close(check: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let margin = tol - (lhs - rhs).abs();
        Self::new(check, lhs, rhs, margin, Self::status_of(margin, 0.0))
    }

    pub fn skipped(check: &str, reason: impl Into<String>) -> Self {
        let mut r = Self::new(check, f64::NAN, f64::NAN, f64::NAN, BoundStatus::Skipped);
        r.context = reason.into();
        r
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    pub fn with_place(mut self, place: impl fmt::Display) -> Self {
        self.place = place.to_string();
        self
    }

    pub fn with_context(mut self, context: impl Into<String>) -> Self {
        self.context = context.into();
        self
    }

    pub fn forced_fail(mut self) -> Self {
        self.status = BoundStatus::Fail;
        self
    }

    pub fn passed(&self) -> bool {
        self.status == BoundStatus::Pass
    }
}

fn require_rational(inputs: &BoundInputs) -> Result<()> {
    if inputs.d != 1 {
        return Err(Error::UnsupportedDegree(inputs.d));
    }
    Ok(())
}

/// Torsion order against `torsion_bound`.
pub fn verify_theorem1(torsion_order: u32, inputs: &BoundInputs, k: &PaperConstants) -> Result<BoundReport> {
    require_rational(inputs)?;
    Ok(BoundReport::at_most(
        "theorem1",
        f64::from(torsion_order),
        torsion_bound(inputs, k),
        0.0,
    ))
}

/// Smallest height among supplied non-torsion points against
/// `lang_constant * log |N(Delta)|`. Points are `(name, height)`.
pub fn verify_theorem2(
    points: &[(String, f64)],
    inputs: &BoundInputs,
    k: &PaperConstants,
    tol: f64,
) -> Result<BoundReport> {
    require_rational(inputs)?;
    if let Some((name, _)) = points.iter().find(|(_, h)| *h <= 10.0 * tol) {
        return Err(Error::TorsionPointSupplied(name.clone()));
    }
    let rhs = lang_constant(inputs, k) * inputs.log_norm_discriminant;
    let Some(min) = points.iter().map(|(_, h)| *h).reduce(f64::min) else {
        return Ok(BoundReport::skipped("theorem2", "no non-torsion points"));
    };
    Ok(BoundReport::at_least("theorem2", min, rhs, tol).with_context(format!("points={}", points.len())))
}

/// Number of distinct known points of height at most the threshold against
/// `torsion_bound`. `heights` covers torsion and supplied points.
pub fn verify_prop41(heights: &[f64], inputs: &BoundInputs, k: &PaperConstants, tol: f64) -> Result<BoundReport> {
    require_rational(inputs)?;
    let threshold = small_height_threshold(inputs, k);
    let small = heights.iter().filter(|&&h| h <= threshold + tol).count();
    Ok(BoundReport::at_most("prop41", small as f64, torsion_bound(inputs, k), 0.0)
        .with_context(format!("points={} threshold={threshold:e}", heights.len())))
}

/// `Lambda_p(Z) >= (1/c^2 - 1/N) (delta/12) log p`.
pub fn verify_lemma31(heights: &CurveHeights, z: &[CurvePoint], p: &Integer, tol: f64) -> Result<BoundReport> {
    let local = heights.data().local_or_good(p);
    let n = z.len() as f64;
    let c = f64::from(local.c);
    let lhs = heights.lambda_sum(z, &Place::Prime(p.clone()))?;
    let rhs = (1.0 / (c * c) - 1.0 / n) * f64::from(local.delta) / 12.0 * local.log_p();
    Ok(BoundReport::at_least("lemma31", lhs, rhs, tol)
        .with_place(Place::Prime(p.clone()))
        .with_context(format!("N={}", z.len())))
}

/// `Lambda_inf(Z) >= -log N/(2N) - log+|j|/(12N) - 16/(5N)`.
pub fn verify_lemma32(
    heights: &CurveHeights,
    z: &[CurvePoint],
    tol: f64,
    k: &PaperConstants,
) -> Result<BoundReport> {
    let n = z.len() as f64;
    let j = heights.minimal().j_invariant();
    let log_plus_j = if *j == 0 { 0.0 } else { ln_abs(j).max(0.0) };
    let (a, b, c) = k.elkies;
    let lhs = heights.lambda_sum(z, &Place::Infinity)?;
    let rhs = -a * n.ln() / n - b * log_plus_j / n - c / n;
    Ok(BoundReport::at_least("lemma32", lhs, rhs, tol)
        .with_place(Place::Infinity)
        .with_context(format!("N={}", z.len())))
}

/// Samples `z = r1 + r2 tau` with `max |r_i| <= 1/24`, `z != 0`, on the
/// torus of `tau` moved to the fundamental domain, and compares the least
/// Néron value with `max(1, log|j(tau)|)/288`.
pub fn verify_hindry_torus(
    tau: Complex64,
    samples: usize,
    seed: u64,
    tol: f64,
    k: &PaperConstants,
    config: &HeightConfig,
) -> Result<BoundReport> {
    if samples == 0 || tau.im.is_nan() || tau.im <= 0.0 {
        return Err(Error::InvariantViolation("need samples >= 1 and Im tau > 0".into()));
    }
    let (tau, _) = reduce_tau(tau);
    let (radius, factor) = k.torus;
    let rhs = factor * j_tau(tau).norm().ln().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min = f64::INFINITY;
    let mut drawn = 0;
    while drawn < samples {
        let r1 = rng.gen_range(-radius..=radius);
        let r2 = rng.gen_range(-radius..=radius);
        if r1 == 0.0 && r2 == 0.0 {
            continue;
        }
        drawn += 1;
        min = min.min(torus_neron(&TorusPoint::new(r1, r2, tau), config)?);
    }
    Ok(BoundReport::at_least("hindry", min, rhs, tol)
        .with_place(format!("tau={:.6}{:+.6}i", tau.re, tau.im))
        .with_context(format!("samples={samples} seed={seed}")))
}

/// `eta^2 c^2 <= 16 delta^2`, exact.
pub fn verify_local_conductor_ineq(local: &LocalReductionData) -> Result<BoundReport> {
    if local.delta == 0 {
        return Err(Error::GoodReduction(local.p.clone()));
    }
    let lhs = u64::from(local.eta * local.c).pow(2);
    let rhs = 16 * u64::from(local.delta).pow(2);
    Ok(BoundReport::at_most("conductor_ineq", lhs as f64, rhs as f64, 0.0).with_place(Place::Prime(local.p.clone())))
}

/// `max(0, -ord_p j) <= delta`, with equality exactly at good and
/// multiplicative primes.
pub fn verify_jdisc(local: &LocalReductionData, j: &rug::Rational) -> BoundReport {
    let ord = if *j == 0 {
        0
    } else {
        valuation(j, &local.p).unwrap_or(0)
    };
    let lhs = (-ord).max(0);
    let rhs = i64::from(local.delta);
    let semistable = local.reduction == ReductionType::Good || local.reduction.is_multiplicative();
    let report = BoundReport::at_most("jdisc", lhs as f64, rhs as f64, 0.0)
        .with_place(Place::Prime(local.p.clone()))
        .with_context(local.reduction.to_string());
    if (lhs == rhs) != semistable {
        report.forced_fail()
    } else {
        report
    }
}

/// `delta = eta + m - 1`, exact.
pub fn verify_ogg(local: &LocalReductionData) -> BoundReport {
    BoundReport::equal(
        "ogg",
        i64::from(local.delta),
        i64::from(local.eta) + i64::from(local.m) - 1,
    )
    .with_place(Place::Prime(local.p.clone()))
    .with_context(local.kodaira.to_string())
}
