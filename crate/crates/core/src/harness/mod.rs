//! Batch verification over a curve file: local data, torsion, heights of
//! the known points and every enabled check, collected as sorted
//! [`BoundReport`]s.

mod parse;
mod report;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::Integer;

use crate::bounds::{
    lang_constant, torsion_bound, verify_jdisc, verify_lemma31, verify_lemma32,
    verify_local_conductor_ineq, verify_ogg, verify_prop41, verify_theorem1, verify_theorem2,
    BoundInputs, BoundReport, BoundStatus, PaperConstants,
};
use crate::error::{Error, Result};
use crate::exactnum::DEFAULT_FACTOR_BOUND;
use crate::heights::{CurveHeights, HeightConfig, Place};
use crate::localdata::{global_data_with_bound, GlobalReductionData, Kodaira, LocalReductionData, ReductionType};
use crate::torsion::torsion_subgroup_with_bound;
use crate::weierstrass::{add_points, negate, scalar_mul, sub_points, CurvePoint};

pub use parse::{parse_curve_file, parse_curve_str, CurveRecord};
pub use report::{emit_report, Summary};

/// Checks run by [`run_suite`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    /// `delta = eta + m - 1` at each bad prime.
    Ogg,
    /// Kodaira symbol, conductor exponent and Tamagawa number agree.
    ReductionRules,
    /// Szpiro ratio at least 1.
    Sigma,
    /// `max(0, -ord j) <= delta`, equality iff semistable.
    Jdisc,
    /// `eta^2 c^2 <= 16 delta^2`.
    ConductorIneq,
    Theorem1,
    Theorem2,
    Prop41,
    Lemma31,
    Lemma32,
    /// Sum of local heights over all places equals the global value.
    Decomposition,
    /// Canonical height against exact doubling.
    HeightOracle,
    /// `h(nP) = n^2 h(P)` for `n <= 5`.
    Quadratic,
    /// Torsion points have height zero.
    TorsionHeight,
    /// `Lambda(Z) <= (4/N) sum h(P_j)`.
    Parallelogram,
    /// Intersection part `i_v >= 0` at multiplicative primes.
    IjNonneg,
    /// Pinned values of the bound formulas.
    Calibration,
}

impl Check {
    pub const ALL: [Check; 17] = [
        Check::Ogg,
        Check::ReductionRules,
        Check::Sigma,
        Check::Jdisc,
        Check::ConductorIneq,
        Check::Theorem1,
        Check::Theorem2,
        Check::Prop41,
        Check::Lemma31,
        Check::Lemma32,
        Check::Decomposition,
        Check::HeightOracle,
        Check::Quadratic,
        Check::TorsionHeight,
        Check::Parallelogram,
        Check::IjNonneg,
        Check::Calibration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Ogg => "ogg",
            Check::ReductionRules => "reduction_rules",
            Check::Sigma => "sigma",
            Check::Jdisc => "jdisc",
            Check::ConductorIneq => "conductor_ineq",
            Check::Theorem1 => "theorem1",
            Check::Theorem2 => "theorem2",
            Check::Prop41 => "prop41",
            Check::Lemma31 => "lemma31",
            Check::Lemma32 => "lemma32",
            Check::Decomposition => "decomposition",
            Check::HeightOracle => "height_oracle",
            Check::Quadratic => "quadratic",
            Check::TorsionHeight => "torsion_height",
            Check::Parallelogram => "parallelogram",
            Check::IjNonneg => "ij_nonneg",
            Check::Calibration => "calibration",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| format!("unknown check {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Tsv,
}

/// Deliberate corruption of computed data, for mutation runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Every bad prime reports `delta - 1`.
    DeltaMinusOne,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Slack for real-valued comparisons.
    pub tolerance: f64,
    pub factor_bound: u32,
    pub seed: u64,
    pub checks: BTreeSet<Check>,
    pub parallelism: usize,
    pub output_format: OutputFormat,
    /// Point sets `Z` sampled per curve for the lemma checks.
    pub point_sets: usize,
    pub height: HeightConfig,
    pub constants: PaperConstants,
    pub fault: Option<Fault>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tolerance: 1e-9,
            factor_bound: DEFAULT_FACTOR_BOUND,
            seed: 0,
            checks: Check::ALL.into_iter().collect(),
            parallelism: 1,
            output_format: OutputFormat::Json,
            point_sets: 6,
            height: HeightConfig::default(),
            constants: PaperConstants::default(),
            fault: None,
        }
    }
}

/// Tolerances of the numeric identity checks, independent of the slack.
const IDENTITY_TOL: f64 = 1e-8;
const ORACLE_TOL: f64 = 1e-6;
const TORSION_HEIGHT_TOL: f64 = 1e-10;
const MAX_SET_SIZE: usize = 8;
const MAX_MULTIPLE: i64 = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    /// Sorted by `(label, check, place, context)`.
    pub reports: Vec<BoundReport>,
    pub summary: Summary,
}

pub fn run_suite(records: &[CurveRecord], config: &RunConfig) -> Result<SuiteResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism.max(1))
        .build()
        .map_err(|e| Error::InvariantViolation(format!("thread pool: {e}")))?;
    let per_curve: Vec<(Vec<BoundReport>, Option<f64>)> =
        pool.install(|| records.par_iter().map(|r| curve_reports(r, config)).collect());

    let mut reports = Vec::new();
    let mut max_sigma: Option<f64> = None;
    for (rs, sigma) in per_curve {
        reports.extend(rs);
        if let Some(s) = sigma {
            max_sigma = Some(max_sigma.map_or(s, |m| m.max(s)));
        }
    }
    if config.checks.contains(&Check::Calibration) {
        reports.extend(calibration_reports(&config.constants));
    }
    reports.sort_by(|a, b| {
        (&a.label, &a.check, &a.place, &a.context).cmp(&(&b.label, &b.check, &b.place, &b.context))
    });
    let summary = Summary::of(&reports, records.len(), max_sigma);
    Ok(SuiteResult { reports, summary })
}

/// Label of the run-wide calibration reports.
pub const CALIBRATION_LABEL: &str = "_constants";

fn calibration_reports(k: &PaperConstants) -> Vec<BoundReport> {
    let unit = BoundInputs::new(1, 1.0, 0.0).expect("valid inputs");
    [
        ("torsion_bound(1,1)", torsion_bound(&unit, k), 1_558_726.554_081_173_9),
        ("lang_constant(1,1)", lang_constant(&unit, k), 7.485_708_017_745_777e-18),
    ]
    .into_iter()
    .map(|(name, got, want)| {
        BoundReport::close("calibration", got / want, 1.0, 1e-12)
            .with_label(CALIBRATION_LABEL)
            .with_place(name)
    })
    .collect()
}

/// Seed of the point-set sampler for one curve.
fn curve_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a keeps seeds stable across platforms and toolchains
    let h = label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    });
    seed ^ h
}

fn apply_fault(data: GlobalReductionData, fault: Option<Fault>) -> GlobalReductionData {
    match fault {
        None => data,
        Some(Fault::DeltaMinusOne) => {
            let locals = data
                .locals
                .into_iter()
                .map(|l| LocalReductionData {
                    delta: l.delta.saturating_sub(1),
                    ..l
                })
                .collect();
            GlobalReductionData::from_parts(data.minimal, data.transform, locals)
        }
    }
}

/// Violations of the standard relations between Kodaira symbol, reduction
/// type, `delta`, `eta`, `m` and `c`.
fn reduction_rule_violations(l: &LocalReductionData) -> Vec<&'static str> {
    let mut bad = Vec::new();
    match l.reduction {
        ReductionType::Good => bad.push("bad prime reported as good"),
        ReductionType::SplitMultiplicative | ReductionType::NonsplitMultiplicative => {
            if l.eta != 1 {
                bad.push("eta != 1");
            }
            if l.kodaira != Kodaira::In(l.delta) || l.m != l.delta {
                bad.push("symbol is not I_delta");
            }
            let c = if l.reduction == ReductionType::SplitMultiplicative {
                l.delta
            } else {
                2 - l.delta % 2
            };
            if l.c != c {
                bad.push("wrong Tamagawa number");
            }
        }
        ReductionType::Additive => {
            if l.eta < 2 {
                bad.push("eta < 2");
            }
            if l.m != l.kodaira.components() {
                bad.push("components disagree with symbol");
            }
            if l.c == 0 || l.c > 4 {
                bad.push("Tamagawa number outside 1..=4");
            }
        }
    }
    bad
}

/// Known points and a few small combinations, without repeats.
fn point_pool(
    heights: &CurveHeights,
    torsion: &[CurvePoint],
    free: &[CurvePoint],
) -> Vec<CurvePoint> {
    let model = heights.input_model();
    let mut pool: BTreeSet<CurvePoint> = torsion.iter().cloned().collect();
    for (i, p) in free.iter().enumerate() {
        pool.insert(p.clone());
        pool.insert(negate(model, p));
        pool.insert(scalar_mul(model, 2, p));
        pool.insert(scalar_mul(model, 3, p));
        for q in &free[i + 1..] {
            pool.insert(add_points(model, p, q));
        }
    }
    pool.into_iter().collect()
}

fn sample_sets(pool: &[CurvePoint], count: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<CurvePoint>> {
    if pool.len() < 2 {
        return Vec::new();
    }
    let max = pool.len().min(MAX_SET_SIZE);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(2..=max);
            let mut idx = sample(rng, pool.len(), n).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| pool[i].clone()).collect()
        })
        .collect()
}

struct CurveRun<'a> {
    label: &'a str,
    config: &'a RunConfig,
    out: Vec<BoundReport>,
}

impl CurveRun<'_> {
    fn on(&self, check: Check) -> bool {
        self.config.checks.contains(&check)
    }

    fn push(&mut self, check: Check, r: Result<BoundReport>) {
        let r = r.unwrap_or_else(|e| BoundReport::skipped(check.name(), e.to_string()));
        self.out.push(r.with_label(self.label));
    }

    fn push_with(&mut self, check: Check, place: impl fmt::Display, context: String, r: Result<BoundReport>) {
        let r = r
            .unwrap_or_else(|e| BoundReport::skipped(check.name(), e.to_string()))
            .with_place(place)
            .with_context(context);
        self.out.push(r.with_label(self.label));
    }
}

fn curve_reports(record: &CurveRecord, config: &RunConfig) -> (Vec<BoundReport>, Option<f64>) {
    let mut run = CurveRun {
        label: &record.label,
        config,
        out: Vec::new(),
    };
    let data = match global_data_with_bound(&record.model, config.factor_bound) {
        Ok(d) => apply_fault(d, config.fault),
        Err(e) => {
            run.out.push(BoundReport::skipped("curve", e.to_string()).with_label(&record.label));
            return (run.out, None);
        }
    };
    let sigma = data.sigma;
    let tol = config.tolerance;

    for l in &data.locals {
        let place = Place::Prime(l.p.clone());
        if run.on(Check::Ogg) {
            run.push(Check::Ogg, Ok(verify_ogg(l)));
        }
        if run.on(Check::ReductionRules) {
            let bad = reduction_rule_violations(l);
            let r = BoundReport::equal("reduction_rules", bad.len() as i64, 0)
                .with_place(&place)
                .with_context(if bad.is_empty() {
                    format!("{} {}", l.kodaira, l.reduction)
                } else {
                    bad.join("; ")
                });
            run.push(Check::ReductionRules, Ok(r));
        }
        if run.on(Check::Jdisc) {
            run.push(Check::Jdisc, Ok(verify_jdisc(l, data.minimal.j_invariant())));
        }
        if run.on(Check::ConductorIneq) {
            run.push(Check::ConductorIneq, verify_local_conductor_ineq(l));
        }
    }
    if run.on(Check::Sigma) {
        let r = BoundReport::at_least("sigma", sigma, 1.0, tol).with_place("global");
        run.push(Check::Sigma, Ok(r));
    }

    let heights = CurveHeights::from_data(record.model.clone(), data.clone(), config.height);
    let torsion = match torsion_subgroup_with_bound(&data.minimal, config.factor_bound) {
        Ok(t) => t,
        Err(e) => {
            run.out.push(BoundReport::skipped("torsion", e.to_string()).with_label(&record.label));
            return (run.out, Some(sigma));
        }
    };
    let torsion_points: Vec<CurvePoint> = torsion
        .points
        .iter()
        .map(|t| data.transform.pull_point(t))
        .collect();
    let free: Vec<CurvePoint> = record
        .points
        .iter()
        .filter(|p| !torsion_points.contains(p))
        .cloned()
        .collect();

    let inputs = BoundInputs::new(1, sigma, data.log_norm_discriminant);
    let k = &config.constants;
    if run.on(Check::Theorem1) {
        let r = inputs.clone().and_then(|i| verify_theorem1(torsion.order, &i, k));
        run.push_with(Check::Theorem1, "global", format!("torsion={}", torsion.structure), r);
    }
    if run.on(Check::Theorem2) {
        let r = free
            .iter()
            .map(|p| Ok((p.to_string(), heights.canonical_height(p)?)))
            .collect::<Result<Vec<_>>>()
            .and_then(|hs| {
                if hs.is_empty() {
                    return Ok(BoundReport::skipped("theorem2", "no non-torsion points supplied"));
                }
                verify_theorem2(&hs, &inputs.clone()?, k, tol)
            });
        let r = r.map(|r| r.with_place("global"));
        run.push(Check::Theorem2, r);
    }
    if run.on(Check::Prop41) {
        let known: BTreeSet<&CurvePoint> = torsion_points.iter().chain(&record.points).collect();
        let r = known
            .iter()
            .map(|p| heights.canonical_height(p))
            .collect::<Result<Vec<_>>>()
            .and_then(|hs| verify_prop41(&hs, &inputs?, k, tol));
        run.push(Check::Prop41, r.map(|r| r.with_place("global")));
    }
    if run.on(Check::TorsionHeight) {
        for t in torsion_points.iter().filter(|t| !t.is_infinity()) {
            let r = heights
                .canonical_height(t)
                .map(|h| BoundReport::at_most("torsion_height", h.abs(), TORSION_HEIGHT_TOL, 0.0));
            run.push_with(Check::TorsionHeight, "global", format!("T={t}"), r);
        }
    }
    for p in &free {
        if run.on(Check::HeightOracle) {
            let r = heights
                .canonical_height(p)
                .map(|h| BoundReport::close("height_oracle", h, heights.doubling_limit_height(p), ORACLE_TOL));
            run.push_with(Check::HeightOracle, "global", format!("P={p}"), r);
        }
        if run.on(Check::Quadratic) {
            for n in 2..=MAX_MULTIPLE {
                let r = heights.canonical_height(p).and_then(|h| {
                    let hn = heights.canonical_height(&scalar_mul(heights.input_model(), n, p))?;
                    Ok(BoundReport::close("quadratic", hn, (n * n) as f64 * h, IDENTITY_TOL))
                });
                run.push_with(Check::Quadratic, "global", format!("P={p} n={n}"), r);
            }
        }
        if run.on(Check::Decomposition) {
            let r = point_decomposition(&heights, p);
            run.push_with(Check::Decomposition, "global", format!("P={p}"), r);
        }
    }

    let set_checks = [
        Check::Lemma31,
        Check::Lemma32,
        Check::Decomposition,
        Check::Parallelogram,
        Check::IjNonneg,
    ];
    if set_checks.iter().any(|&c| run.on(c)) {
        let pool = point_pool(&heights, &torsion_points, &free);
        let mut rng = ChaCha8Rng::seed_from_u64(curve_seed(config.seed, &record.label));
        let sets = sample_sets(&pool, config.point_sets, &mut rng);
        if sets.is_empty() {
            for c in set_checks.into_iter().filter(|c| config.checks.contains(c)) {
                run.push(c, Ok(BoundReport::skipped(c.name(), "fewer than 2 known points")));
            }
        }
        for (si, z) in sets.iter().enumerate() {
            let ctx = format!("Z{si} N={}", z.len());
            set_reports(&mut run, &heights, &data, z, &ctx);
        }
    }
    (run.out, Some(sigma))
}

fn set_reports(run: &mut CurveRun<'_>, heights: &CurveHeights, data: &GlobalReductionData, z: &[CurvePoint], ctx: &str) {
    let tol = run.config.tolerance;
    if run.on(Check::Lemma31) {
        for p in data.bad_primes() {
            let r = verify_lemma31(heights, z, p, tol);
            run.push_with(Check::Lemma31, Place::Prime(p.clone()), ctx.to_string(), r);
        }
    }
    if run.on(Check::Lemma32) {
        let r = verify_lemma32(heights, z, tol, &run.config.constants);
        run.push_with(Check::Lemma32, Place::Infinity, ctx.to_string(), r);
    }
    if run.on(Check::Decomposition) {
        let r = set_decomposition(heights, z);
        run.push_with(Check::Decomposition, "global", ctx.to_string(), r);
    }
    if run.on(Check::Parallelogram) {
        let r = (|| {
            let lambda = heights.height_disc_sum(z)?;
            let mut s = 0.0;
            for p in z {
                s += heights.canonical_height(p)?;
            }
            Ok(BoundReport::at_most("parallelogram", lambda, 4.0 * s / z.len() as f64, tol))
        })();
        run.push_with(Check::Parallelogram, "global", ctx.to_string(), r);
    }
    if run.on(Check::IjNonneg) {
        for l in data.locals.iter().filter(|l| l.reduction.is_multiplicative()) {
            let r = min_intersection(heights, &l.p, z)
                .map(|i| BoundReport::at_least("ij_nonneg", i, 0.0, tol));
            run.push_with(Check::IjNonneg, Place::Prime(l.p.clone()), ctx.to_string(), r);
        }
    }
}

fn min_intersection(heights: &CurveHeights, p: &Integer, z: &[CurvePoint]) -> Result<f64> {
    let mut min = f64::INFINITY;
    for (i, a) in z.iter().enumerate() {
        for (j, b) in z.iter().enumerate() {
            if i != j {
                min = min.min(heights.ij_decomposition(p, a, b)?.0);
            }
        }
    }
    Ok(min)
}

/// `h(P)` against the sum of `lambda_v(P)` over its support, each place
/// evaluated on its own.
fn place_sum(heights: &CurveHeights, p: &CurvePoint) -> Result<f64> {
    let mut s = 0.0;
    for place in heights.support(p)? {
        s += heights.local_height(&place, p)?;
    }
    Ok(s)
}

fn point_decomposition(heights: &CurveHeights, p: &CurvePoint) -> Result<BoundReport> {
    Ok(BoundReport::close(
        "decomposition",
        heights.canonical_height(p)?,
        place_sum(heights, p)?,
        IDENTITY_TOL,
    ))
}

/// `Lambda(Z)` against `sum_v Lambda_v(Z)`.
fn set_decomposition(heights: &CurveHeights, z: &[CurvePoint]) -> Result<BoundReport> {
    let global = heights.height_disc_sum(z)?;
    let n = z.len() as f64;
    let mut local = 0.0;
    for (i, a) in z.iter().enumerate() {
        for (j, b) in z.iter().enumerate() {
            if i != j {
                local += place_sum(heights, &sub_points(heights.input_model(), a, b))?;
            }
        }
    }
    Ok(BoundReport::close("decomposition", global, local / (n * n), IDENTITY_TOL))
}

/// True when every report passed or was skipped.
pub fn all_passed(result: &SuiteResult) -> bool {
    result.reports.iter().all(|r| r.status != BoundStatus::Fail)
}
