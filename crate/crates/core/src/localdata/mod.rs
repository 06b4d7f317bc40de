//! Reduction data: Tate's algorithm per prime, conductor and discriminant
//! exponents, Tamagawa numbers and the Szpiro ratio.
//!
//! The conductor exponent is never computed directly. Tate's algorithm gives
//! the Kodaira symbol, hence the number of components `m` of the special
//! fiber, and Ogg's formula `delta = eta + m - 1` then determines `eta`.

mod tate;

use std::fmt;

use rug::Integer;

use crate::error::{Error, Result};
use crate::exactnum::PowRef;
use crate::exactnum::{factorize, ln_abs_int, DEFAULT_FACTOR_BOUND};
use crate::weierstrass::{minimal_model_with_bound, ModelTransform, WeierstrassModel};

pub(crate) use tate::IntModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kodaira {
    I0,
    In(u32),
    II,
    III,
    IV,
    I0Star,
    InStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

impl Kodaira {
    /// Number of irreducible components of the special fiber.
    pub fn components(self) -> u32 {
        match self {
            Kodaira::I0 => 1,
            Kodaira::In(n) => n,
            Kodaira::II => 1,
            Kodaira::III => 2,
            Kodaira::IV => 3,
            Kodaira::I0Star => 5,
            Kodaira::InStar(n) => 5 + n,
            Kodaira::IVStar => 7,
            Kodaira::IIIStar => 8,
            Kodaira::IIStar => 9,
        }
    }
}

impl fmt::Display for Kodaira {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kodaira::I0 => write!(f, "I0"),
            Kodaira::In(n) => write!(f, "I{n}"),
            Kodaira::II => write!(f, "II"),
            Kodaira::III => write!(f, "III"),
            Kodaira::IV => write!(f, "IV"),
            Kodaira::I0Star => write!(f, "I0*"),
            Kodaira::InStar(n) => write!(f, "I{n}*"),
            Kodaira::IVStar => write!(f, "IV*"),
            Kodaira::IIIStar => write!(f, "III*"),
            Kodaira::IIStar => write!(f, "II*"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReductionType {
    Good,
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

impl ReductionType {
    pub fn is_multiplicative(self) -> bool {
        matches!(
            self,
            ReductionType::SplitMultiplicative | ReductionType::NonsplitMultiplicative
        )
    }
}

impl fmt::Display for ReductionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ReductionType::Good => "good",
            ReductionType::SplitMultiplicative => "split-multiplicative",
            ReductionType::NonsplitMultiplicative => "nonsplit-multiplicative",
            ReductionType::Additive => "additive",
        };
        f.write_str(s)
    }
}

/// Output of Tate's algorithm at one prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalReductionData {
    pub p: Integer,
    /// `ord_p` of the minimal discriminant.
    pub delta: u32,
    /// Conductor exponent.
    pub eta: u32,
    /// Components of the special fiber.
    pub m: u32,
    /// Tamagawa number.
    pub c: u32,
    pub kodaira: Kodaira,
    pub reduction: ReductionType,
}

impl LocalReductionData {
    /// Data at a prime of good reduction.
    pub fn good(p: Integer) -> Self {
        LocalReductionData {
            p,
            delta: 0,
            eta: 0,
            m: 1,
            c: 1,
            kodaira: Kodaira::I0,
            reduction: ReductionType::Good,
        }
    }

    pub fn ogg_holds(&self) -> bool {
        self.delta + 1 == self.eta + self.m
    }

    pub fn log_p(&self) -> f64 {
        ln_abs_int(&self.p)
    }
}

/// Runs Tate's algorithm at `p` on a globally minimal model.
pub fn tate_local(minimal: &WeierstrassModel, p: &Integer) -> Result<LocalReductionData> {
    tate::tate(minimal, p)
}

/// True iff the multiplicative reduction at `p` is split.
pub fn split_multiplicative_test(minimal: &WeierstrassModel, p: &Integer) -> Result<bool> {
    tate::split_test(&IntModel::from_model(minimal)?, p)
}

/// Minimal model, bad-prime data and the Szpiro ratio of a curve.
#[derive(Clone, Debug)]
pub struct GlobalReductionData {
    pub minimal: WeierstrassModel,
    /// Transform from the input model to `minimal`.
    pub transform: ModelTransform,
    /// Bad primes only, increasing.
    pub locals: Vec<LocalReductionData>,
    pub log_norm_discriminant: f64,
    pub log_norm_conductor: f64,
    pub sigma: f64,
}

impl GlobalReductionData {
    /// Assembles global data from local data, applying the `sigma = 1`
    /// convention when there are no bad primes.
    pub fn from_parts(
        minimal: WeierstrassModel,
        transform: ModelTransform,
        locals: Vec<LocalReductionData>,
    ) -> Self {
        let log_norm_discriminant: f64 = locals.iter().map(|l| l.delta as f64 * l.log_p()).sum();
        let log_norm_conductor: f64 = locals.iter().map(|l| l.eta as f64 * l.log_p()).sum();
        let sigma = if locals.is_empty() {
            1.0
        } else {
            log_norm_discriminant / log_norm_conductor
        };
        GlobalReductionData {
            minimal,
            transform,
            locals,
            log_norm_discriminant,
            log_norm_conductor,
            sigma,
        }
    }

    pub fn local(&self, p: &Integer) -> Option<&LocalReductionData> {
        self.locals.iter().find(|l| l.p == *p)
    }

    /// Local data at any prime, good primes included.
    pub fn local_or_good(&self, p: &Integer) -> LocalReductionData {
        self.local(p)
            .cloned()
            .unwrap_or_else(|| LocalReductionData::good(p.clone()))
    }

    pub fn bad_primes(&self) -> impl Iterator<Item = &Integer> {
        self.locals.iter().map(|l| &l.p)
    }

    pub fn conductor(&self) -> Integer {
        self.locals.iter().fold(Integer::from(1), |acc, l| {
            acc * l.p.pow_ref(l.eta)
        })
    }

    pub fn minimal_discriminant(&self) -> Integer {
        self.minimal.discriminant().numer().clone()
    }
}

pub fn global_data(model: &WeierstrassModel) -> Result<GlobalReductionData> {
    global_data_with_bound(model, DEFAULT_FACTOR_BOUND)
}

pub fn global_data_with_bound(
    model: &WeierstrassModel,
    factor_bound: u32,
) -> Result<GlobalReductionData> {
    let (minimal, transform) = minimal_model_with_bound(model, factor_bound)?;
    let disc = minimal.discriminant().numer().clone();
    let locals = factorize(&disc, factor_bound)?
        .primes()
        .map(|p| tate_local(&minimal, p))
        .collect::<Result<Vec<_>>>()?;
    if locals.iter().any(|l| l.reduction == ReductionType::Good) {
        return Err(Error::InvariantViolation(
            "prime dividing the minimal discriminant reported as good".into(),
        ));
    }
    Ok(GlobalReductionData::from_parts(minimal, transform, locals))
}
