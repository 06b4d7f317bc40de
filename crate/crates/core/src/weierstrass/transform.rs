use rug::Rational;

use super::{CurvePoint, WeierstrassModel};
use crate::error::{Error, Result};

/// Change of coordinates `x = u^2 x' + r`, `y = u^3 y' + s u^2 x' + t`,
/// mapping a model to a new one whose discriminant is `u^-12` times the old.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelTransform {
    pub u: Rational,
    pub r: Rational,
    pub s: Rational,
    pub t: Rational,
}

impl Default for ModelTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl ModelTransform {
    pub fn new(
        u: impl Into<Rational>,
        r: impl Into<Rational>,
        s: impl Into<Rational>,
        t: impl Into<Rational>,
    ) -> Result<Self> {
        let u = u.into();
        if u == 0 {
            return Err(Error::InvariantViolation("transform with u = 0".into()));
        }
        Ok(ModelTransform {
            u,
            r: r.into(),
            s: s.into(),
            t: t.into(),
        })
    }

    pub fn identity() -> Self {
        ModelTransform {
            u: Rational::from(1),
            r: Rational::new(),
            s: Rational::new(),
            t: Rational::new(),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &ModelTransform) -> ModelTransform {
        let u1 = &self.u;
        let u1_sq = Rational::from(u1 * u1);
        let u1_cu = Rational::from(&u1_sq * u1);
        ModelTransform {
            u: Rational::from(u1 * &next.u),
            r: Rational::from(&u1_sq * &next.r) + &self.r,
            s: Rational::from(u1 * &next.s) + &self.s,
            t: Rational::from(&u1_cu * &next.t)
                + Rational::from(&u1_sq * &self.s) * &next.r
                + &self.t,
        }
    }

    pub fn inverse(&self) -> ModelTransform {
        let u = &self.u;
        let u_sq = Rational::from(u * u);
        let u_cu = Rational::from(&u_sq * u);
        ModelTransform {
            u: Rational::from(u.recip_ref()),
            r: -Rational::from(&self.r / &u_sq),
            s: -Rational::from(&self.s / u),
            t: (Rational::from(&self.r * &self.s) - &self.t) / u_cu,
        }
    }

    pub fn apply(&self, model: &WeierstrassModel) -> Result<WeierstrassModel> {
        let [a1, a2, a3, a4, a6] = model.a_invariants();
        let (u, r, s, t) = (&self.u, &self.r, &self.s, &self.t);
        let u2 = Rational::from(u * u);
        let u3 = Rational::from(&u2 * u);
        let u4 = Rational::from(&u2 * &u2);
        let u6 = Rational::from(&u3 * &u3);
        let rs = Rational::from(r * s);

        let na1 = (a1 + Rational::from(2 * s)) / u;
        let na2 = ((a2 - Rational::from(s * a1)) + Rational::from(3 * r)
            - Rational::from(s * s))
            / &u2;
        let na3 = ((a3 + Rational::from(r * a1)) + Rational::from(2 * t)) / &u3;
        let na4 = ((a4 - Rational::from(s * a3))
            + Rational::from(2 * r) * a2
            - Rational::from(t + &rs) * a1
            + Rational::from(3 * r) * r
            - Rational::from(2 * s) * t)
            / &u4;
        let na6 = ((a6 + Rational::from(r * a4))
            + Rational::from(r * r) * a2
            + Rational::from(r * r) * r
            - Rational::from(t * a3)
            - Rational::from(t * t)
            - Rational::from(r * t) * a1)
            / &u6;
        WeierstrassModel::new([na1, na2, na3, na4, na6])
    }

    /// Image of a point of the source model on the transformed model.
    pub fn map_point(&self, p: &CurvePoint) -> CurvePoint {
        match p {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => {
                let u2 = Rational::from(&self.u * &self.u);
                let u3 = Rational::from(&u2 * &self.u);
                let dx = Rational::from(x - &self.r);
                let ny = ((y - Rational::from(&self.s * &dx)) - &self.t) / u3;
                CurvePoint::Affine { x: dx / u2, y: ny }
            }
        }
    }

    /// Preimage of a point of the transformed model.
    pub fn pull_point(&self, p: &CurvePoint) -> CurvePoint {
        self.inverse().map_point(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::PowRef;
    use proptest::prelude::*;

    #[test]
    fn shift_of_x3_plus_16() {
        let e = WeierstrassModel::from_ints([0, 0, 0, 0, 16]).unwrap();
        let t = ModelTransform::new(2, 0, 0, 4).unwrap();
        let f = t.apply(&e).unwrap();
        assert_eq!(f, WeierstrassModel::from_ints([0, 0, 1, 0, 0]).unwrap());
        assert_eq!(*e.discriminant(), -110592);
        assert_eq!(*f.discriminant(), -27);
        assert_eq!(
            Rational::from(f.discriminant() / e.discriminant()),
            Rational::from((1, 4096))
        );
        // (0, 4) on y^2 = x^3 + 16 maps to (0, 0)
        assert_eq!(t.map_point(&CurvePoint::affine(0, 4)), CurvePoint::affine(0, 0));
    }

    #[test]
    fn identity_leaves_model_alone() {
        let e = WeierstrassModel::from_ints([0, 0, 1, -1, 0]).unwrap();
        assert_eq!(ModelTransform::identity().apply(&e).unwrap(), e);
    }

    fn arb_transform() -> impl Strategy<Value = ModelTransform> {
        (
            (1i64..5, 1i64..4, any::<bool>()),
            (-6i64..6, 1i64..4),
            (-6i64..6, 1i64..4),
            (-6i64..6, 1i64..4),
        )
            .prop_map(|((un, ud, neg), r, s, t)| {
                let u = Rational::from((if neg { -un } else { un }, ud));
                ModelTransform::new(u, Rational::from(r), Rational::from(s), Rational::from(t))
                    .unwrap()
            })
    }

    proptest! {
        #[test]
        fn transform_laws(t1 in arb_transform(), t2 in arb_transform()) {
            let e = WeierstrassModel::from_ints([0, 1, 1, -2, 0]).unwrap();
            let p = CurvePoint::affine(-1, 1);

            prop_assert!(t1.then(&t1.inverse()).is_identity());
            prop_assert!(t1.inverse().then(&t1).is_identity());

            let e1 = t1.apply(&e).unwrap();
            let u12 = t1.u.pow_ref(12);
            prop_assert_eq!(Rational::from(e1.discriminant() * &u12), e.discriminant().clone());
            let u4 = t1.u.pow_ref(4);
            prop_assert_eq!(Rational::from(&e1.invariants().c4 * &u4), e.invariants().c4.clone());

            let q = t1.map_point(&p);
            prop_assert!(e1.contains(&q));
            prop_assert_eq!(t1.pull_point(&q), p.clone());

            let e12 = t2.apply(&e1).unwrap();
            prop_assert_eq!(t1.then(&t2).apply(&e).unwrap(), e12);
            prop_assert_eq!(t1.then(&t2).map_point(&p), t2.map_point(&q));
        }
    }
}
