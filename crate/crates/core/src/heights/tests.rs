use std::f64::consts::PI;

use proptest::prelude::*;
use rug::{Integer, Rational};

use super::*;
use crate::exactnum::{ln_abs, PowRef};
use crate::weierstrass::{add_points, division_polynomial, negate, scalar_mul};

fn model(a: [i64; 5]) -> WeierstrassModel {
    WeierstrassModel::from_ints(a).unwrap()
}

fn heights(a: [i64; 5]) -> CurveHeights {
    CurveHeights::new(&model(a), HeightConfig::default()).unwrap()
}

const E37A1: [i64; 5] = [0, 0, 1, -1, 0];

/// Canonical heights from an independent implementation, halved to this
/// crate's normalization.
const REFERENCE_HEIGHTS: &[([i64; 5], (i64, i64), f64)] = &[
    ([0, 0, 1, -1, 0], (0, 0), 0.0255557041199844),
    ([0, 1, 1, -2, 0], (-1, 1), 0.343333541652793),
    ([0, 1, 1, -2, 0], (0, 0), 0.163500386825802),
    ([0, 0, 1, -7, 6], (0, 2), 0.495453166576544),
    ([0, 0, 0, 0, -2], (3, 5), 0.674788417840059),
    ([0, 0, 0, 0, 17], (-2, 3), 0.227308432592105),
    ([0, 1, 1, 0, 0], (0, 0), 0.0314082535437438),
    ([1, -1, 1, 0, 0], (0, 0), 0.0464907423193272),
];

#[test]
fn b2_values() {
    assert!((b2_periodic(0.0) - 1.0 / 6.0).abs() < 1e-15);
    assert!((b2_periodic(0.5) + 1.0 / 12.0).abs() < 1e-15);
    assert!((b2_periodic(0.25) + 1.0 / 48.0).abs() < 1e-15);
    assert!((b2_periodic(0.75) + 1.0 / 48.0).abs() < 1e-15);
    assert!((b2_periodic(-0.25) - b2_periodic(0.75)).abs() < 1e-15);
    assert!((b2_periodic(0.2) - 1.0 / 150.0).abs() < 1e-15);
}

fn fourier_b2(t: f64, m: usize) -> f64 {
    (1..=m)
        .map(|k| (2.0 * PI * k as f64 * t).cos() / (k * k) as f64)
        .sum::<f64>()
        / (PI * PI)
}

#[test]
fn b2_zero_matches_fourier_oracle() {
    let s = fourier_b2(0.0, 1_000_000);
    assert!((s - 1.0 / 6.0).abs() < 1e-6);
    let s = fourier_b2(0.5, 1_000_000);
    assert!((s + 1.0 / 12.0).abs() < 1e-6);
}

proptest! {
    #[test]
    fn b2_fourier_consistency(t in -3.0f64..3.0, idx in 0usize..3) {
        let m = [10, 100, 1000][idx];
        prop_assert!((b2_periodic(t) - fourier_b2(t, m)).abs() <= 2.0 / (PI * PI * m as f64));
    }

    #[test]
    fn b2_symmetry_and_range(t in -5.0f64..5.0) {
        let v = b2_periodic(t);
        prop_assert!((v - b2_periodic(1.0 - t)).abs() < 1e-12);
        prop_assert!((v - b2_periodic(t + 1.0)).abs() < 1e-12);
        prop_assert!((-1.0 / 12.0 - 1e-15..=1.0 / 6.0 + 1e-15).contains(&v));
    }
}

#[test]
fn canonical_height_37a1() {
    let h = heights(E37A1);
    let p = CurvePoint::affine(0, 0);
    let v = h.canonical_height(&p).unwrap();
    assert!((v - 0.0255557).abs() < 1e-6, "{v}");
    let oracle = h.doubling_limit_height(&p);
    assert!((v - oracle).abs() < 1e-6, "{v} {oracle}");
    let p2 = scalar_mul(h.input_model(), 2, &p);
    assert!((h.canonical_height(&p2).unwrap() - 4.0 * v).abs() < 1e-8);
}

#[test]
fn arch_height_37a1() {
    let h = heights(E37A1);
    let v = h.local_height(&Place::Infinity, &CurvePoint::affine(0, 0)).unwrap();
    assert!((v - (-0.275352)).abs() < 1e-5, "{v}");
    let w = 0.0255557041199844 - 37f64.ln() / 12.0;
    assert!((v - w).abs() < 1e-9, "{v} {w}");
}

#[test]
fn reference_heights() {
    for (a, (x, y), expected) in REFERENCE_HEIGHTS {
        let h = heights(*a);
        let p = CurvePoint::affine(*x, *y);
        assert!(h.input_model().contains(&p));
        let v = h.canonical_height(&p).unwrap();
        assert!((v - expected).abs() < 1e-9, "{a:?}: {v} vs {expected}");
        let oracle = h.doubling_limit_height(&p);
        assert!((v - oracle).abs() < 1e-6, "{a:?}: {v} vs oracle {oracle}");
    }
}

#[test]
fn non_minimal_model_gives_same_height() {
    // y^2 = x^3 - 43x + 166 has a 7-torsion point (3, 8)
    let h = heights([0, 0, 0, -43, 166]);
    let t = CurvePoint::affine(3, 8);
    assert!(h.canonical_height(&t).unwrap().abs() < 1e-10);
    // 37a1 scaled by u = 1/2, r = 1: heights are model independent
    let base = model(E37A1);
    let tr = crate::weierstrass::ModelTransform::new(Rational::from((1, 2)), 1, 0, 0).unwrap();
    let moved = tr.apply(&base).unwrap();
    let q = tr.map_point(&CurvePoint::affine(0, 0));
    let hm = CurveHeights::new(&moved, HeightConfig::default()).unwrap();
    let v = hm.canonical_height(&q).unwrap();
    assert!((v - 0.0255557041199844).abs() < 1e-9, "{v}");
    let o = hm.doubling_limit_height(&q);
    assert!((v - o).abs() < 1e-6, "{v} {o}");
}

#[test]
fn torsion_points_have_zero_height() {
    let h = heights([0, -1, 1, 0, 0]);
    let p = CurvePoint::affine(0, 0);
    for k in 1..5 {
        let t = scalar_mul(h.input_model(), k, &p);
        assert!(h.canonical_height(&t).unwrap().abs() < 1e-10);
    }
    assert_eq!(h.canonical_height(&CurvePoint::Infinity).unwrap(), 0.0);
    assert_eq!(h.doubling_limit_height(&p), 0.0);
}

#[test]
fn height_disc_sums() {
    let h = heights(E37A1);
    let p = CurvePoint::affine(0, 0);
    let hp = h.canonical_height(&p).unwrap();
    let z2 = [CurvePoint::Infinity, p.clone()];
    assert!((h.height_disc_sum(&z2).unwrap() - hp / 2.0).abs() < 1e-12);
    assert_eq!(h.height_disc_sum(std::slice::from_ref(&p)).unwrap(), 0.0);
    let p2 = scalar_mul(h.input_model(), 2, &p);
    let z3 = [CurvePoint::Infinity, p.clone(), p2];
    let v = h.height_disc_sum(&z3).unwrap();
    assert!((v - 4.0 / 3.0 * hp).abs() < 1e-10);
    assert!((v - 0.0340742).abs() < 1e-5);
    assert_eq!(
        h.height_disc_sum(&[p.clone(), p.clone()]),
        Err(Error::DuplicatePoints)
    );
    assert_eq!(h.height_disc_sum(&[]), Err(Error::EmptySet));

    // global sum equals the sum of the local sums
    let local: f64 = [Place::Infinity, Place::Prime(Integer::from(37))]
        .iter()
        .map(|pl| h.lambda_sum(&z3, pl).unwrap())
        .sum::<f64>()
        + h.good_primes_lambda_sum(&z3).unwrap();
    assert!((local - v).abs() < 1e-10);
}

#[test]
fn breakdown_sums_to_canonical_height() {
    let h = heights([0, -1, 1, -10, -20]);
    let p = CurvePoint::affine(5, 5);
    // (5,5) is torsion: use a non-torsion point on a rank-one curve too
    for (hh, pt) in [
        (h, p),
        (heights([0, 1, 1, -2, 0]), CurvePoint::affine(-1, 1)),
        (heights(E37A1), CurvePoint::affine(Rational::from((21, 25)), Rational::from((-69, 125)))),
    ] {
        let rows = hh.breakdown(&pt).unwrap();
        let total: f64 = rows.iter().map(|r| r.lambda).sum();
        assert!((total - hh.canonical_height(&pt).unwrap()).abs() < 1e-10);
        for r in &rows {
            if let (Some(i), Some(j)) = (r.i_part, r.j_part) {
                assert!(i >= -1e-9);
                assert!((i + j - r.lambda).abs() < 1e-12);
            }
        }
    }
    let hh = heights(E37A1);
    let pt = CurvePoint::affine(Rational::from((21, 25)), Rational::from((-69, 125)));
    let places: Vec<String> = hh.breakdown(&pt).unwrap().iter().map(|r| r.place.to_string()).collect();
    assert_eq!(places, ["inf", "p5", "p37"]);
}

#[test]
fn arch_asymptotic() {
    // lambda tends to 1/2 log x - 1/12 log|Delta| as x grows
    for a in [E37A1, [0, 0, 0, 0, 17], [1, -1, 1, -3, 5], [0, -1, 1, -10, -20]] {
        let e = model(a);
        let log_d = ln_abs(e.discriminant());
        for k in [6u32, 9, 15, 30, 80] {
            let x = Rational::from(Integer::from(10).pow_ref(k)) + Rational::from((1, 3));
            let v = arch_local_height_at_x(&e, &x);
            assert!((v - 0.5 * ln_abs(&x) + log_d / 12.0).abs() <= 1e-3, "{a:?} 10^{k}");
        }
    }
}

/// Archimedean height at any real x, with y left unused by the series.
fn arch_local_height_at_x(e: &WeierstrassModel, x: &Rational) -> f64 {
    let pt = CurvePoint::Affine {
        x: x.clone(),
        y: Rational::new(),
    };
    arch_local_height(e, &pt, &HeightConfig::default()).unwrap()
}

#[test]
fn arch_evenness() {
    let e = model([0, 1, 1, -2, 0]);
    let p = CurvePoint::affine(-1, 1);
    let q = negate(&e, &p);
    let cfg = HeightConfig::default();
    let a = arch_local_height(&e, &p, &cfg).unwrap();
    let b = arch_local_height(&e, &q, &cfg).unwrap();
    assert!((a - b).abs() < 1e-14);
    assert_eq!(arch_local_height(&e, &CurvePoint::Infinity, &cfg), Err(Error::InfinityInput));
}

/// `lambda(nP) - n^2 lambda(P) + log|psi_n|_v - ((n^2-1)/12) log|Delta|_v`
fn division_defect(h: &CurveHeights, place: &Place, p: &CurvePoint, n: i64) -> f64 {
    let e = h.minimal();
    let pm = h.to_minimal(p);
    let np = scalar_mul(e, n, &pm);
    let psi = division_polynomial(e, n, &pm).unwrap();
    let (abs_psi, abs_disc) = match place {
        Place::Infinity => (ln_abs(&psi), ln_abs(e.discriminant())),
        Place::Prime(q) => {
            let lq = ln_abs_int(q);
            let vp = crate::exactnum::valuation(&psi, q).unwrap() as f64;
            let vd = crate::exactnum::valuation(e.discriminant(), q).unwrap() as f64;
            (-vp * lq, -vd * lq)
        }
    };
    let nn = (n * n) as f64;
    let lhs = h.local_height(place, &h.data().transform.pull_point(&np)).unwrap();
    let rhs = nn * h.local_height(place, p).unwrap() - abs_psi + (nn - 1.0) / 12.0 * abs_disc;
    lhs - rhs
}

/// Curve, point, primes to test.
type RelationCase = ([i64; 5], (i64, i64), &'static [u32]);

#[test]
fn division_relation_at_all_kinds_of_places() {
    let cases: &[RelationCase] = &[
        (E37A1, (0, 0), &[2, 3, 5, 37]),
        ([0, 1, 1, -2, 0], (-1, 1), &[2, 5, 389]),
        ([0, 0, 0, 0, 17], (-2, 3), &[2, 3, 5, 17]),
        ([0, 0, 1, -7, 6], (0, 2), &[2, 3, 5077]),
        ([0, -1, 1, -10, -20], (16, 60), &[3, 11]),
    ];
    for (a, (x, y), primes) in cases {
        let h = heights(*a);
        let p = CurvePoint::affine(*x, *y);
        for n in [2, 3] {
            let d = division_defect(&h, &Place::Infinity, &p, n);
            assert!(d.abs() < 1e-8, "{a:?} inf n={n}: {d}");
            for q in *primes {
                let pl = Place::Prime(Integer::from(*q));
                let d = division_defect(&h, &pl, &p, n);
                assert!(d.abs() < 1e-8, "{a:?} p={q} n={n}: {d}");
            }
        }
    }
}

#[test]
fn quasi_parallelogram_law() {
    let h = heights([0, 1, 1, -2, 0]);
    let e = h.minimal().clone();
    let p = CurvePoint::affine(-1, 1);
    let q = CurvePoint::affine(0, 0);
    let s = add_points(&e, &p, &q);
    let d = crate::weierstrass::sub_points(&e, &p, &q);
    let dx = Rational::from(p.x().unwrap() - q.x().unwrap());
    for place in [Place::Infinity, Place::Prime(Integer::from(389)), Place::Prime(Integer::from(2))] {
        let (abs_dx, abs_disc) = match &place {
            Place::Infinity => (ln_abs(&dx), ln_abs(e.discriminant())),
            Place::Prime(r) => {
                let lr = ln_abs_int(r);
                (
                    -(crate::exactnum::valuation(&dx, r).unwrap() as f64) * lr,
                    -(crate::exactnum::valuation(e.discriminant(), r).unwrap() as f64) * lr,
                )
            }
        };
        let lhs = h.local_height(&place, &s).unwrap() + h.local_height(&place, &d).unwrap();
        let rhs = 2.0 * h.local_height(&place, &p).unwrap() + 2.0 * h.local_height(&place, &q).unwrap()
            - abs_dx
            + abs_disc / 6.0;
        assert!((lhs - rhs).abs() < 1e-8, "{place}: {lhs} {rhs}");
    }
}

#[test]
fn e0_lower_bound_and_additive_points() {
    // y^2 = x^3 + 17 has bad primes 2 (additive) and 17 (additive)
    let h = heights([0, 0, 0, 0, 17]);
    let pts = [(-2, 3), (-1, 4), (2, 5), (4, 9), (8, 23), (43, 282), (52, 375)];
    for (x, y) in pts {
        let p = CurvePoint::affine(x, y);
        assert!(h.input_model().contains(&p), "({x},{y})");
        for l in &h.data().locals {
            let pm = h.to_minimal(&p);
            let v = nonarch_local_height(h.minimal(), l, &pm).unwrap();
            if in_e0(h.minimal(), &l.p, &pm) {
                assert!(v >= l.delta as f64 / 12.0 * l.log_p() - 1e-9);
            }
        }
        let oracle = h.doubling_limit_height(&p);
        let v = h.canonical_height(&p).unwrap();
        assert!((v - oracle).abs() < 1e-6, "({x},{y}): {v} {oracle}");
    }
}

#[test]
fn free_function_wrappers() {
    let e = model(E37A1);
    let cfg = HeightConfig::default();
    let p = CurvePoint::affine(0, 0);
    let v = canonical_height(&e, &p, &cfg).unwrap();
    assert!((v - 0.0255557041199844).abs() < 1e-9);
    let z = [CurvePoint::Infinity, p];
    let s = height_disc_sum(&e, &z, &cfg).unwrap();
    let l = lambda_sum(&e, &z, &Place::Prime(Integer::from(37)), &cfg).unwrap();
    assert!((l - 2.0 / 4.0 * 37f64.ln() / 12.0).abs() < 1e-12);
    assert!(s > 0.0);
}
