//! Densities against independent closed forms of `(c+w)^s` expansions and a CAS table.

use dp_core::diffpoly::{rho_seq, rho_sequence, taylor_p, Convention, DerivMultiIndex, DiffSeries};
use dp_core::ring::{frac, rat, QuadExt, Rational, RingElem};
use num_traits::One;
use proptest::prelude::*;

/// Coefficient of `w^k` in `(c+w)^s`: `binom(s, k) c^(s-k)` with `s = num/3`.
fn power_coeff(num: i64, k: u32) -> RingElem {
    let s = frac(num, 3);
    let mut b = Rational::one();
    for i in 0..k {
        b = b * (&s - rat(i as i64)) / rat(i as i64 + 1);
    }
    RingElem::monomial(QuadExt::rational(b), num - 3 * k as i64)
}

fn idx(f: &[usize]) -> DerivMultiIndex {
    DerivMultiIndex::from_factors(f)
}

#[test]
fn rho0_is_minus_wx_over_3m() {
    let d = 6;
    let rho = rho_seq(0, d).unwrap();
    // -(1/3) w_x (c+w)^(-1)
    let mut expected = DiffSeries::zero(d);
    for k in 0..d {
        let mut f = vec![0usize; k as usize];
        f.push(1);
        let t = DiffSeries::monomial(d, idx(&f), power_coeff(-3, k).scale(&frac(-1, 3)));
        expected = expected.add(&t).unwrap();
    }
    assert_eq!(rho[0], expected);
    assert_eq!(rho[0].coeff_of(&[1]), RingElem::frac_c(-1, 3, -3));
    assert_eq!(rho[0].coeff_of(&[0, 1]), RingElem::frac_c(1, 3, -6));
}

#[test]
fn rho1_matches_chain_rule_form() {
    // rho1 = (7/27) m^(-7/3) w_x^2 - (2/9) m^(-4/3) w_xx - (1/3) m^(-1/3)
    let d = 6;
    let rho = rho_seq(1, d).unwrap();
    let mut expected = DiffSeries::zero(d);
    for k in 0..=d {
        let w = vec![0usize; k as usize];
        let mut a = w.clone();
        a.extend([1, 1]);
        let mut b = w.clone();
        b.push(2);
        expected = expected
            .add(&DiffSeries::monomial(d, idx(&a), power_coeff(-7, k).scale(&frac(7, 27))))
            .unwrap()
            .add(&DiffSeries::monomial(d, idx(&b), power_coeff(-4, k).scale(&frac(-2, 9))))
            .unwrap()
            .add(&DiffSeries::monomial(d, idx(&w), power_coeff(-1, k).scale(&frac(-1, 3))))
            .unwrap();
    }
    assert_eq!(rho[1], expected);
}

#[test]
fn rho1_low_order_coefficients() {
    let rho = rho_seq(1, 4).unwrap();
    assert_eq!(rho[1].coeff_of(&[2]), RingElem::frac_c(-2, 9, -4));
    assert_eq!(rho[1].coeff_of(&[1, 1]), RingElem::frac_c(7, 27, -7));
    assert_eq!(rho[1].coeff_of(&[]), RingElem::frac_c(-1, 3, -1));
    assert_eq!(rho[1].coeff_of(&[0, 0]), RingElem::frac_c(-2, 27, -7));
    assert_eq!(rho[1].coeff_of(&[0, 2]), RingElem::frac_c(8, 27, -7));
}

#[test]
fn base_case_identities() {
    let d = 6;
    let seq = rho_sequence(1, d, Convention::Printed).unwrap();
    let p = &seq.p;
    let (rho0, rho1) = (&seq.rho[0], &seq.rho[1]);
    let p2 = p.mul(p).unwrap();
    let first = rho0.mul(&p2).unwrap().add(&p.mul(&p.dx()).unwrap()).unwrap();
    assert!(first.is_zero());
    let second = p
        .sub(&p.dxx())
        .unwrap()
        .sub(&rho1.mul(&p2).unwrap().scale_rat(&rat(3)))
        .unwrap()
        .sub(&p.mul(&rho0.mul(rho0).unwrap()).unwrap().scale_rat(&rat(3)))
        .unwrap()
        .sub(&rho0.mul(p).unwrap().dx().scale_rat(&rat(3)))
        .unwrap();
    assert!(second.is_zero(), "residual {}", second);
}

#[test]
fn linear_coefficients_from_recursion() {
    // independent CAS expansion of the printed recursion
    let rho = rho_seq(5, 2).unwrap();
    let expect = [(-1, 3, -3), (-2, 9, -4), (-1, 3, -5), (-7, 9, -6), (-2, 1, -7), (-47, 9, -8)];
    for (m, (n, d, k)) in expect.iter().enumerate() {
        assert_eq!(rho[m].coeff(&DerivMultiIndex::var(m + 1)), RingElem::frac_c(*n, *d, *k), "c_{}", m);
    }
}

#[test]
fn recursion_round_trip_is_exact() {
    for conv in [Convention::Printed, Convention::Lax] {
        let seq = rho_sequence(8, 6, conv).unwrap();
        for n in 0..=6 {
            assert!(seq.residual(n).unwrap().is_zero(), "{:?} level {}", conv, n);
        }
    }
}

#[test]
fn densities_in_weight_class_and_affine() {
    let seq = rho_sequence(8, 6, Convention::Printed).unwrap();
    for (n, r) in seq.rho.iter().enumerate() {
        let cert = r.classify(n as u32 + 1);
        assert!(cert.in_sigma, "rho{} weight", n);
        assert!(cert.affine_top, "rho{} affine", n);
        assert_eq!(r.order(), n as u32 + 1);
    }
}

#[test]
fn p_series_matches_binomial() {
    let p = taylor_p(8);
    for k in 0..=8u32 {
        let f = vec![0usize; k as usize];
        assert_eq!(p.coeff_of(&f), power_coeff(1, k).scale(&rat(-1)));
    }
}

fn series(d: u32) -> impl Strategy<Value = DiffSeries> {
    prop::collection::vec((prop::collection::vec(0usize..4, 0..4), -5i64..=5, 1i64..=4, -6i64..=6), 0..5).prop_map(move |ts| {
        let mut s = DiffSeries::zero(d);
        for (f, n, den, k) in ts {
            s = s.add(&DiffSeries::monomial(d, DerivMultiIndex::from_factors(&f), RingElem::frac_c(n, den, k))).unwrap();
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leibniz_rule(f in series(5), g in series(5)) {
        let lhs = f.mul(&g).unwrap().dx();
        let rhs = f.dx().mul(&g).unwrap().add(&f.mul(&g.dx()).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn class_bounds_close(f in series(5), g in series(5)) {
        let prod = f.mul(&g).unwrap();
        let fmin = f.classify(0).min_degree;
        let gmin = g.classify(0).min_degree;
        prop_assert!(prod.is_zero() || prod.classify(0).min_degree >= fmin + gmin);
        let wmax = |s: &DiffSeries| s.terms().map(|(a, _)| a.weight()).max().unwrap_or(0);
        prop_assert!(wmax(&prod) <= wmax(&f) + wmax(&g));
        for (a, _) in prod.terms() {
            prop_assert!(a.top().unwrap_or(0) as u32 <= f.order().max(g.order()));
        }
        let dfx = f.dx();
        for (a, _) in dfx.terms() {
            prop_assert!(a.top().unwrap_or(0) as u32 <= f.order() + 1);
            prop_assert!(a.degree() >= 1);
        }
        prop_assert!(dfx.terms().all(|(a, _)| a.weight() <= wmax(&f) + 1));
    }

    #[test]
    fn inverse_round_trip(f in series(4), k in -3i64..=3, n in 1i64..5) {
        let unit = DiffSeries::constant(4, RingElem::frac_c(n, 1, k));
        let g = unit.add(&f.parts(1, 4)).unwrap();
        let inv = g.invert().unwrap();
        prop_assert!(g.mul(&inv).unwrap().sub(&DiffSeries::one(4)).unwrap().is_zero());
    }

    #[test]
    fn split_and_recombine(f in series(5)) {
        let mut acc = DiffSeries::zero(5);
        for d in 0..=5 {
            acc = acc.add(&f.part(d)).unwrap();
        }
        prop_assert_eq!(acc, f);
    }

    #[test]
    fn series_json_round_trip(f in series(5)) {
        prop_assert_eq!(DiffSeries::from_json(&f.to_json()).unwrap(), f);
    }
}
