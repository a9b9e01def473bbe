use dp_core::conserved::*;
use dp_core::diffpoly::{Convention, DerivMultiIndex, DiffSeries};
use dp_core::ring::{frac, rat, RingElem};

fn c(n: i64, d: i64, k: i64) -> RingElem {
    RingElem::frac_c(n, d, k)
}

#[test]
fn gamma1_quadratic_form() {
    let g = gamma(1, 3).unwrap();
    assert_eq!(g.quadratic.get(0), c(-2, 27, -7));
    assert_eq!(g.quadratic.get(1), c(-1, 27, -7));
    assert_eq!(g.quadratic.support(), vec![0, 1]);
    assert_eq!(g.constant, c(-1, 3, -1));
    // -2/27 w^2 + 8/27 w w_xx + 7/27 w_x^2 reduced by hand
    let d = 3;
    let mut dens = DiffSeries::zero(d);
    for (f, v) in [(&[0usize, 0][..], c(-2, 27, -7)), (&[0, 2][..], c(8, 27, -7)), (&[1, 1][..], c(7, 27, -7))] {
        dens = dens.add(&DiffSeries::monomial(d, DerivMultiIndex::from_factors(f), v)).unwrap();
    }
    assert_eq!(ibp_reduce(&dens).0, g.quadratic);
}

#[test]
fn even_levels_have_no_quadratic_part() {
    let gs = gammas(10, 2, Convention::Printed).unwrap();
    for g in gs.iter().step_by(2) {
        assert!(g.quadratic.is_zero(), "Gamma {}", g.n);
    }
    assert!(gamma(0, 3).unwrap().quadratic.is_zero());
    assert!(gamma(2, 3).unwrap().quadratic.is_zero());
}

#[test]
fn odd_level_quadratic_tables() {
    // independent CAS expansion of the printed recursion, c^(-11/3) and c^(-13/3) factors
    let gs = gammas(7, 2, Convention::Printed).unwrap();
    assert!(gs[3].quadratic.is_zero(), "level 3 quadratic part vanishes identically");
    let g5 = [(20, 243), (-2, 27), (-26, 81), (-5, 27)];
    for (i, (n, d)) in g5.iter().enumerate() {
        assert_eq!(gs[5].quadratic.get(i as u32), c(*n, *d, -11), "d5^{}", i);
    }
    let lax = gammas(7, 2, Convention::Lax).unwrap();
    assert!(lax[3].quadratic.is_zero());
    let g5l = [(20, 729), (10, 243), (2, 81), (1, 243)];
    for (i, (n, d)) in g5l.iter().enumerate() {
        assert_eq!(lax[5].quadratic.get(i as u32), c(*n, *d, -11));
    }
    let g7l = [(-35, 2187), (-70, 2187), (-7, 243), (-8, 729), (-1, 729)];
    for (i, (n, d)) in g7l.iter().enumerate() {
        assert_eq!(lax[7].quadratic.get(i as u32), c(*n, *d, -13));
    }
}

#[test]
fn top_quadratic_coefficients() {
    let gs = gammas(9, 2, Convention::Printed).unwrap();
    for n in [1usize, 5, 7, 9] {
        assert!(!gs[n].quadratic.get((n as u32 + 1) / 2).is_zero(), "level {}", n);
    }
    assert!(gs[3].quadratic.get(2).is_zero());
}

#[test]
fn linear_table_constants() {
    let t = linear_table(20).unwrap();
    assert_eq!(t.c[0], c(-1, 3, -3));
    assert_eq!(t.c[1], c(-2, 9, -4));
    assert_eq!(t.c[2], c(-1, 3, -5));
    for m in 0..=20 {
        assert_eq!(t.c[m], closed_form_c(m as u32));
    }
}

#[test]
fn corrupted_table_is_rejected() {
    let mut t = linear_table(6).unwrap();
    t.c[4] = &t.c[4] + &c(1, 1000, -7);
    assert!(matches!(t.verify(), Err(ConservedError::RecursionMismatch(4))));
}

#[test]
fn s_values() {
    let t = linear_table(17).unwrap();
    assert_eq!(compute_sn(&t, 1).unwrap(), c(-14, 81, -8));
    assert_eq!(compute_sn(&t, 3).unwrap(), c(89, 81, -10));
    for n in (1..=15).step_by(2) {
        let s = compute_sn(&t, n).unwrap();
        let (_, k) = s.as_monomial().unwrap();
        assert_eq!(k, -(3 * 2 + n as i64 + 1), "S_{} exponent", n);
    }
}

#[test]
fn s_signs_alternate_at_unit_parameter() {
    let t = linear_table(9).unwrap();
    let mut prev = 0.0f64;
    for n in [1usize, 3, 5, 7] {
        let v = compute_sn(&t, n).unwrap().eval(1.0, 64).unwrap();
        // float oracle from the two-step recurrence x_{k+2} = 3x_{k+1} - x_k
        let mut x = vec![-1.0 / 3.0, -2.0 / 9.0];
        for k in 0..n {
            x.push(3.0 * x[k + 1] - x[k]);
        }
        let h = (n as i64 + 1) / 2;
        let oracle: f64 = (0..=n + 1).map(|k| if (h - k as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 } * x[k] * x[n + 1 - k]).sum();
        assert!((v - oracle).abs() < 1e-12 * oracle.abs().max(1.0));
        assert!(v * prev <= 0.0);
        prev = v;
    }
}

#[test]
fn quadratic_relation_matches_recursion() {
    let t = linear_table(12).unwrap();
    let gs = gammas(11, 2, Convention::Printed).unwrap();
    for n in [1usize, 3, 5, 7, 9] {
        assert!(quad_consistency(n, &t, &gs).unwrap(), "n = {}", n);
    }
    assert_eq!(quad_relation(&t, 3).unwrap(), c(-5, 27, -11));
    // sign-flipped prediction is detected
    let flipped = -&quad_relation(&t, 5).unwrap();
    assert_ne!(gs[7].quadratic.get(4), flipped);
}

#[test]
fn m1_coefficients() {
    let m = m1_expansion(4);
    assert_eq!(m.constant, RingElem::c_pow(1));
    assert_eq!(m.quadratic.get(0), c(-1, 9, -5));
    assert_eq!(m.quadratic.support(), vec![0]);
    assert_eq!(m.higher.coeff_of(&[0, 0, 0]), c(5, 81, -8));
    assert_eq!(m.higher.coeff_of(&[0, 0, 0, 0]), c(-10, 243, -11));
}

#[test]
fn triangularization_stops_at_level_three() {
    let gs = gammas(9, 3, Convention::Printed).unwrap();
    let m1 = m1_expansion(3);
    match triangularize(4, &gs, &m1) {
        Err(ConservedError::DegenerateLeadingCoefficient { level, coeff, partial }) => {
            assert_eq!(level, 3);
            assert!(coeff.is_zero());
            assert_eq!(partial.len(), 1);
            let f1 = &partial[0];
            assert_eq!(f1.quadratic.support(), vec![1]);
            assert_eq!(f1.quadratic.get(1), RingElem::one());
        }
        other => panic!("unexpected {:?}", other.map(|v| v.len())),
    }
    let f1 = triangularize(0, &gs, &m1).unwrap();
    assert_eq!(f1.len(), 1);
    // F1 = (Gamma1 - (d0/m2) M1)/d1 = -27 c^(7/3) Gamma1 - 18 c^(5/3) ... constant check
    let expect_const = &(&gs[1].constant - &(&(&gs[1].quadratic.get(0) * &m1.quadratic.get(0).invert().unwrap()) * &m1.constant))
        * &gs[1].quadratic.get(1).invert().unwrap();
    assert_eq!(f1[0].constant, expect_const);
}

#[test]
fn f1_quadratic_fourier_weights_match_k2() {
    let gs = gammas(1, 3, Convention::Printed).unwrap();
    let f1 = triangularize(0, &gs, &m1_expansion(3)).unwrap().remove(0);
    let w = k_quadratic_fourier(2, 6);
    for j in 1..=6 {
        assert_eq!(f1.quadratic.fourier_weight(j), RingElem::from_rational(w[&j].clone()));
    }
}

#[test]
fn growth_threshold_of_linear_coefficients() {
    // |c_m| grows below ((3+sqrt5)/2)^3 ~ 17.94 and decays above it
    let threshold = ((3.0 + 5f64.sqrt()) / 2.0).powi(3);
    for cv in [0.5, 2.0, -2.0, 10.0, 20.0, -30.0] {
        let c10 = closed_form_c(10).eval(cv, 64).unwrap().abs();
        let c30 = closed_form_c(30).eval(cv, 64).unwrap().abs();
        if f64::abs(cv) < threshold {
            assert!(c30 > c10, "c = {}", cv);
        } else {
            assert!(c30 < c10, "c = {}", cv);
        }
    }
}

#[test]
fn sign_table() {
    let t = linear_table(12).unwrap();
    for (m, cm) in t.c.iter().enumerate() {
        let (q, _) = cm.as_monomial().unwrap();
        assert!(q.a < rat(0), "c_{} < 0 for c > 0", m);
        // c = -1: c^(k/3) = (-1)^k with k = -(m+3)
        let at_neg = cm.eval_at_cube(&rat(-1)).unwrap().a;
        if m >= 2 && m % 2 == 0 {
            assert!(at_neg > rat(0), "even m = {}", m);
        }
        if m % 2 == 1 {
            assert!(at_neg < rat(0), "odd m = {}", m);
        }
    }
    assert_eq!(t.c[0].eval_at_cube(&rat(-1)).unwrap().a, frac(1, 3));
}
