use dp_spectral::grid::Grid;
use dp_spectral::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Random field on modes `1..=band`, coefficients of size `amp`.
fn field(n: usize, band: i64, amp: f64, seed: u64) -> SpectralState {
    let mut s = SpectralState::random(n, 1.0, seed, band as usize).unwrap();
    let m = max_abs(&s.spectrum);
    s.scale(amp / m);
    s
}

/// Equal-size coefficients on `1..=band` with fixed phases; tiny enough that `u^2` is invisible.
fn linear_field(n: usize, band: i64) -> SpectralState {
    let modes: Vec<(i64, Complex64)> = (1..=band).map(|j| (j, Complex64::from_polar(1e-14, j as f64))).collect();
    SpectralState::from_modes(n, &modes).unwrap()
}

/// Literal form `(1-dxx)^-1 [c u_xxx - 4c u_x + u u_xxx + 3 u_x u_xx - 4 u u_x]`, coded from scratch.
fn literal_rhs(s: &SpectralState, c: f64) -> Vec<Complex64> {
    let g = Grid::new(s.n_modes);
    let deriv = |k: u32| {
        let mut d = s.spectrum.clone();
        g.apply(&mut d, |j| cx(0.0, j as f64).powu(k));
        g.to_physical(&d)
    };
    let (u, ux, uxx, uxxx) = (deriv(0), deriv(1), deriv(2), deriv(3));
    let bracket: Vec<f64> = (0..u.len())
        .map(|i| c * uxxx[i] - 4.0 * c * ux[i] + u[i] * uxxx[i] + 3.0 * ux[i] * uxx[i] - 4.0 * u[i] * ux[i])
        .collect();
    let mut out = g.to_spectral(&bracket);
    g.apply(&mut out, |j| cx(1.0 / (1.0 + (j * j) as f64), 0.0));
    out
}

#[test]
fn dispersion_values() {
    assert_eq!(dispersion(0), 0.0);
    assert_eq!(dispersion(1), 2.5);
    assert_eq!(dispersion(-2), -3.2);
}

#[test]
fn rhs_matches_literal_equation() {
    for (c, seed) in [(1.0, 1u64), (-0.7, 2), (3.0, 3)] {
        let n = 64;
        // band below N/4 keeps every product exact on the grid
        let s = field(n, 15, 0.05, seed);
        let solver = Solver::new(c, n, false);
        let a = solver.dp_rhs(&s.spectrum);
        let b = literal_rhs(&s, c);
        let scale = max_abs(&b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() <= 1e-13 * scale, "c = {}", c);
        }
    }
}

#[test]
fn zero_is_a_fixed_point() {
    let solver = Solver::new(1.0, 32, true);
    let z = SpectralState::zero(32);
    assert_eq!(max_abs(&solver.dp_rhs(&z.spectrum)), 0.0);
    assert_eq!(max_abs(&solver.mollified_rhs(&z.spectrum, 0.3)), 0.0);
    let next = solver.step(&z, 1e-3).unwrap();
    assert_eq!(max_abs(&next.spectrum), 0.0);
}

#[test]
fn cosine_feeds_only_second_harmonic() {
    let n = 32;
    let s = SpectralState::from_modes(n, &[(1, cx(0.05, 0.0))]).unwrap();
    let r = Solver::new(1.0, n, true).dp_rhs(&s.spectrum);
    let scale = max_abs(&r);
    for (k, z) in r.iter().enumerate() {
        let j = Grid::new(n).wavenumber(k).abs();
        if j != 1 && j != 2 {
            assert!(z.norm() < 1e-15 * scale, "mode {}", j);
        }
    }
    assert!(r[2].norm() > 1e-4);
}

#[test]
fn linear_modes_rotate_at_dispersion_rate() {
    let (n, c, dt) = (64, 1.3, 1e-3);
    let s = linear_field(n, 10);
    let solver = Solver::new(c, n, true);
    let next = solver.step(&s, dt).unwrap();
    for j in 1..=10 {
        let exact = s.mode(j) * Complex64::from_polar(1.0, -c * dispersion(j) * dt);
        let err = (next.mode(j) - exact).norm() / s.mode(j).norm();
        assert!(err < 1e-11, "mode {} err {}", j, err);
    }
}

#[test]
fn linear_amplitudes_are_preserved() {
    let (n, c, dt) = (64, 1.0, 1e-3);
    let s0 = linear_field(n, 10);
    let solver = Solver::new(c, n, true);
    let mut s = s0.clone();
    for _ in 0..1000 {
        s = solver.step(&s, dt).unwrap();
    }
    for j in 1..=10 {
        assert!((s.mode(j).norm() / s0.mode(j).norm() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn time_reversal_is_fifth_order() {
    let (n, c) = (64, 1.0);
    let s = field(n, 8, 0.01, 7);
    let solver = Solver::new(c, n, true);
    let mut errs = Vec::new();
    for dt in [4e-3, 2e-3] {
        let back = solver.step(&solver.step(&s, dt).unwrap(), -dt).unwrap();
        errs.push(back.distance(&s, 0.0) / s.sobolev_norm(0.0));
    }
    assert!(errs[0] < 1e-10);
    // local error O(dt^5): halving dt shrinks it by ~32
    assert!(errs[0] / errs[1] > 20.0, "{:?}", errs);
}

#[test]
fn symmetry_and_mean_hold_over_many_steps() {
    let n = 64;
    let solver = Solver::new(1.0, n, true);
    let mut s = field(n, 12, 0.01, 8);
    for _ in 0..10_000 {
        s = solver.step(&s, 1e-3).unwrap();
    }
    assert_eq!(s.mode(0), cx(0.0, 0.0));
    assert!(s.symmetry_defect() <= f64::EPSILON);
    let mut buf = s.spectrum.clone();
    // imaginary part of the inverse transform of a Hermitian spectrum
    rustfft::FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    assert!(buf.iter().all(|z| z.im.abs() < 1e-16));
}

#[test]
fn dealiasing_keeps_two_thirds() {
    let n = 64;
    let solver = Solver::new(1.0, n, true);
    let s = field(n, 21, 0.05, 9);
    let r = solver.dp_rhs(&s.spectrum);
    for (k, z) in r.iter().enumerate() {
        if Grid::new(n).wavenumber(k).unsigned_abs() as usize > n / 3 {
            assert_eq!(*z, cx(0.0, 0.0));
        }
    }
}

#[test]
fn step_rejects_large_dt() {
    let solver = Solver::new(1.0, 64, true);
    let s = SpectralState::zero(64);
    assert!(matches!(solver.step(&s, 0.1), Err(SimError::DtTooLarge { .. })));
}

#[test]
fn blowup_guard_fires() {
    let mut solver = Solver::new(1.0, 32, true);
    solver.blowup_ceiling = 0.05;
    let s = SpectralState::from_modes(32, &[(1, cx(0.03, 0.0))]).unwrap();
    assert!(matches!(solver.step(&s, 1e-3), Err(SimError::BlowUpDetected { .. })));
}

#[test]
fn mollifier_vanishes_at_small_eps() {
    let n = 64;
    let s = field(n, 15, 0.05, 10);
    let solver = Solver::new(0.8, n, true);
    let a = solver.mollified_rhs(&s.spectrum, 1.0 / 64.0);
    let b = solver.dp_rhs(&s.spectrum);
    let scale = max_abs(&b);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).norm() <= 1e-13 * scale);
    }
    // a coarse cutoff changes the rhs
    let coarse = solver.mollified_rhs(&s.spectrum, 0.2);
    assert!(coarse.iter().zip(&b).any(|(x, y)| (x - y).norm() > 1e-6 * scale));
}

#[test]
fn mollified_run_converges() {
    let mut cfg = SimConfig::new(1.0, 64, 1e-3, 0.5);
    cfg.gammas = vec![];
    let init = SpectralState::from_config(&cfg).unwrap();
    let (_, u) = run(&cfg, &init, 1000).unwrap();
    let mut prev = f64::INFINITY;
    for e in [0.4, 0.2, 0.1] {
        cfg.mollifier_eps = Some(e);
        let (_, ue) = run(&cfg, &init, 1000).unwrap();
        let d = ue.distance(&u, 2.0);
        assert!(d < prev, "eps {} distance {}", e, d);
        prev = d;
    }
}

#[test]
fn run_with_zero_horizon_samples_once() {
    let mut cfg = SimConfig::new(1.0, 32, 1e-3, 0.0);
    cfg.gammas = vec![1];
    let init = SpectralState::from_config(&cfg).unwrap();
    let (series, fin) = run(&cfg, &init, 10).unwrap();
    assert_eq!(series.len(), 1);
    assert_eq!(fin, init);
    let csv = series.to_csv();
    assert!(csv.starts_with("t,H,M0,M1,gamma_1,H2_norm,K1_quad,K2_quad\n"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn short_run_conserves_invariants() {
    let mut cfg = SimConfig::new(1.0, 64, 1e-3, 1.0);
    cfg.gammas = vec![1, 3];
    cfg.sample_every = 50;
    let init = SpectralState::from_config(&cfg).unwrap();
    let (s, _) = run(&cfg, &init, 50).unwrap();
    assert_eq!(s.len(), 21);
    for q in [&s.h, &s.m0, &s.m1, &s.gamma[&1]] {
        assert!(relative_drift(q) < 1e-10);
    }
    assert!(s.gamma[&3].iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn random_init_is_reproducible_and_normalized() {
    let a = SpectralState::random(64, 1e-2, 42, 8).unwrap();
    let b = SpectralState::random(64, 1e-2, 42, 8).unwrap();
    assert_eq!(a, b);
    assert!((a.sobolev_norm(2.0) - 1e-2).abs() < 1e-15);
    assert_ne!(a, SpectralState::random(64, 1e-2, 43, 8).unwrap());
    assert_eq!(a.mode(9), cx(0.0, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rhs_is_hermitian(seed in 0u64..1000, c in prop_oneof![0.2f64..3.0, -3.0f64..-0.2]) {
        let s = field(32, 10, 0.02, seed);
        let solver = Solver::new(c, 32, true);
        for r in [solver.dp_rhs(&s.spectrum), solver.mollified_rhs(&s.spectrum, 0.15)] {
            prop_assert_eq!(r[0], cx(0.0, 0.0));
            let scale = max_abs(&r);
            for k in 1..16 {
                prop_assert!((r[k] - r[32 - k].conj()).norm() < 1e-15 * scale);
            }
        }
    }

    #[test]
    fn parseval(seed in 0u64..1000) {
        let s = field(32, 10, 0.3, seed);
        let u = Grid::new(32).to_physical(&s.spectrum);
        let l2: f64 = u.iter().map(|v| v * v).sum::<f64>() / 32.0;
        prop_assert!((l2 - s.sobolev_norm(0.0).powi(2)).abs() < 1e-14);
    }
}
