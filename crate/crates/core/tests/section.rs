use std::f64::consts::PI;

use pme_tube::scalar::relative_sup_distance;
use pme_tube::section::*;
use proptest::prelude::*;

fn interior(v: &[f64]) -> &[f64] {
    &v[1..v.len() - 1]
}

fn rel_interior(a: &SectionProfile<f64>, b: &SectionProfile<f64>) -> f64 {
    relative_sup_distance(interior(&a.phi), interior(&b.phi))
}

/// Peak of `Phi` from the first integral: with `q = (m+1)/m` and
/// `K = m / ((m-1)(m+1))`, the half-length is
/// `w_max^{(m-1)/(2m)} / sqrt(2K) * B(1/q, 1/2) / q`.
fn beta_peak(length: f64, m: f64) -> f64 {
    let q = (m + 1.0) / m;
    let k = m / ((m - 1.0) * (m + 1.0));
    let a = 1.0 / q;
    let beta = libm::tgamma(a) * libm::tgamma(0.5) / libm::tgamma(a + 0.5);
    let g1 = beta / q;
    let wmax = (length / 2.0 * (2.0 * k).sqrt() / g1).powf(2.0 * m / (m - 1.0));
    wmax.powf(1.0 / m)
}

#[test]
fn shooting_peak_matches_beta_function() {
    for &m in &[1.5, 2.0, 3.0, 4.5] {
        for &length in &[1.0, PI, 5.0] {
            let p = shoot_profile(length, m, 101).unwrap();
            let exact = beta_peak(length, m);
            let rel = (p.sup_phi - exact).abs() / exact;
            assert!(
                rel < 1e-8,
                "m = {m}, L = {length}: {} vs {exact} ({rel:e})",
                p.sup_phi
            );
            assert_eq!(p.phi[50], p.sup_phi);
        }
    }
}

#[test]
fn shooting_profile_invariants() {
    for &m in &[1.5, 2.0, 3.0] {
        let p = shoot_profile(PI, m, 201).unwrap();
        p.check_invariants(0.0).unwrap();
        for i in 0..201 {
            assert_eq!(p.phi[i], p.phi[200 - i]);
        }
    }
}

#[test]
fn shooting_residual_is_second_order_away_from_the_wall() {
    // Derivatives of Phi^m blow up at the wall, so the h^2 rate is a bulk
    // property; nodes within L/8 of either end are excluded.
    let bulk = |n: usize| {
        let p = shoot_profile(PI, 2.0, n).unwrap();
        let r = p.residual();
        let h = p.grid.h();
        r.iter()
            .enumerate()
            .filter(|(k, _)| {
                let z = (k + 1) as f64 * h;
                (PI / 8.0..=PI - PI / 8.0).contains(&z)
            })
            .fold(0.0f64, |a, (_, v)| a.max(v.abs()))
    };
    let (coarse, fine) = (bulk(101), bulk(201));
    let ratio = coarse / fine;
    assert!(fine < 1e-3, "bulk residual {fine:e}");
    assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn relaxation_matches_shooting() {
    for &m in &[1.5, 2.0, 3.0] {
        for &length in &[1.0, PI] {
            let r = relax_profile(length, m, 201, 1e-10).unwrap();
            let s = shoot_profile(length, m, 201).unwrap();
            let d = rel_interior(&r, &s);
            assert!(d < 1e-3, "m = {m}, L = {length}: {d:e}");
            r.check_invariants(1e-9).unwrap();
        }
    }
}

#[test]
fn relaxation_error_shrinks_fourfold_under_refinement() {
    let err = |n| {
        rel_interior(
            &relax_profile(PI, 2.0, n, 1e-11).unwrap(),
            &shoot_profile(PI, 2.0, n).unwrap(),
        )
    };
    let (a, b, c) = (err(101), err(201), err(401));
    for ratio in [a / b, b / c] {
        assert!((3.0..5.0).contains(&ratio), "ratios {} {}", a / b, b / c);
    }
}

#[test]
fn relaxation_from_above_and_below_reaches_the_same_state() {
    let s = shoot_profile(PI, 2.0, 101).unwrap();
    let reference = relax_profile(PI, 2.0, 101, 1e-11).unwrap();
    for scale in [2.0, 0.5] {
        let init = s.phi.iter().map(|v| v * scale).collect();
        let p = relax_profile_from(s.grid, 2.0, init, 1e-11, RelaxOptions::default()).unwrap();
        let d = relative_sup_distance(&p.phi, &reference.phi);
        assert!(d < 1e-9, "scale {scale}: {d:e}");
    }
}

#[test]
fn relaxation_rejects_nonpositive_start() {
    let g = SectionGrid::new(PI, 11).unwrap();
    assert!(relax_profile_from(g, 2.0, vec![0.0; 11], 1e-8, RelaxOptions::default()).is_err());
}

#[test]
fn eigenvalue_oracle() {
    assert_eq!(analytic_lambda1(PI).unwrap(), 1.0);
    assert_eq!(analytic_lambda1(2.0 * PI).unwrap(), 0.25);
    assert!((analytic_lambda1(1.0).unwrap() - PI * PI).abs() < 1e-12);
    assert!(analytic_lambda1(0.0).is_err());

    let e201 = numeric_lambda1(&SectionGrid::new(PI, 201).unwrap()).unwrap() - 1.0;
    let e401 = numeric_lambda1(&SectionGrid::new(PI, 401).unwrap()).unwrap() - 1.0;
    assert!(e201.abs() < 1e-3);
    let ratio = e201 / e401;
    assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    let l1 = numeric_lambda1(&SectionGrid::new(1.0, 201).unwrap()).unwrap();
    assert!((l1 - PI * PI).abs() < 1e-2);
    assert!(SectionGrid::new(1.0_f64, 2).is_err());
}

#[test]
fn critical_speed_values() {
    assert_eq!(critical_speed(2.0, 1.0).unwrap(), 1.0);
    assert_eq!(critical_speed(3.0, 1.0).unwrap(), 0.5);
    assert_eq!(critical_speed(2.0, 0.25).unwrap(), 2.0);
    assert!(matches!(
        critical_speed(1.0, 1.0),
        Err(pme_tube::Error::DegenerateExponent(_))
    ));
}

#[test]
fn dilation_predicts_direct_solve() {
    let base = shoot_profile(PI, 2.0, 201).unwrap();
    for lam in [1.25, 2.0] {
        let predicted = dilate_profile(&base, lam).unwrap();
        let direct = shoot_profile(lam * PI, 2.0, 201).unwrap();
        let d = rel_interior(&predicted, &direct);
        assert!(d < 1e-3, "lam = {lam}: {d:e}");
        assert!((predicted.lambda1 - direct.lambda1).abs() < 1e-14);
    }
    assert!(dilate_profile(&base, 0.9).is_err());
}

#[test]
fn epsilon_dilation_identity() {
    let m = 2.5;
    let p = shoot_profile(PI, m, 101).unwrap();
    for eps in [0.1, 0.3, 0.7] {
        let lam = (1.0f64 - eps).powf(-(m - 1.0) / 2.0);
        let d = dilate_profile(&p, lam).unwrap();
        // node i of the dilated grid sits at lam * z_i
        for i in 0..101 {
            let back = (1.0 - eps) * d.phi[i];
            assert!(
                (back - p.phi[i]).abs() <= 1e-14 * p.sup_phi,
                "eps {eps} node {i}"
            );
        }
    }
}

#[test]
fn cosine_subsolution_examples() {
    let p = shoot_profile(PI, 2.0, 65).unwrap();
    let s = cosine_subsolution(&p, 0.5, 0.1, 41).unwrap();
    let expected = 0.5f64.sqrt() * (1.0 + 0.01 * p.sup_phi) <= 1.0;
    assert_eq!(s.admissible, expected);
    assert!(s.admissible);

    // bracket exactly one
    let alpha = (1.0 / p.sup_phi).sqrt() * 1e-3;
    let lam = (1.0 + alpha * alpha * p.sup_phi).powf(-2.0);
    let edge = cosine_subsolution(&p, lam, alpha, 5).unwrap();
    assert!(edge.admissible);
    let beyond = cosine_subsolution(&p, 1.0, 0.5, 5).unwrap();
    assert!(!beyond.admissible);
}

#[test]
fn cosine_residual_is_a_subsolution_up_to_h2() {
    let positive_part = |n: usize, ny: usize| {
        let p = shoot_profile(PI, 2.0, n).unwrap();
        cosine_subsolution(&p, 0.5, 0.5, ny)
            .unwrap()
            .max_elliptic_residual()
            .max(0.0)
    };
    let coarse = positive_part(33, 33);
    let fine = positive_part(65, 65);
    assert!(
        fine <= coarse / 3.0 || fine == 0.0,
        "coarse {coarse:e} fine {fine:e}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn shooting_invariants_hold(m in 1.3f64..4.0, length in 0.5f64..4.0) {
        let p = shoot_profile(length, m, 65).unwrap();
        prop_assert!(p.check_invariants(0.0).is_ok());
        let exact = beta_peak(length, m);
        prop_assert!((p.sup_phi - exact).abs() <= 1e-8 * exact);
    }

    #[test]
    fn dilation_is_exact_for_the_oracle(m in 1.3f64..4.0, lam in 1.0f64..3.0) {
        let p = shoot_profile(1.0, m, 33).unwrap();
        let predicted = dilate_profile(&p, lam).unwrap();
        let exact = beta_peak(lam, m);
        prop_assert!((predicted.sup_phi - exact).abs() <= 1e-7 * exact);
    }
}
