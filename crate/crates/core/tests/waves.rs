use std::f64::consts::PI;
use std::sync::OnceLock;

use pme_tube::diagnostics::FrontSeries;
use pme_tube::section::*;
use pme_tube::waves::*;
use pme_tube::Error;

fn grid(n: usize, h: f64) -> Vec<f64> {
    (0..n).map(|j| j as f64 * h).collect()
}

#[test]
fn front_of_a_step_is_the_last_positive_node() {
    let y = grid(11, 0.5);
    let row: Vec<f64> = y
        .iter()
        .map(|&y| if y <= 3.0 { 1.0 } else { 0.0 })
        .collect();
    assert_eq!(front_curve(&row, &y, 1e-8), vec![Some(3.0)]);
    let mirrored: Vec<f64> = row.iter().rev().copied().collect();
    assert_eq!(back_curve(&mirrored, &y, 1e-8), vec![Some(2.0)]);
}

#[test]
fn front_of_a_linear_ramp_is_exact() {
    let y = grid(21, 0.25);
    let row: Vec<f64> = y.iter().map(|&y| (2.0 - y).max(0.0)).collect();
    let thr = 0.1;
    let f = front_curve(&row, &y, thr)[0].unwrap();
    assert!((f - 1.9).abs() < 1e-12, "{f}");
}

#[test]
fn empty_rows_have_no_front() {
    let y = grid(5, 1.0);
    let values = [vec![0.0; 5], vec![0.0, 1.0, 0.0, 0.0, 0.0]].concat();
    assert_eq!(front_curve(&values, &y, 1e-8), vec![None, Some(1.0)]);
    assert!(front_curve::<f64>(&[], &[], 1e-8).is_empty());
}

#[test]
fn front_of_sampled_barenblatt_within_one_spacing() {
    // u = t^{-a} (C - kappa y^2 t^{-2a})_+^{1/(m-1)} has its edge at
    // y = sqrt(C / kappa) t^a.
    for m in [1.5, 2.0, 3.0] {
        let (c, t) = (1.0f64, 2.0f64);
        let a = 1.0 / (m + 1.0);
        let kappa = (m - 1.0) / (2.0 * m * (m + 1.0));
        let edge = (c / kappa).sqrt() * t.powf(a);
        for h in [0.1, 0.05, 0.0125] {
            let y: Vec<f64> = (0..(2.0 * edge / h) as usize + 20)
                .map(|j| j as f64 * h - 0.3)
                .collect();
            let row: Vec<f64> = y
                .iter()
                .map(|&y| {
                    t.powf(-a)
                        * (c - kappa * y * y * t.powf(-2.0 * a))
                            .max(0.0)
                            .powf(1.0 / (m - 1.0))
                })
                .collect();
            let f = front_curve(&row, &y, 1e-8)[0].unwrap();
            assert!((f - edge).abs() <= h, "m = {m}, h = {h}: {f} vs {edge}");
        }
    }
}

struct Relaxed {
    profile: SectionProfile<f64>,
    wave: WaveProfile<f64>,
    stats: WaveStats<f64>,
}

fn relaxed() -> &'static Relaxed {
    static CELL: OnceLock<Relaxed> = OnceLock::new();
    CELL.get_or_init(|| {
        let profile = relax_profile(PI, 2.0, 32, 1e-12).unwrap();
        let (wave, stats) = relax_wave_with(
            &profile,
            profile.cstar,
            (-20.0, 10.0),
            301,
            1e-9,
            &WaveOptions::default(),
        )
        .unwrap();
        Relaxed {
            profile,
            wave,
            stats,
        }
    })
}

#[test]
fn relaxed_wave_is_monotone_compact_and_near_the_plateau() {
    let r = relaxed();
    let w = normalize_wave(&r.wave).unwrap();
    let inv = w.check_invariants();
    assert!(inv.passed(), "{inv:?}");
    // The discrete speed carries the O(h_xi) upwind error.
    let h = w.h_xi();
    assert!(
        (r.stats.final_speed - r.profile.cstar).abs() <= h,
        "{}",
        r.stats.final_speed
    );
    assert!(r.stats.drift.abs() < 1e-3);
    assert_eq!(w.speed, r.stats.final_speed);
    assert!(w.residual_sup(3.0) < 5e-3);
}

#[test]
fn normalization_is_idempotent_and_shift_equivariant() {
    let w = normalize_wave(&relaxed().wave).unwrap();
    let (_, top) = w.front_extent().unwrap();
    assert!(top.abs() <= w.h_xi() / 2.0);
    assert_eq!(w.xi0, top);
    assert_eq!(normalize_wave(&w).unwrap(), w);

    let k = 7;
    let mut shifted = w.clone();
    for (i, row) in shifted.values.chunks_exact_mut(w.n_xi).enumerate() {
        row.rotate_right(k);
        row[..k].fill(w.plateau[i]);
    }
    shifted.front = front_curve(&shifted.values, &shifted.xis(), shifted.threshold);
    shifted.normalized = false;
    let back = normalize_wave(&shifted).unwrap();
    assert_eq!(back.values, w.values);
    assert_eq!(back.front, w.front);

    let mut off = w.clone();
    off.xi_min = 1.0;
    off.xi_max = 31.0;
    assert!(normalize_wave(&off).is_err());
}

#[test]
fn reflection_is_an_involution_with_mirrored_residual() {
    let w = normalize_wave(&relaxed().wave).unwrap();
    let r = reflect_wave(&w);
    assert_eq!(r.orientation, Orientation::Reflected);
    assert_eq!(r.speed, -w.speed);
    assert_eq!(reflect_wave(&r), w);
    let a = w.elliptic_residual();
    let b = r.elliptic_residual();
    let n = w.n_xi;
    for (ra, rb) in a.chunks_exact(n).zip(b.chunks_exact(n)) {
        for j in 0..n {
            assert!(
                (ra[j] - rb[n - 1 - j]).abs() <= 1e-12,
                "{} {}",
                ra[j],
                rb[n - 1 - j]
            );
        }
    }
    // normalizing a reflected wave reflects the forward normalization
    assert_eq!(normalize_wave(&r).unwrap(), reflect_wave(&w));
    // sampling behind and ahead of the window
    assert_eq!(w.sample(5, -100.0), w.plateau[5]);
    assert_eq!(w.sample(5, 100.0), 0.0);
    assert_eq!(r.sample(5, 100.0), w.plateau[5]);
    assert_eq!(r.sample(5, -100.0), 0.0);
}

#[test]
fn front_drifts_forward_below_and_backward_above_the_speed() {
    let p = relax_profile(PI, 2.0, 16, 1e-12).unwrap();
    let slow = measure_drift(&p, 0.8 * p.cstar, (-20.0, 10.0), 151, 20.0).unwrap();
    let fast = measure_drift(&p, 1.2 * p.cstar, (-20.0, 10.0), 151, 20.0).unwrap();
    assert!(slow > 0.0, "{slow}");
    assert!(fast < 0.0, "{fast}");
}

#[test]
fn short_window_is_reported() {
    let p = relax_profile(PI, 2.0, 16, 1e-12).unwrap();
    // the support runs about 1.7 units ahead of the pinned level set
    let r = relax_wave(&p, p.cstar, (-6.0, 0.5), 66, 1e-9);
    assert!(matches!(r, Err(Error::WindowTooShort { .. })), "{r:?}");
}

#[test]
fn invalid_wave_requests_are_rejected() {
    let p = relax_profile(PI, 2.0, 16, 1e-12).unwrap();
    assert!(relax_wave(&p, -1.0, (-20.0, 10.0), 151, 1e-9)
        .unwrap_err()
        .is_validation());
    assert!(relax_wave(&p, 1.0, (-20.0, 10.0), 151, 0.0).is_err());
}

fn series(f: impl Fn(f64) -> f64, taus: impl Iterator<Item = f64>) -> FrontSeries<f64> {
    let mut s = FrontSeries::new();
    for t in taus {
        s.push(t, vec![Some(f(t)); 9]);
    }
    s
}

#[test]
fn speed_of_an_exact_line() {
    let s = series(|t| 2.0 * t + 1.0, (0..40).map(|k| 0.5 * k as f64));
    let (slope, intercept, residual) = measure_speed(&s, (0.0, 20.0)).unwrap();
    assert!((slope - 2.0).abs() < 1e-12);
    assert!((intercept - 1.0).abs() < 1e-12);
    assert!(residual < 1e-12);
}

#[test]
fn speed_with_a_decaying_correction() {
    let c = 0.75;
    let s = series(|t| c * t + t.sin() / t, (1..=400).map(|k| 0.25 * k as f64));
    let (slope, _, _) = measure_speed(&s, (20.0, 100.0)).unwrap();
    assert!((slope - c).abs() < 1e-3, "{slope}");
    assert!(matches!(
        measure_speed(&s, (20.0, 21.0)),
        Err(Error::Estimation(_))
    ));
}
