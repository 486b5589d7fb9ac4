use serde::Serialize;

use super::fit::{fit_line, FitResult};
use super::series::{ErrorSample, ErrorSeries};
use crate::dynamics::{TubeField, Variable};
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::section::SectionProfile;

fn check_pair<T: Real>(field: &TubeField<T>, profile: &SectionProfile<T>) -> Result<()> {
    if field.variable != Variable::Rescaled {
        return Err(invalid("diagnostics need a rescaled-variable field"));
    }
    if field.grid.nz() != profile.phi.len() {
        return Err(invalid("field and profile use different section grids"));
    }
    Ok(())
}

/// Indices of the `y` nodes with `|y| <= half_width`.
fn window<T: Real>(field: &TubeField<T>, half_width: T) -> std::ops::Range<usize> {
    let g = &field.grid;
    let lo = (0..g.ny()).find(|&j| g.y(j) >= -half_width);
    let hi = (0..g.ny()).rev().find(|&j| g.y(j) <= half_width);
    match (lo, hi) {
        (Some(lo), Some(hi)) if lo <= hi => lo..hi + 1,
        _ => 0..0,
    }
}

/// `sup |v / Phi - 1|` over interior section rows and `|y| <= c tau`.
pub fn relative_error_window<T: Real>(
    field: &TubeField<T>,
    profile: &SectionProfile<T>,
    c: T,
) -> Result<ErrorSample<T>> {
    check_pair(field, profile)?;
    if !(c > T::zero()) {
        return Err(invalid(format!("window speed must be positive, got {c}")));
    }
    let tau = field.time;
    let cols = window(field, c * tau.max(T::zero()));
    let rows = profile.grid.interior();
    let count = cols.len() * rows.len();
    if count == 0 {
        return Ok(ErrorSample {
            tau,
            c,
            error: None,
            count: 0,
        });
    }
    let mut worst = T::zero();
    for i in rows {
        let phi = profile.phi[i];
        for &v in &field.row(i)[cols.clone()] {
            worst = worst.max((v / phi - T::one()).abs());
        }
    }
    Ok(ErrorSample {
        tau,
        c,
        error: Some(worst),
        count,
    })
}

/// Windowed error at every snapshot.
pub fn error_series<T: Real>(
    snapshots: &[TubeField<T>],
    profile: &SectionProfile<T>,
    c: T,
) -> Result<ErrorSeries<T>> {
    let mut out = ErrorSeries::new();
    for s in snapshots {
        out.push(relative_error_window(s, profile, c)?);
    }
    Ok(out)
}

/// First sample after which the error decreases for three consecutive samples.
pub fn burn_in<T: Real>(series: &ErrorSeries<T>) -> Option<T> {
    let e: Vec<(T, T)> = series
        .samples
        .iter()
        .filter_map(|s| s.error.map(|e| (s.tau, e)))
        .collect();
    (0..e.len().saturating_sub(3))
        .find(|&k| (k..k + 3).all(|q| e[q + 1].1 < e[q].1))
        .map(|k| e[k].0)
}

/// Trend audit: `error(tau + lag) <= error(tau)` for every sampled `tau`
/// at or past `from` whose partner is also sampled. Returns the worst
/// increase (nonpositive when the trend holds) and the pairs checked.
pub fn trend_check<T: Real>(series: &ErrorSeries<T>, from: T, lag: T) -> (T, usize) {
    let e: Vec<(T, T)> = series
        .samples
        .iter()
        .filter_map(|s| s.error.map(|e| (s.tau, e)))
        .collect();
    let slack = lag * T::lit(1e-6);
    let mut worst = T::neg_infinity();
    let mut pairs = 0;
    for &(t, a) in e.iter().filter(|(t, _)| *t >= from) {
        if let Some(&(_, b)) = e.iter().find(|(s, _)| (*s - (t + lag)).abs() <= slack) {
            worst = worst.max(b - a);
            pairs += 1;
        }
    }
    (worst, pairs)
}

/// Largest value at nodes with `|y| >= c tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OuterSample<T> {
    pub tau: T,
    pub value: T,
    /// Support touches the guard band at the `y` ends, so the region beyond
    /// the grid cannot be vouched for.
    pub inconclusive: bool,
}

pub fn outer_support_max<T: Real>(field: &TubeField<T>, c: T) -> Result<OuterSample<T>> {
    if !(c > T::zero()) {
        return Err(invalid(format!("window speed must be positive, got {c}")));
    }
    let edge = c * field.time.max(T::zero());
    let g = &field.grid;
    let guard = 5.min(g.ny() / 2);
    let mut value = T::zero();
    let mut inconclusive = false;
    for i in 0..g.nz() {
        let row = field.row(i);
        for (j, &v) in row.iter().enumerate() {
            if g.y(j).abs() >= edge {
                value = value.max(v);
            }
        }
        inconclusive |= row[..guard]
            .iter()
            .chain(&row[g.ny() - guard..])
            .any(|&v| v > T::zero());
    }
    Ok(OuterSample {
        tau: field.time,
        value,
        inconclusive,
    })
}

/// Outcome of [`inner_uniform_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InnerUniform<T> {
    /// First snapshot time with `v >= (1 - eps) Phi` on the window; `None`
    /// when never achieved.
    pub first_tau: Option<T>,
    /// `sup (1 - v/Phi)_+` over the window at the last snapshot.
    pub final_error: T,
    /// Largest `v - Phi` over all windows scanned.
    pub ceiling_excess: T,
}

/// Scans snapshots for the first time the lower bound `(1 - eps) Phi`
/// holds on interior rows and `|y| <= c tau`. Snapshots with an empty
/// window are skipped.
pub fn inner_uniform_check<T: Real>(
    snapshots: &[TubeField<T>],
    profile: &SectionProfile<T>,
    eps: T,
    c: T,
) -> Result<InnerUniform<T>> {
    if !(c > T::zero() && c < profile.cstar) {
        return Err(invalid(format!(
            "window speed must lie in (0, {}), got {c}",
            profile.cstar
        )));
    }
    if !(eps > T::zero() && eps <= T::one()) {
        return Err(invalid(format!("eps must lie in (0, 1], got {eps}")));
    }
    let mut first = None;
    let mut last = T::zero();
    let mut excess = T::neg_infinity();
    for s in snapshots {
        check_pair(s, profile)?;
        let cols = window(s, c * s.time.max(T::zero()));
        if cols.is_empty() {
            continue;
        }
        let mut gap = T::zero();
        for i in profile.grid.interior() {
            let phi = profile.phi[i];
            for &v in &s.row(i)[cols.clone()] {
                gap = gap.max(T::one() - v / phi);
                excess = excess.max(v - phi);
            }
        }
        if first.is_none() && gap <= eps {
            first = Some(s.time);
        }
        last = gap;
    }
    Ok(InnerUniform {
        first_tau: first,
        final_error: last,
        ceiling_excess: excess,
    })
}

/// Fits `ln(1 - v(z_station, 0, tau) / Phi(z_station))` against `tau` over
/// snapshots in `[tau_a, tau_b]`; the slope estimates minus the rate.
pub fn exp_rate_fit<T: Real>(
    snapshots: &[TubeField<T>],
    profile: &SectionProfile<T>,
    z_station: usize,
    window: (T, T),
) -> Result<FitResult<T>> {
    if !profile.grid.interior().contains(&z_station) {
        return Err(invalid(format!(
            "station {z_station} is not an interior row"
        )));
    }
    let phi = profile.phi[z_station];
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for s in snapshots
        .iter()
        .filter(|s| s.time >= window.0 && s.time <= window.1)
    {
        check_pair(s, profile)?;
        let j = s.grid.nearest_y(T::zero());
        let gap = T::one() - s.value(z_station, j) / phi;
        if !(gap > T::lit(1e-14)) {
            return Err(Error::WindowTooLate {
                tau: s.time.as_f64(),
            });
        }
        xs.push(s.time);
        ys.push(gap.ln());
    }
    fit_line(&xs, &ys)
}
