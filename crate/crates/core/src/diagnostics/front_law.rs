use serde::Serialize;

use super::series::FrontSeries;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::waves::WaveProfile;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontLawReport<T> {
    pub final_tau: T,
    /// `max_z Gamma(z, tau) / tau` at the last sample.
    pub final_ratio: T,
    /// `|final_ratio - cstar| / cstar`.
    pub ratio_error: T,
    /// `sup |Gamma_v(z, tau) - Gamma_phi(z) - cstar tau|` over `tau >= T`.
    pub c_emp: T,
    /// Per-sample values of the quantity whose sup is `c_emp`.
    pub deviation: Vec<(T, T)>,
    pub middle_half_max: T,
    pub last_quarter_max: T,
    pub non_drifting: bool,
    /// Gap between the wave's front curve and its concave envelope; logged only.
    pub envelope_gap: T,
}

/// Rows excluded next to each end of the section.
const EDGE_ROWS: usize = 2;

/// Compares evolving fronts with `Gamma_phi(z) + cstar tau` for `tau >= T`.
/// Rows adjacent to the section ends are excluded.
pub fn front_law_audit<T: Real>(
    fronts: &FrontSeries<T>,
    cstar: T,
    wave: &WaveProfile<T>,
    big_t: T,
) -> Result<FrontLawReport<T>> {
    let nz = wave.section.n();
    if nz <= 2 * EDGE_ROWS {
        return Err(invalid("section too coarse for the front audit"));
    }
    let rows = EDGE_ROWS..nz - EDGE_ROWS;
    let last = fronts
        .samples
        .last()
        .ok_or_else(|| Error::Estimation("empty front series".into()))?;
    let top = last
        .max
        .ok_or_else(|| Error::Estimation("last front sample is empty".into()))?;
    let final_ratio = top / last.tau;

    let mut deviation = Vec::new();
    for s in fronts.samples.iter().filter(|s| s.tau >= big_t) {
        if s.rows.len() != nz {
            return Err(invalid("front series and wave use different section grids"));
        }
        let mut worst = T::zero();
        for i in rows.clone() {
            let (Some(gv), Some(gp)) = (s.rows[i], wave.front[i]) else {
                return Err(Error::Estimation(format!(
                    "empty row {i} at tau = {}",
                    s.tau
                )));
            };
            worst = worst.max((gv - gp - cstar * s.tau).abs());
        }
        deviation.push((s.tau, worst));
    }
    if deviation.len() < 4 {
        return Err(Error::Estimation(format!(
            "need at least 4 samples past T = {big_t}, got {}",
            deviation.len()
        )));
    }
    let n = deviation.len();
    let max_of =
        |r: std::ops::Range<usize>| deviation[r].iter().fold(T::zero(), |a, &(_, d)| a.max(d));
    let middle = max_of(n / 4..(3 * n) / 4);
    let tail = max_of((3 * n) / 4..n);
    let c_emp = max_of(0..n);
    let envelope_gap = concave_envelope_gap(wave, rows);
    Ok(FrontLawReport {
        final_tau: last.tau,
        final_ratio,
        ratio_error: (final_ratio - cstar).abs() / cstar,
        c_emp,
        deviation,
        middle_half_max: middle,
        last_quarter_max: tail,
        non_drifting: c_emp.is_finite() && tail <= T::lit(1.1) * middle,
        envelope_gap,
    })
}

/// Largest vertical distance from the front curve up to its upper concave hull.
fn concave_envelope_gap<T: Real>(wave: &WaveProfile<T>, rows: std::ops::Range<usize>) -> T {
    let pts: Vec<(T, T)> = rows
        .filter_map(|i| wave.front[i].map(|g| (wave.section.node(i), g)))
        .collect();
    let mut hull: Vec<(T, T)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= T::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut gap = T::zero();
    for &(z, g) in &pts {
        if let Some(w) = hull.windows(2).find(|w| z >= w[0].0 && z <= w[1].0) {
            let t = if w[1].0 > w[0].0 {
                (z - w[0].0) / (w[1].0 - w[0].0)
            } else {
                T::zero()
            };
            gap = gap.max(w[0].1 + t * (w[1].1 - w[0].1) - g);
        }
    }
    gap
}
