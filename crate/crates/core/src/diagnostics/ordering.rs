use serde::Serialize;

use crate::barriers::{evaluate_barrier, BarrierKind, BarrierPath};
use crate::dynamics::TubeField;
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::waves::{reflect_wave, Orientation, WaveProfile};

/// Start times of the two barriers on the run's clock. The sub-barrier
/// starts at `tau0 + big_t`, the super-barrier at `tau1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alignment<T> {
    pub tau0: T,
    pub tau1: T,
    pub big_t: T,
}

/// Worst pointwise violation found, with its location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation<T> {
    pub kind: BarrierKind,
    pub amount: T,
    pub tau: T,
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport<T> {
    /// `sup (w_sub - v)_+`.
    pub sub_violation: T,
    /// `sup (v - w_super)_+`.
    pub super_violation: T,
    pub worst: Option<Violation<T>>,
    pub alignment: Alignment<T>,
    /// Snapshots compared against each barrier.
    pub sub_snapshots: usize,
    pub super_snapshots: usize,
    /// Violations up to this size are tolerated.
    pub tolerance: T,
}

impl<T: Real> OrderingReport<T> {
    pub fn passed(&self) -> bool {
        self.sub_violation <= self.tolerance && self.super_violation <= self.tolerance
    }
}

/// Pointwise comparison `w_sub <= v <= w_super` at every snapshot the
/// aligned barriers cover. The forward wave is used on `y >= 0` and its
/// reflection on `y < 0`.
pub fn ordering_audit<T: Real>(
    snapshots: &[TubeField<T>],
    sub: &BarrierPath<T>,
    sup: &BarrierPath<T>,
    wave: &WaveProfile<T>,
    alignment: Alignment<T>,
) -> Result<OrderingReport<T>> {
    if sub.params.kind != BarrierKind::Sub || sup.params.kind != BarrierKind::Super {
        return Err(invalid("ordering audit needs a sub path and a super path"));
    }
    if !wave.normalized || wave.orientation != Orientation::Forward {
        return Err(invalid("ordering audit needs a normalized forward wave"));
    }
    let mirror = reflect_wave(wave);
    let tolerance = T::lit(1e-8) * wave.sup_plateau();
    let mut report = OrderingReport {
        sub_violation: T::zero(),
        super_violation: T::zero(),
        worst: None,
        alignment,
        sub_snapshots: 0,
        super_snapshots: 0,
        tolerance,
    };
    let sub_start = alignment.tau0 + alignment.big_t;
    for s in snapshots {
        if s.grid.nz() != wave.section.n() {
            return Err(invalid("snapshots and wave use different section grids"));
        }
        for (path, start) in [(sub, sub_start), (sup, alignment.tau1)] {
            let local = s.time - start;
            if local < T::zero() || local > path.tau_end() {
                continue;
            }
            let amount = compare(s, path, wave, &mirror, local, &mut report)?;
            match path.params.kind {
                BarrierKind::Sub => {
                    report.sub_snapshots += 1;
                    report.sub_violation = report.sub_violation.max(amount);
                }
                BarrierKind::Super => {
                    report.super_snapshots += 1;
                    report.super_violation = report.super_violation.max(amount);
                }
            }
        }
    }
    if report.sub_snapshots == 0 || report.super_snapshots == 0 {
        return Err(Error::Range(
            "barriers and run share no snapshot after alignment".into(),
        ));
    }
    Ok(report)
}

fn compare<T: Real>(
    s: &TubeField<T>,
    path: &BarrierPath<T>,
    wave: &WaveProfile<T>,
    mirror: &WaveProfile<T>,
    local: T,
    report: &mut OrderingReport<T>,
) -> Result<T> {
    let g = &s.grid;
    let mut worst = T::zero();
    for i in 0..g.nz() {
        for j in 0..g.ny() {
            let y = g.y(j);
            let w = if y >= T::zero() { wave } else { mirror };
            let b = evaluate_barrier(path, w, local, i, y)?;
            let v = s.value(i, j);
            let amount = match path.params.kind {
                BarrierKind::Sub => b - v,
                BarrierKind::Super => v - b,
            };
            if amount > worst {
                worst = amount;
                if report.worst.is_none_or(|w| amount > w.amount) {
                    report.worst = Some(Violation {
                        kind: path.params.kind,
                        amount,
                        tau: s.time,
                        i,
                        j,
                    });
                }
            }
        }
    }
    Ok(worst)
}

/// Grid search over start delays: the smallest `big_t` (with `tau0` fixed)
/// and the smallest `tau1` from the candidate lists for which the respective
/// comparison holds. Returns the report for the best pair found.
pub fn search_alignment<T: Real>(
    snapshots: &[TubeField<T>],
    sub: &BarrierPath<T>,
    sup: &BarrierPath<T>,
    wave: &WaveProfile<T>,
    tau0: T,
    big_t: &[T],
    tau1: &[T],
) -> Result<OrderingReport<T>> {
    if big_t.is_empty() || tau1.is_empty() {
        return Err(invalid("alignment search needs candidates"));
    }
    let audit = |bt: T, t1: T| {
        ordering_audit(
            snapshots,
            sub,
            sup,
            wave,
            Alignment {
                tau0,
                tau1: t1,
                big_t: bt,
            },
        )
    };
    let mut best_t = big_t[big_t.len() - 1];
    for &bt in big_t {
        let r = audit(bt, tau1[0])?;
        if r.sub_violation <= r.tolerance {
            best_t = bt;
            break;
        }
    }
    let mut best_1 = tau1[tau1.len() - 1];
    for &t1 in tau1 {
        let r = audit(best_t, t1)?;
        if r.super_violation <= r.tolerance {
            best_1 = t1;
            break;
        }
    }
    audit(best_t, best_1)
}
