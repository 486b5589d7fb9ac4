use serde::{Deserialize, Serialize};

use crate::diagnostics::{fit_line, FrontSeries};
use crate::dynamics::{
    cfl_dt, Boundary, Frame, Stepper, TubeField, TubeGrid, Variable, YBoundary, ZBoundary,
};
use crate::error::{invalid, Error, Result};
use crate::scalar::{Exponent, Real};
use crate::section::{SectionGrid, SectionProfile};

/// Default front threshold relative to `sup Phi`.
pub const FRONT_THRESHOLD: f64 = 1e-8;

/// Which way the profile faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Nonincreasing in `xi`, plateau on the left, travels right.
    #[default]
    Forward,
    /// Mirror image: nondecreasing in `xi`, plateau on the right, travels left.
    Reflected,
}

/// Traveling-wave profile sampled on section nodes times a comoving window.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile<T> {
    pub section: SectionGrid<T>,
    pub xi_min: T,
    pub xi_max: T,
    pub n_xi: usize,
    /// Row-major by section node, `values[i * n_xi + j]`.
    pub values: Vec<T>,
    /// Frame speed at which the profile is steady (negative when reflected).
    pub speed: T,
    /// Free-boundary position per section row; `None` on rows with no support.
    pub front: Vec<Option<T>>,
    pub normalized: bool,
    /// Support bound: the profile vanishes beyond it (before it when reflected).
    pub xi0: T,
    /// The stationary profile approached far behind the front.
    pub plateau: Vec<T>,
    pub m: T,
    pub orientation: Orientation,
    pub threshold: T,
}

impl<T: Real> WaveProfile<T> {
    #[inline]
    pub fn h_xi(&self) -> T {
        (self.xi_max - self.xi_min) / T::from_usize_lossy(self.n_xi - 1)
    }

    #[inline]
    pub fn xi(&self, j: usize) -> T {
        self.xi_min + T::from_usize_lossy(j) * self.h_xi()
    }

    pub fn xis(&self) -> Vec<T> {
        (0..self.n_xi).map(|j| self.xi(j)).collect()
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[i * self.n_xi + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.n_xi..(i + 1) * self.n_xi]
    }

    pub fn sup_plateau(&self) -> T {
        self.plateau.iter().fold(T::zero(), |a, &b| a.max(b))
    }

    /// Linear interpolation in `xi` on row `i`, extended by the plateau
    /// behind the window and by zero ahead of it.
    pub fn sample(&self, i: usize, xi: T) -> T {
        let row = self.row(i);
        let (behind, ahead) = match self.orientation {
            Orientation::Forward => (xi <= self.xi_min, xi >= self.xi_max),
            Orientation::Reflected => (xi >= self.xi_max, xi <= self.xi_min),
        };
        if behind {
            return self.plateau[i];
        }
        if ahead {
            return T::zero();
        }
        let s = (xi - self.xi_min) / self.h_xi();
        let j = s.floor().to_usize().unwrap_or(0).min(self.n_xi - 2);
        let t = s - T::from_usize_lossy(j);
        row[j] * (T::one() - t) + row[j + 1] * t
    }

    /// Largest and smallest finite front over the rows.
    pub fn front_extent(&self) -> Option<(T, T)> {
        let fronts: Vec<T> = self.front.iter().flatten().copied().collect();
        if fronts.is_empty() {
            return None;
        }
        let lo = fronts.iter().fold(T::infinity(), |a, &b| a.min(b));
        let hi = fronts.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
        Some((lo, hi))
    }

    fn refresh_front(&mut self) {
        let xs = self.xis();
        let dir = match self.orientation {
            Orientation::Forward => Direction::Right,
            Orientation::Reflected => Direction::Left,
        };
        self.front = front_curve_directed(&self.values, &xs, self.threshold, dir);
    }

    /// Discrete residual `Delta_h phi^m + c D phi + phi/(m-1)` at interior
    /// nodes of the positivity set (zero elsewhere). `D` is the upwind
    /// difference used by the stepper.
    pub fn elliptic_residual(&self) -> Vec<T> {
        let e = Exponent::new(self.m).expect("exponent validated at construction");
        let (nz, nx) = (self.section.n(), self.n_xi);
        let (hz, hx) = (self.section.h(), self.h_xi());
        let w: Vec<T> = self.values.iter().map(|&v| e.pow(v)).collect();
        let two = T::lit(2.0);
        let mut out = vec![T::zero(); self.values.len()];
        for i in 1..nz - 1 {
            for j in 1..nx - 1 {
                let k = i * nx + j;
                if !(self.values[k] > self.threshold) {
                    continue;
                }
                let lap = (w[k - nx] + w[k + nx] - two * w[k]) / (hz * hz)
                    + (w[k - 1] + w[k + 1] - two * w[k]) / (hx * hx);
                let adv = if self.speed >= T::zero() {
                    self.speed * (self.values[k + 1] - self.values[k]) / hx
                } else {
                    self.speed * (self.values[k] - self.values[k - 1]) / hx
                };
                out[k] = lap + adv + self.values[k] / e.minus_one();
            }
        }
        out
    }

    /// Sup of the elliptic residual over nodes at least `gap` behind the
    /// row's front (`gap = 0` takes the whole positivity set).
    pub fn residual_sup(&self, gap: T) -> T {
        let r = self.elliptic_residual();
        let mut worst = T::zero();
        for i in 1..self.section.n() - 1 {
            let Some(front) = self.front[i] else { continue };
            for j in 0..self.n_xi {
                let dist = match self.orientation {
                    Orientation::Forward => front - self.xi(j),
                    Orientation::Reflected => self.xi(j) - front,
                };
                if dist >= gap {
                    worst = worst.max(r[i * self.n_xi + j].abs());
                }
            }
        }
        worst
    }

    /// Post-hoc check of the profile's structural properties.
    pub fn check_invariants(&self) -> WaveInvariants<T> {
        let nx = self.n_xi;
        let interior = 1..self.section.n() - 1;
        let mut monotone = T::zero();
        let mut plateau = T::zero();
        let mut beyond = T::zero();
        let mut empty_rows = Vec::new();
        for i in interior.clone() {
            let row = self.row(i);
            for j in 0..nx - 1 {
                let d = match self.orientation {
                    Orientation::Forward => row[j + 1] - row[j],
                    Orientation::Reflected => row[j] - row[j + 1],
                };
                monotone = monotone.max(d);
            }
            // Column 0 is held at the plateau during relaxation, so the first
            // free column is the meaningful one.
            let back = match self.orientation {
                Orientation::Forward => row[1],
                Orientation::Reflected => row[nx - 2],
            };
            plateau = plateau.max((back / self.plateau[i] - T::one()).abs());
            for (j, &v) in row.iter().enumerate() {
                let past = match self.orientation {
                    Orientation::Forward => self.xi(j) >= self.xi0,
                    Orientation::Reflected => self.xi(j) <= self.xi0,
                };
                if past {
                    beyond = beyond.max(v);
                }
            }
            if self.front[i].is_none() {
                empty_rows.push(i);
            }
        }
        let normalization = if self.normalized {
            self.front_extent().map(|(lo, hi)| match self.orientation {
                Orientation::Forward => hi.abs(),
                Orientation::Reflected => lo.abs(),
            })
        } else {
            None
        };
        WaveInvariants {
            monotone_defect: monotone,
            plateau_defect: plateau,
            beyond_support_max: beyond,
            normalization_defect: normalization,
            spacing: self.h_xi(),
            threshold: self.threshold,
            empty_rows,
        }
    }
}

/// Outcome of [`WaveProfile::check_invariants`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveInvariants<T> {
    /// Largest forward difference against the direction of travel.
    pub monotone_defect: T,
    /// `sup |phi / Phi - 1|` on the first free column behind the front.
    pub plateau_defect: T,
    /// Largest value past `xi0`.
    pub beyond_support_max: T,
    /// `|max front|` for normalized profiles.
    pub normalization_defect: Option<T>,
    pub spacing: T,
    pub threshold: T,
    pub empty_rows: Vec<usize>,
}

impl<T: Real> WaveInvariants<T> {
    pub fn monotone(&self) -> bool {
        self.monotone_defect <= T::lit(1e-10)
    }

    pub fn plateau(&self) -> bool {
        self.plateau_defect <= T::lit(0.01)
    }

    pub fn compact(&self) -> bool {
        self.beyond_support_max <= self.threshold
    }

    pub fn normalization(&self) -> bool {
        self.normalization_defect.is_none_or(|d| d <= self.spacing)
    }

    pub fn passed(&self) -> bool {
        self.empty_rows.is_empty()
            && self.monotone()
            && self.plateau()
            && self.compact()
            && self.normalization()
    }
}

/// Knobs of [`relax_wave_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveOptions<T> {
    pub safety: T,
    /// Steps between front re-pinning and convergence checks.
    pub repin_every: usize,
    pub max_pseudo_time: T,
    /// Adjust the frame speed until the front stops drifting.
    pub adapt_speed: bool,
    /// Relaxation time of the position feedback in the speed controller.
    pub feedback_time: T,
    /// Front threshold relative to `sup Phi`.
    pub threshold: T,
}

impl<T: Real> Default for WaveOptions<T> {
    fn default() -> Self {
        Self {
            safety: T::lit(0.9),
            repin_every: 100,
            max_pseudo_time: T::lit(400.0),
            adapt_speed: true,
            feedback_time: T::lit(4.0),
            threshold: T::lit(FRONT_THRESHOLD),
        }
    }
}

/// Bookkeeping from a relaxation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveStats<T> {
    pub requested_speed: T,
    pub final_speed: T,
    /// Drift of the pinned level set per unit pseudo-time over the last check interval.
    pub drift: T,
    pub pseudo_time: T,
    pub steps: u64,
    /// Net integer shift applied by re-pinning, in nodes (positive = leftward).
    pub repin_shift: i64,
    /// `sup |change| / dtau` at each check.
    pub residual_history: Vec<T>,
}

/// Relaxes the comoving rescaled flow to a steady traveling wave.
///
/// Uses [`WaveOptions::default`], which adapts the frame speed to the
/// discrete wave speed of the grid; see [`relax_wave_with`].
pub fn relax_wave<T: Real>(
    profile: &SectionProfile<T>,
    c: T,
    window: (T, T),
    n_xi: usize,
    tol: T,
) -> Result<WaveProfile<T>> {
    relax_wave_with(profile, c, window, n_xi, tol, &WaveOptions::default()).map(|(w, _)| w)
}

/// Comoving relaxation with explicit options.
///
/// The field is held at `Phi` on the left end and at zero on the right end.
/// Every `repin_every` steps the position of the half-height level set on
/// the central row is measured; the field is shifted back by whole nodes if
/// it has moved, and (with `adapt_speed`) the frame speed is corrected by the
/// measured drift plus a position feedback. The run stops once the sup-norm
/// change per unit pseudo-time falls below `tol`.
pub fn relax_wave_with<T: Real>(
    profile: &SectionProfile<T>,
    c: T,
    window: (T, T),
    n_xi: usize,
    tol: T,
    opts: &WaveOptions<T>,
) -> Result<(WaveProfile<T>, WaveStats<T>)> {
    if !(c > T::zero()) || !c.is_finite() {
        return Err(invalid(format!("wave speed must be positive, got {c}")));
    }
    if !(tol > T::zero()) {
        return Err(invalid("tolerance must be positive"));
    }
    if opts.repin_every == 0 {
        return Err(invalid("repin interval must be positive"));
    }
    let mut run = WaveRun::new(profile, c, window, n_xi, opts)?;
    let mut history = Vec::new();
    loop {
        let residual = run.interval()?;
        history.push(residual);
        if residual < tol {
            break;
        }
        if run.field.time > opts.max_pseudo_time {
            return Err(Error::ConvergenceFailure {
                iterations: history.len(),
                residual: residual.as_f64(),
                history: history.iter().map(|r| r.as_f64()).collect(),
            });
        }
    }
    let stats = WaveStats {
        requested_speed: c,
        final_speed: run.speed,
        drift: run.drift,
        pseudo_time: run.field.time,
        steps: run.steps,
        repin_shift: run.shift,
        residual_history: history,
    };
    Ok((run.into_profile(), stats))
}

/// Drift per unit pseudo-time of the front when the frame moves at the fixed
/// speed `c`, averaged over the second half of `span` units of pseudo-time.
/// Positive drift means the wave outruns the frame.
pub fn measure_drift<T: Real>(
    profile: &SectionProfile<T>,
    c: T,
    window: (T, T),
    n_xi: usize,
    span: T,
) -> Result<T> {
    if !(c > T::zero()) || !(span > T::zero()) {
        return Err(invalid("speed and span must be positive"));
    }
    let opts = WaveOptions {
        adapt_speed: false,
        ..WaveOptions::default()
    };
    let mut run = WaveRun::new(profile, c, window, n_xi, &opts)?;
    let half = span / T::lit(2.0);
    while run.field.time < half {
        run.interval()?;
    }
    let (t0, x0) = (run.field.time, run.absolute_position());
    while run.field.time < span {
        run.interval()?;
    }
    Ok((run.absolute_position() - x0) / (run.field.time - t0))
}

struct WaveRun<'a, T> {
    profile: &'a SectionProfile<T>,
    opts: WaveOptions<T>,
    field: TubeField<T>,
    stepper: Stepper<T>,
    speed: T,
    requested: T,
    drift: T,
    row: usize,
    target: T,
    position: T,
    shift: i64,
    steps: u64,
    previous: Vec<T>,
    threshold: T,
}

impl<'a, T: Real> WaveRun<'a, T> {
    fn new(
        profile: &'a SectionProfile<T>,
        c: T,
        window: (T, T),
        n_xi: usize,
        opts: &WaveOptions<T>,
    ) -> Result<Self> {
        let (xi_min, xi_max) = window;
        let grid = TubeGrid::new(profile.grid, xi_min, xi_max, n_xi)?;
        let width = xi_max - xi_min;
        let h = grid.hy();
        // Level set pinned 30% of the window from the right end; the initial
        // ramp puts it there.
        let ramp = (width * T::lit(0.1)).min(T::lit(3.0));
        let target = xi_max - width * T::lit(0.3);
        let edge = target + ramp / T::lit(2.0);
        let phi = &profile.phi;
        let nz = grid.nz();
        let mut values = vec![T::zero(); grid.len()];
        for i in 0..nz {
            for j in 0..n_xi {
                let s = ((edge - grid.y(j)) / ramp).max(T::zero()).min(T::one());
                values[i * n_xi + j] = phi[i] * s;
            }
        }
        let boundary = Boundary {
            z: ZBoundary::Dirichlet,
            y: YBoundary::Held {
                low: phi.clone(),
                high: vec![T::zero(); nz],
            },
        };
        let mut field = TubeField::zeros(grid, profile.m, Variable::Rescaled)?
            .with_frame(Frame::Comoving { speed: c })
            .with_boundary(boundary);
        field.values = values;
        let row = (0..nz)
            .max_by(|&a, &b| {
                phi[a]
                    .partial_cmp(&phi[b])
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(nz / 2);
        if h >= ramp {
            return Err(invalid("comoving window too coarse for its width"));
        }
        let previous = field.values.clone();
        let mut run = Self {
            profile,
            opts: *opts,
            field,
            stepper: Stepper::default(),
            speed: c,
            requested: c,
            drift: T::zero(),
            row,
            target,
            position: target,
            shift: 0,
            steps: 0,
            previous,
            threshold: opts.threshold * profile.sup_phi,
        };
        run.position = run.level_position()?;
        Ok(run)
    }

    fn level_position(&self) -> Result<T> {
        let row = self.field.row(self.row);
        let half = self.profile.phi[self.row] / T::lit(2.0);
        let j = row
            .iter()
            .rposition(|&v| v >= half)
            .ok_or(Error::WindowTooShort { side: "left" })?;
        if j + 1 >= row.len() {
            return Err(Error::WindowTooShort { side: "right" });
        }
        let t = (row[j] - half) / (row[j] - row[j + 1]);
        Ok(self.field.grid.y(j) + t * self.field.grid.hy())
    }

    fn absolute_position(&self) -> T {
        self.position + T::from_i64(self.shift).unwrap_or_else(T::zero) * self.field.grid.hy()
    }

    /// Advances one check interval and returns `sup |change| / dtau`.
    fn interval(&mut self) -> Result<T> {
        let start = self.field.time;
        for _ in 0..self.opts.repin_every {
            let dt = cfl_dt(&self.field, self.opts.safety);
            self.stepper.advance_rescaled(&mut self.field, dt)?;
            self.steps += 1;
        }
        let elapsed = self.field.time - start;
        self.check_window()?;
        let position = self.level_position()?;
        self.drift = (position - self.position) / elapsed;
        let residual = self
            .field
            .values
            .iter()
            .zip(&self.previous)
            .fold(T::zero(), |a, (&x, &y)| a.max((x - y).abs()))
            / elapsed;
        self.position = position;

        if self.opts.adapt_speed {
            let lo = self.requested / T::lit(4.0);
            let hi = self.requested * T::lit(4.0);
            let correction =
                self.drift / T::lit(2.0) + (position - self.target) / self.opts.feedback_time;
            self.speed = (self.speed + correction).max(lo).min(hi);
            self.field.frame = Frame::Comoving { speed: self.speed };
        }

        let k = ((position - self.target) / self.field.grid.hy()).round();
        if k != T::zero() {
            let k = k.to_i64().unwrap_or(0);
            shift_rows(
                &mut self.field.values,
                self.field.grid.ny(),
                k,
                &self.profile.phi,
            );
            self.shift += k;
            self.position =
                self.position - T::from_i64(k).unwrap_or_else(T::zero) * self.field.grid.hy();
        }
        self.previous.clone_from(&self.field.values);
        Ok(residual)
    }

    fn check_window(&self) -> Result<()> {
        let xs = self.field.grid.ys();
        let fronts = front_curve(&self.field.values, &xs, self.threshold);
        let h = self.field.grid.hy();
        let (lo, hi) = (xs[0] + h * T::lit(2.0), xs[xs.len() - 1] - h * T::lit(2.0));
        for f in fronts[1..fronts.len() - 1].iter() {
            match f {
                None => return Err(Error::WindowTooShort { side: "left" }),
                Some(x) if *x >= hi => return Err(Error::WindowTooShort { side: "right" }),
                Some(x) if *x <= lo => return Err(Error::WindowTooShort { side: "left" }),
                _ => {}
            }
        }
        Ok(())
    }

    fn into_profile(self) -> WaveProfile<T> {
        let grid = self.field.grid;
        let mut w = WaveProfile {
            section: grid.section,
            xi_min: grid.y_min(),
            xi_max: grid.y_max(),
            n_xi: grid.ny(),
            values: self.field.values,
            speed: self.speed,
            front: Vec::new(),
            normalized: false,
            xi0: T::zero(),
            plateau: self.profile.phi.clone(),
            m: self.profile.m,
            orientation: Orientation::Forward,
            threshold: self.threshold,
        };
        w.refresh_front();
        w.xi0 = w.front_extent().map_or(w.xi_max, |(_, hi)| hi);
        w
    }
}

/// Moves every row by `k` whole nodes toward lower indices (`k > 0`) or
/// higher indices (`k < 0`), filling with zero ahead and the row's plateau
/// value behind.
fn shift_rows<T: Real>(values: &mut [T], n: usize, k: i64, plateau: &[T]) {
    let ku = k.unsigned_abs() as usize;
    for (i, row) in values.chunks_exact_mut(n).enumerate() {
        if ku >= n {
            row.fill(if k > 0 { T::zero() } else { plateau[i] });
            continue;
        }
        if k > 0 {
            row.copy_within(ku.., 0);
            row[n - ku..].fill(T::zero());
        } else {
            row.copy_within(..n - ku, ku);
            row[..ku].fill(plateau[i]);
        }
    }
}

/// Shifts the profile by whole nodes so that the largest front lies within
/// half a spacing of `xi = 0`.
pub fn normalize_wave<T: Real>(w: &WaveProfile<T>) -> Result<WaveProfile<T>> {
    if w.orientation == Orientation::Reflected {
        return normalize_wave(&reflect_wave(w)).map(|n| reflect_wave(&n));
    }
    let interior = 1..w.section.n() - 1;
    if let Some(row) = interior.clone().find(|&i| w.front[i].is_none()) {
        return Err(Error::DegenerateProfile { row });
    }
    let (_, top) = w
        .front_extent()
        .ok_or(Error::DegenerateProfile { row: 1 })?;
    let h = w.h_xi();
    let k = (top / h).round().to_i64().unwrap_or(0);
    if !(w.xi_min < T::zero() && w.xi_max > T::zero()) {
        return Err(invalid("window must contain xi = 0 to normalize"));
    }
    let mut out = w.clone();
    shift_rows(&mut out.values, w.n_xi, k, &w.plateau);
    out.refresh_front();
    if let Some(row) = interior.clone().find(|&i| out.front[i].is_none()) {
        return Err(Error::DegenerateProfile { row });
    }
    out.normalized = true;
    out.xi0 = out.front_extent().map_or(T::zero(), |(_, hi)| hi);
    Ok(out)
}

/// Mirror image `xi -> -xi`, traveling at `-c`. An involution.
pub fn reflect_wave<T: Real>(w: &WaveProfile<T>) -> WaveProfile<T> {
    let mut out = w.clone();
    for row in out.values.chunks_exact_mut(w.n_xi) {
        row.reverse();
    }
    out.xi_min = -w.xi_max;
    out.xi_max = -w.xi_min;
    out.speed = -w.speed;
    out.xi0 = -w.xi0;
    out.front = w.front.iter().map(|f| f.map(|x| -x)).collect();
    out.orientation = match w.orientation {
        Orientation::Forward => Orientation::Reflected,
        Orientation::Reflected => Orientation::Forward,
    };
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Right,
    Left,
}

/// Right edge of the super-threshold set on each row of a row-major field
/// with row coordinates `coords`.
///
/// The last node above `threshold` is refined by continuing the line through
/// it and its inner neighbour down to `threshold`, capped at one spacing. A
/// flat or rising approach leaves the node position unchanged.
pub fn front_curve<T: Real>(values: &[T], coords: &[T], threshold: T) -> Vec<Option<T>> {
    front_curve_directed(values, coords, threshold, Direction::Right)
}

/// Left edge counterpart of [`front_curve`].
pub fn back_curve<T: Real>(values: &[T], coords: &[T], threshold: T) -> Vec<Option<T>> {
    front_curve_directed(values, coords, threshold, Direction::Left)
}

fn front_curve_directed<T: Real>(
    values: &[T],
    coords: &[T],
    threshold: T,
    dir: Direction,
) -> Vec<Option<T>> {
    let n = coords.len();
    if n == 0 {
        return Vec::new();
    }
    values
        .chunks_exact(n)
        .map(|row| {
            let (j, inner, outer) = match dir {
                Direction::Right => {
                    let j = row.iter().rposition(|&v| v > threshold)?;
                    (j, j.checked_sub(1), (j + 1 < n).then_some(j + 1))
                }
                Direction::Left => {
                    let j = row.iter().position(|&v| v > threshold)?;
                    (j, (j + 1 < n).then_some(j + 1), j.checked_sub(1))
                }
            };
            let (Some(a), Some(b)) = (inner, outer) else {
                return Some(coords[j]);
            };
            let drop = row[a] - row[j];
            if !(drop > T::zero()) {
                return Some(coords[j]);
            }
            let t = ((row[j] - threshold) / drop).min(T::one());
            Some(coords[j] + t * (coords[b] - coords[j]))
        })
        .collect()
}

/// Least-squares line through `(tau, max_z Gamma(z, tau))` for samples with
/// `tau` in `[tau_a, tau_b]`. Returns slope, intercept and max residual.
pub fn measure_speed<T: Real>(fronts: &FrontSeries<T>, fit_window: (T, T)) -> Result<(T, T, T)> {
    let (a, b) = fit_window;
    let mut taus = Vec::new();
    let mut tops = Vec::new();
    for s in fronts.samples.iter().filter(|s| s.tau >= a && s.tau <= b) {
        let top = s
            .max
            .ok_or_else(|| Error::Estimation(format!("empty front at tau = {}", s.tau)))?;
        taus.push(s.tau);
        tops.push(top);
    }
    if taus.len() < 10 {
        return Err(Error::Estimation(format!(
            "need at least 10 front samples in [{a}, {b}], got {}",
            taus.len()
        )));
    }
    let fit = fit_line(&taus, &tops)?;
    Ok((fit.slope, fit.intercept, fit.residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_front_sits_on_the_edge() {
        let coords: Vec<f64> = (0..11).map(|j| j as f64 * 0.5).collect();
        let row: Vec<f64> = coords
            .iter()
            .map(|&y| if y <= 3.0 { 1.0 } else { 0.0 })
            .collect();
        let values = [row.clone(), row].concat();
        let f = front_curve(&values, &coords, 1e-8);
        assert_eq!(f, vec![Some(3.0), Some(3.0)]);
        assert_eq!(
            back_curve(&values, &coords, 1e-8),
            vec![Some(0.0), Some(0.0)]
        );
    }

    #[test]
    fn linear_ramp_front_is_exact() {
        let coords: Vec<f64> = (0..21).map(|j| j as f64 * 0.1).collect();
        let row: Vec<f64> = coords.iter().map(|&y| (1.234 - y).max(0.0)).collect();
        let f = front_curve(&row, &coords, 1e-12)[0].unwrap();
        assert!((f - 1.234).abs() < 1e-10, "{f}");
    }

    #[test]
    fn empty_rows() {
        let coords = [0.0, 1.0, 2.0];
        assert_eq!(front_curve(&[0.0; 6], &coords, 1e-8), vec![None, None]);
    }

    #[test]
    fn shift_round_trip() {
        let plateau = [2.0];
        let mut v = vec![2.0, 2.0, 1.0, 0.5, 0.0, 0.0];
        shift_rows(&mut v, 6, -2, &plateau);
        assert_eq!(v, vec![2.0, 2.0, 2.0, 2.0, 1.0, 0.5]);
        shift_rows(&mut v, 6, 2, &plateau);
        assert_eq!(v, vec![2.0, 2.0, 1.0, 0.5, 0.0, 0.0]);
    }
}
