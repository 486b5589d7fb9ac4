//! Cross-section geometry and the stationary profile.
//!
//! The cross-section is the interval `D = (0, L)`. On it live the principal
//! Dirichlet eigenvalue `lambda1`, the critical speed
//! `c* = 1 / ((m - 1) sqrt(lambda1))`, and the stationary profile `Phi`, the
//! unique positive solution of `-(Phi^m)'' = Phi / (m - 1)` with zero trace.
//! `Phi` is computed twice, independently: by quadrature shooting on the first
//! integral of the ODE, and by relaxing the rescaled flow to its fixed point.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::adaptive_simpson;
use crate::scalar::{sup_norm, Exponent, Real};

/// Uniform grid on `[0, L]` with `n` nodes, boundary nodes included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionGrid<T> {
    length: T,
    n: usize,
}

impl<T: Real> SectionGrid<T> {
    pub fn new(length: T, n: usize) -> Result<Self> {
        if !(length > T::zero()) || !length.is_finite() {
            return Err(invalid(format!(
                "section length must be positive, got {length}"
            )));
        }
        if n < 3 {
            return Err(invalid(format!("section needs at least 3 nodes, got {n}")));
        }
        Ok(Self { length, n })
    }

    #[inline]
    pub fn length(&self) -> T {
        self.length
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Node spacing `L / (n - 1)`.
    #[inline]
    pub fn h(&self) -> T {
        self.length / T::from_usize_lossy(self.n - 1)
    }

    #[inline]
    pub fn node(&self, i: usize) -> T {
        T::from_usize_lossy(i) * self.h()
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Indices of the nodes strictly inside `D`.
    pub fn interior(&self) -> std::ops::Range<usize> {
        1..self.n - 1
    }
}

/// Discretized stationary profile together with `lambda1` and `c*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionProfile<T> {
    pub grid: SectionGrid<T>,
    pub phi: Vec<T>,
    pub lambda1: T,
    pub cstar: T,
    pub m: T,
    pub sup_phi: T,
}

impl<T: Real> SectionProfile<T> {
    /// Wraps nodal values, filling `lambda1`, `c*` and the sup-norm.
    pub fn from_values(grid: SectionGrid<T>, m: T, phi: Vec<T>) -> Result<Self> {
        if phi.len() != grid.n() {
            return Err(invalid(format!(
                "profile has {} values for a {}-node grid",
                phi.len(),
                grid.n()
            )));
        }
        let lambda1 = analytic_lambda1(grid.length())?;
        let cstar = critical_speed(m, lambda1)?;
        let sup_phi = sup_norm(&phi);
        Ok(Self {
            grid,
            phi,
            lambda1,
            cstar,
            m,
            sup_phi,
        })
    }

    /// One-sided differences of `Phi^m` along the outward normal at `z = 0` and `z = L`.
    pub fn hopf_slopes(&self) -> (T, T) {
        let e = Exponent::new(self.m).expect("profile exponent validated at construction");
        let n = self.phi.len();
        let h = self.grid.h();
        let left = -(e.pow(self.phi[1]) - e.pow(self.phi[0])) / h;
        let right = (e.pow(self.phi[n - 1]) - e.pow(self.phi[n - 2])) / h;
        (left, right)
    }

    /// `max_i |Phi_i - Phi_{n-1-i}|`
    pub fn symmetry_defect(&self) -> T {
        let n = self.phi.len();
        (0..n / 2).fold(T::zero(), |acc, i| {
            acc.max((self.phi[i] - self.phi[n - 1 - i]).abs())
        })
    }

    /// Discrete residual `-(Phi^m)'' - Phi / (m - 1)` at the interior nodes.
    pub fn residual(&self) -> Vec<T> {
        let e = Exponent::new(self.m).expect("profile exponent validated at construction");
        let h2 = self.grid.h() * self.grid.h();
        let w: Vec<T> = self.phi.iter().map(|&v| e.pow(v)).collect();
        self.grid
            .interior()
            .map(|i| -(w[i - 1] - T::lit(2.0) * w[i] + w[i + 1]) / h2 - self.phi[i] / e.minus_one())
            .collect()
    }

    /// Checks zero trace, interior positivity, symmetry within `sym_tol`, and the Hopf sign.
    pub fn check_invariants(&self, sym_tol: T) -> std::result::Result<(), String> {
        let n = self.phi.len();
        if self.phi[0] != T::zero() || self.phi[n - 1] != T::zero() {
            return Err("nonzero boundary trace".into());
        }
        if let Some(i) = self.grid.interior().find(|&i| !(self.phi[i] > T::zero())) {
            return Err(format!("nonpositive interior value at node {i}"));
        }
        let sym = self.symmetry_defect();
        if sym > sym_tol {
            return Err(format!("symmetry defect {sym} exceeds {sym_tol}"));
        }
        let (l, r) = self.hopf_slopes();
        if !(l < T::zero() && r < T::zero()) {
            return Err(format!("Hopf sign violated: outward slopes ({l}, {r})"));
        }
        Ok(())
    }
}

/// `(pi / L)^2`, the principal Dirichlet eigenvalue of `-d^2/dz^2` on `(0, L)`.
pub fn analytic_lambda1<T: Real>(length: T) -> Result<T> {
    if !(length > T::zero()) || !length.is_finite() {
        return Err(invalid(format!(
            "section length must be positive, got {length}"
        )));
    }
    let k = T::PI() / length;
    Ok(k * k)
}

/// Smallest eigenvalue of the second-difference Dirichlet matrix on the interior
/// nodes, by inverse power iteration with a tridiagonal solve.
pub fn numeric_lambda1<T: Real>(grid: &SectionGrid<T>) -> Result<T> {
    let size = grid.n() - 2;
    let h2 = grid.h() * grid.h();
    let two = T::lit(2.0);
    let mut x = vec![T::one(); size];
    let mut estimate = T::zero();
    for _ in 0..500 {
        let y = solve_second_difference(&x);
        let norm = y.iter().map(|&v| v * v).sum::<T>().sqrt();
        x = y.into_iter().map(|v| v / norm).collect();
        // Rayleigh quotient of the unscaled matrix on the normalized iterate.
        let ax: T = (0..size)
            .map(|i| {
                let left = if i > 0 { x[i - 1] } else { T::zero() };
                let right = if i + 1 < size { x[i + 1] } else { T::zero() };
                x[i] * (two * x[i] - left - right)
            })
            .sum();
        let next = ax / h2;
        if (next - estimate).abs() <= T::epsilon() * T::lit(4.0) * next {
            return Ok(next);
        }
        estimate = next;
    }
    Ok(estimate)
}

/// Solves `tridiag(-1, 2, -1) y = b` with the Thomas algorithm.
fn solve_second_difference<T: Real>(b: &[T]) -> Vec<T> {
    let n = b.len();
    let two = T::lit(2.0);
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    c[0] = -T::one() / two;
    d[0] = b[0] / two;
    for i in 1..n {
        let denom = two + c[i - 1];
        c[i] = -T::one() / denom;
        d[i] = (b[i] + d[i - 1]) / denom;
    }
    let mut y = vec![T::zero(); n];
    y[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        y[i] = d[i] - c[i] * y[i + 1];
    }
    y
}

/// `c* = 1 / ((m - 1) sqrt(lambda1))`.
pub fn critical_speed<T: Real>(m: T, lambda1: T) -> Result<T> {
    let e = Exponent::new(m)?;
    if !(lambda1 > T::zero()) {
        return Err(invalid(format!("lambda1 must be positive, got {lambda1}")));
    }
    Ok(T::one() / (e.minus_one() * lambda1.sqrt()))
}

/// First-integral form of the stationary ODE in `w = Phi^m`:
/// `(w')^2 = 2 K (w_max^q - w^q)` with `q = (m + 1) / m`, `K = m / ((m - 1)(m + 1))`.
struct FirstIntegral<T> {
    q: T,
    k: T,
    tol: T,
    /// `G(1/2)`, cached.
    g_half: T,
}

impl<T: Real> FirstIntegral<T> {
    fn new(m: T) -> Result<Self> {
        let q = (m + T::one()) / m;
        let k = m / ((m - T::one()) * (m + T::one()));
        let tol = T::lit(1e-13).max(T::epsilon() * T::lit(64.0));
        let mut fi = Self {
            q,
            k,
            tol,
            g_half: T::zero(),
        };
        fi.g_half = fi.g_direct(T::lit(0.5))?;
        Ok(fi)
    }

    fn g_direct(&self, x: T) -> Result<T> {
        let q = self.q;
        adaptive_simpson(
            &|t: T| T::one() / (T::one() - t.powf(q)).sqrt(),
            T::zero(),
            x,
            self.tol,
        )
        .ok_or_else(|| Error::OracleFailure {
            reason: "quadrature did not converge near t = 0".into(),
            lo: 0.0,
            hi: x.as_f64(),
        })
    }

    /// `G(x) = int_0^x dt / sqrt(1 - t^q)`.
    ///
    /// Above `x = 1/2` the substitution `t^q = 1 - u^2` turns the inverse square
    /// root singularity at `t = 1` into the bounded integrand
    /// `(2/q) (1 - u^2)^(1/q - 1)` on `[u(x), u(1/2)]`.
    fn g(&self, x: T) -> Result<T> {
        let half = T::lit(0.5);
        if x <= half {
            return self.g_direct(x);
        }
        let q = self.q;
        let u_of = |t: T| (T::one() - t.powf(q)).max(T::zero()).sqrt();
        let (ua, ub) = (u_of(x), u_of(half));
        let exponent = T::one() / q - T::one();
        let tail = adaptive_simpson(
            &|u: T| T::lit(2.0) / q * (T::one() - u * u).powf(exponent),
            ua,
            ub,
            self.tol,
        )
        .ok_or_else(|| Error::OracleFailure {
            reason: "quadrature did not converge near t = 1".into(),
            lo: half.as_f64(),
            hi: x.as_f64(),
        })?;
        Ok(self.g_half + tail)
    }

    /// Distance from the boundary at which `w` is reached, for a given `w_max`:
    /// `int_0^w ds / sqrt(2K (w_max^q - s^q))`.
    fn distance(&self, w: T, w_max: T) -> Result<T> {
        let scale = w_max.powf(T::one() - self.q / T::lit(2.0)) / (T::lit(2.0) * self.k).sqrt();
        Ok(scale * self.g((w / w_max).min(T::one()))?)
    }
}

/// Stationary profile by quadrature shooting on the first integral.
///
/// Bisects on `w_max = max Phi^m` until the half-length quadrature equals
/// `L / 2`, then inverts the quadrature node by node. Values on the right half
/// are mirrored from the left, so the profile is symmetric by construction.
pub fn shoot_profile<T: Real>(length: T, m: T, n: usize) -> Result<SectionProfile<T>> {
    let grid = SectionGrid::new(length, n)?;
    Exponent::new(m)?;
    let fi = FirstIntegral::new(m)?;
    let half_length = length / T::lit(2.0);

    let (mut lo, mut hi) = (T::zero(), T::one());
    let mut grown = 0;
    while fi.distance(hi, hi)? < half_length {
        lo = hi;
        hi = hi * T::lit(4.0);
        grown += 1;
        if grown > 200 || !hi.is_finite() {
            return Err(Error::OracleFailure {
                reason: "could not bracket w_max".into(),
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
    }
    for _ in 0..400 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if fi.distance(mid, mid)? < half_length {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w_max = (lo + hi) / T::lit(2.0);
    let reached = fi.distance(w_max, w_max)?;
    if ((reached - half_length) / half_length).abs() > T::lit(1e-9).max(T::epsilon() * T::lit(1e3))
    {
        return Err(Error::OracleFailure {
            reason: format!("half-length quadrature reached {reached}, wanted {half_length}"),
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }

    let inv_m = T::one() / m;
    let h = grid.h();
    let mut phi = vec![T::zero(); n];
    for i in 1..=(n - 1) / 2 {
        let d = T::from_usize_lossy(i.min(n - 1 - i)) * h;
        let w = if d >= half_length {
            w_max
        } else {
            invert_distance(&fi, d, w_max)?
        };
        phi[i] = w.powf(inv_m);
        phi[n - 1 - i] = phi[i];
    }
    SectionProfile::from_values(grid, m, phi)
}

fn invert_distance<T: Real>(fi: &FirstIntegral<T>, d: T, w_max: T) -> Result<T> {
    let (mut lo, mut hi) = (T::zero(), w_max);
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if fi.distance(mid, w_max)? < d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) / T::lit(2.0))
}

/// Controls for the pseudo-time relaxation of the stationary profile.
#[derive(Debug, Clone, Copy)]
pub struct RelaxOptions<T> {
    /// Fraction of the explicit stability bound used as the step.
    pub safety: T,
    /// Pseudo-time budget before giving up.
    pub max_time: T,
}

impl<T: Real> Default for RelaxOptions<T> {
    fn default() -> Self {
        Self {
            safety: T::lit(0.9),
            max_time: T::lit(400.0),
        }
    }
}

/// Stationary profile as the long-time limit of `v_t = (v^m)_zz + v / (m - 1)` on `D`.
///
/// Starts from a positive sine-shaped guess and stops when the sup-norm change
/// per unit pseudo-time drops below `tol` times the current sup of the profile.
/// The relative form keeps the stopping rule above roundoff for wide sections,
/// where the profile grows like `L^{2/(m-1)}`.
pub fn relax_profile<T: Real>(length: T, m: T, n: usize, tol: T) -> Result<SectionProfile<T>> {
    let grid = SectionGrid::new(length, n)?;
    let e = Exponent::new(m)?;
    let amplitude = T::lit(0.5) * (length / T::PI()).powf(T::lit(2.0) / e.minus_one());
    let init = grid
        .nodes()
        .iter()
        .map(|&z| {
            amplitude
                * (T::PI() * z / length)
                    .sin()
                    .max(T::zero())
                    .powf(T::one() / m)
        })
        .collect();
    relax_profile_from(grid, m, init, tol, RelaxOptions::default())
}

/// Relaxation from a caller-supplied initial profile.
pub fn relax_profile_from<T: Real>(
    grid: SectionGrid<T>,
    m: T,
    init: Vec<T>,
    tol: T,
    options: RelaxOptions<T>,
) -> Result<SectionProfile<T>> {
    let e = Exponent::new(m)?;
    let n = grid.n();
    if init.len() != n {
        return Err(invalid("initial profile length does not match the grid"));
    }
    if !(tol > T::zero()) {
        return Err(invalid("tolerance must be positive"));
    }
    if grid.interior().any(|i| !(init[i] > T::zero())) {
        return Err(invalid(
            "initial profile must be strictly positive inside D",
        ));
    }
    let h2 = grid.h() * grid.h();
    let two = T::lit(2.0);
    let reaction = T::one() / e.minus_one();
    let mut v = init;
    v[0] = T::zero();
    v[n - 1] = T::zero();
    let mut w = vec![T::zero(); n];
    let mut next = v.clone();
    let mut elapsed = T::zero();
    let mut iterations = 0usize;
    let mut history = Vec::new();
    loop {
        let vmax = sup_norm(&v);
        let diffusivity = e.value() * e.pow_minus_one(vmax);
        let dt = options.safety * h2 / (two * diffusivity + h2 * reaction);
        for (wi, &vi) in w.iter_mut().zip(&v) {
            *wi = e.pow(vi);
        }
        let mut change = T::zero();
        for i in 1..n - 1 {
            let lap = (w[i - 1] - two * w[i] + w[i + 1]) / h2;
            let rate = lap + v[i] * reaction;
            next[i] = v[i] + dt * rate;
            change = change.max(rate.abs());
        }
        std::mem::swap(&mut v, &mut next);
        elapsed = elapsed + dt;
        iterations += 1;
        if iterations.is_multiple_of(10_000) {
            history.push(change.as_f64());
        }
        if change < tol * vmax {
            break;
        }
        if elapsed > options.max_time || !change.is_finite() {
            return Err(Error::ConvergenceFailure {
                iterations,
                residual: change.as_f64(),
                history,
            });
        }
    }
    SectionProfile::from_values(grid, m, v)
}

/// Profile of the dilated section `(0, lam L)` predicted by the scaling law
/// `Phi_{lam L}(z) = lam^{2/(m-1)} Phi_L(z / lam)`.
///
/// The dilated grid keeps the node count, so `z / lam` lands exactly on the
/// original nodes and no interpolation is needed.
pub fn dilate_profile<T: Real>(p: &SectionProfile<T>, lam: T) -> Result<SectionProfile<T>> {
    if !(lam >= T::one()) || !lam.is_finite() {
        return Err(invalid(format!(
            "dilation factor must be at least 1, got {lam}"
        )));
    }
    let e = Exponent::new(p.m)?;
    let grid = SectionGrid::new(p.grid.length() * lam, p.grid.n())?;
    let factor = lam.powf(T::lit(2.0) / e.minus_one());
    let phi = p.phi.iter().map(|&v| factor * v).collect();
    SectionProfile::from_values(grid, p.m, phi)
}

/// The explicit elliptic subsolution `Psi(z, y) = Phi(z) [lambda cos(alpha y)]^{1/m}`
/// on `D x (-pi/(2 alpha), pi/(2 alpha))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineSubsolution<T> {
    pub lambda_param: T,
    pub alpha: T,
    pub half_width: T,
    pub m: T,
    pub section: SectionGrid<T>,
    pub y: Vec<T>,
    /// Row-major by section node: `values[i * ny + j] = Psi(z_i, y_j)`.
    pub values: Vec<T>,
    pub admissible: bool,
}

impl<T: Real> CosineSubsolution<T> {
    pub fn ny(&self) -> usize {
        self.y.len()
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[i * self.ny() + j]
    }

    /// Largest interior value of the discrete residual `-Delta_h Psi^m - Psi / (m - 1)`.
    /// Nonpositive up to discretization error when the parameters are admissible.
    pub fn max_elliptic_residual(&self) -> T {
        let e = Exponent::new(self.m).expect("exponent validated at construction");
        let ny = self.ny();
        let hz = self.section.h();
        let hy = self.y[1] - self.y[0];
        let two = T::lit(2.0);
        let w: Vec<T> = self.values.iter().map(|&v| e.pow(v)).collect();
        let mut worst = T::neg_infinity();
        for i in self.section.interior() {
            for j in 1..ny - 1 {
                let c = w[i * ny + j];
                let lap_z = (w[(i - 1) * ny + j] - two * c + w[(i + 1) * ny + j]) / (hz * hz);
                let lap_y = (w[i * ny + j - 1] - two * c + w[i * ny + j + 1]) / (hy * hy);
                let r = -(lap_z + lap_y) - self.values[i * ny + j] / e.minus_one();
                worst = worst.max(r);
            }
        }
        worst
    }
}

/// Tabulates the cosine subsolution on an `ny`-node grid over `I_alpha` and
/// records whether `lambda^{(m-1)/m} [1 + alpha^2 (m-1) sup(Phi)^{m-1}] <= 1`.
pub fn cosine_subsolution<T: Real>(
    p: &SectionProfile<T>,
    lambda_param: T,
    alpha: T,
    ny: usize,
) -> Result<CosineSubsolution<T>> {
    if !(lambda_param > T::zero() && lambda_param <= T::one()) {
        return Err(invalid(format!(
            "lambda must lie in (0, 1], got {lambda_param}"
        )));
    }
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    if ny < 3 {
        return Err(invalid(format!("need at least 3 y-nodes, got {ny}")));
    }
    let e = Exponent::new(p.m)?;
    let m1 = e.minus_one();
    let half_width = T::FRAC_PI_2() / alpha;
    let bracket = T::one() + alpha * alpha * m1 * e.pow_minus_one(p.sup_phi);
    // A few ulps of slack so the equality case is not lost to rounding.
    let admissible = lambda_param.powf(m1 / p.m) * bracket <= T::one() + T::lit(8.0) * T::epsilon();

    let hy = T::lit(2.0) * half_width / T::from_usize_lossy(ny - 1);
    let mut y: Vec<T> = (0..ny)
        .map(|j| -half_width + T::from_usize_lossy(j) * hy)
        .collect();
    if ny % 2 == 1 {
        y[ny / 2] = T::zero();
    }
    let inv_m = T::one() / p.m;
    let profile_y: Vec<T> = y
        .iter()
        .enumerate()
        .map(|(j, &yj)| {
            if j == 0 || j == ny - 1 {
                T::zero()
            } else {
                (lambda_param * (alpha * yj).cos())
                    .max(T::zero())
                    .powf(inv_m)
            }
        })
        .collect();
    let mut values = Vec::with_capacity(p.phi.len() * ny);
    for &phi in &p.phi {
        values.extend(profile_y.iter().map(|&f| phi * f));
    }
    Ok(CosineSubsolution {
        lambda_param,
        alpha,
        half_width,
        m: p.m,
        section: p.grid,
        y,
        values,
        admissible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn analytic_lambda1_values() {
        assert!((analytic_lambda1(PI).unwrap() - 1.0).abs() < 1e-15);
        assert!((analytic_lambda1(2.0 * PI).unwrap() - 0.25).abs() < 1e-15);
        assert!((analytic_lambda1(1.0).unwrap() - PI * PI).abs() < 1e-12);
        assert!(analytic_lambda1(0.0).is_err());
        assert!(analytic_lambda1(-1.0).is_err());
    }

    #[test]
    fn critical_speed_values() {
        assert!((critical_speed(2.0_f64, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((critical_speed(3.0_f64, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((critical_speed(2.0_f64, 0.25).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(
            critical_speed(1.0_f64, 1.0),
            Err(Error::DegenerateExponent(_))
        ));
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(SectionGrid::new(1.0, 2).is_err());
        assert!(SectionGrid::new(0.0, 10).is_err());
        let g = SectionGrid::new(2.0, 5).unwrap();
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.nodes(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn thomas_solver_inverts_second_difference() {
        let b: Vec<f64> = vec![1.0, -2.0, 0.5, 3.0];
        let y = solve_second_difference(&b);
        for i in 0..4 {
            let l = if i > 0 { y[i - 1] } else { 0.0 };
            let r = if i < 3 { y[i + 1] } else { 0.0 };
            assert!((2.0 * y[i] - l - r - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn shooting_profile_has_zero_trace_and_mirror_symmetry() {
        let p = shoot_profile(PI, 2.0, 101).unwrap();
        assert_eq!(p.phi[0], 0.0);
        assert_eq!(p.phi[100], 0.0);
        assert_eq!(p.symmetry_defect(), 0.0);
        let max = p.phi.iter().cloned().fold(0.0, f64::max);
        assert_eq!(p.phi[50], max);
        p.check_invariants(0.0).unwrap();
    }

    #[test]
    fn dilation_by_one_is_identity() {
        let p = shoot_profile(PI, 2.0, 41).unwrap();
        let q = dilate_profile(&p, 1.0).unwrap();
        assert_eq!(p.phi, q.phi);
        assert!(dilate_profile(&p, 0.9).is_err());
    }

    #[test]
    fn cosine_subsolution_centerline_and_boundary() {
        let p = shoot_profile(PI, 2.0, 41).unwrap();
        let s = cosine_subsolution(&p, 0.5, 1e-6, 5).unwrap();
        for i in 0..41 {
            assert!((s.value(i, 2) - 0.5_f64.sqrt() * p.phi[i]).abs() < 1e-14);
            assert_eq!(s.value(i, 0), 0.0);
            assert_eq!(s.value(i, 4), 0.0);
        }
        assert!(cosine_subsolution(&p, 1.5, 0.1, 5).is_err());
        assert!(cosine_subsolution(&p, 0.5, 0.0, 5).is_err());
    }

    #[test]
    fn cosine_admissibility_equality_case() {
        let p = shoot_profile(PI, 2.0, 41).unwrap();
        // lambda = 1 forces alpha = 0 for equality; the smallest positive alpha
        // leaves the bracket at 1 up to rounding, so the boundary case is admissible.
        let alpha = 1e-9;
        let s = cosine_subsolution(&p, 1.0, alpha, 5).unwrap();
        assert!(s.admissible);
        let s = cosine_subsolution(&p, 1.0, 0.5, 5).unwrap();
        assert!(!s.admissible);
    }
}
