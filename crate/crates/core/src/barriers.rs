use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::io;
use crate::scalar::{Exponent, Real};
use crate::waves::{Orientation, WaveProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierKind {
    Sub,
    Super,
}

/// Initial data and constants of the amplitude/shift system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierParams<T> {
    pub kind: BarrierKind,
    pub m: T,
    pub cstar: T,
    pub f0: T,
    pub g0: T,
    /// Only meaningful for `Sub`; zero for `Super`.
    pub delta0: T,
}

impl<T: Real> BarrierParams<T> {
    pub fn sub(m: T, cstar: T, f0: T, g0: T, delta0: T) -> Result<Self> {
        let p = Self {
            kind: BarrierKind::Sub,
            m,
            cstar,
            f0,
            g0,
            delta0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn super_(m: T, cstar: T, f0: T, g0: T) -> Result<Self> {
        let p = Self {
            kind: BarrierKind::Super,
            m,
            cstar,
            f0,
            g0,
            delta0: T::zero(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        Exponent::new(self.m)?;
        if !(self.cstar > T::zero()) || !self.cstar.is_finite() {
            return Err(invalid(format!(
                "cstar must be positive, got {}",
                self.cstar
            )));
        }
        if !(self.f0 > T::zero() && self.f0 < T::one()) {
            return Err(invalid(format!("f0 must lie in (0, 1), got {}", self.f0)));
        }
        if !self.g0.is_finite() {
            return Err(invalid("g0 must be finite"));
        }
        match self.kind {
            // delta0 = 0 is allowed: it collapses the sub system onto the super one.
            BarrierKind::Sub if !(self.delta0 >= T::zero() && self.delta0 < T::one()) => Err(
                invalid(format!("delta0 must lie in [0, 1), got {}", self.delta0)),
            ),
            _ => Ok(()),
        }
    }

    fn delta(&self, tau: T) -> T {
        match self.kind {
            BarrierKind::Sub => delta_value(self.delta0, self.m, tau),
            BarrierKind::Super => T::zero(),
        }
    }
}

/// `delta(tau) = 2 (m-1) delta0 / (1 + tau)^2`.
pub fn delta_schedule<T: Real>(delta0: T, m: T, tau: T) -> Result<T> {
    Exponent::new(m)?;
    if !(delta0 > T::zero() && delta0 < T::one()) {
        return Err(invalid(format!("delta0 must lie in (0, 1), got {delta0}")));
    }
    if !(tau >= T::zero()) {
        return Err(invalid(format!("tau must be nonnegative, got {tau}")));
    }
    Ok(delta_value(delta0, m, tau))
}

fn delta_value<T: Real>(delta0: T, m: T, tau: T) -> T {
    let s = T::one() + tau;
    T::lit(2.0) * (m - T::one()) * delta0 / (s * s)
}

/// Uniformly sampled solution of the amplitude/shift system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierPath<T> {
    pub params: BarrierParams<T>,
    pub dtau: T,
    pub tau: Vec<T>,
    pub f: Vec<T>,
    pub g: Vec<T>,
    /// Limit of `g(tau) - cstar tau`, from the closed formula.
    pub predicted_shift: T,
}

impl<T: Real> BarrierPath<T> {
    pub fn tau_end(&self) -> T {
        self.tau[self.tau.len() - 1]
    }

    /// `(f, g)` at `tau`, linearly interpolated between samples.
    pub fn at(&self, tau: T) -> Result<(T, T)> {
        let end = self.tau_end();
        if !(tau >= T::zero() && tau <= end) {
            return Err(Error::Range(format!(
                "tau = {tau} outside the path [0, {end}]"
            )));
        }
        let s = tau / self.dtau;
        let k = s.floor().to_usize().unwrap_or(0).min(self.tau.len() - 2);
        let t = (tau - self.tau[k]) / self.dtau;
        let lerp = |v: &[T]| v[k] * (T::one() - t) + v[k + 1] * t;
        Ok((lerp(&self.f), lerp(&self.g)))
    }

    /// `g(tau) - cstar tau` at each sample.
    pub fn shift_series(&self) -> Vec<T> {
        self.tau
            .iter()
            .zip(&self.g)
            .map(|(&t, &g)| g - self.params.cstar * t)
            .collect()
    }

    /// Largest `f(tau) - (1 - delta(tau) / (2 (m-1)))` over samples; nonpositive
    /// when the sub-barrier ceiling holds.
    pub fn ceiling_excess(&self) -> T {
        let two_m1 = T::lit(2.0) * (self.params.m - T::one());
        self.tau
            .iter()
            .zip(&self.f)
            .map(|(&t, &f)| f - (T::one() - self.params.delta(t) / two_m1))
            .fold(T::neg_infinity(), |a, b| a.max(b))
    }

    /// CSV with columns `tau,f,g,g_minus_cstar_tau`.
    pub fn to_csv(&self) -> String {
        let shift = self.shift_series();
        io::csv(
            "tau,f,g,g_minus_cstar_tau",
            (0..self.tau.len()).map(|k| {
                [
                    self.tau[k].as_f64(),
                    self.f[k].as_f64(),
                    self.g[k].as_f64(),
                    shift[k].as_f64(),
                ]
            }),
        )
    }
}

/// Classical RK4 on `f' = f/(m-1) (1 - delta(tau) - f^{m-1})`,
/// `g' = cstar f^{m-1}` with `delta = 0` for the super system.
pub fn integrate_barrier<T: Real>(
    params: &BarrierParams<T>,
    tau_end: T,
    dtau: T,
) -> Result<BarrierPath<T>> {
    params.validate()?;
    let e = Exponent::new(params.m)?;
    let limit = T::lit(0.01) * e.minus_one();
    if !(dtau > T::zero()) || dtau > limit * (T::one() + T::lit(1e-12)) {
        return Err(invalid(format!(
            "dtau must lie in (0, {limit}], got {dtau}"
        )));
    }
    if !(tau_end >= dtau) || !tau_end.is_finite() {
        return Err(invalid(format!(
            "tau_end must be at least dtau, got {tau_end}"
        )));
    }
    let steps = (tau_end / dtau).round().to_usize().unwrap_or(1).max(1);
    let h = tau_end / T::from_usize_lossy(steps);
    let cstar = params.cstar;
    let rhs = |tau: T, f: T| -> (T, T) {
        let p = e.pow_minus_one(f);
        (
            f / e.minus_one() * (T::one() - params.delta(tau) - p),
            cstar * p,
        )
    };

    let mut tau = Vec::with_capacity(steps + 1);
    let mut fs = Vec::with_capacity(steps + 1);
    let mut gs = Vec::with_capacity(steps + 1);
    let (mut f, mut g) = (params.f0, params.g0);
    tau.push(T::zero());
    fs.push(f);
    gs.push(g);
    let half = h / T::lit(2.0);
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    for k in 0..steps {
        let t = T::from_usize_lossy(k) * h;
        let (a1, b1) = rhs(t, f);
        let (a2, b2) = rhs(t + half, f + half * a1);
        let (a3, b3) = rhs(t + half, f + half * a2);
        let (a4, b4) = rhs(t + h, f + h * a3);
        f = f + sixth * (a1 + two * a2 + two * a3 + a4);
        g = g + sixth * (b1 + two * b2 + two * b3 + b4);
        let t_next = T::from_usize_lossy(k + 1) * h;
        if !(f > T::zero() && f < T::one()) {
            return Err(Error::IntegrationFailure {
                tau: t_next.as_f64(),
            });
        }
        tau.push(t_next);
        fs.push(f);
        gs.push(g);
    }
    Ok(BarrierPath {
        params: *params,
        dtau: h,
        tau,
        f: fs,
        g: gs,
        predicted_shift: asymptotic_shift(params),
    })
}

/// Exact super-barrier solution via the logistic variable `p = f^{m-1}`.
pub fn super_closed_form<T: Real>(f0: T, g0: T, cstar: T, m: T, tau: T) -> Result<(T, T)> {
    let e = Exponent::new(m)?;
    if !(f0 > T::zero() && f0 < T::one()) {
        return Err(invalid(format!("f0 must lie in (0, 1), got {f0}")));
    }
    if !(cstar > T::zero()) || !(tau >= T::zero()) {
        return Err(invalid("need cstar > 0 and tau >= 0"));
    }
    let p0 = e.pow_minus_one(f0);
    // 1 + p0 (e^tau - 1), kept accurate for small tau
    let grow = T::one() + p0 * tau.exp_m1();
    let p = p0 * tau.exp() / grow;
    let f = p.powf(T::one() / e.minus_one());
    let g = g0 + cstar * grow.ln();
    Ok((f, g))
}

/// Limit of `g(tau) - cstar tau` as `tau -> infinity`.
pub fn asymptotic_shift<T: Real>(params: &BarrierParams<T>) -> T {
    let m1 = params.m - T::one();
    let base = params.g0 + params.cstar * m1 * params.f0.ln();
    match params.kind {
        BarrierKind::Super => base,
        BarrierKind::Sub => base - T::lit(2.0) * params.cstar * m1 * params.delta0,
    }
}

/// `f(tau) phi(z_i, y - g(tau))`; a reflected wave is evaluated at
/// `y + g(tau)` so that the barrier moves toward negative `y`.
pub fn evaluate_barrier<T: Real>(
    path: &BarrierPath<T>,
    wave: &WaveProfile<T>,
    tau: T,
    z_index: usize,
    y: T,
) -> Result<T> {
    let (f, g) = path.at(tau)?;
    if z_index >= wave.section.n() {
        return Err(Error::Range(format!(
            "row {z_index} outside the section grid"
        )));
    }
    let xi = match wave.orientation {
        Orientation::Forward => y - g,
        Orientation::Reflected => y + g,
    };
    let beyond = match wave.orientation {
        Orientation::Forward => xi >= wave.xi0,
        Orientation::Reflected => xi <= wave.xi0,
    };
    if beyond {
        return Ok(T::zero());
    }
    Ok(f * wave.sample(z_index, xi))
}

/// Largest `delta0` in `(0, 1)` for which the sub-barrier ceiling holds on
/// `[0, 50]`, by bisection.
pub fn delta_bar<T: Real>(m: T, cstar: T, f0: T) -> Result<T> {
    let e = Exponent::new(m)?;
    let dtau = T::lit(0.01) * e.minus_one();
    let holds = |d: T| -> Result<bool> {
        let p = BarrierParams::sub(m, cstar, f0, T::zero(), d)?;
        match integrate_barrier(&p, T::lit(50.0), dtau) {
            Ok(path) => Ok(path.ceiling_excess() <= T::zero()),
            Err(Error::IntegrationFailure { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    let (mut lo, mut hi) = (T::zero(), T::one() - T::lit(1e-9));
    if holds(hi)? {
        return Ok(hi);
    }
    for _ in 0..40 {
        let mid = (lo + hi) / T::lit(2.0);
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `min(delta_bar, 1 / (2 cstar (m-1)))`; `delta0` must stay strictly below it.
pub fn admissible_delta0<T: Real>(m: T, cstar: T, f0: T) -> Result<T> {
    let bar = delta_bar(m, cstar, f0)?;
    Ok(bar.min(T::one() / (T::lit(2.0) * cstar * (m - T::one()))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonBookkeeping<T> {
    pub eps: T,
    pub a_eps: T,
    pub b_eps: T,
    pub lam_eps: T,
    pub c_eps: T,
}

/// Constants tying the `eps`-perturbed section to the original one.
pub fn epsilon_bookkeeping<T: Real>(eps: T, m: T, cstar: T) -> Result<EpsilonBookkeeping<T>> {
    let e = Exponent::new(m)?;
    if !(eps > T::zero() && eps < T::one()) {
        return Err(invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(cstar > T::zero()) {
        return Err(invalid("cstar must be positive"));
    }
    let two = T::lit(2.0);
    let a = eps * (T::lit(3.0) - eps) / two;
    let b = eps / two;
    let lam = (T::one() - eps).powf(-e.minus_one() / two);
    let c = cstar * ((T::one() - a) / (T::one() - eps)).powf(e.minus_one());
    let book = EpsilonBookkeeping {
        eps,
        a_eps: a,
        b_eps: b,
        lam_eps: lam,
        c_eps: c,
    };
    let identity = (T::one() - a) / (T::one() - b) - (T::one() - eps);
    let ok = a > eps
        && a < T::one()
        && b > T::zero()
        && b < a
        && c < cstar
        && identity.abs() <= T::lit(8.0) * T::epsilon();
    if !ok {
        return Err(Error::Estimation(format!(
            "bookkeeping invariants failed for eps = {eps}"
        )));
    }
    Ok(book)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_values() {
        assert!((delta_schedule(0.1, 2.0, 0.0).unwrap() - 0.2_f64).abs() < 1e-15);
        assert!((delta_schedule(0.1, 2.0, 1.0).unwrap() - 0.05_f64).abs() < 1e-15);
        assert!(delta_schedule(1.5_f64, 2.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_start() {
        let (f, g) = super_closed_form(0.3_f64, 0.7, 1.0, 2.5, 0.0).unwrap();
        assert!((f - 0.3).abs() < 1e-15 && (g - 0.7).abs() < 1e-15);
    }

    #[test]
    fn interpolation_range() {
        let p = BarrierParams::super_(2.0_f64, 1.0, 0.5, 0.0).unwrap();
        let path = integrate_barrier(&p, 1.0, 0.01).unwrap();
        assert!(path.at(1.5).is_err());
        let (f, _) = path.at(0.5).unwrap();
        assert!(f > 0.5 && f < 1.0);
    }
}
