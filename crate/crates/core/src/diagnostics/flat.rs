use serde::Serialize;

use super::fit::{fit_line, FitResult};
use crate::error::{invalid, Error, Result};
use crate::scalar::{Exponent, Real};

/// Parameters of the 1-D problem
/// `f_tau = k (f^m)_yy + f/(m-1) (1 - f^{m-1})` on `[-A, A]` with
/// `f = 1 - eps` on the boundary and at `tau = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatProblem<T> {
    pub m: T,
    pub half_width: T,
    pub k: T,
    pub eps: T,
    /// Inner half-width of the rate check.
    pub inner: T,
    pub n: usize,
    pub dtau: T,
    pub tau_end: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatReport<T> {
    /// Largest discrete second derivative of `f^m` over interior nodes and steps.
    pub max_second_difference: T,
    /// Most negative one-step change of `f` at any node.
    pub min_increment: T,
    /// Largest deviation of the boundary values from `1 - eps`.
    pub boundary_defect: T,
    /// `1 - min f_inf` on `|y| <= inner`: the equilibrium stays below 1.
    pub equilibrium_gap: T,
    /// Fit of `ln max_{|y|<=inner} (f_inf - f)` against `tau`; `None` when
    /// the data start at equilibrium.
    pub fit: Option<FitResult<T>>,
    pub concave: bool,
    pub monotone: bool,
    pub exponential: bool,
}

impl<T: Real> FlatReport<T> {
    pub fn passed(&self) -> bool {
        self.concave && self.monotone && self.exponential && self.boundary_defect == T::zero()
    }
}

struct Flat<T> {
    e: Exponent<T>,
    f: Vec<T>,
    w: Vec<T>,
    cy: T,
    dtau: T,
}

impl<T: Real> Flat<T> {
    fn step(&mut self) {
        let n = self.f.len();
        for (w, &f) in self.w.iter_mut().zip(&self.f) {
            *w = self.e.pow(f);
        }
        let m1 = self.e.minus_one();
        for j in 1..n - 1 {
            let f = self.f[j];
            let lap = self.w[j - 1] + self.w[j + 1] - T::lit(2.0) * self.w[j];
            self.f[j] =
                f + self.cy * lap + self.dtau * f / m1 * (T::one() - self.e.pow_minus_one(f));
        }
    }

    fn max_second_difference(&self, h2: T) -> T {
        let n = self.f.len();
        let w: Vec<T> = self.f.iter().map(|&f| self.e.pow(f)).collect();
        (1..n - 1)
            .map(|j| (w[j - 1] + w[j + 1] - T::lit(2.0) * w[j]) / h2)
            .fold(T::neg_infinity(), |a, b| a.max(b))
    }
}

/// Integrates the flat problem and checks concavity of `f^m`, monotone
/// growth in `tau`, the imposed boundary values, and exponential approach
/// to the equilibrium on `|y| <= inner`.
pub fn flat_problem_checks<T: Real>(p: &FlatProblem<T>) -> Result<FlatReport<T>> {
    let e = Exponent::new(p.m)?;
    if !(p.half_width > T::zero()) || !(p.k > T::zero()) {
        return Err(invalid("half-width and k must be positive"));
    }
    if !(p.eps >= T::zero() && p.eps < T::lit(0.5)) {
        return Err(invalid(format!("eps must lie in [0, 1/2), got {}", p.eps)));
    }
    if !(p.inner >= T::zero() && p.inner < p.half_width) {
        return Err(invalid("inner half-width must lie in [0, A)"));
    }
    if p.n < 5 || !(p.tau_end > T::zero()) || !(p.dtau > T::zero()) {
        return Err(invalid("need n >= 5, tau_end > 0, dtau > 0"));
    }
    let h = T::lit(2.0) * p.half_width / T::from_usize_lossy(p.n - 1);
    // f stays in [1-eps, 1], so the diffusivity is at most k m.
    let limit = h * h / (T::lit(2.0) * p.k * e.value());
    if p.dtau > limit {
        return Err(Error::Stability {
            dt: p.dtau.as_f64(),
            limit: limit.as_f64(),
        });
    }
    let start = T::one() - p.eps;
    let mut flat = Flat {
        e,
        f: vec![start; p.n],
        w: vec![T::zero(); p.n],
        cy: p.k * p.dtau / (h * h),
        dtau: p.dtau,
    };
    let y = |j: usize| -p.half_width + T::from_usize_lossy(j) * h;
    let inner: Vec<usize> = (0..p.n).filter(|&j| y(j).abs() <= p.inner).collect();
    let h2 = h * h;

    let steps = (p.tau_end / p.dtau).ceil().to_usize().unwrap_or(0);
    let sample_every = (steps / 200).max(1);
    let mut max_d2 = flat.max_second_difference(h2);
    let mut min_inc = T::infinity();
    let mut boundary = T::zero();
    let mut samples: Vec<(T, Vec<T>)> =
        vec![(T::zero(), inner.iter().map(|&j| flat.f[j]).collect())];
    let mut prev = flat.f.clone();
    for s in 1..=steps {
        flat.step();
        for (a, b) in flat.f.iter().zip(&prev) {
            min_inc = min_inc.min(*a - *b);
        }
        if !flat.f.iter().all(|v| v.is_finite()) {
            return Err(Error::Stability {
                dt: p.dtau.as_f64(),
                limit: limit.as_f64(),
            });
        }
        max_d2 = max_d2.max(flat.max_second_difference(h2));
        boundary = boundary
            .max((flat.f[0] - start).abs())
            .max((flat.f[p.n - 1] - start).abs());
        prev.clone_from(&flat.f);
        if s % sample_every == 0 {
            let tau = T::from_usize_lossy(s) * p.dtau;
            samples.push((tau, inner.iter().map(|&j| flat.f[j]).collect()));
        }
    }

    // Continue to the discrete equilibrium.
    let cap = steps.max(1) * 50;
    let mut settled = false;
    for _ in 0..cap {
        flat.step();
        let change = flat
            .f
            .iter()
            .zip(&prev)
            .fold(T::zero(), |a, (x, y)| a.max((*x - *y).abs()));
        prev.clone_from(&flat.f);
        if change <= T::lit(1e-15) {
            settled = true;
            break;
        }
    }
    if !settled {
        return Err(Error::ConvergenceFailure {
            iterations: cap,
            residual: f64::NAN,
            history: Vec::new(),
        });
    }
    let limit_inner: Vec<T> = inner.iter().map(|&j| flat.f[j]).collect();
    let equilibrium_gap = limit_inner
        .iter()
        .fold(T::zero(), |a, &f| a.max(T::one() - f));

    let gaps: Vec<(T, T)> = samples
        .iter()
        .map(|(t, f)| {
            let g = f
                .iter()
                .zip(&limit_inner)
                .fold(T::zero(), |a, (v, l)| a.max(*l - *v));
            (*t, g)
        })
        .collect();
    let floor = T::lit(1e-11);
    let fit = if gaps[0].1 <= floor {
        None
    } else {
        // Skip the initial layer and stop before roundoff dominates.
        let usable: Vec<(T, T)> = gaps.iter().copied().filter(|(_, g)| *g > floor).collect();
        let from = usable.len() / 4;
        let (xs, ys): (Vec<T>, Vec<T>) = usable[from..].iter().map(|(t, g)| (*t, g.ln())).unzip();
        Some(fit_line(&xs, &ys)?)
    };
    let exponential = fit.is_none_or(|f| f.slope < T::zero() && f.r_squared >= T::lit(0.99));
    Ok(FlatReport {
        max_second_difference: max_d2,
        min_increment: min_inc,
        boundary_defect: boundary,
        equilibrium_gap,
        fit,
        concave: max_d2 <= T::lit(1e-10),
        // a few ulps of jitter once the equilibrium is reached
        monotone: min_inc >= -T::lit(4.0) * T::epsilon(),
        exponential,
    })
}
