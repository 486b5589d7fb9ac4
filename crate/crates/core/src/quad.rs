//! Adaptive Simpson quadrature for the smooth integrands left after the
//! endpoint substitutions in the shooting oracle.

use crate::Real;

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Returns `None` when the recursion depth is exhausted before the local
/// error estimate meets the tolerance.
pub(crate) fn adaptive_simpson<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, tol: T) -> Option<T> {
    if a == b {
        return Some(T::zero());
    }
    let half = T::lit(0.5);
    let c = (a + b) * half;
    let (fa, fb, fc) = (f(a), f(b), f(c));
    let whole = simpson(a, b, fa, fc, fb);
    recurse(f, a, b, fa, fc, fb, whole, tol, 50)
}

fn simpson<T: Real>(a: T, b: T, fa: T, fc: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fc + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Real>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fc: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> Option<T> {
    let half = T::lit(0.5);
    let c = (a + b) * half;
    let (d, e) = ((a + c) * half, (c + b) * half);
    let (fd, fe) = (f(d), f(e));
    let left = simpson(a, c, fa, fd, fc);
    let right = simpson(c, b, fc, fe, fb);
    let delta = left + right - whole;
    if delta.abs() <= T::lit(15.0) * tol {
        return Some(left + right + delta / T::lit(15.0));
    }
    if depth == 0 {
        return None;
    }
    let l = recurse(f, a, c, fa, fd, fc, left, tol * half, depth - 1)?;
    let r = recurse(f, c, b, fc, fe, fb, right, tol * half, depth - 1)?;
    Some(l + r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_and_transcendental() {
        let cubic = adaptive_simpson(&|x: f64| x * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((cubic - 4.0).abs() < 1e-12);
        let s = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((s - 2.0).abs() < 1e-11);
    }

    #[test]
    fn empty_interval_is_zero() {
        assert_eq!(adaptive_simpson(&|x: f64| x, 1.0, 1.0, 1e-9), Some(0.0));
    }
}
