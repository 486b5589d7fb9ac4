use super::field::{TubeField, Variable};
use crate::error::{invalid, Error, Result};
use crate::scalar::{Exponent, Real};
use crate::section::SectionProfile;

/// `v = (t + t0)^{1/(m-1)} u`, `tau = ln(t + t0)`.
pub fn to_rescaled<T: Real>(u: &TubeField<T>, t0: T) -> Result<TubeField<T>> {
    if u.variable != Variable::Physical {
        return Err(invalid("to_rescaled needs a physical-variable field"));
    }
    if !(t0 > T::zero()) {
        return Err(invalid(format!("t0 must be positive, got {t0}")));
    }
    let e = Exponent::new(u.m)?;
    let shifted = u.time + t0;
    if !(shifted > T::zero()) {
        return Err(invalid(format!("t + t0 = {shifted} must be positive")));
    }
    let factor = shifted.powf(T::one() / e.minus_one());
    let mut v = u.clone();
    v.values.iter_mut().for_each(|x| *x = *x * factor);
    v.variable = Variable::Rescaled;
    v.time = shifted.ln();
    v.t0 = t0;
    Ok(v)
}

/// Inverse of [`to_rescaled`], using the `t0` carried by the field.
pub fn from_rescaled<T: Real>(v: &TubeField<T>) -> Result<TubeField<T>> {
    if v.variable != Variable::Rescaled {
        return Err(invalid("from_rescaled needs a rescaled-variable field"));
    }
    let e = Exponent::new(v.m)?;
    let shifted = v.time.exp();
    let t = shifted - v.t0;
    if !(shifted > T::zero()) || !t.is_finite() {
        return Err(invalid(format!("t + t0 = {shifted} must be positive")));
    }
    let factor = (-v.time / e.minus_one()).exp();
    let mut u = v.clone();
    u.values.iter_mut().for_each(|x| *x = *x * factor);
    u.variable = Variable::Physical;
    u.time = t;
    Ok(u)
}

/// Smallest floor for an admissible `t0`.
const T0_FLOOR: f64 = 1e-12;

/// A `t0` with `t0^{1/(m-1)} u0 <= Phi / 2` at every node:
/// `t0 = min over the support of (Phi(z) / (2 u0(z, y)))^{m-1}`.
pub fn admissible_t0<T: Real>(u0: &TubeField<T>, profile: &SectionProfile<T>) -> Result<T> {
    let e = Exponent::new(profile.m)?;
    let nz = u0.grid.nz();
    if profile.phi.len() != nz {
        return Err(invalid("profile and field use different section grids"));
    }
    let mut t0 = T::infinity();
    for i in 0..nz {
        let phi = profile.phi[i];
        for (j, &u) in u0.row(i).iter().enumerate() {
            if u <= T::zero() {
                continue;
            }
            if !(phi > T::zero()) {
                return Err(Error::InadmissibleDatum(format!(
                    "u0 = {u} > 0 at node ({i}, {j}) where Phi vanishes"
                )));
            }
            t0 = t0.min((phi / (T::lit(2.0) * u)).powf(e.minus_one()));
        }
    }
    if !t0.is_finite() {
        return Err(Error::InadmissibleDatum("u0 vanishes identically".into()));
    }
    Ok(t0.max(T::lit(T0_FLOOR)))
}
