//! Contour-integral evaluation of the trivariate Mittag-Leffler function
//!
//! ```text
//! E^η_{α,β,γ,δ}(u, v, w) = (1/2πi) ∫_H e^τ τ^{-δ} (1 − uτ^{-α} − vτ^{-β} − wτ^{-γ})^{-η} dτ
//! ```
//!
//! H wraps the negative real axis and every zero of the bracket. It is used
//! as an oracle for the series engine and shares no code with it.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::ml::{EvalResult, MLParams};
use crate::scalar::{cpow, from_usize, lit, to_f64, Real};
use crate::talbot::CotContour;

/// Discretization of the Hankel contour.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourSpec<T> {
    /// minimum number of trapezoid nodes
    pub node_count: usize,
    /// contour scale μ; `None` picks max(24, 7ρ) with ρ a bound on the bracket's zeros
    pub radius_scale: Option<T>,
    /// target relative accuracy used by the node-doubling check
    pub target_tol: T,
}

impl<T: Real> Default for ContourSpec<T> {
    fn default() -> Self {
        Self { node_count: 64, radius_scale: None, target_tol: lit(1e-10) }
    }
}

/// Radius of a disc holding every zero of `1 − Σ z_i τ^{-a_i}`.
///
/// For |τ| above it each |z_i τ^{-a_i}| < 1/n, so the bracket cannot vanish.
pub fn bracket_zero_radius<T: Real>(orders: [T; 3], args: [Complex<T>; 3]) -> T {
    let nz = args.iter().filter(|z| z.norm() > T::zero()).count();
    let n = from_usize::<T>(nz.max(1));
    let mut rho = T::zero();
    for (a, z) in orders.iter().zip(args.iter()) {
        let m = z.norm();
        if m > T::zero() {
            rho = rho.max((n * m).powf(a.recip()));
        }
    }
    rho
}

fn integrand<T: Real>(p: &MLParams<T>, args: [Complex<T>; 3], tau: Complex<T>) -> Option<Complex<T>> {
    let orders = p.orders();
    let mut bracket = Complex::new(T::one(), T::zero());
    for (a, z) in orders.iter().zip(args.iter()) {
        if z.norm() > T::zero() {
            bracket = bracket - *z * cpow(tau, -*a);
        }
    }
    if bracket.norm() == T::zero() {
        return None;
    }
    Some(cpow(tau, -p.delta) * cpow(bracket, -p.eta))
}

/// Contour-integral value of E^η_{α,β,γ,δ}(u, v, w).
///
/// Node doubling is used as the error estimate; `converged` is false (the
/// quadrature-divergence flag) when doubling moves the value by more than
/// 10 × `target_tol` relative to max(|value|, 1).
pub fn eval_hankel_contour<T: Real>(
    params: &MLParams<T>,
    u: Complex<T>,
    v: Complex<T>,
    w: Complex<T>,
    contour: &ContourSpec<T>,
) -> Result<EvalResult<T>> {
    params.validate()?;
    if contour.node_count < 8 {
        return Err(Error::InvalidParameter(format!("contour needs at least 8 nodes, got {}", contour.node_count)));
    }
    let args = [u, v, w];
    let rho = bracket_zero_radius(params.orders(), args);
    let mu = match contour.radius_scale {
        Some(m) if m > T::zero() => m,
        Some(m) => return Err(Error::InvalidParameter(format!("contour scale must be positive, got {}", to_f64(m)))),
        // the integrand peaks near e^{0.17 μ}, so μ stays as small as the zeros allow
        None => lit::<T>(24.0).max(lit::<T>(7.0) * rho),
    };
    let c = CotContour { sigma: T::zero(), mu };
    if c.crossing() <= rho {
        return Err(Error::InvalidParameter(format!(
            "contour scale {} does not enclose the bracket zeros (radius {})",
            to_f64(mu),
            to_f64(rho)
        )));
    }
    let mut n = contour.node_count.max(to_f64(mu.ceil()) as usize);
    n += n % 2;
    let f = |tau: Complex<T>| integrand(params, args, tau);
    let singular = || Error::QuadratureDivergence("bracket vanishes on the contour".into());
    let coarse = c.integrate(f, T::one(), n).ok_or_else(singular)?;
    let fine = c.integrate(f, T::one(), 2 * n).ok_or_else(singular)?;
    let est = (fine - coarse).norm();
    if !(est.is_finite() && fine.re.is_finite() && fine.im.is_finite()) {
        return Err(Error::Overflow("contour quadrature overflowed".into()));
    }
    let converged = est <= lit::<T>(10.0) * contour.target_tol * fine.norm().max(T::one());
    Ok(EvalResult { value: fine, abs_error_estimate: est, shells_used: 2 * n, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::{eval_trivariate, SeriesControl};

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    #[test]
    fn reciprocal_gamma_cases() {
        let spec = ContourSpec::default();
        let p = MLParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let r = eval_hankel_contour(&p, c(0.0), c(0.0), c(0.0), &spec).unwrap();
        assert!(r.converged);
        assert!((r.value.re - 1.0).abs() < 1e-12 && r.value.im.abs() < 1e-12);
        let r = eval_hankel_contour(&p.with_delta(2.0), c(0.0), c(0.0), c(0.0), &spec).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn agrees_with_series() {
        let spec = ContourSpec::default();
        let ctrl = SeriesControl::default();
        let p = MLParams::new(0.8, 0.4, 0.2, 1.8, 1.0).unwrap();
        let (u, v, w) = (c(0.25), c(0.5), c(0.5));
        let a = eval_hankel_contour(&p, u, v, w, &spec).unwrap();
        let b = eval_trivariate(&p, u, v, w, &ctrl).unwrap();
        assert!(a.converged);
        assert!((a.value - b.value).norm() <= 1e-8 * b.value.norm().max(1.0), "{a:?} {b:?}");
        let p = MLParams::new(0.9, 1.3, 0.7, 0.6, 2.5).unwrap();
        let (u, v, w) = (Complex::new(0.3, -0.5), c(-0.8), Complex::new(0.0, 0.6));
        let a = eval_hankel_contour(&p, u, v, w, &spec).unwrap();
        let b = eval_trivariate(&p, u, v, w, &ctrl).unwrap();
        assert!((a.value - b.value).norm() <= 1e-8 * b.value.norm().max(1.0), "{a:?} {b:?}");
    }

    #[test]
    fn rejects_too_few_nodes() {
        let p = MLParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let spec = ContourSpec { node_count: 4, ..ContourSpec::default() };
        assert!(eval_hankel_contour(&p, c(0.0), c(0.0), c(0.0), &spec).is_err());
    }

    #[test]
    fn small_contour_is_refused() {
        let p = MLParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let spec = ContourSpec { radius_scale: Some(1.0), ..ContourSpec::default() };
        assert!(eval_hankel_contour(&p, c(2.0), c(0.0), c(0.0), &spec).is_err());
    }
}
