//! Laplace transform of the univariate form, its numerical inversion, and
//! the convolution rule.
//!
//! ```text
//! L[r^{δ-1} E^η_{α,β,γ,δ}(λ₁r^α, λ₂r^β, λ₃r^γ)](s) = s^{-δ} (1 − λ₁s^{-α} − λ₂s^{-β} − λ₃s^{-γ})^{-η}
//! ```

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::ml::{eval_trivariate, eval_univariate, LambdaTriple, MLParams, SeriesControl, UnivariateSeries};
use crate::quadrature::{gauss_laguerre, GradedRule};
use crate::scalar::{cpow, from_usize, lit, to_f64, CompensatedSum, Real};
use crate::special::reciprocal_gamma;
use crate::talbot::CotContour;

/// A point of the transform: Laplace variable and value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformValue<T> {
    pub s: Complex<T>,
    pub value: Complex<T>,
}

fn bracket<T: Real>(params: &MLParams<T>, lam: &LambdaTriple<T>, s: Complex<T>) -> (Complex<T>, T) {
    let mut b = Complex::new(T::one(), T::zero());
    let mut scale = T::one();
    for (a, l) in params.orders().iter().zip(lam.as_array()) {
        if l != T::zero() {
            let t = cpow(s, -*a) * l;
            scale = scale + t.norm();
            b = b - t;
        }
    }
    (b, scale)
}

/// `s^{-δ} (1 − λ₁s^{-α} − λ₂s^{-β} − λ₃s^{-γ})^{-η}` on the principal branch.
pub fn laplace_closed_form<T: Real>(
    params: &MLParams<T>,
    lam: &LambdaTriple<T>,
    s: Complex<T>,
) -> Result<TransformValue<T>> {
    params.validate()?;
    lam.validate()?;
    if !(params.delta > T::zero()) {
        return Err(Error::Domain(format!("transform needs delta > 0, got {}", to_f64(params.delta))));
    }
    if !(s.re > T::zero()) {
        return Err(Error::Domain(format!("transform needs Re(s) > 0, got {}", to_f64(s.re))));
    }
    Ok(TransformValue { s, value: continued_transform(params, lam, s)? })
}

// analytic continuation off the cut (−∞, 0], as needed on an inversion contour
fn continued_transform<T: Real>(params: &MLParams<T>, lam: &LambdaTriple<T>, s: Complex<T>) -> Result<Complex<T>> {
    let (b, scale) = bracket(params, lam, s);
    if b.norm() <= lit::<T>(4.0) * T::epsilon() * scale {
        return Err(Error::SingularTransform(format!("{}{:+}i", to_f64(s.re), to_f64(s.im))));
    }
    Ok(cpow(s, -params.delta) * cpow(b, -params.eta))
}

/// Largest positive real zero of the bracket, or 0 when it has none.
///
/// The transform is analytic to the right of this point, which makes it the
/// natural shift for the inversion contour.
pub fn transform_abscissa<T: Real>(params: &MLParams<T>, lam: &LambdaTriple<T>) -> T {
    let orders = params.orders();
    let lams = lam.as_array();
    let n = from_usize::<T>(lams.iter().filter(|l| **l != T::zero()).count().max(1));
    let mut rho = T::zero();
    for (a, l) in orders.iter().zip(lams) {
        if l != T::zero() {
            rho = rho.max((n * l.abs()).powf(a.recip()));
        }
    }
    if rho == T::zero() {
        return T::zero();
    }
    let b = |x: T| bracket(params, lam, Complex::new(x, T::zero())).0.re;
    // scan down from the bound on a geometric grid, then bisect the first sign change
    let steps = 400;
    let lo_end = rho * lit::<T>(1e-8);
    let q = (lo_end / rho).powf(from_usize::<T>(steps).recip());
    let mut hi = rho * lit(1.001);
    let mut bh = b(hi);
    for _ in 0..steps {
        let lo = hi * q;
        let bl = b(lo);
        if bl == T::zero() {
            return lo;
        }
        if (bl < T::zero()) != (bh < T::zero()) {
            let (mut x0, mut x1) = (lo, hi);
            for _ in 0..200 {
                let m = (x0 + x1) * lit(0.5);
                if (b(m) < T::zero()) == (bl < T::zero()) {
                    x0 = m;
                } else {
                    x1 = m;
                }
            }
            return x1;
        }
        hi = lo;
        bh = bl;
    }
    T::zero()
}

/// Contour settings for [`talbot_invert`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TalbotSpec<T> {
    pub nodes: usize,
    /// horizontal shift of the contour; must lie right of every singularity of F
    pub sigma: T,
    /// relative change under node doubling above which the result is flagged
    pub doubling_tol: T,
}

impl<T: Real> Default for TalbotSpec<T> {
    fn default() -> Self {
        Self { nodes: 48, sigma: T::zero(), doubling_tol: lit(1e-6) }
    }
}

/// Result of a numerical inversion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inversion<T> {
    pub value: T,
    /// |f_{2N} − f_N|
    pub doubling_change: T,
    /// false when node doubling moved the value by more than the tolerance
    pub converged: bool,
}

/// Real-valued inverse Laplace transform at t by the trapezoidal rule on
/// `s(θ) = σ + (N/t)(0.5017θ cot(0.6407θ) − 0.6122 + 0.2645iθ)`.
pub fn talbot_invert<T, F>(f: F, t: T, spec: &TalbotSpec<T>) -> Result<Inversion<T>>
where
    T: Real,
    F: Fn(Complex<T>) -> Result<Complex<T>>,
{
    if !(t > T::zero()) || !t.is_finite() {
        return Err(Error::Domain(format!("inversion needs t > 0, got {}", to_f64(t))));
    }
    if spec.nodes < 4 || !(spec.sigma >= T::zero()) {
        return Err(Error::InvalidParameter("Talbot contour needs at least 4 nodes and sigma >= 0".into()));
    }
    let err = std::cell::RefCell::new(None);
    let g = |s: Complex<T>| match f(s) {
        Ok(v) => Some(v),
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            None
        }
    };
    let run = |n: usize| -> Result<T> {
        let c = CotContour { sigma: spec.sigma, mu: from_usize::<T>(n) / t };
        match c.integrate(&g, t, n) {
            Some(v) => Ok(v.re),
            None => Err(err.borrow_mut().take().unwrap_or(Error::SingularTransform("contour".into()))),
        }
    };
    let coarse = run(spec.nodes)?;
    let fine = run(2 * spec.nodes)?;
    let change = (fine - coarse).abs();
    if !fine.is_finite() {
        return Err(Error::Overflow("inversion overflowed".into()));
    }
    Ok(Inversion {
        value: coarse,
        doubling_change: change,
        converged: change <= spec.doubling_tol * coarse.abs().max(T::one()),
    })
}

/// Inverts [`laplace_closed_form`] at t with the contour shifted past the bracket's real zero.
pub fn invert_univariate<T: Real>(
    params: &MLParams<T>,
    lam: &LambdaTriple<T>,
    t: T,
    nodes: usize,
) -> Result<Inversion<T>> {
    let sigma = transform_abscissa(params, lam);
    params.validate()?;
    lam.validate()?;
    if !(params.delta > T::zero()) {
        return Err(Error::Domain(format!("transform needs delta > 0, got {}", to_f64(params.delta))));
    }
    let spec = TalbotSpec { nodes, sigma, ..TalbotSpec::default() };
    talbot_invert(|s| continued_transform(params, lam, s), t, &spec)
}

/// Laplace transform of the univariate form at real s > 0 by quadrature:
/// composite Gauss–Jacobi on [0, 1/s] and Gauss–Laguerre on the tail.
pub fn laplace_numeric<T: Real>(
    params: &MLParams<T>,
    lam: &LambdaTriple<T>,
    s: T,
    rule: &GradedRule<T>,
    laguerre_nodes: usize,
    ctrl: &SeriesControl<T>,
) -> Result<T> {
    params.validate()?;
    if !(s > T::zero()) || !(params.delta > T::zero()) {
        return Err(Error::Domain("numerical transform needs s > 0 and delta > 0".into()));
    }
    let err = std::cell::RefCell::new(None);
    let record = |e: Error| {
        err.borrow_mut().get_or_insert(e);
        T::nan()
    };
    let split = s.recip();
    let head_f = |_s: T, t: T, _db: T| -> T {
        let args =
            [lam.lambda1 * t.powf(params.alpha), lam.lambda2 * t.powf(params.beta), lam.lambda3 * t.powf(params.gamma)];
        let c = |x: T| Complex::new(x, T::zero());
        match eval_trivariate(params, c(args[0]), c(args[1]), c(args[2]), ctrl).and_then(|r| r.require_converged()) {
            Ok(r) => (-s * t).exp() * r.value.re,
            Err(e) => record(e),
        }
    };
    let head = rule.integrate(head_f, T::zero(), split, params.delta - T::one(), T::zero(), &[])?;
    if let Some(e) = err.borrow_mut().take() {
        return Err(e);
    }
    // ∫_T^∞ e^{-st} f(t) dt = e^{-sT}/s ∫_0^∞ e^{-x} f(T + x/s) dx
    let lag = gauss_laguerre(laguerre_nodes, T::zero())?;
    let mut tail = CompensatedSum::new();
    for (x, w) in lag.nodes.iter().zip(&lag.weights) {
        if *w < lit::<T>(1e-40) {
            continue;
        }
        let t = split + *x / s;
        let v = eval_univariate(params, lam, t, ctrl)?.require_converged()?;
        tail.add(*w * v.value.re);
    }
    Ok(head + (-s * split).exp() / s * tail.value())
}

fn same_orders<T: Real>(p1: &MLParams<T>, p2: &MLParams<T>) -> Result<()> {
    if p1.orders() != p2.orders() {
        return Err(Error::ParameterMismatch(format!(
            "convolution needs equal (alpha, beta, gamma), got {:?} and {:?}",
            p1.orders().map(to_f64),
            p2.orders().map(to_f64)
        )));
    }
    if !(p1.delta > T::zero() && p2.delta > T::zero()) {
        return Err(Error::Domain("convolution needs positive deltas".into()));
    }
    Ok(())
}

/// Convolution of two univariate forms sharing (α, β, γ) and λ: δ's and η's add.
pub fn convolution_closed_form<T: Real>(
    p1: &MLParams<T>,
    p2: &MLParams<T>,
    lam: &LambdaTriple<T>,
    r: T,
    ctrl: &SeriesControl<T>,
) -> Result<T> {
    same_orders(p1, p2)?;
    if !(r > T::zero()) {
        return Err(Error::Domain(format!("convolution needs r > 0, got {}", to_f64(r))));
    }
    let p = p1.with_delta(p1.delta + p2.delta).with_eta(p1.eta + p2.eta);
    Ok(eval_univariate(&p, lam, r, ctrl)?.require_converged()?.value.re)
}

/// `∫_0^r f₁(r-s) f₂(s) ds` by composite Gauss–Jacobi quadrature, with
/// s^{δ₂-1} and (r-s)^{δ₁-1} carried as endpoint weights.
pub fn convolution_numeric<T: Real>(
    p1: &MLParams<T>,
    p2: &MLParams<T>,
    lam: &LambdaTriple<T>,
    r: T,
    rule: &GradedRule<T>,
    ctrl: &SeriesControl<T>,
) -> Result<T> {
    same_orders(p1, p2)?;
    if !(r > T::zero()) {
        return Err(Error::Domain(format!("convolution needs r > 0, got {}", to_f64(r))));
    }
    let caches = [UnivariateSeries::new(p1, lam, r, ctrl)?, UnivariateSeries::new(p2, lam, r, ctrl)?];
    let err = std::cell::RefCell::new(None);
    // E_i(λ₁t^α, …) with the t^{δ_i-1} factor divided back out
    let e_at = |i: usize, p: &MLParams<T>, t: T| -> T {
        if t <= T::zero() {
            return reciprocal_gamma(p.delta);
        }
        match caches[i].eval(t).and_then(|r| r.require_converged()) {
            Ok(v) => v.value.re * t.powf(T::one() - p.delta),
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                T::nan()
            }
        }
    };
    let f = |_s: T, da: T, db: T| e_at(0, p1, db) * e_at(1, p2, da);
    let v = rule.integrate(f, T::zero(), r, p2.delta - T::one(), p1.delta - T::one(), &[])?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ones() -> MLParams<f64> {
        MLParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    #[test]
    fn closed_form_examples() {
        let p = MLParams::new(0.3, 0.8, 1.7, 1.0, 2.0).unwrap();
        let v = laplace_closed_form(&p, &LambdaTriple::zero(), Complex::new(2.5, 1.0)).unwrap();
        let want = Complex::new(1.0, 0.0) / Complex::new(2.5, 1.0);
        assert!((v.value - want).norm() < 1e-15);
        let v = laplace_closed_form(&ones(), &LambdaTriple::new(1.0, 1.0, 1.0), c(4.0)).unwrap();
        assert_relative_eq!(v.value.re, 1.0, max_relative = 1e-15);
        assert!(matches!(
            laplace_closed_form(&ones(), &LambdaTriple::new(1.0, 1.0, 1.0), c(3.0)),
            Err(Error::SingularTransform(_))
        ));
        assert!(laplace_closed_form(&ones(), &LambdaTriple::zero(), c(-1.0)).is_err());
    }

    #[test]
    fn forward_quadrature_matches_closed_form() {
        let p = MLParams::new(0.8, 0.4, 0.2, 1.8, 1.0).unwrap();
        let lam = LambdaTriple::new(0.5, 0.3, 0.5);
        let ctrl = SeriesControl::default();
        for &s in &[4.0, 6.5] {
            let num = laplace_numeric(&p, &lam, s, &GradedRule::default(), 32, &ctrl).unwrap();
            let closed = laplace_closed_form(&p, &lam, c(s)).unwrap().value.re;
            assert_relative_eq!(num, closed, max_relative = 1e-8);
        }
    }

    #[test]
    fn abscissa_of_exponential() {
        // bracket 1 - 3/s vanishes at s = 3
        let s0 = transform_abscissa(&ones(), &LambdaTriple::new(1.0, 1.0, 1.0));
        assert_relative_eq!(s0, 3.0, max_relative = 1e-12);
        assert_eq!(transform_abscissa(&ones(), &LambdaTriple::zero()), 0.0);
    }

    #[test]
    fn talbot_examples() {
        let spec = TalbotSpec::default();
        let r = talbot_invert(|s| Ok(s.inv()), 1.0, &spec).unwrap();
        assert!(r.converged);
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-12);
        let r = talbot_invert(|s| Ok((s * s).inv()), 2.0, &spec).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-12);
        let r = invert_univariate(&ones(), &LambdaTriple::new(1.0, 1.0, 1.0), 0.5, 48).unwrap();
        assert_relative_eq!(r.value, 1.5f64.exp(), max_relative = 1e-10);
        assert!(talbot_invert(|s| Ok(s.inv()), 0.0, &spec).is_err());
    }

    #[test]
    fn inversion_recovers_series() {
        let p = MLParams::new(0.8, 0.4, 0.2, 1.8, 1.0).unwrap();
        let lam = LambdaTriple::new(0.5, 0.3, 0.5);
        let ctrl = SeriesControl::default();
        for &t in &[0.25, 0.8, 1.5] {
            let inv = invert_univariate(&p, &lam, t, 48).unwrap();
            let ser: f64 = eval_univariate(&p, &lam, t, &ctrl).unwrap().value.re;
            assert!(inv.converged);
            assert!((inv.value - ser).abs() <= 1e-6 * ser.abs().max(1.0), "t={t}");
        }
    }

    #[test]
    fn convolution_examples() {
        let ctrl = SeriesControl::default();
        let p = MLParams::new(0.5, 0.7, 1.1, 1.0, 0.3).unwrap();
        let q = p.with_eta(2.2);
        let v = convolution_closed_form(&p, &q, &LambdaTriple::zero(), 0.7, &ctrl).unwrap();
        assert_relative_eq!(v, 0.7, max_relative = 1e-14);
        let lam = LambdaTriple::new(1.0, 1.0, 1.0);
        let v = convolution_closed_form(&ones(), &ones(), &lam, 0.6, &ctrl).unwrap();
        assert_relative_eq!(v, 0.6 * 1.8f64.exp(), max_relative = 1e-12);
        let other = MLParams::new(0.5, 0.7, 1.2, 1.0, 0.3).unwrap();
        assert!(matches!(convolution_closed_form(&p, &other, &lam, 0.6, &ctrl), Err(Error::ParameterMismatch(_))));
    }

    #[test]
    fn convolution_quadrature_matches() {
        let ctrl = SeriesControl::default();
        let p1 = MLParams::new(0.8, 0.4, 0.2, 1.8, 1.0).unwrap();
        let p2 = p1.with_delta(0.6).with_eta(0.7);
        let lam = LambdaTriple::new(0.5, -0.3, 0.5);
        let a = convolution_numeric(&p1, &p2, &lam, 0.6, &GradedRule::default(), &ctrl).unwrap();
        let b = convolution_closed_form(&p1, &p2, &lam, 0.6, &ctrl).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-9);
    }

    #[test]
    fn transform_is_continuous_along_the_real_ray() {
        let p = MLParams::new(0.7, 1.2, 0.4, 1.3, 1.6).unwrap();
        let lam = LambdaTriple::new(0.8, -0.5, 0.6);
        let mut s = transform_abscissa(&p, &lam) + 0.05;
        let mut prev = laplace_closed_form(&p, &lam, c(s)).unwrap().value;
        while s < 100.0 {
            s *= 1.001;
            let v = laplace_closed_form(&p, &lam, c(s)).unwrap().value;
            assert!(v.im.abs() < 1e-12 * v.norm());
            assert!((v - prev).norm() <= 0.01 * prev.norm(), "jump at s={s}");
            prev = v;
        }
    }
}
