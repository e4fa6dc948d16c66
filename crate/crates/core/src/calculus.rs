//! Differ-integrals of the univariate form `f(r) = (r-a)^{δ-1} E^η_{α,β,γ,δ}(λ₁(r-a)^α, λ₂(r-a)^β, λ₃(r-a)^γ)`.
//!
//! Every closed form is a shift of δ: n-th derivative and R–L derivative of
//! order ν move δ to δ-n and δ-ν, the R–L integral to δ+ν. The numerical
//! routines (L1 Caputo, Grünwald–Letnikov, quadrature of the R–L integral)
//! exist to check those shifts independently.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::ml::{eval_trivariate, eval_univariate, LambdaTriple, MLParams, SeriesControl};
use crate::quadrature::GradedRule;
use crate::scalar::{from_usize, lit, to_f64, CompensatedSum, Real};
use crate::special::reciprocal_gamma;

/// Order ν ≥ 0 and base point a of a differ-integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FracOrder<T> {
    pub nu: T,
    pub offset_a: T,
}

impl<T: Real> FracOrder<T> {
    pub fn new(nu: T, offset_a: T) -> Result<Self> {
        if !(nu >= T::zero()) || !nu.is_finite() || !offset_a.is_finite() {
            return Err(Error::InvalidParameter(format!("order must be finite and non-negative, got {}", to_f64(nu))));
        }
        Ok(Self { nu, offset_a })
    }

    /// Order ν with base point 0.
    pub fn at_origin(nu: T) -> Result<Self> {
        Self::new(nu, T::zero())
    }
}

/// Samples of a function on a uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
    pub step: T,
}

impl<T: Real> GridFunction<T> {
    /// Validates that `grid` is uniform to 1e-12 relative and matches `values`.
    pub fn new(grid: Vec<T>, values: Vec<T>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidGrid(format!("{} grid points but {} values", grid.len(), values.len())));
        }
        if grid.len() < 2 {
            return Err(Error::InvalidGrid("a grid needs at least two points".into()));
        }
        let step = (grid[grid.len() - 1] - grid[0]) / from_usize::<T>(grid.len() - 1);
        if !(step > T::zero()) {
            return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
        }
        let tol = lit::<T>(1e-12) * step.max(grid[0].abs().max(grid[grid.len() - 1].abs()));
        for (i, w) in grid.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidGrid(format!("grid not increasing at index {}", i + 1)));
            }
            let expected = grid[0] + step * from_usize::<T>(i + 1);
            if (w[1] - expected).abs() > tol.max(lit::<T>(1e-12) * step) {
                return Err(Error::InvalidGrid(format!("grid not uniform at index {}", i + 1)));
            }
        }
        Ok(Self { grid, values, step })
    }

    /// Samples `f` at `a + i·step`, i = 0..=n.
    pub fn from_fn<F: FnMut(T) -> T>(a: T, step: T, n: usize, mut f: F) -> Result<Self> {
        if !(step > T::zero()) || n == 0 {
            return Err(Error::InvalidGrid("need a positive step and at least one interval".into()));
        }
        let grid: Vec<T> = (0..=n).map(|i| a + step * from_usize::<T>(i)).collect();
        let values = grid.iter().map(|&r| f(r)).collect();
        Ok(Self { grid, values, step })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

fn check_point<T: Real>(order: &FracOrder<T>, y: T) -> Result<T> {
    let d = y - order.offset_a;
    if !(d > T::zero()) || !d.is_finite() {
        return Err(Error::Domain(format!(
            "evaluation point {} must lie right of the base point {}",
            to_f64(y),
            to_f64(order.offset_a)
        )));
    }
    Ok(d)
}

fn shifted<T: Real>(params: &MLParams<T>, lam: &LambdaTriple<T>, delta: T, d: T, ctrl: &SeriesControl<T>) -> Result<T> {
    let r = eval_univariate(&params.with_delta(delta), lam, d, ctrl)?.require_converged()?;
    Ok(r.value.re)
}

/// n-th classical derivative of `r^{δ-1} E(λ₁r^α, λ₂r^β, λ₃r^γ)`: δ moves to δ - n.
pub fn nth_derivative_univariate<T: Real>(
    params: &MLParams<T>,
    lam: &LambdaTriple<T>,
    n: usize,
    r: T,
    ctrl: &SeriesControl<T>,
) -> Result<T> {
    if !(r > T::zero()) {
        return Err(Error::Domain(format!("derivative needs r > 0, got {}", to_f64(r))));
    }
    shifted(params, lam, params.delta - from_usize::<T>(n), r, ctrl)
}

fn require_positive_delta<T: Real>(params: &MLParams<T>) -> Result<()> {
    if params.delta > T::zero() {
        Ok(())
    } else {
        Err(Error::Domain(format!("differ-integrals need delta > 0, got {}", to_f64(params.delta))))
    }
}

/// R–L integral of order ν from a: δ moves to δ + ν.
pub fn rl_integral_univariate<T: Real>(
    params: &MLParams<T>,
    lam: &LambdaTriple<T>,
    order: &FracOrder<T>,
    y: T,
    ctrl: &SeriesControl<T>,
) -> Result<T> {
    let d = check_point(order, y)?;
    require_positive_delta(params)?;
    shifted(params, lam, params.delta + order.nu, d, ctrl)
}

/// R–L derivative of order ν from a: δ moves to δ - ν.
pub fn rl_derivative_univariate<T: Real>(
    params: &MLParams<T>,
    lam: &LambdaTriple<T>,
    order: &FracOrder<T>,
    y: T,
    ctrl: &SeriesControl<T>,
) -> Result<T> {
    let d = check_point(order, y)?;
    require_positive_delta(params)?;
    shifted(params, lam, params.delta - order.nu, d, ctrl)
}

/// Caputo derivative of order ν from a.
///
/// * ν = 0: the function itself; integer ν: the classical derivative.
/// * δ > ⌊ν⌋ + 1: the first ⌈ν⌉ derivatives vanish at a, so Caputo and
///   R–L coincide and δ moves to δ - ν.
/// * δ = 1, 0 < ν < 1: f(a) = 1, so the R–L value loses `(y-a)^{-ν}/Γ(1-ν)`.
///
/// Any other combination is refused with a domain error.
pub fn caputo_derivative_univariate<T: Real>(
    params: &MLParams<T>,
    lam: &LambdaTriple<T>,
    order: &FracOrder<T>,
    y: T,
    ctrl: &SeriesControl<T>,
) -> Result<T> {
    let d = check_point(order, y)?;
    require_positive_delta(params)?;
    let nu = order.nu;
    if nu == nu.floor() {
        return shifted(params, lam, params.delta - nu, d, ctrl);
    }
    if params.delta > nu.floor() + T::one() {
        return shifted(params, lam, params.delta - nu, d, ctrl);
    }
    if params.delta == T::one() && nu < T::one() {
        let rl = shifted(params, lam, T::one() - nu, d, ctrl)?;
        return Ok(rl - d.powf(-nu) * reciprocal_gamma(T::one() - nu));
    }
    Err(Error::Domain(format!(
        "Caputo closed form needs delta > floor(nu) + 1 or delta = 1 with 0 < nu < 1 (delta = {}, nu = {})",
        to_f64(params.delta),
        to_f64(nu)
    )))
}

/// Caputo derivative of order ν of `(r-a)^γ / Γ(γ+1)`, i.e. `(r-a)^{γ-ν} / Γ(γ-ν+1)`.
///
/// Needs γ > ⌈ν⌉ - 1; a non-negative integer γ below ⌈ν⌉ gives exactly 0.
pub fn caputo_power<T: Real>(gamma_exp: T, order: &FracOrder<T>, r: T) -> Result<T> {
    let d = check_point(order, r)?;
    let nu = order.nu;
    let m = nu.ceil();
    if gamma_exp >= T::zero() && gamma_exp == gamma_exp.floor() && gamma_exp < m {
        return Ok(T::zero());
    }
    if !(gamma_exp > m - T::one()) {
        return Err(Error::Domain(format!(
            "Caputo derivative of order {} needs exponent > {}, got {}",
            to_f64(nu),
            to_f64(m - T::one()),
            to_f64(gamma_exp)
        )));
    }
    Ok(d.powf(gamma_exp - nu) * reciprocal_gamma(gamma_exp - nu + T::one()))
}

fn check_unit_order<T: Real>(nu: T) -> Result<()> {
    if nu > T::zero() && nu < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("numerical order must lie in (0, 1), got {}", to_f64(nu))))
    }
}

/// L1 weights b_k = (k+1)^{1-ν} - k^{1-ν}.
pub(crate) fn l1_weights<T: Real>(nu: T, n: usize) -> Vec<T> {
    let e = T::one() - nu;
    (0..n).map(|k| from_usize::<T>(k + 1).powf(e) - from_usize::<T>(k).powf(e)).collect()
}

/// L1 discretization of the Caputo derivative (base point grid[0]) at grid[1..].
///
/// `D^ν f(t_n) ≈ h^{-ν}/Γ(2-ν) Σ_{j<n} b_{n-j-1} (f_{j+1} - f_j)`, accurate to
/// O(h^{2-ν}) for twice continuously differentiable f.
pub fn caputo_l1_numeric<T: Real>(f: &GridFunction<T>, nu: T) -> Result<GridFunction<T>> {
    check_unit_order(nu)?;
    if f.len() < 3 {
        return Err(Error::InvalidGrid("L1 scheme needs at least three points".into()));
    }
    let n_pts = f.len();
    let b = l1_weights(nu, n_pts);
    let c = f.step.powf(-nu) * reciprocal_gamma(lit::<T>(2.0) - nu);
    let diffs: Vec<T> = f.values.windows(2).map(|w| w[1] - w[0]).collect();
    let values = (1..n_pts)
        .map(|n| {
            let mut acc = CompensatedSum::new();
            for j in 0..n {
                acc.add(b[n - j - 1] * diffs[j]);
            }
            c * acc.value()
        })
        .collect();
    Ok(GridFunction { grid: f.grid[1..].to_vec(), values, step: f.step })
}

/// Grünwald–Letnikov approximation of the R–L derivative (base point grid[0]) at grid[1..].
///
/// First-order accurate; weights w₀ = 1, w_j = w_{j-1}(1 - (ν+1)/j).
pub fn rl_grunwald_numeric<T: Real>(f: &GridFunction<T>, nu: T) -> Result<GridFunction<T>> {
    check_unit_order(nu)?;
    if f.len() < 3 {
        return Err(Error::InvalidGrid("Grünwald scheme needs at least three points".into()));
    }
    let n_pts = f.len();
    let mut w = vec![T::one(); n_pts];
    for j in 1..n_pts {
        w[j] = w[j - 1] * (T::one() - (nu + T::one()) / from_usize::<T>(j));
    }
    let c = f.step.powf(-nu);
    let values = (1..n_pts)
        .map(|n| {
            let mut acc = CompensatedSum::new();
            for j in 0..=n {
                acc.add(w[j] * f.values[n - j]);
            }
            c * acc.value()
        })
        .collect();
    Ok(GridFunction { grid: f.grid[1..].to_vec(), values, step: f.step })
}

/// `(1/Γ(ν)) ∫_a^y (y-s)^{ν-1} f(s) ds` for the univariate form, by composite
/// Gauss–Jacobi quadrature carrying (s-a)^{δ-1} and (y-s)^{ν-1} as weights.
pub fn rl_integral_numeric<T: Real>(
    params: &MLParams<T>,
    lam: &LambdaTriple<T>,
    order: &FracOrder<T>,
    y: T,
    rule: &GradedRule<T>,
    ctrl: &SeriesControl<T>,
) -> Result<T> {
    check_point(order, y)?;
    require_positive_delta(params)?;
    if !(order.nu > T::zero()) {
        return Err(Error::InvalidParameter("quadrature of the R–L integral needs nu > 0".into()));
    }
    let a = order.offset_a;
    let err = std::cell::RefCell::new(None);
    let smooth = |_s: T, da: T, _db: T| -> T {
        let args = [
            lam.lambda1 * da.powf(params.alpha),
            lam.lambda2 * da.powf(params.beta),
            lam.lambda3 * da.powf(params.gamma),
        ];
        let c = |x: T| Complex::new(x, T::zero());
        match eval_trivariate(params, c(args[0]), c(args[1]), c(args[2]), ctrl).and_then(|r| r.require_converged()) {
            Ok(r) => r.value.re,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                T::nan()
            }
        }
    };
    let v = rule.integrate(smooth, a, y, params.delta - T::one(), order.nu - T::one(), &[])?;
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(v * reciprocal_gamma(order.nu))
}
