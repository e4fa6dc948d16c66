//! Three-order Caputo initial-value problem
//!
//! ```text
//! D^α y − λ₃ D^β y − λ₂ D^γ y − λ₁ y = g,   y(0) = y₀,   1 ≥ α > β > γ > 0
//! ```
//!
//! Note the crossed pairing: λ₃ multiplies the β-derivative and λ₂ the
//! γ-derivative. In the solution λ₂ rides the (α−γ) slot and λ₃ the (α−β) slot:
//!
//! ```text
//! y(r) = y₀ (1 + λ₁ r^α E_{α,α−γ,α−β,α+1}(λ₁r^α, λ₂r^{α−γ}, λ₃r^{α−β}))
//!      + ∫₀^r (r−s)^{α−1} E_{α,α−γ,α−β,α}(λ₁(r−s)^α, λ₂(r−s)^{α−γ}, λ₃(r−s)^{α−β}) g(s) ds
//! ```

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ml::{eval_fox_wright_1psi1, LambdaTriple, MLParams, SeriesControl, ShellMonitor, UnivariateSeries};
use crate::quadrature::GradedRule;
use crate::scalar::{from_usize, lit, to_f64, CompensatedSum, Real};
use crate::special::{ln_factorial, reciprocal_gamma};

/// Nodes per panel of the composite rule used by [`particular_solution`].
pub const DEFAULT_QUAD_NODES: usize = 16;

/// Orders, coefficients and initial value of the IVP.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IvpSpec<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub lambda1: T,
    pub lambda2: T,
    pub lambda3: T,
    pub y0: T,
}

impl<T: Real> IvpSpec<T> {
    pub fn new(orders: (T, T, T), lambdas: (T, T, T), y0: T) -> Result<Self> {
        let s = Self {
            alpha: orders.0,
            beta: orders.1,
            gamma: orders.2,
            lambda1: lambdas.0,
            lambda2: lambdas.1,
            lambda3: lambdas.2,
            y0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b, g) = (self.alpha, self.beta, self.gamma);
        if !(T::one() >= a && a > b && b > g && g > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "orders must satisfy 1 >= alpha > beta > gamma > 0, got ({}, {}, {})",
                to_f64(a),
                to_f64(b),
                to_f64(g)
            )));
        }
        if ![self.lambda1, self.lambda2, self.lambda3, self.y0].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter("coefficients and initial value must be finite".into()));
        }
        Ok(())
    }

    /// Lambdas in solution-slot order (λ₁, λ₂, λ₃) for orders (α, α−γ, α−β).
    pub fn lambdas(&self) -> LambdaTriple<T> {
        LambdaTriple::new(self.lambda1, self.lambda2, self.lambda3)
    }

    /// E_{α, α−γ, α−β, δ} with η = 1.
    pub fn solution_params(&self, delta: T) -> MLParams<T> {
        MLParams {
            alpha: self.alpha,
            beta: self.alpha - self.gamma,
            gamma: self.alpha - self.beta,
            delta,
            eta: T::one(),
        }
    }
}

/// Right-hand side g of the equation.
#[derive(Clone)]
pub enum Forcing<T> {
    Zero,
    Function(Arc<dyn Fn(T) -> T + Send + Sync>),
    /// piecewise-linear interpolation of strictly increasing samples
    Table {
        r: Vec<T>,
        g: Vec<T>,
    },
}

impl<T: Real> fmt::Debug for Forcing<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Zero => write!(f, "Zero"),
            Forcing::Function(_) => write!(f, "Function(..)"),
            Forcing::Table { r, .. } => write!(f, "Table({} samples)", r.len()),
        }
    }
}

impl<T: Real> Forcing<T> {
    pub fn function<F: Fn(T) -> T + Send + Sync + 'static>(f: F) -> Self {
        Forcing::Function(Arc::new(f))
    }

    pub fn constant(c: T) -> Self {
        Self::function(move |_| c)
    }

    pub fn table(r: Vec<T>, g: Vec<T>) -> Result<Self> {
        if r.len() != g.len() || r.len() < 2 {
            return Err(Error::InvalidGrid("forcing table needs at least two (r, g) rows of equal length".into()));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) || r.iter().chain(&g).any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("forcing table abscissae must be finite and strictly increasing".into()));
        }
        Ok(Forcing::Table { r, g })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Forcing::Zero)
    }

    pub fn eval(&self, x: T) -> Result<T> {
        match self {
            Forcing::Zero => Ok(T::zero()),
            Forcing::Function(f) => Ok(f(x)),
            Forcing::Table { r, g } => {
                let (lo, hi) = (r[0], r[r.len() - 1]);
                let slack = lit::<T>(1e-12) * (hi - lo);
                if x < lo - slack || x > hi + slack {
                    return Err(Error::Domain(format!(
                        "forcing table covers [{}, {}], asked for {}",
                        to_f64(lo),
                        to_f64(hi),
                        to_f64(x)
                    )));
                }
                let i = r.partition_point(|&t| t <= x).clamp(1, r.len() - 1);
                let (x0, x1) = (r[i - 1], r[i]);
                let w = ((x - x0) / (x1 - x0)).max(T::zero()).min(T::one());
                Ok(g[i - 1] + w * (g[i] - g[i - 1]))
            }
        }
    }

    /// Kinks of the interpolant strictly inside (a, b).
    fn breakpoints(&self, a: T, b: T) -> Vec<T> {
        match self {
            Forcing::Table { r, .. } => r.iter().copied().filter(|&x| x > a && x < b).collect(),
            _ => Vec::new(),
        }
    }
}

/// Which solver produced a trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Series,
    Oracle,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Series => "series",
            Backend::Oracle => "oracle",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TracePoint<T> {
    pub r: T,
    pub y: T,
    pub abs_err: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionTrace<T> {
    pub points: Vec<TracePoint<T>>,
    pub backend: Backend,
}

impl<T: Real> SolutionTrace<T> {
    pub fn grid(&self) -> Vec<T> {
        self.points.iter().map(|p| p.r).collect()
    }

    pub fn values(&self) -> Vec<T> {
        self.points.iter().map(|p| p.y).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn homogeneous_with_err<T: Real>(spec: &IvpSpec<T>, r: T, ctrl: &SeriesControl<T>) -> Result<(T, T)> {
    spec.validate()?;
    if !(r >= T::zero()) {
        return Err(Error::Domain(format!("r must be non-negative, got {}", to_f64(r))));
    }
    if r == T::zero() || spec.lambda1 == T::zero() {
        return Ok((spec.y0, T::zero()));
    }
    let p = spec.solution_params(spec.alpha + T::one());
    let e = crate::ml::eval_univariate(&p, &spec.lambdas(), r, ctrl)?.require_converged()?;
    let scale = (spec.y0 * spec.lambda1).abs();
    Ok((spec.y0 * (T::one() + spec.lambda1 * e.value.re), scale * e.abs_error_estimate))
}

/// Solution of the homogeneous problem (g ≡ 0) at r.
pub fn solve_homogeneous<T: Real>(spec: &IvpSpec<T>, r: T, ctrl: &SeriesControl<T>) -> Result<T> {
    homogeneous_with_err(spec, r, ctrl).map(|v| v.0)
}

struct Kernel<T> {
    cache: Option<UnivariateSeries<T>>,
    one_minus_alpha: T,
    at_zero: T,
}

impl<T: Real> Kernel<T> {
    fn new(spec: &IvpSpec<T>, r_max: T, ctrl: &SeriesControl<T>) -> Result<Self> {
        let p = spec.solution_params(spec.alpha);
        let lam = spec.lambdas();
        let trivial = lam.as_array().iter().all(|x| *x == T::zero());
        let cache = if trivial { None } else { Some(UnivariateSeries::new(&p, &lam, r_max, ctrl)?) };
        Ok(Self { cache, one_minus_alpha: T::one() - spec.alpha, at_zero: reciprocal_gamma(spec.alpha) })
    }

    /// E_{α,α−γ,α−β,α}(λ₁d^α, λ₂d^{α−γ}, λ₃d^{α−β}) without the (r−s)^{α−1} factor.
    fn smooth(&self, d: T) -> Result<T> {
        match &self.cache {
            _ if d <= T::zero() => Ok(self.at_zero),
            None => Ok(self.at_zero),
            Some(c) => {
                let v = c.eval(d)?.require_converged()?;
                Ok(v.value.re * d.powf(self.one_minus_alpha))
            }
        }
    }
}

fn particular_with_err<T: Real>(
    spec: &IvpSpec<T>,
    g: &Forcing<T>,
    r: T,
    quad_nodes: usize,
    ctrl: &SeriesControl<T>,
) -> Result<(T, T)> {
    spec.validate()?;
    if !(r >= T::zero()) || !r.is_finite() {
        return Err(Error::Domain(format!("r must be finite and non-negative, got {}", to_f64(r))));
    }
    if g.is_zero() || r < lit(1e-14) {
        return Ok((T::zero(), T::zero()));
    }
    if quad_nodes == 0 {
        return Err(Error::InvalidParameter("particular solution needs at least one quadrature node".into()));
    }
    let kernel = Kernel::new(spec, r, ctrl)?;
    let breaks = g.breakpoints(T::zero(), r);
    let run = |rule: &GradedRule<T>| -> Result<T> {
        let err = std::cell::RefCell::new(None);
        let f = |s: T, _da: T, db: T| -> T {
            match kernel.smooth(db).and_then(|k| g.eval(s).map(|gv| k * gv)) {
                Ok(v) => v,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    T::nan()
                }
            }
        };
        let v = rule.integrate(f, T::zero(), r, T::zero(), spec.alpha - T::one(), &breaks)?;
        match err.into_inner() {
            Some(e) => Err(e),
            None => Ok(v),
        }
    };
    let rule = GradedRule { nodes_per_panel: quad_nodes, ..GradedRule::default() };
    let coarse = run(&rule)?;
    let fine = run(&rule.refined())?;
    let change = (fine - coarse).abs();
    if !(change <= lit::<T>(1e-6) * fine.abs()) && change > T::zero() {
        return Err(Error::QuadratureDivergence(format!(
            "node doubling moved the particular solution at r = {} from {} to {}",
            to_f64(r),
            to_f64(coarse),
            to_f64(fine)
        )));
    }
    Ok((fine, change))
}

/// Solution with y(0) = 0 driven by g, by composite Gauss–Jacobi quadrature of
/// the convolution integral. `quad_nodes` is the number of nodes per panel; the
/// result is checked against a rule with twice as many.
pub fn particular_solution<T: Real>(
    spec: &IvpSpec<T>,
    g: &Forcing<T>,
    r: T,
    quad_nodes: usize,
    ctrl: &SeriesControl<T>,
) -> Result<T> {
    particular_with_err(spec, g, r, quad_nodes, ctrl).map(|v| v.0)
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() || grid[0] != T::zero() {
        return Err(Error::InvalidGrid("solution grid must start at 0".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || !grid.iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidGrid("solution grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Closed-form solution on `grid`: homogeneous part plus particular part.
pub fn solve<T: Real>(
    spec: &IvpSpec<T>,
    g: &Forcing<T>,
    grid: &[T],
    ctrl: &SeriesControl<T>,
) -> Result<SolutionTrace<T>> {
    spec.validate()?;
    ctrl.validate()?;
    check_grid(grid)?;
    let r_max = grid[grid.len() - 1];
    let cache = if r_max > T::zero() && spec.lambda1 != T::zero() {
        let p = spec.solution_params(spec.alpha + T::one());
        Some(UnivariateSeries::new(&p, &spec.lambdas(), r_max, ctrl)?)
    } else {
        None
    };
    let points = grid
        .par_iter()
        .map(|&r| -> Result<TracePoint<T>> {
            if r == T::zero() {
                return Ok(TracePoint { r, y: spec.y0, abs_err: T::zero() });
            }
            let (yh, eh) = match &cache {
                Some(c) => {
                    let e = c.eval(r)?.require_converged()?;
                    (
                        spec.y0 * (T::one() + spec.lambda1 * e.value.re),
                        (spec.y0 * spec.lambda1).abs() * e.abs_error_estimate,
                    )
                }
                None => (spec.y0, T::zero()),
            };
            let (yp, ep) = particular_with_err(spec, g, r, DEFAULT_QUAD_NODES, ctrl)?;
            Ok(TracePoint { r, y: yh + yp, abs_err: eh + ep })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SolutionTrace { points, backend: Backend::Series })
}

/// Uniform grid 0, h, 2h, … covering [0, horizon].
pub fn uniform_grid<T: Real>(step: T, horizon: T) -> Result<Vec<T>> {
    if !(step > T::zero()) || !(horizon > T::zero()) || !(step * from_usize::<T>(1 << 30) > horizon) {
        return Err(Error::InvalidGrid(format!("bad step {} for horizon {}", to_f64(step), to_f64(horizon))));
    }
    let n = to_f64((horizon / step - lit(1e-9)).ceil()) as usize;
    Ok((0..=n).map(|i| from_usize::<T>(i) * step).collect())
}

// L1 history for one order: h^{-ν}/Γ(2-ν) and the weights b_k.
struct L1Operator<T> {
    coef: T,
    weights: Vec<T>,
}

impl<T: Real> L1Operator<T> {
    fn new(nu: T, step: T, n: usize) -> Self {
        let e = T::one() - nu;
        let weights = (0..n).map(|k| from_usize::<T>(k + 1).powf(e) - from_usize::<T>(k).powf(e)).collect();
        Self { coef: step.powf(-nu) * reciprocal_gamma(lit::<T>(2.0) - nu), weights }
    }

    /// Σ_{j<n-1} b_{n-j-1} (y_{j+1} − y_j): the part not involving y_n.
    fn history(&self, diffs: &[T], n: usize) -> T {
        let mut acc = CompensatedSum::new();
        for j in 0..n - 1 {
            acc.add(self.weights[n - j - 1] * diffs[j]);
        }
        acc.value()
    }
}

fn l1_march<T: Real>(spec: &IvpSpec<T>, g: &Forcing<T>, step: T, n_steps: usize) -> Result<Vec<T>> {
    let ops = [spec.alpha, spec.beta, spec.gamma].map(|nu| L1Operator::new(nu, step, n_steps + 1));
    let mult = [T::one(), -spec.lambda3, -spec.lambda2];
    let lead = ops[0].coef * mult[0] + ops[1].coef * mult[1] + ops[2].coef * mult[2] - spec.lambda1;
    let scale = ops[0].coef + (ops[1].coef * mult[1]).abs() + (ops[2].coef * mult[2]).abs() + spec.lambda1.abs();
    if lead.abs() <= lit::<T>(64.0) * T::epsilon() * scale {
        return Err(Error::SingularStep(to_f64(lead)));
    }
    let mut y = Vec::with_capacity(n_steps + 1);
    y.push(spec.y0);
    let mut diffs: Vec<T> = Vec::with_capacity(n_steps);
    for n in 1..=n_steps {
        let t = from_usize::<T>(n) * step;
        // Σ_a m_a c_a [(y_n − y_{n−1}) + H_a] − λ₁ y_n = g_n
        let mut rhs = g.eval(t)?;
        for a in 0..3 {
            rhs = rhs - mult[a] * ops[a].coef * (ops[a].history(&diffs, n) - y[n - 1]);
        }
        let yn = rhs / lead;
        if !yn.is_finite() {
            return Err(Error::Overflow(format!("numerical solution overflowed at r = {}", to_f64(t))));
        }
        diffs.push(yn - y[n - 1]);
        y.push(yn);
    }
    Ok(y)
}

/// Independent L1 time-stepping solution on the uniform grid of `step` up to `horizon`.
///
/// Each Caputo derivative is replaced by its L1 approximation, so every step
/// solves one linear scalar equation. Accuracy is O(h^{2−α}) for smooth
/// solutions. `abs_err` is the difference from the same scheme at step 2h
/// (taken at the nearest coarse point for odd indices).
pub fn numeric_oracle_solve<T: Real>(
    spec: &IvpSpec<T>,
    g: &Forcing<T>,
    step: T,
    horizon: T,
) -> Result<SolutionTrace<T>> {
    spec.validate()?;
    if !(horizon > step) {
        return Err(Error::InvalidGrid("horizon must exceed the step".into()));
    }
    let grid = uniform_grid(step, horizon)?;
    let n = grid.len() - 1;
    let fine = l1_march(spec, g, step, n)?;
    let coarse = if n >= 2 { l1_march(spec, g, step * lit(2.0), n / 2)? } else { vec![spec.y0] };
    let diff_at = |i: usize| -> T {
        let j = (i / 2).min(coarse.len() - 1);
        (fine[2 * j] - coarse[j]).abs()
    };
    let points = grid
        .iter()
        .zip(&fine)
        .enumerate()
        .map(|(i, (&r, &y))| TracePoint {
            r,
            y,
            abs_err: if i % 2 == 0 { diff_at(i) } else { diff_at(i - 1).max(diff_at(i + 1)) },
        })
        .collect();
    Ok(SolutionTrace { points, backend: Backend::Oracle })
}

/// Fraction of the trace span, measured from its start, skipped by [`residual_check`].
pub const RESIDUAL_SKIP_FRACTION: f64 = 0.1;

/// Max-norm of the L1-discretized equation residual on a uniform trace.
///
/// Near r = 0 solutions behave like r^α and the L1 truncation error there does
/// not decay with h, so points in the first [`RESIDUAL_SKIP_FRACTION`] of the
/// span are excluded, as is the final point.
pub fn residual_check<T: Real>(spec: &IvpSpec<T>, trace: &SolutionTrace<T>, g: Option<&Forcing<T>>) -> Result<T> {
    spec.validate()?;
    let grid = trace.grid();
    if grid.len() < 3 {
        return Err(Error::InvalidGrid("residual needs at least three points".into()));
    }
    let step = grid[1] - grid[0];
    let span = grid[grid.len() - 1] - grid[0];
    let uniform = grid.windows(2).all(|w| ((w[1] - w[0]) - step).abs() <= lit::<T>(1e-9) * step);
    if !(step > T::zero()) || !uniform {
        return Err(Error::InvalidGrid("residual check needs a uniform grid".into()));
    }
    let y = trace.values();
    let n_pts = y.len();
    let ops = [spec.alpha, spec.beta, spec.gamma].map(|nu| L1Operator::new(nu, step, n_pts));
    let mult = [T::one(), -spec.lambda3, -spec.lambda2];
    let diffs: Vec<T> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let r_min = grid[0] + lit::<T>(RESIDUAL_SKIP_FRACTION) * span;
    let mut worst = T::zero();
    for n in 1..n_pts - 1 {
        if grid[n] < r_min {
            continue;
        }
        let mut lhs = -spec.lambda1 * y[n];
        for a in 0..3 {
            lhs = lhs + mult[a] * ops[a].coef * (ops[a].history(&diffs, n) + diffs[n - 1]);
        }
        let rhs = match g {
            Some(f) => f.eval(grid[n])?,
            None => T::zero(),
        };
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

fn d_shell_sum<T, F>(ctrl: &SeriesControl<T>, mut shell: F) -> Result<T>
where
    T: Real,
    F: FnMut(usize) -> Result<(T, T)>,
{
    let mut total = CompensatedSum::new();
    let mut monitor = ShellMonitor::new(ctrl);
    for d in 0..=ctrl.max_shell {
        let (sum, mag) = shell(d)?;
        total.add(sum);
        let v = total.value();
        if !v.is_finite() {
            return Err(Error::Overflow(format!("Fox-Wright assembly overflowed at shell {d}")));
        }
        if monitor.observe(mag, v.abs()) {
            return Ok(v);
        }
    }
    Err(Error::NotConverged { shells: ctrl.max_shell + 1, last_shell: to_f64(monitor.estimate()) })
}

fn psi<T: Real>(a0: T, b0: T, b1: T, x: T, ctrl: &SeriesControl<T>) -> Result<T> {
    let v = eval_fox_wright_1psi1((a0, T::one()), (b0, b1), Complex::new(x, T::zero()), ctrl)?.require_converged()?;
    Ok(v.value.re)
}

// λ₁^l λ₂^p r^{αl+(α−γ)p} / (l! p!), with the sign kept
fn lp_prefactor<T: Real>(spec: &IvpSpec<T>, l: usize, p: usize, r: T) -> T {
    let (fl, fp) = (from_usize::<T>(l), from_usize::<T>(p));
    let mut ln =
        (fl * spec.alpha + fp * (spec.alpha - spec.gamma)) * r.ln() - ln_factorial::<T>(l) - ln_factorial::<T>(p);
    let mut sign = T::one();
    for (lam, n) in [(spec.lambda1, l), (spec.lambda2, p)] {
        if n > 0 {
            if lam == T::zero() {
                return T::zero();
            }
            ln = ln + from_usize::<T>(n) * lam.abs().ln();
            if lam < T::zero() && n % 2 == 1 {
                sign = -sign;
            }
        }
    }
    sign * ln.exp()
}

/// Homogeneous solution assembled from ₁Ψ₁ Fox-Wright functions:
///
/// ```text
/// y(r) = y₀ Σ_d Σ_{l+p=d} λ₁^l λ₂^p r^{A}/(l! p!) { Ψ[(d+1,1);(A+1, α−β) | x]
///        − λ₃ r^{α−β} Ψ[(d+1,1);(A+α−β+1, α−β) | x] − λ₂ r^{α−γ} Ψ[(d+1,1);(A+α−γ+1, α−β) | x] }
/// ```
///
/// with A = αl + (α−γ)p and x = λ₃r^{α−β}. Shares no series code with
/// [`solve_homogeneous`] beyond the ₁Ψ₁ evaluator.
pub fn homogeneous_via_fox_wright<T: Real>(spec: &IvpSpec<T>, r: T, ctrl: &SeriesControl<T>) -> Result<T> {
    spec.validate()?;
    if !(r >= T::zero()) {
        return Err(Error::Domain(format!("r must be non-negative, got {}", to_f64(r))));
    }
    if r == T::zero() {
        return Ok(spec.y0);
    }
    let ab = spec.alpha - spec.beta;
    let ag = spec.alpha - spec.gamma;
    let x = spec.lambda3 * r.powf(ab);
    let c3 = spec.lambda3 * r.powf(ab);
    let c2 = spec.lambda2 * r.powf(ag);
    let s = d_shell_sum(ctrl, |d| {
        let a0 = from_usize::<T>(d + 1);
        let mut sum = CompensatedSum::new();
        let mut mag = T::zero();
        for l in 0..=d {
            let p = d - l;
            let pre = lp_prefactor(spec, l, p, r);
            if pre == T::zero() {
                continue;
            }
            let a = from_usize::<T>(l) * spec.alpha + from_usize::<T>(p) * ag;
            let t1 = psi(a0, a + T::one(), ab, x, ctrl)?;
            let t2 = if c3 == T::zero() { T::zero() } else { c3 * psi(a0, a + ab + T::one(), ab, x, ctrl)? };
            let t3 = if c2 == T::zero() { T::zero() } else { c2 * psi(a0, a + ag + T::one(), ab, x, ctrl)? };
            let v = pre * (t1 - t2 - t3);
            sum.add(v);
            mag = mag + pre.abs() * (t1.abs() + t2.abs() + t3.abs());
        }
        Ok((sum.value(), mag))
    })?;
    Ok(spec.y0 * s)
}

/// Kernel of the particular solution in ₁Ψ₁ form:
///
/// ```text
/// G(z) = Σ_d Σ_{l+p=d} λ₁^l λ₂^p z^{A}/(l! p!) Ψ[(d+1,1);(A+α, α−β) | λ₃z^{α−β}]
/// ```
///
/// which equals E_{α,α−γ,α−β,α}(λ₁z^α, λ₂z^{α−γ}, λ₃z^{α−β}).
pub fn particular_kernel_fox_wright<T: Real>(spec: &IvpSpec<T>, z: T, ctrl: &SeriesControl<T>) -> Result<T> {
    spec.validate()?;
    if !(z > T::zero()) {
        return Err(Error::Domain(format!("kernel argument must be positive, got {}", to_f64(z))));
    }
    let ab = spec.alpha - spec.beta;
    let ag = spec.alpha - spec.gamma;
    let x = spec.lambda3 * z.powf(ab);
    d_shell_sum(ctrl, |d| {
        let a0 = from_usize::<T>(d + 1);
        let mut sum = CompensatedSum::new();
        let mut mag = T::zero();
        for l in 0..=d {
            let p = d - l;
            let pre = lp_prefactor(spec, l, p, z);
            if pre == T::zero() {
                continue;
            }
            let a = from_usize::<T>(l) * spec.alpha + from_usize::<T>(p) * ag;
            let v = pre * psi(a0, a + spec.alpha, ab, x, ctrl)?;
            sum.add(v);
            mag = mag + v.abs();
        }
        Ok((sum.value(), mag))
    })
}

/// Trinomial coefficient (l+p+k)! / (l! p! k!), exact.
pub fn trinomial(l: u32, p: u32, k: u32) -> u128 {
    // C(l+p+k, l) · C(p+k, p), each built by exact running products
    fn binom(n: u32, k: u32) -> u128 {
        let k = k.min(n - k);
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * u128::from(n - i) / u128::from(i + 1);
        }
        acc
    }
    binom(l + p + k, l) * binom(p + k, p)
}

/// Triples (l, p, k) with l+p+k = q ≤ q_max and lpk ≠ 0 at which
/// C(q; l,p,k) ≠ C(q−1; l−1,p,k) + C(q−1; l,p−1,k) + C(q−1; l,p,k−1).
/// Returns the number of triples checked and the violations.
pub fn pascal_tetrahedron_violations(q_max: u32) -> (usize, Vec<(u32, u32, u32)>) {
    let mut checked = 0;
    let mut bad = Vec::new();
    for q in 3..=q_max {
        for l in 1..q {
            for p in 1..q - l {
                let k = q - l - p;
                checked += 1;
                let lhs = trinomial(l, p, k);
                let rhs = trinomial(l - 1, p, k) + trinomial(l, p - 1, k) + trinomial(l, p, k - 1);
                if lhs != rhs {
                    bad.push((l, p, k));
                }
            }
        }
    }
    (checked, bad)
}
