//! Cross-module consistency checks, each reduced to one error figure and a tolerance.
//!
//! Random draws use fixed ChaCha8 seeds so every run sees the same inputs.
//! Parameters are drawn from a well-conditioned box (orders in [0.7, 1.5],
//! δ and η in [0.5, 2], |arguments| ≤ 2, or ≤ 1 for the symmetry check whose
//! reference suffers cancellation); relative errors are measured against
//! max(|reference|, 1).
//!
//! Solver checks use [`moderate_spec`]: the three-order example with
//! λ = (0.5, 3, 5) grows like e^{5238 r} and leaves f64 range near r = 0.135.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{caputo_derivative_univariate, caputo_l1_numeric, FracOrder, GridFunction};
use crate::contour::{eval_hankel_contour, ContourSpec};
use crate::error::{Error, Result};
use crate::fde::{
    homogeneous_via_fox_wright, numeric_oracle_solve, particular_kernel_fox_wright, particular_solution,
    pascal_tetrahedron_violations, residual_check, solve, solve_homogeneous, uniform_grid, Forcing, IvpSpec,
    DEFAULT_QUAD_NODES,
};
use crate::laplace::{convolution_closed_form, convolution_numeric, invert_univariate};
use crate::ml::{
    eval_prabhakar, eval_trivariate, eval_two_param, eval_univariate, LambdaTriple, MLParams, SeriesControl,
};
use crate::oracle::brute_bivariate;
use crate::quadrature::GradedRule;

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub max_err: f64,
    pub tol: f64,
    pub passed: bool,
    /// error message when the check could not be evaluated
    pub detail: Option<String>,
}

type CheckFn = fn() -> Result<f64>;

const CHECKS: &[(&str, f64, CheckFn)] = &[
    ("exp-reduction", 1e-10, exp_reduction),
    ("reductions", 1e-11, reductions),
    ("symmetry", 1e-12, symmetry),
    ("two-param", 1e-12, two_param),
    ("contour-vs-series", 1e-8, contour_vs_series),
    ("laplace-duality", 1e-6, laplace_duality),
    ("convolution", 1e-6, convolution),
    ("caputo-shift", 0.3, caputo_shift),
    ("pascal", 0.0, pascal),
    ("fox-wright-homogeneous", 1e-8, fox_wright_homogeneous),
    ("fox-wright-kernel", 1e-10, fox_wright_kernel),
    ("particular-solution", 1e-8, particular),
    ("homogeneous-residual", 0.3, homogeneous_residual),
    ("oracle-refinement", 0.0, oracle_refinement),
];

/// Names of all checks, in run order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.0).collect()
}

/// Default tolerance of a check.
pub fn default_tolerance(name: &str) -> Option<f64> {
    CHECKS.iter().find(|c| c.0 == name).map(|c| c.1)
}

/// Runs one check; `tol` replaces its default tolerance.
pub fn run_check(name: &str, tol: Option<f64>) -> Result<CheckOutcome> {
    let &(name, default_tol, f) = CHECKS.iter().find(|c| c.0 == name).ok_or_else(|| {
        Error::InvalidParameter(format!("unknown check '{name}'; known: {}", check_names().join(", ")))
    })?;
    let tol = tol.unwrap_or(default_tol);
    Ok(match f() {
        Ok(e) => CheckOutcome { name, max_err: e, tol, passed: e <= tol, detail: None },
        Err(err) => CheckOutcome { name, max_err: f64::INFINITY, tol, passed: false, detail: Some(err.to_string()) },
    })
}

/// Runs every check in order.
pub fn run_all(tol: Option<f64>) -> Vec<CheckOutcome> {
    CHECKS.iter().map(|c| run_check(c.0, tol).expect("registered check")).collect()
}

/// Seeded generator for the random parameter box.
pub struct Draws {
    rng: ChaCha8Rng,
}

impl Draws {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn params(&mut self) -> MLParams<f64> {
        let mut o = || self.rng.gen_range(0.7..1.5);
        let (a, b, g) = (o(), o(), o());
        MLParams::new(a, b, g, self.uniform(0.5, 2.0), self.uniform(0.5, 2.0)).expect("box lies inside the domain")
    }

    /// Complex number with modulus at most `radius`.
    pub fn arg(&mut self, radius: f64) -> Complex<f64> {
        Complex::from_polar(self.uniform(0.0, radius), self.uniform(-std::f64::consts::PI, std::f64::consts::PI))
    }

    pub fn lambdas(&mut self, bound: f64) -> LambdaTriple<f64> {
        LambdaTriple::new(self.uniform(-bound, bound), self.uniform(-bound, bound), self.uniform(-bound, bound))
    }
}

fn rel(a: Complex<f64>, b: Complex<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn rel_re(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn c(x: f64) -> Complex<f64> {
    Complex::new(x, 0.0)
}

/// Parameters of a three-order problem whose solution stays moderate on [0, 1].
pub fn moderate_spec() -> IvpSpec<f64> {
    IvpSpec::new((0.8, 0.6, 0.4), (0.5, 0.3, 0.5), 2.0).expect("valid orders")
}

fn exp_reduction() -> Result<f64> {
    let ctrl = SeriesControl::default();
    let ones = MLParams::new(1.0, 1.0, 1.0, 1.0, 1.0)?;
    let mut worst: f64 = 0.0;
    for u in -2..=2 {
        for v in -2..=2 {
            for w in -2..=2 {
                let (u, v, w) = (f64::from(u), f64::from(v), f64::from(w));
                let got = eval_trivariate(&ones, c(u), c(v), c(w), &ctrl)?.require_converged()?.value;
                let want = (u + v + w).exp();
                worst = worst.max((got - want).norm() / want);
            }
        }
    }
    Ok(worst)
}

fn reductions() -> Result<f64> {
    let ctrl = SeriesControl::default();
    let mut d = Draws::new(11);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let p = d.params();
        let (u, v) = (d.arg(2.0), d.arg(2.0));
        let zero = c(0.0);
        let tri = eval_trivariate(&p, u, v, zero, &ctrl)?.require_converged()?.value;
        let brute = brute_bivariate(p.alpha, p.beta, p.delta, p.eta, u, v, 90);
        worst = worst.max(rel(tri, brute));
        let tri = eval_trivariate(&p, u, zero, zero, &ctrl)?.require_converged()?.value;
        let pr = eval_prabhakar(p.alpha, p.delta, p.eta, u, &ctrl)?.require_converged()?.value;
        worst = worst.max(rel(tri, pr));
    }
    Ok(worst)
}

fn symmetry() -> Result<f64> {
    let ctrl = SeriesControl::default();
    let mut d = Draws::new(12);
    let mut worst: f64 = 0.0;
    // |args| ≤ 1 keeps Σ|terms| within a few hundred times the value
    for _ in 0..100 {
        let p = d.params();
        let (u, v, w) = (d.arg(1.0), d.arg(1.0), d.arg(1.0));
        let a = eval_trivariate(&p, u, v, w, &ctrl)?.require_converged()?.value;
        let q = MLParams { alpha: p.gamma, beta: p.alpha, gamma: p.beta, ..p };
        let b = eval_trivariate(&q, w, u, v, &ctrl)?.require_converged()?.value;
        worst = worst.max(rel(b, a));
    }
    Ok(worst)
}

// 1 + s E_{α,α+1}(s) = E_α(s); the error is scaled by the series' condition E_α(|s|)
fn two_param() -> Result<f64> {
    let ctrl = SeriesControl::default();
    let mut worst: f64 = 0.0;
    for &alpha in &[0.4, 0.8, 1.3] {
        for i in 0..=60 {
            let s = -3.0 + 0.1 * f64::from(i);
            let lhs = 1.0 + s * eval_prabhakar(alpha, alpha + 1.0, 1.0, c(s), &ctrl)?.require_converged()?.value.re;
            let rhs = eval_two_param(alpha, 1.0, c(s), &ctrl)?.require_converged()?.value.re;
            let cond = eval_two_param(alpha, 1.0, c(s.abs()), &ctrl)?.value.re;
            worst = worst.max((lhs - rhs).abs() / (rhs.abs().max(1.0) + 0.01 * cond));
        }
    }
    Ok(worst)
}

fn contour_vs_series() -> Result<f64> {
    let ctrl = SeriesControl::default();
    let spec = ContourSpec::default();
    let mut d = Draws::new(13);
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let p = d.params();
        let (u, v, w) = (d.arg(2.0), d.arg(2.0), d.arg(2.0));
        let a = eval_trivariate(&p, u, v, w, &ctrl)?.require_converged()?.value;
        let h = eval_hankel_contour(&p, u, v, w, &spec)?;
        if !h.converged {
            return Err(Error::QuadratureDivergence("contour node doubling did not settle".into()));
        }
        worst = worst.max(rel(h.value, a));
    }
    Ok(worst)
}

fn laplace_duality() -> Result<f64> {
    let ctrl = SeriesControl::default();
    let mut d = Draws::new(14);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = d.params();
        let lam = d.lambdas(2.0);
        for &t in &[0.25, 0.5, 1.0, 1.5] {
            let inv = invert_univariate(&p, &lam, t, 48)?;
            let ser = eval_univariate(&p, &lam, t, &ctrl)?.require_converged()?.value.re;
            worst = worst.max(rel_re(inv.value, ser));
        }
    }
    // the stiff example, inside the window where it is representable
    let ex = IvpSpec::new((0.8, 0.6, 0.4), (0.5, 3.0, 5.0), 2.0)?;
    let (p, lam) = (ex.solution_params(ex.alpha + 1.0), ex.lambdas());
    let wide = SeriesControl { max_shell: 800, ..ctrl };
    for &t in &[0.001, 0.002, 0.005, 0.01] {
        let inv = invert_univariate(&p, &lam, t, 48)?;
        let ser = eval_univariate(&p, &lam, t, &wide)?.require_converged()?.value.re;
        worst = worst.max(rel_re(inv.value, ser));
    }
    Ok(worst)
}

fn convolution() -> Result<f64> {
    let ctrl = SeriesControl::default();
    let rule = GradedRule::default();
    let mut d = Draws::new(15);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p1 = d.params();
        let p2 = p1.with_delta(d.uniform(0.5, 2.0)).with_eta(d.uniform(0.5, 2.0));
        let lam = d.lambdas(2.0);
        for &r in &[0.3, 0.6, 1.0] {
            let num = convolution_numeric(&p1, &p2, &lam, r, &rule, &ctrl)?;
            let closed = convolution_closed_form(&p1, &p2, &lam, r, &ctrl)?;
            worst = worst.max(rel_re(num, closed));
        }
    }
    Ok(worst)
}

/// Observed convergence rates of the L1 Caputo derivative of the sampled
/// univariate form at `y`, for steps 1/256, 1/512, 1/1024.
pub fn l1_caputo_rates(p: &MLParams<f64>, lam: &LambdaTriple<f64>, nu: f64, y: f64) -> Result<[f64; 2]> {
    let ctrl = SeriesControl::default();
    let exact = caputo_derivative_univariate(p, lam, &FracOrder::at_origin(nu)?, y, &ctrl)?;
    let mut errs = [0.0; 3];
    for (e, n) in errs.iter_mut().zip([256usize, 512, 1024]) {
        let h = 1.0 / n as f64;
        let m = (y / h).round() as usize;
        let mut samples = Vec::with_capacity(m + 1);
        for i in 0..=m {
            samples.push(eval_univariate(p, lam, i as f64 * h, &ctrl)?.require_converged()?.value.re);
        }
        let f = GridFunction::new((0..=m).map(|i| i as f64 * h).collect(), samples)?;
        let dnum = caputo_l1_numeric(&f, nu)?;
        *e = (dnum.values[dnum.len() - 1] - exact).abs();
    }
    Ok([(errs[0] / errs[1]).log2(), (errs[1] / errs[2]).log2()])
}

fn caputo_shift() -> Result<f64> {
    let spec = moderate_spec();
    let p = spec.solution_params(spec.alpha + 1.0);
    let mut worst: f64 = 0.0;
    for &nu in &[0.4, 0.8] {
        for rate in l1_caputo_rates(&p, &spec.lambdas(), nu, 0.75)? {
            worst = worst.max((rate - (2.0 - nu)).abs());
        }
    }
    Ok(worst)
}

fn pascal() -> Result<f64> {
    Ok(pascal_tetrahedron_violations(20).1.len() as f64)
}

fn fox_wright_homogeneous() -> Result<f64> {
    let ctrl = SeriesControl::default();
    let spec = moderate_spec();
    let mut worst: f64 = 0.0;
    for &r in &[0.25, 0.5, 0.75, 1.0] {
        let a = homogeneous_via_fox_wright(&spec, r, &ctrl)?;
        let b = solve_homogeneous(&spec, r, &ctrl)?;
        worst = worst.max((a - b).abs() / b.abs());
    }
    Ok(worst)
}

fn fox_wright_kernel() -> Result<f64> {
    let ctrl = SeriesControl::default();
    let spec = moderate_spec();
    let p = spec.solution_params(spec.alpha);
    let mut worst: f64 = 0.0;
    for i in 1..=20 {
        let z = f64::from(i) / 20.0;
        let g = particular_kernel_fox_wright(&spec, z, &ctrl)?;
        let args = [spec.lambda1 * z.powf(p.alpha), spec.lambda2 * z.powf(p.beta), spec.lambda3 * z.powf(p.gamma)];
        let e = eval_trivariate(&p, c(args[0]), c(args[1]), c(args[2]), &ctrl)?.require_converged()?.value.re;
        worst = worst.max(rel_re(g, e));
    }
    Ok(worst)
}

// λ₂ = λ₃ = 0, g ≡ 1: y = r^α E_{α,α+1}(λ₁ r^α)
fn particular() -> Result<f64> {
    let ctrl = SeriesControl::default();
    let one = Forcing::constant(1.0);
    let mut worst: f64 = 0.0;
    for &alpha in &[0.6, 0.8] {
        for &l1 in &[0.7, -0.9] {
            let spec = IvpSpec::new((alpha, alpha / 2.0, alpha / 4.0), (l1, 0.0, 0.0), 0.0)?;
            for &r in &[0.5_f64, 1.0] {
                let got = particular_solution(&spec, &one, r, DEFAULT_QUAD_NODES, &ctrl)?;
                let e = eval_prabhakar(alpha, alpha + 1.0, 1.0, c(l1 * r.powf(alpha)), &ctrl)?.require_converged()?;
                worst = worst.max(rel_re(got, r.powf(alpha) * e.value.re));
            }
        }
    }
    Ok(worst)
}

/// Residuals of the closed-form homogeneous solution at the given steps on [0, 1].
pub fn homogeneous_residuals(spec: &IvpSpec<f64>, steps: &[f64]) -> Result<Vec<f64>> {
    let ctrl = SeriesControl::default();
    steps
        .iter()
        .map(|&h| {
            let grid = uniform_grid(h, 1.0)?;
            let trace = solve(spec, &Forcing::Zero, &grid, &ctrl)?;
            residual_check(spec, &trace, None)
        })
        .collect()
}

fn homogeneous_residual() -> Result<f64> {
    let spec = moderate_spec();
    let res = homogeneous_residuals(&spec, &[1.0 / 512.0, 1.0 / 1024.0])?;
    Ok(((res[0] / res[1]).log2() - (2.0 - spec.alpha)).abs())
}

/// Max |closed form − L1 oracle| over [0, 1] at step h, on the oracle grid.
pub fn oracle_gap(spec: &IvpSpec<f64>, g: &Forcing<f64>, h: f64) -> Result<f64> {
    let ctrl = SeriesControl::default();
    let oracle = numeric_oracle_solve(spec, g, h, 1.0)?;
    let exact = solve(spec, g, &oracle.grid(), &ctrl)?;
    Ok(oracle.points.iter().zip(&exact.points).map(|(o, e)| (o.y - e.y).abs()).fold(0.0, f64::max))
}

// shortfall of the observed order below 1
fn oracle_refinement() -> Result<f64> {
    let spec = moderate_spec();
    let e1 = oracle_gap(&spec, &Forcing::Zero, 1.0 / 512.0)?;
    let e2 = oracle_gap(&spec, &Forcing::Zero, 1.0 / 1024.0)?;
    Ok((1.0 - (e1 / e2).log2()).max(0.0))
}
