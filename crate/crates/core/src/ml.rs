//! Series evaluation of the trivariate Mittag-Leffler function
//!
//! ```text
//! E^η_{α,β,γ,δ}(u, v, w) = Σ_{l,p,k ≥ 0} (η)_{l+p+k} u^l v^p w^k / (Γ(lα + pβ + kγ + δ) l! p! k!)
//! ```
//!
//! together with its univariate form `r^{δ-1} E(λ₁r^α, λ₂r^β, λ₃r^γ)` and the
//! one-index families it contains (Prabhakar, two-parameter, Fox-Wright ₁Ψ₁).
//!
//! Terms are summed shell by shell (all terms with `l + p + k = q` before
//! `q + 1`). Every term is assembled in log space and exponentiated once.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, CompensatedComplexSum, CompensatedSum, Real};
use crate::special::{ln_abs_gamma, ln_reciprocal_gamma, reciprocal_gamma};

/// The five real parameters (α, β, γ, δ, η).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MLParams<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
    pub eta: T,
}

impl<T: Real> MLParams<T> {
    pub fn new(alpha: T, beta: T, gamma: T, delta: T, eta: T) -> Result<Self> {
        let p = Self { alpha, beta, gamma, delta, eta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {}", to_f64(v))));
            }
        }
        if !self.delta.is_finite() || !self.eta.is_finite() {
            return Err(Error::InvalidParameter("delta and eta must be finite".into()));
        }
        Ok(())
    }

    pub fn with_delta(self, delta: T) -> Self {
        Self { delta, ..self }
    }

    pub fn with_eta(self, eta: T) -> Self {
        Self { eta, ..self }
    }

    pub fn orders(&self) -> [T; 3] {
        [self.alpha, self.beta, self.gamma]
    }
}

/// Truncation policy for the series evaluators.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesControl<T> {
    pub rel_tol: T,
    pub max_shell: usize,
    pub consecutive_quiet_shells: usize,
}

impl<T: Real> Default for SeriesControl<T> {
    fn default() -> Self {
        Self { rel_tol: lit(1e-12), max_shell: 400, consecutive_quiet_shells: 3 }
    }
}

impl<T: Real> SeriesControl<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero()) {
            return Err(Error::InvalidParameter(format!("rel_tol must be positive, got {}", to_f64(self.rel_tol))));
        }
        if self.max_shell < 1 {
            return Err(Error::InvalidParameter("max_shell must be at least 1".into()));
        }
        Ok(())
    }
}

/// A series value with its a-posteriori error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult<T> {
    pub value: Complex<T>,
    pub abs_error_estimate: T,
    pub shells_used: usize,
    pub converged: bool,
}

impl<T: Real> EvalResult<T> {
    pub fn exact(value: Complex<T>) -> Self {
        Self { value, abs_error_estimate: T::zero(), shells_used: 1, converged: true }
    }

    /// Turns a non-converged result into [`Error::NotConverged`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged { shells: self.shells_used, last_shell: to_f64(self.abs_error_estimate) })
        }
    }
}

/// Coefficients (λ₁, λ₂, λ₃) of the univariate form.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LambdaTriple<T> {
    pub lambda1: T,
    pub lambda2: T,
    pub lambda3: T,
}

impl<T: Real> LambdaTriple<T> {
    pub fn new(lambda1: T, lambda2: T, lambda3: T) -> Self {
        Self { lambda1, lambda2, lambda3 }
    }

    pub fn zero() -> Self {
        Self { lambda1: T::zero(), lambda2: T::zero(), lambda3: T::zero() }
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.lambda1, self.lambda2, self.lambda3]
    }

    pub fn validate(&self) -> Result<()> {
        if self.as_array().iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("lambda coefficients must be finite".into()))
        }
    }
}

/// Stopping rule shared by every shell-ordered series.
pub(crate) struct ShellMonitor<T> {
    rel_tol: T,
    quiet_needed: usize,
    quiet: usize,
    last_nz: T,
    prev_nz: T,
    nonzero_seen: usize,
}

impl<T: Real> ShellMonitor<T> {
    pub fn new(ctrl: &SeriesControl<T>) -> Self {
        Self {
            rel_tol: ctrl.rel_tol,
            quiet_needed: ctrl.consecutive_quiet_shells.max(1),
            quiet: 0,
            last_nz: T::zero(),
            prev_nz: T::zero(),
            nonzero_seen: 0,
        }
    }

    fn ratio(&self) -> T {
        if self.nonzero_seen < 2 {
            T::zero()
        } else {
            self.last_nz / self.prev_nz
        }
    }

    pub fn estimate(&self) -> T {
        let ratio = self.ratio();
        if ratio < T::one() {
            self.last_nz / (T::one() - ratio)
        } else {
            self.last_nz
        }
    }

    /// Records one shell; returns true once the series counts as converged.
    pub fn observe(&mut self, shell_mag: T, partial_abs: T) -> bool {
        let scale = partial_abs.max(T::one());
        if shell_mag > T::zero() {
            self.prev_nz = self.last_nz;
            self.last_nz = shell_mag;
            self.nonzero_seen += 1;
        }
        if shell_mag <= self.rel_tol * scale {
            self.quiet += 1;
        } else {
            self.quiet = 0;
        }
        self.quiet >= self.quiet_needed && self.ratio() < T::one() && self.estimate() <= self.rel_tol * scale
    }
}

#[derive(Clone, Copy)]
struct ArgInfo<T> {
    zero: bool,
    ln_abs: T,
    // phase for genuinely complex arguments; real negative ones use `negative`
    phase: T,
    negative: bool,
}

impl<T: Real> ArgInfo<T> {
    fn new(z: Complex<T>) -> Self {
        if z.im == T::zero() {
            Self { zero: z.re == T::zero(), ln_abs: z.re.abs().ln(), phase: T::zero(), negative: z.re < T::zero() }
        } else {
            Self { zero: false, ln_abs: z.norm().ln(), phase: z.arg(), negative: false }
        }
    }

    /// `m · z^n / |z|^n`, exact in sign for real z.
    fn power_term(&self, n: usize, m: T) -> Complex<T> {
        if self.phase == T::zero() {
            let m = if self.negative && n % 2 == 1 { -m } else { m };
            Complex::new(m, T::zero())
        } else {
            let ph = from_usize::<T>(n) * self.phase;
            Complex::new(m * ph.cos(), m * ph.sin())
        }
    }
}

/// Running table of ln(n!) built with compensated summation.
pub(crate) struct LnFactorials<T> {
    table: Vec<T>,
    acc: CompensatedSum<T>,
}

impl<T: Real> LnFactorials<T> {
    pub fn new() -> Self {
        Self { table: vec![T::zero()], acc: CompensatedSum::new() }
    }

    pub fn get(&mut self, n: usize) -> T {
        while self.table.len() <= n {
            let k = self.table.len();
            self.acc.add(from_usize::<T>(k).ln());
            self.table.push(self.acc.value());
        }
        self.table[n]
    }
}

fn check_ln_range<T: Real>(ln_mag: T, what: &str) -> Result<()> {
    if ln_mag > T::max_value().ln() || ln_mag.is_nan() {
        return Err(Error::Overflow(format!("{what}: term magnitude exp({}) is not representable", to_f64(ln_mag))));
    }
    Ok(())
}

/// Core shell-ordered summation of `exp(ln_scale) · E(args)`.
fn trivariate_core<T: Real>(
    p: &MLParams<T>,
    args: [Complex<T>; 3],
    ln_scale: T,
    ctrl: &SeriesControl<T>,
) -> Result<EvalResult<T>> {
    p.validate()?;
    ctrl.validate()?;
    let info = args.map(ArgInfo::new);
    let orders = p.orders();
    let mut lf = LnFactorials::new();

    let mut total = CompensatedComplexSum::new();
    let mut monitor = ShellMonitor::new(ctrl);
    let mut ln_poch = CompensatedSum::new();
    let mut poch_sign: i8 = 1;

    // shell 0
    let g0 = ln_reciprocal_gamma(p.delta);
    let first = if g0.is_zero() {
        Complex::new(T::zero(), T::zero())
    } else {
        check_ln_range(g0.ln_abs + ln_scale, "trivariate series")?;
        Complex::new(lit::<T>(f64::from(g0.sign)) * (g0.ln_abs + ln_scale).exp(), T::zero())
    };
    total.add(first);
    if info.iter().all(|a| a.zero) {
        return Ok(EvalResult::exact(first));
    }
    monitor.observe(first.norm(), first.norm());

    let mut shells_used = 1;
    for q in 1..=ctrl.max_shell {
        let factor = p.eta + from_usize::<T>(q - 1);
        if factor == T::zero() {
            // (η)_q vanishes from here on
            return Ok(EvalResult {
                value: total.value(),
                abs_error_estimate: T::zero(),
                shells_used,
                converged: true,
            });
        }
        ln_poch.add(factor.abs().ln());
        if factor < T::zero() {
            poch_sign = -poch_sign;
        }
        let lp = ln_poch.value() + ln_scale;

        let mut shell = CompensatedComplexSum::new();
        let mut shell_mag = T::zero();
        let l_max = if info[0].zero { 0 } else { q };
        for l in 0..=l_max {
            let rest = q - l;
            let p_lo = if info[2].zero { rest } else { 0 };
            let p_hi = if info[1].zero { 0 } else { rest };
            if p_lo > p_hi {
                continue;
            }
            let lf_l = lf.get(l);
            let lu = if l == 0 { T::zero() } else { from_usize::<T>(l) * info[0].ln_abs };
            for pp in p_lo..=p_hi {
                let k = rest - pp;
                let (lf_p, lf_k) = (lf.get(pp), lf.get(k));
                let (lf_fp, lf_fk, fl) = (from_usize::<T>(pp), from_usize::<T>(k), from_usize::<T>(l));
                let x = fl * orders[0] + lf_fp * orders[1] + lf_fk * orders[2] + p.delta;
                let rg = ln_reciprocal_gamma(x);
                if rg.is_zero() {
                    continue;
                }
                let lv = if pp == 0 { T::zero() } else { lf_fp * info[1].ln_abs };
                let lw = if k == 0 { T::zero() } else { lf_fk * info[2].ln_abs };
                let ln_mag = lp + lu + lv + lw - lf_l - lf_p - lf_k + rg.ln_abs;
                check_ln_range(ln_mag, "trivariate series")?;
                let mut sign = poch_sign * rg.sign;
                if info[0].negative && l % 2 == 1 {
                    sign = -sign;
                }
                if info[1].negative && pp % 2 == 1 {
                    sign = -sign;
                }
                if info[2].negative && k % 2 == 1 {
                    sign = -sign;
                }
                let mag = ln_mag.exp();
                let phase = fl * info[0].phase + lf_fp * info[1].phase + lf_fk * info[2].phase;
                let s = lit::<T>(f64::from(sign));
                let term = if phase == T::zero() {
                    Complex::new(s * mag, T::zero())
                } else {
                    Complex::new(s * mag * phase.cos(), s * mag * phase.sin())
                };
                shell.add(term);
                shell_mag = shell_mag + mag;
            }
        }
        if !shell_mag.is_finite() {
            return Err(Error::Overflow(format!("shell {q} magnitude is not representable")));
        }
        total.add(shell.value());
        shells_used = q + 1;
        let value = total.value();
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::Overflow(format!("partial sum overflowed at shell {q}")));
        }
        if monitor.observe(shell_mag, value.norm()) {
            return Ok(EvalResult { value, abs_error_estimate: monitor.estimate(), shells_used, converged: true });
        }
    }
    Ok(EvalResult { value: total.value(), abs_error_estimate: monitor.estimate(), shells_used, converged: false })
}

/// E^η_{α,β,γ,δ}(u, v, w) by shell-ordered summation.
///
/// Reaching `ctrl.max_shell` is reported through `converged == false`, not
/// as an error.
pub fn eval_trivariate<T: Real>(
    params: &MLParams<T>,
    u: Complex<T>,
    v: Complex<T>,
    w: Complex<T>,
    ctrl: &SeriesControl<T>,
) -> Result<EvalResult<T>> {
    trivariate_core(params, [u, v, w], T::zero(), ctrl)
}

/// Bivariate E^η_{α,β,γ}(u, v) = Σ (η)_{l+p} u^l v^p / (Γ(lα + pβ + γ) l! p!).
pub fn eval_bivariate<T: Real>(
    alpha: T,
    beta: T,
    gamma: T,
    eta: T,
    u: Complex<T>,
    v: Complex<T>,
    ctrl: &SeriesControl<T>,
) -> Result<EvalResult<T>> {
    let p = MLParams::new(alpha, beta, T::one(), gamma, eta)?;
    trivariate_core(&p, [u, v, Complex::new(T::zero(), T::zero())], T::zero(), ctrl)
}

fn check_r<T: Real>(params: &MLParams<T>, r: T) -> Result<Option<EvalResult<T>>> {
    if !(r >= T::zero()) || !r.is_finite() {
        return Err(Error::Domain(format!("r must be finite and non-negative, got {}", to_f64(r))));
    }
    if r > T::zero() {
        return Ok(None);
    }
    if params.delta > T::one() {
        Ok(Some(EvalResult::exact(Complex::new(T::zero(), T::zero()))))
    } else if params.delta == T::one() {
        Ok(Some(EvalResult::exact(Complex::new(T::one(), T::zero()))))
    } else {
        Err(Error::Domain(format!("r = 0 requires delta >= 1, got {}", to_f64(params.delta))))
    }
}

/// r^{δ-1} E^η_{α,β,γ,δ}(λ₁r^α, λ₂r^β, λ₃r^γ).
pub fn eval_univariate<T: Real>(
    params: &MLParams<T>,
    lam: &LambdaTriple<T>,
    r: T,
    ctrl: &SeriesControl<T>,
) -> Result<EvalResult<T>> {
    lam.validate()?;
    if let Some(res) = check_r(params, r)? {
        return Ok(res);
    }
    let args =
        [lam.lambda1 * r.powf(params.alpha), lam.lambda2 * r.powf(params.beta), lam.lambda3 * r.powf(params.gamma)]
            .map(|x| Complex::new(x, T::zero()));
    trivariate_core(params, args, (params.delta - T::one()) * r.ln(), ctrl)
}

/// Three-parameter (Prabhakar) function E^η_{α,δ}(s) = Σ (η)_l s^l / (Γ(lα + δ) l!).
pub fn eval_prabhakar<T: Real>(
    alpha: T,
    delta: T,
    eta: T,
    s: Complex<T>,
    ctrl: &SeriesControl<T>,
) -> Result<EvalResult<T>> {
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", to_f64(alpha))));
    }
    if !delta.is_finite() || !eta.is_finite() {
        return Err(Error::InvalidParameter("delta and eta must be finite".into()));
    }
    ctrl.validate()?;
    let mut total = CompensatedComplexSum::new();
    let first = Complex::new(reciprocal_gamma(delta), T::zero());
    total.add(first);
    if s.re == T::zero() && s.im == T::zero() {
        return Ok(EvalResult::exact(first));
    }
    let mut monitor = ShellMonitor::new(ctrl);
    monitor.observe(first.norm(), first.norm());
    let sa = ArgInfo::new(s);
    let mut ln_coef = CompensatedSum::new();
    let mut sign: i8 = 1;
    for l in 1..=ctrl.max_shell {
        let lf = from_usize::<T>(l);
        let factor = eta + lf - T::one();
        if factor == T::zero() {
            return Ok(EvalResult {
                value: total.value(),
                abs_error_estimate: T::zero(),
                shells_used: l,
                converged: true,
            });
        }
        // (η)_l / l! updated one factor at a time
        ln_coef.add((factor.abs() / lf).ln());
        if factor < T::zero() {
            sign = -sign;
        }
        let rg = ln_reciprocal_gamma(lf * alpha + delta);
        let term = if rg.is_zero() {
            Complex::new(T::zero(), T::zero())
        } else {
            let ln_mag = ln_coef.value() + lf * sa.ln_abs + rg.ln_abs;
            check_ln_range(ln_mag, "Prabhakar series")?;
            let m = lit::<T>(f64::from(sign * rg.sign)) * ln_mag.exp();
            sa.power_term(l, m)
        };
        total.add(term);
        let value = total.value();
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::Overflow(format!("Prabhakar partial sum overflowed at term {l}")));
        }
        if monitor.observe(term.norm(), value.norm()) {
            return Ok(EvalResult {
                value,
                abs_error_estimate: monitor.estimate(),
                shells_used: l + 1,
                converged: true,
            });
        }
    }
    Ok(EvalResult {
        value: total.value(),
        abs_error_estimate: monitor.estimate(),
        shells_used: ctrl.max_shell + 1,
        converged: false,
    })
}

/// Two-parameter function E_{α,β}(s).
pub fn eval_two_param<T: Real>(alpha: T, beta: T, s: Complex<T>, ctrl: &SeriesControl<T>) -> Result<EvalResult<T>> {
    eval_prabhakar(alpha, beta, T::one(), s, ctrl)
}

/// Fox-Wright ₁Ψ₁[(a₀, a₁); (b₀, b₁) | s] = Σ Γ(a₀ + a₁l) s^l / (Γ(b₀ + b₁l) l!).
pub fn eval_fox_wright_1psi1<T: Real>(
    lam_num: (T, T),
    mu_den: (T, T),
    s: Complex<T>,
    ctrl: &SeriesControl<T>,
) -> Result<EvalResult<T>> {
    let (a0, a1) = lam_num;
    let (b0, b1) = mu_den;
    if !(b1 - a1 > -T::one()) {
        return Err(Error::InvalidParameter(format!(
            "Fox-Wright series needs b1 - a1 > -1, got {} - {}",
            to_f64(b1),
            to_f64(a1)
        )));
    }
    if a1 < T::zero() || b1 < T::zero() {
        return Err(Error::InvalidParameter("Fox-Wright index scales must be non-negative".into()));
    }
    ctrl.validate()?;
    let sa = ArgInfo::new(s);
    let term_at = |l: usize, lf: &mut LnFactorials<T>| -> Result<Complex<T>> {
        let fl = from_usize::<T>(l);
        let (lg, gs) = ln_abs_gamma(a0 + a1 * fl);
        if gs == 0 {
            return Err(Error::Domain(format!(
                "Gamma({}) in the Fox-Wright numerator is a pole",
                to_f64(a0 + a1 * fl)
            )));
        }
        let rg = ln_reciprocal_gamma(b0 + b1 * fl);
        if rg.is_zero() {
            return Ok(Complex::new(T::zero(), T::zero()));
        }
        let ls = if l == 0 { T::zero() } else { fl * sa.ln_abs };
        let ln_mag = lg + ls - lf.get(l) + rg.ln_abs;
        check_ln_range(ln_mag, "Fox-Wright series")?;
        let m = lit::<T>(f64::from(gs * rg.sign)) * ln_mag.exp();
        Ok(sa.power_term(l, m))
    };
    let mut lf = LnFactorials::new();
    let first = term_at(0, &mut lf)?;
    if s.re == T::zero() && s.im == T::zero() {
        return Ok(EvalResult::exact(first));
    }
    let mut total = CompensatedComplexSum::new();
    total.add(first);
    let mut monitor = ShellMonitor::new(ctrl);
    monitor.observe(first.norm(), first.norm());
    for l in 1..=ctrl.max_shell {
        let term = term_at(l, &mut lf)?;
        total.add(term);
        let value = total.value();
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::Overflow(format!("Fox-Wright partial sum overflowed at term {l}")));
        }
        if monitor.observe(term.norm(), value.norm()) {
            return Ok(EvalResult {
                value,
                abs_error_estimate: monitor.estimate(),
                shells_used: l + 1,
                converged: true,
            });
        }
    }
    Ok(EvalResult {
        value: total.value(),
        abs_error_estimate: monitor.estimate(),
        shells_used: ctrl.max_shell + 1,
        converged: false,
    })
}

struct CachedTerm<T> {
    ln_coef: T,
    sign: i8,
    // exponent of r, δ - 1 included
    power: T,
}

/// Precomputed coefficients of `r ↦ r^{δ-1} E(λ₁r^α, λ₂r^β, λ₃r^γ)` for
/// repeated evaluation on `0 ≤ r ≤ r_max`.
///
/// The number of shells is fixed by a full evaluation at `r_max`; term
/// magnitudes grow with r, so the same truncation serves every smaller r.
pub struct UnivariateSeries<T> {
    params: MLParams<T>,
    r_max: T,
    ctrl: SeriesControl<T>,
    shells: Vec<Vec<CachedTerm<T>>>,
}

impl<T: Real> UnivariateSeries<T> {
    pub fn new(params: &MLParams<T>, lam: &LambdaTriple<T>, r_max: T, ctrl: &SeriesControl<T>) -> Result<Self> {
        lam.validate()?;
        params.validate()?;
        if !(r_max > T::zero()) || !r_max.is_finite() {
            return Err(Error::Domain(format!("r_max must be positive, got {}", to_f64(r_max))));
        }
        let probe = eval_univariate(params, lam, r_max, ctrl)?;
        let n_shells = (probe.shells_used + ctrl.consecutive_quiet_shells).min(ctrl.max_shell + 1);
        let lams = lam.as_array();
        let orders = params.orders();
        let ln_lam = lams.map(|x| x.abs().ln());
        let mut lf = LnFactorials::new();
        let mut ln_poch = CompensatedSum::new();
        let mut poch_sign: i8 = 1;
        let mut shells = Vec::with_capacity(n_shells);
        let dm1 = params.delta - T::one();
        for q in 0..n_shells {
            if q > 0 {
                let factor = params.eta + from_usize::<T>(q - 1);
                if factor == T::zero() {
                    break;
                }
                ln_poch.add(factor.abs().ln());
                if factor < T::zero() {
                    poch_sign = -poch_sign;
                }
            }
            let mut terms = Vec::new();
            let l_max = if lams[0] == T::zero() { 0 } else { q };
            for l in 0..=l_max {
                let rest = q - l;
                let p_lo = if lams[2] == T::zero() { rest } else { 0 };
                let p_hi = if lams[1] == T::zero() { 0 } else { rest };
                if p_lo > p_hi {
                    continue;
                }
                for pp in p_lo..=p_hi {
                    let k = rest - pp;
                    let idx = [l, pp, k];
                    let fi = idx.map(from_usize::<T>);
                    let e = fi[0] * orders[0] + fi[1] * orders[1] + fi[2] * orders[2];
                    let rg = ln_reciprocal_gamma(e + params.delta);
                    if rg.is_zero() {
                        continue;
                    }
                    let mut ln_coef = ln_poch.value() + rg.ln_abs - lf.get(l) - lf.get(pp) - lf.get(k);
                    let mut sign = poch_sign * rg.sign;
                    for j in 0..3 {
                        if idx[j] > 0 {
                            ln_coef = ln_coef + fi[j] * ln_lam[j];
                            if lams[j] < T::zero() && idx[j] % 2 == 1 {
                                sign = -sign;
                            }
                        }
                    }
                    terms.push(CachedTerm { ln_coef, sign, power: e + dm1 });
                }
            }
            shells.push(terms);
        }
        Ok(Self { params: *params, r_max, ctrl: *ctrl, shells })
    }

    pub fn r_max(&self) -> T {
        self.r_max
    }

    pub fn eval(&self, r: T) -> Result<EvalResult<T>> {
        if r > self.r_max * (T::one() + lit::<T>(1e-12)) {
            return Err(Error::Domain(format!(
                "r = {} lies beyond the cached range {}",
                to_f64(r),
                to_f64(self.r_max)
            )));
        }
        if let Some(res) = check_r(&self.params, r)? {
            return Ok(res);
        }
        let ln_r = r.ln();
        let mut total = CompensatedSum::new();
        let mut monitor = ShellMonitor::new(&self.ctrl);
        for (q, shell) in self.shells.iter().enumerate() {
            let mut s = CompensatedSum::new();
            let mut mag = T::zero();
            for t in shell {
                let ln_mag = t.ln_coef + t.power * ln_r;
                check_ln_range(ln_mag, "univariate series")?;
                let m = ln_mag.exp();
                s.add(lit::<T>(f64::from(t.sign)) * m);
                mag = mag + m;
            }
            total.add(s.value());
            let value = total.value();
            if monitor.observe(mag, value.abs()) {
                return Ok(EvalResult {
                    value: Complex::new(value, T::zero()),
                    abs_error_estimate: monitor.estimate(),
                    shells_used: q + 1,
                    converged: true,
                });
            }
        }
        let n = self.shells.len();
        let value = Complex::new(total.value(), T::zero());
        // the series terminated (vanishing Pochhammer) before the cache ran out
        let terminated =
            n < self.ctrl.max_shell + 1 && self.params.eta <= T::zero() && self.params.eta == self.params.eta.round();
        Ok(EvalResult {
            value,
            abs_error_estimate: if terminated { T::zero() } else { monitor.estimate() },
            shells_used: n,
            converged: terminated,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    fn ones() -> MLParams<f64> {
        MLParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn triple_exponential() {
        let ctrl = SeriesControl::default();
        let r = eval_trivariate(&ones(), c(1.0), c(1.0), c(1.0), &ctrl).unwrap();
        assert!(r.converged);
        assert_relative_eq!(r.value.re, 3.0_f64.exp(), max_relative = 1e-13);
        assert_eq!(r.value.im, 0.0);
    }

    #[test]
    fn zero_arguments_give_reciprocal_gamma() {
        let ctrl = SeriesControl::default();
        let p = MLParams::new(0.3, 0.7, 1.9, 1.0, 2.2).unwrap();
        let r = eval_trivariate(&p, c(0.0), c(0.0), c(0.0), &ctrl).unwrap();
        assert_eq!(r.value.re, 1.0);
        let p = p.with_delta(3.5);
        let r = eval_trivariate(&p, c(0.0), c(0.0), c(0.0), &ctrl).unwrap();
        assert_relative_eq!(r.value.re, 3.009_011_112_254_700_3e-1, max_relative = 1e-14);
    }

    #[test]
    fn complex_arguments_follow_exponential() {
        let ctrl = SeriesControl::default();
        let (u, v, w) = (Complex::new(0.3, 1.1), Complex::new(-0.7, 0.2), Complex::new(0.0, -1.5));
        let r = eval_trivariate(&ones(), u, v, w, &ctrl).unwrap();
        let want = (u + v + w).exp();
        assert!((r.value - want).norm() <= 1e-13 * want.norm());
    }

    #[test]
    fn terminating_eta_gives_a_polynomial() {
        // η = -1: only shells 0 and 1 survive
        let p = MLParams::new(0.5, 1.0, 1.5, 2.0, -1.0).unwrap();
        let ctrl = SeriesControl::default();
        let r = eval_trivariate(&p, c(0.4), c(-0.3), c(2.0), &ctrl).unwrap();
        let want = 1.0 - 0.4 / gamma_f(2.5) + 0.3 / gamma_f(3.0) - 2.0 / gamma_f(3.5);
        assert!(r.converged);
        assert_relative_eq!(r.value.re, want, max_relative = 1e-14);
    }

    fn gamma_f(x: f64) -> f64 {
        1.0 / reciprocal_gamma(x)
    }

    #[test]
    fn non_positive_delta_is_evaluable() {
        // E^1_{1,1,1,0}(u,v,w) = (u+v+w) e^{u+v+w}
        let p = ones().with_delta(0.0);
        let ctrl = SeriesControl::default();
        let r = eval_trivariate(&p, c(0.5), c(0.25), c(-0.1), &ctrl).unwrap();
        let s: f64 = 0.65;
        assert_relative_eq!(r.value.re, s * s.exp(), max_relative = 1e-12);
    }

    #[test]
    fn max_shell_reports_non_convergence() {
        let ctrl = SeriesControl { max_shell: 5, ..SeriesControl::default() };
        let r = eval_trivariate(&ones(), c(2.0), c(2.0), c(2.0), &ctrl).unwrap();
        assert!(!r.converged);
        assert_eq!(r.shells_used, 6);
        assert!(matches!(r.require_converged(), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn overflow_is_an_error() {
        let ctrl = SeriesControl::default();
        let r = eval_trivariate(&ones(), c(900.0), c(0.0), c(0.0), &ctrl);
        assert!(matches!(r, Err(Error::Overflow(_))));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(MLParams::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(MLParams::new(1.0, -1.0, 1.0, 1.0, 1.0).is_err());
        assert!(MLParams::new(1.0, 1.0, 1.0, f64::NAN, 1.0).is_err());
        let bad = SeriesControl { rel_tol: 0.0, ..SeriesControl::default() };
        assert!(eval_trivariate(&ones(), c(1.0), c(1.0), c(1.0), &bad).is_err());
    }

    #[test]
    fn univariate_examples() {
        let ctrl = SeriesControl::default();
        let p = MLParams::new(0.7, 0.4, 1.3, 1.0, 1.0).unwrap();
        let r = eval_univariate(&p, &LambdaTriple::zero(), 2.5, &ctrl).unwrap();
        assert_eq!(r.value.re, 1.0);
        let r = eval_univariate(&ones(), &LambdaTriple::new(1.0, 1.0, 1.0), 1.0, &ctrl).unwrap();
        assert_relative_eq!(r.value.re, 3.0_f64.exp(), max_relative = 1e-13);
        assert!(eval_univariate(&p, &LambdaTriple::zero(), -1.0, &ctrl).is_err());
        assert_eq!(eval_univariate(&p.with_delta(1.5), &LambdaTriple::zero(), 0.0, &ctrl).unwrap().value.re, 0.0);
        assert_eq!(eval_univariate(&p, &LambdaTriple::zero(), 0.0, &ctrl).unwrap().value.re, 1.0);
        assert!(eval_univariate(&p.with_delta(0.5), &LambdaTriple::zero(), 0.0, &ctrl).is_err());
    }

    #[test]
    fn prabhakar_examples() {
        let ctrl = SeriesControl::default();
        let r = eval_prabhakar(1.0, 1.0, 1.0, c(1.0), &ctrl).unwrap();
        assert_relative_eq!(r.value.re, std::f64::consts::E, max_relative = 1e-14);
        let r = eval_prabhakar(0.6, 2.5, 1.0, c(0.0), &ctrl).unwrap();
        assert_relative_eq!(r.value.re, reciprocal_gamma(2.5), max_relative = 1e-15);
        let a = eval_prabhakar(0.8, 1.0, 1.0, c(0.7), &ctrl).unwrap();
        let p = MLParams::new(0.8, 0.5, 0.5, 1.0, 1.0).unwrap();
        let b = eval_trivariate(&p, c(0.7), c(0.0), c(0.0), &ctrl).unwrap();
        assert!((a.value - b.value).norm() <= 1e-12 * a.value.norm());
    }

    #[test]
    fn two_parameter_recurrence() {
        let ctrl = SeriesControl::default();
        for &alpha in &[0.4, 0.8, 1.3] {
            for i in 0..=12 {
                let s = -3.0 + 0.5 * f64::from(i);
                let lhs = 1.0 + s * eval_two_param(alpha, alpha + 1.0, c(s), &ctrl).unwrap().value.re;
                let rhs = eval_two_param(alpha, 1.0, c(s), &ctrl).unwrap().value.re;
                // alternating terms cancel for s < 0; scale by the sum of |terms|
                let cond = eval_two_param(alpha, 1.0, c(s.abs()), &ctrl).unwrap().value.re;
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0) + 1e-14 * cond, "alpha={alpha} s={s}");
            }
        }
    }

    #[test]
    fn fox_wright_examples() {
        let ctrl = SeriesControl::default();
        let r = eval_fox_wright_1psi1((1.0, 1.0), (1.0, 1.0), c(1.0), &ctrl).unwrap();
        assert_relative_eq!(r.value.re, std::f64::consts::E, max_relative = 1e-14);
        let r = eval_fox_wright_1psi1((1.0, 0.0), (1.0, 0.0), c(0.0), &ctrl).unwrap();
        assert_eq!(r.value.re, 1.0);
        assert!(eval_fox_wright_1psi1((1.0, 3.0), (1.0, 1.0), c(1.0), &ctrl).is_err());
        // ₁Ψ₁[(1,1);(δ,α)|s] = E_{α,δ}(s)
        let a = eval_fox_wright_1psi1((1.0, 1.0), (1.3, 0.7), c(-1.2), &ctrl).unwrap();
        let b = eval_two_param(0.7, 1.3, c(-1.2), &ctrl).unwrap();
        assert_relative_eq!(a.value.re, b.value.re, max_relative = 1e-13);
    }

    #[test]
    fn bivariate_is_trivariate_without_third_argument() {
        let ctrl = SeriesControl::default();
        let a = eval_bivariate(0.6, 1.4, 1.2, 0.8, c(0.9), c(-1.1), &ctrl).unwrap();
        let p = MLParams::new(0.6, 1.4, 2.0, 1.2, 0.8).unwrap();
        let b = eval_trivariate(&p, c(0.9), c(-1.1), c(0.0), &ctrl).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn cached_univariate_matches_direct() {
        let ctrl = SeriesControl::default();
        let p = MLParams::new(0.8, 0.4, 0.2, 1.8, 1.0).unwrap();
        let lam = LambdaTriple::new(0.5, -0.3, 0.7);
        let cache = UnivariateSeries::new(&p, &lam, 1.0, &ctrl).unwrap();
        for i in 0..=20 {
            let r = f64::from(i) / 20.0;
            let a = cache.eval(r).unwrap();
            let b = eval_univariate(&p, &lam, r, &ctrl).unwrap();
            assert!(a.converged);
            assert!((a.value.re - b.value.re).abs() <= 1e-13 * b.value.re.abs().max(1.0), "r={r}");
        }
        assert!(cache.eval(1.5).is_err());
    }

    #[test]
    fn single_precision_evaluation() {
        let ctrl = SeriesControl { rel_tol: 1e-6_f32, ..SeriesControl::default() };
        let p = MLParams::new(1.0_f32, 1.0, 1.0, 1.0, 1.0).unwrap();
        let one = Complex::new(1.0_f32, 0.0);
        let r = eval_trivariate(&p, one, one, one, &ctrl).unwrap();
        assert!((r.value.re - 3.0_f32.exp()).abs() < 1e-4);
    }

    #[test]
    fn converged_results_honour_their_error_bound() {
        let ctrl = SeriesControl::default();
        let p = MLParams::new(0.9, 1.7, 0.6, 2.3, 1.4).unwrap();
        let r = eval_trivariate(&p, c(1.5), Complex::new(0.2, -0.8), c(-1.9), &ctrl).unwrap();
        assert!(r.converged);
        assert!(r.abs_error_estimate <= ctrl.rel_tol * r.value.norm().max(1.0));
    }
}
