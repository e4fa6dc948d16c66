//! Trivariate Mittag-Leffler function
//!
//! ```text
//! E^η_{α,β,γ,δ}(u, v, w) = Σ_{l,p,k ≥ 0} (η)_{l+p+k} u^l v^p w^k / (Γ(lα + pβ + kγ + δ) l! p! k!)
//! ```
//!
//! together with its Laplace transform, convolution rule, fractional
//! derivatives and integrals, and the closed-form solution of the
//! three-order Caputo problem `D^α y − λ₃D^β y − λ₂D^γ y − λ₁y = g`.
//!
//! Everything is generic over `f32`/`f64` through [`scalar::Real`]; the
//! `*F64` aliases below name the usual double-precision instances.

pub mod calculus;
pub mod contour;
pub mod error;
pub mod fde;
pub mod laplace;
pub mod ml;
pub mod oracle;
pub mod quadrature;
pub mod scalar;
pub mod special;
mod talbot;
pub mod verify;

pub use calculus::{
    caputo_derivative_univariate, caputo_l1_numeric, caputo_power, nth_derivative_univariate, rl_derivative_univariate,
    rl_grunwald_numeric, rl_integral_numeric, rl_integral_univariate, FracOrder, GridFunction,
};
pub use contour::{eval_hankel_contour, ContourSpec};
pub use error::{Error, Result};
pub use fde::{
    homogeneous_via_fox_wright, numeric_oracle_solve, particular_kernel_fox_wright, particular_solution,
    residual_check, solve, solve_homogeneous, Backend, Forcing, IvpSpec, SolutionTrace, TracePoint,
};
pub use laplace::{
    convolution_closed_form, convolution_numeric, invert_univariate, laplace_closed_form, talbot_invert, TalbotSpec,
};
pub use ml::{
    eval_bivariate, eval_fox_wright_1psi1, eval_prabhakar, eval_trivariate, eval_two_param, eval_univariate,
    EvalResult, LambdaTriple, MLParams, SeriesControl, UnivariateSeries,
};
pub use quadrature::GradedRule;
pub use scalar::Real;

pub type MLParamsF64 = MLParams<f64>;
pub type MLParamsF32 = MLParams<f32>;
pub type SeriesControlF64 = SeriesControl<f64>;
pub type SeriesControlF32 = SeriesControl<f32>;
pub type EvalResultF64 = EvalResult<f64>;
pub type EvalResultF32 = EvalResult<f32>;
pub type LambdaTripleF64 = LambdaTriple<f64>;
pub type LambdaTripleF32 = LambdaTriple<f32>;
pub type IvpSpecF64 = IvpSpec<f64>;
pub type IvpSpecF32 = IvpSpec<f32>;
pub type SolutionTraceF64 = SolutionTrace<f64>;
pub type SolutionTraceF32 = SolutionTrace<f32>;
pub type ComplexF64 = num_complex::Complex<f64>;
pub type ComplexF32 = num_complex::Complex<f32>;
