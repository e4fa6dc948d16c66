//! Trapezoidal quadrature of Bromwich-type integrals on a deformed
//! (cotangent) contour, shared by the Hankel-contour evaluator and the
//! numerical Laplace inversion.

use num_complex::Complex;

use crate::scalar::{from_usize, lit, CompensatedComplexSum, Real};

/// `s(θ) = σ + μ (0.5017 θ cot(0.6407 θ) − 0.6122 + 0.2645 i θ)`, θ ∈ (−π, π).
#[derive(Clone, Copy, Debug)]
pub(crate) struct CotContour<T> {
    pub sigma: T,
    pub mu: T,
}

const C1: f64 = 0.5017;
const C2: f64 = 0.6407;
const C3: f64 = 0.6122;
const C4: f64 = 0.2645;

impl<T: Real> CotContour<T> {
    fn point(&self, theta: T) -> (Complex<T>, Complex<T>) {
        let a = lit::<T>(C2) * theta;
        let (sn, cs) = a.sin_cos();
        let cot = cs / sn;
        let re = lit::<T>(C1) * theta * cot - lit::<T>(C3);
        let s = Complex::new(self.sigma + self.mu * re, self.mu * lit::<T>(C4) * theta);
        let dre = lit::<T>(C1) * cot - lit::<T>(C1 * C2) * theta / (sn * sn);
        let ds = Complex::new(self.mu * dre, self.mu * lit::<T>(C4));
        (s, ds)
    }

    /// Rightmost point of the contour on the real axis.
    pub fn crossing(&self) -> T {
        self.sigma + self.mu * lit::<T>(C1 / C2 - C3)
    }

    /// `(1/2πi) ∫ e^{s t} F(s) ds` by the midpoint rule with `n` nodes.
    ///
    /// Returns `None` as soon as `F` does.
    pub fn integrate<F>(&self, f: F, t: T, n: usize) -> Option<Complex<T>>
    where
        F: Fn(Complex<T>) -> Option<Complex<T>>,
    {
        let h = T::TAU() / from_usize::<T>(n);
        let mut acc = CompensatedComplexSum::new();
        for k in 0..n {
            let theta = -T::PI() + (from_usize::<T>(k) + lit(0.5)) * h;
            let (s, ds) = self.point(theta);
            let fs = f(s)?;
            acc.add((s * t).exp() * fs * ds);
        }
        // h / (2πi) = 1 / (i n)
        let sum = acc.value();
        Some(Complex::new(sum.im, -sum.re) / from_usize::<T>(n))
    }
}
