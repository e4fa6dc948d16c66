//! Fixed-order brute-force sums in linear arithmetic.
//!
//! These deliberately avoid the shell engine, log-space assembly and any
//! adaptive stopping: every index up to `q_max` is visited and summed.

use num_complex::Complex;

use crate::ml::MLParams;
use crate::scalar::{from_usize, Real};
use crate::special::reciprocal_gamma;

/// Σ_{l+p+k ≤ q_max} (η)_{l+p+k} u^l v^p w^k / (Γ(lα+pβ+kγ+δ) l! p! k!).
pub fn brute_trivariate<T: Real>(
    p: &MLParams<T>,
    u: Complex<T>,
    v: Complex<T>,
    w: Complex<T>,
    q_max: usize,
) -> Complex<T> {
    let mut total = Complex::new(T::zero(), T::zero());
    // (η)_q / q!
    let mut coef = T::one();
    for q in 0..=q_max {
        if q > 0 {
            coef = coef * (p.eta + from_usize::<T>(q - 1)) / from_usize::<T>(q);
        }
        if coef == T::zero() {
            break;
        }
        // q! / (l! (q-l)!) times (q-l)! / (p! k!)
        let mut binom_l = T::one();
        for l in 0..=q {
            if l > 0 {
                binom_l = binom_l * from_usize::<T>(q - l + 1) / from_usize::<T>(l);
            }
            let mut binom_p = T::one();
            for pp in 0..=(q - l) {
                if pp > 0 {
                    binom_p = binom_p * from_usize::<T>(q - l - pp + 1) / from_usize::<T>(pp);
                }
                let k = q - l - pp;
                let x = from_usize::<T>(l) * p.alpha
                    + from_usize::<T>(pp) * p.beta
                    + from_usize::<T>(k) * p.gamma
                    + p.delta;
                let rg = reciprocal_gamma(x);
                if rg == T::zero() {
                    continue;
                }
                let mono = u.powu(l as u32) * v.powu(pp as u32) * w.powu(k as u32);
                total = total + mono * (coef * binom_l * binom_p * rg);
            }
        }
    }
    total
}

/// Σ_{l+p ≤ q_max} (η)_{l+p} u^l v^p / (Γ(lα + pβ + γ) l! p!).
pub fn brute_bivariate<T: Real>(
    alpha: T,
    beta: T,
    gamma: T,
    eta: T,
    u: Complex<T>,
    v: Complex<T>,
    q_max: usize,
) -> Complex<T> {
    let mut total = Complex::new(T::zero(), T::zero());
    let mut coef = T::one();
    for q in 0..=q_max {
        if q > 0 {
            coef = coef * (eta + from_usize::<T>(q - 1)) / from_usize::<T>(q);
        }
        if coef == T::zero() {
            break;
        }
        let mut binom = T::one();
        for l in 0..=q {
            if l > 0 {
                binom = binom * from_usize::<T>(q - l + 1) / from_usize::<T>(l);
            }
            let pp = q - l;
            let rg = reciprocal_gamma(from_usize::<T>(l) * alpha + from_usize::<T>(pp) * beta + gamma);
            if rg == T::zero() {
                continue;
            }
            total = total + u.powu(l as u32) * v.powu(pp as u32) * (coef * binom * rg);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_identity() {
        let p = MLParams::new(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let one = Complex::new(1.0, 0.0);
        let got = brute_trivariate(&p, one, one, one, 60);
        assert!((got.re - 3f64.exp()).abs() < 1e-12);
        let got = brute_bivariate(1.0, 1.0, 1.0, 1.0, one, -one, 60);
        assert!((got.re - 1.0).abs() < 1e-14);
    }
}
