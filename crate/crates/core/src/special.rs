//! Real scalar special functions: log-gamma, reciprocal gamma, Pochhammer
//! symbols and the beta function.
//!
//! Everything the series engines need is available in signed-log form
//! ([`SignedLog`]) so that very large numerators and denominators can be
//! combined before a single exponentiation.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Real};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Taylor coefficients of ln Γ(2 + z) beyond the linear term:
/// `(-1)^k (ζ(k) - 1) / k` for k = 2, 3, ...
const LN_GAMMA_2_TAYLOR: [f64; 30] = [
    3.224_670_334_241_132e-1,
    -6.735_230_105_319_81e-2,
    2.058_080_842_778_454_6e-2,
    -7.385_551_028_673_986e-3,
    2.890_510_330_741_523_4e-3,
    -1.192_753_911_703_261e-3,
    5.096_695_247_430_424_5e-4,
    -2.231_547_584_535_793_8e-4,
    9.945_751_278_180_853e-5,
    -4.492_623_673_813_314e-5,
    2.050_721_277_567_069e-5,
    -9.439_488_275_268_397e-6,
    4.374_866_789_907_488e-6,
    -2.039_215_753_801_366e-6,
    9.551_412_130_407_42e-7,
    -4.492_469_198_764_566e-7,
    2.120_718_480_555_466_5e-7,
    -1.004_322_482_396_81e-7,
    4.769_810_169_363_98e-8,
    -2.271_109_460_894_316_4e-8,
    1.083_865_921_489_695_5e-8,
    -5.183_475_041_970_047e-9,
    2.483_674_543_802_478_5e-9,
    -1.192_140_140_586_091_2e-9,
    5.731_367_241_678_862e-10,
    -2.759_522_885_124_233_4e-10,
    1.330_476_437_424_448_9e-10,
    -6.422_964_563_838_1e-11,
    3.104_424_774_732_227_6e-11,
    -1.502_138_408_075_414_2e-11,
];

/// Stirling correction coefficients B_{2k} / (2k (2k - 1)).
const STIRLING: [f64; 7] =
    [1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0, -691.0 / 360_360.0, 1.0 / 156.0];

/// A real number stored as `sign * exp(ln_abs)`; `sign == 0` encodes an exact zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog<T> {
    pub ln_abs: T,
    pub sign: i8,
}

impl<T: Real> SignedLog<T> {
    pub fn zero() -> Self {
        Self { ln_abs: T::neg_infinity(), sign: 0 }
    }

    pub fn one() -> Self {
        Self { ln_abs: T::zero(), sign: 1 }
    }

    pub fn from_value(x: T) -> Self {
        if x == T::zero() {
            Self::zero()
        } else {
            Self { ln_abs: x.abs().ln(), sign: if x > T::zero() { 1 } else { -1 } }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return Self::zero();
        }
        Self { ln_abs: self.ln_abs + other.ln_abs, sign: self.sign * other.sign }
    }

    pub fn value(&self) -> T {
        match self.sign {
            0 => T::zero(),
            s => lit::<T>(f64::from(s)) * self.ln_abs.exp(),
        }
    }
}

/// `sin(pi x)` with exact zeros at the integers.
pub fn sin_pi<T: Real>(x: T) -> T {
    let two = lit::<T>(2.0);
    let half = lit::<T>(0.5);
    // reduce to [-1, 1]
    let mut r = x - two * (x / two).round();
    if r > half {
        r = T::one() - r;
    } else if r < -half {
        r = -T::one() - r;
    }
    if r == T::zero() {
        return T::zero();
    }
    (T::PI() * r).sin()
}

/// True when `x` is a non-positive integer (a pole of Γ).
pub fn is_gamma_pole<T: Real>(x: T) -> bool {
    x <= T::zero() && x == x.round()
}

/// ln Γ(x) for x > 0.
pub fn log_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {}", to_f64(x))));
    }
    Ok(ln_gamma_pos(x))
}

/// ln Γ(2 + z) for |z| <= 1/2.
fn ln_gamma_2_plus<T: Real>(z: T) -> T {
    let mut acc = T::zero();
    for &c in LN_GAMMA_2_TAYLOR.iter().rev() {
        acc = (acc + lit::<T>(c)) * z;
    }
    (acc + lit::<T>(1.0 - EULER_GAMMA)) * z
}

fn stirling<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    let mut q = (x - half) * x.ln() - x + lit::<T>(LN_SQRT_2PI);
    let inv = x.recip();
    let inv2 = inv * inv;
    let mut corr = T::zero();
    for &c in STIRLING.iter().rev() {
        corr = corr * inv2 + lit::<T>(c);
    }
    q = q + corr * inv;
    q
}

pub(crate) fn ln_gamma_pos<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    let one = T::one();
    let two = lit::<T>(2.0);
    if x >= lit::<T>(13.0) {
        stirling(x)
    } else if x < half {
        // Γ(x) = Γ(x + 2) / (x (x + 1))
        ln_gamma_2_plus(x) - x.ln() - x.ln_1p()
    } else if x < lit::<T>(1.5) {
        let z = x - one;
        ln_gamma_2_plus(z) - z.ln_1p()
    } else if x < lit::<T>(2.5) {
        ln_gamma_2_plus(x - two)
    } else {
        let mut u = x;
        let mut prod = one;
        while u >= lit::<T>(2.5) {
            u = u - one;
            prod = prod * u;
        }
        prod.ln() + ln_gamma_2_plus(u - two)
    }
}

/// ln|Γ(x)| and the sign of Γ(x) for any real x that is not a pole.
/// At a pole the result is `(+inf, 0)`.
pub fn ln_abs_gamma<T: Real>(x: T) -> (T, i8) {
    if x > T::zero() {
        return (ln_gamma_pos(x), 1);
    }
    if is_gamma_pole(x) {
        return (T::infinity(), 0);
    }
    // Γ(x) = π / (sin(πx) Γ(1 - x))
    let s = sin_pi(x);
    let ln = T::PI().ln() - s.abs().ln() - ln_gamma_pos(T::one() - x);
    (ln, if s > T::zero() { 1 } else { -1 })
}

/// 1/Γ(x) in signed-log form; exactly zero at the poles of Γ.
pub fn ln_reciprocal_gamma<T: Real>(x: T) -> SignedLog<T> {
    if x > T::zero() {
        return SignedLog { ln_abs: -ln_gamma_pos(x), sign: 1 };
    }
    if is_gamma_pole(x) {
        return SignedLog::zero();
    }
    let s = sin_pi(x);
    SignedLog {
        ln_abs: s.abs().ln() + ln_gamma_pos(T::one() - x) - T::PI().ln(),
        sign: if s > T::zero() { 1 } else { -1 },
    }
}

/// 1/Γ(x), a total function vanishing at the non-positive integers.
pub fn reciprocal_gamma<T: Real>(x: T) -> T {
    ln_reciprocal_gamma(x).value()
}

/// Γ(x); infinite at the poles.
pub fn gamma<T: Real>(x: T) -> T {
    let (ln, sign) = ln_abs_gamma(x);
    match sign {
        0 => T::infinity(),
        s => lit::<T>(f64::from(s)) * ln.exp(),
    }
}

/// ln(n!)
pub fn ln_factorial<T: Real>(n: usize) -> T {
    if n < 2 {
        T::zero()
    } else {
        ln_gamma_pos(from_usize::<T>(n) + T::one())
    }
}

/// Pochhammer symbol (η)_m in signed-log form.
pub fn ln_pochhammer<T: Real>(eta: T, m: usize) -> SignedLog<T> {
    if m == 0 {
        return SignedLog::one();
    }
    let mf = from_usize::<T>(m);
    if is_gamma_pole(eta) {
        // (η)_m = (-1)^m Γ(1 - η) / Γ(1 - η - m), zero once a factor hits 0
        if mf > -eta {
            return SignedLog::zero();
        }
        let ln = ln_gamma_pos(T::one() - eta) - ln_gamma_pos(T::one() - eta - mf);
        return SignedLog { ln_abs: ln, sign: if m % 2 == 0 { 1 } else { -1 } };
    }
    if m <= 64 {
        let mut acc = SignedLog::one();
        for j in 0..m {
            acc = acc.mul(SignedLog::from_value(eta + from_usize::<T>(j)));
        }
        return acc;
    }
    let (ln_num, s_num) = ln_abs_gamma(eta + mf);
    let (ln_den, s_den) = ln_abs_gamma(eta);
    SignedLog { ln_abs: ln_num - ln_den, sign: s_num * s_den }
}

/// Pochhammer symbol (η)_m = η(η+1)...(η+m-1), with (η)_0 = 1.
///
/// Direct product for m <= 64, log-gamma differences beyond.
pub fn pochhammer<T: Real>(eta: T, m: usize) -> Result<T> {
    if m <= 64 && !is_gamma_pole(eta) {
        let mut acc = T::one();
        for j in 0..m {
            acc = acc * (eta + from_usize::<T>(j));
        }
        if !acc.is_finite() {
            return Err(Error::Overflow(format!("({})_{} exceeds the representable range", to_f64(eta), m)));
        }
        return Ok(acc);
    }
    let sl = ln_pochhammer(eta, m);
    if sl.sign != 0 && sl.ln_abs > T::max_value().ln() {
        return Err(Error::Overflow(format!("({})_{} exceeds the representable range", to_f64(eta), m)));
    }
    Ok(sl.value())
}

/// B(c, d) = Γ(c)Γ(d)/Γ(c+d) for c, d > 0.
pub fn beta<T: Real>(c: T, d: T) -> Result<T> {
    if !(c > T::zero() && d > T::zero()) {
        return Err(Error::Domain(format!("beta requires c, d > 0, got ({}, {})", to_f64(c), to_f64(d))));
    }
    Ok((ln_gamma_pos(c) + ln_gamma_pos(d) - ln_gamma_pos(c + d)).exp())
}
