//! Gauss rules (Legendre, Jacobi, generalized Laguerre) and a composite
//! integrator for integrands with algebraic endpoint singularities.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, CompensatedSum, Real};
use crate::special::ln_gamma_pos;

const MAX_NEWTON: usize = 100;

/// Nodes and weights of an n-point Gauss rule.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussRule<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> GaussRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn newton_tol<T: Real>() -> T {
    T::epsilon() * lit::<T>(8.0)
}

/// Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre<T: Real>(n: usize) -> Result<GaussRule<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("Gauss rule needs at least one node".into()));
    }
    let nf = from_usize::<T>(n);
    let half = lit::<T>(0.5);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (T::PI() * (from_usize::<T>(i) + lit(0.75)) / (nf + half)).cos();
        let mut pp = T::one();
        for _ in 0..MAX_NEWTON {
            let mut p1 = T::one();
            let mut p2 = T::zero();
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = from_usize::<T>(j);
                p1 = ((lit::<T>(2.0) * jf - T::one()) * z * p2 - (jf - T::one()) * p3) / jf;
            }
            pp = nf * (z * p1 - p2) / (z * z - T::one());
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= newton_tol::<T>() {
                break;
            }
        }
        let w = lit::<T>(2.0) / ((T::one() - z * z) * pp * pp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    Ok(GaussRule { nodes, weights })
}

/// Gauss–Jacobi rule on [-1, 1] for the weight (1 - x)^a (1 + x)^b, a, b > -1.
///
/// Nodes are returned in increasing order.
pub fn gauss_jacobi<T: Real>(n: usize, a: T, b: T) -> Result<GaussRule<T>> {
    if !(a > -T::one() && b > -T::one()) {
        return Err(Error::InvalidParameter(format!(
            "Jacobi exponents must exceed -1, got ({}, {})",
            to_f64(a),
            to_f64(b)
        )));
    }
    if a == T::zero() && b == T::zero() {
        return gauss_legendre(n);
    }
    if n < 4 {
        return gauss_jacobi_small(n, a, b);
    }
    let nf = from_usize::<T>(n);
    let ab = a + b;
    let one = T::one();
    let two = lit::<T>(2.0);
    let l = lit::<T>;
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let ln_norm = ln_gamma_pos(a + nf) + ln_gamma_pos(b + nf) - ln_gamma_pos(nf + one) - ln_gamma_pos(nf + ab + one);
    let mut z = T::zero();
    for i in 0..n {
        // initial guesses after Stroud & Secrest, largest root first
        if i == 0 {
            let an = a / nf;
            let bn = b / nf;
            let r1 = (one + a) * (l(2.78) / (l(4.0) + nf * nf) + l(0.768) * an / nf);
            let r2 = one + l(1.48) * an + l(0.96) * bn + l(0.452) * an * an + l(0.83) * an * bn;
            z = one - r1 / r2;
        } else if i == 1 {
            let r1 = (l(4.1) + a) / ((one + a) * (one + l(0.156) * a));
            let r2 = one + l(0.06) * (nf - l(8.0)) * (one + l(0.12) * a) / nf;
            let r3 = one + l(0.012) * b * (one + l(0.25) * a.abs()) / nf;
            z = z - (one - z) * r1 * r2 * r3;
        } else if i == 2 {
            let r1 = (l(1.67) + l(0.28) * a) / (one + l(0.37) * a);
            let r2 = one + l(0.22) * (nf - l(8.0)) / nf;
            let r3 = one + l(8.0) * b / ((l(6.28) + b) * nf * nf);
            z = z - (x[0] - z) * r1 * r2 * r3;
        } else if i == n - 2 {
            let r1 = (one + l(0.235) * b) / (l(0.766) + l(0.119) * b);
            let r2 = one / (one + l(0.639) * (nf - l(4.0)) / (one + l(0.71) * (nf - l(4.0))));
            let r3 = one / (one + l(20.0) * a / ((l(7.5) + a) * nf * nf));
            z = z + (z - x[n - 4]) * r1 * r2 * r3;
        } else if i == n - 1 {
            let r1 = (one + l(0.37) * b) / (l(1.67) + l(0.28) * b);
            let r2 = one / (one + l(0.22) * (nf - l(8.0)) / nf);
            let r3 = one / (one + l(8.0) * a / ((l(6.28) + a) * nf * nf));
            z = z + (z - x[n - 3]) * r1 * r2 * r3;
        } else {
            z = l(3.0) * x[i - 1] - l(3.0) * x[i - 2] + x[i - 3];
        }
        let jacobi_at = |z: T| -> (T, T, T, T) {
            let mut temp = two + ab;
            let mut p1 = (a - b + temp * z) / two;
            let mut p2 = one;
            for j in 2..=n {
                let p3 = p2;
                p2 = p1;
                let jf = from_usize::<T>(j);
                temp = two * jf + ab;
                let aa = two * jf * (jf + ab) * (temp - two);
                let bb = (temp - one) * (a * a - b * b + temp * (temp - two) * z);
                let cc = two * (jf - one + a) * (jf - one + b) * temp;
                p1 = (bb * p2 - cc * p3) / aa;
            }
            let pp = (nf * (a - b - temp * z) * p1 + two * (nf + a) * (nf + b) * p2) / (temp * (one - z * z));
            (p1, p2, pp, temp)
        };
        for _ in 0..MAX_NEWTON {
            let (p1, _, pp, _) = jacobi_at(z);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= newton_tol::<T>() {
                break;
            }
        }
        let (_, p2, pp, temp) = jacobi_at(z);
        x[i] = z;
        w[i] = ln_norm.exp() * temp * two.powf(ab) / (pp * p2);
    }
    x.reverse();
    w.reverse();
    Ok(GaussRule { nodes: x, weights: w })
}

/// Tiny Jacobi rules from a dense refinement of the 4-point start; n < 4.
fn gauss_jacobi_small<T: Real>(n: usize, a: T, b: T) -> Result<GaussRule<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("Gauss rule needs at least one node".into()));
    }
    // Golub–Welsch for n <= 3 via the explicit Jacobi matrix and its characteristic polynomial
    let ab = a + b;
    let two = lit::<T>(2.0);
    let one = T::one();
    let diag = |k: usize| -> T {
        let kf = from_usize::<T>(k);
        let d = (two * kf + ab) * (two * kf + ab + two);
        if d == T::zero() {
            (b - a) / (ab + two)
        } else {
            (b * b - a * a) / d
        }
    };
    let off = |k: usize| -> T {
        // k >= 1
        let kf = from_usize::<T>(k);
        let num = lit::<T>(4.0) * kf * (kf + a) * (kf + b) * (kf + ab);
        let s = two * kf + ab;
        (num / (s * s * (s + one) * (s - one))).sqrt()
    };
    let mu0 = two.powf(ab + one) * (ln_gamma_pos(a + one) + ln_gamma_pos(b + one) - ln_gamma_pos(ab + two)).exp();
    // characteristic polynomial roots by bisection on the three-term recurrence
    let eval = |x: T| -> Vec<T> {
        let mut p = vec![one, x - diag(0)];
        for k in 1..n {
            let next = (x - diag(k)) * p[k] - off(k) * off(k) * p[k - 1];
            p.push(next);
        }
        p
    };
    let mut roots = Vec::with_capacity(n);
    let grid = 4000;
    let mut prev_x = -one;
    let mut prev_v = eval(prev_x)[n];
    for i in 1..=grid {
        let xx = -one + two * from_usize::<T>(i) / from_usize::<T>(grid);
        let v = eval(xx)[n];
        if prev_v == T::zero() || prev_v * v < T::zero() {
            let (mut lo, mut hi) = (prev_x, xx);
            for _ in 0..200 {
                let mid = (lo + hi) / two;
                if eval(lo)[n] * eval(mid)[n] <= T::zero() {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            roots.push((lo + hi) / two);
        }
        prev_x = xx;
        prev_v = v;
    }
    if roots.len() != n {
        return Err(Error::InvalidParameter("failed to locate Jacobi nodes".into()));
    }
    let weights = roots
        .iter()
        .map(|&x| {
            // w = mu0 / Σ_k p̂_k(x)^2 with orthonormal p̂
            let p = eval(x);
            let mut s = one;
            let mut norm = one;
            for k in 1..n {
                norm = norm * off(k);
                let v = p[k] / norm;
                s = s + v * v;
            }
            mu0 / s
        })
        .collect();
    Ok(GaussRule { nodes: roots, weights })
}

/// Generalized Gauss–Laguerre rule on [0, ∞) for the weight x^alf e^{-x}, alf > -1.
pub fn gauss_laguerre<T: Real>(n: usize, alf: T) -> Result<GaussRule<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("Gauss rule needs at least one node".into()));
    }
    if !(alf > -T::one()) {
        return Err(Error::InvalidParameter(format!("Laguerre exponent must exceed -1, got {}", to_f64(alf))));
    }
    let l = lit::<T>;
    let one = T::one();
    let nf = from_usize::<T>(n);
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let ln_norm = ln_gamma_pos(alf + nf) - ln_gamma_pos(nf);
    let mut z = T::zero();
    for i in 0..n {
        if i == 0 {
            z = (one + alf) * (l(3.0) + l(0.92) * alf) / (one + l(2.4) * nf + l(1.8) * alf);
        } else if i == 1 {
            z = z + (l(15.0) + l(6.25) * alf) / (one + l(0.9) * alf + l(2.5) * nf);
        } else {
            let ai = from_usize::<T>(i - 1);
            z = z
                + ((one + l(2.55) * ai) / (l(1.9) * ai) + l(1.26) * ai * alf / (one + l(3.5) * ai)) * (z - x[i - 2])
                    / (one + l(0.3) * alf);
        }
        let mut pp = one;
        let mut p2 = T::zero();
        for _ in 0..MAX_NEWTON {
            let mut p1 = one;
            p2 = T::zero();
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = from_usize::<T>(j);
                p1 = ((l(2.0) * jf - one + alf - z) * p2 - (jf - one + alf) * p3) / jf;
            }
            pp = (nf * p1 - (nf + alf) * p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= newton_tol::<T>() * z.abs().max(one) {
                break;
            }
        }
        x[i] = z;
        w[i] = -ln_norm.exp() / (pp * nf * p2);
    }
    Ok(GaussRule { nodes: x, weights: w })
}

/// Composite rule for `∫_a^b (s-a)^{ea} (b-s)^{eb} f(s) ds`.
///
/// Each half of [a, b] is cut into panels that shrink geometrically toward
/// its endpoint; the panel touching an endpoint carries that endpoint's power
/// as a Gauss–Jacobi weight, the others use Gauss–Legendre with the powers
/// evaluated explicitly. `f` may itself contain fractional powers of the
/// distance to either endpoint, so it receives `(s, s - a, b - s)` with both
/// distances computed without cancellation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradedRule<T> {
    /// width ratio between neighbouring panels
    pub ratio: T,
    pub nodes_per_panel: usize,
    /// relative size of the innermost panel
    pub depth: T,
    pub max_levels: usize,
}

impl<T: Real> Default for GradedRule<T> {
    fn default() -> Self {
        Self { ratio: lit(0.25), nodes_per_panel: 16, depth: lit(1e-15), max_levels: 120 }
    }
}

impl<T: Real> GradedRule<T> {
    fn levels(&self, exponent: T) -> usize {
        // innermost width w must satisfy w^{1+e} <= depth
        let e1 = (exponent + T::one()).max(lit(0.05));
        let n = self.depth.ln() / (e1 * self.ratio.ln());
        let n = to_f64(n.ceil()).max(4.0) as usize;
        n.min(self.max_levels)
    }

    /// Panel edges of one half, as distances from its endpoint.
    fn half_edges(&self, half: T, exponent: T, breaks: impl Iterator<Item = T>) -> Vec<T> {
        let mut edges = vec![T::zero(), half];
        let mut t = half;
        for _ in 0..self.levels(exponent) {
            t = t * self.ratio;
            edges.push(t);
        }
        edges.extend(breaks.filter(|&d| d > T::zero() && d < half));
        edges.sort_by(|x, y| x.partial_cmp(y).expect("finite panel edges"));
        edges.dedup();
        edges
    }

    /// Composite quadrature; `breakpoints` strictly inside (a, b) become panel edges.
    pub fn integrate<F>(&self, f: F, a: T, b: T, ea: T, eb: T, breakpoints: &[T]) -> Result<T>
    where
        F: Fn(T, T, T) -> T,
    {
        if !(b > a) || !(b - a).is_finite() {
            return Err(Error::Domain(format!("empty interval [{}, {}]", to_f64(a), to_f64(b))));
        }
        if !(ea > -T::one() && eb > -T::one()) {
            return Err(Error::Domain("endpoint exponents must exceed -1".into()));
        }
        let n = self.nodes_per_panel.max(1);
        let len = b - a;
        let half = len * lit(0.5);
        let one = T::one();
        let left = self.half_edges(half, ea, breakpoints.iter().map(|&x| x - a));
        let right = self.half_edges(len - half, eb, breakpoints.iter().map(|&x| b - x));

        let mut acc = CompensatedSum::new();
        // left half, distance d = s - a
        let jac = gauss_jacobi(n, T::zero(), ea)?;
        let leg = gauss_legendre(n)?;
        for (i, win) in left.windows(2).enumerate() {
            let (lo, hi) = (win[0], win[1]);
            let hw = (hi - lo) * lit(0.5);
            let rule = if i == 0 { &jac } else { &leg };
            let mut panel = CompensatedSum::new();
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let d = lo + hw * (one + *x);
                let db = len - d;
                let pw = if i == 0 { one } else { d.powf(ea) };
                panel.add(*w * pw * db.powf(eb) * f(a + d, d, db));
            }
            let scale = if i == 0 { hw.powf(ea + one) } else { hw };
            acc.add(panel.value() * scale);
        }
        // right half, distance d = b - s
        let jac = gauss_jacobi(n, T::zero(), eb)?;
        for (i, win) in right.windows(2).enumerate() {
            let (lo, hi) = (win[0], win[1]);
            let hw = (hi - lo) * lit(0.5);
            let rule = if i == 0 { &jac } else { &leg };
            let mut panel = CompensatedSum::new();
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let d = lo + hw * (one + *x);
                let da = len - d;
                let pw = if i == 0 { one } else { d.powf(eb) };
                panel.add(*w * pw * da.powf(ea) * f(b - d, da, d));
            }
            let scale = if i == 0 { hw.powf(eb + one) } else { hw };
            acc.add(panel.value() * scale);
        }
        Ok(acc.value())
    }

    /// Same rule with twice the nodes per panel.
    pub fn refined(&self) -> Self {
        Self { nodes_per_panel: self.nodes_per_panel * 2, ..*self }
    }
}
