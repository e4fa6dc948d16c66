//! Curves r ↦ r^{δ−1}E(λr^…) for the four Mittag-Leffler families.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;
use trivml::{eval_bivariate, eval_prabhakar, eval_two_param, eval_univariate, LambdaTriple, MLParams, SeriesControl};

use crate::commands::{control, fmt as num, output_grid};
use crate::failure::Failure;
use crate::options::Options;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Trivariate,
    Bivariate,
    Prabhakar,
    TwoParam,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Trivariate, Family::Bivariate, Family::Prabhakar, Family::TwoParam];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Trivariate => "trivariate",
            Family::Bivariate => "bivariate",
            Family::Prabhakar => "prabhakar",
            Family::TwoParam => "two-param",
        })
    }
}

impl FromStr for Family {
    type Err = Failure;

    fn from_str(s: &str) -> Result<Self, Failure> {
        Family::ALL
            .into_iter()
            .find(|f| f.to_string() == s)
            .ok_or_else(|| Failure::validation(format!("unknown family '{s}'")))
    }
}

/// One curve. Parameters the family does not have are `None` and print as empty cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Curve {
    pub family: Family,
    pub alpha: f64,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: f64,
    pub eta: Option<f64>,
    pub lam: LambdaTriple<f64>,
}

impl Curve {
    fn new(family: Family, o: &Options) -> Result<Self, Failure> {
        let need =
            |v: Option<f64>, name: &str| v.ok_or_else(|| Failure::validation(format!("{family} needs --{name}")));
        let lam = LambdaTriple::new(o.lambda1.unwrap_or(1.0), o.lambda2.unwrap_or(1.0), o.lambda3.unwrap_or(1.0));
        let eta = Some(o.eta.unwrap_or(1.0));
        let (alpha, delta) = (need(o.alpha, "alpha")?, need(o.delta, "delta")?);
        let c = match family {
            Family::Trivariate => Curve {
                family,
                alpha,
                beta: Some(need(o.beta, "beta")?),
                gamma: Some(need(o.gamma, "gamma")?),
                delta,
                eta,
                lam,
            },
            Family::Bivariate => {
                Curve { family, alpha, beta: Some(need(o.beta, "beta")?), gamma: None, delta, eta, lam }
            }
            Family::Prabhakar => Curve { family, alpha, beta: None, gamma: None, delta, eta, lam },
            Family::TwoParam => Curve { family, alpha, beta: None, gamma: None, delta, eta: None, lam },
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<(), Failure> {
        let b = self.beta.unwrap_or(1.0);
        let g = self.gamma.unwrap_or(1.0);
        MLParams::new(self.alpha, b, g, self.delta, self.eta.unwrap_or(1.0))?;
        self.lam.validate()?;
        Ok(())
    }

    /// r^{δ−1} times the family's function at λ₁r^α (and λ₂r^β, λ₃r^γ where present).
    pub fn value(&self, r: f64, ctrl: &SeriesControl<f64>) -> Result<f64, Failure> {
        let c = |x: f64| Complex::new(x, 0.0);
        let eta = self.eta.unwrap_or(1.0);
        let l = &self.lam;
        if self.family == Family::Trivariate {
            let p = MLParams::new(self.alpha, self.beta.unwrap_or(1.0), self.gamma.unwrap_or(1.0), self.delta, eta)?;
            return Ok(eval_univariate(&p, l, r, ctrl)?.require_converged()?.value.re);
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Failure::validation(format!("table abscissae must be positive, got {r}")));
        }
        let u = c(l.lambda1 * r.powf(self.alpha));
        let e = match self.family {
            Family::Bivariate => {
                let b = self.beta.unwrap_or(1.0);
                eval_bivariate(self.alpha, b, self.delta, eta, u, c(l.lambda2 * r.powf(b)), ctrl)?
            }
            Family::Prabhakar => eval_prabhakar(self.alpha, self.delta, eta, u, ctrl)?,
            _ => eval_two_param(self.alpha, self.delta, u, ctrl)?,
        };
        Ok(r.powf(self.delta - 1.0) * e.require_converged()?.value.re)
    }

    fn cells(&self) -> [String; 6] {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        [self.family.to_string(), num(self.alpha), opt(self.beta), opt(self.gamma), num(self.delta), opt(self.eta)]
    }
}

/// Parameter sets behind the cross-family comparison figure.
pub fn table1() -> Vec<Curve> {
    let lam = LambdaTriple::new(1.0, 1.0, 1.0);
    let c = |family, beta, gamma, delta, eta| Curve { family, alpha: 0.25, beta, gamma, delta, eta, lam };
    vec![
        c(Family::Trivariate, Some(0.75), Some(1.5), 1.5, Some(1.0)),
        c(Family::Bivariate, Some(0.75), None, 1.5, Some(1.0)),
        c(Family::Prabhakar, None, None, 0.75, Some(1.5)),
        c(Family::TwoParam, None, None, 0.75, None),
    ]
}

fn set_field(o: &mut Options, key: &str, v: f64) -> Result<(), Failure> {
    let slot = match key {
        "alpha" => &mut o.alpha,
        "beta" => &mut o.beta,
        "gamma" => &mut o.gamma,
        "delta" => &mut o.delta,
        "eta" => &mut o.eta,
        "lambda1" => &mut o.lambda1,
        "lambda2" => &mut o.lambda2,
        "lambda3" => &mut o.lambda3,
        _ => return Err(Failure::validation(format!("cannot sweep '{key}'"))),
    };
    *slot = Some(v);
    Ok(())
}

/// Cartesian product of the sweep over the base options; the last key varies fastest.
fn expand(base: &Options, sweep: &BTreeMap<String, Vec<f64>>) -> Result<Vec<Options>, Failure> {
    let mut out = vec![base.clone()];
    for (key, values) in sweep {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Failure::validation(format!("sweep '{key}' must be a non-empty list of finite values")));
        }
        let mut next = Vec::with_capacity(out.len() * values.len());
        for o in &out {
            for &v in values {
                let mut o = o.clone();
                set_field(&mut o, key, v)?;
                next.push(o);
            }
        }
        out = next;
    }
    Ok(out)
}

pub fn curves(o: &Options) -> Result<Vec<Curve>, Failure> {
    let families: Vec<Family> = match &o.family {
        Some(names) => names.iter().map(|n| n.parse()).collect::<Result<_, _>>()?,
        None if o.preset.is_some() => Family::ALL.to_vec(),
        None => vec![Family::Trivariate],
    };
    if let Some(p) = &o.preset {
        if p != "table1" {
            return Err(Failure::validation(format!("unknown preset '{p}'")));
        }
        return Ok(table1().into_iter().filter(|c| families.contains(&c.family)).collect());
    }
    let sets = match &o.sweep {
        Some(s) => expand(o, s)?,
        None => vec![o.clone()],
    };
    let mut out = Vec::new();
    for s in &sets {
        for &f in &families {
            out.push(Curve::new(f, s)?);
        }
    }
    Ok(out)
}

/// Points r_i = t_max·i/n for i = 1..=n, or the single `--r`.
fn abscissae(o: &Options) -> Result<Vec<f64>, Failure> {
    if let Some(r) = o.r {
        return Ok(vec![r]);
    }
    let (t_max, n) = output_grid(o)?;
    Ok((1..=n).map(|i| t_max * i as f64 / n as f64).collect())
}

pub fn table_cmd(o: &Options) -> Result<Vec<u8>, Failure> {
    let ctrl = control(o)?;
    let curves = curves(o)?;
    let rs = abscissae(o)?;
    let jobs: Vec<(Curve, f64)> = curves.iter().flat_map(|c| rs.iter().map(move |&r| (*c, r))).collect();
    let values = jobs.par_iter().map(|(c, r)| c.value(*r, &ctrl)).collect::<Result<Vec<f64>, Failure>>()?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["family", "alpha", "beta", "gamma", "delta", "eta", "r", "value"])?;
    for ((c, r), v) in jobs.iter().zip(values) {
        w.write_record(c.cells().into_iter().chain([num(*r), num(v)]))?;
    }
    w.into_inner().map_err(|e| Failure::io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_is_cartesian_with_last_key_fastest() {
        let mut sweep = BTreeMap::new();
        sweep.insert("alpha".to_string(), vec![0.5, 0.7]);
        sweep.insert("delta".to_string(), vec![1.0, 2.0, 3.0]);
        let sets = expand(&Options::default(), &sweep).unwrap();
        assert_eq!(sets.len(), 6);
        assert_eq!((sets[1].alpha, sets[1].delta), (Some(0.5), Some(2.0)));
        assert_eq!((sets[3].alpha, sets[3].delta), (Some(0.7), Some(1.0)));
        sweep.insert("zeta".to_string(), vec![1.0]);
        assert_eq!(expand(&Options::default(), &sweep).unwrap_err().code, 2);
    }

    #[test]
    fn two_param_at_unit_orders_is_exponential() {
        let c = Curve {
            family: Family::TwoParam,
            alpha: 1.0,
            beta: None,
            gamma: None,
            delta: 1.0,
            eta: None,
            lam: LambdaTriple::new(-0.7, 0.0, 0.0),
        };
        let v = c.value(2.0, &SeriesControl::default()).unwrap();
        assert!((v - (-1.4f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn table1_has_one_curve_per_family() {
        let fams: Vec<Family> = table1().iter().map(|c| c.family).collect();
        assert_eq!(fams, Family::ALL.to_vec());
    }
}
