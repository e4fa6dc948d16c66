//! Flag set shared by every command, plus the optional JSON config it is merged over.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use num_complex::Complex;
use serde::Deserialize;

use crate::failure::Failure;

/// Complex argument given as `1.5`, `-2i` or `0.3-0.4i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexArg(pub Complex<f64>);

impl FromStr for ComplexArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        Complex::<f64>::from_str(&t).map(ComplexArg).map_err(|e| format!("'{s}' is not a complex number: {e}"))
    }
}

impl<'de> Deserialize<'de> for ComplexArg {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(ComplexArg(Complex::new(x, 0.0))),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// `h=<step>` selecting the numerical backend of `solve`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleStep(pub f64);

impl FromStr for OracleStep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v = s.strip_prefix("h=").ok_or_else(|| format!("expected h=<step>, got '{s}'"))?;
        let h: f64 = v.parse().map_err(|_| format!("'{v}' is not a number"))?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(format!("oracle step must be positive, got {h}"));
        }
        Ok(OracleStep(h))
    }
}

impl<'de> Deserialize<'de> for OracleStep {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Args, Deserialize, Clone, Debug, Default, PartialEq)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Options {
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub eta: Option<f64>,
    /// first argument, e.g. 0.5 or 0.3-0.2i
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub u: Option<ComplexArg>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub v: Option<ComplexArg>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub w: Option<ComplexArg>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda1: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda2: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda3: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub y0: Option<f64>,
    /// single evaluation point for eval-univariate
    #[arg(long, global = true)]
    pub r: Option<f64>,
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    #[arg(long, global = true)]
    pub n_points: Option<usize>,
    /// two-column CSV `r,g`
    #[arg(long, global = true)]
    pub forcing: Option<PathBuf>,
    /// numerical L1 backend with the given step, as h=<step>
    #[arg(long, global = true)]
    pub oracle: Option<OracleStep>,
    /// series tolerance; check tolerance for verify
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_shell: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// run a single named check
    #[arg(long, global = true)]
    pub only: Option<String>,
    /// families for table: trivariate, bivariate, prabhakar, two-param
    #[arg(long, global = true, value_delimiter = ',')]
    pub family: Option<Vec<String>>,
    /// named parameter sweep for table (table1)
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// JSON file with any of these options; flags take precedence
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// table sweep: parameter name → list of values (config file only)
    #[arg(skip)]
    pub sweep: Option<BTreeMap<String, Vec<f64>>>,
}

macro_rules! prefer {
    ($a:ident, $b:ident, $($f:ident),*) => {
        Options { $($f: $a.$f.or($b.$f)),* }
    };
}

impl Options {
    /// Field-wise merge; values already set in `self` win.
    pub fn over(self, base: Options) -> Options {
        let a = self;
        let b = base;
        prefer!(
            a, b, alpha, beta, gamma, delta, eta, u, v, w, lambda1, lambda2, lambda3, y0, r, t_max, n_points, forcing,
            oracle, tol, max_shell, out, only, family, preset, config, sweep
        )
    }

    /// Flags merged over the config file named by `--config`, if any.
    pub fn resolve(self) -> Result<Options, Failure> {
        match self.config.clone() {
            None => Ok(self),
            Some(path) => Ok(self.over(load_config(&path)?)),
        }
    }
}

fn load_config(path: &Path) -> Result<Options, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::validation(format!("bad config {}: {e}", path.display())))
}
