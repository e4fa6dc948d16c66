use std::io::Write;
use std::path::Path;

use num_complex::Complex;
use trivml::verify;
use trivml::{
    eval_trivariate, eval_univariate, numeric_oracle_solve, solve, Forcing, IvpSpec, LambdaTriple, MLParams,
    SeriesControl, SolutionTrace, TracePoint,
};

use crate::failure::{Failure, VERIFY_FAILED};
use crate::options::Options;

pub const DEFAULT_T_MAX: f64 = 1.0;
pub const DEFAULT_N_POINTS: usize = 100;

/// 17 significant digits, locale independent.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `bytes` to `out` through a sibling temporary file, or to stdout.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(bytes)?;
            so.flush()?;
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)
                .map_err(|e| Failure::io(format!("cannot create output in {}: {e}", dir.display())))?;
            tmp.write_all(bytes)?;
            tmp.persist(path).map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))?;
        }
    }
    Ok(())
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>, Failure>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| Failure::io(e.to_string()))
}

fn need(v: Option<f64>, name: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure::validation(format!("--{name} is required")))
}

pub fn control(o: &Options) -> Result<SeriesControl<f64>, Failure> {
    let mut c = SeriesControl::default();
    if let Some(t) = o.tol {
        c.rel_tol = t;
    }
    if let Some(m) = o.max_shell {
        c.max_shell = m;
    }
    c.validate()?;
    Ok(c)
}

pub fn params(o: &Options) -> Result<MLParams<f64>, Failure> {
    Ok(MLParams::new(
        need(o.alpha, "alpha")?,
        need(o.beta, "beta")?,
        need(o.gamma, "gamma")?,
        need(o.delta, "delta")?,
        o.eta.unwrap_or(1.0),
    )?)
}

fn lambdas(o: &Options, default: f64) -> LambdaTriple<f64> {
    LambdaTriple::new(o.lambda1.unwrap_or(default), o.lambda2.unwrap_or(default), o.lambda3.unwrap_or(default))
}

pub fn output_grid(o: &Options) -> Result<(f64, usize), Failure> {
    let t_max = o.t_max.unwrap_or(DEFAULT_T_MAX);
    let n = o.n_points.unwrap_or(DEFAULT_N_POINTS);
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Failure::validation(format!("--t-max must be positive and finite, got {t_max}")));
    }
    if n == 0 {
        return Err(Failure::validation("--n-points must be at least 1"));
    }
    Ok((t_max, n))
}

pub fn eval(o: &Options) -> Result<Vec<u8>, Failure> {
    let p = params(o)?;
    let ctrl = control(o)?;
    let zero = Complex::new(0.0, 0.0);
    let [u, v, w] = [o.u, o.v, o.w].map(|a| a.map_or(zero, |c| c.0));
    let res = eval_trivariate(&p, u, v, w, &ctrl)?.require_converged()?;
    let row = [p.alpha, p.beta, p.gamma, p.delta, p.eta, u.re, u.im, v.re, v.im, w.re, w.im]
        .into_iter()
        .chain([res.value.re, res.value.im, res.abs_error_estimate])
        .map(fmt)
        .chain([res.shells_used.to_string()]);
    csv_bytes(
        &[
            "alpha", "beta", "gamma", "delta", "eta", "u_re", "u_im", "v_re", "v_im", "w_re", "w_im", "value_re",
            "value_im", "abs_err", "shells",
        ],
        [row],
    )
}

pub fn eval_univariate_cmd(o: &Options) -> Result<Vec<u8>, Failure> {
    let p = params(o)?;
    let lam = lambdas(o, 0.0);
    let ctrl = control(o)?;
    let rs = match o.r {
        Some(r) => vec![r],
        None => {
            let (t_max, n) = output_grid(o)?;
            (0..=n).map(|i| t_max * i as f64 / n as f64).collect()
        }
    };
    let mut rows = Vec::with_capacity(rs.len());
    for r in rs {
        let e = eval_univariate(&p, &lam, r, &ctrl)?.require_converged()?;
        let row: Vec<String> = [p.alpha, p.beta, p.gamma, p.delta, p.eta, lam.lambda1, lam.lambda2, lam.lambda3, r]
            .into_iter()
            .chain([e.value.re, e.value.im, e.abs_error_estimate])
            .map(fmt)
            .chain([e.shells_used.to_string()])
            .collect();
        rows.push(row);
    }
    csv_bytes(
        &[
            "alpha", "beta", "gamma", "delta", "eta", "lambda1", "lambda2", "lambda3", "r", "value_re", "value_im",
            "abs_err", "shells",
        ],
        rows,
    )
}

pub fn ivp_spec(o: &Options) -> Result<IvpSpec<f64>, Failure> {
    Ok(IvpSpec::new(
        (need(o.alpha, "alpha")?, need(o.beta, "beta")?, need(o.gamma, "gamma")?),
        (o.lambda1.unwrap_or(0.0), o.lambda2.unwrap_or(0.0), o.lambda3.unwrap_or(0.0)),
        need(o.y0, "y0")?,
    )?)
}

/// Reads a two-column `r,g` table; the first abscissa must be 0.
pub fn read_forcing(path: &Path) -> Result<Forcing<f64>, Failure> {
    let unreadable = |e: &dyn std::fmt::Display| Failure::io(format!("cannot read forcing {}: {e}", path.display()));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(|e| unreadable(&e))?;
    let header = rdr.headers().map_err(|e| unreadable(&e))?.clone();
    if header.len() != 2 || &header[0] != "r" || &header[1] != "g" {
        return Err(unreadable(&"header must be `r,g`"));
    }
    let (mut r, mut g) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| unreadable(&e))?;
        let x: f64 = rec[0].parse().map_err(|_| unreadable(&format!("bad r value '{}'", &rec[0])))?;
        let y: f64 = rec[1].parse().map_err(|_| unreadable(&format!("bad g value '{}'", &rec[1])))?;
        r.push(x);
        g.push(y);
    }
    if r.first() != Some(&0.0) {
        return Err(Failure::validation("forcing table must start at r = 0"));
    }
    Ok(Forcing::table(r, g)?)
}

/// Linear interpolation of a trace onto `grid`.
fn resample(trace: &SolutionTrace<f64>, grid: &[f64]) -> Vec<TracePoint<f64>> {
    let pts = &trace.points;
    grid.iter()
        .map(|&r| {
            let i = pts.partition_point(|p| p.r <= r).clamp(1, pts.len() - 1);
            let (a, b) = (pts[i - 1], pts[i]);
            let s = ((r - a.r) / (b.r - a.r)).clamp(0.0, 1.0);
            TracePoint { r, y: a.y + s * (b.y - a.y), abs_err: a.abs_err.max(b.abs_err) }
        })
        .collect()
}

pub fn solve_cmd(o: &Options) -> Result<Vec<u8>, Failure> {
    let spec = ivp_spec(o)?;
    let ctrl = control(o)?;
    let (t_max, n) = output_grid(o)?;
    let g = match &o.forcing {
        Some(path) => read_forcing(path)?,
        None => Forcing::Zero,
    };
    let grid: Vec<f64> = (0..=n).map(|i| t_max * i as f64 / n as f64).collect();
    let trace = match o.oracle {
        None => solve(&spec, &g, &grid, &ctrl)?,
        Some(h) => {
            let fine = numeric_oracle_solve(&spec, &g, h.0, t_max)?;
            SolutionTrace { points: resample(&fine, &grid), backend: fine.backend }
        }
    };
    let backend = trace.backend.to_string();
    csv_bytes(
        &["r", "y", "backend", "abs_err"],
        trace.points.iter().map(|p| [fmt(p.r), fmt(p.y), backend.clone(), fmt(p.abs_err)]),
    )
}

/// Report text and whether every check passed.
pub fn verify_cmd(o: &Options) -> Result<(Vec<u8>, bool), Failure> {
    if let Some(t) = o.tol {
        if !(t >= 0.0) {
            return Err(Failure::validation(format!("--tol must be non-negative, got {t}")));
        }
    }
    let names: Vec<&str> = match &o.only {
        Some(n) => {
            if verify::default_tolerance(n).is_none() {
                return Err(Failure::validation(format!(
                    "unknown check '{n}'; known: {}",
                    verify::check_names().join(", ")
                )));
            }
            vec![n.as_str()]
        }
        None => verify::check_names(),
    };
    let mut text = String::new();
    let mut all = true;
    for name in names {
        let c = verify::run_check(name, o.tol)?;
        all &= c.passed;
        text.push_str(&format!("{} {} {:e} {:e}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.max_err, c.tol));
        if let Some(d) = &c.detail {
            eprintln!("{}: {d}", c.name);
        }
    }
    Ok((text.into_bytes(), all))
}

pub fn verify_exit(all_passed: bool) -> i32 {
    if all_passed {
        0
    } else {
        VERIFY_FAILED
    }
}
