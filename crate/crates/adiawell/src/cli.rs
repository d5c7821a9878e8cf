//! Command-line front end. Every subcommand writes CSV with a header row.
//!
//! Parameters come from flags or from `--json-config <file>`, a JSON object
//! keyed by the flag names with underscores (`x_steps`, `t0`, ...) plus an
//! optional `format_version`. Flags win when both are given.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::asymptotics::{self, RegimeLabel};
use crate::branchfns::{self, CxPoint};
use crate::error::{Error, Result};
use crate::oracle::{self, GridSpec, SnapPolicy};
use crate::specialfns;
use crate::spectrum::{self, ModelParams};
use crate::wavefield::WaveField;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "adiawell", version, about = "Exact and asymptotic wave functions in a slowly shrinking well")]
pub struct Cli {
    /// Read parameters from a JSON file; flags take precedence.
    #[arg(long, global = true)]
    pub json_config: Option<PathBuf>,
    /// Write CSV here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a special or branch function at one complex point.
    Special(SpecialArgs),
    /// Eigenvalue data of the frozen well.
    Eigen(EigenArgs),
    /// Exact field on an x grid at one time.
    Field(FieldArgs),
    /// Exact field against the leading asymptotic term of its regime.
    Compare(FieldArgs),
    /// Asymptotic error over several eps with a fitted order.
    Sweep(SweepArgs),
    /// Crank-Nicolson propagation check of the exact field.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecialFn {
    /// Transition function F(z).
    F,
    Zeta,
    /// a(z) on the real line; uses --re only.
    A,
    Airy,
    L0,
    Q0,
    IntL0,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SpecialArgs {
    #[arg(long = "fn", value_enum)]
    #[serde(rename = "fn")]
    pub func: Option<SpecialFn>,
    #[arg(long, allow_negative_numbers = true)]
    pub re: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub im: Option<f64>,
    /// Derivative order for `a` and `airy`.
    #[arg(long)]
    pub derivative: Option<u8>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct EigenArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FieldArgs {
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub n: Option<u32>,
    /// Fast time t; tau = eps t.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    /// Number of grid points on [0, x_max].
    #[arg(long)]
    pub x_steps: Option<usize>,
    /// Right end of the grid; defaults to the well edge 1 - tau.
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Adiabatic,
    Exterior,
    Transition,
    Aftermath,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    /// Comma-separated list of eps values.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// Place tau at tau_n + k eps^{1/3} instead of a fixed tau.
    #[arg(long, allow_negative_numbers = true)]
    pub tau_offset_cbrt: Option<f64>,
    #[arg(long, value_enum)]
    pub check: Option<Check>,
    /// Exterior coordinate for `--check exterior`.
    #[arg(long)]
    pub xi: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Snap {
    Cell,
    Nearest,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OracleArgs {
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub t1: Option<f64>,
    /// Defaults to the smallest domain with boundary amplitude below 1e-10.
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, value_enum)]
    pub snap: Option<Snap>,
}

/// Shortest text that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn row(values: &[f64]) -> String {
    values.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>().join(",")
}

fn need<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidParameter(format!("missing --{}", name.replace('_', "-"))))
}

fn params(eps: Option<f64>, n: Option<u32>, tol: Option<f64>) -> Result<ModelParams> {
    let mut p = ModelParams::new(need(eps, "eps")?, need(n, "n")?)?;
    if let Some(tol) = tol {
        p.tol = tol;
        p.validate()?;
    }
    Ok(p)
}

fn check_time(p: &ModelParams, t: f64) -> Result<()> {
    if !t.is_finite() || p.eps * t > 1.0 {
        return Err(Error::InvalidParameter(format!("eps t = {} must not exceed 1", p.eps * t)));
    }
    Ok(())
}

/// Fills every field absent from `cli` with the value from `config`.
pub fn merge_config<T: Serialize + DeserializeOwned>(cli: T, config: Option<&Value>) -> Result<T> {
    let Some(config) = config else { return Ok(cli) };
    let bad = |m: String| Error::InvalidParameter(format!("config: {m}"));
    let Value::Object(cfg) = config else { return Err(bad("expected a JSON object".into())) };
    let mut cfg = cfg.clone();
    if let Some(v) = cfg.remove("format_version") {
        if v.as_u64() != Some(FORMAT_VERSION) {
            return Err(bad(format!("unsupported format_version {v}")));
        }
    }
    let mut merged = serde_json::to_value(cli).map_err(|e| bad(e.to_string()))?;
    let Value::Object(m) = &mut merged else { return Err(bad("internal".into())) };
    for (k, v) in cfg {
        match m.get(&k) {
            Some(Value::Null) | None => {
                m.insert(k, v);
            }
            Some(_) => {}
        }
    }
    serde_json::from_value(merged).map_err(|e| bad(e.to_string()))
}

fn special(a: &SpecialArgs) -> Result<Vec<String>> {
    let f = need(a.func, "fn")?;
    let z = Complex64::new(need(a.re, "re")?, a.im.unwrap_or(0.0));
    let d = a.derivative.unwrap_or(0);
    let v = match f {
        SpecialFn::F => specialfns::f_transition(z)?,
        SpecialFn::Zeta => specialfns::zeta_fn(z)?,
        SpecialFn::A => {
            if z.im != 0.0 {
                return Err(Error::InvalidParameter("a(z) takes a real argument".into()));
            }
            specialfns::a_fn(z.re, d)?
        }
        SpecialFn::Airy => specialfns::airy_ai(z, d)?,
        SpecialFn::L0 => branchfns::l0(CxPoint::c0(z)?)?,
        SpecialFn::Q0 => branchfns::q0(CxPoint::c0(z)?)?,
        SpecialFn::IntL0 => branchfns::int_l0(CxPoint::c0(z)?)?,
    };
    Ok(vec!["re,im".into(), row(&[v.re, v.im])])
}

fn eigen(a: &EigenArgs) -> Result<Vec<String>> {
    let n = need(a.n, "n")?;
    let tau = need(a.tau, "tau")?;
    if n == 0 {
        return Err(Error::InvalidParameter("mode index n must be at least 1".into()));
    }
    let p = spectrum::p_n(n, tau)?;
    let e = spectrum::e_n(n, tau)?;
    let d = spectrum::dlnpn_dtau(n, tau)?;
    Ok(vec!["p_n,E_n,dlnpn_dtau".into(), row(&[p, e, d])])
}

fn grid_of(a: &FieldArgs, tau: f64) -> Result<Vec<f64>> {
    let steps = need(a.x_steps, "x_steps")?;
    if steps < 2 {
        return Err(Error::InvalidParameter("x_steps must be at least 2".into()));
    }
    let x_max = a.x_max.unwrap_or(1.0 - tau);
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(Error::InvalidParameter(format!("x_max = {x_max}")));
    }
    Ok((0..steps).map(|k| x_max * k as f64 / (steps - 1) as f64).collect())
}

fn field(a: &FieldArgs) -> Result<Vec<String>> {
    let p = params(a.eps, a.n, a.tol)?;
    let t = need(a.t, "t")?;
    check_time(&p, t)?;
    let tau = p.eps * t;
    let xs = grid_of(a, tau)?;
    let samples = WaveField::new(p)?.psi_profile(&xs, t)?;
    let mut out = vec!["x,tau,re_psi,im_psi,est_error".to_string()];
    out.extend(samples.iter().map(|s| row(&[s.point.x, tau, s.psi.re, s.psi.im, s.est_error])));
    Ok(out)
}

fn compare(a: &FieldArgs) -> Result<Vec<String>> {
    let p = params(a.eps, a.n, a.tol)?;
    let t = need(a.t, "t")?;
    check_time(&p, t)?;
    let tau = p.eps * t;
    let xs = grid_of(a, tau)?;
    let exact = WaveField::new(p)?.psi_profile(&xs, t)?;
    let asym: Vec<(Complex64, RegimeLabel)> =
        xs.par_iter().map(|&x| asymptotics::best_leading(&p, x, t)).collect::<Result<_>>()?;
    let mut out = vec!["x,re_exact,im_exact,re_asym,im_asym,abs_err,regime".to_string()];
    for ((x, e), (v, label)) in xs.iter().zip(&exact).zip(&asym) {
        let nums = row(&[*x, e.psi.re, e.psi.im, v.re, v.im, (e.psi - v).norm()]);
        out.push(format!("{nums},{}", label.as_str()));
    }
    Ok(out)
}

fn interior_grid(tau: f64) -> Vec<f64> {
    (1..8).map(|k| k as f64 * (1.0 - tau) / 8.0).collect()
}

/// Error of the leading term named by `check` at one `eps`.
///
/// Interior checks take the maximum absolute error over seven evenly spaced
/// points of the well; the exterior check is the relative error at `xi`.
pub fn check_error(check: Check, eps: f64, n: u32, tau: f64, xi: f64) -> Result<f64> {
    let p = ModelParams::new(eps, n)?;
    let t = tau / eps;
    check_time(&p, t)?;
    let wf = WaveField::new(p)?;
    if check == Check::Exterior {
        let x = 1.0 - tau + xi / eps;
        let e = wf.psi_outside(x, t)?.psi;
        let a = asymptotics::outside_leading(&p, x, t)?;
        return Ok(((e - a) / a).norm());
    }
    let xs = interior_grid(tau);
    let contour = wf.default_inside_contour(tau, xs[xs.len() - 1])?;
    let exact = wf.psi_inside_many(&xs, t, &contour)?;
    let approx: Vec<Complex64> = match check {
        Check::Adiabatic => xs.iter().map(|&x| asymptotics::adiabatic_leading(&p, x, t)).collect::<Result<_>>()?,
        Check::Transition => xs.iter().map(|&x| asymptotics::transition_leading(&p, x, t)).collect::<Result<_>>()?,
        Check::Aftermath => asymptotics::aftermath_terms_many(&p, &xs, t)?.iter().map(|a| a.sum()).collect(),
        Check::Exterior => unreachable!(),
    };
    Ok(exact.iter().zip(&approx).map(|(e, a)| (e.psi - a).norm()).fold(0.0, f64::max))
}

/// Least-squares slope of `ln err` against `ln eps`.
pub fn fit_order(eps: &[f64], err: &[f64]) -> f64 {
    let k = eps.len() as f64;
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn sweep(a: &SweepArgs) -> Result<Vec<String>> {
    let eps = need(a.eps.clone(), "eps")?;
    if eps.len() < 2 {
        return Err(Error::InvalidParameter("sweep needs at least two eps values".into()));
    }
    for &e in &eps {
        ModelParams::new(e, 1)?;
    }
    let n = need(a.n, "n")?;
    let check = need(a.check, "check")?;
    let xi = a.xi.unwrap_or(0.5);
    if !(xi >= 0.0) {
        return Err(Error::InvalidParameter(format!("xi = {xi}")));
    }
    let tau_of = |e: f64| -> Result<f64> {
        match (a.tau, a.tau_offset_cbrt) {
            (Some(t), None) => Ok(t),
            (None, Some(k)) => Ok(spectrum::tau_threshold(n) + k * e.cbrt()),
            _ => Err(Error::InvalidParameter("give exactly one of --tau and --tau-offset-cbrt".into())),
        }
    };
    let errs: Vec<f64> =
        eps.par_iter().map(|&e| check_error(check, e, n, tau_of(e)?, xi)).collect::<Result<_>>()?;
    let order = fit_order(&eps, &errs);
    let mut out = vec!["eps,err,order_fit".to_string()];
    out.extend(eps.iter().zip(&errs).map(|(&e, &r)| row(&[e, r, order])));
    Ok(out)
}

fn oracle_cmd(a: &OracleArgs) -> Result<Vec<String>> {
    let p = params(a.eps, a.n, None)?;
    let t0 = need(a.t0, "t0")?;
    let t1 = need(a.t1, "t1")?;
    check_time(&p, t1)?;
    let x_max = match a.x_max {
        Some(x) => x,
        None => oracle::suggested_x_max(&p, t0, t1)?.ceil(),
    };
    let mut grid = GridSpec::new(x_max, need(a.nx, "nx")?, need(a.dt, "dt")?)?;
    if a.snap == Some(Snap::Nearest) {
        grid.snap_policy = SnapPolicy::NearestNode;
    }
    let r = oracle::propagate_report(&p, t0, t1, &grid)?;
    Ok(vec!["deviation,norm_drift,runtime_ms".into(), row(&[r.deviation, r.norm_drift, r.runtime_ms])])
}

fn load_config(path: &Option<PathBuf>) -> Result<Option<Value>> {
    let Some(path) = path else { return Ok(None) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
    let v = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidParameter(format!("{} is not valid JSON: {e}", path.display())))?;
    Ok(Some(v))
}

/// Runs one parsed command and returns its CSV lines.
pub fn execute(cli: &Cli) -> Result<Vec<String>> {
    let cfg = load_config(&cli.json_config)?;
    let cfg = cfg.as_ref();
    match &cli.command {
        Command::Special(a) => special(&merge_config(a.clone(), cfg)?),
        Command::Eigen(a) => eigen(&merge_config(a.clone(), cfg)?),
        Command::Field(a) => field(&merge_config(a.clone(), cfg)?),
        Command::Compare(a) => compare(&merge_config(a.clone(), cfg)?),
        Command::Sweep(a) => sweep(&merge_config(a.clone(), cfg)?),
        Command::Oracle(a) => oracle_cmd(&merge_config(a.clone(), cfg)?),
    }
}

/// Exit code for an error: 2 for invalid input, 3 for numerical failure.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        2
    } else {
        3
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("ADIA_THREADS") {
        let k: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&k| k > 0)
            .ok_or_else(|| Error::InvalidParameter(format!("ADIA_THREADS = {v:?}")))?;
        b = b.num_threads(k);
    }
    b.build().map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

/// Parses `argv` (program name first), runs it and writes CSV to `out` or to
/// the `--out` file. Returns the process exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = thread_pool().and_then(|pool| pool.install(|| execute(&cli)));
    let lines = match result {
        Ok(l) => l,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cli.out {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            write_lines(&mut w, &lines)?;
            w.flush()
        }),
        None => write_lines(out, &lines),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn write_lines(w: &mut dyn Write, lines: &[String]) -> io::Result<()> {
    for l in lines {
        writeln!(w, "{l}")?;
    }
    Ok(())
}

/// [`run_with`] on standard output and standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
