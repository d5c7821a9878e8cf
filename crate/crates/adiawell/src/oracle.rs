//! Crank-Nicolson propagation of `i psi_t = -psi_xx + v(x, eps t) psi` on a
//! truncated half-line, used as an independent check of the exact field.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{self, ModelParams};
use crate::wavefield::WaveField;

/// How the potential is sampled in the grid cell containing the moving edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SnapPolicy {
    /// Weight `v` by the fraction of the node's cell lying inside the well.
    CellAverage,
    /// Use the value at the node.
    NearestNode,
}

/// Uniform grid `x_j = j x_max / nx`, Dirichlet at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_max: f64,
    pub nx: usize,
    pub dt: f64,
    pub snap_policy: SnapPolicy,
}

impl GridSpec {
    pub fn new(x_max: f64, nx: usize, dt: f64) -> Result<Self> {
        let g = Self { x_max, nx, dt, snap_policy: SnapPolicy::CellAverage };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("x_max = {}", self.x_max)));
        }
        if self.nx < 3 {
            return Err(Error::InvalidParameter(format!("nx = {} is too small", self.nx)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {}", self.dt)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.x_max / self.nx as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..=self.nx).map(|j| j as f64 * dx).collect()
    }

    /// Halves both `dx` and `dt`.
    pub fn refined(&self) -> Self {
        Self { nx: 2 * self.nx, dt: 0.5 * self.dt, ..*self }
    }
}

/// Samples of `psi` on the nodes of a [`GridSpec`] at time `time`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveVector {
    pub values: Vec<Complex64>,
    pub time: f64,
}

impl WaveVector {
    /// Grid samples with both end values forced to zero.
    pub fn new(mut values: Vec<Complex64>, time: f64) -> Result<Self> {
        if values.len() < 4 {
            return Err(Error::InvalidParameter("wave vector needs at least four nodes".into()));
        }
        let last = values.len() - 1;
        values[0] = Complex64::new(0.0, 0.0);
        values[last] = Complex64::new(0.0, 0.0);
        Ok(Self { values, time })
    }

    /// Discrete L2 norm with node spacing `dx`.
    pub fn norm(&self, dx: f64) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx).sqrt()
    }
}

/// Time dependence of the well.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    /// `v = -1` on `[0, 1 - eps t]`.
    Moving { eps: f64 },
    /// `v = -1` on `[0, 1 - tau]` at all times.
    Frozen { tau: f64 },
    Free,
}

impl Potential {
    fn edge(&self, t: f64) -> Option<f64> {
        match *self {
            Potential::Moving { eps } => Some(1.0 - eps * t),
            Potential::Frozen { tau } => Some(1.0 - tau),
            Potential::Free => None,
        }
    }

    fn sample(&self, grid: &GridSpec, t: f64) -> Vec<f64> {
        let dx = grid.dx();
        let mut v = vec![0.0; grid.nx + 1];
        let Some(edge) = self.edge(t) else { return v };
        for (j, vj) in v.iter_mut().enumerate() {
            let x = j as f64 * dx;
            *vj = match grid.snap_policy {
                SnapPolicy::NearestNode => {
                    if x <= edge {
                        -1.0
                    } else {
                        0.0
                    }
                }
                SnapPolicy::CellAverage => {
                    let frac = ((edge - (x - 0.5 * dx)) / dx).clamp(0.0, 1.0);
                    -frac
                }
            };
        }
        v
    }
}

/// One Crank-Nicolson step for the moving well of `params`.
pub fn step(state: &WaveVector, grid: &GridSpec, params: &ModelParams) -> Result<WaveVector> {
    step_with(state, grid, Potential::Moving { eps: params.eps })
}

/// One Crank-Nicolson step with the potential taken at the midpoint time.
pub fn step_with(state: &WaveVector, grid: &GridSpec, potential: Potential) -> Result<WaveVector> {
    grid.validate()?;
    if state.values.len() != grid.nx + 1 {
        return Err(Error::InvalidParameter(format!(
            "wave vector has {} nodes, grid has {}",
            state.values.len(),
            grid.nx + 1
        )));
    }
    let mut work = Workspace::new(grid.nx);
    let mut out = state.clone();
    work.advance(&mut out, grid, potential)?;
    Ok(out)
}

// Scratch storage for the tridiagonal solve so long runs do not reallocate.
struct Workspace {
    rhs: Vec<Complex64>,
    c_prime: Vec<Complex64>,
}

impl Workspace {
    fn new(nx: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self { rhs: vec![zero; nx + 1], c_prime: vec![zero; nx + 1] }
    }

    fn advance(&mut self, state: &mut WaveVector, grid: &GridSpec, potential: Potential) -> Result<()> {
        let dt = grid.dt;
        let dx = grid.dx();
        let v = potential.sample(grid, state.time + 0.5 * dt);
        let psi = &mut state.values;
        let nx = grid.nx;
        // H = -D2 + V; solve (1 + i dt/2 H) new = (1 - i dt/2 H) old.
        let r = Complex64::new(0.0, 0.5 * dt / (dx * dx));
        let half = Complex64::new(0.0, 0.5 * dt);
        for j in 1..nx {
            let h = -(psi[j + 1] - 2.0 * psi[j] + psi[j - 1]) / (dx * dx) + v[j] * psi[j];
            self.rhs[j] = psi[j] - half * h;
        }
        // Thomas algorithm on the interior nodes. Off-diagonal entries are -r.
        let off = -r;
        let mut prev_c = Complex64::new(0.0, 0.0);
        let mut prev_d = Complex64::new(0.0, 0.0);
        for j in 1..nx {
            let diag = 1.0 + 2.0 * r + half * v[j];
            let denom = diag - off * prev_c;
            if denom.norm() < 1e-300 || !denom.is_finite() {
                return Err(Error::LinearSolveFailure(j));
            }
            prev_c = off / denom;
            prev_d = (self.rhs[j] - off * prev_d) / denom;
            self.c_prime[j] = prev_c;
            self.rhs[j] = prev_d;
        }
        psi[nx - 1] = self.rhs[nx - 1];
        for j in (1..nx - 1).rev() {
            psi[j] = self.rhs[j] - self.c_prime[j] * psi[j + 1];
        }
        psi[0] = Complex64::new(0.0, 0.0);
        psi[nx] = Complex64::new(0.0, 0.0);
        state.time += dt;
        Ok(())
    }
}

/// Advances `state` to `t1` in equal steps no longer than `grid.dt`.
pub fn propagate(state: &WaveVector, grid: &GridSpec, potential: Potential, t1: f64) -> Result<WaveVector> {
    grid.validate()?;
    let mut out = state.clone();
    let mut work = Workspace::new(grid.nx);
    let span = t1 - state.time;
    if span < 0.0 {
        return Err(Error::InvalidParameter(format!("cannot propagate backwards to t = {t1}")));
    }
    let steps = (span / grid.dt - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        return Ok(out);
    }
    let g = GridSpec { dt: span / steps as f64, ..*grid };
    let t0 = state.time;
    for k in 0..steps {
        work.advance(&mut out, &g, potential)?;
        // Recompute from the start time so rounding does not accumulate.
        out.time = t0 + (k + 1) as f64 * g.dt;
    }
    Ok(out)
}

/// Outcome of one oracle run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleReport {
    /// Relative L2 distance from the exact field at `t1`.
    pub deviation: f64,
    /// Relative change of the discrete norm over the run.
    pub norm_drift: f64,
    /// Largest `|psi|` over the last 5% of the grid at `t1`.
    pub boundary_amplitude: f64,
    pub runtime_ms: f64,
}

/// Leading-order bound on `|Psi_n|` at `x_max` over the window, from the
/// exterior decay rate `sqrt(1 - p_n^2)`.
pub fn boundary_estimate(params: &ModelParams, t0: f64, t1: f64, x_max: f64) -> Result<f64> {
    let eps = params.eps;
    let edge = 1.0 - eps * t0;
    let p = spectrum::p_n(params.n, eps * t1)?;
    let w = (1.0 - p * p).max(0.0).sqrt();
    Ok(p * (-(x_max - edge) * w).exp())
}

/// Smallest domain whose boundary estimate is below `1e-10`.
pub fn suggested_x_max(params: &ModelParams, t0: f64, t1: f64) -> Result<f64> {
    let eps = params.eps;
    let edge = 1.0 - eps * t0;
    let p = spectrum::p_n(params.n, eps * t1)?;
    let w = (1.0 - p * p).max(0.0).sqrt();
    Ok(edge + (1e10 * p).ln() / w)
}

fn check_window(params: &ModelParams, t0: f64, t1: f64, grid: &GridSpec) -> Result<()> {
    params.validate()?;
    grid.validate()?;
    if !(t0 <= t1) {
        return Err(Error::InvalidParameter(format!("need t0 <= t1, got {t0}, {t1}")));
    }
    if params.eps * t1 >= params.tau_n() {
        return Err(Error::InvalidParameter(format!(
            "oracle runs stop before the threshold tau_n = {}",
            params.tau_n()
        )));
    }
    let b = boundary_estimate(params, t0, t1, grid.x_max)?;
    if b > 1e-10 {
        return Err(Error::InvalidParameter(format!(
            "x_max = {} leaves boundary amplitude {b:e}; use at least {}",
            grid.x_max,
            suggested_x_max(params, t0, t1)?
        )));
    }
    Ok(())
}

fn exact_on_grid(wf: &WaveField, grid: &GridSpec, t: f64) -> Result<WaveVector> {
    let xs = grid.nodes();
    let samples = wf.psi_profile(&xs[1..grid.nx], t)?;
    let mut values = Vec::with_capacity(grid.nx + 1);
    values.push(Complex64::new(0.0, 0.0));
    values.extend(samples.iter().map(|s| s.psi));
    values.push(Complex64::new(0.0, 0.0));
    WaveVector::new(values, t)
}

/// Propagates the exact `Psi_n(., t0)` to `t1` and reports the deviation from
/// `Psi_n(., t1)` along with norm and boundary telemetry.
pub fn propagate_report(params: &ModelParams, t0: f64, t1: f64, grid: &GridSpec) -> Result<OracleReport> {
    check_window(params, t0, t1, grid)?;
    let start = Instant::now();
    let wf = WaveField::new(*params)?;
    let initial = exact_on_grid(&wf, grid, t0)?;
    let end = propagate(&initial, grid, Potential::Moving { eps: params.eps }, t1)?;
    let target = exact_on_grid(&wf, grid, t1)?;
    let diff: f64 = end.values.iter().zip(&target.values).map(|(a, b)| (a - b).norm_sqr()).sum();
    let base: f64 = target.values.iter().map(|b| b.norm_sqr()).sum();
    let dx = grid.dx();
    let tail = grid.nx - grid.nx / 20;
    Ok(OracleReport {
        deviation: (diff / base).sqrt(),
        norm_drift: (end.norm(dx) / initial.norm(dx) - 1.0).abs(),
        boundary_amplitude: end.values[tail..].iter().map(|v| v.norm()).fold(0.0, f64::max),
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Relative L2 deviation after propagating `Psi_n` from `t0` to `t1`.
pub fn propagate_and_compare(params: &ModelParams, t0: f64, t1: f64, grid: &GridSpec) -> Result<f64> {
    Ok(propagate_report(params, t0, t1, grid)?.deviation)
}
