//! Instantaneous spectrum of the square well of width `1 - tau`, depth 1:
//! thresholds, eigen-momenta, eigenvalues, eigenfunctions, the phase
//! constant `c_n` and the complex continuation of the eigen-momentum off the
//! real axis.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::adaptive_real;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Adiabatic parameter, mode index and working tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub eps: f64,
    pub n: u32,
    pub tol: f64,
}

impl ModelParams {
    pub fn new(eps: f64, n: u32) -> Result<Self> {
        let p = Self { eps, n, tol: 1e-10 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps = {} must lie in (0, 1)", self.eps)));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("mode index n must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {} must be positive", self.tol)));
        }
        Ok(())
    }

    pub fn tau_n(&self) -> f64 {
        tau_threshold(self.n)
    }
}

/// A point `(x, t)`; slow time `tau = eps t`, exterior coordinate
/// `xi = eps (x - (1 - tau))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: f64,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: f64, t: f64, eps: f64) -> Result<Self> {
        if !(x >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("bad point x = {x}, t = {t}")));
        }
        if eps * t > 1.0 {
            return Err(Error::InvalidParameter(format!("eps t = {} exceeds 1", eps * t)));
        }
        Ok(Self { x, t })
    }

    pub fn tau(&self, eps: f64) -> f64 {
        eps * self.t
    }

    pub fn xi(&self, eps: f64) -> f64 {
        eps * (self.x - (1.0 - eps * self.t))
    }

    pub fn inside(&self, eps: f64) -> bool {
        self.x <= 1.0 - eps * self.t
    }
}

/// `tau_n = 1 - pi (n - 1/2)`: the moment the n-th level reaches 0.
pub fn tau_threshold(n: u32) -> f64 {
    1.0 - PI * (n as f64 - 0.5)
}

fn check_mode(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("mode index n must be at least 1".into()));
    }
    Ok(())
}

// Root of (1 - tau) p + asin p = pi n on [0, 1]; p = 1 at tau = tau_n.
fn p_n_closed(n: u32, tau: f64) -> f64 {
    let target = PI * n as f64;
    let f = |p: f64| (1.0 - tau) * p + p.asin() - target;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if f(hi) <= 0.0 {
        return 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigen-momentum `p_n(tau)`: the root in `(0, 1)` of
/// `(1 - tau) p + arcsin p = pi n`, by bisection.
pub fn p_n(n: u32, tau: f64) -> Result<f64> {
    check_mode(n)?;
    if !tau.is_finite() || tau >= tau_threshold(n) {
        return Err(Error::NoEigenvalue { n, tau });
    }
    Ok(p_n_closed(n, tau))
}

/// `E_n = p_n^2 - 1`.
pub fn e_n(n: u32, tau: f64) -> Result<f64> {
    let p = p_n(n, tau)?;
    Ok((p - 1.0) * (p + 1.0))
}

/// `d ln p_n / d tau = 1 / ((1 - tau) + (1 - p_n^2)^{-1/2})`.
pub fn dlnpn_dtau(n: u32, tau: f64) -> Result<f64> {
    let p = p_n(n, tau)?;
    Ok(1.0 / ((1.0 - tau) + 1.0 / ((1.0 - p) * (1.0 + p)).sqrt()))
}

/// `int_tau^{tau_n} E_n(s) ds` (non-positive for `tau <= tau_n`).
pub fn int_e_n(n: u32, tau: f64) -> Result<f64> {
    check_mode(n)?;
    let tn = tau_threshold(n);
    if tau > tn {
        return Err(Error::NoEigenvalue { n, tau });
    }
    if tau == tn {
        return Ok(0.0);
    }
    // E_n ~ -(tau_n - tau)^2 near the threshold, so the integrand is smooth.
    let rep = adaptive_real(
        |s| {
            let p = p_n_closed(n, s);
            (p - 1.0) * (p + 1.0)
        },
        tau,
        tn,
        1e-14 * (tn - tau).max(1.0),
    );
    Ok(rep.require(1e-10, "eigenvalue integral")?.value.re)
}

/// Instantaneous eigenfunction `psi_n(x, tau)`.
pub fn psi_n(n: u32, tau: f64, x: f64) -> Result<f64> {
    let p = p_n(n, tau)?;
    if x < 0.0 {
        return Err(Error::InvalidParameter(format!("x = {x} must be non-negative")));
    }
    Ok(psi_with(n, p, tau, x))
}

fn psi_with(n: u32, p: f64, tau: f64, x: f64) -> f64 {
    let edge = 1.0 - tau;
    if x <= edge {
        (p * x).sin()
    } else {
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        sign * p * (-(x - edge) * ((1.0 - p) * (1.0 + p)).sqrt()).exp()
    }
}

/// `c_n = exp(i (2 tau_n - 3) / eps + i pi / 4)`.
pub fn c_n_phase(params: &ModelParams) -> Complex64 {
    let tn = tau_threshold(params.n);
    // Reduce the large phase before adding pi/4 to keep it accurate.
    let ph = ((2.0 * tn - 3.0) / params.eps).rem_euclid(2.0 * PI);
    Complex64::from_polar(1.0, ph + FRAC_PI_4)
}

// G(p) = (1 - tau) p + arcsin p - i p xi / (2 w) - pi n, w = sqrt(1 - p^2), Re w > 0.
fn g_tilde(n: u32, tau: f64, xi: f64, p: Complex64) -> (Complex64, Complex64, Complex64) {
    let one = Complex64::new(1.0, 0.0);
    let w = (one - p).sqrt() * (one + p).sqrt();
    let asin = 0.5 * crate::branchfns::l0_raw(p, crate::branchfns::Limit::Above);
    let g = (1.0 - tau) * p + asin - I * p * xi / (2.0 * w) - PI * n as f64;
    let gp = (1.0 - tau) + one / w - I * xi / (2.0 * w * w * w);
    let gxi = -I * p / (2.0 * w);
    (g, gp, gxi)
}

fn newton_tilde(n: u32, tau: f64, xi: f64, mut p: Complex64) -> Option<Complex64> {
    for _ in 0..40 {
        let (g, gp, _) = g_tilde(n, tau, xi, p);
        let dp = g / gp;
        p -= dp;
        if !p.is_finite() {
            return None;
        }
        if dp.norm() <= 1e-15 * (1.0 + p.norm()) {
            return Some(p);
        }
    }
    let (g, _, _) = g_tilde(n, tau, xi, p);
    (g.norm() < 1e-12).then_some(p)
}

fn in_first_quadrant(p: Complex64) -> bool {
    p.re >= -1e-12 && p.im >= -1e-12
}

// Continue a root of G in xi from (xi0, p0) to xi1 at fixed tau.
fn continue_in_xi(n: u32, tau: f64, xi0: f64, xi1: f64, p0: Complex64) -> Result<Complex64> {
    let (mut xi, mut p) = (xi0, p0);
    let mut step = (xi1 - xi0).min(0.05);
    while xi < xi1 {
        let h = step.min(xi1 - xi);
        let (_, gp, gxi) = g_tilde(n, tau, xi, p);
        let guess = p - gxi / gp * h;
        match newton_tilde(n, tau, xi + h, guess) {
            Some(q) if in_first_quadrant(q) && (q - p).norm() < 0.2 => {
                p = q;
                xi += h;
                step = (step * 1.5).min(0.2);
            }
            _ => {
                step *= 0.5;
                if step < 1e-12 {
                    return Err(Error::ContinuationFailure { xi, reason: "step size underflow" });
                }
            }
        }
    }
    Ok(p)
}

// Continue in tau at fixed xi > 0.
fn continue_in_tau(n: u32, xi: f64, tau0: f64, tau1: f64, p0: Complex64) -> Result<Complex64> {
    let (mut tau, mut p) = (tau0, p0);
    let mut step = (tau1 - tau0).min(0.05);
    while tau < tau1 {
        let h = step.min(tau1 - tau);
        let (_, gp, _) = g_tilde(n, tau, xi, p);
        // dG/dtau = -p
        let guess = p + p / gp * h;
        match newton_tilde(n, tau + h, xi, guess) {
            Some(q) if in_first_quadrant(q) && (q - p).norm() < 0.2 => {
                p = q;
                tau += h;
                step = (step * 1.5).min(0.2);
            }
            _ => {
                step *= 0.5;
                if step < 1e-12 {
                    return Err(Error::ContinuationFailure { xi, reason: "step size underflow in tau" });
                }
            }
        }
    }
    Ok(p)
}

/// Complex eigen-momentum `p~_n(tau, xi)`: the root of
/// `(1 - tau) p + arcsin p - i p xi / (2 sqrt(1 - p^2)) = pi n` continued
/// from `p_n(tau)` at `xi = 0`.
///
/// Past the threshold there is no real root to start from; for `xi > 0` the
/// root is then continued in `tau` from `tau_n - 1/2` at fixed `xi`.
pub fn p_n_tilde(n: u32, tau: f64, xi: f64) -> Result<Complex64> {
    check_mode(n)?;
    if !(tau < 1.0) || !(xi >= 0.0) || !xi.is_finite() {
        return Err(Error::InvalidParameter(format!("need tau < 1 and xi >= 0, got tau = {tau}, xi = {xi}")));
    }
    let tn = tau_threshold(n);
    if tau < tn {
        let p0 = Complex64::new(p_n(n, tau)?, 0.0);
        if xi == 0.0 {
            return Ok(p0);
        }
        return continue_in_xi(n, tau, 0.0, xi, p0);
    }
    if xi == 0.0 {
        return Err(Error::NoEigenvalue { n, tau });
    }
    let start = tn - 0.5;
    let p0 = continue_in_xi(n, start, 0.0, xi, Complex64::new(p_n(n, start)?, 0.0))?;
    continue_in_tau(n, xi, start, tau, p0)
}

/// Residual of the defining equation of `p~_n`.
pub fn p_n_tilde_residual(n: u32, tau: f64, xi: f64, p: Complex64) -> f64 {
    g_tilde(n, tau, xi, p).0.norm()
}

/// `d ln p~_n / d tau = 1 / G_p`.
pub fn dln_ptilde_dtau(n: u32, tau: f64, xi: f64) -> Result<Complex64> {
    let p = p_n_tilde(n, tau, xi)?;
    let (_, gp, _) = g_tilde(n, tau, xi, p);
    Ok(gp.inv())
}
