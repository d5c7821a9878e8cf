//! Closed-form leading terms of `Psi_n` in each regime: adiabatic inside and
//! outside the well, the transition through the threshold `tau_n`, and the
//! three aftermath terms `T0`, `R0`, `G0` past it.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{adaptive, adaptive_real};
use crate::specialfns::{a_fn, f_transition, zeta_fn};
use crate::spectrum::{self, c_n_phase, ModelParams};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeLabel {
    Adiabatic,
    Transition,
    Aftermath,
}

impl RegimeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeLabel::Adiabatic => "adiabatic",
            RegimeLabel::Transition => "transition",
            RegimeLabel::Aftermath => "aftermath",
        }
    }
}

/// The three aftermath terms and the scaled time `z = (tau_n - tau)/(4 eps)^{1/3}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AftermathTerms {
    pub t0: Complex64,
    pub r0: Complex64,
    pub g0: Complex64,
    pub z_scaled: f64,
}

impl AftermathTerms {
    pub fn sum(&self) -> Complex64 {
        self.t0 + self.r0 + self.g0
    }
}

/// Default half-width of the transition band, `5 eps^{1/3}`.
pub fn default_delta_reg(eps: f64) -> f64 {
    5.0 * eps.cbrt()
}

pub fn classify_regime(params: &ModelParams, t: f64) -> RegimeLabel {
    classify_regime_with(params, t, default_delta_reg(params.eps))
}

/// Aftermath strictly past `tau_n`, transition within `delta_reg` below it,
/// adiabatic otherwise.
pub fn classify_regime_with(params: &ModelParams, t: f64, delta_reg: f64) -> RegimeLabel {
    let tau = params.eps * t;
    let tn = params.tau_n();
    if tau > tn {
        RegimeLabel::Aftermath
    } else if tn - tau < delta_reg {
        RegimeLabel::Transition
    } else {
        RegimeLabel::Adiabatic
    }
}

// exp(-(i/eps) int_{tau_n}^{tau} E_n) with the phase reduced first.
fn dynamic_phase(params: &ModelParams, tau: f64) -> Result<Complex64> {
    let int = spectrum::int_e_n(params.n, tau)?;
    Ok(Complex64::from_polar(1.0, (int / params.eps).rem_euclid(2.0 * PI)))
}

/// `c_n sqrt(d ln p_n / d tau) exp(-(i/eps) int_{tau_n}^tau E_n) psi_n(x, tau)`.
pub fn adiabatic_leading(params: &ModelParams, x: f64, t: f64) -> Result<Complex64> {
    params.validate()?;
    let tau = params.eps * t;
    let n = params.n;
    let d = spectrum::dlnpn_dtau(n, tau)?;
    let psi = spectrum::psi_n(n, tau, x)?;
    Ok(c_n_phase(params) * d.sqrt() * dynamic_phase(params, tau)? * psi)
}

/// `int_0^xi sqrt(1 - p~_n(tau, s)^2) ds`, branch with positive real part.
pub fn exterior_decay_integral(n: u32, tau: f64, xi: f64) -> Result<Complex64> {
    if xi == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let one = Complex64::new(1.0, 0.0);
    let mut failure = None;
    let rep = adaptive(
        |s| match spectrum::p_n_tilde(n, tau, s) {
            Ok(p) => (one - p).sqrt() * (one + p).sqrt(),
            Err(e) => {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        &[0.0, 0.5 * xi, xi],
        1e-13,
        1e-12,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(rep.require(1e-9 * (1.0 + xi), "exterior decay integral")?.value)
}

/// Leading exterior term
/// `c_n sqrt(d ln p~_n / d tau) exp(-(i/eps) int E_n) phi_n(xi, tau)` with
/// `phi_n = (-1)^{n+1} p~_n exp(-(1/eps) int_0^xi sqrt(1 - p~_n^2) - i xi/2)`.
pub fn outside_leading(params: &ModelParams, x: f64, t: f64) -> Result<Complex64> {
    params.validate()?;
    let eps = params.eps;
    let tau = eps * t;
    let n = params.n;
    let xi = eps * (x - (1.0 - tau));
    if xi < 0.0 {
        return Err(Error::InvalidParameter(format!("x = {x} lies inside the well")));
    }
    let p = spectrum::p_n_tilde(n, tau, xi)?;
    let dl = spectrum::dln_ptilde_dtau(n, tau, xi)?;
    let w = exterior_decay_integral(n, tau, xi)?;
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let phi = sign * p * (-w / eps - I * (0.5 * xi)).exp();
    Ok(c_n_phase(params) * dl.sqrt() * dynamic_phase(params, tau)? * phi)
}

/// `Z_n = ((3 / 4 eps) int_{tau_n}^{tau} E_n)^{1/3}`, non-negative for `tau <= tau_n`.
pub fn big_z(params: &ModelParams, tau: f64) -> Result<f64> {
    let int = -spectrum::int_e_n(params.n, tau)?;
    Ok((0.75 / params.eps * int).max(0.0).cbrt())
}

/// `z_n(tau) = (tau_n - tau) / (4 eps)^{1/3}`.
pub fn z_scaled(params: &ModelParams, tau: f64) -> f64 {
    (params.tau_n() - tau) / (4.0 * params.eps).cbrt()
}

// Below this distance to tau_n the transition term uses its limit form.
const THRESHOLD_LIMIT: f64 = 1e-4;

/// `c_n sqrt((1/Z_n) d ln p_n / d tau) psi_n F(e^{i pi/6} Z_n)`.
pub fn transition_leading(params: &ModelParams, x: f64, t: f64) -> Result<Complex64> {
    params.validate()?;
    let eps = params.eps;
    let tau = eps * t;
    let n = params.n;
    let tn = params.tau_n();
    if tau > tn {
        return Err(Error::NoEigenvalue { n, tau });
    }
    let rot = Complex64::from_polar(1.0, PI / 6.0);
    if tn - tau < THRESHOLD_LIMIT {
        // d ln p_n / d tau ~ tau_n - tau and Z_n ~ z_n, so the prefactor
        // tends to (4 eps)^{1/6} and psi_n to sin x.
        let z = z_scaled(params, tau);
        let psi = if x <= 1.0 - tau { x.sin() } else { spectrum::psi_n(n, tau.min(tn - 1e-12), x)? };
        return Ok(c_n_phase(params) * (4.0 * eps).powf(1.0 / 6.0) * psi * f_transition(rot * z)?);
    }
    let z = big_z(params, tau)?;
    let d = spectrum::dlnpn_dtau(n, tau)?;
    let psi = spectrum::psi_n(n, tau, x)?;
    Ok(c_n_phase(params) * (d / z).sqrt() * psi * f_transition(rot * z)?)
}

/// `f_0 = -sum_{k >= 1} (-1)^k k^{-3/2}`, by Cohen-Villegas-Zagier acceleration
/// of the alternating series.
pub fn f0() -> f64 {
    let m = 40;
    let mut d = (3.0 + 8f64.sqrt()).powi(m);
    d = 0.5 * (d + 1.0 / d);
    let (mut b, mut c, mut s) = (-1.0, -d, 0.0);
    for k in 0..m {
        c = b - c;
        s += c * ((k + 1) as f64).powf(-1.5);
        let kf = k as f64;
        let mf = m as f64;
        b *= (kf + mf) * (kf - mf) / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

/// Coefficient `f_k = (-1)^k k^{-3/2}` for `k > 0`, `f_0` for `k = 0`.
pub fn f_coefficient(k: u64) -> f64 {
    if k == 0 {
        return f0();
    }
    let s = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    s * (k as f64).powf(-1.5)
}

// sum_k f_k ((eps/2)^{2/3} a(z_{n-k}) - i (1 - tau) eps / 16 a''(z_{n-k})).
fn resonance_sum(params: &ModelParams, tau: f64) -> Result<Complex64> {
    let eps = params.eps;
    let scale = (4.0 * eps).cbrt();
    let c1 = (0.5 * eps).powf(2.0 / 3.0);
    let c2 = (1.0 - tau) * eps / 16.0;
    let tn = params.tau_n();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut prev;
    let mut k: u64 = 0;
    loop {
        // tau_{n-k} = tau_n + pi k for any integer index.
        let z = (tn + PI * k as f64 - tau) / scale;
        let term = f_coefficient(k) * (c1 * a_fn(z, 0)? - I * c2 * a_fn(z, 2)?);
        prev = sum;
        sum += term;
        // The tail alternates with smooth magnitudes: stop on a small term
        // and average the last two partial sums.
        if k > params.n as u64 + 4 && term.norm() < 1e-12 * c1 {
            break;
        }
        k += 1;
        if k > 2_000_000 {
            return Err(Error::QuadratureFailure { what: "resonance series", est_error: term.norm() });
        }
    }
    Ok(0.5 * (sum + prev))
}

// Re int_0^inf e^{-2 s d} (e^{i pi/4} zeta(is) + 2 sqrt(s)) ds.
fn gap_integral(d: f64) -> Result<f64> {
    let rot = Complex64::from_polar(1.0, PI / 4.0);
    let s_max = 20.0 / d;
    let mut failure = None;
    let mut breaks = vec![0.0, 1.0];
    let mut b = 4.0;
    while b < s_max {
        breaks.push(b);
        b *= 4.0;
    }
    breaks.push(s_max);
    let mut parts = 0.0;
    for w in breaks.windows(2) {
        let rep = adaptive_real(
            |s| match zeta_fn(Complex64::new(0.0, s)) {
                Ok(z) => (-2.0 * s * d).exp() * (rot * z + 2.0 * s.sqrt()).re,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            w[0],
            w[1],
            1e-12,
        );
        parts += rep.require(1e-8, "gap integral")?.value.re;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(parts)
}

/// The aftermath terms at `(x, t)`, `tau_n <= eps t <= 1`.
pub fn aftermath_terms(params: &ModelParams, x: f64, t: f64) -> Result<AftermathTerms> {
    Ok(aftermath_terms_many(params, &[x], t)?[0])
}

/// Aftermath terms at several `x`; the `x`-independent sums are computed once.
pub fn aftermath_terms_many(params: &ModelParams, xs: &[f64], t: f64) -> Result<Vec<AftermathTerms>> {
    params.validate()?;
    let eps = params.eps;
    let tau = eps * t;
    let tn = params.tau_n();
    if tau < tn || tau > 1.0 {
        return Err(Error::InvalidParameter(format!("aftermath needs tau_n <= tau <= 1, got tau = {tau}")));
    }
    let cn = c_n_phase(params);
    let z = z_scaled(params, tau);
    let ft = f_transition(Complex64::from_polar(1.0, PI / 6.0) * z)?;
    let t0 = (4.0 * eps).powf(1.0 / 6.0) * cn * ft;
    let r0 = cn / PI.powf(1.5) * resonance_sum(params, tau)?;
    let d = tau - tn;
    let g0 = if d <= eps.cbrt() {
        Complex64::new(0.0, 0.0)
    } else {
        I * cn * (2.0 / PI).sqrt() * eps / d * gap_integral(d)?
    };
    Ok(xs
        .iter()
        .map(|&x| {
            let s = x.sin();
            AftermathTerms { t0: t0 * s, r0: r0 * s, g0: g0 * s, z_scaled: z }
        })
        .collect())
}

pub fn aftermath_sum(params: &ModelParams, x: f64, t: f64) -> Result<Complex64> {
    Ok(aftermath_terms(params, x, t)?.sum())
}

/// Leading term of the regime that `t` falls in.
pub fn best_leading(params: &ModelParams, x: f64, t: f64) -> Result<(Complex64, RegimeLabel)> {
    let label = classify_regime(params, t);
    let tau = params.eps * t;
    let outside = x > 1.0 - tau;
    let v = match label {
        RegimeLabel::Adiabatic if outside => outside_leading(params, x, t)?,
        RegimeLabel::Adiabatic => adiabatic_leading(params, x, t)?,
        RegimeLabel::Transition => transition_leading(params, x, t)?,
        RegimeLabel::Aftermath => aftermath_sum(params, x, t)?,
    };
    Ok((v, label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavefield::{action_tilde, WaveField};
    use crate::branchfns::CxPoint;
    use proptest::prelude::*;

    fn params(eps: f64, n: u32) -> ModelParams {
        ModelParams::new(eps, n).unwrap()
    }

    #[test]
    fn regime_rule() {
        let p = params(0.05, 2);
        let tn = p.tau_n();
        let d = default_delta_reg(p.eps);
        let at = |tau: f64| classify_regime(&p, tau / p.eps);
        assert_eq!(at(tn - 2.0 * d), RegimeLabel::Adiabatic);
        assert_eq!(at(tn), RegimeLabel::Transition);
        assert_eq!(at(tn - 0.5 * d), RegimeLabel::Transition);
        assert_eq!(at(tn + 0.5), RegimeLabel::Aftermath);
    }

    #[test]
    fn f0_value() {
        // eta(3/2) = (1 - 2^{-1/2}) zeta(3/2)
        let zeta32 = 2.612_375_348_685_488;
        assert!((f0() - (1.0 - 0.5f64.sqrt()) * zeta32).abs() < 1e-12);
        // Averaged partial sums of the alternating series as a second check.
        let mut s = 0.0;
        let mut prev = 0.0;
        for k in 1..=200_000u64 {
            prev = s;
            s -= f_coefficient(k);
        }
        assert!((0.5 * (s + prev) - f0()).abs() < 1e-9);
    }

    #[test]
    fn adiabatic_magnitude() {
        let p = params(0.1, 1);
        let tau = -2.0;
        let pn = spectrum::p_n(1, tau).unwrap();
        let x = 0.5 * PI / pn;
        let v = adiabatic_leading(&p, x, tau / p.eps).unwrap();
        let d = spectrum::dlnpn_dtau(1, tau).unwrap();
        assert!((v.norm() - d.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn exterior_decay_matches_action_identity() {
        // tau + S~(p~) = int E + int_0^xi Q0(p~) + 2 tau_n - 3, Q0 = i sqrt(1 - p^2).
        let (n, tau) = (1, -2.0);
        for xi in [0.3, 1.0, 2.5] {
            let p = spectrum::p_n_tilde(n, tau, xi).unwrap();
            let s = action_tilde(CxPoint::c0(p).unwrap(), tau, n, xi).unwrap().value;
            let tn = spectrum::tau_threshold(n);
            let lhs = tau + s - spectrum::int_e_n(n, tau).unwrap() - 2.0 * tn + 3.0;
            let w = exterior_decay_integral(n, tau, xi).unwrap();
            assert!((lhs - I * w).norm() < 1e-9, "{lhs} {w}");
        }
    }

    #[test]
    fn outside_leading_small_xi_and_decay() {
        let p = params(0.05, 1);
        let tau = -2.0;
        let t = tau / p.eps;
        let edge = 1.0 - tau;
        // xi = eps X with X fixed: matches the exterior eigenfunction branch.
        let x = edge + 0.1;
        let a = outside_leading(&p, x, t).unwrap();
        let b = adiabatic_leading(&p, x, t).unwrap();
        assert!((a / b - 1.0).norm() < 0.01, "{}", a / b);
        let mut last = f64::INFINITY;
        for k in 0..30 {
            let v = outside_leading(&p, edge + 0.2 * k as f64, t).unwrap().norm();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn transition_reduces_to_adiabatic() {
        for n in [1, 2] {
            let mut devs = vec![];
            for eps in [0.02, 0.01] {
                let p = params(eps, n);
                let tau = p.tau_n() - 0.3;
                let pn = spectrum::p_n(n, tau).unwrap();
                let x = 0.5 * PI / pn;
                let a = transition_leading(&p, x, tau / eps).unwrap();
                let b = adiabatic_leading(&p, x, tau / eps).unwrap();
                let z = big_z(&p, tau).unwrap();
                let dev = (a / b - 1.0).norm();
                assert!(dev < 2.0 * z.powi(-3), "{dev} {z}");
                devs.push(dev);
            }
            assert!(devs[1] < devs[0]);
        }
        let p = params(0.05, 1);
        assert!(big_z(&p, p.tau_n()).unwrap() == 0.0);
    }

    #[test]
    fn transition_meets_aftermath_at_threshold() {
        let p = params(0.05, 2);
        let t = p.tau_n() / p.eps;
        let a = transition_leading(&p, 0.7, t).unwrap();
        let b = aftermath_terms(&p, 0.7, t).unwrap();
        assert!((a - b.t0).norm() < 1e-12 * a.norm());
        assert_eq!(b.g0, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn regime_overlap_consistency() {
        for eps in [0.05, 0.025] {
            let p = params(eps, 1);
            let d = default_delta_reg(eps);
            for frac in [1.0, 1.5, 2.0] {
                let tau = p.tau_n() - frac * d;
                for x in [0.5, 1.5] {
                    let a = transition_leading(&p, x, tau / eps).unwrap();
                    let b = adiabatic_leading(&p, x, tau / eps).unwrap();
                    assert!((a - b).norm() <= 0.1 * b.norm().max(eps), "{eps} {frac} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn late_time_transition_term() {
        // T0 ~ -i c_n eps sin x / (2 (tau - tau_n)^{5/2}) once z is large.
        let p = params(0.01, 1);
        let d = 0.8;
        let tau = p.tau_n() + d;
        let terms = aftermath_terms(&p, 1.0, tau / p.eps).unwrap();
        let lead = -I * c_n_phase(&p) * p.eps * 1f64.sin() / (2.0 * d.powf(2.5));
        assert!((terms.t0 / lead - 1.0).norm() < 0.1, "{}", terms.t0 / lead);
    }

    #[test]
    fn aftermath_terms_are_order_eps() {
        // Midway between tau_2 and tau_1, every term scales like eps.
        let n = 2;
        let mut ratios = vec![];
        for eps in [0.02, 0.01] {
            let p = params(eps, n);
            let tau = 0.5 * (spectrum::tau_threshold(2) + spectrum::tau_threshold(1));
            let a = aftermath_terms(&p, 1.0, tau / eps).unwrap();
            ratios.push([a.t0.norm() / eps, a.r0.norm() / eps, a.g0.norm() / eps]);
        }
        for k in 0..3 {
            let q = ratios[1][k] / ratios[0][k];
            assert!(ratios[0][k] > 0.0 && q > 0.5 && q < 2.0, "{k} {ratios:?}");
        }
    }

    #[test]
    fn resonance_spike_term() {
        let n = 3;
        let eps = 0.05;
        let p = params(eps, n);
        let tau = spectrum::tau_threshold(1);
        let x = 1.0;
        let r0 = aftermath_terms(&p, x, tau / eps).unwrap().r0;
        let z1 = (tau - tau) / (4.0 * eps).cbrt();
        let single = x.sin() / PI.powf(1.5) * (0.5 * eps).powf(2.0 / 3.0) * f_coefficient(2) * a_fn(z1, 0).unwrap();
        assert!((r0.norm() - single.norm()).abs() <= eps, "{} {}", r0.norm(), single.norm());
    }

    #[test]
    fn adiabatic_order_against_contour() {
        let mut errs = vec![];
        for eps in [0.1, 0.05] {
            let p = params(eps, 1);
            let wf = WaveField::new(p).unwrap();
            let tau = -2.0;
            let t = tau / eps;
            let xs: Vec<f64> = (1..=6).map(|k| 0.5 * k as f64).collect();
            let c = wf.default_inside_contour(tau, 3.0).unwrap();
            let ex = wf.psi_inside_many(&xs, t, &c).unwrap();
            let e = xs
                .iter()
                .zip(&ex)
                .map(|(&x, s)| (s.psi - adiabatic_leading(&p, x, t).unwrap()).norm())
                .fold(0.0, f64::max);
            errs.push(e);
        }
        let order = (errs[0] / errs[1]).log2();
        assert!((order - 1.0).abs() < 0.3, "{errs:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn regimes_partition(tau in -10.0f64..1.0, n in 1u32..4) {
            let p = params(0.05, n);
            let label = classify_regime(&p, tau / p.eps);
            let tn = p.tau_n();
            let d = default_delta_reg(p.eps);
            let expect = if tau > tn { RegimeLabel::Aftermath } else if tn - tau < d { RegimeLabel::Transition } else { RegimeLabel::Adiabatic };
            prop_assert_eq!(label, expect);
        }
    }
}
