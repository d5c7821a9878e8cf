//! Airy function, the transition function `F`, the aftermath function `a`
//! and the regularized half-integer sum `zeta`.

use std::f64::consts::{FRAC_PI_3, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::adaptive;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Accuracy controls for series / asymptotic switching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesControl {
    pub truncation_order: usize,
    /// Largest `|s|` handled by the Maclaurin series.
    pub switch_radius: f64,
    pub target_abs_tol: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { truncation_order: 60, switch_radius: 3.0, target_abs_tol: 1e-14 }
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_abs_tol > 0.0) || !(self.switch_radius > 0.0) || self.truncation_order == 0 {
            return Err(Error::InvalidParameter(format!("bad series control {self:?}")));
        }
        Ok(())
    }
}

// Ai(0) and -Ai'(0).
const AI0: f64 = 0.355_028_053_887_817_2;
const AIP0: f64 = 0.258_819_403_792_806_8;

/// Beyond this modulus the asymptotic expansion is used directly.
const AIRY_ASYMPTOTIC_RADIUS: f64 = 25.0;

fn airy_series(s: Complex64, order: usize) -> (Complex64, Complex64, f64) {
    // Ai = c1 f - c2 g with f = sum s^{3k} A_k, g = sum s^{3k+1} B_k.
    let s3 = s * s * s;
    let (mut f, mut g) = (Complex64::new(1.0, 0.0), s);
    let (mut fp, mut gp) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let mut tf = Complex64::new(1.0, 0.0);
    let mut tg = s;
    let mut size: f64 = 1.0 + s.norm();
    for k in 0..order {
        let kf = k as f64;
        tf *= s3 / ((3.0 * kf + 2.0) * (3.0 * kf + 3.0));
        tg *= s3 / ((3.0 * kf + 3.0) * (3.0 * kf + 4.0));
        f += tf;
        g += tg;
        // derivatives: d/ds s^{3k+3} = (3k+3) s^{3k+2}
        if s.norm() > 0.0 {
            fp += tf * (3.0 * kf + 3.0) / s;
            gp += tg * (3.0 * kf + 4.0) / s;
        }
        size = size.max(tf.norm()).max(tg.norm());
        if tf.norm() + tg.norm() < 1e-18 * (f.norm() + g.norm()) {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * fp - AIP0 * gp, size * (AI0 + AIP0) * f64::EPSILON)
}

// Ai and Ai' for |arg s| <= 2pi/3, |s| moderate, from the Laplace-type integral
// Ai(s) = e^{-zeta}/pi int_0^inf exp(-sqrt(s) t^2) cos(t^3/3) dt.
fn airy_laplace(s: Complex64, tol: f64) -> Result<(Complex64, Complex64)> {
    let rs = s.sqrt();
    let zeta = 2.0 / 3.0 * s * rs;
    let decay = rs.re;
    let tmax = (42.0 / decay).sqrt();
    let mut breaks = vec![0.0];
    let nb = 8;
    for k in 1..=nb {
        breaks.push(tmax * k as f64 / nb as f64);
    }
    let mut vals = [Complex64::new(0.0, 0.0); 2];
    let (v, err, _) = crate::quad::adaptive_vec(
        |t, out| {
            let e = (-rs * t * t).exp() * (t * t * t / 3.0).cos();
            out[0] = e;
            out[1] = e * (-rs - t * t / (2.0 * rs));
        },
        2,
        &breaks,
        0.0,
        tol,
        4000,
    );
    vals.copy_from_slice(&v);
    let scale = vals[0].norm().max(vals[1].norm());
    if err > 1e3 * tol * scale.max(1e-300) {
        return Err(Error::QuadratureFailure { what: "Airy Laplace integral", est_error: err });
    }
    let pref = (-zeta).exp() / PI;
    Ok((pref * vals[0], pref * vals[1]))
}

fn airy_asymptotic(s: Complex64) -> (Complex64, Complex64) {
    let rs = s.sqrt();
    let q = rs.sqrt();
    let zeta = 2.0 / 3.0 * s * rs;
    let (mut su, mut sv) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    let mut u = 1.0;
    let mut zk = Complex64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        zk /= -zeta;
        let tu = zk * u;
        if tu.norm() > last || tu.norm() < 1e-18 {
            break;
        }
        last = tu.norm();
        su += tu;
        sv += zk * v;
    }
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    (e / q * su, -e * q * sv)
}

fn airy_sector(s: Complex64, ctrl: &SeriesControl) -> Result<(Complex64, Complex64)> {
    if s.norm() >= AIRY_ASYMPTOTIC_RADIUS {
        Ok(airy_asymptotic(s))
    } else {
        airy_laplace(s, ctrl.target_abs_tol.max(1e-15))
    }
}

/// `Ai(s)` and `Ai'(s)` together.
pub fn airy_pair(s: Complex64, ctrl: &SeriesControl) -> Result<(Complex64, Complex64)> {
    ctrl.validate()?;
    if !s.is_finite() || s.norm() > 1e3 {
        return Err(Error::AccuracyLoss { what: "Airy function", at: s });
    }
    if s.norm() <= ctrl.switch_radius {
        let (a, ap, err) = airy_series(s, ctrl.truncation_order.max(10));
        if err > ctrl.target_abs_tol.max(1e-13) {
            return Err(Error::AccuracyLoss { what: "Airy series", at: s });
        }
        return Ok((a, ap));
    }
    if s.arg().abs() <= 2.0 * FRAC_PI_3 {
        return airy_sector(s, ctrl);
    }
    // Ai(s) = -w Ai(w s) - w^2 Ai(w^2 s), w = e^{2 pi i / 3}.
    let w = Complex64::from_polar(1.0, 2.0 * FRAC_PI_3);
    let w2 = w * w;
    let (a1, d1) = airy_sector(w * s, ctrl)?;
    let (a2, d2) = airy_sector(w2 * s, ctrl)?;
    Ok((-w * a1 - w2 * a2, -w2 * d1 - w * d2))
}

/// `Ai(s)` (`derivative = 0`) or `Ai'(s)` (`derivative = 1`).
pub fn airy_ai(s: Complex64, derivative: u8) -> Result<Complex64> {
    let (a, ap) = airy_pair(s, &SeriesControl::default())?;
    match derivative {
        0 => Ok(a),
        1 => Ok(ap),
        d => Err(Error::InvalidParameter(format!("Airy derivative order {d}"))),
    }
}

/// `F(z) = sqrt(pi) e^{-2z^3/3 - i pi/12} (z Ai(z^2) - Ai'(z^2))`.
pub fn f_transition(z: Complex64) -> Result<Complex64> {
    let (a, ap) = airy_pair(z * z, &SeriesControl::default())?;
    let phase = -2.0 * z * z * z / 3.0 - I * (PI / 12.0);
    Ok(PI.sqrt() * phase.exp() * (z * a - ap))
}

fn gamma(x: f64) -> f64 {
    // Lanczos, g = 7, n = 9.
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

const A_ASYMPTOTIC_RADIUS: f64 = 12.0;

fn a_asymptotic(z: f64, d: u8) -> Option<Complex64> {
    // a^{(d)}(z) ~ 1/2 sum_m (-1)^m i^d Gamma(3m/2 + d + 1) / (3^m m!) (-iz)^{-(3m/2 + d + 1)}
    let miz = Complex64::new(0.0, -z);
    let id = I.powu(d as u32);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut fact = 1.0;
    let mut last = f64::INFINITY;
    for m in 0..40 {
        if m > 0 {
            fact *= 3.0 * m as f64;
        }
        let beta = 1.5 * m as f64 + d as f64 + 1.0;
        let term = id * gamma(beta) / fact * miz.powf(-beta) * if m % 2 == 0 { 1.0 } else { -1.0 };
        if term.norm() > last {
            break;
        }
        last = term.norm();
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            return Some(0.5 * sum);
        }
    }
    if last < 1e-14 * sum.norm() {
        Some(0.5 * sum)
    } else {
        None
    }
}

/// `a(z) = int_0^inf exp(-u^3/3 + i z u^2) u du` and its first two
/// derivatives in `z`, for real `z`.
pub fn a_fn(z: f64, derivative: u8) -> Result<Complex64> {
    if derivative > 2 {
        return Err(Error::InvalidParameter(format!("a-function derivative order {derivative}")));
    }
    if !z.is_finite() {
        return Err(Error::InvalidParameter(format!("a-function argument {z}")));
    }
    if z.abs() >= A_ASYMPTOTIC_RADIUS {
        if let Some(v) = a_asymptotic(z, derivative) {
            return Ok(v);
        }
    }
    // Rotate the ray so that both exponentials decay.
    let phi = if z >= 0.0 { PI / 12.0 } else { -PI / 12.0 };
    let rot = Complex64::from_polar(1.0, phi);
    let c3 = (3.0 * phi).cos();
    let c2 = z.abs() * (2.0 * phi).abs().sin();
    let rmax = (126.0 / c3).cbrt().min(if c2 > 0.0 { (45.0 / c2).sqrt() } else { f64::INFINITY });
    let breaks: Vec<f64> = (0..=10).map(|k| rmax * k as f64 / 10.0).collect();
    let rep = adaptive(
        |r| {
            let u = rot * r;
            let u2 = u * u;
            let e = (-u2 * u / 3.0 + I * z * u2).exp() * u * rot;
            match derivative {
                0 => e,
                1 => e * I * u2,
                _ => -e * u2 * u2,
            }
        },
        &breaks,
        1e-15,
        1e-14,
    );
    rep.require(1e-10, "a-function integral").map(|r| r.value)
}

/// `zeta(t) = lim_L (sum_{l<L} (l + 1/2 - t)^{-1/2} - 2 sqrt(L))`.
pub fn zeta_fn(t: Complex64) -> Result<Complex64> {
    if !t.is_finite() {
        return Err(Error::InvalidParameter(format!("zeta argument {t}")));
    }
    if t.im.abs() <= 1e-14 * (1.0 + t.re.abs()) && t.re >= 0.5 - 1e-14 {
        return Err(Error::OnCut(t));
    }
    let l0 = 100usize.max((10.0 * t.norm()).ceil() as usize);
    let mut sum = Complex64::new(0.0, 0.0);
    for l in 0..l0 {
        sum += (Complex64::new(l as f64 + 0.5, 0.0) - t).sqrt().inv();
    }
    let x = Complex64::new(l0 as f64 + 0.5, 0.0) - t;
    let rx = x.sqrt();
    let f = rx.inv();
    let f1 = -0.5 * f / x;
    let f3 = -1.875 * f / (x * x * x);
    Ok(sum - 2.0 * rx + 0.5 * f - f1 / 12.0 + f3 / 720.0)
}
