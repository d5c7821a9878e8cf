//! Single-valued branches of the momentum functions `Q0`, `l0`, `l1`, `rho0`
//! and the closed-form primitive of `l0`.
//!
//! `C0` is the plane cut along `(-inf, -1] U [1, inf)`, `C1` the plane cut
//! along `(-inf, 1]`. Boundary values on a cut are requested explicitly with
//! [`Sheet::RealPlusI0`] / [`Sheet::RealMinusI0`] rather than inferred from
//! the sign of a floating-point zero.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CxValue = Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Which cut plane (or which boundary limit of it) a point refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sheet {
    C0,
    C1,
    /// Real point approached from the upper half-plane.
    RealPlusI0,
    /// Real point approached from the lower half-plane.
    RealMinusI0,
}

/// Side from which a point on a cut is approached.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    Above,
    Below,
}

impl Limit {
    fn sign(self) -> f64 {
        match self {
            Limit::Above => 1.0,
            Limit::Below => -1.0,
        }
    }
}

/// A complex momentum with explicit branch bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CxPoint {
    pub re: f64,
    pub im: f64,
    pub sheet: Sheet,
}

impl CxPoint {
    pub fn new(re: f64, im: f64, sheet: Sheet) -> Result<Self> {
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite point {re}{im:+}i")));
        }
        let on_axis = im == 0.0;
        let bad = match sheet {
            Sheet::C0 => on_axis && re.abs() > 1.0,
            Sheet::C1 => on_axis && re < 1.0,
            Sheet::RealPlusI0 | Sheet::RealMinusI0 => !on_axis,
        };
        if bad {
            return Err(Error::BranchViolation { re, im, sheet });
        }
        Ok(Self { re, im, sheet })
    }

    /// Interior point of `C0`.
    pub fn c0(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im, Sheet::C0)
    }

    /// Interior point of `C1`.
    pub fn c1(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im, Sheet::C1)
    }

    /// `x + i0`.
    pub fn above(x: f64) -> Self {
        Self { re: x, im: 0.0, sheet: Sheet::RealPlusI0 }
    }

    /// `x - i0`.
    pub fn below(x: f64) -> Self {
        Self { re: x, im: 0.0, sheet: Sheet::RealMinusI0 }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// Point reflected through the origin, boundary tags swapped.
    pub fn neg(&self) -> Self {
        let sheet = match self.sheet {
            Sheet::RealPlusI0 => Sheet::RealMinusI0,
            Sheet::RealMinusI0 => Sheet::RealPlusI0,
            s => s,
        };
        Self { re: -self.re, im: -self.im, sheet }
    }

    /// Complex conjugate point, boundary tags swapped.
    pub fn conj(&self) -> Self {
        let sheet = match self.sheet {
            Sheet::RealPlusI0 => Sheet::RealMinusI0,
            Sheet::RealMinusI0 => Sheet::RealPlusI0,
            s => s,
        };
        Self { re: self.re, im: -self.im, sheet }
    }

    fn limit(&self) -> Limit {
        match self.sheet {
            Sheet::RealMinusI0 => Limit::Below,
            _ => Limit::Above,
        }
    }

    // A point tagged for the other plane is still fine as long as it is off
    // this plane's cut.
    fn check_c0(&self) -> Result<()> {
        match self.sheet {
            Sheet::C1 if self.im == 0.0 && self.re.abs() > 1.0 => {
                Err(Error::BranchViolation { re: self.re, im: self.im, sheet: Sheet::C0 })
            }
            _ => Ok(()),
        }
    }

    fn check_c1(&self) -> Result<()> {
        match self.sheet {
            Sheet::C0 if self.im == 0.0 && self.re < 1.0 => {
                Err(Error::BranchViolation { re: self.re, im: self.im, sheet: Sheet::C1 })
            }
            _ => Ok(()),
        }
    }
}

// Raw evaluators. A point with `im == 0` on a cut is read as the limit from
// the given side; elsewhere the side is ignored.

fn on_c0_cut(p: Complex64) -> bool {
    p.im == 0.0 && p.re.abs() > 1.0
}

/// `Q0(p)`, the branch of `sqrt(p^2 - 1)` with `Q0(0) = i`.
pub fn q0_raw(p: Complex64, side: Limit) -> Complex64 {
    if on_c0_cut(p) {
        let x = p.re;
        let r = ((x - 1.0) * (x + 1.0)).sqrt();
        return Complex64::new(side.sign() * x.signum() * r, 0.0);
    }
    I * (Complex64::new(1.0, 0.0) - p).sqrt() * (Complex64::new(1.0, 0.0) + p).sqrt()
}

fn acosh_real(x: f64) -> f64 {
    // x >= 1
    ((x - 1.0).sqrt() * (x + 1.0).sqrt() + x).ln()
}

// arcsin on the closed first quadrant; the sum inside the log has no
// cancellation there.
fn asin_q1(w: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let s = (one - w).sqrt() * (one + w).sqrt();
    I * (s - I * w).ln()
}

/// `l0(p) = 2 arcsin p`, analytic in `C0`, `l0(0) = 0`.
pub fn l0_raw(p: Complex64, side: Limit) -> Complex64 {
    if on_c0_cut(p) {
        let a = acosh_real(p.re.abs());
        return Complex64::new(PI * p.re.signum(), side.sign() * 2.0 * a);
    }
    let w = Complex64::new(p.re.abs(), p.im.abs());
    let r = 2.0 * asin_q1(w);
    match (p.re < 0.0, p.im < 0.0) {
        (false, false) => r,
        (true, false) => -r.conj(),
        (false, true) => r.conj(),
        (true, true) => -r,
    }
}

/// `l0'(p) = 2i / Q0(p)`.
pub fn l0_prime_raw(p: Complex64, side: Limit) -> Complex64 {
    2.0 * I / q0_raw(p, side)
}

// Maclaurin coefficients of 2 arcsin: 2 (2k)! / (4^k (k!)^2 (2k+1)).
fn int_l0_series(p: Complex64) -> Complex64 {
    let p2 = p * p;
    let mut c = 2.0;
    let mut pw = p2;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..40 {
        let kf = k as f64;
        let term = pw * (c / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0)));
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
        c *= (2.0 * kf + 1.0) * (2.0 * kf + 2.0) / (4.0 * (kf + 1.0) * (kf + 1.0));
        pw *= p2;
    }
    sum
}

/// `int_0^p l0 = p l0(p) - 2i Q0(p) - 2`.
pub fn int_l0_raw(p: Complex64, side: Limit) -> Complex64 {
    if p.norm() < 0.25 {
        return int_l0_series(p);
    }
    p * l0_raw(p, side) - 2.0 * I * q0_raw(p, side) - 2.0
}

/// `rho0 = (Q0 - p)/(Q0 + p) = exp(i l0)`.
pub fn rho0_raw(p: Complex64, side: Limit) -> Complex64 {
    let q = q0_raw(p, side);
    let plus = q + p;
    let minus = q - p;
    // (Q0 + p)(Q0 - p) = -1, so pick the form without cancellation.
    if plus.norm() >= minus.norm() {
        -1.0 / (plus * plus)
    } else {
        -(minus * minus)
    }
}

fn on_c1_cut(p: Complex64) -> bool {
    p.im == 0.0 && p.re < 1.0
}

/// `Q1(p) = sqrt(p - 1) sqrt(p + 1)`, analytic in `C1`, equal to `Q0` in the
/// upper half-plane.
pub fn q1_raw(p: Complex64, side: Limit) -> Complex64 {
    if on_c1_cut(p) {
        let x = p.re;
        let s = side.sign();
        return if x > -1.0 {
            Complex64::new(0.0, s * ((1.0 - x) * (1.0 + x)).sqrt())
        } else {
            Complex64::new(-((x - 1.0) * (x + 1.0)).sqrt(), 0.0)
        };
    }
    let one = Complex64::new(1.0, 0.0);
    (p - one).sqrt() * (p + one).sqrt()
}

/// Continuation of `l0` from the upper half-plane into `C1`.
pub fn l1_raw(p: Complex64, side: Limit) -> Complex64 {
    if on_c1_cut(p) {
        let x = p.re;
        return match (side, x > -1.0) {
            (Limit::Above, true) => Complex64::new(2.0 * x.asin(), 0.0),
            (Limit::Below, true) => Complex64::new(PI + 2.0 * x.acos(), 0.0),
            (Limit::Above, false) => Complex64::new(-PI, 2.0 * acosh_real(-x)),
            (Limit::Below, false) => Complex64::new(3.0 * PI, 2.0 * acosh_real(-x)),
        };
    }
    let one = Complex64::new(1.0, 0.0);
    let acosh = 2.0 * (((p + one) * 0.5).sqrt() + ((p - one) * 0.5).sqrt()).ln();
    PI + 2.0 * I * acosh
}

/// `l1'(p) = 2i / Q1(p)`.
pub fn l1_prime_raw(p: Complex64, side: Limit) -> Complex64 {
    2.0 * I / q1_raw(p, side)
}

pub fn q0(p: CxPoint) -> Result<CxValue> {
    p.check_c0()?;
    Ok(q0_raw(p.z(), p.limit()))
}

pub fn l0(p: CxPoint) -> Result<CxValue> {
    p.check_c0()?;
    Ok(l0_raw(p.z(), p.limit()))
}

pub fn l0_prime(p: CxPoint) -> Result<CxValue> {
    p.check_c0()?;
    let q = q0_raw(p.z(), p.limit());
    if q == Complex64::new(0.0, 0.0) {
        return Err(Error::PoleAt(p.z()));
    }
    Ok(2.0 * I / q)
}

pub fn int_l0(p: CxPoint) -> Result<CxValue> {
    p.check_c0()?;
    Ok(int_l0_raw(p.z(), p.limit()))
}

pub fn rho0(p: CxPoint) -> Result<CxValue> {
    p.check_c0()?;
    let z = p.z();
    let q = q0_raw(z, p.limit());
    // Q0 + p never vanishes in C0; guard anyway against overflow far out.
    if (q + z).norm() == 0.0 && (q - z).norm() == 0.0 {
        return Err(Error::PoleAt(z));
    }
    Ok(rho0_raw(z, p.limit()))
}

pub fn l1(p: CxPoint) -> Result<CxValue> {
    p.check_c1()?;
    Ok(l1_raw(p.z(), p.limit()))
}

pub fn q1(p: CxPoint) -> Result<CxValue> {
    p.check_c1()?;
    Ok(q1_raw(p.z(), p.limit()))
}

pub fn l1_prime(p: CxPoint) -> Result<CxValue> {
    p.check_c1()?;
    let q = q1_raw(p.z(), p.limit());
    if q == Complex64::new(0.0, 0.0) {
        return Err(Error::PoleAt(p.z()));
    }
    Ok(2.0 * I / q)
}
