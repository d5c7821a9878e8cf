//! Solutions of the difference equation `L(p + eps/2) - L(p - eps/2) = eps l'(p)`
//! built from the cosecant-squared kernel, and everything derived from them:
//! the periodic part `P = L0 - L1`, `R0 = exp(i/eps int_0^p L0)`, the boundary
//! function `R` used by the Ansatz, and the amplitude `A`.
//!
//! The kernel integral along `zeta = p + eps h(s)`, `Im h = s`, reads
//! `(pi / 2i) int l(p + eps h) h'(s) / cos^2(pi h) ds`; on a straight vertical
//! line it collapses to `(pi/2) int sech^2(pi s) l(p + i eps s) ds`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::branchfns::{int_l0_raw, l0_prime_raw, l0_raw, l1_prime_raw, l1_raw, CxPoint, Limit, Sheet};
use crate::error::{Error, Result};
use crate::quad::{adaptive, GaussRule, QuadratureReport};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Kernel truncation: `sech^2(pi s) < 1e-32` beyond this.
pub const S_MAX: f64 = 12.0;
/// Trapezoid step of the straight-line kernel.
const TRAP_STEP: f64 = 1.0 / 32.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContourKind {
    VerticalLine,
    BentVertical,
    Ray,
    SteepestDescent,
    /// Vertical approach to `p = 1` from below followed by the upper edge
    /// of the cut `[1, inf)`.
    CutEdge,
}

/// A parametrized integration path in the complex momentum plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub kind: ContourKind,
    pub anchor: CxPoint,
    /// Polyline vertices (traced contours) or direction sample (rays).
    pub nodes: Vec<CxPoint>,
    pub truncation_height: f64,
}

/// How `L0` may be evaluated for points to the right of `1 - eps/4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContourPolicy {
    /// Straight kernel where admissible, difference-equation shifts elsewhere.
    Auto,
    /// Kernel integral only (bent contours), never the shift identity.
    DirectOnly,
}

/// Precomputed kernel data for one value of `eps`.
#[derive(Debug, Clone)]
pub struct SymbolField {
    eps: f64,
    clearance: f64,
    // (s, (pi/2) sech^2(pi s) * step)
    trap: Vec<(f64, f64)>,
    k0: Complex64,
}

fn quadrant(p: Complex64, side: Limit) -> (Complex64, bool, bool) {
    let below = p.im < 0.0 || (p.im == 0.0 && side == Limit::Below);
    (Complex64::new(p.re.abs(), p.im.abs()), p.re < 0.0, below)
}

impl SymbolField {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps = {eps} must lie in (0, 1)")));
        }
        let n = (S_MAX / TRAP_STEP).round() as i64;
        let trap: Vec<(f64, f64)> = (-n..=n)
            .map(|k| {
                let s = k as f64 * TRAP_STEP;
                let c = (PI * s).cosh();
                (s, 0.5 * PI / (c * c) * TRAP_STEP)
            })
            .collect();
        let mut f = Self { eps, clearance: 0.25 * eps, trap, k0: Complex64::new(0.0, 0.0) };
        f.k0 = f.straight(|z| int_l0_raw(z, Limit::Above), Complex64::new(0.0, 0.0));
        Ok(f)
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Clearance kept between contours and the branch points.
    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    fn straight<F: Fn(Complex64) -> Complex64>(&self, g: F, p: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(s, w) in &self.trap {
            acc += g(p + I * (self.eps * s)) * w;
        }
        acc
    }

    // Same sum on the doubled step, for an error estimate.
    fn straight_coarse<F: Fn(Complex64) -> Complex64>(&self, g: F, p: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(s, w) in self.trap.iter().step_by(2) {
            acc += g(p + I * (self.eps * s)) * (2.0 * w);
        }
        acc
    }

    // Kernel along p + eps h(s) with h = kappa s + i s for s in [-drop, 0] and a
    // straight vertical continuation elsewhere. Adaptive because the bend
    // brings the poles of 1/cos^2 closer to the path.
    fn bent<F: Fn(Complex64) -> Complex64>(&self, g: F, p: Complex64, kappa: f64, drop: f64) -> QuadratureReport {
        let eps = self.eps;
        let h = |s: f64| -> (Complex64, Complex64) {
            if s >= 0.0 {
                (Complex64::new(0.0, s), I)
            } else if s >= -drop {
                (Complex64::new(kappa * s, s), Complex64::new(kappa, 1.0))
            } else {
                (Complex64::new(-kappa * drop, s), I)
            }
        };
        let mut breaks = vec![-S_MAX];
        if drop < S_MAX {
            breaks.push(-drop);
        }
        if kappa > 0.0 {
            for k in (1..=4).rev() {
                let b = -(k as f64) / (2.0 * kappa);
                if b > -drop.min(S_MAX) {
                    breaks.push(b);
                }
            }
        }
        breaks.extend_from_slice(&[0.0, 1.0, S_MAX]);
        adaptive(
            |s| {
                let (hs, dh) = h(s);
                let c = (PI * hs).cos();
                g(p + eps * hs) * dh / (c * c) * (PI / (2.0 * I))
            },
            &breaks,
            1e-14,
            1e-13,
        )
    }

    // L0 on the closed first quadrant.
    fn l0_q1(&self, w: Complex64, policy: ContourPolicy) -> Result<QuadratureReport> {
        let edge = 1.0 - self.clearance;
        let g = |z: Complex64| l0_raw(z, Limit::Above);
        if w.re <= edge {
            let v = self.straight(g, w);
            let err = (v - self.straight_coarse(g, w)).norm();
            return Ok(QuadratureReport { value: v, est_error: err, nodes_used: self.trap.len() });
        }
        match policy {
            ContourPolicy::DirectOnly => {
                if w.im <= 0.0 {
                    return Err(Error::ContourClash(w));
                }
                let kappa = (w.re - edge) / w.im;
                if kappa > 64.0 {
                    return Err(Error::ContourClash(w));
                }
                Ok(self.bent(g, w, kappa, w.im / self.eps))
            }
            ContourPolicy::Auto => {
                let m = ((w.re - edge) / self.eps).ceil().max(1.0) as usize;
                let base = w - self.eps * m as f64;
                let mut r = self.l0_q1(base, ContourPolicy::Auto)?;
                for j in 1..=m {
                    let q = w - self.eps * (j as f64 - 0.5);
                    if q.im == 0.0 && q.re == 1.0 {
                        return Err(Error::PoleAt(w));
                    }
                    r.value += self.eps * l0_prime_raw(q, Limit::Above);
                }
                Ok(r)
            }
        }
    }

    /// `L0(p)` from the kernel integral along a vertical contour in `C0`.
    pub fn big_l0(&self, p: CxPoint, policy: ContourPolicy) -> Result<QuadratureReport> {
        let side = check_c0(&p)?;
        self.big_l0_raw(p.z(), side, policy)
    }

    pub fn big_l0_raw(&self, p: Complex64, side: Limit, policy: ContourPolicy) -> Result<QuadratureReport> {
        let (w, neg, below) = quadrant(p, side);
        let mut r = self.l0_q1(w, policy)?;
        // L0 is odd and conjugate-symmetric.
        if neg != below {
            r.value = r.value.conj();
        }
        if neg {
            r.value = -r.value;
        }
        Ok(r)
    }

    /// `L1(p)`: the same kernel with the contour crossing the real axis to
    /// the right of `p = 1`.
    pub fn big_l1(&self, p: CxPoint) -> Result<QuadratureReport> {
        let side = check_c1(&p)?;
        self.big_l1_raw(p.z(), side)
    }

    pub fn big_l1_raw(&self, p: Complex64, side: Limit) -> Result<QuadratureReport> {
        let edge = 1.0 + self.clearance;
        let g = |z: Complex64| l1_raw(z, Limit::Above);
        if p.re >= edge {
            let v = self.straight(g, p);
            let err = (v - self.straight_coarse(g, p)).norm();
            return Ok(QuadratureReport { value: v, est_error: err, nodes_used: self.trap.len() });
        }
        let m = ((edge - p.re) / self.eps).ceil().max(1.0) as usize;
        let mut r = self.big_l1_raw(p + self.eps * m as f64, Limit::Above)?;
        for j in 1..=m {
            let q = p + self.eps * (j as f64 - 0.5);
            if q.im == 0.0 && q.re.abs() == 1.0 {
                return Err(Error::PoleAt(p));
            }
            r.value -= self.eps * l1_prime_raw(q, side);
        }
        Ok(r)
    }

    /// The `eps`-periodic function `P = L0 - L1` in the upper half-plane.
    pub fn periodic_p(&self, p: Complex64) -> Result<Complex64> {
        if p.im <= 0.0 {
            return Err(Error::InvalidParameter(format!("P needs Im p > 0, got {p}")));
        }
        let a = self.big_l0_raw(p, Limit::Above, ContourPolicy::Auto)?.value;
        let b = self.big_l1_raw(p, Limit::Above)?.value;
        Ok(a - b)
    }

    /// Fourier coefficients `P_1 .. P_kmax` of
    /// `P(p) = sum_k P_k exp(2 pi i k (p - 1 - eps/2) / eps)`, read off by a
    /// discrete transform over one period on the line `Im p = eps`.
    pub fn periodic_p_fourier(&self, k_max: usize) -> Result<Vec<Complex64>> {
        let n = 32usize.max(4 * k_max);
        let mut samples = Vec::with_capacity(n);
        for j in 0..n {
            let p = Complex64::new(1.0 + 0.5 * self.eps + self.eps * j as f64 / n as f64, self.eps);
            samples.push(self.periodic_p(p)?);
        }
        Ok((1..=k_max)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, v) in samples.iter().enumerate() {
                    acc += v * Complex64::from_polar(1.0, -2.0 * PI * (k * j) as f64 / n as f64);
                }
                acc / n as f64 * (2.0 * PI * k as f64).exp()
            })
            .collect())
    }

    // J = int_0^p L0 on the closed first quadrant.
    fn j_q1(&self, w: Complex64) -> Complex64 {
        let edge = 1.0 - self.clearance;
        if w.re <= edge {
            return self.straight(|z| int_l0_raw(z, Limit::Above), w) - self.k0;
        }
        let m = ((w.re - edge) / self.eps).ceil().max(1.0) as usize;
        let mut v = self.j_q1(w - self.eps * m as f64);
        for j in 1..=m {
            v += self.eps * l0_raw(w - self.eps * (j as f64 - 0.5), Limit::Above);
        }
        v
    }

    /// `J(p) = int_0^p L0(q) dq`, path-independent in `C0`.
    pub fn action_integral(&self, p: CxPoint) -> Result<Complex64> {
        let side = check_c0(&p)?;
        Ok(self.action_integral_raw(p.z(), side))
    }

    pub fn action_integral_raw(&self, p: Complex64, side: Limit) -> Complex64 {
        let (w, neg, below) = quadrant(p, side);
        let v = self.j_q1(w);
        // J is even and conjugate-symmetric.
        if neg != below {
            v.conj()
        } else {
            v
        }
    }

    /// `int L0` along a polyline by Gauss-Legendre panels; used to check
    /// path independence of [`Self::action_integral`].
    pub fn action_integral_along(&self, path: &[Complex64], panels: usize) -> Result<Complex64> {
        let rule = GaussRule::new(16);
        let mut acc = Complex64::new(0.0, 0.0);
        for seg in path.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            for k in 0..panels {
                let (u0, u1) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
                for (u, w) in rule.on(u0, u1) {
                    let z = a + (b - a) * u;
                    acc += self.big_l0_raw(z, Limit::Above, ContourPolicy::Auto)?.value * (b - a) * w;
                }
            }
        }
        Ok(acc)
    }

    /// `R0(p) = exp(i J(p) / eps)`.
    pub fn r0(&self, p: CxPoint) -> Result<Complex64> {
        Ok((I * self.action_integral(p)? / self.eps).exp())
    }

    pub fn r0_raw(&self, p: Complex64, side: Limit) -> Complex64 {
        (I * self.action_integral_raw(p, side) / self.eps).exp()
    }

    /// `R` on the real line: `R0(p - i0)` for `p <= 0`, `R0(p + i0)` for
    /// `p > 0`. Even in `p`.
    pub fn r_boundary(&self, p: f64) -> Complex64 {
        if p == 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        self.r0_raw(Complex64::new(p.abs(), 0.0), Limit::Above)
    }

    /// `A(p) = exp(i/eps int_0^p (L0 - l0))`.
    pub fn amplitude_a(&self, p: CxPoint) -> Result<Complex64> {
        let side = check_c0(&p)?;
        Ok(self.amplitude_a_raw(p.z(), side))
    }

    pub fn amplitude_a_raw(&self, p: Complex64, side: Limit) -> Complex64 {
        let j = self.action_integral_raw(p, side);
        (I * (j - int_l0_raw(p, side)) / self.eps).exp()
    }
}

fn side_of(p: &CxPoint) -> Limit {
    if p.sheet == Sheet::RealMinusI0 {
        Limit::Below
    } else {
        Limit::Above
    }
}

fn check_c0(p: &CxPoint) -> Result<Limit> {
    if p.sheet == Sheet::C1 && p.im == 0.0 && p.re.abs() > 1.0 {
        return Err(Error::BranchViolation { re: p.re, im: p.im, sheet: Sheet::C0 });
    }
    Ok(side_of(p))
}

fn check_c1(p: &CxPoint) -> Result<Limit> {
    if p.sheet == Sheet::C0 && p.im == 0.0 && p.re < 1.0 {
        return Err(Error::BranchViolation { re: p.re, im: p.im, sheet: Sheet::C1 });
    }
    Ok(side_of(p))
}

/// `L0(p)` for a single `eps`.
pub fn big_l0(p: CxPoint, eps: f64) -> Result<QuadratureReport> {
    SymbolField::new(eps)?.big_l0(p, ContourPolicy::Auto)
}

/// `L1(p)` for a single `eps`.
pub fn big_l1(p: CxPoint, eps: f64) -> Result<QuadratureReport> {
    SymbolField::new(eps)?.big_l1(p)
}

/// `R0(p)` for a single `eps`.
pub fn r0(p: CxPoint, eps: f64) -> Result<Complex64> {
    SymbolField::new(eps)?.r0(p)
}

/// `A(p)` for a single `eps`.
pub fn amplitude_a(p: CxPoint, eps: f64) -> Result<Complex64> {
    SymbolField::new(eps)?.amplitude_a(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branchfns::{l0, rho0_raw};
    use crate::specialfns::zeta_fn;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pt(re: f64, im: f64) -> CxPoint {
        CxPoint::c0(c(re, im)).unwrap()
    }

    #[test]
    fn l0_symmetric_values() {
        for eps in [0.1, 0.05] {
            let f = SymbolField::new(eps).unwrap();
            assert!(f.big_l0(pt(0.0, 0.0), ContourPolicy::Auto).unwrap().value.norm() < 1e-12);
        }
        let f = SymbolField::new(0.1).unwrap();
        let v = f.big_l0(pt(0.0, 0.5), ContourPolicy::Auto).unwrap().value;
        assert!(v.re.abs() < 1e-10, "{v}");
    }

    #[test]
    fn l0_approaches_l0_at_second_order() {
        let target = l0(pt(0.5, 0.0)).unwrap();
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&e| (SymbolField::new(e).unwrap().big_l0(pt(0.5, 0.0), ContourPolicy::Auto).unwrap().value - target).norm())
            .collect();
        for w in errs.windows(2) {
            let r = w[0] / w[1];
            assert!((r - 4.0).abs() < 0.4, "{errs:?}");
        }
    }

    #[test]
    fn direct_and_shifted_l0_agree() {
        let f = SymbolField::new(0.1).unwrap();
        for p in [c(1.3, 0.4), c(2.5, 0.2), c(0.99, 0.05), c(4.0, 1.5), c(1.02, 0.01)] {
            let a = f.big_l0_raw(p, Limit::Above, ContourPolicy::Auto).unwrap();
            let b = f.big_l0_raw(p, Limit::Above, ContourPolicy::DirectOnly).unwrap();
            assert!((a.value - b.value).norm() < 1e-10, "{p} {} {}", a.value, b.value);
        }
        assert!(matches!(f.big_l0_raw(c(2.0, 0.0), Limit::Above, ContourPolicy::DirectOnly), Err(Error::ContourClash(_))));
    }

    #[test]
    fn l1_difference_equation() {
        let f = SymbolField::new(0.1).unwrap();
        let p = c(2.0, 0.5);
        let lhs = f.big_l1_raw(p + 0.05, Limit::Above).unwrap().value - f.big_l1_raw(p - 0.05, Limit::Above).unwrap().value;
        let h = 1e-5;
        let fd = (l1_raw(p + h, Limit::Above) - l1_raw(p - h, Limit::Above)) / (2.0 * h);
        assert!((lhs - 0.1 * l1_prime_raw(p, Limit::Above)).norm() <= 1e-9);
        assert!((lhs - 0.1 * fd).norm() <= 1e-9);
        // Shifted evaluation on the left of 1 and in the lower half-plane.
        for p in [c(0.3, 0.2), c(-0.7, -0.4), c(0.5, -1.0)] {
            let lhs = f.big_l1_raw(p + 0.05, Limit::Above).unwrap().value - f.big_l1_raw(p - 0.05, Limit::Above).unwrap().value;
            assert!((lhs - 0.1 * l1_prime_raw(p, Limit::Above)).norm() <= 1e-9, "{p}");
        }
    }

    #[test]
    fn l1_near_l1_far_from_one() {
        let p = c(3.0, 0.2);
        let mut ratios = Vec::new();
        for eps in [0.1, 0.05] {
            let f = SymbolField::new(eps).unwrap();
            let d = (f.big_l1_raw(p, Limit::Above).unwrap().value - l1_raw(p, Limit::Above)).norm();
            let scale = eps * eps * p.norm() / (p * p - 1.0).norm().powf(1.5);
            ratios.push(d / scale);
        }
        assert!(ratios.iter().all(|r| *r < 1.0), "{ratios:?}");
    }

    #[test]
    fn l1_near_one_matches_zeta() {
        let eps = 0.05;
        let f = SymbolField::new(eps).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..=10 {
            let r = 0.02 * k as f64;
            let p = c(1.0, 0.0) + Complex64::from_polar(r, PI / 4.0);
            if r == 0.0 {
                continue;
            }
            let approx = PI - I * (2.0 * eps).sqrt() * zeta_fn((1.0 - p) / eps).unwrap();
            let d = (f.big_l1_raw(p, Limit::Above).unwrap().value - approx).norm();
            worst = worst.max(d / (eps.powf(1.5) + r.powf(1.5)));
        }
        assert!(worst < 3.0, "{worst}");
    }

    #[test]
    fn l0_near_one_matches_zeta() {
        // The constant is fitted; it must not grow when eps is halved.
        let mut consts = Vec::new();
        for eps in [0.05, 0.025] {
            let f = SymbolField::new(eps).unwrap();
            let mut worst: f64 = 0.0;
            for k in 0..=20 {
                let r = 0.01 * k as f64;
                let p = c(1.0, 0.0) + Complex64::from_polar(r, 0.75 * PI);
                let approx = PI + (2.0 * eps).sqrt() * zeta_fn((p - 1.0) / eps).unwrap();
                let d = (f.big_l0_raw(p, Limit::Above, ContourPolicy::Auto).unwrap().value - approx).norm();
                worst = worst.max(d / (eps.powf(1.5) + r.powf(1.5)));
            }
            consts.push(worst);
        }
        assert!(consts[0] < 3.0 && consts[1] < 3.0, "{consts:?}");
        assert!(consts[1] <= 2.0 * consts[0], "{consts:?}");
    }

    #[test]
    fn periodic_part() {
        let f = SymbolField::new(0.1).unwrap();
        let p = c(1.3, 0.4);
        let d = f.periodic_p(p + 0.1).unwrap() - f.periodic_p(p).unwrap();
        assert!(d.norm() <= 1e-9, "{d}");
        assert!(f.periodic_p(c(1.0, 0.0)).is_err());
    }

    // P_k = -4 int_0^inf exp(-2 pi k u / eps) / Q0(1 - iu) du, u = v^2.
    fn pk_oracle(eps: f64, k: usize) -> Complex64 {
        let a = 2.0 * PI * k as f64 / eps;
        let vmax = (40.0 / a).sqrt();
        let br: Vec<f64> = (0..=8).map(|j| vmax * j as f64 / 8.0).collect();
        adaptive(
            |v| {
                let u = v * v;
                let q = crate::branchfns::q0_raw(c(1.0, -u), Limit::Above);
                // 2v / Q0 stays finite as v -> 0.
                (-a * u).exp() * 2.0 * v / q
            },
            &br,
            1e-16,
            1e-13,
        )
        .value
            * -4.0
    }

    #[test]
    fn fourier_coefficients() {
        for eps in [0.1, 0.05] {
            let f = SymbolField::new(eps).unwrap();
            let pk = f.periodic_p_fourier(3).unwrap();
            for (k, v) in pk.iter().enumerate() {
                let o = pk_oracle(eps, k + 1);
                // The transform amplifies rounding by exp(2 pi k).
                assert!((v - o).norm() <= 1e-6 * o.norm(), "eps {eps} k {} {v} {o}", k + 1);
            }
            let lead = 2.0 * Complex64::from_polar(1.0, PI / 4.0) * eps.sqrt();
            let dev = (pk[0] / lead - 1.0).norm();
            assert!(dev <= 2.0 * eps, "{dev}");
            assert!(pk[2].norm() < pk[1].norm() && pk[1].norm() < pk[0].norm());
        }
    }

    #[test]
    fn r0_basics() {
        let f = SymbolField::new(0.1).unwrap();
        assert!((f.r0(pt(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-15);
        for k in 0..20 {
            let x = -0.99 + 1.98 * k as f64 / 19.0;
            assert!((f.r0(pt(x, 0.0)).unwrap().norm() - 1.0).abs() <= 1e-9);
        }
        for x in [0.1, 0.5, 0.9, 0.999] {
            let a = f.r0_raw(c(-x, 0.0), Limit::Below);
            let b = f.r0_raw(c(x, 0.0), Limit::Above);
            assert!((a - b).norm() <= 1e-9);
        }
    }

    #[test]
    fn r_boundary_recursion_and_decay() {
        let f = SymbolField::new(0.1).unwrap();
        for p in [0.35, -0.35] {
            let lhs = f.r_boundary(p + 0.05);
            let side = if p > 0.0 { Limit::Above } else { Limit::Below };
            let rhs = rho0_raw(c(p, 0.0), side) * f.r_boundary(p - 0.05);
            assert!((lhs - rhs).norm() <= 1e-8);
        }
        // Across the cut, the product recursion with +i0 values.
        for p in [1.23, 2.71, -1.77] {
            let side = if p > 0.0 { Limit::Above } else { Limit::Below };
            let lhs = f.r_boundary(p + 0.05);
            let rhs = rho0_raw(c(p, 0.0), side) * f.r_boundary(p - 0.05);
            assert!((lhs - rhs).norm() <= 1e-8 * (1.0 + rhs.norm()), "{p}");
        }
        let f = SymbolField::new(0.2).unwrap();
        assert!(f.r_boundary(5.0).norm() < 1e-6 * f.r_boundary(1.5).norm());
    }

    #[test]
    fn path_independence() {
        let f = SymbolField::new(0.1).unwrap();
        let target = c(1.6, 0.7);
        let direct = f.action_integral_raw(target, Limit::Above);
        let a = f.action_integral_along(&[c(0.0, 0.0), target], 40).unwrap();
        let b = f.action_integral_along(&[c(0.0, 0.0), c(0.0, 1.2), c(2.0, 1.2), target], 40).unwrap();
        assert!((a - b).norm() <= 1e-9 * 0.1, "{a} {b}");
        assert!((direct - a).norm() <= 1e-9 * 0.1, "{direct} {a}");
        let (ra, rb) = ((I * a / 0.1).exp(), (I * b / 0.1).exp());
        assert!((ra - rb).norm() <= 1e-9);
    }

    #[test]
    fn amplitude_near_one() {
        let f = SymbolField::new(0.1).unwrap();
        assert!((f.amplitude_a(pt(0.0, 0.0)).unwrap() - 1.0).norm() < 1e-14);
        // A(conj p) conj(A(p)) = 1 because int (L0 - l0) is conjugate-symmetric.
        for p in [c(0.3, 0.4), c(1.5, 0.2), c(-2.0, 1.0)] {
            let a = f.amplitude_a_raw(p, Limit::Above);
            let b = f.amplitude_a_raw(p.conj(), Limit::Above);
            assert!((a.conj() * b - 1.0).norm() <= 1e-9);
        }
    }

    #[test]
    fn action_growth_on_diagonal() {
        let f = SymbolField::new(0.1).unwrap();
        let mut consts = Vec::new();
        for r in [5.0, 10.0, 20.0, 40.0] {
            let p = Complex64::from_polar(r, PI / 4.0);
            let j = f.action_integral_raw(p, Limit::Above);
            let dev = ((I * j).re + 2.0 * p.re * r.ln()).abs() / r;
            consts.push(dev);
        }
        let (lo, hi) = consts.iter().fold((f64::MAX, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi < 3.0 && hi <= 1.5 * lo + 0.5, "{consts:?}");
    }

    fn c0_strip() -> impl Strategy<Value = Complex64> {
        (-3.0f64..3.0, 0.05f64..2.0, any::<bool>()).prop_map(|(x, y, up)| c(x, if up { y } else { -y }))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]

        #[test]
        fn difference_equation_direct(p in c0_strip(), half in any::<bool>()) {
            let eps = if half { 0.05 } else { 0.1 };
            let f = SymbolField::new(eps).unwrap();
            let a = f.big_l0_raw(p + eps / 2.0, Limit::Above, ContourPolicy::DirectOnly).unwrap().value;
            let b = f.big_l0_raw(p - eps / 2.0, Limit::Above, ContourPolicy::DirectOnly).unwrap().value;
            let d = l0_prime_raw(p, Limit::Above);
            prop_assert!((a - b - eps * d).norm() <= 1e-8 * (1.0 + d.norm()));
        }

        #[test]
        fn r0_difference_equation(x in -3.0f64..3.0, y in -0.1f64..0.1) {
            prop_assume!(y.abs() > 1e-3 || x.abs() < 0.9);
            let eps = 0.1;
            let f = SymbolField::new(eps).unwrap();
            let p = c(x, y);
            let lhs = f.r0_raw(p + eps / 2.0, Limit::Above);
            let rhs = rho0_raw(p, Limit::Above) * f.r0_raw(p - eps / 2.0, Limit::Above);
            // R0 grows like p^(2 Re p / eps) below the cut, so compare relatively.
            prop_assert!((lhs - rhs).norm() <= 1e-8 * rhs.norm().max(1.0), "{} {}", lhs, rhs);
        }

        #[test]
        fn j_is_even_and_real_symmetric(x in -3.0f64..3.0, y in -2.0f64..2.0) {
            let f = SymbolField::new(0.1).unwrap();
            let p = c(x, y);
            let j = f.action_integral_raw(p, Limit::Above);
            prop_assert!((f.action_integral_raw(-p, Limit::Above) - j).norm() <= 1e-12 * (1.0 + j.norm()));
            prop_assert!((f.action_integral_raw(p.conj(), Limit::Above) - j.conj()).norm() <= 1e-12 * (1.0 + j.norm()));
        }
    }
}
