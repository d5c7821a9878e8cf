//! Quadrature utilities: Gauss-Legendre rules and adaptive Gauss-Kronrod
//! integration of complex (possibly vector-valued) integrands on real intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Value of a quadrature together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureReport {
    pub value: Complex64,
    pub est_error: f64,
    pub nodes_used: usize,
}

impl QuadratureReport {
    /// Turn an unconverged report into an error.
    pub fn require(self, tol: f64, what: &'static str) -> Result<Self> {
        if self.est_error <= tol && self.value.is_finite() {
            Ok(self)
        } else {
            Err(Error::QuadratureFailure { what, est_error: self.est_error })
        }
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// A fixed Gauss-Legendre rule reused over many panels.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Self { x, w }
    }

    /// Nodes and weights mapped to [a, b].
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let m = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.x.iter().zip(&self.w).map(move |(&x, &w)| (m + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        self.on(a, b).map(|(x, w)| f(x) * w).sum()
    }
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: Vec<Complex64>,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk21<F: FnMut(f64, &mut [Complex64])>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [Complex64]) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![Complex64::new(0.0, 0.0); dim];
    let mut g = vec![Complex64::new(0.0, 0.0); dim];
    f(c, buf);
    for d in 0..dim {
        k[d] += buf[d] * WGK[10];
    }
    for j in 0..10 {
        let dx = h * XGK[j];
        for &x in &[c - dx, c + dx] {
            f(x, buf);
            for d in 0..dim {
                k[d] += buf[d] * WGK[j];
                if j % 2 == 1 {
                    g[d] += buf[d] * WG[j / 2];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    for d in 0..dim {
        k[d] *= h;
        g[d] *= h;
        err = err.max((k[d] - g[d]).norm());
    }
    Panel { a, b, value: k, err }
}

/// Adaptive Gauss-Kronrod (10/21) integration of a vector-valued complex
/// integrand over the union of panels `[breaks[i], breaks[i+1]]`.
///
/// `f(x, out)` writes the integrand at `x` into `out` (length `dim`).
/// Convergence is declared when the summed error estimate, measured in the
/// max-norm over components, drops below `max(abs_tol, rel_tol * |I|)`.
pub fn adaptive_vec<F>(mut f: F, dim: usize, breaks: &[f64], abs_tol: f64, rel_tol: f64, max_panels: usize) -> (Vec<Complex64>, f64, usize)
where
    F: FnMut(f64, &mut [Complex64]),
{
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    let mut total = vec![Complex64::new(0.0, 0.0); dim];
    let mut err = 0.0;
    for win in breaks.windows(2) {
        if win[1] != win[0] {
            let p = gk21(&mut f, win[0], win[1], dim, &mut buf);
            for d in 0..dim {
                total[d] += p.value[d];
            }
            err += p.err;
            heap.push(p);
            evals += 21;
        }
    }
    loop {
        let scale = total.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let target = abs_tol.max(rel_tol * scale);
        if err <= target || heap.len() >= max_panels {
            break;
        }
        let worst = match heap.pop() {
            Some(p) if p.err > 0.0 => p,
            Some(p) => {
                heap.push(p);
                break;
            }
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        for d in 0..dim {
            total[d] -= worst.value[d];
        }
        err -= worst.err;
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            for d in 0..dim {
                total[d] += worst.value[d];
            }
            heap.push(Panel { err: 0.0, ..worst });
            continue;
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let p = gk21(&mut f, lo, hi, dim, &mut buf);
            for d in 0..dim {
                total[d] += p.value[d];
            }
            err += p.err;
            heap.push(p);
        }
        evals += 42;
    }
    // Final sum in a fixed order for reproducibility.
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut total = vec![Complex64::new(0.0, 0.0); dim];
    let mut err = 0.0;
    for p in &panels {
        for d in 0..dim {
            total[d] += p.value[d];
        }
        err += p.err;
    }
    (total, err, evals)
}

/// Scalar adaptive Gauss-Kronrod integration over `[breaks[0], breaks[last]]`.
pub fn adaptive<F>(mut f: F, breaks: &[f64], abs_tol: f64, rel_tol: f64) -> QuadratureReport
where
    F: FnMut(f64) -> Complex64,
{
    let (v, err, n) = adaptive_vec(|x, out| out[0] = f(x), 1, breaks, abs_tol, rel_tol, 4000);
    QuadratureReport { value: v[0], est_error: err, nodes_used: n }
}

/// Real-valued convenience wrapper around [`adaptive`].
pub fn adaptive_real<F>(mut f: F, a: f64, b: f64, abs_tol: f64) -> QuadratureReport
where
    F: FnMut(f64) -> f64,
{
    adaptive(|x| Complex64::new(f(x), 0.0), &[a, b], abs_tol, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let num: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((num - exact).abs() < 1e-13, "n={n} deg={deg} {num} {exact}");
            }
        }
    }

    #[test]
    fn kronrod_weights_are_consistent() {
        let sk: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let sg: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((sk - 2.0).abs() < 1e-14);
        assert!((sg - 2.0).abs() < 1e-14);
        // K21 is exact up to degree 31.
        let r = adaptive(|x| Complex64::new(x.powi(30), 0.0), &[-1.0, 1.0], 0.0, 0.0);
        assert!((r.value.re - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = adaptive(|x| Complex64::new(x.sqrt(), 0.0), &[0.0, 1.0], 1e-13, 0.0);
        assert!((r.value.re - 2.0 / 3.0).abs() < 1e-12);
        let r = adaptive(|x| Complex64::new(0.0, x.ln()), &[0.0, 1.0], 1e-12, 0.0);
        assert!((r.value.im + 1.0).abs() < 1e-10);
    }

    #[test]
    fn vector_integrand_uses_max_norm() {
        let (v, err, _) = adaptive_vec(
            |x, out| {
                out[0] = Complex64::new(x.cos(), 0.0);
                out[1] = Complex64::new(0.0, (3.0 * x).sin());
            },
            2,
            &[0.0, 1.0, 2.0],
            1e-14,
            0.0,
            1000,
        );
        assert!(err < 1e-13);
        assert!((v[0].re - 2f64.sin()).abs() < 1e-14);
        assert!((v[1].im - (1.0 - 6f64.cos()) / 3.0).abs() < 1e-14);
    }
}
