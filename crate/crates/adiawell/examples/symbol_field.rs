//! The eps-dependent functions behind the exact solution: L0, which solves a
//! difference equation, and the boundary factor R0 of unit modulus.

use adiawell::branchfns::{l0_prime, CxPoint};
use adiawell::symbolfield::{ContourPolicy, SymbolField};
use num_complex::Complex64;

fn main() -> adiawell::Result<()> {
    let eps = 0.1;
    let sf = SymbolField::new(eps)?;

    // L0(p + eps/2) - L0(p - eps/2) = eps l0'(p)
    for z in [Complex64::new(0.2, 0.3), Complex64::new(-0.7, -0.4)] {
        let h = Complex64::new(0.5 * eps, 0.0);
        let up = sf.big_l0(CxPoint::c0(z + h)?, ContourPolicy::Auto)?.value;
        let down = sf.big_l0(CxPoint::c0(z - h)?, ContourPolicy::Auto)?.value;
        let rhs = eps * l0_prime(CxPoint::c0(z)?)?;
        println!("p = {z}: residual {:.2e}", (up - down - rhs).norm());
    }

    println!("\n|R0| on the real segment:");
    for p in [-0.9, -0.3, 0.0, 0.4, 0.95] {
        let r = sf.r0(CxPoint::c0(Complex64::new(p, 0.0))?)?;
        println!("  p = {p:>5}: R0 = {r:.6}, |R0| - 1 = {:.1e}", r.norm() - 1.0);
    }
    println!("R0 on the upper side of the cut at 1.3: {:.6}", sf.r_boundary(1.3));
    Ok(())
}
