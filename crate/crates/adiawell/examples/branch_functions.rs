//! The elementary branch functions on the cut plane and their values on
//! either side of the cuts.

use adiawell::branchfns::{int_l0, l0, l0_prime, q0, CxPoint};
use num_complex::Complex64;

fn main() -> adiawell::Result<()> {
    for z in [Complex64::new(0.3, 0.0), Complex64::new(0.5, 0.8), Complex64::new(-2.0, 0.5)] {
        let p = CxPoint::c0(z)?;
        println!("p = {z}: Q0 = {:.6}, l0 = {:.6}, l0' = {:.6}", q0(p)?, l0(p)?, l0_prime(p)?);
    }

    // Across the cut at p = 2 the sign of Q0 flips.
    println!("Q0(2 + i0) = {:.6}", q0(CxPoint::above(2.0))?);
    println!("Q0(2 - i0) = {:.6}", q0(CxPoint::below(2.0))?);

    let one = int_l0(CxPoint::c0(Complex64::new(1.0, 0.0))?)?;
    println!("int l0 at 1 = {one:.15}, pi - 2 = {:.15}", std::f64::consts::PI - 2.0);

    // A point on the cut must carry its side explicitly.
    match CxPoint::c0(Complex64::new(1.5, 0.0)) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
