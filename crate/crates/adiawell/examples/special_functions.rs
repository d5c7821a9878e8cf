//! Values of the special functions that shape the transition and aftermath
//! terms: the Airy function, F(z), zeta(t) and a(z).

use adiawell::specialfns::{a_fn, airy_ai, f_transition, zeta_fn};
use num_complex::Complex64;

fn main() -> adiawell::Result<()> {
    println!("Ai(0) = {}", airy_ai(Complex64::new(0.0, 0.0), 0)?);
    println!("Ai'(1+i) = {}", airy_ai(Complex64::new(1.0, 1.0), 1)?);

    // Along arg z = pi/6, |F(z)| grows like sqrt|z| while its phase spins.
    let rot = Complex64::from_polar(1.0, std::f64::consts::PI / 6.0);
    for r in [1.0, 4.0, 10.0] {
        let f = f_transition(rot * r)?;
        println!("|z| = {r:>4}: F(z) = {f:.6}, |F| / sqrt|z| = {:.6}", f.norm() / r.sqrt());
    }

    // zeta(t) + 2 sqrt(-t) decays like |t|^{-3/2} on the negative axis.
    for t in [-10.0, -40.0, -100.0] {
        let z = zeta_fn(Complex64::new(t, 0.0))?;
        let tail = (z + 2.0 * (-t).sqrt()).norm() * (-t).powf(1.5);
        println!("t = {t:>6}: zeta = {z:.6}, |t|^1.5 |zeta + 2 sqrt(-t)| = {tail:.4}");
    }

    // a(z) ~ i / (2z) for large z.
    for z in [-20.0, 1.0, 20.0] {
        let a = a_fn(z, 0)?;
        println!("a({z}) = {a:.6}, 2 z a / i = {:.6}", 2.0 * z * a / Complex64::i());
    }
    Ok(())
}
