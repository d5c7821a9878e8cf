//! The exact wave function on a grid spanning the well and its exterior,
//! printed as CSV.

use adiawell::spectrum::ModelParams;
use adiawell::wavefield::WaveField;

fn main() -> adiawell::Result<()> {
    let params = ModelParams::new(0.2, 1)?;
    let field = WaveField::new(params)?;
    let t = -10.0;
    let edge = 1.0 - params.eps * t;

    let xs: Vec<f64> = (0..=24).map(|k| 0.25 * k as f64).collect();
    println!("# edge of the well at x = {edge}");
    println!("x,re_psi,im_psi,abs_psi,est_error,method");
    for s in field.psi_profile(&xs, t)? {
        println!(
            "{},{:.10},{:.10},{:.10},{:.1e},{:?}",
            s.point.x, s.psi.re, s.psi.im, s.psi.norm(), s.est_error, s.method
        );
    }
    Ok(())
}
