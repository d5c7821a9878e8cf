//! The generating series is periodic in p; its Fourier coefficient in p
//! recovers the contour-integral solution.

use adiawell::spectrum::ModelParams;
use adiawell::wavefield::WaveField;

fn main() -> adiawell::Result<()> {
    let params = ModelParams::new(0.2, 1)?;
    let field = WaveField::new(params)?;
    let t = -10.0;
    let l_max = field.series_l_max();

    let a = field.generating_series(0.8, t, 0.37, l_max)?;
    let b = field.generating_series(0.8, t, 0.37 + params.eps, l_max)?;
    println!("period check: |P(p + eps) - P(p)| = {:.2e}", (a - b).norm());

    let xs = [0.4, 1.5, 2.5];
    let contour = field.default_inside_contour(params.eps * t, 2.5)?;
    let direct = field.psi_inside_many(&xs, t, &contour)?;
    let fourier = field.series_fourier(&xs, t)?;
    for (d, f) in direct.iter().zip(&fourier) {
        println!("x = {}: contour {:.10}, fourier {:.10}, diff {:.1e}", d.point.x, d.psi, f.psi, (d.psi - f.psi).norm());
    }
    Ok(())
}
