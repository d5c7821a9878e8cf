//! Through the threshold the leading term is built from F(z). The scaled
//! error err / (eps^{2/3} (1 + Z^{1/2})) stays flat as eps shrinks.

use adiawell::asymptotics::{big_z, transition_leading};
use adiawell::spectrum::ModelParams;
use adiawell::wavefield::WaveField;

fn main() -> adiawell::Result<()> {
    for eps in [0.1, 0.05, 0.025] {
        let params = ModelParams::new(eps, 1)?;
        let field = WaveField::new(params)?;
        let tn = params.tau_n();
        for tau in [tn, tn - eps.cbrt(), tn - 0.2] {
            let xs: Vec<f64> = (1..8).map(|k| k as f64 * (1.0 - tau) / 8.0).collect();
            let contour = field.default_inside_contour(tau, xs[6])?;
            let exact = field.psi_inside_many(&xs, tau / eps, &contour)?;
            let mut err: f64 = 0.0;
            for (x, e) in xs.iter().zip(&exact) {
                err = err.max((e.psi - transition_leading(&params, *x, tau / eps)?).norm());
            }
            let z = big_z(&params, tau)?;
            println!(
                "eps = {eps:<6} tau = {tau:.4}  err = {err:.3e}  scaled = {:.4}",
                err / (eps.powf(2.0 / 3.0) * (1.0 + z.sqrt()))
            );
        }
    }
    Ok(())
}
