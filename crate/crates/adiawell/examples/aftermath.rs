//! Past the threshold the state is no longer bound. Its size is set by three
//! terms: the decaying transition tail T0, resonances R0 as later levels
//! empty, and G0.

use adiawell::asymptotics::aftermath_terms_many;
use adiawell::spectrum::ModelParams;
use adiawell::wavefield::WaveField;

fn main() -> adiawell::Result<()> {
    let params = ModelParams::new(0.05, 1)?;
    let field = WaveField::new(params)?;
    let tn = params.tau_n();
    println!("{:>7} {:>10} {:>10} {:>10} {:>10} {:>10}", "tau", "|T0|", "|R0|", "|G0|", "|sum|", "|exact|");
    for k in 0..=8 {
        let tau = tn + 0.125 * k as f64;
        let t = tau / params.eps;
        let x = 0.5 * (1.0 - tau);
        let terms = aftermath_terms_many(&params, &[x], t)?[0];
        let contour = field.default_inside_contour(tau, x)?;
        let exact = field.psi_inside(x, t, &contour)?.psi;
        println!(
            "{tau:>7.3} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e}",
            terms.t0.norm(),
            terms.r0.norm(),
            terms.g0.norm(),
            terms.sum().norm(),
            exact.norm()
        );
    }
    Ok(())
}
