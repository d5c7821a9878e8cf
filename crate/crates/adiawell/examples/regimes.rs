//! Walks one mode from deep inside the adiabatic regime to past its
//! threshold and reports which leading term applies at each time.

use adiawell::asymptotics::best_leading;
use adiawell::spectrum::ModelParams;

fn main() -> adiawell::Result<()> {
    let params = ModelParams::new(0.02, 1)?;
    let x = 0.4;
    println!("tau_n = {:.4}", params.tau_n());
    for tau in [-6.0, -4.0, -2.0, -1.0, -0.6, -0.4, 0.0, 0.4] {
        let (v, regime) = best_leading(&params, x, tau / params.eps)?;
        println!("tau = {tau:>5}: {:<10} psi({x}) ~ {v:.6}", regime.as_str());
    }
    Ok(())
}
