//! Eigenvalues of the frozen well as it shrinks, their thresholds, and the
//! complex momentum that continues them outside.

use adiawell::spectrum::{dlnpn_dtau, e_n, int_e_n, p_n, p_n_tilde, tau_threshold};

fn main() -> adiawell::Result<()> {
    for n in 1..=3 {
        println!("n = {n}: eigenvalue reaches 0 at tau_n = {:.6}", tau_threshold(n));
    }

    println!("\n{:>6} {:>10} {:>11} {:>11} {:>12}", "tau", "p_1", "E_1", "dlnp/dtau", "int E_1");
    for tau in [-8.0, -4.0, -2.0, -1.0, -0.6] {
        println!(
            "{tau:>6} {:>10.6} {:>11.6} {:>11.6} {:>12.6}",
            p_n(1, tau)?,
            e_n(1, tau)?,
            dlnpn_dtau(1, tau)?,
            int_e_n(1, tau)?
        );
    }

    println!("\nexterior momentum at tau = -2:");
    for xi in [0.0, 0.5, 1.0, 3.0] {
        println!("  xi = {xi}: p~_1 = {:.6}", p_n_tilde(1, -2.0, xi)?);
    }
    Ok(())
}
