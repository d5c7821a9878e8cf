//! Well before the threshold the field follows the instantaneous eigenstate.
//! The error of the leading term falls linearly in eps, inside and outside.

use adiawell::cli::{check_error, fit_order, Check};

fn main() -> adiawell::Result<()> {
    let eps = [0.1, 0.05, 0.025];
    for (check, label) in [(Check::Adiabatic, "inside"), (Check::Exterior, "outside, xi = 0.5")] {
        let errs: Vec<f64> = eps.iter().map(|&e| check_error(check, e, 1, -2.0, 0.5)).collect::<Result<_, _>>()?;
        println!("{label}:");
        for (e, r) in eps.iter().zip(&errs) {
            println!("  eps = {e:<6} err = {r:.4e}");
        }
        println!("  fitted order {:.3}", fit_order(&eps, &errs));
    }
    Ok(())
}
