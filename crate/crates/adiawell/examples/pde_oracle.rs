//! Propagates the exact solution with an independent Crank-Nicolson solver
//! and measures how far the two drift apart as the grid is refined.

use adiawell::oracle::{propagate_report, suggested_x_max, GridSpec};
use adiawell::spectrum::ModelParams;

fn main() -> adiawell::Result<()> {
    let params = ModelParams::new(0.2, 1)?;
    let (t0, t1) = (-10.0, -7.5);
    // Wide enough that the field is below 1e-10 at the far wall.
    let x_max = suggested_x_max(&params, t0, t1)?;
    let mut grid = GridSpec::new(48.0, 2400, 0.02)?;
    println!("domain [0, {}], needs at least {x_max:.2}", grid.x_max);
    let mut last = None;
    for _ in 0..3 {
        let r = propagate_report(&params, t0, t1, &grid)?;
        let ratio = last.map(|l: f64| format!("{:.2}", l / r.deviation)).unwrap_or_default();
        println!(
            "dx = {:.5} dt = {:.4}: deviation {:.3e} {ratio:>5}  norm drift {:.1e}  {:.0} ms",
            grid.dx(),
            grid.dt,
            r.deviation,
            r.norm_drift,
            r.runtime_ms
        );
        last = Some(r.deviation);
        grid = grid.refined();
    }
    Ok(())
}
