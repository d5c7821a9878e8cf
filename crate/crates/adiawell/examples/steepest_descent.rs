//! Traces the steepest-descent path of the exterior phase through its
//! saddle and checks it against the straight ray used by default.

use adiawell::spectrum::{p_n_tilde, ModelParams};
use adiawell::wavefield::{action_tilde, trace_steepest};
use adiawell::branchfns::CxPoint;

fn main() -> adiawell::Result<()> {
    let params = ModelParams::new(0.1, 1)?;
    let (tau, xi) = (-2.0, 1.0);
    let saddle = p_n_tilde(1, tau, xi)?;
    println!("saddle p~ = {saddle:.8}");

    let path = trace_steepest(&params, tau, xi)?;
    let s0 = action_tilde(CxPoint::c0(saddle)?, tau, 1, xi)?.value;
    println!("{} nodes, damping exponent {:.1}", path.nodes.len(), path.truncation_height);
    for node in path.nodes.iter().step_by(path.nodes.len() / 8) {
        let s = action_tilde(*node, tau, 1, xi)?.value;
        println!("  p = {:>24.6}: Re dS = {:+.1e}, Im dS = {:.4}", node.z(), (s - s0).re, (s - s0).im);
    }
    Ok(())
}
