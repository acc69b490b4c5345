//! Integrating the amplitude equation from arbitrary initial data and
//! measuring its finite-difference residual.

use gp_backlund::gp::{gp_rhs, GpParams};
use gp_backlund::ode::{integrate_span, linspace, residual, sample, IntegratorOptions, Tolerance};

fn main() -> gp_backlund::Result<()> {
    let p = GpParams { n: 2, eta: 0.5, ..GpParams::default() };
    let ode = gp_rhs(&p)?;
    let opts = IntegratorOptions::new(Tolerance::new(1e-10, 1e-10)?);
    let sol = integrate_span(&ode, 1.0, 0.75, -0.5, 1.0, 3.0, &opts)?;
    println!(
        "span {:?}, {} accepted steps, {} rejected",
        sol.span(),
        sol.steps(),
        sol.rejected_steps()
    );
    // the solution oscillates faster as x grows, so a fixed grid resolves
    // the left part far better
    for hi in [2.0, 3.0] {
        for n in [401, 2001] {
            let grid = sample(&sol, &linspace(1.0, hi, n))?;
            println!("[1, {hi}] {n:5} points: residual max {:.3e}", residual(&ode, &grid)?.max_interior);
        }
    }
    let mut strict = opts;
    strict.max_steps = 50;
    if let Err(e) = integrate_span(&ode, 1.0, 0.75, -0.5, 1.0, 3.0, &strict) {
        println!("with a 50 step budget: {e}");
    }
    Ok(())
}
