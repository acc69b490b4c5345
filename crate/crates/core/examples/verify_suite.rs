//! The full identity suite for one parameter set, as run by `gpbt verify`.

use gp_backlund::gp::GpParams;
use gp_backlund::ode::{linspace, Tolerance};
use gp_backlund::verify::Suite;

fn main() -> gp_backlund::Result<()> {
    let suite = Suite {
        params: GpParams { n: 2, eta: 0.5, b: -1.0, c: 1.0, ..GpParams::default() },
        schedule: vec![0.5, 0.5],
        xs: linspace(1.0, 2.0, 2001),
        tol: Tolerance::new(1e-10, 1e-10)?,
        residual_pass: 1e-5,
    };
    let (checks, failure) = suite.run();
    for c in &checks {
        let note = c.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default();
        println!("{:5} {:22} {:.3e} vs {:.0e}{note}", if c.pass { "pass" } else { "FAIL" }, c.name, c.deviation, c.tolerance);
    }
    if let Some(f) = failure {
        println!("stopped in {}: {}", f.check, f.error);
    }
    Ok(())
}
