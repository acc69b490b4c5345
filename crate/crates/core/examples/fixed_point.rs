//! The closed-form amplitude is invariant under every shift; a generic
//! solution is not.

use gp_backlund::backlund::{is_fixed_point, BacklundMap};
use gp_backlund::gp::{gp_rhs, ClosedForm, GpParams};
use gp_backlund::ode::{integrate_span, linspace, IntegratorOptions, Tolerance};

fn main() -> gp_backlund::Result<()> {
    let p = GpParams { n: 2, eta: 1.0, b: -1.0, c: 1.0, ..GpParams::default() };
    let cf = ClosedForm::new(p)?;
    let xs = linspace(1.0, 2.0, 201);
    for k in [-0.5, 0.25, 2.0, 10.0] {
        let map = BacklundMap::from_poly(p.poly(), k, &cf)?;
        let r = is_fixed_point(&map, &cf, &xs, 1e-10)?;
        println!("closed form, K = {k:5}: fixed {} (deviation {:.2e})", r.fixed, r.deviation);
    }

    let opts = IntegratorOptions::new(Tolerance::new(1e-10, 1e-10)?);
    let seed = integrate_span(&gp_rhs(&p)?, 1.0, 1.2 * cf.r(1.0), cf.r_prime(1.0), 1.0, 3.0, &opts)?;
    for k in [0.25, 1.0] {
        let map = BacklundMap::from_poly(p.poly(), k, &seed)?;
        let r = is_fixed_point(&map, &seed, &xs, 1e-10)?;
        println!("generic seed, K = {k:4}: fixed {} (deviation {:.2e})", r.fixed, r.deviation);
    }
    Ok(())
}
