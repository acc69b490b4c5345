//! Repeated transformation along a shift schedule. Chaining lazily through
//! `Transformed` gives the same result as one step with the summed shift.

use gp_backlund::backlund::{orbit, BacklundMap, Transformed};
use gp_backlund::gp::{gp_rhs, GpParams};
use gp_backlund::ode::{integrate_span, linspace, residual, Amplitude, IntegratorOptions, Tolerance};

fn main() -> gp_backlund::Result<()> {
    let p = GpParams { n: 2, eta: 0.5, ..GpParams::default() };
    let g = p.poly();
    let ode = gp_rhs(&p)?;
    let opts = IntegratorOptions::new(Tolerance::new(1e-10, 1e-10)?);
    let seed = integrate_span(&ode, 1.0, 0.55, -0.4, 1.0, 2.5, &opts)?;
    let xs = linspace(1.0, 1.6, 1201);

    let schedule = [0.25, 0.25, 0.5];
    for (j, grid) in orbit(g, &schedule, &seed, &xs)?.iter().enumerate() {
        println!(
            "element {j}: K = {}, {} points, residual {:.3e}",
            grid.meta.params["K"],
            grid.len(),
            residual(&ode, grid)?.max_interior
        );
    }

    let first = Transformed::new(BacklundMap::from_poly(g, 0.25, &seed)?, &seed);
    let second = Transformed::new(BacklundMap::from_poly(g, 0.25, &first)?, &first);
    let direct = BacklundMap::from_poly(g, 0.5, &seed)?;
    let worst = xs
        .iter()
        .map(|&x| Ok((second.eval(x)?.0 - direct.apply(&seed, x)?.0).abs()))
        .collect::<gp_backlund::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    println!("two steps of 0.25 vs one step of 0.5: max difference {worst:.2e}");
    Ok(())
}
