//! One transformation step applied to an integrated seed. The result solves
//! the same equation; its residual tracks the seed's.

use gp_backlund::backlund::{transform, transform_trimmed, BacklundMap};
use gp_backlund::gp::{gp_rhs, GpParams};
use gp_backlund::ode::{integrate_span, linspace, residual, sample, IntegratorOptions, Tolerance};

fn main() -> gp_backlund::Result<()> {
    let p = GpParams { n: 1, eta: 1.0, ..GpParams::default() };
    let ode = gp_rhs(&p)?;
    let opts = IntegratorOptions::new(Tolerance::new(1e-10, 1e-10)?);
    let seed = integrate_span(&ode, 1.0, 0.7, -0.2, 1.0, 3.0, &opts)?;
    let xs = linspace(1.0, 2.0, 2001);
    println!("seed residual {:.3e}", residual(&ode, &sample(&seed, &xs)?)?.max_interior);

    for k in [0.25, 0.5, 1.0, 3.0] {
        let map = BacklundMap::from_poly(p.poly(), k, &seed)?;
        let grid = transform_trimmed(&map, &seed, &xs)?;
        let kept = grid.meta.trimmed_to.map_or("all points".to_string(), |(a, b)| format!("trimmed to [{a:.4}, {b:.4}]"));
        println!(
            "K = {k}: source domain {}, {kept}, residual {:.3e}",
            map.source_domain(),
            residual(&ode, &grid)?.max_interior
        );
        if let Err(e) = transform(&map, &seed, &xs) {
            println!("         strict transform: {e}");
        }
    }
    Ok(())
}
