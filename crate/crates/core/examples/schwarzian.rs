//! Schwarzian derivatives: closed-form towers against finite differences,
//! the Möbius kernel and the composition law.

use gp_backlund::calculus::{schwarzian, schwarzian_with, Evaluation, Interval, SmoothMap};
use gp_backlund::functional::Mobius;
use gp_backlund::verify;

fn main() -> gp_backlund::Result<()> {
    let fd = Evaluation::FiniteDifference;

    let exp = SmoothMap::new(f64::exp).with_tower(f64::exp, f64::exp, f64::exp);
    println!("{{exp, 0.4}}   exact {:+.12}  fd {:+.12}", schwarzian(&exp, 0.4)?, schwarzian_with(&exp, 0.4, fd)?);

    let tan = SmoothMap::new(f64::tan).on(Interval::new(-1.5, 1.5)?);
    println!("{{tan, 0.3}}   fd {:+.10}  (exactly 2)", schwarzian(&tan, 0.3)?);

    let m = Mobius::new(2.0, 1.0, 1.0, 1.0)?;
    let map = m.to_smooth_map(Interval::new(-1.0, f64::INFINITY)?);
    println!("{{(2z+1)/(z+1), 0.5}} fd {:+.3e}", schwarzian_with(&map, 0.5, fd)?);

    let worst = verify::mobius_kernel(&mut verify::rng(), 100, 10)?;
    println!("Möbius kernel, 100 maps x 10 points: max |S| = {worst:.3e}");
    let worst = verify::composition_law(&mut verify::rng(), 100, 10)?;
    println!("composition law, 100 pairs: max deviation = {worst:.3e}");
    Ok(())
}
