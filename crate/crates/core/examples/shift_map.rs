//! Pointwise solution of G(f(x)) = G(x) + K and its derivative jet.

use gp_backlund::functional::{PolyG, ShiftMap};
use gp_backlund::ode::linspace;

fn main() -> gp_backlund::Result<()> {
    let g = PolyG::new(2, 0.5)?;
    let m = ShiftMap::new(g, 0.75)?;
    println!("G(x) = x^2 (1 + 0.5 x^2), K = 0.75, valid domain {}", m.valid_domain());
    println!("{:>6} {:>14} {:>14} {:>14} {:>12}", "x", "f", "f'", "f''", "G(f)-G(x)-K");
    for x in linspace(0.5, 3.0, 6) {
        let j = m.jet(x)?;
        println!("{x:6.2} {:14.10} {:14.10} {:14.10} {:12.2e}", j.f, j.d1, j.d2, g.value(j.f) - g.value(x) - 0.75);
    }

    let half = ShiftMap::new(g, 0.375)?;
    let x = 1.3;
    let twice = half.solve(half.solve(x)?.f)?.f;
    println!("semigroup: f_(K/2)(f_(K/2)(1.3)) - f_K(1.3) = {:.2e}", twice - m.solve(x)?.f);
    let back = m.inverse()?.solve(m.solve(x)?.f)?.f;
    println!("inverse:   f_(-K)(f_K(1.3)) - 1.3 = {:.2e}", back - x);

    let neg = ShiftMap::new(g, -0.75)?;
    println!("K = -0.75 is defined on {}; f(0.5) -> {:?}", neg.valid_domain(), neg.solve(0.5).err());
    Ok(())
}
