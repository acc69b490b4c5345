//! The map w⁻¹ ∘ m ∘ w for a general Möbius m, with w = G. A translation
//! m(w) = w + K reproduces the shift map.

use gp_backlund::calculus::{derivative, schwarzian, Interval};
use gp_backlund::functional::{conjugate_f, Invertible, Mobius, PolyG, ShiftMap};

fn main() -> gp_backlund::Result<()> {
    let g = PolyG::new(1, 1.0)?;
    let w = Invertible::from_poly(g);
    let working = Interval::new(0.5, 3.0)?;

    let f = conjugate_f(&w, &Mobius::translation(0.5), working)?;
    let shift = ShiftMap::new(g, 0.5)?;
    for x in [0.75, 1.5, 2.5] {
        println!("x = {x}: conjugated {:.14}  shift map {:.14}", f.eval(x), shift.solve(x)?.f);
    }

    // a scaling with a pole well away from w([0.5, 3])
    let m = Mobius::new(1.2, 0.1, 0.01, 1.0)?;
    let f = conjugate_f(&w, &m, working)?;
    let gm = g.to_smooth_map();
    for x in [0.75, 1.5] {
        let fx = f.eval(x);
        let fp = derivative(&f, 1, x)?;
        // {w, x} = {w, f} f'^2 + {f, x} for any Möbius m
        let lhs = schwarzian(&gm, x)?;
        let rhs = schwarzian(&gm, fx)? * fp * fp + schwarzian(&f, x)?;
        println!("x = {x}: f = {fx:.10}, Schwarzian identity deviation {:.2e}", lhs - rhs);
    }
    Ok(())
}
