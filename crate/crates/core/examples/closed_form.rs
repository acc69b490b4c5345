//! The closed-form amplitude, the constraint that makes it a solution and
//! its behaviour near the origin.

use gp_backlund::gp::{boundedness_report, ClosedForm, GpParams};
use gp_backlund::ode::linspace;

fn main() -> gp_backlund::Result<()> {
    let xs = linspace(0.5, 5.0, 401);
    println!("c = 1.5, v = 0.8, b = -c^2/v^6");
    for n in 1..=3 {
        for eta in [0.0, 0.5, 1.0] {
            let mut p = GpParams { n, eta, c: 1.5, v: 0.8, ..GpParams::default() };
            p.b = p.constrained_b();
            let cf = ClosedForm::new(p)?;
            let exact = xs.iter().map(|&x| cf.pointwise_residual(x).abs()).fold(0.0, f64::max);
            let off = ClosedForm::unconstrained(GpParams { b: p.b + 0.01, ..p })?;
            let perturbed = xs.iter().map(|&x| off.pointwise_residual(x).abs()).fold(0.0, f64::max);
            println!("n={n} eta={eta:.1}: residual {exact:.2e}, with b+0.01 {perturbed:.2e}");
        }
    }
    for n in 1..=3 {
        let b = boundedness_report(&GpParams { n, eta: 0.0, ..GpParams::default() })?;
        println!("n={n}: r ~ x^{:+.1} near 0, r(1e-4)/r(1e-2) = {:.6}, bounded: {}", b.exponent, b.ratio, b.bounded);
    }
    Ok(())
}
