//! The full wave function from an amplitude and its phase, for the closed
//! form and for an integrated amplitude.

use gp_backlund::gp::{wave_lattice, wavefunction, ClosedForm, GpParams, WaveSource};
use gp_backlund::ode::{integrate_span, linspace, IntegratorOptions, Tolerance};

fn main() -> gp_backlund::Result<()> {
    let p = GpParams { n: 1, eta: 1.0, mu: 1.0, theta0: 0.2, ..GpParams::default() };
    let cf = ClosedForm::new(p)?;
    for t in [0.0, std::f64::consts::PI] {
        let s = wavefunction(&p, WaveSource::ClosedForm(&cf), 1.0, t)?;
        println!("closed form x=1 t={t:.4}: psi = {:+.10} {:+.10}i, |psi| = {:.10}", s.re, s.im, s.modulus());
    }

    let ode = gp_backlund::gp::gp_rhs(&p)?;
    let opts = IntegratorOptions::new(Tolerance::new(1e-10, 1e-10)?);
    // closed-form initial data, so both phases should agree up to the anchor
    let dense = integrate_span(&ode, 1.0, cf.r(1.0), cf.r_prime(1.0), 1.0, 2.0, &opts)?;
    let xs = linspace(1.0, 2.0, 5);
    let numerical = wave_lattice(&p, WaveSource::Numerical { amplitude: &dense, x_ref: 1.0 }, &xs, &[0.0])?;
    for s in numerical {
        let exact = cf.phase(s.x, 1.0);
        let gap = (s.im.atan2(s.re) - exact).rem_euclid(std::f64::consts::TAU);
        let gap = gap.min(std::f64::consts::TAU - gap);
        println!("x = {:.2}: closed-form phase {exact:+.10}, numerical differs by {gap:.2e} (mod 2 pi)", s.x);
    }
    Ok(())
}
