use gp_backlund::backlund::{is_fixed_point, BacklundMap};
use gp_backlund::calculus::{derivative_fd, Interval, SmoothMap};
use gp_backlund::config::{ExperimentConfig, SeedSpec};
use gp_backlund::functional::{Mobius, PolyG, ShiftMap};
use gp_backlund::gp::{gp_rhs, wavefunction, ClosedForm, GpParams, WaveSource};
use gp_backlund::ode::{integrate_with, linspace, residual, sample, IntegratorOptions, Tolerance};
use proptest::prelude::*;

fn valid(m: &ShiftMap, x: f64) -> bool {
    m.valid_domain().contains(x) && m.solve(x).is_ok()
}

fn constrained(n: u32, eta: f64, c: f64, v: f64) -> GpParams {
    let mut p = GpParams { n, eta, c, v, ..GpParams::default() };
    p.b = p.constrained_b();
    p
}

proptest! {
    #[test]
    fn translation(n in 1u32..=3, eta in 0.0f64..1.0, k in -0.5f64..2.0, x in 0.5f64..5.0) {
        let g = PolyG::new(n, eta).unwrap();
        let m = ShiftMap::new(g, k).unwrap();
        prop_assume!(valid(&m, x));
        let f = m.solve(x).unwrap().f;
        prop_assert!((g.value(f) - g.value(x) - k).abs() < 1e-10);
    }

    #[test]
    fn semigroup(n in 1u32..=3, eta in 0.0f64..1.0, k1 in 0.0f64..1.5, k2 in 0.0f64..1.5, x in 0.5f64..3.0) {
        let g = PolyG::new(n, eta).unwrap();
        let (m1, m2, m12) = (ShiftMap::new(g, k1).unwrap(), ShiftMap::new(g, k2).unwrap(), ShiftMap::new(g, k1 + k2).unwrap());
        let chained = m1.solve(m2.solve(x).unwrap().f).unwrap().f;
        prop_assert!((chained - m12.solve(x).unwrap().f).abs() < 1e-9);
    }

    #[test]
    fn inverse_undoes_shift(n in 1u32..=3, eta in 0.0f64..1.0, k in 0.0f64..2.0, x in 0.5f64..4.0) {
        let m = ShiftMap::new(PolyG::new(n, eta).unwrap(), k).unwrap();
        let back = m.inverse().unwrap().solve(m.solve(x).unwrap().f).unwrap().f;
        prop_assert!((back - x).abs() < 1e-12 * x.max(1.0));
    }

    #[test]
    fn chain_rule(n in 1u32..=3, eta in 0.0f64..1.0, k in -0.5f64..2.0, x in 0.5f64..4.0) {
        let m = ShiftMap::new(PolyG::new(n, eta).unwrap(), k).unwrap();
        prop_assume!(valid(&m, x) && valid(&m, x - 0.05) && m.valid_domain().contains(x - 0.25));
        let fd = derivative_fd(&m.to_smooth_map().without_derivatives(), 1, x).unwrap();
        let exact = m.solve(x).unwrap().fprime;
        prop_assert!((fd - exact).abs() < 1e-6 * exact.abs().max(1.0), "{} vs {}", fd, exact);
    }

    #[test]
    fn mobius_composition(a in prop::array::uniform4(-2.0f64..2.0), b in prop::array::uniform4(-2.0f64..2.0), w in -3.0f64..3.0) {
        let (Ok(m1), Ok(m2)) = (Mobius::new(a[0], a[1], a[2], a[3]), Mobius::new(b[0], b[1], b[2], b[3])) else {
            return Ok(());
        };
        prop_assume!(m1.determinant().abs() > 0.1 && m2.determinant().abs() > 0.1);
        let m = m1.compose(&m2);
        prop_assert!((m.determinant() - m1.determinant() * m2.determinant()).abs() < 1e-12 * (1.0 + m.determinant().abs()));
        let inner = m2.apply(w);
        prop_assume!(inner.is_ok());
        let (Ok(seq), Ok(direct)) = (m1.apply(inner.unwrap()), m.apply(w)) else { return Ok(()); };
        prop_assume!(seq.abs() < 1e6);
        prop_assert!((seq - direct).abs() < 1e-8 * seq.abs().max(1.0));
    }

    #[test]
    fn composition_of_smooth_maps_evaluates_pointwise(a in 0.5f64..1.5, z in -1.0f64..1.0) {
        let f = SmoothMap::new(move |x| a * x + x * x * x);
        let g = SmoothMap::new(f64::exp).on(Interval::real_line());
        let gf = SmoothMap::compose(&g, &f);
        prop_assert_eq!(gf.eval(z), g.eval(f.eval(z)));
    }

    #[test]
    fn modulus_is_amplitude(n in 1u32..=3, eta in 0.0f64..1.0, c in -2.0f64..2.0, v in 0.5f64..2.0,
                            mu in -2.0f64..2.0, x in 0.1f64..5.0, t in -10.0f64..10.0) {
        let p = GpParams { mu, ..constrained(n, eta, c, v) };
        let cf = ClosedForm::new(p).unwrap();
        let s = wavefunction(&p, WaveSource::ClosedForm(&cf), x, t).unwrap();
        prop_assert!((s.modulus() - cf.r(x)).abs() < 1e-14 * cf.r(x).max(1.0));
    }

    #[test]
    fn closed_form_is_fixed(n in 1u32..=3, eta in 0.0f64..1.0, k in 0.0f64..3.0) {
        let p = constrained(n, eta, 1.0, 1.0);
        let cf = ClosedForm::new(p).unwrap();
        let map = BacklundMap::from_poly(p.poly(), k, &cf).unwrap();
        let r = is_fixed_point(&map, &cf, &linspace(0.5, 3.0, 26), 1e-10).unwrap();
        prop_assert!(r.fixed, "deviation {}", r.deviation);
    }

    #[test]
    fn config_text_round_trip(n in 1u32..=4, eta in 0.0f64..3.0, b in -3.0f64..0.0, lo in 0.1f64..1.0,
                              width in 0.1f64..5.0, points in 7usize..5000,
                              ks in prop::collection::vec(-1.0f64..2.0, 0..4), integrate in any::<bool>()) {
        let mut cfg = ExperimentConfig::default();
        cfg.params.n = n;
        cfg.params.eta = eta;
        cfg.params.b = b;
        cfg.grid.x_min = lo;
        cfg.grid.x_max = lo + width;
        cfg.grid.points = points;
        cfg.k_schedule = ks;
        if integrate {
            cfg.seed = SeedSpec::Integrate { x0: lo, r0: 0.3 + eta, rp0: -b };
        }
        prop_assert_eq!(ExperimentConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }
}

// The constant amplitude solves the equation for n = 1, η = 0, b = -c²;
// its integrated residual sits far below the integrator tolerance.
#[test]
fn constant_seed_residual_below_tolerance() {
    let p = GpParams { n: 1, eta: 0.0, ..GpParams::default() };
    let ode = gp_rhs(&p).unwrap();
    let tol = Tolerance::new(1e-10, 1e-10).unwrap();
    let sol = integrate_with(&ode, 1.0, 1.0, 0.0, 3.0, &IntegratorOptions::new(tol)).unwrap();
    let grid = sample(&sol, &linspace(1.0, 3.0, 401)).unwrap();
    assert!(residual(&ode, &grid).unwrap().max_interior < 100.0 * tol.abs);
}
