//! Acceptance criteria 1 to 10. Runs as a plain program so every criterion
//! prints one PASS or FAIL line; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use gp_backlund::backlund::{is_fixed_point, BacklundMap};
use gp_backlund::functional::{PolyG, ShiftMap};
use gp_backlund::gp::{ClosedForm, GpParams};
use gp_backlund::ode::{linspace, Tolerance};
use gp_backlund::verify::{self, SWEEP_ETA, SWEEP_N};

const MOBIUS_TOL: f64 = 1e-7;
const COMPOSITION_TOL: f64 = 1e-6;
const TRANSLATION_TOL: f64 = 1e-10;
const SEMIGROUP_TOL: f64 = 1e-9;
const Q_IDENTITY_TOL: f64 = 1e-5;
const LINEAR_COEFFICIENT_TOL: f64 = 1e-6;
const CLOSED_FORM_TOL: f64 = 1e-7;
const CONSTRAINT_ACTIVITY_MIN: f64 = 1e-3;
const MAPPING_TOL: f64 = 1e-5;
const SEED_ODE_TOL: f64 = 1e-10;
const FIXED_POINT_TOL: f64 = 1e-10;
const GENERIC_DEVIATION_MIN: f64 = 1e-2;
const BOUNDEDNESS_REL_TOL: f64 = 1e-6;
const ORDER_RANGE: (f64, f64) = (4.0, 6.0);

const SHIFTS: [f64; 6] = [-0.5, -0.25, 0.25, 0.5, 1.0, 2.0];
const MAPPING_N: [u32; 2] = [1, 2];

struct Outcome {
    pass: bool,
    detail: String,
}

fn below(value: f64, tol: f64, what: &str) -> Outcome {
    Outcome {
        pass: value < tol,
        detail: format!("{what} {value:.3e} < {tol:.0e}"),
    }
}

fn all(parts: Vec<Outcome>) -> Outcome {
    Outcome {
        pass: parts.iter().all(|o| o.pass),
        detail: parts.into_iter().map(|o| o.detail).collect::<Vec<_>>().join("; "),
    }
}

fn constrained(n: u32, eta: f64) -> GpParams {
    let mut p = GpParams { n, eta, ..GpParams::default() };
    p.b = p.constrained_b();
    p
}

/// Points of `xs` at which the shift `k` has a real positive root.
fn valid_points(g: PolyG, k: f64, xs: &[f64]) -> Vec<f64> {
    let m = ShiftMap::new(g, k).unwrap();
    xs.iter().copied().filter(|&x| m.valid_domain().contains(x) && m.solve(x).is_ok()).collect()
}

fn mobius_kernel() -> Outcome {
    let worst = verify::mobius_kernel(&mut verify::rng(), 100, 10).unwrap();
    below(worst, MOBIUS_TOL, "max |{m,z}| over 100 maps x 10 points")
}

fn composition_law() -> Outcome {
    let worst = verify::composition_law(&mut verify::rng(), 100, 10).unwrap();
    below(worst, COMPOSITION_TOL, "max deviation over 100 pairs")
}

fn translation() -> Outcome {
    let xs = linspace(0.5, 5.0, 46);
    let (mut t, mut s) = (0.0f64, 0.0f64);
    for n in SWEEP_N {
        for eta in SWEEP_ETA {
            let g = PolyG::new(n, eta).unwrap();
            for k in SHIFTS {
                let pts = valid_points(g, k, &xs);
                t = t.max(verify::translation_property(g, &[k], &pts).unwrap());
                for k2 in SHIFTS {
                    let pts: Vec<f64> = valid_points(g, k2, &pts)
                        .into_iter()
                        .filter(|&x| {
                            let inner = ShiftMap::new(g, k2).unwrap().solve(x).unwrap().f;
                            !valid_points(g, k, &[inner]).is_empty() && !valid_points(g, k + k2, &[x]).is_empty()
                        })
                        .collect();
                    s = s.max(semigroup_pair(g, k, k2, &pts));
                }
            }
        }
    }
    all(vec![
        below(t, TRANSLATION_TOL, "|G(f)-G(x)-K|"),
        below(s, SEMIGROUP_TOL, "semigroup"),
    ])
}

fn semigroup_pair(g: PolyG, k1: f64, k2: f64, xs: &[f64]) -> f64 {
    let (m1, m2, m12) = (
        ShiftMap::new(g, k1).unwrap(),
        ShiftMap::new(g, k2).unwrap(),
        ShiftMap::new(g, k1 + k2).unwrap(),
    );
    xs.iter()
        .map(|&x| (m1.solve(m2.solve(x).unwrap().f).unwrap().f - m12.solve(x).unwrap().f).abs())
        .fold(0.0, f64::max)
}

fn q_identity() -> Outcome {
    let xs = linspace(0.5, 5.0, 46);
    let mut worst = 0.0f64;
    for n in SWEEP_N {
        for eta in SWEEP_ETA {
            let g = PolyG::new(n, eta).unwrap();
            for k in SHIFTS {
                // keep the stencil clear of the lower end of the valid domain
                let lo = ShiftMap::new(g, k).unwrap().valid_domain().lo;
                let pts: Vec<f64> = xs.iter().copied().filter(|&x| x > lo + 0.25).collect();
                worst = worst.max(verify::q_identity(g, &[k], &pts).unwrap());
            }
        }
    }
    below(worst, Q_IDENTITY_TOL, "max |Q(x) - f'^2 Q(f) - {f,x}|")
}

fn linear_coefficient() -> Outcome {
    let worst = verify::linear_coefficient(&constrained(1, 1.0), &linspace(0.5, 5.0, 91)).unwrap();
    below(worst, LINEAR_COEFFICIENT_TOL, "max difference over 3x3 sweep")
}

fn closed_form() -> Outcome {
    let xs = linspace(0.5, 5.0, 401);
    let (mut exact, mut perturbed) = (0.0f64, f64::INFINITY);
    for n in SWEEP_N {
        for eta in SWEEP_ETA {
            let p = constrained(n, eta);
            exact = exact.max(verify::closed_form_residual(&p, &xs).unwrap());
            let q = GpParams { b: p.b + 0.01, ..p };
            perturbed = perturbed.min(verify::closed_form_residual(&q, &xs).unwrap());
        }
    }
    all(vec![
        below(exact, CLOSED_FORM_TOL, "pointwise residual"),
        Outcome {
            pass: perturbed > CONSTRAINT_ACTIVITY_MIN,
            detail: format!("perturbed b residual {perturbed:.3e} > {CONSTRAINT_ACTIVITY_MIN:.0e}"),
        },
    ])
}

fn solution_mapping() -> (Outcome, f64) {
    let tol = Tolerance::new(SEED_ODE_TOL, SEED_ODE_TOL).unwrap();
    let (mut worst, mut seed, mut generic) = (0.0f64, 0.0f64, f64::INFINITY);
    for n in MAPPING_N {
        for eta in SWEEP_ETA {
            let m = verify::solution_mapping(&constrained(n, eta), tol).unwrap();
            worst = worst.max(m.transformed);
            seed = seed.max(m.seed);
            generic = generic.min(m.generic_deviation);
        }
    }
    let mut o = below(worst, MAPPING_TOL, "transformed residual");
    o.detail.push_str(&format!(" (seed residual {seed:.3e})"));
    (o, generic)
}

fn fixed_point(generic: f64) -> Outcome {
    let xs = linspace(1.0, 2.0, 201);
    let (mut worst, mut tried, mut all_true) = (0.0f64, 0, true);
    for n in SWEEP_N {
        for eta in SWEEP_ETA {
            let p = constrained(n, eta);
            let cf = ClosedForm::new(p).unwrap();
            for k in SHIFTS {
                if valid_points(p.poly(), k, &xs).len() < xs.len() {
                    continue;
                }
                let map = BacklundMap::from_poly(p.poly(), k, &cf).unwrap();
                let r = is_fixed_point(&map, &cf, &xs, FIXED_POINT_TOL).unwrap();
                worst = worst.max(r.deviation);
                all_true &= r.fixed;
                tried += 1;
            }
        }
    }
    all(vec![
        Outcome {
            pass: all_true && worst < FIXED_POINT_TOL,
            detail: format!("closed form fixed for {tried} (n,eta,K), deviation {worst:.3e} < {FIXED_POINT_TOL:.0e}"),
        },
        Outcome {
            pass: generic > GENERIC_DEVIATION_MIN,
            detail: format!("generic seeds deviation {generic:.3e} > {GENERIC_DEVIATION_MIN:.0e}"),
        },
    ])
}

fn boundedness() -> Outcome {
    let worst = SWEEP_N.iter().map(|&n| verify::boundedness_ratio(n).unwrap()).fold(0.0, f64::max);
    let bounded: Vec<bool> = SWEEP_N
        .iter()
        .map(|&n| gp_backlund::gp::boundedness_report(&GpParams { n, eta: 0.0, ..GpParams::default() }).unwrap().bounded)
        .collect();
    Outcome {
        pass: worst < BOUNDEDNESS_REL_TOL && bounded == [true, false, false],
        detail: format!("ratio relative error {worst:.3e} < {BOUNDEDNESS_REL_TOL:.0e}, bounded for n = 1 only"),
    }
}

fn integrator_order() -> Outcome {
    let sweep = verify::integrator_order(&verify::ORDER_TOLS).unwrap();
    Outcome {
        pass: sweep.slope >= ORDER_RANGE.0 && sweep.slope <= ORDER_RANGE.1,
        detail: format!("slope {:.3} in [{}, {}]", sweep.slope, ORDER_RANGE.0, ORDER_RANGE.1),
    }
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut run = |id: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} criterion {id:>2} {name}: {} [{:.2?}]", o.detail, start.elapsed());
        if !o.pass {
            failed += 1;
        }
    };
    let mut generic = f64::NAN;
    run(1, "schwarzian kernel", &mut mobius_kernel);
    run(2, "composition law", &mut composition_law);
    run(3, "translation property", &mut translation);
    run(4, "Q-identity", &mut q_identity);
    run(5, "linear coefficient", &mut linear_coefficient);
    run(6, "closed-form solution", &mut closed_form);
    run(7, "solution mapping", &mut || {
        let (o, g) = solution_mapping();
        generic = g;
        o
    });
    run(8, "fixed point", &mut || fixed_point(generic));
    run(9, "boundedness", &mut boundedness);
    run(10, "integrator order", &mut integrator_order);
    if failed == 0 {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
