//! The stationary reduction of the Gross-Pitaevskii equation for
//! `G(x) = xⁿ(1 + ηxⁿ)`:
//!
//! ```text
//! r'' = c²/r³ + ((n²-1)/(4x²) + 3x^(2n-2) η² n² / (1+2ηxⁿ)²) r + b x^(3n-3) (1+2ηxⁿ)³ r³
//! ```
//!
//! together with the closed-form solution `r = v / √(x^(n-1)(1+2ηxⁿ))`
//! (valid when `b v⁶ + c² = 0`), the phase `θ' = c / r²` and the wave
//! function `ψ = r e^{i(θ - μt)}`.

use serde::{Deserialize, Serialize};

use crate::calculus::{schwarzian_with, Evaluation, Interval, SmoothMap};
use crate::error::{Error, Result};
use crate::functional::PolyG;
use crate::ode::{Amplitude, GridMeta, Provenance, SecondOrderOde, SolutionGrid};
use crate::quadrature;

/// Smallest `x` admitted by [`gp_rhs`].
pub const X_FLOOR: f64 = 1e-8;
const PHASE_QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpParams {
    pub n: u32,
    pub eta: f64,
    /// Cubic coefficient as it appears in the reduced equation.
    pub b: f64,
    /// Angular-momentum constant, `r² θ' = c`.
    pub c: f64,
    /// Amplitude constant of the closed-form solution.
    pub v: f64,
    pub mu: f64,
    pub theta0: f64,
}

impl Default for GpParams {
    fn default() -> Self {
        Self {
            n: 1,
            eta: 1.0,
            b: -1.0,
            c: 1.0,
            v: 1.0,
            mu: 0.0,
            theta0: 0.0,
        }
    }
}

impl GpParams {
    pub fn validate(&self) -> Result<()> {
        PolyG::new(self.n, self.eta)?;
        if !(self.v > 0.0 && self.v.is_finite()) {
            return Err(Error::InvalidParameter(format!("v must be positive, got {}", self.v)));
        }
        for (name, value) in [("b", self.b), ("c", self.c), ("mu", self.mu), ("theta0", self.theta0)] {
            if !value.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    pub fn poly(&self) -> PolyG {
        PolyG::new(self.n, self.eta).expect("validated parameters")
    }

    /// `b v⁶ + c²`; zero when the closed form solves the equation.
    pub fn constraint_value(&self) -> f64 {
        self.b * self.v.powi(6) + self.c * self.c
    }

    pub fn satisfies_constraint(&self) -> bool {
        self.constraint_value().abs() <= 1e-10 * (self.c * self.c).max(1.0)
    }

    /// The `b` that satisfies the constraint for the current `c`, `v`.
    pub fn constrained_b(&self) -> f64 {
        -self.c * self.c / self.v.powi(6)
    }

    /// Coefficient of `(G')³ r³` in the representation `2g = b (G')³`:
    /// the reduced equation's `b` absorbs the factor `n³`.
    pub fn representation_coefficient(&self) -> f64 {
        self.b / (self.n as f64).powi(3)
    }

    pub fn snapshot(&self) -> GridMeta {
        GridMeta::new(Provenance::External)
            .with_param("n", self.n as f64)
            .with_param("eta", self.eta)
            .with_param("b", self.b)
            .with_param("c", self.c)
            .with_param("v", self.v)
            .with_param("mu", self.mu)
            .with_param("theta0", self.theta0)
    }
}

/// Coefficient of `r` in the reduced equation.
pub fn linear_coefficient(p: &GpParams, x: f64) -> f64 {
    let n = p.n as f64;
    let xn = x.powi(p.n as i32);
    let den = 1.0 + 2.0 * p.eta * xn;
    (n * n - 1.0) / (4.0 * x * x) + 3.0 * x.powi(2 * p.n as i32 - 2) * p.eta * p.eta * n * n / (den * den)
}

/// Coefficient of `r³` in the reduced equation.
pub fn cubic_coefficient(p: &GpParams, x: f64) -> f64 {
    let xn = x.powi(p.n as i32);
    p.b * x.powi(3 * p.n as i32 - 3) * (1.0 + 2.0 * p.eta * xn).powi(3)
}

pub fn rhs_value(p: &GpParams, x: f64, r: f64) -> f64 {
    p.c * p.c / r.powi(3) + linear_coefficient(p, x) * r + cubic_coefficient(p, x) * r.powi(3)
}

/// The reduced equation on `(X_FLOOR, ∞)`.
pub fn gp_rhs(p: &GpParams) -> Result<SecondOrderOde> {
    p.validate()?;
    let p = *p;
    Ok(SecondOrderOde::new(
        move |x, r| rhs_value(&p, x, r),
        Interval {
            lo: X_FLOOR,
            hi: f64::INFINITY,
        },
    ))
}

/// Linear coefficient minus `-(1/2){G, x}`; zero when `w = G` realises the
/// potential term.
pub fn linear_coefficient_check(p: &GpParams, x: f64) -> Result<f64> {
    linear_coefficient_check_with(p, x, Evaluation::Auto)
}

pub fn linear_coefficient_check_with(p: &GpParams, x: f64, mode: Evaluation) -> Result<f64> {
    p.validate()?;
    if !(x > 0.0) {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    let s = schwarzian_with(&p.poly().to_smooth_map(), x, mode)?;
    Ok(linear_coefficient(p, x) + 0.5 * s)
}

/// `r(x) = v / √(x^(n-1)(1+2ηxⁿ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    params: GpParams,
}

impl ClosedForm {
    /// Fails with `ConstraintViolated` unless `b v⁶ + c² = 0`.
    pub fn new(params: GpParams) -> Result<Self> {
        params.validate()?;
        if !params.satisfies_constraint() {
            return Err(Error::ConstraintViolated(params.constraint_value()));
        }
        Ok(Self { params })
    }

    /// The same formula without the constraint check, for perturbation
    /// studies.
    pub fn unconstrained(params: GpParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &GpParams {
        &self.params
    }

    // r = v P^(-1/2) with P = G'/n = x^(n-1)(1+2ηxⁿ)
    fn pieces(&self, x: f64) -> (f64, f64, f64) {
        let g = self.params.poly();
        let n = self.params.n as f64;
        (g.d1(x) / n, g.d2(x) / n, g.d3(x) / n)
    }

    pub fn r(&self, x: f64) -> f64 {
        let (p, _, _) = self.pieces(x);
        self.params.v / p.sqrt()
    }

    pub fn r_prime(&self, x: f64) -> f64 {
        let (p, p1, _) = self.pieces(x);
        -0.5 * self.params.v * p1 / p.powf(1.5)
    }

    pub fn r_second(&self, x: f64) -> f64 {
        let (p, p1, p2) = self.pieces(x);
        self.params.v * (0.75 * p1 * p1 / p.powf(2.5) - 0.5 * p2 / p.powf(1.5))
    }

    /// `r'' - rhs(x, r)` with exact derivatives.
    pub fn pointwise_residual(&self, x: f64) -> f64 {
        self.r_second(x) - rhs_value(&self.params, x, self.r(x))
    }

    /// `r` on `(0, ∞)` with closed-form first and second derivatives.
    pub fn to_smooth_map(&self) -> SmoothMap {
        let (a, b, c) = (*self, *self, *self);
        SmoothMap::new(move |x| a.r(x))
            .on(Interval::positive())
            .with_derivative(1, move |x| b.r_prime(x))
            .with_derivative(2, move |x| c.r_second(x))
    }

    pub fn sample(&self, xs: &[f64]) -> Result<SolutionGrid> {
        if let Some(&x) = xs.iter().find(|&&x| !(x > 0.0)) {
            return Err(Error::Domain(format!("closed form is sampled on x > 0, got {x}")));
        }
        let mut meta = self.params.snapshot();
        meta.source = Provenance::ClosedForm;
        SolutionGrid::new(
            xs.to_vec(),
            xs.iter().map(|&x| self.r(x)).collect(),
            xs.iter().map(|&x| self.r_prime(x)).collect(),
            meta,
        )
    }

    /// `θ₀ + c (G(x) - G(x_ref)) / (n v²)`; `x_ref = 0` anchors at the
    /// origin, where `G` vanishes.
    pub fn phase(&self, x: f64, x_ref: f64) -> f64 {
        let p = &self.params;
        let g = p.poly();
        let g_ref = if x_ref == 0.0 { 0.0 } else { g.value(x_ref) };
        p.theta0 + p.c * (g.value(x) - g_ref) / (p.n as f64 * p.v * p.v)
    }
}

impl Amplitude for ClosedForm {
    fn bounds(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn covers(&self, x: f64) -> bool {
        x > 0.0 && x.is_finite()
    }

    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        if !self.covers(x) {
            return Err(Error::Domain(format!("closed form is defined on x > 0, got {x}")));
        }
        Ok((self.r(x), self.r_prime(x)))
    }
}

/// Closed-form amplitude at `x`; fails with `ConstraintViolated` when the
/// parameters do not make it a solution.
pub fn closed_form_r(p: &GpParams, x: f64) -> Result<f64> {
    let cf = ClosedForm::new(*p)?;
    if !(x > 0.0) {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    Ok(cf.r(x))
}

/// `θ(x) = θ₀ + ∫_{x_ref}^{x} c / r(s)² ds` by adaptive quadrature.
pub fn phase_numerical(p: &GpParams, amplitude: &dyn Amplitude, x_ref: f64, x: f64) -> Result<f64> {
    Ok(p.theta0 + phase_increment(p, amplitude, x_ref, x)?)
}

fn phase_increment(p: &GpParams, amplitude: &dyn Amplitude, a: f64, b: f64) -> Result<f64> {
    if p.c == 0.0 || a == b {
        return Ok(0.0);
    }
    for x in [a, b] {
        if !amplitude.covers(x) {
            let (lo, hi) = amplitude.bounds();
            return Err(Error::OutOfRange { x, lo, hi });
        }
    }
    let c = p.c;
    quadrature::integrate(
        |s| match amplitude.eval(s) {
            Ok((r, _)) => c / (r * r),
            Err(_) => f64::NAN,
        },
        a,
        b,
        PHASE_QUAD_TOL,
    )
}

/// Where the wave function takes its amplitude and phase from.
#[derive(Clone, Copy)]
pub enum WaveSource<'a> {
    /// Closed-form amplitude and antiderivative anchored at the origin.
    ClosedForm(&'a ClosedForm),
    /// Any amplitude, phase by quadrature from `x_ref` where `θ = θ₀`.
    Numerical { amplitude: &'a dyn Amplitude, x_ref: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveSample {
    pub x: f64,
    pub t: f64,
    pub re: f64,
    pub im: f64,
}

impl WaveSample {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

fn assemble(p: &GpParams, x: f64, t: f64, r: f64, theta: f64) -> WaveSample {
    let (s, c) = (theta - p.mu * t).sin_cos();
    WaveSample { x, t, re: r * c, im: r * s }
}

/// `ψ(x, t) = r(x) e^{i(θ(x) - μt)}`.
pub fn wavefunction(p: &GpParams, source: WaveSource<'_>, x: f64, t: f64) -> Result<WaveSample> {
    let (r, theta) = match source {
        WaveSource::ClosedForm(cf) => {
            let (r, _) = cf.eval(x)?;
            (r, cf.phase(x, 0.0))
        }
        WaveSource::Numerical { amplitude, x_ref } => {
            let (r, _) = amplitude.eval(x)?;
            (r, phase_numerical(p, amplitude, x_ref, x)?)
        }
    };
    Ok(assemble(p, x, t, r, theta))
}

/// `ψ` on the lattice `xs × ts`, ordered by `x` then `t`. For numerical
/// sources the phase is accumulated between consecutive `x`.
pub fn wave_lattice(p: &GpParams, source: WaveSource<'_>, xs: &[f64], ts: &[f64]) -> Result<Vec<WaveSample>> {
    let mut out = Vec::with_capacity(xs.len() * ts.len());
    let mut previous: Option<(f64, f64)> = None;
    for &x in xs {
        let (r, theta) = match source {
            WaveSource::ClosedForm(cf) => (cf.eval(x)?.0, cf.phase(x, 0.0)),
            WaveSource::Numerical { amplitude, x_ref } => {
                let (from, base) = previous.unwrap_or((x_ref, p.theta0));
                let theta = base + phase_increment(p, amplitude, from, x)?;
                previous = Some((x, theta));
                (amplitude.eval(x)?.0, theta)
            }
        };
        out.extend(ts.iter().map(|&t| assemble(p, x, t, r, theta)));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundednessReport {
    /// `r ~ v x^exponent` as `x → 0⁺`.
    pub exponent: f64,
    pub bounded: bool,
    /// `(x, r(x))` at `x = 1e-2, 1e-4, 1e-6`.
    pub samples: Vec<(f64, f64)>,
    /// `r(1e-4) / r(1e-2)`.
    pub ratio: f64,
    /// `10^(n-1)`, the ratio implied by the exponent.
    pub expected_ratio: f64,
}

/// Small-`x` behaviour of the closed form.
pub fn boundedness_report(p: &GpParams) -> Result<BoundednessReport> {
    let cf = ClosedForm::unconstrained(*p)?;
    let samples: Vec<(f64, f64)> = [1e-2, 1e-4, 1e-6].iter().map(|&x| (x, cf.r(x))).collect();
    Ok(BoundednessReport {
        exponent: -(p.n as f64 - 1.0) / 2.0,
        bounded: p.n <= 1,
        ratio: samples[1].1 / samples[0].1,
        expected_ratio: 10f64.powi(p.n as i32 - 1),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::derivative;

    fn params(n: u32, eta: f64, b: f64, c: f64) -> GpParams {
        GpParams { n, eta, b, c, ..GpParams::default() }
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(rhs_value(&params(1, 0.0, -1.0, 1.0), 2.0, 1.0), 0.0);
        assert_eq!(rhs_value(&params(1, 0.0, 0.0, 0.0), 2.0, 3.0), 0.0);
        assert_eq!(rhs_value(&params(2, 0.0, 0.0, 0.0), 1.0, 1.0), 0.75);
        let ode = gp_rhs(&params(2, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(ode.rhs(1.0, 1.0), 0.75);
        assert_eq!(ode.domain().lo, X_FLOOR);
    }

    #[test]
    fn linear_coefficient_examples() {
        assert!(linear_coefficient_check(&params(1, 0.0, -1.0, 1.0), 3.0).unwrap().abs() < 1e-14);
        assert!(linear_coefficient_check(&params(2, 0.0, -1.0, 1.0), 1.0).unwrap().abs() < 1e-8);
        let fd = linear_coefficient_check_with(&params(1, 1.0, -1.0, 1.0), 1.5, Evaluation::FiniteDifference).unwrap();
        assert!(fd.abs() < 1e-6, "{fd}");
    }

    #[test]
    fn closed_form_examples() {
        let p = params(1, 0.0, -1.0, 1.0);
        assert_eq!(closed_form_r(&p, 7.0).unwrap(), 1.0);
        let p = params(1, 1.0, -1.0, 1.0);
        assert!((closed_form_r(&p, 1.0).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        // b v⁶ + c² = -4·64 + 256 = 0
        let p = GpParams { n: 2, eta: 0.0, b: -4.0, c: 16.0, v: 2.0, ..GpParams::default() };
        assert!((closed_form_r(&p, 4.0).unwrap() - 1.0).abs() < 1e-15);
        let bad = params(1, 1.0, -0.99, 1.0);
        assert!(matches!(closed_form_r(&bad, 1.0), Err(Error::ConstraintViolated(_))));
    }

    #[test]
    fn closed_form_derivatives_match_fd() {
        for (n, eta) in [(1, 0.5), (2, 1.0), (3, 0.0), (3, 1.0)] {
            let cf = ClosedForm::new(params(n, eta, -1.0, 1.0)).unwrap();
            let exact = cf.to_smooth_map();
            let fd = exact.without_derivatives();
            for x in [0.7, 1.4, 3.0] {
                for k in 1..=2 {
                    let a = derivative(&exact, k, x).unwrap();
                    let b = derivative(&fd, k, x).unwrap();
                    assert!((a - b).abs() < 1e-7 * a.abs().max(1.0), "n={n} k={k}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn closed_form_solves_when_constrained() {
        for n in 1..=3 {
            for eta in [0.0, 0.5, 1.0] {
                let cf = ClosedForm::new(params(n, eta, -1.0, 1.0)).unwrap();
                for x in [0.5, 1.0, 2.5, 5.0] {
                    assert!(cf.pointwise_residual(x).abs() < 1e-10, "n={n} eta={eta} x={x}");
                }
            }
        }
    }

    #[test]
    fn phase_examples() {
        let cf = ClosedForm::new(params(1, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(cf.phase(3.0, 0.0), 0.0);
        let cf = ClosedForm::new(params(1, 0.0, -1.0, 1.0)).unwrap();
        assert_eq!(cf.phase(2.0, 0.0), 2.0);
        let p = params(1, 1.0, -1.0, 1.0);
        let cf = ClosedForm::new(p).unwrap();
        assert_eq!(cf.phase(1.0, 0.0), 2.0);
        // quadrature of c/r² = 1 + 2x from 0 to 1
        let q = phase_numerical(&p, &cf, 1e-300, 1.0).unwrap();
        assert!((q - 2.0).abs() < 1e-10);
        assert!((phase_numerical(&p, &cf, 0.5, 2.0).unwrap() - (cf.phase(2.0, 0.0) - cf.phase(0.5, 0.0))).abs() < 1e-10);
    }

    #[test]
    fn wavefunction_examples() {
        let p = GpParams { n: 1, eta: 0.0, b: 0.0, c: 0.0, v: 1.0, mu: 0.0, theta0: 0.0 };
        let cf = ClosedForm::new(p).unwrap();
        let w = wavefunction(&p, WaveSource::ClosedForm(&cf), 3.0, 0.0).unwrap();
        assert_eq!((w.re, w.im), (1.0, 0.0));

        let p = GpParams { mu: 1.0, ..p };
        let cf = ClosedForm::new(p).unwrap();
        let w = wavefunction(&p, WaveSource::ClosedForm(&cf), 3.0, std::f64::consts::PI).unwrap();
        assert!((w.re + 1.0).abs() < 1e-15 && w.im.abs() < 1e-15);

        let p = params(1, 1.0, -1.0, 1.0);
        let cf = ClosedForm::new(p).unwrap();
        let w = wavefunction(&p, WaveSource::ClosedForm(&cf), 1.0, 0.0).unwrap();
        let m = 1.0 / 3f64.sqrt();
        assert!((w.re - m * 2f64.cos()).abs() < 1e-15);
        assert!((w.im - m * 2f64.sin()).abs() < 1e-15);
        assert!((w.modulus() - m).abs() < 1e-15);
    }

    #[test]
    fn lattice_numerical_matches_closed_form_phase() {
        let p = params(2, 0.5, -1.0, 1.0);
        let cf = ClosedForm::new(p).unwrap();
        let xs = [0.5, 0.8, 1.3, 2.0];
        let numerical = wave_lattice(&p, WaveSource::Numerical { amplitude: &cf, x_ref: 0.5 }, &xs, &[0.0]).unwrap();
        let offset = cf.phase(0.5, 0.0);
        for (w, &x) in numerical.iter().zip(&xs) {
            let theta = cf.phase(x, 0.0) - offset;
            let r = cf.r(x);
            assert!((w.re - r * theta.cos()).abs() < 1e-9, "x={x}");
            assert!((w.im - r * theta.sin()).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn boundedness() {
        let r = boundedness_report(&params(1, 0.0, -1.0, 1.0)).unwrap();
        assert!(r.bounded);
        assert_eq!(r.exponent, 0.0);
        let r = boundedness_report(&params(2, 0.0, -1.0, 1.0)).unwrap();
        assert!(!r.bounded);
        assert!((r.ratio - 10.0).abs() < 1e-12);
        let r = boundedness_report(&params(3, 0.0, -1.0, 1.0)).unwrap();
        assert!((r.ratio - 100.0).abs() < 1e-10);
    }

    #[test]
    fn representation_coefficient_absorbs_n_cubed() {
        let p = GpParams { n: 2, b: -8.0, ..GpParams::default() };
        assert_eq!(p.representation_coefficient(), -1.0);
    }
}
