//! The auto-Bäcklund transformation `r₁(x)² f'(x) = r₀(f(x))²`, where `f`
//! solves `G(f(x)) = G(x) + K`.
//!
//! For the reduced Gross-Pitaevskii equation this reads
//! `r₁(x)² = r₀(f)² · f^(n-1)(1+2ηfⁿ) / (x^(n-1)(1+2ηxⁿ))`, and the positive
//! branch `r₁ = r₀(f)/√f'` is always taken.

use serde::Serialize;

use crate::calculus::Interval;
use crate::error::{Error, Result};
use crate::functional::{PolyG, ShiftMap};
use crate::ode::{Amplitude, GridMeta, Provenance, SolutionGrid};

/// The transformation for one translation constant `K`, restricted to the
/// points `f` sends into the seed's domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BacklundMap {
    shift: ShiftMap,
    source_domain: Interval,
}

impl BacklundMap {
    /// Builds the map for a seed whose amplitude is known on `seed.bounds()`.
    pub fn new(shift: ShiftMap, seed: &dyn Amplitude) -> Result<Self> {
        let (seed_lo, seed_hi) = seed.bounds();
        let inverse = shift.inverse()?;
        let g = shift.g();
        // f is increasing, so the preimage of the seed's interval is an interval
        let preimage = |y: f64| -> Option<f64> {
            if y.is_infinite() {
                return Some(y);
            }
            if !(y > 0.0) || g.value(y) - shift.k() <= 0.0 {
                return None;
            }
            inverse.solve(y).ok().map(|r| r.f)
        };
        let lo = preimage(seed_lo).unwrap_or(0.0).max(shift.valid_domain().lo);
        let hi = preimage(seed_hi).ok_or_else(|| {
            Error::Domain(format!(
                "no point is mapped into the seed domain ({seed_lo}, {seed_hi}) for K = {}",
                shift.k()
            ))
        })?;
        let source_domain = Interval::new(lo, hi)?;
        Ok(Self { shift, source_domain })
    }

    pub fn from_poly(g: PolyG, k: f64, seed: &dyn Amplitude) -> Result<Self> {
        Self::new(ShiftMap::new(g, k)?, seed)
    }

    pub fn shift(&self) -> &ShiftMap {
        &self.shift
    }

    pub fn k(&self) -> f64 {
        self.shift.k()
    }

    /// Points whose image lies in the seed domain (endpoints included when
    /// the seed's domain is closed).
    pub fn source_domain(&self) -> Interval {
        self.source_domain
    }

    /// `(r₁(x), r₁'(x))` with
    /// `r₁' = r₀'(f) √f' - r₀(f) f'' / (2 f'^(3/2))`.
    pub fn apply(&self, seed: &dyn Amplitude, x: f64) -> Result<(f64, f64)> {
        let jet = self.shift.jet(x)?;
        if !(jet.d1 > 0.0) {
            return Err(Error::NegativeJacobian { x, jacobian: jet.d1 });
        }
        if !seed.covers(jet.f) {
            let (lo, hi) = seed.bounds();
            return Err(Error::DomainEscape { x, image: jet.f, lo, hi });
        }
        let (r0, r0p) = seed.eval(jet.f)?;
        let root = jet.d1.sqrt();
        Ok((r0 / root, r0p * root - 0.5 * r0 * jet.d2 / (jet.d1 * root)))
    }

    fn meta(&self) -> GridMeta {
        GridMeta::new(Provenance::Transformed)
            .with_param("K", self.k())
            .with_param("n", self.shift.g().n() as f64)
            .with_param("eta", self.shift.g().eta())
    }
}

/// Applies the map at every `x`; any point whose image leaves the seed
/// domain is an error.
pub fn transform(map: &BacklundMap, seed: &dyn Amplitude, xs: &[f64]) -> Result<SolutionGrid> {
    let mut rs = Vec::with_capacity(xs.len());
    let mut rps = Vec::with_capacity(xs.len());
    for &x in xs {
        let (r, rp) = map.apply(seed, x)?;
        rs.push(r);
        rps.push(rp);
    }
    SolutionGrid::new(xs.to_vec(), rs, rps, map.meta())
}

fn escapes(e: &Error) -> bool {
    matches!(e, Error::DomainEscape { .. } | Error::Domain(_) | Error::NoRealRoot { .. })
}

/// Like [`transform`], but drops the points at either end whose image
/// leaves the seed domain and records the kept interval in the grid meta.
pub fn transform_trimmed(map: &BacklundMap, seed: &dyn Amplitude, xs: &[f64]) -> Result<SolutionGrid> {
    let mut kept = (Vec::new(), Vec::new(), Vec::new());
    let mut first_escape = None;
    for &x in xs {
        match map.apply(seed, x) {
            Ok((r, rp)) => {
                kept.0.push(x);
                kept.1.push(r);
                kept.2.push(rp);
            }
            Err(e) if escapes(&e) => {
                first_escape.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    if kept.0.is_empty() && !xs.is_empty() {
        return Err(first_escape.expect("every point escaped"));
    }
    let mut meta = map.meta();
    if kept.0.len() < xs.len() {
        meta.trimmed_to = Some((kept.0[0], kept.0[kept.0.len() - 1]));
    }
    SolutionGrid::new(kept.0, kept.1, kept.2, meta)
}

/// A transformed solution, evaluated lazily through its seed. Transforms
/// of transforms compose without interpolation.
#[derive(Debug, Clone)]
pub struct Transformed<S> {
    map: BacklundMap,
    seed: S,
}

impl<S: Amplitude> Transformed<S> {
    pub fn new(map: BacklundMap, seed: S) -> Self {
        Self { map, seed }
    }

    pub fn map(&self) -> &BacklundMap {
        &self.map
    }

    pub fn seed(&self) -> &S {
        &self.seed
    }
}

impl<S: Amplitude> Amplitude for Transformed<S> {
    fn bounds(&self) -> (f64, f64) {
        (self.map.source_domain.lo, self.map.source_domain.hi)
    }

    fn covers(&self, x: f64) -> bool {
        self.map
            .shift
            .solve(x)
            .map(|r| self.seed.covers(r.f))
            .unwrap_or(false)
    }

    fn eval(&self, x: f64) -> Result<(f64, f64)> {
        self.map.apply(&self.seed, x)
    }
}

/// Transforms of one seed for the running sums of `schedule`: element `j`
/// uses `K = schedule[0] + … + schedule[j]`. Points that escape the seed
/// domain are trimmed.
pub fn orbit(g: PolyG, schedule: &[f64], seed: &dyn Amplitude, xs: &[f64]) -> Result<Vec<SolutionGrid>> {
    let mut total = 0.0;
    schedule
        .iter()
        .enumerate()
        .map(|(index, &k)| {
            total += k;
            BacklundMap::from_poly(g, total, seed)
                .and_then(|map| transform_trimmed(&map, seed, xs))
                .map_err(|e| Error::Orbit { index, source: Box::new(e) })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub fixed: bool,
    pub deviation: f64,
}

/// Whether the seed reproduces itself under the map:
/// `max |r₀(x)² f'(x) - r₀(f(x))²| / max(1, r₀(f(x))²) < tol` over `xs`.
pub fn is_fixed_point(map: &BacklundMap, seed: &dyn Amplitude, xs: &[f64], tol: f64) -> Result<FixedPointReport> {
    let mut deviation = 0.0f64;
    for &x in xs {
        let root = map.shift.solve(x)?;
        if !(root.fprime > 0.0) {
            return Err(Error::NegativeJacobian { x, jacobian: root.fprime });
        }
        if !seed.covers(root.f) {
            let (lo, hi) = seed.bounds();
            return Err(Error::DomainEscape { x, image: root.f, lo, hi });
        }
        let (r_here, _) = seed.eval(x)?;
        let (r_image, _) = seed.eval(root.f)?;
        let image_sq = r_image * r_image;
        let d = (r_here * r_here * root.fprime - image_sq).abs() / image_sq.max(1.0);
        deviation = deviation.max(d);
    }
    Ok(FixedPointReport {
        fixed: deviation < tol,
        deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{gp_rhs, ClosedForm, GpParams};
    use crate::ode::{integrate_span, linspace, residual, IntegratorOptions, Tolerance};

    fn fixed_seed(n: u32, eta: f64) -> ClosedForm {
        ClosedForm::new(GpParams { n, eta, b: -1.0, c: 1.0, v: 1.0, ..GpParams::default() }).unwrap()
    }

    fn generic_seed(p: &GpParams, lo: f64, hi: f64) -> crate::ode::DenseSolution {
        let ode = gp_rhs(p).unwrap();
        let opts = IntegratorOptions::new(Tolerance::new(1e-12, 1e-12).unwrap());
        integrate_span(&ode, 1.0, 1.3, 0.0, lo, hi, &opts).unwrap()
    }

    #[test]
    fn zero_shift_is_identity() {
        let p = GpParams::default();
        let seed = generic_seed(&p, 1.0, 3.0);
        let map = BacklundMap::from_poly(p.poly(), 0.0, &seed).unwrap();
        let xs = linspace(1.0, 3.0, 21);
        let g = transform(&map, &seed, &xs).unwrap();
        for (i, &x) in xs.iter().enumerate() {
            let (r, rp) = seed.eval(x).unwrap();
            assert!((g.rs()[i] - r).abs() < 1e-14 && (g.rps()[i] - rp).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_is_reproduced() {
        for (n, eta, k) in [(1, 1.0, 0.5), (1, 1.0, 3.0), (2, 0.5, 1.0), (3, 1.0, -0.5)] {
            let seed = fixed_seed(n, eta);
            let map = BacklundMap::from_poly(seed.params().poly(), k, &seed).unwrap();
            let lo = map.source_domain().lo.max(0.5);
            let xs = linspace(lo + 0.01, 5.0, 50);
            let g = transform(&map, &seed, &xs).unwrap();
            for (i, &x) in xs.iter().enumerate() {
                assert!((g.rs()[i] - seed.r(x)).abs() < 1e-10, "n={n} k={k} x={x}");
                assert!((g.rps()[i] - seed.r_prime(x)).abs() < 1e-9);
            }
            let fp = is_fixed_point(&map, &seed, &xs, 1e-10).unwrap();
            assert!(fp.fixed && fp.deviation < 1e-10, "{fp:?}");
        }
    }

    #[test]
    fn generic_seed_maps_to_solution() {
        let p = GpParams::default();
        let seed = generic_seed(&p, 1.0, 3.0);
        let map = BacklundMap::from_poly(p.poly(), 0.5, &seed).unwrap();
        let xs = linspace(1.0, 2.5, 12001);
        let g = transform(&map, &seed, &xs).unwrap();
        let rep = residual(&gp_rhs(&p).unwrap(), &g).unwrap();
        assert!(rep.max_interior < 1e-5, "{}", rep.max_interior);
        let fp = is_fixed_point(&map, &seed, &xs, 1e-10).unwrap();
        assert!(!fp.fixed);
    }

    #[test]
    fn escape_and_trim() {
        let p = GpParams::default();
        let seed = generic_seed(&p, 1.0, 3.0);
        let map = BacklundMap::from_poly(p.poly(), 0.5, &seed).unwrap();
        let xs = linspace(0.5, 3.0, 26);
        assert!(matches!(transform(&map, &seed, &xs), Err(Error::DomainEscape { .. })));
        let g = transform_trimmed(&map, &seed, &xs).unwrap();
        let (lo, hi) = g.meta.trimmed_to.unwrap();
        assert!(lo >= map.source_domain().lo - 1e-12 && hi <= map.source_domain().hi + 1e-12);
        assert!(g.len() < xs.len());
    }

    #[test]
    fn source_domain_is_preimage() {
        let p = GpParams::default();
        let seed = generic_seed(&p, 1.0, 3.0);
        let map = BacklundMap::from_poly(p.poly(), 0.5, &seed).unwrap();
        let d = map.source_domain();
        let g = p.poly();
        assert!((g.value(d.lo) + 0.5 - g.value(1.0)).abs() < 1e-12);
        assert!((g.value(d.hi) + 0.5 - g.value(3.0)).abs() < 1e-12);
    }

    #[test]
    fn constant_orbit() {
        let p = GpParams { n: 1, eta: 0.0, ..GpParams::default() };
        let seed = ClosedForm::new(p).unwrap();
        let xs = linspace(1.0, 5.0, 9);
        let grids = orbit(p.poly(), &[1.0, 2.0], &seed, &xs).unwrap();
        assert_eq!(grids.len(), 2);
        for g in &grids {
            assert!(g.rs().iter().all(|&r| (r - 1.0).abs() < 1e-15));
        }
        let same = orbit(p.poly(), &[0.0, 0.0, 0.0], &seed, &xs).unwrap();
        assert!(same.iter().all(|g| g.rs() == seed.sample(&xs).unwrap().rs()));
    }

    #[test]
    fn orbit_error_is_tagged() {
        let p = GpParams::default();
        let seed = generic_seed(&p, 1.0, 3.0);
        let xs = linspace(1.0, 2.0, 11);
        let err = orbit(p.poly(), &[0.5, 100.0], &seed, &xs).unwrap_err();
        assert!(matches!(err, Error::Orbit { index: 1, .. }), "{err}");
    }

    #[test]
    fn forward_then_backward_returns_seed() {
        let p = GpParams { n: 2, eta: 0.5, ..GpParams::default() };
        let seed = generic_seed(&p, 0.8, 2.5);
        let forward = Transformed::new(BacklundMap::from_poly(p.poly(), 0.75, &seed).unwrap(), &seed);
        let back = BacklundMap::from_poly(p.poly(), -0.75, &forward).unwrap();
        for x in linspace(1.0, 1.6, 13) {
            let (r, rp) = back.apply(&forward, x).unwrap();
            let (r0, rp0) = seed.eval(x).unwrap();
            assert!((r - r0).abs() < 1e-7 && (rp - rp0).abs() < 1e-7, "x={x}");
        }
    }
}
