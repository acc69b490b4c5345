//! Derivatives and the Schwarzian derivative of scalar maps.
//!
//! A [`SmoothMap`] carries its values and, optionally, closed-form first
//! through third derivatives. [`derivative`] uses the closed form when one is
//! present for the requested order and falls back to a central finite
//! difference with one Richardson step otherwise.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::Domain(format!("empty interval ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub const fn real_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub const fn positive() -> Self {
        Self {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi)).ok()
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// A real function of one variable on an open interval, with an optional
/// tower of closed-form derivatives.
#[derive(Clone)]
pub struct SmoothMap {
    eval: ScalarFn,
    derivatives: [Option<ScalarFn>; 3],
    domain: Interval,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothMap")
            .field("domain", &self.domain)
            .field(
                "closed_form_orders",
                &(1..=3)
                    .filter(|&k| self.derivatives[k - 1].is_some())
                    .collect::<Vec<_>>(),
            )
            .finish()
    }
}

impl SmoothMap {
    pub fn new(eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            derivatives: [None, None, None],
            domain: Interval::real_line(),
        }
    }

    pub fn on(mut self, domain: Interval) -> Self {
        self.domain = domain;
        self
    }

    /// Attaches a closed-form derivative of the given order (1 to 3).
    pub fn with_derivative(
        mut self,
        order: usize,
        d: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!((1..=3).contains(&order), "derivative order must be 1, 2 or 3");
        self.derivatives[order - 1] = Some(Arc::new(d));
        self
    }

    pub fn with_tower(
        self,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d3: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.with_derivative(1, d1)
            .with_derivative(2, d2)
            .with_derivative(3, d3)
    }

    /// The same map with every closed-form derivative dropped, forcing
    /// finite-difference evaluation.
    pub fn without_derivatives(&self) -> Self {
        Self {
            eval: Arc::clone(&self.eval),
            derivatives: [None, None, None],
            domain: self.domain,
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        (self.eval)(z)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn closed_form(&self, order: usize) -> Option<&ScalarFn> {
        self.derivatives.get(order.wrapping_sub(1))?.as_ref()
    }

    pub fn has_tower(&self) -> bool {
        self.derivatives.iter().all(Option::is_some)
    }

    pub fn identity() -> Self {
        Self::new(|z| z).with_tower(|_| 1.0, |_| 0.0, |_| 0.0)
    }

    /// `outer ∘ inner`. The composite carries a closed-form tower only when
    /// both factors do (Faà di Bruno to third order). Its domain is the
    /// domain of `inner`; callers restrict it further if `inner` leaves the
    /// domain of `outer`.
    pub fn compose(outer: &SmoothMap, inner: &SmoothMap) -> SmoothMap {
        let (g, f) = (outer.clone(), inner.clone());
        let eval = {
            let (g, f) = (g.clone(), f.clone());
            move |z: f64| g.eval(f.eval(z))
        };
        let mut out = SmoothMap::new(eval).on(inner.domain);
        if g.has_tower() && f.has_tower() {
            let d = |m: &SmoothMap, k: usize| Arc::clone(m.closed_form(k).unwrap());
            let (g1, g2, g3) = (d(&g, 1), d(&g, 2), d(&g, 3));
            let (f0, f1, f2, f3) = (Arc::clone(&f.eval), d(&f, 1), d(&f, 2), d(&f, 3));
            let first = {
                let (g1, f0, f1) = (g1.clone(), f0.clone(), f1.clone());
                move |z: f64| g1(f0(z)) * f1(z)
            };
            let second = {
                let (g1, g2, f0, f1, f2) = (g1.clone(), g2.clone(), f0.clone(), f1.clone(), f2.clone());
                move |z: f64| {
                    let (u, u1) = (f0(z), f1(z));
                    g2(u) * u1 * u1 + g1(u) * f2(z)
                }
            };
            let third = move |z: f64| {
                let (u, u1, u2) = (f0(z), f1(z), f2(z));
                g3(u) * u1.powi(3) + 3.0 * g2(u) * u1 * u2 + g1(u) * f3(z)
            };
            out = out.with_tower(first, second, third);
        }
        out
    }
}

/// A central finite-difference stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    order: usize,
    points: usize,
    base_step: f64,
}

impl Stencil {
    pub fn new(order: usize, points: usize, base_step: f64) -> Result<Self> {
        if !(1..=3).contains(&order) {
            return Err(Error::InvalidParameter(format!(
                "derivative order {order} not in 1..=3"
            )));
        }
        if points < 5 || points % 2 == 0 || points < order + 2 {
            return Err(Error::InvalidParameter(format!(
                "a central stencil for order {order} needs an odd point count >= max(5, {}), got {points}",
                order + 2
            )));
        }
        if !(base_step > 0.0 && base_step.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "stencil step must be positive, got {base_step}"
            )));
        }
        Ok(Self {
            order,
            points,
            base_step,
        })
    }

    /// Default stencil at `z`: 5 points for orders 1 and 2, 7 points for
    /// order 3, step `ε^(1/(points+1)) · max(1, |z|)`.
    pub fn central(order: usize, z: f64) -> Result<Self> {
        let points = if order >= 3 { 7 } else { 5 };
        let step = f64::EPSILON.powf(1.0 / (points as f64 + 1.0)) * z.abs().max(1.0);
        Self::new(order, points, step)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn base_step(&self) -> f64 {
        self.base_step
    }

    /// Distance from the centre to the outermost node, before halving.
    pub fn half_width(&self) -> f64 {
        (self.points / 2) as f64 * self.base_step
    }

    /// Leading truncation order of the plain central formula.
    pub fn accuracy(&self) -> i32 {
        (2 * ((self.points - self.order + 1) / 2)) as i32
    }

    /// Weights on the integer offsets `-m..=m` for unit spacing.
    pub fn weights(&self) -> Vec<f64> {
        let m = (self.points / 2) as i64;
        let nodes: Vec<f64> = (-m..=m).map(|k| k as f64).collect();
        fornberg_weights(0.0, &nodes, self.order)
    }

    fn apply(&self, f: &dyn Fn(f64) -> f64, z: f64, h: f64, weights: &[f64]) -> Result<f64> {
        let m = (self.points / 2) as i64;
        let mut acc = 0.0;
        for (k, w) in (-m..=m).zip(weights) {
            let x = z + k as f64 * h;
            let y = f(x);
            if !y.is_finite() {
                return Err(Error::NonFinite { x });
            }
            acc += w * y;
        }
        Ok(acc / h.powi(self.order as i32))
    }
}

/// Finite-difference weights for the `order`-th derivative at `x0` on
/// arbitrary distinct `nodes` (Fornberg's recurrence).
pub fn fornberg_weights(x0: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Finite-difference estimate with an explicit stencil: the central formula
/// at `h` and `h/2`, combined by one Richardson step.
pub fn derivative_with(map: &SmoothMap, stencil: &Stencil, z: f64) -> Result<f64> {
    let domain = map.domain();
    let reach = stencil.half_width();
    if !(domain.contains(z - reach) && domain.contains(z + reach)) {
        return Err(Error::Domain(format!(
            "stencil [{}, {}] around z = {z} leaves the domain {domain}",
            z - reach,
            z + reach
        )));
    }
    let weights = stencil.weights();
    let f = |x: f64| map.eval(x);
    let h = stencil.base_step;
    let coarse = stencil.apply(&f, z, h, &weights)?;
    let fine = stencil.apply(&f, z, 0.5 * h, &weights)?;
    let gain = 2f64.powi(stencil.accuracy());
    let value = (gain * fine - coarse) / (gain - 1.0);
    if !value.is_finite() {
        return Err(Error::NonFinite { x: z });
    }
    Ok(value)
}

/// Finite-difference derivative with the default stencil, ignoring any
/// closed form.
pub fn derivative_fd(map: &SmoothMap, order: usize, z: f64) -> Result<f64> {
    derivative_with(map, &Stencil::central(order, z)?, z)
}

/// Derivative of order 1, 2 or 3 at `z`: closed form when attached,
/// finite differences otherwise.
pub fn derivative(map: &SmoothMap, order: usize, z: f64) -> Result<f64> {
    if !(1..=3).contains(&order) {
        return Err(Error::InvalidParameter(format!(
            "derivative order {order} not in 1..=3"
        )));
    }
    if !map.domain().contains(z) {
        return Err(Error::Domain(format!(
            "z = {z} outside the domain {}",
            map.domain()
        )));
    }
    match map.closed_form(order) {
        Some(d) => {
            let value = d(z);
            if value.is_finite() {
                Ok(value)
            } else {
                Err(Error::NonFinite { x: z })
            }
        }
        None => derivative_fd(map, order, z),
    }
}

/// How [`schwarzian_with`] obtains derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Evaluation {
    /// Closed forms where attached, finite differences for the rest.
    #[default]
    Auto,
    /// Finite differences for every order.
    FiniteDifference,
}

/// `{f, z} = f'''/f' - (3/2)(f''/f')²`.
pub fn schwarzian(map: &SmoothMap, z: f64) -> Result<f64> {
    schwarzian_with(map, z, Evaluation::Auto)
}

pub fn schwarzian_with(map: &SmoothMap, z: f64, mode: Evaluation) -> Result<f64> {
    let d = |k: usize| match mode {
        Evaluation::Auto => derivative(map, k, z),
        Evaluation::FiniteDifference => derivative_fd(map, k, z),
    };
    let d1 = d(1)?;
    let d2 = d(2)?;
    let h = Stencil::central(2, z)?.base_step();
    if d1.abs() < 1e-9 * (d2 * h).abs().max(1.0) {
        return Err(Error::CriticalPoint { z, derivative: d1 });
    }
    let d3 = d(3)?;
    let ratio = d2 / d1;
    Ok(d3 / d1 - 1.5 * ratio * ratio)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_map() -> SmoothMap {
        SmoothMap::new(f64::exp)
    }

    fn tan_map() -> SmoothMap {
        let sec2 = |z: f64| 1.0 / z.cos().powi(2);
        SmoothMap::new(f64::tan)
            .on(Interval::new(-1.5, 1.5).unwrap())
            .with_tower(
                sec2,
                move |z| 2.0 * sec2(z) * z.tan(),
                move |z| 2.0 * sec2(z) * (sec2(z) + 2.0 * z.tan().powi(2)),
            )
    }

    #[test]
    fn fornberg_reproduces_textbook_stencils() {
        let w = Stencil::new(1, 5, 1.0).unwrap().weights();
        let expect = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let w = Stencil::new(2, 5, 1.0).unwrap().weights();
        let expect = [-1.0, 16.0, -30.0, 16.0, -1.0].map(|v| v / 12.0);
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13);
        }
        let w = Stencil::new(3, 7, 1.0).unwrap().weights();
        let expect = [1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0].map(|v| v / 8.0);
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn stencil_validation() {
        assert!(Stencil::new(1, 4, 0.1).is_err());
        assert!(Stencil::new(1, 3, 0.1).is_err());
        assert!(Stencil::new(2, 5, 0.0).is_err());
        assert!(Stencil::new(4, 9, 0.1).is_err());
        assert_eq!(Stencil::new(3, 7, 0.1).unwrap().accuracy(), 4);
        assert_eq!(Stencil::new(2, 5, 0.1).unwrap().accuracy(), 4);
    }

    #[test]
    fn square_derivatives() {
        let sq = SmoothMap::new(|z| z * z);
        assert!((derivative(&sq, 1, 3.0).unwrap() - 6.0).abs() < 1e-9);
        assert!((derivative(&sq, 2, 3.0).unwrap() - 2.0).abs() < 1e-7);
    }

    #[test]
    fn third_derivative_of_exp() {
        let d3 = derivative(&exp_map(), 3, 0.0).unwrap();
        assert!((d3 - 1.0).abs() < 1e-7, "{d3}");
    }

    #[test]
    fn closed_form_preferred() {
        let m = SmoothMap::new(|z| z * z).with_derivative(1, |_| 42.0);
        assert_eq!(derivative(&m, 1, 1.0).unwrap(), 42.0);
    }

    #[test]
    fn stencil_leaving_domain() {
        let m = SmoothMap::new(f64::ln).on(Interval::positive());
        assert!(matches!(derivative(&m, 1, 1e-4), Err(Error::Domain(_))));
        assert!(matches!(derivative(&m, 1, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn non_finite_samples() {
        let m = SmoothMap::new(|z| if z > 1.0 { f64::NAN } else { z });
        assert!(matches!(derivative(&m, 1, 1.0), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn schwarzian_examples() {
        assert!(schwarzian(&SmoothMap::identity(), 2.0).unwrap().abs() < 1e-12);
        assert!(schwarzian(&SmoothMap::identity().without_derivatives(), 2.0)
            .unwrap()
            .abs()
            < 1e-8);
        let mob = SmoothMap::new(|z| (2.0 * z + 1.0) / (z + 1.0)).on(Interval::new(-0.9, 10.0).unwrap());
        assert!(schwarzian(&mob, 1.0).unwrap().abs() < 1e-7);
        for z in [-1.0, 0.0, 0.7] {
            assert!((schwarzian(&exp_map(), z).unwrap() + 0.5).abs() < 1e-6);
        }
        assert!((schwarzian(&tan_map(), 0.3).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_and_fd_paths_agree() {
        let t = tan_map();
        for z in [-0.6, -0.1, 0.3, 0.5] {
            let exact = schwarzian(&t, z).unwrap();
            let fd = schwarzian_with(&t, z, Evaluation::FiniteDifference).unwrap();
            assert!((exact - fd).abs() < 1e-6, "z={z}: {exact} vs {fd}");
        }
    }

    #[test]
    fn critical_point_detected() {
        let sq = SmoothMap::new(|z| z * z).with_tower(|z| 2.0 * z, |_| 2.0, |_| 0.0);
        assert!(matches!(
            schwarzian(&sq, 0.0),
            Err(Error::CriticalPoint { .. })
        ));
    }

    #[test]
    fn composition_tower_matches_fd() {
        let g = tan_map();
        let f = SmoothMap::new(|z| 0.5 * z.sin()).with_tower(
            |z| 0.5 * z.cos(),
            |z| -0.5 * z.sin(),
            |z| -0.5 * z.cos(),
        );
        let h = SmoothMap::compose(&g, &f);
        assert!(h.has_tower());
        for z in [0.2, 0.9] {
            for k in 1..=3 {
                let exact = derivative(&h, k, z).unwrap();
                let fd = derivative_fd(&h, k, z).unwrap();
                assert!((exact - fd).abs() < 1e-6, "order {k}: {exact} vs {fd}");
            }
        }
    }
}
