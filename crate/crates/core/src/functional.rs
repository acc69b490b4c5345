//! The polynomial family `G(x) = xⁿ(1 + ηxⁿ)`, fractional linear maps, and
//! pointwise solution of the translation equation `G(f(x)) = G(x) + K`.

use std::sync::Arc;

use crate::calculus::{derivative, Interval, ScalarFn, SmoothMap};
use crate::error::{Error, Result};

/// `G(x) = xⁿ(1 + ηxⁿ)` with `n ≥ 1`, `η ≥ 0`; strictly increasing and
/// positive on `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyG {
    n: u32,
    eta: f64,
}

impl PolyG {
    pub fn new(n: u32, eta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be a positive integer".into()));
        }
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eta must be finite and non-negative, got {eta}"
            )));
        }
        Ok(Self { n, eta })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    fn check(x: f64) -> Result<()> {
        if x > 0.0 && x.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("G is evaluated on x > 0, got {x}")))
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Self::check(x)?;
        Ok(self.value(x))
    }

    pub fn eval_prime(&self, x: f64) -> Result<f64> {
        Self::check(x)?;
        Ok(self.d1(x))
    }

    /// Unchecked `G(x)`.
    pub fn value(&self, x: f64) -> f64 {
        let xn = x.powi(self.n as i32);
        xn * (1.0 + self.eta * xn)
    }

    /// `G'(x) = n x^(n-1) (1 + 2ηxⁿ)`.
    pub fn d1(&self, x: f64) -> f64 {
        let n = self.n as i32;
        n as f64 * x.powi(n - 1) * (1.0 + 2.0 * self.eta * x.powi(n))
    }

    /// `G''(x) = n(n-1) x^(n-2) (1 + 2ηxⁿ) + 2ηn² x^(2n-2)`.
    pub fn d2(&self, x: f64) -> f64 {
        let n = self.n as i32;
        let nf = n as f64;
        nf * (nf - 1.0) * x.powi(n - 2) * (1.0 + 2.0 * self.eta * x.powi(n))
            + 2.0 * self.eta * nf * nf * x.powi(2 * n - 2)
    }

    /// `G'''(x) = n(n-1)(n-2) x^(n-3) (1 + 2ηxⁿ) + 6ηn²(n-1) x^(2n-3)`.
    pub fn d3(&self, x: f64) -> f64 {
        let n = self.n as i32;
        let nf = n as f64;
        nf * (nf - 1.0) * (nf - 2.0) * x.powi(n - 3) * (1.0 + 2.0 * self.eta * x.powi(n))
            + 6.0 * self.eta * nf * nf * (nf - 1.0) * x.powi(2 * n - 3)
    }

    /// The positive `x` with `G(x) = y`, for `y > 0`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(y > 0.0 && y.is_finite()) {
            return Err(Error::Domain(format!(
                "G maps x > 0 onto (0, ∞); cannot invert at {y}"
            )));
        }
        let u = if self.eta == 0.0 {
            y
        } else {
            // (-1 + √(1+4ηy)) / (2η), rationalised against cancellation
            2.0 * y / (1.0 + (1.0 + 4.0 * self.eta * y).sqrt())
        };
        let mut x = u.powf(1.0 / self.n as f64);
        for _ in 0..2 {
            let slope = self.d1(x);
            if slope > 0.0 {
                x -= (self.value(x) - y) / slope;
            }
        }
        Ok(x)
    }

    /// `G` on `(0, ∞)` with its closed-form derivative tower.
    pub fn to_smooth_map(&self) -> SmoothMap {
        let g = *self;
        SmoothMap::new(move |x| g.value(x))
            .on(Interval::positive())
            .with_tower(move |x| g.d1(x), move |x| g.d2(x), move |x| g.d3(x))
    }
}

pub fn eval_g(g: &PolyG, x: f64) -> Result<f64> {
    g.eval(x)
}

pub fn eval_g_prime(g: &PolyG, x: f64) -> Result<f64> {
    g.eval_prime(x)
}

/// `w ↦ (aw + b)/(cw + d)` with `ad - bc ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Mobius {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = [a, b, c, d].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !det.is_finite() || det.abs() <= f64::EPSILON * scale * scale {
            return Err(Error::DegenerateMobius(det));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn identity() -> Self {
        Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    pub fn translation(k: f64) -> Self {
        Self { a: 1.0, b: k, c: 0.0, d: 1.0 }
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `-d/c`, or `None` for affine maps.
    pub fn pole(&self) -> Option<f64> {
        (self.c != 0.0).then(|| -self.d / self.c)
    }

    pub fn apply(&self, w: f64) -> Result<f64> {
        let den = self.c * w + self.d;
        if den.abs() <= 1e-12 * (self.c * w).abs().max(self.d.abs()) || den == 0.0 {
            return Err(Error::Pole(w));
        }
        Ok((self.a * w + self.b) / den)
    }

    pub fn derivative(&self, w: f64) -> f64 {
        self.determinant() / (self.c * w + self.d).powi(2)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Mobius) -> Mobius {
        Mobius {
            a: self.a * inner.a + self.b * inner.c,
            b: self.a * inner.b + self.b * inner.d,
            c: self.c * inner.a + self.d * inner.c,
            d: self.c * inner.b + self.d * inner.d,
        }
    }

    /// The map as a [`SmoothMap`] on `domain`, which must avoid the pole.
    pub fn to_smooth_map(&self, domain: Interval) -> SmoothMap {
        let m = *self;
        let det = m.determinant();
        SmoothMap::new(move |w| (m.a * w + m.b) / (m.c * w + m.d))
            .on(domain)
            .with_tower(
                move |w| det / (m.c * w + m.d).powi(2),
                move |w| -2.0 * m.c * det / (m.c * w + m.d).powi(3),
                move |w| 6.0 * m.c * m.c * det / (m.c * w + m.d).powi(4),
            )
    }
}

pub fn apply_mobius(m: &Mobius, w: f64) -> Result<f64> {
    m.apply(w)
}

/// `f(x)` and `f'(x)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftRoot {
    pub f: f64,
    pub fprime: f64,
}

/// `f` and its first three derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftJet {
    pub f: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// The map `f` defined pointwise by `G(f(x)) = G(x) + K`, `f > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftMap {
    g: PolyG,
    k: f64,
    valid: Interval,
}

impl ShiftMap {
    pub fn new(g: PolyG, k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::InvalidParameter(format!("K must be finite, got {k}")));
        }
        // G(x) + K > 0 holds for x > G⁻¹(-K) when K < 0 and everywhere otherwise
        let lo = if k < 0.0 { g.inverse(-k)? } else { 0.0 };
        Ok(Self {
            g,
            k,
            valid: Interval {
                lo,
                hi: f64::INFINITY,
            },
        })
    }

    pub fn g(&self) -> &PolyG {
        &self.g
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Interval on which `f` is real and positive.
    pub fn valid_domain(&self) -> Interval {
        self.valid
    }

    /// `f_{-K}`, the inverse map.
    pub fn inverse(&self) -> Result<ShiftMap> {
        ShiftMap::new(self.g, -self.k)
    }

    /// Root `f(x)` with `f'(x) = G'(x)/G'(f(x))`.
    pub fn solve(&self, x: f64) -> Result<ShiftRoot> {
        let f = self.root(x)?;
        Ok(ShiftRoot {
            f,
            fprime: self.g.d1(x) / self.g.d1(f),
        })
    }

    fn root(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Domain(format!("f is defined on x > 0, got {x}")));
        }
        let target = self.g.value(x) + self.k;
        let eta = self.g.eta;
        let discriminant = 1.0 + 4.0 * eta * target;
        if eta > 0.0 && discriminant <= 0.0 {
            return Err(Error::NoRealRoot { x, discriminant });
        }
        if target <= 0.0 {
            return Err(Error::Domain(format!(
                "G({x}) + K = {target} is not positive, so f({x}) would not be positive"
            )));
        }
        let u = if eta == 0.0 {
            target
        } else {
            2.0 * target / (1.0 + discriminant.sqrt())
        };
        let mut f = u.powf(1.0 / self.g.n as f64);
        for _ in 0..2 {
            f -= (self.g.value(f) - target) / self.g.d1(f);
        }
        Ok(f)
    }

    /// `f` through its third derivative, by implicit differentiation of
    /// `G'(f) f' = G'(x)`.
    pub fn jet(&self, x: f64) -> Result<ShiftJet> {
        let f = self.root(x)?;
        let g = &self.g;
        let (gp, gpp, gppp) = (g.d1(f), g.d2(f), g.d3(f));
        let d1 = g.d1(x) / gp;
        let d2 = (g.d2(x) - gpp * d1 * d1) / gp;
        let d3 = (g.d3(x) - gppp * d1.powi(3) - 3.0 * gpp * d1 * d2) / gp;
        Ok(ShiftJet { f, d1, d2, d3 })
    }

    /// `f` as a [`SmoothMap`] on its valid domain with the closed-form tower.
    /// Points where the root fails evaluate to NaN.
    pub fn to_smooth_map(&self) -> SmoothMap {
        let m = *self;
        let jet = move |x: f64| m.jet(x).ok();
        SmoothMap::new(move |x| m.root(x).unwrap_or(f64::NAN))
            .on(self.valid)
            .with_tower(
                move |x| jet(x).map_or(f64::NAN, |j| j.d1),
                move |x| jet(x).map_or(f64::NAN, |j| j.d2),
                move |x| jet(x).map_or(f64::NAN, |j| j.d3),
            )
    }
}

pub fn solve_f(m: &ShiftMap, x: f64) -> Result<ShiftRoot> {
    m.solve(x)
}

/// A strictly monotone map with a known inverse on its range.
#[derive(Clone)]
pub struct Invertible {
    pub map: SmoothMap,
    pub inverse: ScalarFn,
    pub range: Interval,
}

impl Invertible {
    pub fn new(
        map: SmoothMap,
        inverse: impl Fn(f64) -> f64 + Send + Sync + 'static,
        range: Interval,
    ) -> Self {
        Self {
            map,
            inverse: Arc::new(inverse),
            range,
        }
    }

    pub fn from_poly(g: PolyG) -> Self {
        Self::new(
            g.to_smooth_map(),
            move |y| g.inverse(y).unwrap_or(f64::NAN),
            Interval::positive(),
        )
    }
}

/// `f = w⁻¹ ∘ m ∘ w` on the finite interval `working`, so that
/// `w(f(x)) = m(w(x))`. The result carries a closed-form first derivative
/// `f' = m'(w) w'(x) / w'(f)`.
pub fn conjugate_f(w: &Invertible, m: &Mobius, working: Interval) -> Result<SmoothMap> {
    if !(working.lo.is_finite() && working.hi.is_finite()) {
        return Err(Error::Domain("working interval must be bounded".into()));
    }
    let domain = w.map.domain();
    if working.lo < domain.lo || working.hi > domain.hi {
        return Err(Error::Domain(format!(
            "working interval {working} is not inside the domain {domain} of w"
        )));
    }
    let ends = [w.map.eval(working.lo), w.map.eval(working.hi)];
    let (wlo, whi) = (ends[0].min(ends[1]), ends[0].max(ends[1]));
    if let Some(p) = m.pole() {
        if p >= wlo && p <= whi {
            return Err(Error::Range(format!(
                "pole {p} of the Möbius map lies in w(working) = [{wlo}, {whi}]"
            )));
        }
    }
    for v in [wlo, whi] {
        let image = m.apply(v)?;
        if !w.range.contains(image) {
            return Err(Error::Range(format!(
                "m(w) = {image} leaves the range {} of w",
                w.range
            )));
        }
    }
    let (wmap, inv, mob) = (w.map.clone(), Arc::clone(&w.inverse), *m);
    let eval = {
        let (wmap, inv) = (wmap.clone(), Arc::clone(&inv));
        move |x: f64| mob.apply(wmap.eval(x)).map_or(f64::NAN, |y| inv(y))
    };
    let slope = move |x: f64| -> f64 {
        let wx = wmap.eval(x);
        let Ok(y) = mob.apply(wx) else { return f64::NAN };
        let fx = inv(y);
        match (derivative(&wmap, 1, x), derivative(&wmap, 1, fx)) {
            (Ok(a), Ok(b)) => mob.derivative(wx) * a / b,
            _ => f64::NAN,
        }
    };
    Ok(SmoothMap::new(eval).on(working).with_derivative(1, slope))
}
