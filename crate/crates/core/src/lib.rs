//! Auto-Bäcklund transformations for second-order equations of the form
//! `y y'' = F(z, y²)`, specialised to the stationary reduction of the
//! Gross-Pitaevskii equation
//!
//! ```text
//! r'' = c²/r³ + ((n²-1)/(4x²) + 3x^(2n-2) η² n² / (1+2ηxⁿ)²) r + b x^(3n-3) (1+2ηxⁿ)³ r³
//! ```
//!
//! The map `f` defined by `G(f(x)) = G(x) + K` with `G(x) = xⁿ(1+ηxⁿ)` sends
//! a solution `r₀` to a new solution `r₁(x) = r₀(f(x)) / √f'(x)`.
//!
//! Modules, bottom-up:
//!
//! - [`calculus`]: derivatives and the Schwarzian derivative of smooth maps.
//! - [`functional`]: the polynomial family `G`, Möbius maps and pointwise
//!   solution of the translation equation.
//! - [`ode`]: adaptive Dormand-Prince integration with dense output and
//!   finite-difference residuals.
//! - [`gp`]: the reduced equation, its closed-form solution, phase and
//!   wave function.
//! - [`backlund`]: the transformation itself, orbits and fixed points.
//! - [`config`], [`experiment`], [`io`]: the experiment driver used by the
//!   `gpbt` binary.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod backlund;
pub mod calculus;
pub mod config;
mod error;
pub mod experiment;
pub mod functional;
pub mod gp;
pub mod io;
pub mod ode;
pub mod quadrature;
pub mod verify;

pub use backlund::{BacklundMap, Transformed};
pub use calculus::{derivative, schwarzian, Interval, SmoothMap, Stencil};
pub use error::{Error, Result};
pub use functional::{Mobius, PolyG, ShiftMap};
pub use gp::{ClosedForm, GpParams, WaveSample};
pub use ode::{Amplitude, DenseSolution, SecondOrderOde, SolutionGrid, Tolerance};
