//! Exact canonical structure of the generalized time-periodic harmonic
//! oscillator
//!
//! ```text
//! H = p²/2M − 2a·x·p + ½Mc·x² − (b/M)·p + d·x + (b²/2M − f)
//! c = w² + 4a² − 2ȧ − 2(Ṁ/M)a,   d = 2ab − ḃ − F
//! ```
//!
//! The crate builds the exact invariant `I`, its angle variable, the type-2
//! generating function, Hannay's angle (three independent routes) and the
//! geometric phases of the associated quasi-periodic wave functions.
//!
//! Pipeline, bottom-up:
//!
//! - [`model`]: periodic coefficients and the Hamiltonian.
//! - [`numerics`]: adaptive Dormand–Prince integration with dense output,
//!   Gauss–Legendre composite quadrature, Hermite polynomials.
//! - [`dynamics`]: homogeneous solutions, Wronskian `Ω`, `ρ`, Ermakov residual.
//! - [`floquet`]: monodromy, stability class, canonical pair with periodic `ρ`,
//!   periodic particular solution, common period `τ′`.
//! - [`action_angle`]: invariant, angle, momentum branches, `F₂`, `∂F₂/∂t`.
//! - [`hannay`]: Hannay's angle, gauge and forcing checks.
//! - [`quantum`]: wave functions, total and geometric phases.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
// NaN-rejecting guards are written as negated comparisons
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod action_angle;
pub mod dynamics;
pub mod error;
pub mod floquet;
pub mod hannay;
pub mod model;
pub mod numerics;
pub mod quantum;

#[cfg(test)]
mod testutil;

pub use action_angle::{ActionAngleFrame, Branch, FrameState};
pub use dynamics::{HomogeneousPair, ParticularSolution, Solution, SolutionPair};
pub use error::{Error, RefusalCode, Result};
pub use floquet::{Classification, Monodromy};
pub use hannay::{GaugeOffset, HannayAngles};
pub use model::{Harmonic, OscillatorSpec, PeriodicFunction, Ratio};
pub use numerics::OdeOptions;
pub use quantum::{PhaseReport, ReportOptions};
