//! Integration, quadrature and special-function kernels.

mod hermite;
mod ode;
mod quadrature;

pub use hermite::{hermite, MAX_HERMITE_ORDER};
pub use ode::{integrate_fixed, integrate_ode, OdeOptions, Trajectory, INTERPOLATION_ORDER, METHOD_ORDER};
pub use quadrature::{
    circle_mean, integrate_periodic, integrate_window, panels_for, GaussLegendre, GL_ORDER,
    MIN_PANELS_PER_PERIOD,
};
