//! Long-time behavior of free one-dimensional wave packets: exact
//! propagation, survival and nonescape probabilities, the closed-form
//! power-law tails, and exponent fits that confirm them.

// negated comparisons like !(t > 0.0) are deliberate: they reject NaN
// along with the out-of-range values, which t <= 0.0 would let through
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod asymptotics;
pub mod deriv;
pub mod error;
pub mod gops;
pub mod observables;
pub mod packet;
pub mod propagator;
pub mod quad;

pub use error::{Error, Result};

// downstream crates build momentum samples out of the same complex type
pub use num_complex;
