//! Small feedforward networks with exact reverse-mode gradients, an Adam
//! optimiser and a finite-difference checker. Double precision throughout.

mod adam;
pub mod gradcheck;
mod mlp;

pub use adam::Adam;
pub use gradcheck::{gradcheck, GradcheckReport};
pub use mlp::{Activation, Dense, Gradients, Mlp, Tape};
