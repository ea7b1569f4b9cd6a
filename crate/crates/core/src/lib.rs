//! Rate-region evaluation for the multicast cognitive interference channel:
//! finite-alphabet information measures, exact polyhedral projection,
//! discrete-memoryless regions, Gaussian regions and dirty-paper bounds.

pub mod dmc_regions;
pub mod dpc;
pub mod error;
pub mod gaussian;
pub mod info_theory;
pub mod io;
pub mod polytope;

pub use error::{Error, Result};
pub use info_theory::{DmcChannel, JointDist};
pub use polytope::{Frontier2D, IneqSystem, LinIneq};
