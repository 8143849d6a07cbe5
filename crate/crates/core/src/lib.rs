//! Numerical laboratory for integro-differential operators with symmetric,
//! regularly varying kernels.
//!
//! * [`regvar`]: slowly varying functions, kernel profiles, the scale
//!   function `L`, Potter and Karamata checks.
//! * [`kernels`]: concrete kernels of an ellipticity class.
//! * [`field`] and [`ops`]: functions on ℝⁿ and the operators acting on them.
//! * [`barriers`]: explicit barrier functions and their verification.
//! * [`envelope`]: concave envelopes and ring measure checks.
//! * [`solver`]: a monotone scheme for nonlocal Dirichlet problems.

pub mod barriers;
pub mod envelope;
pub mod error;
pub mod field;
pub mod kernels;
pub mod ops;
pub mod quad;
pub mod regvar;
pub mod solver;

pub use error::{Error, Result};
