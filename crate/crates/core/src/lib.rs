//! Numerics for finite-time blow-up of the radial parabolic–elliptic Keller–Segel system.
//!
//! Modules follow the data flow: closed-form [`profiles`] and [`specialfn`],
//! the radial linear operator in [`linop`], the correction field and its mass in
//! [`philambda`], the nonlocal rate equation in [`rate`], and the full PDE in [`sim`].

pub mod error;
pub mod grid;
pub mod interp;
pub mod linop;
pub mod philambda;
pub mod profiles;
pub mod quad;
pub mod rate;
pub mod ratefn;
pub mod sim;
pub mod specialfn;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::{RadialField, RadialGrid};
pub use quad::QuadratureSpec;
