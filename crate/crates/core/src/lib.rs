//! δ-shock solutions of multidimensional zero-pressure gas dynamics with an
//! energy equation.
//!
//! The crate builds exact 1D solutions of the compactly supported Riemann
//! problem, integrates the Rankine–Hugoniot front equations in 1D and in the
//! radially symmetric n-dimensional setting, simulates the same dynamics with
//! sticky particles, and audits mass, momentum and energy balances as well as
//! the weak (integral identity) form of the equations.

pub mod audit;
pub mod error;
pub mod export;
pub mod quadrature;
pub mod rh_ode;
pub mod riemann;
pub mod state;
pub mod sticky;
pub mod surface_front;
pub mod weak_verify;

pub use error::{Error, Result};
pub use state::{
    entropy_margin, entropy_ok, entropy_ok_tol, jump, DeltaFront1D, OuterState, Piece, PieceKind,
    RiemannData, Solution1D, ENTROPY_TOL,
};
