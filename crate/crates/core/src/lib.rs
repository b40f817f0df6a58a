//! Phase-field simulation of the Willmore (elastica) flow in 2D.
//!
//! The crate implements two diffuse-interface evolutions on uniform grids:
//! the classical one-variable diffuse Willmore flow, and a two-variable
//! variant that couples order parameters `u` and `v` built from different
//! double-well potentials. The second variable is tied to the first through
//! the profile transform Φ, and a thresholded penalty on Φ(u) − v suppresses
//! configurations that deviate from a one-dimensional interface structure
//! (transversal interface crossings in particular).
//!
//! Module layout:
//!
//! * [`potentials`] — double wells, optimal profiles, the transform Φ/Ψ and
//!   the penalty function,
//! * [`grid`] — uniform grids, finite-difference operators and quadrature,
//! * [`shapes`] / [`contours`] — signed-distance initializers and
//!   marching-squares level-set extraction,
//! * [`energies`] — diffuse area, Willmore and penalty energies,
//! * [`solver`] / [`mg`] — matrix-free BiCGSTAB and a geometric multigrid
//!   preconditioner for the implicit steps,
//! * [`flow`] — semi-implicit time stepping for both evolutions,
//! * [`scenarios`] — benchmark setups with analytic references,
//! * [`config`] / [`io`] — run configuration and file formats.

pub mod config;
pub mod contours;
pub mod energies;
pub mod flow;
pub mod grid;
pub mod io;
pub mod mg;
pub mod potentials;
pub mod quad;
pub mod scenarios;
pub mod shapes;
pub mod solver;

use std::fmt;

/// Crate-wide error type.
#[derive(Debug)]
pub enum Error {
    /// Invalid grid geometry or incompatible fields.
    Grid(String),
    /// Degenerate or unusable shape specification.
    Shape(String),
    /// Quadrature failed to reach the requested accuracy.
    Quadrature(String),
    /// Iterative linear solve did not converge.
    Solver {
        context: &'static str,
        iterations: usize,
        residual: f64,
    },
    /// Configuration file problem, with the offending line number (1-based).
    Config { line: usize, message: String },
    /// Malformed data file.
    Format(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Grid(m) => write!(f, "grid error: {m}"),
            Error::Shape(m) => write!(f, "shape error: {m}"),
            Error::Quadrature(m) => write!(f, "quadrature error: {m}"),
            Error::Solver {
                context,
                iterations,
                residual,
            } => write!(
                f,
                "linear solver failed in {context}: {iterations} iterations, residual {residual:.3e}"
            ),
            Error::Config { line, message } => write!(f, "config line {line}: {message}"),
            Error::Format(m) => write!(f, "format error: {m}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
