//! Numerical toolkit for the open-string sector of Landau-Ginzburg models.
//!
//! The toolkit works at "desk scale": potentials are polynomials or Laurent
//! polynomials on `C^n` / `(C*)^n`, thimbles are discretized stable manifolds
//! of the `Re W` gradient flow, Hamiltonian chords are shot between thimbles,
//! and the Floer-type PDE is solved on truncated strips and three-punctured
//! discs by damped Newton on a finite-difference grid. Structure maps are
//! counted mod 2 with full provenance.

pub mod band;
pub mod chords;
pub mod config;
pub mod critical;
pub mod disc;
pub mod error;
pub mod floer;
pub mod geometry;
pub mod metric;
pub mod model;
pub mod ode;
pub mod potential;
pub mod rng;
pub mod strip;
pub mod svg;
pub mod tame;
pub mod thimble;

pub use error::LgError;
pub use model::LgModel;
pub use potential::{Domain, Potential};

/// Default tolerances used across the toolkit. Every field can be overridden
/// through configuration; these are the pinned defaults.
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// `|dW|` bound below which a Newton limit counts as a critical point.
    pub crit_tol: f64,
    /// Radius for merging duplicate critical points / chord endpoints.
    pub cluster_tol: f64,
    /// Minimal `Im W` separation for the regular-Morse ordering.
    pub im_sep_tol: f64,
    /// Relative eigenvalue cutoff for declaring a Hessian singular.
    pub eig_tol: f64,
    /// Default adaptive integrator tolerance.
    pub ode_tol: f64,
    /// Chart reproduction tolerance for thimble atlases.
    pub chart_tol: f64,
    /// Residual bound for accepted chords.
    pub chord_tol: f64,
    /// Smallest singular value for a transversality pass.
    pub tv_tol: f64,
    /// Residual infinity-norm bound for converged PDE solves.
    pub solve_tol: f64,
    /// Face non-degeneracy violation threshold.
    pub nd_tol: f64,
    /// Leading constant in the energy-identity tolerance
    /// `ei_tol = c_ei * (h^2 + exp(-delta_fit * s))`.
    pub c_ei: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            crit_tol: 1e-10,
            cluster_tol: 1e-7,
            im_sep_tol: 1e-6,
            eig_tol: 1e-9,
            ode_tol: 1e-10,
            chart_tol: 1e-6,
            chord_tol: 1e-8,
            tv_tol: 1e-6,
            solve_tol: 1e-9,
            nd_tol: 1e-8,
            c_ei: 25.0,
        }
    }
}
