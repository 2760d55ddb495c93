//! Common fixed points and coincidence points of mapping pairs in
//! C*-algebra-valued metric spaces, realized over finite-dimensional
//! complex matrix algebras.
//!
//! The crate is organized bottom-up:
//!
//! * [`algebra`] — matrix elements of the algebra, spectra, positivity,
//!   the Löwner order, operator norm, square roots, commutant tests and
//!   Neumann-series inversion.
//! * [`metric`] — matrix-valued metrics, axiom verification on samples and
//!   Cauchy/convergence predicates on finite traces.
//! * [`fixpoint`] — contraction-condition checkers, the alternating and
//!   Jungck iteration engines, and compatibility checks.
//! * [`integral`] — coupled integral-equation systems on a uniform grid,
//!   solved by successive approximation.
//!
//! Data-parallel loops (sample checks, quadrature over nodes) run on rayon
//! when the `parallel` feature is enabled, and sequentially otherwise. Both
//! paths produce identical results.

pub mod algebra;
pub mod error;
pub mod fixpoint;
pub mod integral;
pub mod metric;
pub mod par;
pub mod sampling;
pub mod tolerance;

pub use algebra::MatrixElement;
pub use error::{Error, Result};
pub use tolerance::Tolerances;
