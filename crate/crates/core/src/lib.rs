//! Linear systems over finite fields: exact solution counting, Fourier
//! analysis, and Sidorenko / common classification.
//!
//! Densities are exact [`Rational`]s; floating point appears only in the
//! [`fourier`] module.

pub mod catalog;
pub mod classify;
pub mod counting;
pub mod error;
pub mod field;
pub mod fourier;
pub mod linalg;
pub mod scalar;
pub mod search;
pub mod space;

pub use classify::{classify_system, Answer, Certificate, ClassifyOptions, Rule, Verdict};
pub use counting::{count_solutions, deficits, Deficits, Method, PointSet, SolutionCount};
pub use error::{Error, Result};
pub use field::{FieldElem, FieldSpec};
pub use fourier::{SpectralFunction, TauReport};
pub use linalg::{InducedEquation, LinearSystem};
pub use scalar::{Real, Scalar};
pub use search::{anneal_search, exhaustive_search, SearchConfig, Strategy, Witness};
pub use space::Space;

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;
pub type SpectralFunction64 = fourier::SpectralFunction<f64>;
pub type SpectralFunction32 = fourier::SpectralFunction<f32>;
