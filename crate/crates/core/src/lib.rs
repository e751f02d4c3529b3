//! Generalised truth values for quantum propositions over finite posets of
//! commutative subalgebras.
//!
//! A [`contexts::ContextPoset`] holds the contexts (orthogonal resolutions of
//! the identity) ordered by inclusion. On top of it:
//!
//! - [`presheaves`]: coarse-graining of projectors, restriction of characters,
//!   global elements and subobjects;
//! - [`valuations`]: valuations whose values are sieves, their supports and
//!   intervals, and exhaustive checks of the correspondence between them;
//! - [`schema`]: valuations parameterised by a binary relation;
//! - [`ocat`]: the same constructions on a category of operators and
//!   functions between them;
//! - [`ks`]: global sections of the spectral presheaf, with a bundled
//!   Kochen-Specker ray set;
//! - [`cli`]: file formats and the `toposval` command.

pub mod cli;
pub mod contexts;
pub mod error;
pub mod fixtures;
pub mod ks;
pub mod linalg;
pub mod ocat;
pub mod presheaves;
pub mod schema;
pub mod site;
pub mod valuations;

pub use error::{Error, Result};
