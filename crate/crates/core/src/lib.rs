//! Grammar-aware sentence circuits for question answering.
//!
//! Sentences are typed with a pregroup grammar, reduced to a diagram of word
//! states and cups, compiled to a parameterised circuit, and evaluated on a
//! statevector simulator. The [`train`] module fits the word parameters to a
//! labelled corpus.

pub mod cfg;
pub mod circuit;
pub mod corpora;
pub mod diagram;
pub mod error;
pub mod pregroup;
pub mod simulator;
pub mod train;

pub use error::{Error, Result};
