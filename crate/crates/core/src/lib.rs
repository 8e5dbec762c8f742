//! Recognizable trace rewriting with level-regular contexts.
//!
//! Traces are handled through their Foata normal forms; rewriting systems
//! compile to word-automatic presentations whose first-order theory is
//! decided by automata constructions.

pub mod automata;
pub mod error;
pub mod fo;
pub mod gtrs;
pub mod io;
pub mod limits;
pub mod rtl;
pub mod sync;
pub mod trace;
pub mod unfolding;

pub use error::{Error, Result};
pub use trace::{Alphabet, FoataWord, Letter, LetterSet};
