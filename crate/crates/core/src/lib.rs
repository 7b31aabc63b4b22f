//! Knapsack, subset sum and exponent equations over graph groups.

pub mod alphabet;
pub mod automata;
pub mod cli;
pub mod cancellation;
pub mod error;
pub mod gadgets;
pub mod group;
pub mod io;
pub mod knapsack;
pub mod semilinear;
pub mod trace;

pub use alphabet::{classify, decompose, DecompositionTree, Gen, GraphClass, IndependenceAlphabet};
pub use error::{Error, Result};
pub use group::{is_identity, is_identity_stacked, reduce_word, GroupWord, Letter};
