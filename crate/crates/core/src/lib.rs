//! Scattered-context CD grammar systems.
//!
//! The crate converts monotone grammars to Kuroda normal form, builds an
//! equivalent two-component grammar system with propagating scattered
//! context rules working in t-mode, reduces it to rules of degree at most
//! two, and compares generated languages by bounded enumeration.

pub mod cli;
pub mod engine;
pub mod fuzz;
pub mod grammar;
pub mod kuroda;
pub mod par;
pub mod rewrite;
pub mod symbol;
pub mod system;
pub mod transform;
