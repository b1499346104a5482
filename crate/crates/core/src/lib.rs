//! Exact-arithmetic construction and verification of a function on symbolic
//! reals whose antisymmetry gaps stay bounded away from zero outside a finite
//! set of shifts, with a countable bounded range.
//!
//! The pieces: a fixed bijective enumeration of the rationals
//! ([`rationals`]), symbolic reals over a labelled basis ([`hamel`]), a code
//! map into a product of finite discrete spaces with an ultrametric
//! ([`encoder`]), a Cantor ternary embedding of the codes into [0,1)
//! ([`embedding`]), and exhaustive plus randomized verification campaigns
//! ([`verify`]).

pub mod cli;
pub mod embedding;
pub mod encoder;
pub mod error;
pub mod hamel;
pub mod rationals;
pub mod verify;

pub use error::{Error, Result};
