//! Stochastic chemical reaction network workbench for a molecular watchdog
//! timer: network construction and parsing, Gillespie simulation, exact CTMC
//! analysis, CSL checking, and parameter synthesis.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod crn;
pub mod csl;
pub mod ctmc;
pub mod demo;
pub mod designs;
pub mod error;
pub mod kv;
pub mod params;
pub mod parser;
pub mod rng;
pub mod ssa;

pub use crn::{Crn, NamedReaction, Reaction, Species, State};
pub use error::{CrnError, CslError, CtmcError, ParseError, SimError};
