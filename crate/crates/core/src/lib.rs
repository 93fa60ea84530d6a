//! Exact combinatorics of cyclic quotients of cDV threefold singularities:
//! weight systems, monomial valuations, the distinguished weight `β` and
//! its multiplicity `k`, the fractional-part lemmas and the structure and
//! normal-form checks built on them.
//!
//! All arithmetic is exact; see [`weights::Rational`].

pub mod error;
pub mod families;
pub mod lemmas;
pub mod pipeline;
pub mod series;
pub mod structure;
pub mod valuation;
pub mod weights;

pub use error::{Error, Result};
pub use series::{Monomial, SeriesSupport, SeriesType};
pub use valuation::{find_beta, BetaFailure, BetaOptions, BetaOutcome, BetaWitness, SublevelSet};
pub use weights::{Rational, Weight, WeightSystem};
