//! Synthetic logical-robustness benchmarks: a propositional rule language,
//! a forward-chaining prover, a layered theory sampler, contrast and
//! equivalence perturbations, dataset assembly and scoring.

pub mod classical;
pub mod contrast;
pub mod equivalence;
pub mod inference;
pub mod lf;
pub mod logic;
pub mod nlg;
pub mod pipeline;
pub mod sampler;
pub mod scorer;
pub mod seed;

pub use logic::{Atom, Connective, Label, Literal, OperatorProfile, PredicateGroup, Rule, Theory};
