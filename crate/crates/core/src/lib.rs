pub mod calculus;
mod gmp;
pub mod domination;
pub mod encoder;
pub mod lattice;
pub mod lorentz;
pub mod orlicz;
pub mod pwl;
pub mod rational;
pub mod submult;

pub use domination::{Bound, DominationMatrix, Relation};
pub use lorentz::{powerset_diagram, weights_from_fundamental, WeightSeq};
pub use pwl::{check_submultiplicative, PwlError, PwlFunction};
pub use rational::{q, ParseRationalError, Rational};
pub use calculus::{
    classify_lp_sum, classify_sum_spreading_model, estimate_domination, find_gap_witness, lp_sum_combine, max_combo,
    weighted_sum_combo, SymNorm,
};
pub use encoder::{EncoderState, PropertyReport};
pub use lattice::FiniteLattice;
pub use orlicz::{OrliczFunction, OrliczParams, Pattern};
pub use submult::{build_incomparable_family, FamilyState};
