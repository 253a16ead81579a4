//! Vector fields with network components, their iterated Lie brackets,
//! bracket matrices and rank-drop loci.

mod brackets;
mod family;
mod locus;
mod matrix;

pub use brackets::{
    bracket_eval, bracket_jets, enumerate_brackets, lyndon_words, standard_bracketing, BracketEvaluator, BracketTerm,
};
pub use family::{polynomial_jet, Component, ComponentDocument, FamilyDocument, FieldTerms, VectorFieldFamily};
pub use locus::{
    locus_sample, locus_sweep, CellLabel, LocusCriterion, LocusLayer, LocusOptions, LocusSweep, DEFAULT_EPSILON_FACTOR,
    DEFAULT_RANK_TOL, MAX_LOCUS_DIM, MAX_LOCUS_K,
};
pub use matrix::{
    bracket_matrix, bracket_matrix_for, determinant, minor_index, minors, rank_at, rank_minor_kappa,
    rank_with_reference, subsets, BracketMatrix,
};
