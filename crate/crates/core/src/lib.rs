//! Pfaffian-chain analysis of feedforward networks with Riccati-class
//! activations.
//!
//! The crate builds the ordered Pfaffian chain of a network together with
//! explicit polynomial derivative certificates, evaluates the resulting
//! architecture-only bounds on zeros and Betti numbers with exact integer
//! arithmetic, and measures the bounded quantities numerically: zeros of
//! one-dimensional networks, Z2 Betti numbers of sampled superlevel sets,
//! and Lie-bracket rank-drop loci of network-parameterized vector fields.
//!
//! Modules:
//! - [`activations`]: the Riccati activation registry and derivative evaluation.
//! - [`network`]: networks, forward passes, Taylor jets.
//! - [`chain`]: chain construction, certificates, formats and format calculus.
//! - [`bounds`]: exact bound evaluation and bracket counting.
//! - [`liegeom`]: vector-field families, brackets, minors, rank-drop loci.
//! - [`topology`]: zero counting, sign grids, cubical Z2 homology.

pub mod activations;
pub mod bounds;
pub mod chain;
mod error;
pub mod liegeom;
pub mod network;
pub mod topology;

pub use activations::{builtins, ActivationDeclaration, ActivationRef, RiccatiActivation, RiccatiCoefficients};
pub use bounds::{BigBound, BracketMode};
pub use chain::{Certificates, ChainFunction, PfaffianFormat, SparsePoly};
pub use error::{Error, Result};
pub use liegeom::{BracketMatrix, BracketTerm, VectorFieldFamily};
pub use network::{Architecture, BoxDomain, Jet, LayerTrace, NetworkSpec};
pub use topology::{BettiVector, SignGrid};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
