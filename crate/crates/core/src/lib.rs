//! Cellular automata with algebraic local rules on topological Markov chains.
//!
//! The crate is organized around five layers:
//!
//! - [`tmc`] — topological Markov chains (edge shifts): allowed words,
//!   follower sets, irreducibility/mixing, topological entropy.
//! - [`algebra`] — finite binary operations given by Cayley tables:
//!   cancellativity, the medial law, Ψ-associativity, affine (Toyoda)
//!   decomposition, quotient/right-identity structure, and the
//!   structural-compatibility closure of an edge set.
//! - [`ca`] — cellular automata `Φ = id * σ` built from a Cayley table on a
//!   Markov shift: structural compatibility, permutativity, N-scaling,
//!   iterated rules, and cylinder preimages.
//! - [`factor`] — decomposition of structurally compatible right-permutative
//!   automata into a (group or affine) factor times a translation, plus
//!   finite-depth conjugacy verification and search.
//! - [`measure`] / [`cesaro`] — stationary finite-memory measures (Parry
//!   measure, γ-decay diagnostics, pushforwards, invariance checks) and the
//!   Cesàro mean distribution `(1/N) Σ μ∘Φ⁻ⁿ` on cylinders, computed exactly
//!   or by seeded Monte Carlo.
//!
//! Everything is deterministic: sampling takes explicit seeds, searches use
//! canonical candidate order, and enumerations are guarded by an explicit
//! cap (see [`DEFAULT_ENUM_CAP`]).

pub mod algebra;
pub mod ca;
pub mod cesaro;
pub mod factor;
pub mod fixtures;
pub mod json;
pub mod measure;
pub mod tmc;

pub use algebra::{AlgebraReport, CayleyTable, Permutation, RightStructure, StructureMode, ToyodaDecomposition};
pub use ca::{BlockCode, CellularAutomaton, ScOutcome};
pub use cesaro::{CesaroReport, Verdict};
pub use factor::{ConjugacyCheck, DecompositionCertificate, SplitCode};
pub use measure::{FiniteMemoryMeasure, GammaSequence};
pub use tmc::{Alphabet, MarkovShift, ShiftReport, Word};

/// Default cap on the number of words any single enumeration may visit.
///
/// Operations that enumerate allowed words (word listing, iterated rules,
/// cylinder preimages, the exact Cesàro engine) refuse to start work that
/// would exceed the cap and return [`Error::DepthTooLarge`] instead.
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

/// Crate-wide error type. Every variant carries enough context to be
/// reported as a one-line machine-readable diagnostic.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A symbol token does not belong to the alphabet in scope.
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    /// Pruning stranded symbols deleted the whole alphabet.
    #[error("shift is empty after pruning stranded symbols")]
    EmptyShift,
    /// An enumeration would visit more than the configured cap of words.
    #[error("enumeration of {requested} words exceeds the cap of {cap}")]
    DepthTooLarge { requested: u128, cap: u64 },
    /// A word contains a forbidden adjacent pair.
    #[error("word `{word}` is not allowed in the shift")]
    NotAllowed { word: String },
    /// The shift's edge digraph is not strongly connected.
    #[error("shift is not irreducible")]
    NotIrreducible,
    /// A local rule maps allowed words outside the shift.
    #[error("rule is not closed on the shift: {detail}")]
    NotClosed { detail: String },
    /// A bounded search ran out of budget before reaching a verdict.
    #[error("search exceeded its budget of {budget} candidates")]
    SearchExceeded { budget: u64 },
    /// A verified structural identity failed; the table is outside the
    /// hypotheses of the decomposition it was submitted to.
    #[error("structure violation: {reason}")]
    StructureViolation { reason: String },
    /// The symbol split code collided on two symbols.
    #[error("symbol code is not bijective: `{first}` and `{second}` collide")]
    NotBijective { first: String, second: String },
    /// The image shift is not the product of its two factor shifts.
    #[error("product structure failed: edge ({0}, {1}) is missing from the image shift", edge.0, edge.1)]
    ProductFailed { edge: (String, String) },
    /// A precondition of a higher-level operation failed.
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    /// A report does not cover every allowed word of the requested length.
    #[error("word set misses the allowed word `{missing}`")]
    IncompleteCover { missing: String },
    /// A supplied initial distribution is not stationary under the kernel.
    #[error("initial distribution is not stationary (deviation {deviation:.3e})")]
    NotStationary { deviation: f64 },
    /// Malformed input (schema, shape, or numeric validation).
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Stable machine-readable code for CLI and log output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownSymbol(_) => "unknown_symbol",
            Error::EmptyShift => "empty_shift",
            Error::DepthTooLarge { .. } => "depth_too_large",
            Error::NotAllowed { .. } => "not_allowed",
            Error::NotIrreducible => "not_irreducible",
            Error::NotClosed { .. } => "not_closed",
            Error::SearchExceeded { .. } => "search_exceeded",
            Error::StructureViolation { .. } => "structure_violation",
            Error::NotBijective { .. } => "not_bijective",
            Error::ProductFailed { .. } => "product_failed",
            Error::HypothesisFailed(_) => "hypothesis_failed",
            Error::IncompleteCover { .. } => "incomplete_cover",
            Error::NotStationary { .. } => "not_stationary",
            Error::Invalid(_) => "invalid_input",
        }
    }
}

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
