//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("table is not a group: {reason}")]
    TableNotAGroup {
        reason: String,
        triple: Option<(usize, usize, usize)>,
    },
    #[error("quotient is not cyclic: {0}")]
    NotCyclicQuotient(String),
    #[error("group is not solvable: no normal subgroup with cyclic quotient in a group of order {0}")]
    NotSolvable(usize),
    #[error("extension does not split over the cyclic generator (a^d = {0} is not the identity)")]
    NonSplitExtension(usize),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("element {0} is not in the group")]
    ElementNotInGroup(usize),
    #[error("irrep set is incomplete: sum of squared dimensions {got} differs from group order {want}")]
    IncompleteIrrepSet { got: usize, want: usize },
    #[error("irrep validation failed: {invariant} (violation {violation:e})")]
    IrrepValidationFailure { invariant: String, violation: f64 },
    #[error("no irreps available for centralizer of order {0}")]
    MissingIrreps(usize),
    #[error("invalid ribbon: {0}")]
    InvalidRibbonSpec(String),
    #[error("lattice is disconnected")]
    Disconnected,
    #[error("invalid site: {0}")]
    InvalidSite(String),
    #[error("dimension {0} exceeds the amplitude cap {1}")]
    TooLarge(u128, usize),
    #[error("support out of range: {0}")]
    SupportOutOfRange(String),
    #[error("operator is not unitary (deviation {0:e})")]
    NonUnitary(f64),
    #[error("operator annihilates the state (norm^2 = {0:e})")]
    ZeroImage(f64),
    #[error("basis is not orthonormal (deviation {0:e})")]
    BasisNotOrthonormal(f64),
    #[error("ancilla not disentangled (fidelity deficit {0:e})")]
    AncillaNotDisentangled(f64),
    #[error("matrix is not monotone: {0}")]
    NotMonotone(String),
    #[error("no compilation rule for monotone matrix {0}")]
    UnsupportedMatrix(String),
    #[error("one-form is not exact: {0}")]
    NotExact(String),
    #[error("invalid argument: {0}")]
    UsageError(String),
    #[error("measurement landed in the completion subspace")]
    CompletionOutcome,
    #[error("branch has zero probability")]
    ZeroProbabilityBranch,
    #[error("charge label set is incomplete")]
    IncompleteLabels,
    #[error("ribbon is not closed")]
    NotClosed,
    #[error("unsupported ribbon: {0}")]
    UnsupportedRibbon(String),
    #[error("unitary search failed: {0}")]
    SearchFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
