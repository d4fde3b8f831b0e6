use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate mode name `{0}`")]
    DuplicateModeName(String),

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("unknown mode `{0}`")]
    UnknownMode(String),

    #[error("unknown label `{label}` for mode `{mode}`")]
    UnknownLabel { mode: String, label: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("state has zero norm and cannot be normalized")]
    ZeroNorm,

    #[error("measurement basis is not orthonormal (deviation {deviation:e})")]
    BasisNotOrthonormal { deviation: f64 },

    #[error("operator is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("operator is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("mode `{mode}` has the wrong kind for {element}")]
    WrongModeKind { mode: String, element: &'static str },

    #[error("routing constraints are not isometric (inner-product mismatch {mismatch:e})")]
    ConstraintsNotIsometric { mismatch: f64 },

    #[error("pre- and postselection are orthogonal (|overlap| = {overlap:e} <= floor {floor:e}); weak value undefined")]
    OrthogonalSelection { overlap: f64, floor: f64 },

    #[error("pointer grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("pointer shift {shift} exceeds half the grid half-width {half_width}")]
    ShiftExceedsGrid { shift: f64, half_width: f64 },

    #[error("postselection impossible (success probability {probability:e})")]
    PostselectionImpossible { probability: f64 },

    #[error("no simulated trial passed postselection out of {trials}")]
    NoAcceptedTrials { trials: usize },

    #[error("coupling strength must be positive")]
    ZeroCoupling,

    #[error("no samples given")]
    EmptySamples,

    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid scenario: {0}")]
    Validation(Box<Error>),

    #[error("scenario `{scenario}`: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("unknown scenario `{0}` (expected a built-in name or a .qcc path)")]
    UnknownScenario(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Strips scenario/validation wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Validation(inner) => inner.root(),
            Error::Scenario { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::PostselectionImpossible { .. }
                | Error::NoAcceptedTrials { .. }
                | Error::NotUnitary { .. }
                | Error::NotHermitian { .. }
                | Error::ConstraintsNotIsometric { .. }
        ) && !matches!(self, Error::Validation(_))
    }
}
