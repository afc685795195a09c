use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("size guard exceeded: {requested} items requested, limit is {limit}")]
    SizeGuard { requested: u128, limit: u64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not a group: {0}")]
    NotAGroup(String),

    #[error("not a subgroup: {0}")]
    NotSubgroup(String),

    #[error("chain is not descending at level {0}")]
    NotDescending(usize),

    #[error("bracket violation: [{a}, {b}] with a in G_{i}, b in G_{j} is not in G_{}", i + j)]
    BracketViolation { i: usize, j: usize, a: u32, b: u32 },

    #[error("subgroup is not normal: {g} conjugates {h} outside")]
    NotNormal { g: u32, h: u32 },

    #[error("group is not abelian: {a} and {b} do not commute")]
    NotAbelian { a: u32, b: u32 },

    #[error("group is not nilpotent: lower central series stabilizes at order {stable_order}")]
    NotNilpotent { stable_order: usize },

    #[error("invalid corner: {0}")]
    InvalidCorner(String),

    #[error("not an equivalence relation: ({x}, {y}) and ({y}, {z}) related but not ({x}, {z})")]
    NotEquivalence { x: u32, y: u32, z: u32 },

    #[error("relation is not reflexive or not symmetric at ({x}, {y})")]
    NotSymmetric { x: u32, y: u32 },

    #[error("not a nilspace: {0}")]
    NotNilspace(String),

    #[error("relation classes are not graphs of bijections: {0}")]
    NotGraph(String),

    #[error("base configuration is not a cube")]
    BaseNotCube,

    /// `equations` are (cube code, coefficient) pairs whose combination is
    /// contradictory; empty when the system was too large to extract one.
    #[error("functional equation is infeasible: {reason} ({} equations in the witness)", equations.len())]
    Infeasible { reason: String, equations: Vec<(u64, i64)> },

    #[error("map does not descend: {0}")]
    NoDescent(String),

    #[error("fibration does not refine: {0}")]
    NoRefinement(String),

    #[error("classes do not form a partition: {0}")]
    NotPartition(String),

    #[error("not a bijection: {0}")]
    NotBijection(String),

    #[error("action is not minimal: {orbits} orbits")]
    NotMinimal { orbits: usize },

    #[error("map is not equivariant: {0}")]
    NotEquivariant(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn is_guard(&self) -> bool {
        matches!(self, Error::SizeGuard { .. })
    }

    /// Malformed or inconsistent input, as opposed to a mathematical
    /// check that came out negative.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidInput(_)
                | Error::NotAGroup(_)
                | Error::NotSubgroup(_)
                | Error::NotDescending(_)
                | Error::BracketViolation { .. }
                | Error::NotNormal { .. }
                | Error::NotAbelian { .. }
                | Error::NotNilpotent { .. }
                | Error::InvalidCorner(_)
                | Error::NotBijection(_)
                | Error::Format(_)
        )
    }

    /// Stable kebab-case name of the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::SizeGuard { .. } => "size-guard",
            Error::InvalidInput(_) => "invalid-input",
            Error::NotAGroup(_) => "not-a-group",
            Error::NotSubgroup(_) => "not-subgroup",
            Error::NotDescending(_) => "not-descending",
            Error::BracketViolation { .. } => "bracket-violation",
            Error::NotNormal { .. } => "not-normal",
            Error::NotAbelian { .. } => "not-abelian",
            Error::NotNilpotent { .. } => "not-nilpotent",
            Error::InvalidCorner(_) => "invalid-corner",
            Error::NotEquivalence { .. } => "not-equivalence",
            Error::NotSymmetric { .. } => "not-symmetric",
            Error::NotNilspace(_) => "not-nilspace",
            Error::NotGraph(_) => "not-graph",
            Error::BaseNotCube => "base-not-cube",
            Error::Infeasible { .. } => "infeasible",
            Error::NoDescent(_) => "no-descent",
            Error::NoRefinement(_) => "no-refinement",
            Error::NotPartition(_) => "not-partition",
            Error::NotBijection(_) => "not-bijection",
            Error::NotMinimal { .. } => "not-minimal",
            Error::NotEquivariant(_) => "not-equivariant",
            Error::CheckFailed(_) => "check-failed",
            Error::Format(_) => "format",
        }
    }
}
