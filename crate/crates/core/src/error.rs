use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid discretization: {0}")]
    InvalidDiscretization(String),

    #[error("support of {requested} nodes requested but the cloud has only {available}")]
    InsufficientNodes { requested: usize, available: usize },

    #[error("node index {index} out of range for a cloud of {count} nodes")]
    NodeOutOfRange { index: usize, count: usize },

    #[error("degenerate support: rmax = {rmax}")]
    DegenerateSupport { rmax: f64 },

    #[error("underdetermined support: {nodes} nodes for {terms} basis terms")]
    UnderdeterminedSupport { nodes: usize, terms: usize },

    /// The moment (or interpolation) matrix of a local approximation is
    /// singular or below the configured rcond floor.
    #[error("singular stencil{}: rcond = {rcond:e}", fmt_node(*.node))]
    StencilSingular { node: Option<usize>, rcond: f64 },

    #[error("unsupported derivative {0:?} for this approximation")]
    UnsupportedDerivative([u8; 3]),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("conflicting Dirichlet values on dof {dof}: {first} vs {second}")]
    DirichletConflict { dof: usize, first: f64, second: f64 },

    #[error("invalid boundary specification: {0}")]
    InvalidBoundary(String),

    #[error("degenerate normal at node {node}")]
    DegenerateNormal { node: usize },

    #[error("singular system: zero pivot in column {column}")]
    SingularSystem { column: usize },

    #[error("mismatched sampling: {0}")]
    MismatchedSampling(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing data: {0}")]
    Missing(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_node(node: Option<usize>) -> String {
    node.map(|n| format!(" at node {n}")).unwrap_or_default()
}

impl Error {
    /// Attach the star node to a stencil error raised without one.
    pub fn at_node(self, star: usize) -> Self {
        match self {
            Error::StencilSingular { node: None, rcond } => Error::StencilSingular {
                node: Some(star),
                rcond,
            },
            other => other,
        }
    }

    /// The node a failure is attributed to, when known.
    pub fn node(&self) -> Option<usize> {
        match self {
            Error::StencilSingular { node, .. } => *node,
            Error::DegenerateNormal { node } => Some(*node),
            _ => None,
        }
    }
}
