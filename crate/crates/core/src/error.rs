use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RibbonError {
    #[error("no half-edges")]
    Empty,
    #[error("too many half-edges ({0}); at most {max} supported", max = crate::ribbon::MAX_HALF_EDGES)]
    TooLarge(usize),
    #[error("sigma0 has {sigma0} entries but sigma1 has {sigma1}")]
    LengthMismatch { sigma0: usize, sigma1: usize },
    #[error("{which} is not a permutation of 0..{len}: {detail}")]
    NotPermutation { which: &'static str, len: usize, detail: String },
    #[error("odd number of half-edges ({0})")]
    OddHalfEdges(usize),
    #[error("sigma1 has a fixed point at half-edge {0}")]
    FixedPoint(usize),
    #[error("sigma1 is not an involution at half-edge {0}")]
    NotInvolution(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("inconsistent structure: E={edges}, V={vertices}, B={boundaries} gives no genus")]
    Inconsistent { edges: usize, vertices: usize, boundaries: usize },
    #[error("corners {0} and {1} are not distinct corners of one boundary")]
    BadCorners(usize, usize),
    #[error("orientation does not match the graph: {0}")]
    BadOrientation(String),
    #[error("permutation is not an automorphism")]
    NotAutomorphism,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("composite differential is nonzero ({nonzero} nonzero entries)")]
    NonzeroComposite { nonzero: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("malformed triplet data: {0}")]
    Parse(String),
}

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("operator output {hash} is missing from the codomain basis; enlarge the edge range or check the enumeration")]
    AssemblyIncomplete { hash: String },
    #[error("non-integral coefficient {0} in assembled matrix")]
    NonIntegral(String),
    #[error("invalid complex specification: {0}")]
    InvalidSpec(String),
    #[error("enumeration refused: {0}")]
    Refused(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Ribbon(#[from] RibbonError),
    #[error("cache i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache format: {0}")]
    Format(String),
}
