use thiserror::Error;

/// Errors raised by graph construction, parsing and the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The graph data itself is malformed (not a class-membership issue).
    #[error("malformed graph: {0}")]
    Structural(String),

    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: ParseErrorKind },

    /// Arguments outside the domain where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    Parameter(String),

    /// A zero of the secular determinant lies on (or numerically too close
    /// to) an integration contour.
    #[error("secular determinant vanishes near the contour at ({re}, {im})")]
    BoundaryProximity { re: f64, im: f64 },

    /// The contour quadrature did not resolve an integer winding number.
    #[error("winding number not resolved: {0}")]
    Resolution(String),

    /// The search ran out of budget. Entries found so far are attached as
    /// `(re, im, multiplicity)`.
    #[error("search budget exhausted after {boxes} boxes ({} entries found)", found.len())]
    Budget {
        boxes: usize,
        found: Vec<(f64, f64, usize)>,
    },

    /// `Id - U(z)` is singular at the requested point.
    #[error("system is singular at ({re}, {im})")]
    Singular { re: f64, im: f64 },

    #[error("truncation bound {bound:e} exceeds tolerance {tol:e}; increase the window")]
    Truncation { bound: f64, tol: f64 },

    /// The graph is not admissible for the requested operation (e.g. balanced).
    #[error("graph rejected: {0}")]
    Rejected(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(i64),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(i64),
    #[error("edge {edge} references unknown vertex {vertex}")]
    DanglingEndpoint { edge: i64, vertex: i64 },
    #[error("edge {edge} has non-positive length {length}")]
    NonPositiveLength { edge: i64, length: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
