use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid mesh topology: {0}")]
    Topology(String),

    #[error("element {element} has non-positive area after reordering")]
    Orientation { element: usize },

    #[error("element {element} is degenerate (area {area:e})")]
    DegenerateElement { element: usize, area: f64 },

    #[error("quadrature degree {requested} exceeds the supported maximum {max}")]
    UnsupportedQuadrature { requested: usize, max: usize },

    #[error("singular {what} matrix")]
    Singular { what: &'static str },

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("NaN detected in {0}")]
    NotFinite(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("Newton did not converge in {iterations} iterations (residual {residual:e}, initial {initial:e})")]
    NewtonDiverged {
        iterations: usize,
        residual: f64,
        initial: f64,
    },

    #[error("time step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("field is not divergence-free (relative defect {relative:e})")]
    NotSolenoidal { relative: f64 },

    #[error("linear solver failed: {0}")]
    LinearSolver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
