use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("corner is not strictly convex: half-angle {half_angle} must lie in (0, pi/2)")]
    NotStrictlyConvex { half_angle: f64 },

    #[error("corner radius {requested} too large; maximal admissible radius is {max}")]
    CornerRadiusTooLarge { requested: f64, max: f64 },

    #[error("meshing failed: {0}")]
    Mesh(String),

    #[error("mesh deformation inverted triangle {triangle}")]
    InvertedElement { triangle: usize },

    #[error("malformed mesh file: {0}")]
    MeshFormat(String),

    #[error("singular linear system (pivot {pivot} at step {step})")]
    Singular { step: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid content model: {0}")]
    Content(String),

    #[error("boundary data norm {norm:.3e} exceeds the smallness threshold {threshold:.3e}")]
    DataTooLarge { norm: f64, threshold: f64 },

    #[error("Newton iteration did not converge in {iterations} steps; residual history {history:?}")]
    NewtonDivergence { iterations: usize, history: Vec<f64> },

    #[error("quadrature did not reach tolerance {tolerance:.1e} (estimated error {estimate:.3e})")]
    Quadrature { tolerance: f64, estimate: f64 },

    #[error("exponent real part {0:.1} exceeds the overflow cap")]
    Overflow(f64),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("flank Cauchy data mismatch {mismatch:.3e} exceeds tolerance {tolerance:.1e}")]
    FlankMismatch { mismatch: f64, tolerance: f64 },

    #[error("mismatched discretizations: {0}")]
    MismatchedData(String),

    #[error("Assumption B violated: {0}")]
    VandermondeSingular(String),

    #[error("optimizer stagnated at misfit {misfit:.3e} above tolerance {tolerance:.1e}: {diagnostics}")]
    Stagnation { misfit: f64, tolerance: f64, diagnostics: String },

    #[error("Gauss-Newton did not converge: {0}")]
    GaussNewton(String),

    #[error("nest recovery failed at layer {layer} after recovering {completed} layer(s): {source}")]
    NestStage {
        layer: usize,
        completed: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Configuration problems map to exit status 2, everything else to 1.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Json(_))
    }
}
