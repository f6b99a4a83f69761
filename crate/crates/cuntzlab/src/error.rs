use thiserror::Error;

/// Errors for construction, validation, and assertion-class checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operands reference different regions")]
    RegionMismatch,

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point ({re}, {im}) is {dist:.3e} from the grid, beyond resolution h = {h:.3e}")]
    OutsideRegion { re: f64, im: f64, dist: f64, h: f64 },

    #[error("total mass {mass} exceeds target dimension {n}")]
    MassExceedsDimension { mass: u64, n: u32 },

    #[error("unital lift requires total mass equal to n: mass {mass}, n {n}")]
    NotUnital { mass: u64, n: u32 },

    #[error("ball at ({re}, {im}) carries zero mass")]
    ZeroMassBall { re: f64, im: f64 },

    #[error("matrix is not normal: defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    NotNormal { defect: f64, tol: f64 },

    #[error("matrix is not unitary: \u{2016}u*u - 1\u{2016} = {defect:.3e}")]
    NotUnitary { defect: f64 },

    #[error("eigendecomposition failed: {0}")]
    EigenFailure(String),

    #[error("function {name} undefined at eigenvalue ({re}, {im})")]
    UndefinedAtEigenvalue { name: String, re: f64, im: f64 },

    #[error("cover certificate {which} failed")]
    CertificateFailed { which: &'static str },

    #[error("certified bound violated: measured {measured:.6e}, budget {budget:.6e}")]
    BoundViolation { measured: f64, budget: f64 },

    #[error("marriage inequality violated: lhs {lhs:.6e} > rhs {rhs:.6e}")]
    MarriageViolation { lhs: f64, rhs: f64 },

    #[error("list length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("no admissible index: {0}")]
    NoConvergence(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
