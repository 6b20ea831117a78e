use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] predlab::Error),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: line {line}, column {col}: {msg}")]
    Config { path: String, line: usize, col: usize, msg: String },

    #[error("precision budget: {spec} up to n = {n} needs at least {required} bits, got {given}")]
    Budget { spec: String, n: usize, required: u32, given: u32 },

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// 1 verdict failure, 2 usage or parse, 3 numerical degeneracy.
    pub fn exit_code(&self) -> i32 {
        use predlab::Error as E;
        match self {
            CliError::Core(E::Violation(_)) => 1,
            CliError::Core(E::Degenerate(_) | E::Quadrature { .. } | E::Indeterminate(_) | E::Factorization(_) | E::Evaluation { .. }) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// 1-based line and column of a byte offset.
pub fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map(|l| l.chars().count()).unwrap_or(0) + 1;
    (line, col)
}
