use std::path::PathBuf;

/// Errors from file IO, configuration and persistence.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: row {row}, column {column}: cannot parse {cell:?} as a finite number", path.display())]
    Parse { path: PathBuf, row: usize, column: usize, cell: String },

    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error("{}: {reason}", path.display())]
    Label { path: PathBuf, reason: String },

    /// Core error raised while processing a particular file.
    #[error("{}: {source}", path.display())]
    Data { path: PathBuf, source: htscan_core::Error },

    #[error("dataset `{trojan_id}`: {source}")]
    Dataset { trojan_id: String, source: htscan_core::Error },

    #[error("config `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("{}: invalid JSON: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },

    /// Unknown model kind or unsupported format version.
    #[error("{}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },

    /// Truncated, corrupt or tampered model file.
    #[error("{}: integrity check failed: {reason}", path.display())]
    Integrity { path: PathBuf, reason: String },

    #[error(transparent)]
    Core(#[from] htscan_core::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const DATA: i32 = 3;
    pub const INTERNAL: i32 = 4;
}

fn core_exit_code(e: &htscan_core::Error) -> i32 {
    use htscan_core::Error as E;
    match e {
        E::Config { .. } | E::UnknownFeature { .. } => exit::CONFIG,
        _ => exit::DATA,
    }
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { field: field.into(), reason: reason.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => exit::CONFIG,
            Error::Core(e) => core_exit_code(e),
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::Csv { .. }
            | Error::Label { .. }
            | Error::Data { .. }
            | Error::Dataset { .. }
            | Error::Json { .. }
            | Error::Format { .. }
            | Error::Integrity { .. } => exit::DATA,
        }
    }
}

/// An [`Error`] tagged with the pipeline stage that raised it.
#[derive(Debug, thiserror::Error)]
#[error("[{stage}] {error}")]
pub struct StageError {
    pub stage: &'static str,
    #[source]
    pub error: Error,
}

impl StageError {
    pub fn exit_code(&self) -> i32 {
        self.error.exit_code()
    }
}

/// Attaches a stage tag to fallible results.
pub trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, StageError>;
}

impl<T, E: Into<Error>> Stage<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, StageError> {
        self.map_err(|e| StageError { stage, error: e.into() })
    }
}
