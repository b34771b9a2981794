use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coupling matrix is not Hermitian: a[{i}][{j}] != conj(a[{j}][{i}]) (mismatch {mismatch:.3e})")]
    NonHermitian { i: usize, j: usize, mismatch: f64 },

    #[error("invalid parameter: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("step size underflow at t = {t} (h = {h:.3e}); last good state kept")]
    StepUnderflow { t: f64, h: f64 },

    #[error("step budget of {max_steps} exhausted at t = {t}")]
    MaxSteps { t: f64, max_steps: usize },

    #[error("unphysical Bloch vector at t = {t}: |v| = {norm}")]
    Unphysical { t: f64, norm: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical pipeline, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepUnderflow { .. } | Error::MaxSteps { .. } | Error::Unphysical { .. }
        )
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
