use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("distribution is not normalized (sum = {sum}, tolerance 1e-9)")]
    Unnormalized { sum: f64 },

    #[error("negative probability {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("window size {window} must be between 2 and the grid size {grid}")]
    Window { window: usize, grid: usize },

    #[error("position window ({x}) and momentum window ({k}) must share one pixel count")]
    AsymmetricWindows { x: usize, k: usize },

    #[error("gaussian fit failed: {0}")]
    Fit(String),

    #[error("no hedge possible: {0}")]
    NoHedge(String),

    #[error("all entries fall below the threshold")]
    EmptyAfterThreshold,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            expected,
        }
    }

    /// Wraps an error with the name of the pipeline stage that raised it.
    pub fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub(crate) fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(name, p, "0 <= p <= 1"))
    }
}

pub(crate) fn check_unit_open_closed(name: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(name, p, "0 < p <= 1"))
    }
}

pub(crate) fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(name, x, "positive and finite"))
    }
}
