use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("no particle with tag {0} in configuration")]
    MissingTag(i64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        invalid(format!("{name} must lie in [0,1], got {p}"))
    }
}

pub(crate) fn check_vertex_param(name: &str, p: f64) -> Result<()> {
    if (0.0..1.0).contains(&p) {
        Ok(())
    } else {
        invalid(format!("{name} must lie in [0,1), got {p}"))
    }
}

pub(crate) fn check_rates(left: f64, right: f64) -> Result<()> {
    if !(left >= 0.0 && right > left && right.is_finite()) {
        return invalid(format!("rates must satisfy R > L >= 0, got L={left}, R={right}"));
    }
    Ok(())
}
