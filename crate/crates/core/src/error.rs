use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("outside chart domain: {0}")]
    Domain(String),
    #[error("ball of radius {radius} leaves the domain (largest admissible radius {max_radius})")]
    BallOutsideDomain { radius: f64, max_radius: f64 },
    #[error("scale {lambda} exceeds the source domain (largest admissible scale {max_lambda})")]
    ScaleTooLarge { lambda: f64, max_lambda: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
