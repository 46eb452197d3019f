use thiserror::Error;

/// Failures surfaced by the construction, the verifier and the configuration loader.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("point ({x}, {y}) is outside {domain}")]
    PointDomain {
        x: f64,
        y: f64,
        domain: &'static str,
    },

    #[error("integration error estimate {estimate:e} exceeds tolerance {tol:e} (y = {y}, t = {t})")]
    Integration { y: f64, t: f64, estimate: f64, tol: f64 },

    #[error("root finding for {what} did not converge at ({x}, {y})")]
    RootFind { what: &'static str, x: f64, y: f64 },

    #[error("derivative profile infeasible at t = {t}: floor slope {floor}")]
    Infeasible { t: f64, floor: f64 },

    #[error("pullback from ({x}, {y}) exceeded {cap} steps, stranded at ({last_x}, {last_y})")]
    PullbackCap {
        x: f64,
        y: f64,
        cap: usize,
        last_x: f64,
        last_y: f64,
    },

    #[error("foliation frame degenerate at ({x}, {y}): determinant {det:e}")]
    DegenerateFrame { x: f64, y: f64, det: f64 },

    #[error("tangent vector carries no bundle tag")]
    Untagged,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
