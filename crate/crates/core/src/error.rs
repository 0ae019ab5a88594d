use std::fmt;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The weight law is not subcritical.
    #[error(
        "regime error: model is {regime} (E(W log2 W) = {w_logw}), a subcritical model is required"
    )]
    Regime { regime: Regime, w_logw: f64 },
    /// A dyadic path or level exceeds the configured depth.
    #[error("depth error: requested level {requested} exceeds limit {limit}")]
    Depth { requested: u32, limit: u32 },
    /// A CDF query point is not on the level-K dyadic grid.
    #[error("grid error: {x} is not a multiple of 2^-{depth}")]
    Grid { x: f64, depth: u32 },
    /// Input sequence does not have the required shape.
    #[error("shape error: {0}")]
    Shape(String),
    /// Too few scales inside a regression window.
    #[error("window error: {0}")]
    Window(String),
    /// A closed-form evaluation produced an inconsistent intermediate.
    #[error("consistency error: {0}")]
    Consistency(String),
    /// A resource guard (point count, tree size) was exceeded.
    #[error("resource guard: {0}")]
    Resource(String),
    /// Malformed specification string.
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Regime of a cascade weight law, decided by the value of `E(W log2 W)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        })
    }
}
