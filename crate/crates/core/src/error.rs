use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("not a group element: {0}")]
    NotGroupElement(String),
    #[error("pole at t = {0}")]
    Pole(f64),
    #[error("pole of wp at z = {re} + {im}i")]
    WpPole { re: f64, im: f64 },
    #[error("degenerate lattice: discriminant {0} is numerically zero")]
    DegenerateLattice(f64),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("no nontrivial solution: {0}")]
    NoNontrivialSolution(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("uncontrollable system: {0}")]
    Uncontrollable(String),
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
