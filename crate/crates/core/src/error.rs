use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters, scenario, or configuration file.
    #[error("configuration error: {0}")]
    Config(String),

    /// The 8-digit pulse register saturated at 99,999,999.
    #[error("pulse counter overflow: register saturated at 99999999 pulses")]
    CounterOverflow,

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}
