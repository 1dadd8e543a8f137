use std::fmt;

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub const EXIT_IO: u8 = 1;
pub const EXIT_FIT: u8 = 2;
pub const EXIT_DOMAIN: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

impl CliError {
    pub fn io(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_IO,
            message: message.to_string(),
        }
    }

    pub fn fit(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_FIT,
            message: message.to_string(),
        }
    }

    pub fn domain(message: impl fmt::Display) -> Self {
        Self {
            code: EXIT_DOMAIN,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CliResult<T> = Result<T, CliError>;
