use std::fmt;

/// Why a run did not produce a clean result.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, files or configuration; names the offending option.
    Usage { flag: String, message: String },
    /// The computation itself failed.
    Analysis(aicat::Error),
}

impl Failure {
    pub fn usage(flag: &str, message: impl fmt::Display) -> Self {
        Failure::Usage {
            flag: flag.to_string(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage { .. } => 2,
            Failure::Analysis(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage { flag, message } => write!(f, "usage error: {flag}: {message}"),
            Failure::Analysis(e) => write!(f, "analysis error: {e}"),
        }
    }
}

impl From<aicat::Error> for Failure {
    fn from(e: aicat::Error) -> Self {
        Failure::Analysis(e)
    }
}

pub trait Context<T> {
    /// Turns a library error on user input into a usage error for `flag`.
    fn for_flag(self, flag: &str) -> Result<T, Failure>;
}

impl<T> Context<T> for aicat::Result<T> {
    fn for_flag(self, flag: &str) -> Result<T, Failure> {
        self.map_err(|e| Failure::usage(flag, e))
    }
}
