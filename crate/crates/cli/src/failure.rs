use hidaprop::Error;
use std::fmt;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// A computation failed or a verification did not pass.
    pub const FAILED: u8 = 1;
    /// Malformed input or a potential outside the admissible class.
    pub const INVALID: u8 = 2;
    /// The requested tolerance is beyond the order cap.
    pub const UNREACHABLE: u8 = 3;
}

/// An error that ends the process with `code`.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self { code: exit::INVALID, message: message.into() }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        Self { code: exit::FAILED, message: message.into() }
    }

    /// Prefix the message with where it happened.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::TruncationUnreachable { .. } => exit::UNREACHABLE,
            Error::Parse { .. }
            | Error::InvalidTestFunction(_)
            | Error::InvalidMeasure(_)
            | Error::NotAdmissible(_)
            | Error::DegenerateInterval { .. }
            | Error::InvalidParameter(_)
            | Error::Pole
            | Error::Unsupported(_) => exit::INVALID,
            Error::Singular { .. } | Error::DivergentGaussian(_) | Error::NonFinite(_) => exit::FAILED,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::failed(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_classes_map_to_exit_codes() {
        let unreachable = Error::TruncationUnreachable { tol: 1e-30, order: 25, best_tail: 1e-20 };
        assert_eq!(Failure::from(unreachable).code, exit::UNREACHABLE);
        assert_eq!(Failure::from(Error::Parse { line: 3, msg: "x".into() }).code, exit::INVALID);
        assert_eq!(Failure::from(Error::NotAdmissible("i)".into())).code, exit::INVALID);
        assert_eq!(Failure::from(Error::NonFinite("p".into())).code, exit::FAILED);
        let f = Failure::from(Error::Parse { line: 3, msg: "bad".into() }).context("pot.txt");
        assert_eq!(f.message, "pot.txt: line 3: bad");
    }
}
