//! Exit-status mapping.

use std::fmt;

use trivml::Error;

pub const VERIFY_FAILED: i32 = 1;
pub const INVALID: i32 = 2;
pub const NOT_CONVERGED: i32 = 3;
pub const IO: i32 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn validation(message: impl Into<String>) -> Self {
        Self { code: INVALID, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: IO, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::InvalidParameter(_) | Error::InvalidGrid(_) | Error::ParameterMismatch(_) => {
                INVALID
            }
            Error::Overflow(_)
            | Error::NotConverged { .. }
            | Error::SingularTransform(_)
            | Error::QuadratureDivergence(_)
            | Error::SingularStep(_) => NOT_CONVERGED,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::io(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_codes() {
        assert_eq!(Failure::from(Error::Domain("x".into())).code, INVALID);
        assert_eq!(Failure::from(Error::NotConverged { shells: 3, last_shell: 1.0 }).code, NOT_CONVERGED);
        assert_eq!(Failure::from(Error::SingularStep(0.0)).code, NOT_CONVERGED);
    }
}
