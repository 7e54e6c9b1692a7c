use std::fmt;

/// Exit code for configuration and argument errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code for size-guard violations.
pub const EXIT_CAPACITY: i32 = 3;
/// Exit code for numerical or constraint failures.
pub const EXIT_NUMERICAL: i32 = 4;

/// An error carrying the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<cascade_synth::Error> for Failure {
    fn from(e: cascade_synth::Error) -> Self {
        let code = if e.is_capacity() {
            EXIT_CAPACITY
        } else if e.is_numerical() {
            EXIT_NUMERICAL
        } else {
            EXIT_CONFIG
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}
