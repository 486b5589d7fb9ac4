//! Exit-code contract: 0 when every requested check passes, 1 when a check
//! fails, then distinct codes for bad input, numerical breakdown and I/O.

use std::fmt;

pub const CHECK_FAILED: u8 = 1;
pub const VALIDATION: u8 = 2;
pub const NUMERICAL: u8 = 3;
pub const IO: u8 = 4;

/// Rejected input detected by the command layer.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid input: {}", self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Invalid>() {
            return VALIDATION;
        }
        if let Some(e) = cause.downcast_ref::<pme_tube::Error>() {
            return if e.is_validation() {
                VALIDATION
            } else if e.is_io() {
                IO
            } else {
                NUMERICAL
            };
        }
        if cause.is::<std::io::Error>() {
            return IO;
        }
    }
    NUMERICAL
}
