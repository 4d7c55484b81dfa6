//! Error kinds shared across the crate.
//!
//! The four kinds map one-to-one onto the CLI exit codes used by the
//! companion crate: structural and domain errors are caller mistakes,
//! resource errors are budget overruns, and integrity errors mean a
//! verified internal contract failed (canonical-form collision, a
//! certified bound that did not hold, and so on).

use alloc::string::String;
use core::fmt;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Inputs refer to mismatched or malformed structures (different
    /// parent spaces, out-of-range indices, missing stages).
    Structural(String),
    /// An operation was applied outside its mathematical domain
    /// (mesh of an empty family, uniform vector on an empty set).
    Domain(String),
    /// A configured budget was exceeded; the message names the budget.
    Resource(String),
    /// A recomputed invariant failed: the data is inconsistent with its
    /// own certificate.
    Integrity(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Structural(m) => write!(f, "structural error: {m}"),
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Resource(m) => write!(f, "resource error: {m}"),
            Error::Integrity(m) => write!(f, "integrity error: {m}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! err_ctor {
    ($name:ident, $variant:ident) => {
        impl Error {
            pub fn $name(msg: impl fmt::Display) -> Self {
                Error::$variant(alloc::format!("{msg}"))
            }
        }
    };
}

err_ctor!(structural, Structural);
err_ctor!(domain, Domain);
err_ctor!(resource, Resource);
err_ctor!(integrity, Integrity);
