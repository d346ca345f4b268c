//! Flag-algebra certificates for 5-vertex tournament inducibility, with the
//! exact arithmetic, canonical forms and extremal constructions they rest on.

pub mod canon;
pub mod catalog;
pub mod certificate;
pub mod density;
pub mod error;
pub mod exact;
pub mod flag;
pub mod par;
pub mod structures;
pub mod tournament;

pub use error::{Error, Result};
pub use tournament::Tournament;
