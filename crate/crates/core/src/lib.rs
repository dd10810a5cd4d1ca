pub mod classify;
pub mod error;
pub mod invariant;
pub mod marked;
pub mod poly;
pub mod resolve;

pub use error::{Error, Result};
pub use invariant::{compute_inv, BirthTable, InvRecord, InvariantValue};
pub use poly::{parse_poly, Order, Poly, Rational};
