//! Exact lattice point counting on products of hyperbolic planes.
//!
//! The library enumerates orbits of PSL_2(Z) (d = 1) and of Hilbert modular
//! groups PSL_2(O_F) over real quadratic fields (d = 2) acting on H^d by
//! Moebius transformations in each factor, counts orbit points in boxes,
//! hypercubes and strips of the vector-valued distance, and provides the
//! Selberg transform numerics needed to compare exact counts against
//! asymptotic main terms.
//!
//! A narrative guide lives in `book/`; its code snippets double as doc-tests
//! (see [`guide`]).

pub mod error;
pub mod field;
pub mod geom;
pub mod guide;
pub mod lab;
pub mod orbit;
pub mod reduction;
pub mod selberg;

pub use error::{Error, Result};
