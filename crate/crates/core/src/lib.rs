//! l-dimension and l-rank invariants of finite matrix groups.
//!
//! Two independent routes compute the same invariants: composition factors
//! of the enumerated group (`grp` + `lietypes`), and the Lie algebra spanned
//! by logarithms of its order-l elements (`liealg`). `certify` checks the
//! results against a declared ambient group.

pub mod certify;
pub mod gf;
pub mod grp;
pub mod liealg;
pub mod lietypes;
pub mod selftest;
pub mod analyze;
pub mod instance;
pub mod corpus;
