//! Economic model of crimes against cultural-historical and archaeological
//! heritage.
//!
//! The crate is split along the lines of the model:
//!
//! - [`econ`]: the individual offender's commit/abstain calculus and the
//!   CPP = CPR x lambda participation identity.
//! - [`market`]: aggregate crime supply, the social tolerance constraint,
//!   the equilibrium solver and imprisonment comparative statics.
//! - [`valuation`]: Total Economic Value of a heritage object, including the
//!   five non-use components aggregated from contingent-valuation surveys.
//! - [`funnel`]: detection-risk analytics over the registered -> court ->
//!   conviction -> imprisonment pipeline.
//! - [`microsim`]: a seeded agent-based population used as a brute-force
//!   check on the analytic supply curve.
//! - [`scenario`]: net benefits and opportunity cost of counteraction
//!   alternatives.
//! - [`app`]: config, CSV ingestion, report emission and the CLI driver.

// Guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod econ;
pub mod funnel;
pub mod market;
pub mod microsim;
pub mod roots;
pub mod scenario;
pub mod valuation;
