//! Herdability analysis for positive linear systems defined on networks.
//!
//! The crate answers three questions about a directed, positively weighted
//! graph whose nodes carry scalar states evolving as `ẋ = A·x + B·u`:
//!
//! * which input placements make every state reachable above a threshold
//!   (input connectability, decided by reachability);
//! * the smallest such placement, found in linear time from the root
//!   strongly connected components of the condensation;
//! * how much control energy each candidate input node needs to push the
//!   grounded consensus dynamics into the shifted orthant `{x : x ≥ d}`,
//!   which yields a node ranking (herdability centrality).
//!
//! Supporting modules cover classical centralities, the maximum-matching
//! driver-node baseline and a fixed-step trajectory simulator used to
//! cross-check the energy computations.

pub mod centrality;
pub mod dynamics;
pub mod energy;
mod error;
pub mod graph;
pub mod herd;
mod linalg;
pub mod qp;
pub mod sim;
pub mod structural;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{Graph, SccDag};
