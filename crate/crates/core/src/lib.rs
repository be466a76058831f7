//! Local private information retrieval on graph-replicated storage.
//!
//! Servers are the vertices of a simple graph and every message is an edge,
//! stored by both endpoint servers. A retrieval must hide the desired message
//! index from a server only when that server stores the message. The crate
//! builds retrieval plans, runs them over random storage, verifies privacy by
//! exhaustive enumeration of the user's randomness, and computes capacity
//! bounds as exact rationals.

pub mod capacity;
pub mod field;
pub mod graph;
pub mod scheme;
pub mod sim;
pub mod verify;

pub use capacity::{BoundReport, Rational};
pub use field::{Field, FieldElem};
pub use graph::{Family, Graph};
pub use scheme::{PlanFamily, SchemeConfig, SchemePlan, Transcript};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] field::FieldError),
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    Scheme(#[from] scheme::SchemeError),
    #[error(transparent)]
    Capacity(#[from] capacity::CapacityError),
    #[error(transparent)]
    Verify(#[from] verify::VerifyError),
    #[error(transparent)]
    Sim(#[from] sim::SimError),
}
