//! Affine Dynkin diagrams, labellings, real forms and the constant and
//! periodic geometric Toda equations attached to them.

pub mod affine_roots;
pub mod cartan;
pub mod chevalley;
pub mod diagram;
pub mod error;
pub mod higgs;
pub mod involutions;
pub mod linalg;
pub mod solver;
pub mod stability;
pub mod toda;

pub use cartan::{Family, FiniteType};
pub use diagram::{build_diagram, AffineDiagram, DiagramId};
pub use error::{Result, TodaError};
