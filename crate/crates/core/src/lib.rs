//! Finite graphs of finite p-groups: validation, reduction, fundamental
//! group presentations, the decomposition induced on a finite-index
//! subgroup, and checks of the edge-count bounds relating the two.

pub mod cli;
pub mod corpus;
pub mod decomp;
pub mod gog;
pub mod graph;
pub mod io;
pub mod pgroup;
pub mod quotient;
pub mod verify;
pub mod wilkes;
