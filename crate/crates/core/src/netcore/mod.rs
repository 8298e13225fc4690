//! Fine-scale network model: data types, operator assembly, Dirichlet
//! elimination and connectivity.

mod assembly;
mod boundary;
mod components;
pub mod io;
mod network;

pub use assembly::{
    assemble_laplacian, assemble_mass, degree_from_laplacian, degree_matrix, incidence_factorization,
    laplacian_from_edges,
};
pub use boundary::{reduce_dirichlet, BoundarySpec, ReducedSystem};
pub use components::{components_from_edges, connected_components, subset_components, Components};
pub use network::{EdgeRecord, Network, NodeRecord, Point};
