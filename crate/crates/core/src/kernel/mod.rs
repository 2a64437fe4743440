//! Fractional mean curvature: the kernel primitive `G`, the graph formula,
//! the direct Monte Carlo oracle and the interaction energy.

mod config;
mod direct;
mod energy;
mod gfun;
mod graph;
pub mod quadrature;

pub use config::{CurvatureResult, QuadratureConfig};
pub use direct::nmc_direct;
pub use energy::{interaction_energy, per_alpha, Aabb, EnergyEstimate, PerimeterEstimate, Region};
pub use gfun::{eval_g, eval_g_infinity, GFunction};
pub use graph::{nmc_graph, nmc_subgraph, nmc_twoleaf};
