//! Range-assignment constructions.

pub mod brute;
pub mod cell;
pub mod mst;
pub mod oct;
pub mod tiling;

pub use brute::brute_force_optimum;
pub use cell::{cell_alg, cell_alg_with, lambda_for_range, CellAssignment, CellId, CellPartition, PivotRule};
pub use mst::mst_heuristic;
pub use oct::{cover_radius, oct_broadcast, oct_cover, oct_cover_detailed, source_chain, OctCover};
pub use tiling::{build_tiling, Tiling};
