//! Zero counting on intervals, sampled sign grids and their Z2 homology.

mod grid;
mod homology;
mod zeros;

pub use grid::{sign_grid, SignGrid, MAX_GRID_CELLS};
pub use homology::{
    betti_with_stability, betti_z2, components, BettiReport, BettiVector, CubicalComplex, MAX_LATTICE_CELLS,
};
pub use zeros::{count_zeros_1d, superlevel_intervals_1d, ZeroOptions, ZeroReport};
