//! Generators for the case-study models.

pub mod grid;
pub mod traffic;

pub use grid::{build_grid_world, GridConfig, GridError, Region};
pub use traffic::{
    build_traffic_network, NaiveController, TrafficConfig, TrafficError, TrafficLayout, TrafficState,
};
