//! Carleson-condition diagnostics and finite Nevanlinna–Pick interpolation.

pub mod carleson;
pub mod pick;

pub use carleson::{
    carleson_delta, carleson_delta_from_gaps, default_disk_grid, disk_grid, generalized_carleson_ratio, CarlesonReport,
    GeneralizedCarleson,
};
pub use pick::{np_interpolate, pick_feasible, pick_matrix, Interpolant, PickData, PickReport};
