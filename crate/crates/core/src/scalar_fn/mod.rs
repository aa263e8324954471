//! Scalar function theory on the unit disk.

pub mod blaschke;
pub mod disk;
pub mod hardy;
pub mod poly;
pub mod rational;

pub use blaschke::BlaschkeProduct;
pub use disk::{pseudohyperbolic, DiskPoint};
pub use hardy::{default_quadrature_points, h2_gram, h2_gram_sampled, h2_inner, h2_inner_report, Quadrature};
pub use rational::{divided_difference, rational_algebra, RationalFunction, RationalOp};
