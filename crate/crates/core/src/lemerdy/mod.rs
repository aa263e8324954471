//! Power-bounded operator `T x_n = λ_n x_n` on a conditional basis, and the
//! constants that separate power boundedness from similarity to a
//! contraction.

pub mod instance;
pub mod measures;
pub mod scan;
pub mod sequence;

pub use instance::{build_instance, LeMerdyInstance, SpectralValues};
pub use measures::{
    hankel_toeplitz_norms, poly_bound_structured, power_bound_sampled, projection_norms, stein_cond_structured,
    tadmor_ritt_structured,
    unconditional_constant, SectionNorms, UnconditionalReport,
};
pub use scan::{counterexample_scan, scan_row, ScanReport, ScanRow, ScanSettings};
pub use sequence::{make_sequence, CoeffSequence, LambdaFamily, SequenceKind};
