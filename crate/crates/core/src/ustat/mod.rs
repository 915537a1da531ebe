//! Kernels, Hoeffding decomposition, truncation and U-statistic evaluation.

pub mod accumulate;
pub mod hoeffding;
pub mod kernel;
pub mod truncate;

pub use accumulate::{
    u_statistic_by_sites, u_statistic_factored, u_statistic_naive, Engine, UStatAccumulator,
    UStatRecord,
};
pub use hoeffding::{hoeffding_split, HoeffdingParts, LinearPart};
pub use kernel::{H1Mode, KernelKind, KernelSpec, LawMeasure, CUSTOM_KERNELS};
pub use truncate::{
    moment_exponent, truncate_kernel, truncation_bound_check, truncation_threshold, TruncatedKernel,
};
