//! Pinching functionals on bilinear forms, their ratio `phi / psi^{4/n}`,
//! empirical estimates of its infimum over scalar-curvature-pinched forms,
//! and explicit sequences that degenerate once the pinching is dropped.

mod estimate;
mod functional;
mod remark;
mod sequence;

pub use estimate::{constraint_holds, estimate_constant, ConstantEstimate, EstimateConfig, ESTIMATE_LABEL};
pub use functional::{
    omega_ratio, phi_k, phi_scal, psi, region_of, Mode, Region, RegionKind, RegionSpec, REGION_TOLERANCE,
};
pub use remark::{
    abs_moment, abs_moment_circle, remark_bound, remark_candidate, remark_direct_closed_form, RemarkBound,
};
pub use sequence::{example_beta_sequence, example_sequence, ExamplePattern, SequenceRecord};
