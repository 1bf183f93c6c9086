//! Shift, dilation, power and Cesaro maps on sequences and piecewise
//! functions, the exponential change of variable, and the commutator and
//! almost-convergence tests built on them.

mod appendix;
mod discrete;
mod piecewise;

pub use appendix::{
    almost_convergence_test, commutator_defect, oscillation_k, oscillation_profile, AlmostConvergence, DefectInput,
    MapPair,
};
pub use discrete::{
    cesaro_discrete, dilate_discrete, floor_embed, linear_embed, restrict, restrict_window_avg, shift_discrete,
    window_avg,
};
pub use piecewise::{
    cesaro_cont, conjugate, dilate_cont, exp_conjugate, log_average_function, log_conjugate, power_cont,
    power_cont_with_ratio, shift_cont, step_rearrangement, PieceKind, PiecewiseFunction, Sample, RESAMPLE_RATIO,
};
