//! Singular-value sequences and the sequence-space predicates built on them.

mod decomposition;
mod logavg;
mod membership;
mod sequence;
mod tauberian;

pub use decomposition::tilde_mu;
pub use logavg::{
    default_z1_schedule, log_average, norm_1_inf, riesz_seminorm_proxy, submajorizes, zeta_norm_with, zeta_norm_z1,
    LogAverageSeries, ProxyPolicy, ZetaNorm,
};
pub use membership::{
    ideal_membership, AsymptoticBasis, IdealMembershipReport, Membership, MembershipPolicy, WeakLpVerdict,
};
pub(crate) use sequence::check_checkpoints;
pub use sequence::{
    decreasing_rearrangement, dyadic_checkpoints, rearrange_moduli, PowerLogTail, SingularSequence, ZetaValue,
};
pub use tauberian::{tauberian_classify, TauberianPolicy, TauberianStatus, TauberianVerdict};
