//! Dixmier, zeta-residue and heat-kernel estimators, cross-method reports
//! and the Holder, Mellin and product-trace checks.

mod checks;
mod estimators;
mod source;

pub use checks::{
    holder_check, mellin_check, product_zeta_sequence, HolderCheck, MellinCheck, MellinModel, ProductModel,
    ProductOperand, ProductZetaSequence,
};
pub use estimators::{
    dixmier_estimate, dyadic_schedule, geometric_times, heat_estimate, heat_trace, measurability_report,
    odd_quarter_octave_schedule, zeta_residue_estimate, zeta_schedule, MeasurabilityReport, MeasurabilityVerdict,
    Method, Smoothing, TraceEstimate, CESARO_GRID_RATIO,
};
pub use source::{AnalyticSequence, SpectralSource};
