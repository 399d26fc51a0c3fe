//! Sharp witnesses, the filter they generate, and the translation from an
//! ultrafilter oracle back to a witness.

mod filter;
mod oracle;
mod pipeline;
mod witness;

pub use filter::{
    check_complete, check_filter_laws, check_measures, filter_contains, CompleteVerdict,
    DerivedFilter, LawReport, MarkerChoice, Measure,
};
pub use oracle::{
    sharp_from_ultra, CheckedOracle, FnOracle, UltraOracle, UltraWitness, ZeroResidue,
};
pub use pipeline::{check_pipeline, sample_sets, PipelineReport, DEFAULT_THRESHOLDS};
pub(crate) use witness::require_omega;
pub use witness::{
    search_sharp, search_sharp_bruteforce, verify_sharp, SharpFailure, SharpVerdict, SharpWitness,
    SharpWitnessDoc,
};
