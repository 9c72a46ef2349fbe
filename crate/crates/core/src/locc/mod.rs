//! Convertibility under SSR-constrained LOCC, explicit protocols, measurement
//! updates, and data hiding.

mod hiding;
mod majorize;
mod measure;
mod protocol;

pub use hiding::{data_hiding_distance, distinguishing_gap, ObservableClass};
pub use majorize::{
    convertibility_report, convertibility_report_with, is_majorized_by, is_majorized_by_with, partial_sum_slack,
    ssr_convertible, ConversionTarget, ConvertibilityReport, SectorVerdict,
};
pub use measure::{apply_povm_outcome, siv_monotone_check, MonotoneCheck};
pub use protocol::{build_protocol, build_protocol_with, doubly_stochastic_decomposition, BranchCheck, ConversionProtocol, OutcomeAction};
