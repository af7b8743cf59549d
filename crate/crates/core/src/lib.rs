//! Detection of k-nonseparability and k-partite entanglement from
//! generalized Wigner-Yanase skew information.
//!
//! ```
//! use skewent::{prop1_evaluate, Mode, OrderParam, StateSpec};
//!
//! let state = "mix(0.8: dicke(N=6,m=3), 0.2: white(N=6,d=2))"
//!     .parse::<StateSpec>()
//!     .unwrap()
//!     .build()
//!     .unwrap();
//! let report = prop1_evaluate(&state, OrderParam::NegInfinity, Mode::Separable(2)).unwrap();
//! assert!(report.violated);
//! ```

pub mod cli;
pub mod criteria;
pub mod error;
pub mod matrix;
pub mod observables;
pub mod output;
pub mod scan;
pub mod selftest;
pub mod skew;
pub mod states;
pub mod statespec;
pub mod tables;

pub use criteria::{
    bound_gamma, bound_p, bound_s, prop1_bound, prop1_evaluate, prop1_lhs, prop2_bound, prop2_coefficient,
    prop2_evaluate, prop2_lhs, Criterion, CriterionReport, Mode, ModeKind, VIOLATION_MARGIN,
};
pub use error::{Error, Result};
pub use matrix::{eigendecompose, embed, kron, partial_trace, Operator, QuantumState, Spectrum, C64};
pub use observables::{
    slot_aligned_basis, collective_set, collective_set_h, gellmann_basis, padded_basis, CollectiveObservable,
    LocalBasis, SiteTerms, WeightedObservableSpec,
};
pub use scan::{
    region_scan, threshold_scan, threshold_scan_many, CriterionConfig, NoiseFamily, RegionGrid, ScanSettings,
    ThresholdOutcome, ThresholdResult, TwoStateFamily,
};
pub use skew::{power_mean, skew_information, variance, OrderParam, SkewKernel};
pub use statespec::StateSpec;
