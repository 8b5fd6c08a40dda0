//! Numerical verification of the all-versus-nothing argument against local
//! realism built on entanglement swapping.
//!
//! * [`state`]: dense pure states, Pauli strings and projective sampling.
//! * [`bell`]: Bell bases, the `ε = ±1` states and their eigenrelations.
//! * [`lhv`]: exhaustive enumeration of local hidden-variable valuations.
//! * [`predictions`]: the four-term Bell operator, white noise and a seeded
//!   event-ready Monte Carlo.
//! * [`optics`]: two-photon linear optics for the coincidence selector.
//! * [`report`]: canonical JSON output.

pub mod bell;
pub mod error;
pub mod lhv;
pub mod optics;
pub mod predictions;
pub mod report;
pub mod state;

pub use bell::{
    bell_decompose, bell_state, epsilon_state, source_state, verify_eigenrelation, BellBasis,
    BellFamily, BellLabel, EpsilonSign, Sign, PARTICLES,
};
pub use error::{Error, Result};
pub use lhv::{
    avn_certificate, chsh_value, enumerate, lhv_bound_m, Assignment, Constraint, Correlators, Ler,
};
pub use predictions::{
    estimate_m, expectation_m, sample_events, spectral_check_m, visibility_threshold, Ensemble,
    PostSelection, RunConfig, TrialRecord,
};
pub use state::{
    measure_joint, Axis, DenseOperator, JointMeasurement, Observable, Pol, StateVector, C64,
};
