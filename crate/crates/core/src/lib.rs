//! Dynamic quantum Fisher information (QFI) of thermal probe states under
//! unitary parameter encoding, together with its universal upper bounds.
//!
//! The pipeline runs bottom-up through the modules:
//! [`operator`] (dense Hermitian algebra) → [`spin`] → [`thermal`]
//! (Gibbs probes) → [`generator`] (transformed local generator) →
//! [`qfi`] (three independent QFI evaluations) → [`bounds`].
//! [`models`] holds closed forms for the spin examples, [`sweep`] the
//! grid runner behind the CLI and [`verify`] the acceptance checks.

pub mod bounds;
pub mod error;
pub mod generator;
pub mod models;
pub mod operator;
pub mod parallel;
pub mod qfi;
pub mod scenario;
pub mod spin;
pub mod sum;
pub mod sweep;
pub mod thermal;
pub mod verify;

pub use bounds::{bound_report, BoundReport, GapBounds};
pub use error::{QfiError, Result};
pub use generator::{EncodingScheme, GeneratorMethod, LocalGenerator};
pub use models::{Axis, LinearModel, LmgModel, OatModel};
pub use operator::{ComplexMatrix, Hermitian, Spectrum, Unitary};
pub use qfi::{qfi_general, qfi_report, qfi_sld, qfi_thermal, QfiReport};
pub use scenario::{Evaluation, Scenario};
pub use spin::{Spin, SpinOperators};
pub use thermal::{gibbs_state, GibbsState};
