//! Linear regression estimation (LRE) tomography for n-qubit states measured
//! in all `3^n` local Pauli settings.
//!
//! The pipeline has three steps: a least-squares estimate of the Pauli
//! coefficient vector, assembly of the trace-one Hermitian matrix `mu`, and
//! projection of `mu` onto the nearest density matrix.
//!
//! ```
//! use lre_core::{Kernel, QubitCount, Reconstructor, StateDescriptor, StateKind, TrueState};
//!
//! let n = QubitCount::new(3).unwrap();
//! let truth = TrueState::prepare(StateDescriptor::new(StateKind::Ghz, n).unwrap()).unwrap();
//! let record = lre_core::sample_counts(&truth, 2000, 7).unwrap();
//! let out = Reconstructor::new(2, Kernel::Fast).unwrap().reconstruct(&record).unwrap();
//! assert!((out.rho.trace() - 1.0).abs() < 1e-9);
//! ```

pub mod error;
pub mod experiments;
pub mod matrix;
pub mod metrics;
pub mod pauli;
pub mod reconstruct;
pub mod record;
pub mod simulator;
pub mod state_file;

#[cfg(any(test, feature = "oracles"))]
pub mod oracle;

pub use error::{LreError, Result};
pub use experiments::{ErrorRow, LineFit, ThreadRow, TimeRow, TimingReport};
pub use matrix::{DensityMatrix, HermitianMatrix};
pub use metrics::{fidelity, hs_squared_distance, CovarianceModel, ErrorReport};
pub use pauli::{Axis, BasisIndex, OutcomeIndex, QubitCount, SettingIndex};
pub use reconstruct::{
    project_to_density, Kernel, Reconstruction, Reconstructor, SettingFrequencies, StepTimings,
    ThetaVector,
};
pub use record::MeasurementRecord;
pub use simulator::{exact_counts, sample_counts, StateDescriptor, StateKind, TrueState};
