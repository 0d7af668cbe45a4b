//! Simulation and verification library for the quantum Rabi model engineered
//! with a single resonant laser acting on a trapped ion.
//!
//! The crate is organised bottom-up:
//!
//! * [`operators`]: ladder, number, Pauli and displacement operators on a
//!   truncated spin ⊗ oscillator space;
//! * [`model`]: every Hamiltonian and unitary transformation of the scheme,
//!   built from an [`IonParams`] record;
//! * [`propagator`]: exact time evolution by eigendecomposition;
//! * [`analysis`]: executable experiments that check the transformation
//!   identities and approximation scalings;
//! * [`checks`]: the acceptance suite assembled from those experiments.

pub mod analysis;
pub mod checks;
pub mod error;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod propagator;

pub use analysis::{AnalysisThresholds, VerificationReport};
pub use error::{Error, Result};
pub use model::{DerivedCouplings, HamiltonianKind, IonParams, RegimeLabel, RegimeThresholds};
pub use num_complex::Complex64 as C64;
pub use operators::{ComplexMatrix, SigmaYConvention, SpinIndex, TruncationSpec};
pub use propagator::{EvolutionRecord, EvolutionResult, QuantumState, Spin};
