//! Exact and effective dynamics for high-dimensional state transfer through
//! an XXZ spin-S chain.
//!
//! The chain has `N + 2` sites ordered `(sender, bus 1..N, receiver)`. Every
//! local basis is ordered by boson number `n = S - m`, so the fully polarized
//! state is the all-zeros occupation tuple. The Hamiltonian conserves the
//! total magnon number, and all exact dynamics is done block-wise over
//! fixed-magnon sectors.
//!
//! The crate is `no_std` (it needs `alloc`). IO, configuration and the
//! command line runner live in the `qst` crate.

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod channel;
pub mod effective;
pub mod error;
pub mod full_space;
pub mod propagator;
pub mod qudit;
pub mod sectors;
pub mod spin_model;
pub mod sum;
pub mod thermal;
pub mod transfer;

pub use nalgebra;
pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;

pub use channel::{average_fidelity_exact, average_fidelity_mc, average_fidelity_mc_corrected, ExactAverage, FidelityEstimate, PureStateChannel, TransferChannel};
pub use effective::{effective_spectrum, EffectiveSpectrum, OrthogonalTransform};
pub use propagator::{eigendecompose, EigenSystem};
pub use qudit::{hurwitz_state, sample_fubini_study, sample_hurwitz, state_fidelity, HurwitzAngles, QuditState, Sampler};
pub use sectors::{assemble_sector_hamiltonian, enumerate_sector, BlockState, OperatorMatrix, SectorBasis};
pub use spin_model::{build_hamiltonian_terms, field_profile, spin_operators, ChainParams, FieldProfile, Spin, SpinOperators, Term};
pub use thermal::{thermal_bus_state, ThermalBusState, ThermalChoice, ThermalConfig, ThermalRun};
pub use transfer::{run_transfer, ReceiverState, TransferRun};
