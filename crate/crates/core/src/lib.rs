//! Numerical model of a lossy two-mode interferometer driven by soliton
//! Josephson junction (SJJ) probe states.
//!
//! The crate is organised bottom-up:
//!
//! - [`fock`]: log-space combinatorics, the beam-splitter loss kernel and
//!   compensated summation.
//! - [`tridiag`]: a symmetric tridiagonal eigensolver (Sturm bisection plus
//!   inverse iteration).
//! - [`sjj`]: the SJJ Hamiltonian, its ground state and the canonical probe
//!   states (N00N, binomial).
//! - [`loss`]: decomposition of a phase-encoded probe into loss branches and
//!   fixed-particle-number density-matrix sectors.
//! - [`qfi`]: quantum Fisher information for pure states, the exact mixed-state
//!   value and the convexity upper bound.
//! - [`limits`]: closed-form precision limits and thresholds.
//! - [`optimize`]: search for the probe maximising the QFI bound.
//!
//! Fock basis convention: index `n` is the occupation of mode `b`, mode `a`
//! holds `N - n`. The phase imprinted on `|N-n>|n>` is `exp(i n^k phi)`.

pub mod error;
pub mod fock;
pub mod limits;
pub mod loss;
pub mod optimize;
pub mod qfi;
pub mod sjj;
pub mod tridiag;

pub use error::{Error, Result};
pub use fock::{log_binomial, loss_weight, CompensatedSum, LogWeight, LossChannel, LossKernel};
pub use loss::{assemble_sectors, decompose, noon_loss_distribution, Branch, BranchDecomposition, LossForm, SectorDensityMatrix};
pub use optimize::{optimize_probe, Objective, OptimizationResult, OptimizerConfig};
pub use qfi::{pure_qfi, qfi_exact, qfi_upper_bound, Method, QfiEstimate};
pub use sjj::{binomial_state, build_hamiltonian, ground_state, noon_state, SjjParams, TridiagonalHamiltonian, TwoModeState};
