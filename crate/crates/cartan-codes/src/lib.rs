//! Channel-adapted quantum error correction for one logical qubit.
//!
//! The crate searches for two-dimensional code subspaces that minimize the
//! worst-case fidelity loss under a fixed independent per-qubit noise
//! channel, with the near-optimal Petz recovery applied after the noise.
//! Encodings are parameterized through recursive Cartan decompositions of
//! the unitary group, which exposes a small set of angles (and optionally
//! only their nonlocal subset) to a derivative-free optimizer.
//!
//! Modules:
//! - [`numerics`]: dense complex matrices, a Hermitian eigensolver, Pauli
//!   strings.
//! - [`channels`]: Kraus-form channels and the built-in noise families.
//! - [`qec`]: codes, Petz recovery, and the worst-case fidelity loss (both
//!   the closed-form eigenvalue route and an independent grid check).
//! - [`cartan`]: the recursive Cartan parameterization of encoding
//!   unitaries.
//! - [`optim`]: a Nelder-Mead simplex minimizer.
//! - [`search`]: multi-restart code search and parameter sweeps.
//! - [`circuits`]: gate synthesis for structured encoders and a plain-text
//!   circuit format.
//! - [`cli`]: the command-line front end (also exercised by the `cartan-codes`
//!   binary).

pub mod cartan;
pub mod channels;
pub mod circuits;
pub mod cli;
pub mod error;
pub mod numerics;
pub mod optim;
pub mod qec;
pub mod search;

pub use error::{Error, Result};
