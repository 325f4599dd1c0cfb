//! Replica behavior profiling and statistical cross-verification.
//!
//! In a replicated compute cluster every datanode that executes the same
//! task over the same data should look statistically alike: it should make
//! the same set of system and library calls with comparable frequencies,
//! and its memory accesses should follow the same distribution. This crate
//! builds a per-process behavior profile from call traces and periodic
//! memory snapshots, exchanges those profiles among simulated replicas,
//! and verifies them pairwise: call tables by keyed lookup with a relative
//! count threshold, memory signatures by ANOVA over Hotelling T² vectors
//! with a Tukey HSD follow-up to localize the divergent node. A majority
//! vote over per-node verdicts decides whether the namenode is alerted.
//!
//! The crate is organized along the pipeline:
//!
//! * [`stats`] — PCA, T², F distribution, F-test, ANOVA, Tukey HSD.
//! * [`profile`] — the behavior profile model and its wire format.
//! * [`builder`] — trace ingestion and profile construction.
//! * [`verify`] — pairwise profile verification.
//! * [`attack`] — synthetic workload and insider-attack generators.
//! * [`sim`] — the deterministic cluster simulation driving it all.

pub mod attack;
pub mod builder;
pub mod error;
pub mod profile;
pub mod sim;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use profile::{BehaviorProfile, CallKey, CallRecord, MemorySample};
pub use stats::{AnovaResult, FTestResult, TSquaredVector, TukeyResult};
