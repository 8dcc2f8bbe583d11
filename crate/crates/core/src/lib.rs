//! Retrieval-augmented LLM test-case generation and differential testing
//! for heterogeneous (SYCL) compiler toolchains.
//!
//! The crate is organised along the fuzzing flow:
//!
//! * [`extract`] pulls function/class/namespace bodies out of compiler-pass sources.
//! * [`rag`] chunks documentation, indexes embeddings and retrieves context.
//! * [`prompt`] renders the four query templates.
//! * [`provider`] wraps LLM completion and embedding backends (HTTP, mock, cassette).
//! * [`pipeline`] drives characteristics generation, code generation, repair and mutation.
//! * [`toolchain`] expands the compiler/target/opt-level/device matrix and runs jobs.
//! * [`diff`] classifies cross-cell discrepancies.
//! * [`ledger`] accounts token usage and cost.
//! * [`campaign`] ties everything together with on-disk persistence and resume.

pub mod campaign;
pub mod diff;
pub mod extract;
pub mod ledger;
pub mod pipeline;
pub mod prompt;
pub mod provider;
pub mod rag;
pub mod scan;
pub mod toolchain;
pub mod util;
