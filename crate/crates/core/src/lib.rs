//! Spike gating flow: online few-shot gesture recognition over event-camera
//! spike streams.
//!
//! Events are binned into spike-count frames, denoised by a spatiotemporal
//! core, and summarized by banks of spatial and temporal spiking detectors
//! into feature bit vectors. Hierarchically arranged units learn those
//! vectors with a single-pass histogram rule and classify by weighted bitwise
//! similarity.

pub mod aer;
pub mod config;
pub mod costmodel;
pub mod error;
pub mod events;
pub mod grid;
pub mod pipeline;
pub mod sgf;
pub mod snn_spatial;
pub mod snn_temporal;
pub mod stcore;

pub use error::{Result, SgfError};
