//! Underwater acoustic link and sea-surface detection simulator.
//!
//! * [`acoustic`] / [`link_budget`] / [`relay`]: attenuation and noise
//!   models, per-hop budgets and linear relay chains.
//! * [`medium`]: medium feasibility rules for heterogeneous marine networks.
//! * [`sparse`] / [`dfe`]: sparse channel estimation by orthogonal matching
//!   pursuit and an adaptive decision feedback equalizer it can initialize.
//! * [`clutter`]: compound-Gaussian sea clutter, relative-average-amplitude
//!   detection and ROC evaluation.
//! * [`config`] / [`cli`]: TOML scenarios and CSV experiment outputs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acoustic;
pub mod cli;
pub mod clutter;
pub mod config;
pub mod dfe;
pub mod error;
pub mod link_budget;
pub mod medium;
pub mod relay;
pub mod seed;
pub mod sparse;

pub use error::{Error, Result};
