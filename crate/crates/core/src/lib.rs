//! Control-flow drift detection for process event logs.
//!
//! Every event that brings a directly-follows relation unseen in the
//! reference window is a candidate drift point; a candidate is confirmed by
//! a battery of G-tests of independence between consecutive windows plus an
//! adjusted-standardized-residual check on the new relation. Scanning the
//! reversed stream turns removed behaviour into added behaviour, so both
//! kinds of change are located.
//!
//! ```no_run
//! use dfdrift::detector::{detect, DetectorConfig};
//! use dfdrift::event_model::parse_xes;
//!
//! let log = parse_xes(&std::fs::read("log.xes")?)?;
//! let report = detect(&log, &DetectorConfig::new(1500))?;
//! for p in &report.points {
//!     println!("{} {} {:?}", p.event_index, p.trace_id, p.direction);
//! }
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod cli;
pub mod detector;
pub mod dfr_window;
pub mod error;
pub mod event_model;
pub mod stats;
pub mod synthlab;

pub use error::{Error, Result};
