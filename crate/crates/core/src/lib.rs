//! Deep-link guided GUI exploration over simulated Android-style apps.
//!
//! The pipeline has three stages:
//!
//! * static analysis: manifest deep-link extraction and binding ([`manifest`]),
//!   def-use resolution of intent contexts from sender traces and launcher
//!   construction ([`icc`]), and the activity transition graph ([`atg`]);
//! * a deterministic app simulator ([`sim`]) that stands in for a device;
//! * dynamic exploration with loop detection and ATG-guided intervention
//!   ([`explore`]), followed by crash triage ([`triage`]) and coverage
//!   metrics ([`metrics`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, XML and the
//! command line live in the `delm` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod atg;
pub mod explore;
pub mod icc;
pub mod manifest;
pub mod metrics;
pub mod sim;
pub mod triage;
pub mod value;

pub use atg::{Atg, EdgeProvenance, NextTarget};
pub use explore::{ExplorationConfig, ExplorationReport, LoopMonitor, Policy};
pub use icc::{ActivityLauncher, IntentLink, ResolvedContext, SenderTrace};
pub use manifest::{DeepLink, Manifest};
pub use sim::{AppSpec, Runtime, SimApp};
pub use value::{GlobalState, ScalarValue};
