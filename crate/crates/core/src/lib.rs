//! Offline analysis of 802.11 active scanning.
//!
//! The pipeline reads sniffer captures ([`capture`]), cuts each client's
//! probe requests into scanning episodes ([`segmentation`]), labels every
//! episode with the event that most likely triggered it ([`causes`]) and
//! measures what probe traffic costs the network ([`metrics`]). The
//! [`policy`] and [`simulator`] modules compare a scan strategy that reserves
//! active scans for connection establishment against a periodic baseline.

pub mod analysis;
pub mod capture;
pub mod causes;
pub mod frame;
pub mod metrics;
pub mod par;
pub mod policy;
pub mod segmentation;
pub mod simulator;

pub use frame::{Frame, FrameKind, MacAddr, PhyRate, QbssLoad, Subtype, Timestamp};
