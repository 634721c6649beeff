//! Energy-efficient UAV multicasting powered and backhauled over a
//! free-space-optics (FSO) link.
//!
//! A UAV hovers above the centre of a disk of ground users (GUs) drawn from a
//! homogeneous Poisson point process. An optics base station (OBS) beams both
//! power and backhaul data to the UAV; the UAV splits the received optical
//! power between its information decoder and its energy harvester, and
//! multicasts the backhauled file over an air-to-ground RF channel. The crate
//! computes the edge-user multicast rate and maximizes the system energy
//! efficiency `EE_S = C_edge / P_F` over the OBS power, the splitting ratio,
//! the UAV altitude and the UAV transmit power.
//!
//! Module map:
//! - [`scenario`]: parameter records, defaults and the config loader.
//! - [`channel`]: LoS probability, air-to-ground gains and per-GU rates.
//! - [`quadrature`]: global adaptive Simpson integration.
//! - [`edge`]: edge-GU distribution, edge rate and its upper bound.
//! - [`fso`]: FSO gain, backhaul throughput and the two UAV constraints.
//! - [`optimizer`]: closed-form FSO design, surrogate objective, altitude search.
//! - [`oracle`]: brute-force and Monte Carlo reference computations.
//! - [`sweep`], [`report`], [`validate`]: figure sweeps, CSV output, validation suite.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod edge;
pub mod error;
pub mod fso;
pub mod optimizer;
pub mod oracle;
pub mod quadrature;
pub mod report;
pub mod scenario;
pub mod sweep;
pub mod validate;

pub use edge::{EdgeRateResult, LosMoments};
pub use error::{Error, Result};
pub use fso::{ConstraintCheck, FsoLinkState, FsoOperatingPoint};
pub use optimizer::{AltitudeSample, DesignVariables, QFactors, SolutionReport};
pub use oracle::{DropSample, GridSpec};
pub use quadrature::QuadratureSpec;
pub use scenario::{EnvironmentParams, FsoLinkParams, GeometryParams, RfLinkParams, Scenario};
pub use sweep::{SweepParameter, SweepRow, SweepTable};
