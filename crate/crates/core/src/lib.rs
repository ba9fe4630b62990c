//! Downlink coverage analysis for 3D terahertz networks.
//!
//! The crate has two halves that check each other:
//!
//! * an analytical chain ([`channel`], [`antenna`], [`blockage`], [`coverage`])
//!   that evaluates coverage probability in closed form using dominant
//!   interferer analysis, and
//! * a Monte Carlo simulator ([`sim`]) that samples full 3D deployments,
//!   applies every interference condition geometrically and computes the
//!   aggregate-interference SINR.
//!
//! [`config`] and [`experiment`] drive parameter sweeps and write CSV;
//! [`validation`] bundles the cross-checks between the two halves.

pub mod antenna;
pub mod blockage;
pub mod channel;
pub mod config;
pub mod coverage;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod lambert;
pub mod quadrature;
pub mod rng;
pub mod sim;
pub mod validation;

pub use antenna::{gain_from_beamwidths, square_beamwidth_from_gain, AntennaPattern};
pub use blockage::{blockage_zone_length, is_link_blocked, los_probability, BlockageConstants, Blocker};
pub use channel::{LinkGeometry, SystemParams, SPEED_OF_LIGHT};
pub use coverage::{CoverageModel, CoverageResult, DominantRadius, VerticalWindow};
pub use error::{Error, Result};
pub use geometry::Point2;
pub use lambert::lambert_w0;
pub use sim::{BlockageCoupling, Estimate, Mode, Scenario, Simulator, TrialOutcome};

/// Converts decibels to a linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) / 1000.0
}
