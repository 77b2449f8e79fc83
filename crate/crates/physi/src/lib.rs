//! Joint multicast and confidential transmission over a two-receiver MIMO
//! downlink.
//!
//! A generalized singular value decomposition of the two channel matrices
//! turns the vector channel into parallel scalar subchannels, each seen by
//! one or both receivers ([`gsvd`]). Subchannels are then classified by
//! visibility, candidate message-to-subchannel assignments are enumerated
//! with unprofitable ones pruned ([`allocation`]), and per-subchannel powers
//! are optimized by a surrogate-based interior-point iteration ([`solver`]).
//! [`region`] traces the achievable (multicast, confidential) rate pairs and
//! provides a time-sharing baseline plus a brute-force covariance reference
//! for cross-checking, and [`rates`] evaluates every rate both on the
//! subchannel and on the covariance form so the two routes can be compared.
//!
//! The crate is deterministic end to end: channels come from a seeded
//! generator, no solver step depends on iteration order of parallel work,
//! and text serialization round-trips `f64` values exactly.

/// Crate version, re-exported so downstream tools can record it in artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod allocation;
pub mod channel;
pub mod error;
pub mod gsvd;
pub mod rates;
pub mod region;
pub mod solver;

pub use allocation::{enumerate_schemes, remove_scheme, MessageAllocation, SchemeSet};
pub use channel::{
    channels_from_text, channels_to_text, generate_channels, read_channels, write_channels,
    CMatrix, ChannelPair,
};
pub use error::{Error, Result};
pub use gsvd::{
    check_feasibility, classify_subchannels, expected_partition_counts, gsvd, matching_classes,
    secrecy_capable, FeasibilityReport, GsvdFactors, SubchannelPartition, SystemClass,
    DEFAULT_CLASSIFY_TOL,
};
pub use rates::{
    covariance_rates, gsvd_covariances, multicast_rates, secrecy_rate, total_power,
    CovarianceRates,
};
pub use region::{
    factor_and_enumerate, grid_reference_region, sweep_region, tdma_baseline, DictionaryScope,
    RateRegion, RegionLabel, RegionPoint,
};
pub use solver::{
    dc_solve, grid_oracle, max_min_multicast, solve_subproblem, surrogate_objective, DcConfig,
    PowerSolution, SolveOutcome, SubproblemInstance, SubproblemOutcome, SubproblemSolution,
};
