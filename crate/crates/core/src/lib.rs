//! Information-theoretic Triple Helix indicators.
//!
//! The crate turns overlapping search counts or labeled address records over
//! the three institutional dimensions university / industry / government into
//! probabilistic indicators:
//!
//! - [`entropy`]: Shannon entropies, bilateral and trilateral transmissions,
//!   and the information of a message (observed vs predicted distributions).
//! - [`overlap`]: inclusion-exclusion between overlapping hit counts and the
//!   exclusive 2×2×2 presence/absence cube.
//! - [`classify`]: rule-based sector attribution of raw corporate addresses
//!   plus country and country-group tagging.
//! - [`aggregate`]: rolls labeled records up into per-subset count tables.
//! - [`systemness`]: tests a count series for systemness by comparing Markov
//!   against univariate-trend predictions, in millibits.

pub mod aggregate;
pub mod classify;
pub mod entropy;
pub mod overlap;
pub mod systemness;

pub use aggregate::{aggregate, address_census, international_subset, AddressCensus, AddressRecord, SubsetFilter, SubsetTable};
pub use classify::{classify_address, tag_countries, ClassifierConfig, CountryGroups, CountryTags, Gazetteer, MatchMode, RuleSet, SectorLabel};
pub use entropy::{info_of_message, marginalize, shannon_entropy, transmission2, transmission3, Axis, CellCube, Distribution, InformationValue};
pub use overlap::{decompose, recompose, transmission_from_counts, ConsistencyReport, CountVector, DecomposePolicy, NormalizationMode, PairReading};
pub use systemness::{best_start_prediction, observed_distribution, predict_markov, predict_timeseries, systemness_test, trend_fit, CategoryMode, SeriesFrame, SystemnessResult, TrendFit, Verdict};
