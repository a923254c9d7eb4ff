//! Rolls labeled address records up into per-subset count tables.
//!
//! A record belongs to a subset when any of its addresses carries the subset
//! tag; the set of distinct sectors among all its addresses then determines
//! which cells it counts in, each record at most once per cell. Aggregation
//! is a commutative fold over the record stream, so partitions can be
//! processed independently and their tables merged.

use crate::classify::{ClassifierConfig, ClassifyError, CountryTags, SectorLabel};
use crate::overlap::CountVector;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AggregateError {
    #[error("record {record_id}: {field} has {got} entries for {addresses} addresses")]
    Misaligned {
        record_id: String,
        field: &'static str,
        got: usize,
        addresses: usize,
    },
    #[error("record {record_id} has no addresses")]
    NoAddresses { record_id: String },
    #[error("unknown subset name {0:?}: not a country, country group, \"all\" or \"international\"")]
    UnknownSubset(String),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

/// One publication or patent record with its addresses and the per-address
/// sector labels and country tags derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct AddressRecord {
    pub record_id: String,
    pub addresses: Vec<String>,
    pub sector_labels: Vec<SectorLabel>,
    pub country_tags: Vec<CountryTags>,
}

impl AddressRecord {
    /// Wraps pre-derived labels, enforcing 1:1 alignment with the addresses.
    pub fn new(
        record_id: String,
        addresses: Vec<String>,
        sector_labels: Vec<SectorLabel>,
        country_tags: Vec<CountryTags>,
    ) -> Result<Self, AggregateError> {
        if addresses.is_empty() {
            return Err(AggregateError::NoAddresses { record_id });
        }
        if sector_labels.len() != addresses.len() {
            return Err(AggregateError::Misaligned {
                record_id,
                field: "sector_labels",
                got: sector_labels.len(),
                addresses: addresses.len(),
            });
        }
        if country_tags.len() != addresses.len() {
            return Err(AggregateError::Misaligned {
                record_id,
                field: "country_tags",
                got: country_tags.len(),
                addresses: addresses.len(),
            });
        }
        Ok(AddressRecord { record_id, addresses, sector_labels, country_tags })
    }

    /// Classifies and tags every address of a raw record.
    pub fn label(
        record_id: String,
        addresses: Vec<String>,
        config: &ClassifierConfig,
    ) -> Result<Self, AggregateError> {
        if addresses.is_empty() {
            return Err(AggregateError::NoAddresses { record_id });
        }
        let mut sector_labels = Vec::with_capacity(addresses.len());
        let mut country_tags = Vec::with_capacity(addresses.len());
        for address in &addresses {
            sector_labels.push(crate::classify::classify_address(address, &config.rules)?);
            country_tags.push(crate::classify::tag_countries(address, &config.groups, &config.gazetteer)?);
        }
        Ok(AddressRecord { record_id, addresses, sector_labels, country_tags })
    }

    /// Distinct classifiable sectors among the record's addresses.
    pub fn sector_set(&self) -> BTreeSet<SectorLabel> {
        self.sector_labels
            .iter()
            .copied()
            .filter(|&l| l != SectorLabel::Unclassified)
            .collect()
    }

    /// Distinct known countries among the record's addresses.
    pub fn country_set(&self) -> BTreeSet<&str> {
        self.country_tags
            .iter()
            .filter_map(|t| t.country.as_deref())
            .collect()
    }

    /// At least one address got a sector label.
    pub fn is_identified(&self) -> bool {
        self.sector_labels.iter().any(|&l| l != SectorLabel::Unclassified)
    }

    /// Addresses span at least two distinct known countries. Untagged
    /// addresses never satisfy the test on their own.
    pub fn is_international(&self) -> bool {
        self.country_set().len() >= 2
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.country_tags.iter().any(|t| t.matches(tag))
    }
}

/// Which records a subset keeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubsetFilter {
    /// Every record.
    All,
    /// Records whose addresses span at least two distinct countries.
    International,
    /// Records with at least one address carrying this country or group tag.
    Tag(String),
}

impl SubsetFilter {
    pub fn name(&self) -> &str {
        match self {
            SubsetFilter::All => "All",
            SubsetFilter::International => "internationally coauthored",
            SubsetFilter::Tag(tag) => tag,
        }
    }

    fn keeps(&self, record: &AddressRecord) -> bool {
        match self {
            SubsetFilter::All => true,
            SubsetFilter::International => record.is_international(),
            SubsetFilter::Tag(tag) => record.has_tag(tag),
        }
    }
}

/// Resolves user-supplied subset names against the configuration.
///
/// Accepts `all`, `international` (or `internationally coauthored`), any
/// gazetteer country name or alias, and the group names; anything else is a
/// configuration error.
pub fn resolve_subsets(names: &[String], config: &ClassifierConfig) -> Result<Vec<SubsetFilter>, AggregateError> {
    names
        .iter()
        .map(|name| {
            let trimmed = name.trim();
            if trimmed.eq_ignore_ascii_case("all") {
                return Ok(SubsetFilter::All);
            }
            if trimmed.eq_ignore_ascii_case("international")
                || trimmed.eq_ignore_ascii_case("internationally coauthored")
            {
                return Ok(SubsetFilter::International);
            }
            if let Some(canonical) = config.gazetteer.resolve(trimmed) {
                return Ok(SubsetFilter::Tag(canonical.to_string()));
            }
            if config.groups.is_group(trimmed) {
                for group in [crate::classify::GROUP_UK, crate::classify::GROUP_EU, crate::classify::GROUP_SCANDINAVIA] {
                    if group.eq_ignore_ascii_case(trimmed) {
                        return Ok(SubsetFilter::Tag(group.to_string()));
                    }
                }
            }
            Err(AggregateError::UnknownSubset(trimmed.to_string()))
        })
        .collect()
}

/// Per-subset record counts in the shape of the published country tables.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetTable {
    pub name: String,
    /// All records in the subset, identified or not.
    pub records_in_subset: u64,
    /// Records with at least one classified address.
    pub identified_records: u64,
    /// Record counts per sector combination; singles include records
    /// coauthored with the other sectors. No grand total is attached: the
    /// table normalizes over identified records.
    pub counts: CountVector,
}

impl SubsetTable {
    /// Share of subset records with at least one classified address, in
    /// percent; 0 for an empty subset.
    pub fn pct_identified(&self) -> f64 {
        if self.records_in_subset == 0 {
            0.0
        } else {
            100.0 * self.identified_records as f64 / self.records_in_subset as f64
        }
    }
}

#[derive(Debug, Default, Clone)]
struct SubsetAccumulator {
    records: u64,
    identified: u64,
    u: u64,
    i: u64,
    g: u64,
    ui: u64,
    ug: u64,
    ig: u64,
    uig: u64,
}

impl SubsetAccumulator {
    fn add(&mut self, sectors: &BTreeSet<SectorLabel>) {
        self.records += 1;
        if sectors.is_empty() {
            return;
        }
        self.identified += 1;
        let u = sectors.contains(&SectorLabel::University);
        let i = sectors.contains(&SectorLabel::Industry);
        let g = sectors.contains(&SectorLabel::Government);
        self.u += u as u64;
        self.i += i as u64;
        self.g += g as u64;
        self.ui += (u && i) as u64;
        self.ug += (u && g) as u64;
        self.ig += (i && g) as u64;
        self.uig += (u && i && g) as u64;
    }

    /// Cell-wise sum; partial accumulators from disjoint record partitions
    /// merge losslessly because every record contributes at most once per
    /// cell.
    #[allow(dead_code)]
    fn merge(&mut self, other: &SubsetAccumulator) {
        self.records += other.records;
        self.identified += other.identified;
        self.u += other.u;
        self.i += other.i;
        self.g += other.g;
        self.ui += other.ui;
        self.ug += other.ug;
        self.ig += other.ig;
        self.uig += other.uig;
    }

    fn into_table(self, name: String) -> SubsetTable {
        SubsetTable {
            name,
            records_in_subset: self.records,
            identified_records: self.identified,
            counts: CountVector::new(
                self.u as f64,
                self.i as f64,
                self.g as f64,
                self.ui as f64,
                self.ug as f64,
                self.ig as f64,
                self.uig as f64,
                None,
            ),
        }
    }
}

/// Rolls a record stream up into one table per subset, in a single pass.
pub fn aggregate(
    records: impl IntoIterator<Item = AddressRecord>,
    subsets: &[SubsetFilter],
) -> Vec<SubsetTable> {
    let mut accs: Vec<SubsetAccumulator> = vec![SubsetAccumulator::default(); subsets.len()];
    for record in records {
        let sectors = record.sector_set();
        for (filter, acc) in subsets.iter().zip(&mut accs) {
            if filter.keeps(&record) {
                acc.add(&sectors);
            }
        }
    }
    subsets
        .iter()
        .zip(accs)
        .map(|(filter, acc)| acc.into_table(filter.name().to_string()))
        .collect()
}

/// Address-level counts per sector, in the shape of the published
/// attribution table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AddressCensus {
    pub university: u64,
    pub industry: u64,
    pub government: u64,
    pub unclassified: u64,
    /// Addresses whose country could be resolved (coverage statistic).
    pub with_country: u64,
}

impl AddressCensus {
    pub fn total(&self) -> u64 {
        self.university + self.industry + self.government + self.unclassified
    }

    pub fn count(&self, sector: SectorLabel) -> u64 {
        match sector {
            SectorLabel::University => self.university,
            SectorLabel::Industry => self.industry,
            SectorLabel::Government => self.government,
            SectorLabel::Unclassified => self.unclassified,
        }
    }

    /// Percentage of all addresses carrying this label; 0 for an empty
    /// census.
    pub fn pct(&self, sector: SectorLabel) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            100.0 * self.count(sector) as f64 / total as f64
        }
    }
}

/// Counts addresses (not records) per sector label.
pub fn address_census(records: impl IntoIterator<Item = AddressRecord>) -> AddressCensus {
    let mut census = AddressCensus::default();
    for record in records {
        for label in &record.sector_labels {
            match label {
                SectorLabel::University => census.university += 1,
                SectorLabel::Industry => census.industry += 1,
                SectorLabel::Government => census.government += 1,
                SectorLabel::Unclassified => census.unclassified += 1,
            }
        }
        census.with_country += record.country_tags.iter().filter(|t| t.country.is_some()).count() as u64;
    }
    census
}

/// Keeps records whose addresses span at least two distinct countries.
pub fn international_subset(
    records: impl IntoIterator<Item = AddressRecord>,
) -> impl Iterator<Item = AddressRecord> {
    records.into_iter().filter(AddressRecord::is_international)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::overlap::{decompose, DecomposePolicy};

    fn config() -> ClassifierConfig {
        ClassifierConfig::default()
    }

    fn record(id: &str, addresses: &[&str]) -> AddressRecord {
        AddressRecord::label(
            id.to_string(),
            addresses.iter().map(|s| s.to_string()).collect(),
            &config(),
        )
        .unwrap()
    }

    #[test]
    fn aggregate_three_record_fixture() {
        let records = vec![
            record("r1", ["UNIV GENT, BELGIUM", "ACME CORP, BELGIUM"].as_slice()),
            record("r2", ["UNIV AMSTERDAM, NETHERLANDS"].as_slice()),
            record("r3", ["NATL RES CTR, FRANCE"].as_slice()),
        ];
        let tables = aggregate(records, &[SubsetFilter::All]);
        let t = &tables[0];
        assert_eq!(t.records_in_subset, 3);
        assert_eq!(t.identified_records, 3);
        assert_eq!(
            (t.counts.u, t.counts.i, t.counts.g, t.counts.ui, t.counts.ug, t.counts.ig, t.counts.uig),
            (2.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn duplicate_sector_addresses_count_once() {
        let records = vec![record("r1", ["UNIV GENT, BELGIUM", "UNIV LIEGE, BELGIUM"].as_slice())];
        let tables = aggregate(records, &[SubsetFilter::All]);
        let t = &tables[0];
        assert_eq!(t.counts.u, 1.0);
        assert_eq!(t.counts.i + t.counts.g + t.counts.ui + t.counts.ug + t.counts.ig + t.counts.uig, 0.0);
    }

    #[test]
    fn empty_stream_yields_zero_table() {
        let tables = aggregate(Vec::<AddressRecord>::new(), &[SubsetFilter::All]);
        let t = &tables[0];
        assert_eq!(t.records_in_subset, 0);
        assert_eq!(t.pct_identified(), 0.0);
        assert_eq!(t.counts, CountVector::default());
    }

    #[test]
    fn unidentified_records_stay_in_subset_but_not_in_cells() {
        let records = vec![
            record("r1", ["UNIV GENT, BELGIUM"].as_slice()),
            record("r2", ["SOME PLACE, NOWHERE"].as_slice()),
        ];
        let tables = aggregate(records, &[SubsetFilter::All]);
        let t = &tables[0];
        assert_eq!(t.records_in_subset, 2);
        assert_eq!(t.identified_records, 1);
        assert_eq!(t.pct_identified(), 50.0);
        assert_eq!(t.counts.u, 1.0);
    }

    #[test]
    fn subset_membership_by_any_address_with_full_sector_set() {
        // a Dutch-university + Japanese-industry record counts as ui in the
        // Netherlands subset: sectors come from all addresses
        let records = vec![record(
            "r1",
            ["UNIV AMSTERDAM, NETHERLANDS", "HITACHI LTD, TOKYO, JAPAN"].as_slice(),
        )];
        let tables = aggregate(records, &[SubsetFilter::Tag("Netherlands".into()), SubsetFilter::Tag("Japan".into()), SubsetFilter::Tag("Germany".into())]);
        assert_eq!(tables[0].counts.ui, 1.0);
        assert_eq!(tables[1].counts.ui, 1.0);
        assert_eq!(tables[2].records_in_subset, 0);
    }

    #[test]
    fn aggregated_counts_always_decompose_strictly() {
        let records = vec![
            record("r1", ["UNIV GENT, BELGIUM", "ACME CORP, BELGIUM", "NATL INST, FRANCE"].as_slice()),
            record("r2", ["UNIV GENT, BELGIUM", "NATL INST, FRANCE"].as_slice()),
            record("r3", ["ACME CORP, BELGIUM"].as_slice()),
            record("r4", ["NATL INST, FRANCE", "SHELL CORP, NETHERLANDS"].as_slice()),
        ];
        let tables = aggregate(records, &[SubsetFilter::All, SubsetFilter::Tag("EU".into())]);
        for t in &tables {
            let (_, report) = decompose(&t.counts, DecomposePolicy::Strict).unwrap();
            assert!(report.is_consistent(), "{}", t.name);
        }
    }

    #[test]
    fn census_counts_addresses_not_records() {
        let records = vec![
            record("r1", ["UNIV GENT, BELGIUM", "UNIV LIEGE, BELGIUM", "ACME CORP, BELGIUM"].as_slice()),
            record("r2", ["SOME PLACE, NOWHERE"].as_slice()),
        ];
        let census = address_census(records);
        assert_eq!(census.university, 2);
        assert_eq!(census.industry, 1);
        assert_eq!(census.government, 0);
        assert_eq!(census.unclassified, 1);
        assert_eq!(census.total(), 4);
        assert_eq!(census.with_country, 3);
        let sum: u64 = SectorLabel::CLASSIFIABLE.iter().map(|&s| census.count(s)).sum();
        assert_eq!(sum + census.unclassified, census.total());
    }

    #[test]
    fn census_all_unclassified() {
        let records = vec![record("r1", ["SOME PLACE, NOWHERE"].as_slice())];
        let census = address_census(records);
        assert_eq!(census.pct(SectorLabel::Unclassified), 100.0);
    }

    #[test]
    fn published_attribution_percentage() {
        let census = AddressCensus {
            university: 878_427,
            industry: 46_952,
            government: 314_469,
            unclassified: 192_553,
            with_country: 0,
        };
        assert_eq!(census.total(), 1_432_401);
        assert!((census.pct(SectorLabel::University) - 61.3).abs() <= 0.05);
    }

    #[test]
    fn international_subset_needs_two_known_countries() {
        let kept = record("r1", ["UNIV AMSTERDAM, NETHERLANDS", "HITACHI LTD, TOKYO, JAPAN"].as_slice());
        let same_country = record("r2", ["UNIV AMSTERDAM, NETHERLANDS", "UNIV DELFT, NETHERLANDS"].as_slice());
        let one_unknown = record("r3", ["UNIV AMSTERDAM, NETHERLANDS", "LOST INST, ATLANTIS"].as_slice());
        let out: Vec<_> = international_subset(vec![kept.clone(), same_country, one_unknown]).collect();
        assert_eq!(out, vec![kept]);
    }

    #[test]
    fn resolve_subsets_accepts_known_names_and_rejects_others() {
        let cfg = config();
        let names: Vec<String> = ["all", "USA", "eu", "international"].iter().map(|s| s.to_string()).collect();
        let filters = resolve_subsets(&names, &cfg).unwrap();
        assert_eq!(
            filters,
            vec![
                SubsetFilter::All,
                SubsetFilter::Tag("USA".into()),
                SubsetFilter::Tag("EU".into()),
                SubsetFilter::International,
            ]
        );
        let err = resolve_subsets(&["Narnia".to_string()], &cfg).unwrap_err();
        assert!(matches!(err, AggregateError::UnknownSubset(n) if n == "Narnia"));
    }

    #[test]
    fn aggregation_is_order_independent() {
        let mut records = vec![
            record("r1", ["UNIV GENT, BELGIUM", "ACME CORP, BELGIUM"].as_slice()),
            record("r2", ["NATL INST, FRANCE"].as_slice()),
            record("r3", ["UNIV AMSTERDAM, NETHERLANDS"].as_slice()),
            record("r4", ["SOME PLACE, NOWHERE"].as_slice()),
        ];
        let subsets = [SubsetFilter::All, SubsetFilter::Tag("EU".into())];
        let forward = aggregate(records.clone(), &subsets);
        records.reverse();
        let backward = aggregate(records, &subsets);
        assert_eq!(forward, backward);
    }

    #[test]
    fn misaligned_labels_are_rejected() {
        let err = AddressRecord::new(
            "r1".into(),
            vec!["UNIV GENT, BELGIUM".into()],
            vec![],
            vec![CountryTags::default()],
        )
        .unwrap_err();
        assert!(matches!(err, AggregateError::Misaligned { field: "sector_labels", .. }));
    }
}
