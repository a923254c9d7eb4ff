//! Rule-based attribution of corporate-address strings to University /
//! Industry / Government sectors, plus country and country-group tagging.
//!
//! Attribution is by identifier tokens with strict precedence: sectors are
//! tried in order and the first sector whose token matches wins, so
//! `UNIV HOSP GENT` is a university, not a government hospital. Matching is
//! token-boundary by default because substring matching would mislabel
//! massively (`US` inside `USA`, `SA` inside `MASSACHUSETTS`); prefix and
//! substring modes are available per ruleset. A token ending in `*` is a
//! prefix pattern in every mode.

use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("address string is empty")]
    EmptyAddress,
    #[error("token list for sector {0} is empty")]
    EmptyTokenList(SectorLabel),
    #[error("token {token:?} appears in more than one sector list")]
    DuplicateToken { token: String },
    #[error("precedence must list university, industry and government exactly once each; got {0:?}")]
    BadPrecedence(Vec<SectorLabel>),
    #[error("unknown sector name {0:?}")]
    UnknownSector(String),
    #[error("unknown match mode {0:?} (expected token, prefix or substring)")]
    UnknownMatchMode(String),
    #[error("country {name:?} listed more than once in the gazetteer (as name or alias)")]
    DuplicateCountry { name: String },
    #[error("group {group} member {country:?} is not in the gazetteer")]
    UnknownGroupMember { group: &'static str, country: String },
    #[error("UK member {0:?} is missing from the EU group (uk must be a subset of eu)")]
    UkNotSubsetOfEu(String),
    #[error("cannot read ruleset file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse ruleset file: {0}")]
    Parse(#[from] toml::de::Error),
}

/// Sector attribution of one address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SectorLabel {
    University,
    Industry,
    Government,
    Unclassified,
}

impl SectorLabel {
    pub const CLASSIFIABLE: [SectorLabel; 3] =
        [SectorLabel::University, SectorLabel::Industry, SectorLabel::Government];

    pub fn name(self) -> &'static str {
        match self {
            SectorLabel::University => "University",
            SectorLabel::Industry => "Industry",
            SectorLabel::Government => "Government",
            SectorLabel::Unclassified => "Unclassified",
        }
    }

    fn from_config_name(name: &str) -> Result<Self, ClassifyError> {
        match name.to_ascii_lowercase().as_str() {
            "university" => Ok(SectorLabel::University),
            "industry" => Ok(SectorLabel::Industry),
            "government" => Ok(SectorLabel::Government),
            other => Err(ClassifyError::UnknownSector(other.to_string())),
        }
    }
}

impl std::fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How bare identifier tokens are matched against address tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchMode {
    /// Rule token equals a whole address token.
    #[default]
    Token,
    /// Rule token is a prefix of an address token.
    Prefix,
    /// Rule token occurs anywhere in the raw uppercased address.
    Substring,
}

impl MatchMode {
    fn from_config_name(name: &str) -> Result<Self, ClassifyError> {
        match name.to_ascii_lowercase().as_str() {
            "token" => Ok(MatchMode::Token),
            "prefix" => Ok(MatchMode::Prefix),
            "substring" => Ok(MatchMode::Substring),
            other => Err(ClassifyError::UnknownMatchMode(other.to_string())),
        }
    }
}

/// Ordered identifier-token lists per sector with a precedence order.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    university_tokens: Vec<String>,
    industry_tokens: Vec<String>,
    government_tokens: Vec<String>,
    precedence: Vec<SectorLabel>,
    match_mode: MatchMode,
}

impl RuleSet {
    pub fn new(
        university_tokens: Vec<String>,
        industry_tokens: Vec<String>,
        government_tokens: Vec<String>,
        precedence: Vec<SectorLabel>,
        match_mode: MatchMode,
    ) -> Result<Self, ClassifyError> {
        let upper = |v: Vec<String>| v.into_iter().map(|t| t.to_uppercase()).collect::<Vec<_>>();
        let rules = RuleSet {
            university_tokens: upper(university_tokens),
            industry_tokens: upper(industry_tokens),
            government_tokens: upper(government_tokens),
            precedence,
            match_mode,
        };
        rules.validate()?;
        Ok(rules)
    }

    fn validate(&self) -> Result<(), ClassifyError> {
        for sector in SectorLabel::CLASSIFIABLE {
            if self.tokens_for(sector).is_empty() {
                return Err(ClassifyError::EmptyTokenList(sector));
            }
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for sector in SectorLabel::CLASSIFIABLE {
            for token in self.tokens_for(sector) {
                if !seen.insert(token) {
                    return Err(ClassifyError::DuplicateToken { token: token.clone() });
                }
            }
        }
        let mut sorted = self.precedence.clone();
        sorted.sort();
        sorted.dedup();
        if self.precedence.len() != 3 || sorted != SectorLabel::CLASSIFIABLE.to_vec() {
            return Err(ClassifyError::BadPrecedence(self.precedence.clone()));
        }
        Ok(())
    }

    pub fn tokens_for(&self, sector: SectorLabel) -> &[String] {
        match sector {
            SectorLabel::University => &self.university_tokens,
            SectorLabel::Industry => &self.industry_tokens,
            SectorLabel::Government => &self.government_tokens,
            SectorLabel::Unclassified => &[],
        }
    }

    pub fn precedence(&self) -> &[SectorLabel] {
        &self.precedence
    }

    pub fn match_mode(&self) -> MatchMode {
        self.match_mode
    }
}

impl Default for RuleSet {
    /// The published identifier lists: university first, then industry, then
    /// public research institutions.
    fn default() -> Self {
        let to_vec = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        RuleSet::new(
            to_vec(&["UNIV", "COLL"]),
            to_vec(&["CORP", "INC", "LTD", "SA", "AG"]),
            to_vec(&[
                "NATL", "NACL", "NAZL", "GOVT", "MINIST", "ACAD", "INST", "NIH", "HOSP", "HOP",
                "EUROPEAN", "US", "CNRS", "CERN", "INRA", "BUNDES",
            ]),
            SectorLabel::CLASSIFIABLE.to_vec(),
            MatchMode::Token,
        )
        .expect("built-in ruleset is valid")
    }
}

fn address_tokens(address: &str) -> Vec<String> {
    address
        .to_uppercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_string())
        .collect()
}

fn token_matches(rule: &str, tokens: &[String], raw_upper: &str, mode: MatchMode) -> bool {
    if let Some(stem) = rule.strip_suffix('*') {
        return tokens.iter().any(|t| t.starts_with(stem));
    }
    match mode {
        MatchMode::Token => tokens.iter().any(|t| t == rule),
        MatchMode::Prefix => tokens.iter().any(|t| t.starts_with(rule)),
        MatchMode::Substring => raw_upper.contains(rule),
    }
}

/// Attributes one raw address to a sector.
///
/// Sectors are tested in the ruleset's precedence order; the first sector
/// with a matching identifier token wins, and no match means
/// [`SectorLabel::Unclassified`]. Deterministic and total on non-empty
/// strings; uppercasing the input never changes the outcome.
pub fn classify_address(address: &str, rules: &RuleSet) -> Result<SectorLabel, ClassifyError> {
    if address.trim().is_empty() {
        return Err(ClassifyError::EmptyAddress);
    }
    let raw_upper = address.to_uppercase();
    let tokens = address_tokens(address);
    for &sector in rules.precedence() {
        for rule in rules.tokens_for(sector) {
            if token_matches(rule, &tokens, &raw_upper, rules.match_mode()) {
                return Ok(sector);
            }
        }
    }
    Ok(SectorLabel::Unclassified)
}

/// Canonical country names with lookup aliases.
#[derive(Debug, Clone)]
pub struct Gazetteer {
    entries: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl Gazetteer {
    pub fn new(entries: BTreeMap<String, Vec<String>>) -> Result<Self, ClassifyError> {
        let mut gaz = Gazetteer { entries: Vec::new(), lookup: HashMap::new() };
        for (name, aliases) in entries {
            let idx = gaz.entries.len();
            let key = name.to_uppercase();
            if gaz.lookup.insert(key, idx).is_some() {
                return Err(ClassifyError::DuplicateCountry { name });
            }
            for alias in aliases {
                let key = alias.to_uppercase();
                if gaz.lookup.insert(key, idx).is_some() {
                    return Err(ClassifyError::DuplicateCountry { name: alias });
                }
            }
            gaz.entries.push(name);
        }
        Ok(gaz)
    }

    /// Canonical name for a country name or alias, case-insensitively.
    pub fn resolve(&self, name: &str) -> Option<&str> {
        self.lookup.get(&name.trim().to_uppercase()).map(|&idx| self.entries[idx].as_str())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.resolve(name).is_some()
    }

    pub fn countries(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|s| s.as_str())
    }
}

/// Country-group composition: the UK constituents, the EU member states and
/// Scandinavia. The UK set must be a subset of the EU set.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryGroups {
    pub uk_members: BTreeSet<String>,
    pub eu_members: BTreeSet<String>,
    pub scandinavia_members: BTreeSet<String>,
}

pub const GROUP_UK: &str = "UK";
pub const GROUP_EU: &str = "EU";
pub const GROUP_SCANDINAVIA: &str = "Scandinavia";

impl CountryGroups {
    pub fn validate(&self, gazetteer: &Gazetteer) -> Result<(), ClassifyError> {
        for member in &self.uk_members {
            if !self.eu_members.contains(member) {
                return Err(ClassifyError::UkNotSubsetOfEu(member.clone()));
            }
        }
        let groups: [(&'static str, &BTreeSet<String>); 3] = [
            (GROUP_UK, &self.uk_members),
            (GROUP_EU, &self.eu_members),
            (GROUP_SCANDINAVIA, &self.scandinavia_members),
        ];
        for (group, members) in groups {
            for country in members.iter() {
                if !gazetteer.contains(country) {
                    return Err(ClassifyError::UnknownGroupMember { group, country: country.clone() });
                }
            }
        }
        Ok(())
    }

    /// Names of every group containing the given canonical country.
    pub fn groups_for(&self, country: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        if self.uk_members.contains(country) {
            out.insert(GROUP_UK.to_string());
        }
        if self.eu_members.contains(country) {
            out.insert(GROUP_EU.to_string());
        }
        if self.scandinavia_members.contains(country) {
            out.insert(GROUP_SCANDINAVIA.to_string());
        }
        out
    }

    pub fn is_group(&self, name: &str) -> bool {
        [GROUP_UK, GROUP_EU, GROUP_SCANDINAVIA]
            .iter()
            .any(|g| g.eq_ignore_ascii_case(name))
    }
}

/// Country attribution of one address: the matched country, if any, plus
/// every group containing it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CountryTags {
    pub country: Option<String>,
    pub groups: BTreeSet<String>,
}

impl CountryTags {
    /// Flat view: country and group tags together.
    pub fn all_tags(&self) -> BTreeSet<String> {
        let mut tags = self.groups.clone();
        if let Some(ref c) = self.country {
            tags.insert(c.clone());
        }
        tags
    }

    pub fn matches(&self, tag: &str) -> bool {
        self.country.as_deref().map(|c| c.eq_ignore_ascii_case(tag)).unwrap_or(false)
            || self.groups.iter().any(|g| g.eq_ignore_ascii_case(tag))
    }
}

/// Tags one address with its country and country groups.
///
/// The last comma-separated field is matched case-insensitively against the
/// gazetteer; if the whole field does not match (US addresses end in
/// state-and-zip qualifiers), the last purely alphabetic token is tried, so
/// `", CA 94305 USA"` and `", CA 94305"` both resolve to USA through the
/// gazetteer aliases. No match is not an error: it yields an empty tag set,
/// which callers count in coverage statistics.
pub fn tag_countries(
    address: &str,
    groups: &CountryGroups,
    gazetteer: &Gazetteer,
) -> Result<CountryTags, ClassifyError> {
    if address.trim().is_empty() {
        return Err(ClassifyError::EmptyAddress);
    }
    let last_field = address.rsplit(',').next().unwrap_or("").trim();
    let mut resolved = gazetteer.resolve(last_field);
    if resolved.is_none() {
        let last_alpha = last_field
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty() && t.chars().all(|c| c.is_alphabetic()))
            .last();
        if let Some(token) = last_alpha {
            resolved = gazetteer.resolve(token);
        }
    }
    Ok(match resolved {
        Some(country) => CountryTags {
            country: Some(country.to_string()),
            groups: groups.groups_for(country),
        },
        None => CountryTags::default(),
    })
}

const US_STATE_CODES: &[&str] = &[
    "AL", "AK", "AZ", "AR", "CA", "CO", "CT", "DE", "FL", "GA", "HI", "ID", "IL", "IN", "IA",
    "KS", "KY", "LA", "ME", "MD", "MA", "MI", "MN", "MS", "MO", "MT", "NE", "NV", "NH", "NJ",
    "NM", "NY", "NC", "ND", "OH", "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX", "UT", "VT",
    "VA", "WA", "WV", "WI", "WY", "DC",
];

fn default_country_entries() -> BTreeMap<String, Vec<String>> {
    let mut entries: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut insert = |name: &str, aliases: &[&str]| {
        entries.insert(name.to_string(), aliases.iter().map(|a| a.to_string()).collect());
    };
    insert("England", &[]);
    insert("Scotland", &[]);
    insert("Wales", &[]);
    insert("North Ireland", &["NORTHERN IRELAND"]);
    insert("Austria", &[]);
    insert("Belgium", &[]);
    insert("Denmark", &[]);
    insert("Finland", &[]);
    insert("France", &[]);
    insert("Germany", &["FED REP GER"]);
    insert("Greece", &[]);
    insert("Ireland", &["REP IRELAND"]);
    insert("Italy", &[]);
    insert("Luxembourg", &[]);
    insert("Netherlands", &["THE NETHERLANDS", "HOLLAND"]);
    insert("Portugal", &[]);
    insert("Spain", &[]);
    insert("Sweden", &[]);
    insert("Norway", &[]);
    let mut usa_aliases: Vec<&str> = vec!["UNITED STATES", "UNITED STATES OF AMERICA", "US"];
    usa_aliases.extend_from_slice(US_STATE_CODES);
    insert("USA", &usa_aliases);
    insert("Japan", &[]);
    insert("PR China", &["PEOPLES R CHINA", "CHINA"]);
    insert("Taiwan", &[]);
    insert("Singapore", &[]);
    insert("South Korea", &["S KOREA"]);
    insert("Russia", &["RUSSIAN FEDERATION", "USSR"]);
    insert("India", &[]);
    insert("Brazil", &["BRASIL"]);
    insert("Canada", &[]);
    insert("Australia", &[]);
    insert("Switzerland", &[]);
    insert("Israel", &[]);
    insert("Mexico", &[]);
    insert("Poland", &[]);
    insert("Czech Republic", &["CZECH REP"]);
    insert("Hungary", &[]);
    insert("Turkey", &[]);
    insert("South Africa", &["REP SOUTH AFRICA"]);
    insert("New Zealand", &[]);
    insert("Argentina", &[]);
    entries
}

fn default_groups() -> CountryGroups {
    let set = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    let uk = ["England", "Scotland", "Wales", "North Ireland"];
    let mut eu: Vec<&str> = uk.to_vec();
    eu.extend_from_slice(&[
        "Austria", "Belgium", "Denmark", "Finland", "France", "Germany", "Greece", "Ireland",
        "Italy", "Luxembourg", "Netherlands", "Portugal", "Spain", "Sweden",
    ]);
    CountryGroups {
        uk_members: set(&uk),
        eu_members: set(&eu),
        scandinavia_members: set(&["Norway", "Sweden", "Denmark", "Finland"]),
    }
}

/// A loaded classification configuration: sector rules, country gazetteer
/// and group composition. Immutable after load; classification over it is
/// pure and parallelizable.
#[derive(Debug, Clone)]
pub struct ClassifierConfig {
    pub rules: RuleSet,
    pub gazetteer: Gazetteer,
    pub groups: CountryGroups,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        let gazetteer = Gazetteer::new(default_country_entries()).expect("built-in gazetteer is valid");
        let groups = default_groups();
        groups.validate(&gazetteer).expect("built-in groups are valid");
        ClassifierConfig { rules: RuleSet::default(), gazetteer, groups }
    }
}

#[derive(Deserialize)]
struct RawConfig {
    sectors: RawSectors,
    countries: Option<BTreeMap<String, Vec<String>>>,
    groups: Option<RawGroups>,
}

#[derive(Deserialize)]
struct RawSectors {
    precedence: Option<Vec<String>>,
    match_mode: Option<String>,
    university: Vec<String>,
    industry: Vec<String>,
    government: Vec<String>,
}

#[derive(Deserialize)]
struct RawGroups {
    uk: Vec<String>,
    eu: Vec<String>,
    scandinavia: Vec<String>,
}

impl ClassifierConfig {
    /// Parses a ruleset document. The `[countries]` and `[groups]` sections
    /// are optional and default to the built-in gazetteer and composition.
    pub fn from_toml_str(text: &str) -> Result<Self, ClassifyError> {
        let raw: RawConfig = toml::from_str(text)?;
        let precedence = match raw.sectors.precedence {
            Some(names) => names
                .iter()
                .map(|n| SectorLabel::from_config_name(n))
                .collect::<Result<Vec<_>, _>>()?,
            None => SectorLabel::CLASSIFIABLE.to_vec(),
        };
        let match_mode = match raw.sectors.match_mode {
            Some(ref name) => MatchMode::from_config_name(name)?,
            None => MatchMode::Token,
        };
        let rules = RuleSet::new(
            raw.sectors.university,
            raw.sectors.industry,
            raw.sectors.government,
            precedence,
            match_mode,
        )?;
        let gazetteer = match raw.countries {
            Some(entries) => Gazetteer::new(entries)?,
            None => Gazetteer::new(default_country_entries())?,
        };
        let groups = match raw.groups {
            Some(raw) => CountryGroups {
                uk_members: raw.uk.into_iter().collect(),
                eu_members: raw.eu.into_iter().collect(),
                scandinavia_members: raw.scandinavia.into_iter().collect(),
            },
            None => default_groups(),
        };
        groups.validate(&gazetteer)?;
        Ok(ClassifierConfig { rules, gazetteer, groups })
    }

    pub fn from_path(path: &Path) -> Result<Self, ClassifyError> {
        let text = std::fs::read_to_string(path).map_err(|source| ClassifyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }
}
