//! Input parsing: delimited count files and line-delimited record files.
//!
//! Count files are comma-separated UTF-8 text with a mandatory header
//! `year,u,i,g,ui,ug,ig,uig` plus an optional trailing `total` column.
//! Record files carry one JSON object per line with fields `id` (string),
//! `addresses` (array of strings) and optional `countries` (array aligned
//! with the addresses). Records are classified lazily while streaming, so
//! arbitrarily large files process in constant memory.

use crate::error::CliError;
use serde::Deserialize;
use std::io::BufRead;
use std::path::Path;
use trihelix::aggregate::AddressRecord;
use trihelix::classify::{ClassifierConfig, CountryTags};
use trihelix::overlap::CountVector;

const COUNT_HEADER: [&str; 8] = ["year", "u", "i", "g", "ui", "ug", "ig", "uig"];

/// Parses a count file into year/vector pairs, rejecting duplicate years.
/// Rows come back sorted by year regardless of file order. Boolean
/// consistency is deliberately not checked here; that layer lives in
/// decomposition.
pub fn ingest_counts(path: &Path) -> Result<Vec<(i32, CountVector)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::io(format!("cannot open count file {}", path.display()), into_io(e)))?;

    let headers = reader
        .headers()
        .map_err(|e| CliError::Validation(format!("{}: cannot read header: {e}", path.display())))?
        .clone();
    let names: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    let with_total = match names.len() {
        8 => false,
        9 if names[8] == "total" => true,
        _ => {
            return Err(CliError::Validation(format!(
                "{}: header must be year,u,i,g,ui,ug,ig,uig[,total]; got {:?}",
                path.display(),
                names
            )))
        }
    };
    for (want, got) in COUNT_HEADER.iter().zip(&names) {
        if want != got {
            return Err(CliError::Validation(format!(
                "{}: header must be year,u,i,g,ui,ug,ig,uig[,total]; got {:?}",
                path.display(),
                names
            )));
        }
    }

    let mut entries: Vec<(i32, CountVector)> = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |idx: usize| -> &str { record.get(idx).unwrap_or("") };

        let year: i32 = field(0).parse().map_err(|_| {
            CliError::Validation(format!("{}: line {line}: year {:?} is not an integer", path.display(), field(0)))
        })?;
        let mut counts = [0.0f64; 7];
        for (k, slot) in counts.iter_mut().enumerate() {
            let raw = field(k + 1);
            let value: f64 = raw.parse().map_err(|_| {
                CliError::Validation(format!(
                    "{}: line {line}: {} value {raw:?} is not numeric",
                    path.display(),
                    COUNT_HEADER[k + 1]
                ))
            })?;
            if !value.is_finite() || value < 0.0 {
                return Err(CliError::Validation(format!(
                    "{}: line {line}: {} must be a finite non-negative count, got {raw}",
                    path.display(),
                    COUNT_HEADER[k + 1]
                )));
            }
            *slot = value;
        }
        let total = if with_total {
            let raw = field(8);
            if raw.is_empty() {
                None
            } else {
                let value: f64 = raw.parse().map_err(|_| {
                    CliError::Validation(format!("{}: line {line}: total value {raw:?} is not numeric", path.display()))
                })?;
                if !value.is_finite() || value < 0.0 {
                    return Err(CliError::Validation(format!(
                        "{}: line {line}: total must be a finite non-negative count, got {raw}",
                        path.display()
                    )));
                }
                Some(value)
            }
        } else {
            None
        };

        if entries.iter().any(|(y, _)| *y == year) {
            return Err(CliError::Validation(format!("{}: line {line}: duplicate year {year}", path.display())));
        }
        let vector = CountVector::new(counts[0], counts[1], counts[2], counts[3], counts[4], counts[5], counts[6], total)
            .with_year(year);
        entries.push((year, vector));
    }

    if entries.is_empty() {
        return Err(CliError::Validation(format!("{}: no data rows after the header", path.display())));
    }
    entries.sort_by_key(|(year, _)| *year);
    Ok(entries)
}

fn into_io(err: csv::Error) -> std::io::Error {
    match err.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    addresses: Vec<String>,
    #[serde(default)]
    countries: Option<Vec<String>>,
}

/// Streaming record reader: yields one labeled record per input line without
/// holding the file in memory.
pub struct RecordReader<'a, R: BufRead> {
    lines: std::io::Lines<R>,
    line_no: u64,
    path: String,
    config: &'a ClassifierConfig,
}

impl<'a, R: BufRead> Iterator for RecordReader<'a, R> {
    type Item = Result<AddressRecord, CliError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.line_no += 1;
            match self.lines.next()? {
                Err(e) => return Some(Err(CliError::io(format!("{}: line {}", self.path, self.line_no), e))),
                Ok(line) if line.trim().is_empty() => continue,
                Ok(line) => return Some(self.parse_line(&line)),
            }
        }
    }
}

impl<'a, R: BufRead> RecordReader<'a, R> {
    fn parse_line(&self, line: &str) -> Result<AddressRecord, CliError> {
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| {
            CliError::Validation(format!("{}: line {}: {e}", self.path, self.line_no))
        })?;
        if raw.addresses.is_empty() {
            return Err(CliError::Validation(format!(
                "{}: line {}: record {:?} has no addresses",
                self.path, self.line_no, raw.id
            )));
        }
        let record = match raw.countries {
            None => AddressRecord::label(raw.id, raw.addresses, self.config)?,
            Some(countries) => {
                if countries.len() != raw.addresses.len() {
                    return Err(CliError::Validation(format!(
                        "{}: line {}: record {:?} has {} countries for {} addresses",
                        self.path,
                        self.line_no,
                        raw.id,
                        countries.len(),
                        raw.addresses.len()
                    )));
                }
                let mut sector_labels = Vec::with_capacity(raw.addresses.len());
                for address in &raw.addresses {
                    sector_labels.push(trihelix::classify::classify_address(address, &self.config.rules)?);
                }
                let country_tags = countries.iter().map(|name| self.explicit_tags(name)).collect();
                AddressRecord::new(raw.id, raw.addresses, sector_labels, country_tags)?
            }
        };
        Ok(record)
    }

    /// Explicit country names resolve through the gazetteer when known; an
    /// unknown name is kept verbatim (without group tags) and an empty string
    /// means no country.
    fn explicit_tags(&self, name: &str) -> CountryTags {
        let trimmed = name.trim();
        if trimmed.is_empty() {
            return CountryTags::default();
        }
        match self.config.gazetteer.resolve(trimmed) {
            Some(canonical) => CountryTags {
                country: Some(canonical.to_string()),
                groups: self.config.groups.groups_for(canonical),
            },
            None => CountryTags { country: Some(trimmed.to_string()), groups: Default::default() },
        }
    }
}

/// Opens a record file for streaming ingestion.
pub fn ingest_records<'a>(
    path: &Path,
    config: &'a ClassifierConfig,
) -> Result<RecordReader<'a, std::io::BufReader<std::fs::File>>, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::io(format!("cannot open record file {}", path.display()), e))?;
    Ok(RecordReader {
        lines: std::io::BufReader::new(file).lines(),
        line_no: 0,
        path: path.display().to_string(),
        config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn counts_parse_and_sort() {
        let f = write_temp("year,u,i,g,ui,ug,ig,uig,total\n1994,2,2,2,1,1,1,1,10\n1993,1,1,1,0,0,0,0,5\n");
        let entries = ingest_counts(f.path()).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].0, 1993);
        assert_eq!(entries[1].1.total, Some(10.0));
    }

    #[test]
    fn counts_reject_header_only() {
        let f = write_temp("year,u,i,g,ui,ug,ig,uig\n");
        let err = ingest_counts(f.path()).unwrap_err();
        assert!(err.to_string().contains("no data rows"));
    }

    #[test]
    fn counts_reject_duplicate_year() {
        let f = write_temp("year,u,i,g,ui,ug,ig,uig\n1993,1,1,1,0,0,0,0\n1993,2,2,2,0,0,0,0\n");
        let err = ingest_counts(f.path()).unwrap_err();
        assert!(err.to_string().contains("duplicate year 1993"), "{err}");
    }

    #[test]
    fn counts_reject_non_numeric_with_line_number() {
        let f = write_temp("year,u,i,g,ui,ug,ig,uig\n1993,1,1,1,0,0,0,0\n1994,1,x,1,0,0,0,0\n");
        let err = ingest_counts(f.path()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 3") && msg.contains("\"x\""), "{msg}");
    }

    #[test]
    fn counts_accept_boolean_inconsistency_at_parse() {
        // uig > ui is a decomposition-layer concern, not a parse error
        let f = write_temp("year,u,i,g,ui,ug,ig,uig\n1993,10,10,10,1,5,5,4\n");
        let entries = ingest_counts(f.path()).unwrap();
        assert_eq!(entries[0].1.uig, 4.0);
    }

    #[test]
    fn counts_reject_bad_header() {
        let f = write_temp("anno,u,i,g,ui,ug,ig,uig\n1993,1,1,1,0,0,0,0\n");
        assert!(ingest_counts(f.path()).is_err());
    }

    #[test]
    fn records_parse_and_classify() {
        let config = ClassifierConfig::default();
        let f = write_temp(concat!(
            "{\"id\":\"a\",\"addresses\":[\"UNIV GENT, BELGIUM\"]}\n",
            "{\"id\":\"b\",\"addresses\":[\"HITACHI LTD, TOKYO, JAPAN\",\"UNIV TOKYO, TOKYO, JAPAN\"]}\n",
            "{\"id\":\"c\",\"addresses\":[\"SOMEWHERE\"],\"countries\":[\"Japan\"]}\n",
        ));
        let records: Vec<_> = ingest_records(f.path(), &config).unwrap().collect::<Result<_, _>>().unwrap();
        assert_eq!(records.len(), 3);
        assert_eq!(records[0].sector_labels[0], trihelix::classify::SectorLabel::University);
        assert_eq!(records[1].addresses.len(), 2);
        assert_eq!(records[2].country_tags[0].country.as_deref(), Some("Japan"));
    }

    #[test]
    fn records_error_names_missing_field_and_line() {
        let config = ClassifierConfig::default();
        let f = write_temp("{\"id\":\"a\",\"addresses\":[\"X CORP, JAPAN\"]}\n{\"id\":\"b\"}\n");
        let result: Result<Vec<_>, _> = ingest_records(f.path(), &config).unwrap().collect();
        let err = result.unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("addresses"), "{err}");
    }

    #[test]
    fn records_misaligned_countries_rejected() {
        let config = ClassifierConfig::default();
        let f = write_temp("{\"id\":\"a\",\"addresses\":[\"X\",\"Y\"],\"countries\":[\"Japan\"]}\n");
        let result: Result<Vec<_>, _> = ingest_records(f.path(), &config).unwrap().collect();
        assert!(result.unwrap_err().to_string().contains("1 countries for 2 addresses"));
    }
}
