//! One function per subcommand. Every command reads its inputs, runs the
//! library, and renders a [`Report`]; nothing here mutates input files.

use crate::error::CliError;
use crate::ingest::{ingest_counts, ingest_records};
use crate::report::{format_count, format_value, Report};
use serde_json::json;
use std::path::Path;
use trihelix::aggregate::{address_census, aggregate, resolve_subsets, AddressRecord};
use trihelix::classify::{classify_address, tag_countries, ClassifierConfig, SectorLabel};
use trihelix::entropy::{transmission3, InformationValue};
use trihelix::overlap::{
    apply_pair_reading, build_cube, recompose, ConsistencyReport, CountVector, DecomposePolicy,
    NormalizationMode, PairReading,
};
use trihelix::systemness::{
    systemness_test_with, trend_fit, CategoryMode, PredictOptions, SeriesFrame, TrendBasis,
    TrendMethod,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PolicyArg {
    Strict,
    Clamp,
}

impl From<PolicyArg> for DecomposePolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Strict => DecomposePolicy::Strict,
            PolicyArg::Clamp => DecomposePolicy::Clamp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    /// Cube when the vector carries a total, closed7 otherwise.
    Auto,
    Cube,
    Closed7,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum UnitArg {
    Mbit,
    Bits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EmitArg {
    /// Exclusive cells of the presence/absence cube.
    Cells,
    /// Recomposed overlapping counts in re-ingestible count-file format.
    Counts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CategoriesArg {
    Seven,
    Four,
    Three,
    /// All three category modes side by side.
    All,
}

impl CategoriesArg {
    fn modes(self) -> Vec<CategoryMode> {
        match self {
            CategoriesArg::Seven => vec![CategoryMode::Seven],
            CategoriesArg::Four => vec![CategoryMode::Four],
            CategoriesArg::Three => vec![CategoryMode::Three],
            CategoriesArg::All => vec![CategoryMode::Seven, CategoryMode::Four, CategoryMode::Three],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MethodArg {
    Linear,
    Loglinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BasisArg {
    Shares,
    Counts,
}

fn predict_options(method: MethodArg, basis: BasisArg) -> PredictOptions {
    PredictOptions {
        method: match method {
            MethodArg::Linear => TrendMethod::Linear,
            MethodArg::Loglinear => TrendMethod::LogLinear,
        },
        basis: match basis {
            BasisArg::Shares => TrendBasis::Shares,
            BasisArg::Counts => TrendBasis::Counts,
        },
    }
}

pub fn load_config(rules: Option<&Path>) -> Result<ClassifierConfig, CliError> {
    match rules {
        Some(path) => Ok(ClassifierConfig::from_path(path)?),
        None => Ok(ClassifierConfig::default()),
    }
}

fn resolve_mode(mode: ModeArg, closed_domain: bool, vector: &CountVector) -> (NormalizationMode, &'static str) {
    match mode {
        ModeArg::Cube => (NormalizationMode::Cube { closed_domain }, "cube"),
        ModeArg::Closed7 => (NormalizationMode::Closed7, "closed7"),
        ModeArg::Auto => {
            if vector.total.is_some() {
                (NormalizationMode::Cube { closed_domain }, "cube (total present)")
            } else {
                (NormalizationMode::Closed7, "closed7 (no total)")
            }
        }
    }
}

fn corrections_summary(report: &ConsistencyReport) -> String {
    report
        .clamped_cells
        .iter()
        .map(|c| format!("{}:{}", c.cell, c.original))
        .collect::<Vec<_>>()
        .join(";")
}

/// Parses `U,I,G,UI,UG,IG,UIG[,TOTAL]` into a count vector.
pub fn parse_values(text: &str) -> Result<CountVector, CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 7 && parts.len() != 8 {
        return Err(CliError::Validation(format!(
            "--values needs 7 counts u,i,g,ui,ug,ig,uig plus an optional total; got {} fields",
            parts.len()
        )));
    }
    let mut numbers = Vec::with_capacity(parts.len());
    for part in &parts {
        let value: f64 = part
            .parse()
            .map_err(|_| CliError::Validation(format!("--values entry {part:?} is not numeric")))?;
        numbers.push(value);
    }
    let total = numbers.get(7).copied();
    Ok(CountVector::new(
        numbers[0], numbers[1], numbers[2], numbers[3], numbers[4], numbers[5], numbers[6], total,
    ))
}

pub fn decompose_cmd(input: &Path, policy: PolicyArg, emit: EmitArg) -> Result<Report, CliError> {
    let entries = ingest_counts(input)?;
    let policy = DecomposePolicy::from(policy);
    match emit {
        EmitArg::Cells => {
            let mut report = Report::new(&[
                "year", "u_only", "i_only", "g_only", "ui_only", "ug_only", "ig_only", "uig", "none", "corrections",
            ]);
            report.note(format!("policy: {policy:?}").to_lowercase());
            for (year, vector) in &entries {
                let (cube, consistency) = trihelix::overlap::decompose(vector, policy)?;
                let cell = |u, i, g| format_count(cube.cell(u, i, g));
                let corrections = corrections_summary(&consistency);
                report.row(
                    vec![
                        year.to_string(),
                        cell(true, false, false),
                        cell(false, true, false),
                        cell(false, false, true),
                        cell(true, true, false),
                        cell(true, false, true),
                        cell(false, true, true),
                        cell(true, true, true),
                        cell(false, false, false),
                        corrections.clone(),
                    ],
                    json!({
                        "year": year,
                        "cells": {
                            "u_only": cube.cell(true, false, false),
                            "i_only": cube.cell(false, true, false),
                            "g_only": cube.cell(false, false, true),
                            "ui_only": cube.cell(true, true, false),
                            "ug_only": cube.cell(true, false, true),
                            "ig_only": cube.cell(false, true, true),
                            "uig": cube.cell(true, true, true),
                            "none": cube.cell(false, false, false),
                        },
                        "clamped_cells": consistency.clamped_cells.iter().map(|c| json!({"cell": c.cell, "original": c.original})).collect::<Vec<_>>(),
                    }),
                );
            }
            Ok(report)
        }
        EmitArg::Counts => {
            let with_total = entries.iter().any(|(_, v)| v.total.is_some());
            let mut headers = vec!["year", "u", "i", "g", "ui", "ug", "ig", "uig"];
            if with_total {
                headers.push("total");
            }
            let mut report = Report::new(&headers);
            report.note(format!("policy: {policy:?}").to_lowercase());
            for (year, vector) in &entries {
                let (cube, consistency) = trihelix::overlap::decompose(vector, policy)?;
                if !consistency.is_consistent() {
                    report.note(format!("{year}: clamped {}", corrections_summary(&consistency)));
                }
                let clean = recompose(&cube);
                let mut cells = vec![
                    year.to_string(),
                    format_count(clean.u),
                    format_count(clean.i),
                    format_count(clean.g),
                    format_count(clean.ui),
                    format_count(clean.ug),
                    format_count(clean.ig),
                    format_count(clean.uig),
                ];
                if with_total {
                    cells.push(clean.total.map(format_count).unwrap_or_default());
                }
                report.row(
                    cells,
                    json!({
                        "year": year,
                        "u": clean.u, "i": clean.i, "g": clean.g,
                        "ui": clean.ui, "ug": clean.ug, "ig": clean.ig, "uig": clean.uig,
                        "total": clean.total,
                    }),
                );
            }
            Ok(report)
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn transmission_cmd(
    input: Option<&Path>,
    values: Option<&str>,
    mode: ModeArg,
    closed_domain: bool,
    policy: PolicyArg,
    unit: UnitArg,
    full: bool,
) -> Result<Report, CliError> {
    let entries: Vec<(Option<i32>, CountVector)> = match (input, values) {
        (Some(path), None) => ingest_counts(path)?.into_iter().map(|(y, v)| (Some(y), v)).collect(),
        (None, Some(text)) => vec![(None, parse_values(text)?)],
        _ => return Err(CliError::Validation("pass exactly one of --input or --values".into())),
    };
    let policy = DecomposePolicy::from(policy);
    let unit_name = match unit {
        UnitArg::Mbit => "t_uig_mbit",
        UnitArg::Bits => "t_uig_bits",
    };
    let mut report = Report::new(&["year", unit_name]);
    report.note(format!("policy: {policy:?}").to_lowercase());
    for (year, vector) in &entries {
        let (norm, mode_label) = resolve_mode(mode, closed_domain, vector);
        let (cube, consistency) = build_cube(vector, norm, policy)?;
        let t = transmission3(&cube)?;
        let value = match unit {
            UnitArg::Mbit => t.millibits(),
            UnitArg::Bits => t.bits(),
        };
        let year_text = year.map(|y| y.to_string()).unwrap_or_default();
        report.note(format!(
            "{}: mode {mode_label}{}",
            if year_text.is_empty() { "vector" } else { &year_text },
            if consistency.is_consistent() {
                String::new()
            } else {
                format!(", clamped {}", corrections_summary(&consistency))
            }
        ));
        report.row(
            vec![year_text, format_value(value, full)],
            json!({
                "year": year,
                "t_uig_bits": t.bits(),
                "t_uig_mbit": t.millibits(),
                "mode": mode_label,
                "clamped_cells": consistency.clamped_cells.iter().map(|c| json!({"cell": c.cell, "original": c.original})).collect::<Vec<_>>(),
            }),
        );
    }
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
pub fn systemness_cmd(
    input: &Path,
    target_year: Option<i32>,
    categories: CategoriesArg,
    method: MethodArg,
    basis: BasisArg,
    policy: PolicyArg,
    full: bool,
) -> Result<Report, CliError> {
    let entries = ingest_counts(input)?;
    let base = SeriesFrame::new(entries, CategoryMode::Seven)?;
    let frame = match DecomposePolicy::from(policy) {
        DecomposePolicy::Strict => base,
        DecomposePolicy::Clamp => {
            let (clean, corrections) = base.clamped()?;
            if !corrections.is_empty() {
                let years: Vec<String> = corrections.iter().map(|(y, _)| y.to_string()).collect();
                eprintln!("note: clamped inconsistent counts for years {}", years.join(", "));
            }
            clean
        }
    };
    let target = match target_year {
        Some(year) => year,
        None => *frame.years().last().expect("frame is non-empty"),
    };
    let options = predict_options(method, basis);

    let modes = categories.modes();
    let mut results = Vec::new();
    for mode in &modes {
        let frame = frame.clone().with_mode(*mode);
        results.push(systemness_test_with(&frame, target, options)?);
    }

    let mut report = Report::new(&["categories", "i_timeseries_mbit", "i_markov_mbit", "statistic_mbit", "verdict", "start_year"]);
    report.note(format!("prediction of the value in {target}, in millibits"));
    report.note(format!("extrapolation: {} on {}", options.method.name(), options.basis.name()));
    for (mode, result) in modes.iter().zip(&results) {
        report.row(
            vec![
                mode.name().to_string(),
                format_value(result.i_timeseries.millibits(), full),
                format_value(result.i_markov.millibits(), full),
                format_value(result.statistic.millibits(), full),
                result.verdict.to_string(),
                result.chosen_start_year.to_string(),
            ],
            json!({
                "target_year": target,
                "categories": mode.name(),
                "i_timeseries_mbit": result.i_timeseries.millibits(),
                "i_markov_mbit": result.i_markov.millibits(),
                "statistic_mbit": result.statistic.millibits(),
                "verdict": result.verdict.name(),
                "chosen_start_year": result.chosen_start_year,
                "method": options.method.name(),
                "basis": options.basis.name(),
            }),
        );
    }
    Ok(report)
}

pub fn classify_cmd(
    input: Option<&Path>,
    address: Option<&str>,
    rules: Option<&Path>,
    skip_malformed: bool,
) -> Result<Report, CliError> {
    let config = load_config(rules)?;
    let mut report = Report::new(&["record_id", "address", "sector", "country", "groups"]);
    let mut push = |record_id: &str, addr: &str, config: &ClassifierConfig, report: &mut Report| -> Result<(), CliError> {
        let sector = classify_address(addr, &config.rules)?;
        let tags = tag_countries(addr, &config.groups, &config.gazetteer)?;
        let groups: Vec<String> = tags.groups.iter().cloned().collect();
        report.row(
            vec![
                record_id.to_string(),
                addr.to_string(),
                sector.to_string(),
                tags.country.clone().unwrap_or_default(),
                groups.join(";"),
            ],
            json!({
                "record_id": record_id,
                "address": addr,
                "sector": sector.name(),
                "country": tags.country,
                "groups": groups,
            }),
        );
        Ok(())
    };

    match (input, address) {
        (None, Some(addr)) => push("-", addr, &config, &mut report)?,
        (Some(path), None) => {
            let mut skipped = 0u64;
            for item in ingest_records(path, &config)? {
                match item {
                    Ok(record) => {
                        for addr in &record.addresses {
                            push(&record.record_id, addr, &config, &mut report)?;
                        }
                    }
                    Err(err) if skip_malformed => {
                        skipped += 1;
                        eprintln!("skipped: {err}");
                    }
                    Err(err) => return Err(err),
                }
            }
            if skipped > 0 {
                eprintln!("note: skipped {skipped} malformed lines");
            }
        }
        _ => return Err(CliError::Validation("pass exactly one of --input or --address".into())),
    }
    Ok(report)
}

pub fn aggregate_cmd(
    input: &Path,
    subsets: &[String],
    rules: Option<&Path>,
    skip_malformed: bool,
    full: bool,
) -> Result<Report, CliError> {
    let config = load_config(rules)?;
    let filters = resolve_subsets(subsets, &config)?;

    // single streaming pass; a hard error inside the iterator stops the
    // stream and surfaces after the fold
    let mut error: Option<CliError> = None;
    let mut skipped = 0u64;
    let reader = ingest_records(input, &config)?;
    let stream = reader.map_while(|item| match item {
        Ok(record) => Some(Some(record)),
        Err(err) if skip_malformed => {
            skipped += 1;
            eprintln!("skipped: {err}");
            Some(None)
        }
        Err(err) => {
            error = Some(err);
            None
        }
    });
    let tables = aggregate(stream.flatten(), &filters);
    if let Some(err) = error {
        return Err(err);
    }
    if skipped > 0 {
        eprintln!("note: skipped {skipped} malformed lines");
    }

    let mut report = Report::new(&[
        "subset", "records", "pct_identified", "t_uig_mbit", "ui", "ug", "ig", "uig", "univ", "ind", "gov",
    ]);
    report.note("transmission normalized closed7 over identified records");
    for table in &tables {
        let t = trihelix::overlap::transmission_from_counts(
            &table.counts,
            NormalizationMode::Closed7,
            DecomposePolicy::Strict,
        )
        .ok();
        report.row(
            vec![
                table.name.clone(),
                table.records_in_subset.to_string(),
                format_value(table.pct_identified(), full),
                t.map(|t| format_value(t.millibits(), full)).unwrap_or_default(),
                format_count(table.counts.ui),
                format_count(table.counts.ug),
                format_count(table.counts.ig),
                format_count(table.counts.uig),
                format_count(table.counts.u),
                format_count(table.counts.i),
                format_count(table.counts.g),
            ],
            json!({
                "subset": table.name,
                "records": table.records_in_subset,
                "identified_records": table.identified_records,
                "pct_identified": table.pct_identified(),
                "t_uig_mbit": t.map(|t| t.millibits()),
                "counts": {
                    "u": table.counts.u, "i": table.counts.i, "g": table.counts.g,
                    "ui": table.counts.ui, "ug": table.counts.ug, "ig": table.counts.ig,
                    "uig": table.counts.uig,
                },
            }),
        );
    }
    Ok(report)
}

pub fn census_cmd(input: &Path, rules: Option<&Path>, skip_malformed: bool, full: bool) -> Result<Report, CliError> {
    let config = load_config(rules)?;
    let mut error: Option<CliError> = None;
    let mut skipped = 0u64;
    let reader = ingest_records(input, &config)?;
    let stream = reader.map_while(|item| match item {
        Ok(record) => Some(Some(record)),
        Err(err) if skip_malformed => {
            skipped += 1;
            eprintln!("skipped: {err}");
            Some(None)
        }
        Err(err) => {
            error = Some(err);
            None
        }
    });
    let census = address_census(stream.flatten());
    if let Some(err) = error {
        return Err(err);
    }
    if skipped > 0 {
        eprintln!("note: skipped {skipped} malformed lines");
    }

    let mut report = Report::new(&["sector", "addresses", "percentage"]);
    report.note(format!("addresses with resolved country: {} of {}", census.with_country, census.total()));
    for sector in [
        SectorLabel::University,
        SectorLabel::Industry,
        SectorLabel::Government,
        SectorLabel::Unclassified,
    ] {
        report.row(
            vec![
                sector.to_string(),
                census.count(sector).to_string(),
                format_value(census.pct(sector), full),
            ],
            json!({
                "sector": sector.name(),
                "addresses": census.count(sector),
                "percentage": census.pct(sector),
            }),
        );
    }
    report.row(
        vec!["Total".into(), census.total().to_string(), format_value(100.0, full)],
        json!({"sector": "Total", "addresses": census.total(), "percentage": 100.0}),
    );
    Ok(report)
}

pub fn interpret_cmd(input: &Path, full: bool) -> Result<Report, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(input)
        .map_err(|e| CliError::Io(format!("cannot open {}: {e}", input.display())))?;
    let expected = ["name", "records", "pct_identified", "t_target_mbit", "ui", "ug", "ig", "uig", "univ", "ind", "gov"];
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Validation(e.to_string()))?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    if headers != expected {
        return Err(CliError::Validation(format!(
            "{}: header must be {}; got {:?}",
            input.display(),
            expected.join(","),
            headers
        )));
    }

    struct Row {
        name: String,
        records: f64,
        target: f64,
        vector: CountVector,
    }
    let mut rows = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| CliError::Validation(format!("{}: {e}", input.display())))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let number = |idx: usize| -> Result<f64, CliError> {
            record
                .get(idx)
                .unwrap_or("")
                .parse()
                .map_err(|_| CliError::Validation(format!("{}: line {line}: field {} is not numeric", input.display(), expected[idx])))
        };
        rows.push(Row {
            name: record.get(0).unwrap_or("").to_string(),
            records: number(1)?,
            target: number(3)?,
            vector: CountVector::new(number(8)?, number(9)?, number(10)?, number(4)?, number(5)?, number(6)?, number(7)?, None),
        });
    }
    if rows.is_empty() {
        return Err(CliError::Validation(format!("{}: no data rows after the header", input.display())));
    }

    let mut report = Report::new(&[
        "name", "reading", "t_uig_mbit", "target_mbit", "residual_mbit", "clamped_cells", "union_minus_records", "closer",
    ]);
    report.note("pair-column semantics are ambiguous; both readings are reported, none is asserted");
    report.note("normalization: closed7 with clamp policy");
    for row in &rows {
        let mut outcomes: Vec<(PairReading, InformationValue, ConsistencyReport, f64)> = Vec::new();
        for reading in PairReading::BOTH {
            let adjusted = apply_pair_reading(&row.vector, reading);
            let union = adjusted.union();
            let (cube, consistency) = build_cube(&adjusted, NormalizationMode::Closed7, DecomposePolicy::Clamp)?;
            let t = transmission3(&cube)?;
            outcomes.push((reading, t, consistency, union));
        }
        let closer = outcomes
            .iter()
            .map(|(_, t, _, _)| (t.millibits() - row.target).abs())
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(idx, _)| idx)
            .unwrap_or(0);
        for (idx, (reading, t, consistency, union)) in outcomes.iter().enumerate() {
            let residual = t.millibits() - row.target;
            report.row(
                vec![
                    row.name.clone(),
                    reading.name().to_string(),
                    format_value(t.millibits(), full),
                    format_value(row.target, full),
                    format_value(residual, full),
                    consistency.clamped_cells.len().to_string(),
                    format_count(union - row.records),
                    if idx == closer { "*".into() } else { String::new() },
                ],
                json!({
                    "name": row.name,
                    "reading": reading.name(),
                    "t_uig_mbit": t.millibits(),
                    "target_mbit": row.target,
                    "residual_mbit": residual,
                    "clamped_cells": consistency.clamped_cells.len(),
                    "union_minus_records": union - row.records,
                    "closer": idx == closer,
                }),
            );
        }
    }
    Ok(report)
}

pub fn trend_cmd(
    input: &Path,
    window: Option<&str>,
    mode: ModeArg,
    closed_domain: bool,
    policy: PolicyArg,
    full: bool,
) -> Result<Report, CliError> {
    let entries = ingest_counts(input)?;
    let policy = DecomposePolicy::from(policy);
    let mut points = Vec::with_capacity(entries.len());
    let mut mode_labels: Vec<&'static str> = Vec::new();
    for (year, vector) in &entries {
        let (norm, label) = resolve_mode(mode, closed_domain, vector);
        let (cube, _) = build_cube(vector, norm, policy)?;
        let t = transmission3(&cube)?;
        points.push((*year as f64, t.millibits()));
        if !mode_labels.contains(&label) {
            mode_labels.push(label);
        }
    }
    let window = match window {
        None => None,
        Some(text) => {
            let (from, to) = text
                .split_once(':')
                .ok_or_else(|| CliError::Validation(format!("--window must be FROM:TO, got {text:?}")))?;
            let from: f64 = from
                .trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("--window start {from:?} is not a year")))?;
            let to: f64 = to
                .trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("--window end {to:?} is not a year")))?;
            Some((from, to))
        }
    };
    let fit = trend_fit(&points, window)?;

    let mut report = Report::new(&["slope_mbit_per_year", "intercept_mbit", "r_squared", "n_points", "window"]);
    report.note(format!("series: yearly trilateral transmission, mode {}", mode_labels.join("/")));
    let window_text = window.map(|(a, b)| format!("{a}:{b}")).unwrap_or_else(|| "full".into());
    report.row(
        vec![
            format_value(fit.slope, full),
            format_value(fit.intercept, full),
            format_value(fit.r_squared, full),
            fit.n_points.to_string(),
            window_text.clone(),
        ],
        json!({
            "slope_mbit_per_year": fit.slope,
            "intercept_mbit": fit.intercept,
            "r_squared": fit.r_squared,
            "n_points": fit.n_points,
            "window": window_text,
        }),
    );
    Ok(report)
}
