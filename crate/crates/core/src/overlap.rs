//! Conversion between overlapping search counts and the exclusive 8-cell cube.
//!
//! Search engines report overlapping counts: `u` is every hit containing the
//! first term, `ui` every hit containing the first two, and so on. The
//! information measures need the mutually exclusive cells of the 2×2×2
//! presence/absence cube, obtained by inclusion-exclusion. Real search counts
//! are only statistically Boolean-consistent, so decomposition carries an
//! explicit policy for negative cells and reports every correction it makes.

use crate::entropy::{transmission3, CellCube, EntropyError, InformationValue};
use thiserror::Error;

/// Slack below zero tolerated as floating-point noise on real-valued inputs.
const NEG_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum OverlapError {
    #[error("count field {field} is negative ({value})")]
    NegativeCount { field: &'static str, value: f64 },
    #[error("count field {field} is not finite")]
    NonFiniteCount { field: &'static str },
    #[error("Boolean consistency violated: {}", format_violations(.0))]
    Inconsistent(Vec<CellViolation>),
    #[error("total {total} is smaller than the union of the three sets ({union})")]
    TotalBelowUnion { total: f64, union: f64 },
    #[error("cube normalization requires a grand total; pass one or assert a closed domain (every item carries at least one label)")]
    MissingTotal,
    #[error(transparent)]
    Entropy(#[from] EntropyError),
}

fn format_violations(violations: &[CellViolation]) -> String {
    violations
        .iter()
        .map(|v| format!("cell {} would be {} (constraint {})", v.cell, -v.deficit, v.constraint))
        .collect::<Vec<_>>()
        .join("; ")
}

/// One violated Boolean-consistency inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct CellViolation {
    /// Exclusive cell that came out negative.
    pub cell: &'static str,
    /// The inequality on the overlapping counts that failed.
    pub constraint: &'static str,
    /// How far below zero the cell landed (positive magnitude).
    pub deficit: f64,
}

/// One cell floored to zero under the clamp policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ClampedCell {
    pub cell: &'static str,
    pub original: f64,
}

/// What decomposition had to correct; empty iff the input was
/// Boolean-consistent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConsistencyReport {
    pub violations: Vec<CellViolation>,
    pub clamped_cells: Vec<ClampedCell>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty() && self.clamped_cells.is_empty()
    }
}

/// How to treat negative exclusive cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecomposePolicy {
    /// Any negative cell is an error.
    #[default]
    Strict,
    /// Negative cells are floored to zero and reported.
    Clamp,
}

/// How to populate the none-cell before computing transmissions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationMode {
    /// Full 8-cell cube. Needs a grand total for the none-cell unless
    /// `closed_domain` asserts that every item carries at least one label.
    Cube { closed_domain: bool },
    /// None-cell forced to zero; probabilities over the 7 occupied patterns.
    /// Ignores any total on the vector.
    Closed7,
}

/// The seven overlapping hit counts plus optional grand total for one time
/// point.
///
/// No consistency is enforced at construction; validation layers at
/// [`decompose`], which is where the inclusion-exclusion arithmetic can
/// surface violations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CountVector {
    pub u: f64,
    pub i: f64,
    pub g: f64,
    pub ui: f64,
    pub ug: f64,
    pub ig: f64,
    pub uig: f64,
    /// All documents in the domain, when known; populates the none-cell.
    pub total: Option<f64>,
    /// Optional year label; transport metadata, not counting content.
    pub year: Option<i32>,
}

impl CountVector {
    #[allow(clippy::too_many_arguments)]
    pub fn new(u: f64, i: f64, g: f64, ui: f64, ug: f64, ig: f64, uig: f64, total: Option<f64>) -> Self {
        CountVector { u, i, g, ui, ug, ig, uig, total, year: None }
    }

    pub fn with_year(mut self, year: i32) -> Self {
        self.year = Some(year);
        self
    }

    /// Size of the union of the three sets under inclusion-exclusion.
    pub fn union(&self) -> f64 {
        self.u + self.i + self.g - self.ui - self.ug - self.ig + self.uig
    }

    fn fields(&self) -> [(&'static str, f64); 7] {
        [
            ("u", self.u),
            ("i", self.i),
            ("g", self.g),
            ("ui", self.ui),
            ("ug", self.ug),
            ("ig", self.ig),
            ("uig", self.uig),
        ]
    }
}

/// Splits overlapping counts into the exclusive 8-cell cube by
/// inclusion-exclusion.
///
/// The none-cell is `total − union` when a total is present, zero otherwise.
/// Negative cells violate Boolean consistency: under [`DecomposePolicy::Strict`]
/// they raise, under [`DecomposePolicy::Clamp`] they are floored to zero and
/// returned in the report. A total smaller than the union is an error under
/// either policy.
pub fn decompose(v: &CountVector, policy: DecomposePolicy) -> Result<(CellCube, ConsistencyReport), OverlapError> {
    for (field, value) in v.fields() {
        if !value.is_finite() {
            return Err(OverlapError::NonFiniteCount { field });
        }
        if value < 0.0 {
            return Err(OverlapError::NegativeCount { field, value });
        }
    }
    if let Some(total) = v.total {
        if !total.is_finite() {
            return Err(OverlapError::NonFiniteCount { field: "total" });
        }
        if total < 0.0 {
            return Err(OverlapError::NegativeCount { field: "total", value: total });
        }
    }

    let raw: [(&'static str, &'static str, f64); 7] = [
        ("uig", "uig >= 0", v.uig),
        ("ui", "uig <= ui", v.ui - v.uig),
        ("ug", "uig <= ug", v.ug - v.uig),
        ("ig", "uig <= ig", v.ig - v.uig),
        ("u", "ui + ug - uig <= u", v.u - v.ui - v.ug + v.uig),
        ("i", "ui + ig - uig <= i", v.i - v.ui - v.ig + v.uig),
        ("g", "ug + ig - uig <= g", v.g - v.ug - v.ig + v.uig),
    ];

    let none = match v.total {
        Some(total) => {
            let none = total - v.union();
            if none < -NEG_TOLERANCE {
                return Err(OverlapError::TotalBelowUnion { total, union: v.union() });
            }
            none.max(0.0)
        }
        None => 0.0,
    };

    let mut report = ConsistencyReport::default();
    let mut cells = [0.0f64; 8];
    cells[CellCube::index(false, false, false)] = none;
    for (cell, constraint, value) in raw {
        let idx = match cell {
            "uig" => CellCube::index(true, true, true),
            "ui" => CellCube::index(true, true, false),
            "ug" => CellCube::index(true, false, true),
            "ig" => CellCube::index(false, true, true),
            "u" => CellCube::index(true, false, false),
            "i" => CellCube::index(false, true, false),
            _ => CellCube::index(false, false, true),
        };
        if value < -NEG_TOLERANCE {
            report.violations.push(CellViolation { cell, constraint, deficit: -value });
            report.clamped_cells.push(ClampedCell { cell, original: value });
            cells[idx] = 0.0;
        } else {
            cells[idx] = value.max(0.0);
        }
    }

    if !report.violations.is_empty() && policy == DecomposePolicy::Strict {
        return Err(OverlapError::Inconsistent(report.violations));
    }

    Ok((CellCube::new(cells)?, report))
}

/// Recovers overlapping counts by summing cube cells.
///
/// A grand total is emitted only when the none-cell is occupied; a zero
/// none-cell is indistinguishable from an absent total.
pub fn recompose(cube: &CellCube) -> CountVector {
    let mut v = CountVector::default();
    for idx in 0..8usize {
        let (u, i, g) = (idx & 4 != 0, idx & 2 != 0, idx & 1 != 0);
        let c = cube.cells()[idx];
        if u {
            v.u += c;
        }
        if i {
            v.i += c;
        }
        if g {
            v.g += c;
        }
        if u && i {
            v.ui += c;
        }
        if u && g {
            v.ug += c;
        }
        if i && g {
            v.ig += c;
        }
        if u && i && g {
            v.uig += c;
        }
    }
    let none = cube.cell(false, false, false);
    if none > 0.0 {
        v.total = Some(cube.total());
    }
    v
}

/// Builds the cube a transmission will be computed on, honoring the
/// normalization mode.
pub fn build_cube(
    v: &CountVector,
    mode: NormalizationMode,
    policy: DecomposePolicy,
) -> Result<(CellCube, ConsistencyReport), OverlapError> {
    match mode {
        NormalizationMode::Closed7 => {
            let mut open = v.clone();
            open.total = None;
            decompose(&open, policy)
        }
        NormalizationMode::Cube { closed_domain } => {
            if v.total.is_none() && !closed_domain {
                return Err(OverlapError::MissingTotal);
            }
            decompose(v, policy)
        }
    }
}

/// Trilateral transmission straight from overlapping counts.
pub fn transmission_from_counts(
    v: &CountVector,
    mode: NormalizationMode,
    policy: DecomposePolicy,
) -> Result<InformationValue, OverlapError> {
    let (cube, _) = build_cube(v, mode, policy)?;
    Ok(transmission3(&cube)?)
}

/// The two readings of published pair columns whose relation to the triple
/// count is ambiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairReading {
    /// Published pair counts already contain the triple overlap.
    IncludeTriple,
    /// Published pair counts exclude the triple; add it back to get the
    /// inclusive overlaps the decomposition needs.
    ExcludeTriple,
}

impl PairReading {
    pub const BOTH: [PairReading; 2] = [PairReading::IncludeTriple, PairReading::ExcludeTriple];

    pub fn name(self) -> &'static str {
        match self {
            PairReading::IncludeTriple => "pairs-include-triple",
            PairReading::ExcludeTriple => "pairs-exclude-triple",
        }
    }
}

/// Reinterprets a published count vector under the given pair-column reading.
pub fn apply_pair_reading(v: &CountVector, reading: PairReading) -> CountVector {
    match reading {
        PairReading::IncludeTriple => v.clone(),
        PairReading::ExcludeTriple => {
            let mut adjusted = v.clone();
            adjusted.ui = v.ui + v.uig;
            adjusted.ug = v.ug + v.uig;
            adjusted.ig = v.ig + v.uig;
            adjusted
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand_vector() -> CountVector {
        CountVector::new(100.0, 80.0, 60.0, 20.0, 15.0, 10.0, 5.0, None)
    }

    #[test]
    fn decompose_hand_example() {
        let (cube, report) = decompose(&hand_vector(), DecomposePolicy::Strict).unwrap();
        assert!(report.is_consistent());
        assert_eq!(cube.cell(true, true, true), 5.0);
        assert_eq!(cube.cell(true, true, false), 15.0);
        assert_eq!(cube.cell(true, false, true), 10.0);
        assert_eq!(cube.cell(false, true, true), 5.0);
        assert_eq!(cube.cell(true, false, false), 70.0);
        assert_eq!(cube.cell(false, true, false), 55.0);
        assert_eq!(cube.cell(false, false, true), 40.0);
        assert_eq!(cube.cell(false, false, false), 0.0);
    }

    #[test]
    fn decompose_disjoint_sets() {
        let v = CountVector::new(10.0, 20.0, 30.0, 0.0, 0.0, 0.0, 0.0, Some(100.0));
        let (cube, report) = decompose(&v, DecomposePolicy::Strict).unwrap();
        assert!(report.is_consistent());
        assert_eq!(cube.cell(true, false, false), 10.0);
        assert_eq!(cube.cell(false, true, false), 20.0);
        assert_eq!(cube.cell(false, false, true), 30.0);
        assert_eq!(cube.cell(false, false, false), 40.0);
    }

    #[test]
    fn decompose_forced_negative_cell() {
        // u-only = 10 - 8 - 8 + 0 = -6
        let v = CountVector::new(10.0, 8.0, 8.0, 8.0, 8.0, 6.0, 0.0, None);
        let err = decompose(&v, DecomposePolicy::Strict).unwrap_err();
        match &err {
            OverlapError::Inconsistent(violations) => {
                assert!(violations.iter().any(|c| c.cell == "u" && c.deficit == 6.0));
            }
            other => panic!("unexpected error {other:?}"),
        }
        assert!(err.to_string().contains("Boolean consistency"));

        let (cube, report) = decompose(&v, DecomposePolicy::Clamp).unwrap();
        assert_eq!(cube.cell(true, false, false), 0.0);
        assert!(report.clamped_cells.iter().any(|c| c.cell == "u" && c.original == -6.0));
    }

    #[test]
    fn decompose_patent_1993_none_cell() {
        let v = CountVector::new(3063.0, 9716.0, 2619.0, 401.0, 588.0, 334.0, 63.0, Some(110540.0));
        let (cube, report) = decompose(&v, DecomposePolicy::Strict).unwrap();
        assert!(report.is_consistent());
        assert_eq!(cube.cell(false, false, false), 96402.0);
    }

    #[test]
    fn decompose_rejects_total_below_union() {
        let v = CountVector::new(10.0, 10.0, 10.0, 0.0, 0.0, 0.0, 0.0, Some(20.0));
        for policy in [DecomposePolicy::Strict, DecomposePolicy::Clamp] {
            assert_eq!(
                decompose(&v, policy).unwrap_err(),
                OverlapError::TotalBelowUnion { total: 20.0, union: 30.0 }
            );
        }
    }

    #[test]
    fn decompose_rejects_negative_input() {
        let v = CountVector::new(-1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, None);
        assert_eq!(
            decompose(&v, DecomposePolicy::Strict).unwrap_err(),
            OverlapError::NegativeCount { field: "u", value: -1.0 }
        );
    }

    #[test]
    fn recompose_roundtrips_hand_example() {
        let (cube, _) = decompose(&hand_vector(), DecomposePolicy::Strict).unwrap();
        assert_eq!(recompose(&cube), hand_vector());
    }

    #[test]
    fn recompose_none_only_cube() {
        let mut cells = [0.0; 8];
        cells[0] = 42.0;
        let v = recompose(&CellCube::new(cells).unwrap());
        assert_eq!(v, CountVector::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, Some(42.0)));
    }

    #[test]
    fn recompose_single_triple_cell() {
        let mut cells = [0.0; 8];
        cells[CellCube::index(true, true, true)] = 7.0;
        let v = recompose(&CellCube::new(cells).unwrap());
        assert_eq!(v, CountVector::new(7.0, 7.0, 7.0, 7.0, 7.0, 7.0, 7.0, None));
    }

    #[test]
    fn transmission_zero_on_independent_counts() {
        // constructed so every cell is a product: p(u)=p(i)=p(g)=1/2, total 80
        let v = CountVector::new(40.0, 40.0, 40.0, 20.0, 20.0, 20.0, 10.0, Some(80.0));
        let t = transmission_from_counts(&v, NormalizationMode::Cube { closed_domain: false }, DecomposePolicy::Strict).unwrap();
        assert!(t.bits().abs() < 1e-12);
    }

    #[test]
    fn transmission_cube_mode_requires_total_or_flag() {
        let v = hand_vector();
        assert_eq!(
            transmission_from_counts(&v, NormalizationMode::Cube { closed_domain: false }, DecomposePolicy::Strict).unwrap_err(),
            OverlapError::MissingTotal
        );
        assert!(transmission_from_counts(&v, NormalizationMode::Cube { closed_domain: true }, DecomposePolicy::Strict).is_ok());
    }

    #[test]
    fn transmission_patent_1993_cube_mode_fixture() {
        // locked by the pre-build enumeration oracle; negative, as expected
        let v = CountVector::new(3063.0, 9716.0, 2619.0, 401.0, 588.0, 334.0, 63.0, Some(110540.0));
        let t = transmission_from_counts(&v, NormalizationMode::Cube { closed_domain: false }, DecomposePolicy::Strict).unwrap();
        assert!(t.bits() < 0.0);
        assert!((t.bits() - (-4.4832619919166206e-05)).abs() < 1e-15);
    }

    #[test]
    fn transmission_patent_1993_closed7_fixture() {
        let v = CountVector::new(3063.0, 9716.0, 2619.0, 401.0, 588.0, 334.0, 63.0, Some(110540.0));
        let t = transmission_from_counts(&v, NormalizationMode::Closed7, DecomposePolicy::Strict).unwrap();
        assert!((t.bits() - (-0.18308726498216488)).abs() < 1e-15);
    }

    #[test]
    fn closed7_ignores_total() {
        let mut with_total = hand_vector();
        with_total.total = Some(500.0);
        let a = transmission_from_counts(&hand_vector(), NormalizationMode::Closed7, DecomposePolicy::Strict).unwrap();
        let b = transmission_from_counts(&with_total, NormalizationMode::Closed7, DecomposePolicy::Strict).unwrap();
        assert_eq!(a.bits(), b.bits());
    }

    #[test]
    fn pair_readings_adjust_only_pairs() {
        let v = CountVector::new(100.0, 80.0, 60.0, 20.0, 15.0, 10.0, 5.0, None);
        let a = apply_pair_reading(&v, PairReading::IncludeTriple);
        assert_eq!(a, v);
        let b = apply_pair_reading(&v, PairReading::ExcludeTriple);
        assert_eq!((b.ui, b.ug, b.ig), (25.0, 20.0, 15.0));
        assert_eq!((b.u, b.i, b.g, b.uig), (v.u, v.i, v.g, v.uig));
    }

    #[test]
    fn clamp_total_never_exceeds_strict_total() {
        // clamping floors negative cells to zero, so its total can only grow
        // from the raw signed sum; against a consistent vector both agree
        let v = hand_vector();
        let (strict, _) = decompose(&v, DecomposePolicy::Strict).unwrap();
        let (clamp, _) = decompose(&v, DecomposePolicy::Clamp).unwrap();
        assert_eq!(strict.total(), clamp.total());
    }
}
