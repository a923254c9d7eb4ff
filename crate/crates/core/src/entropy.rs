//! Pure information-theoretic kernel.
//!
//! Everything here is a pure function of immutable inputs. All logarithms are
//! base 2, so entropies and transmissions come out in bits; the millibit view
//! is a presentation scale only. The convention `0·log₂0 = 0` applies
//! throughout, which lets cells and probabilities be exactly zero.

use thiserror::Error;

/// Tolerance for "probabilities sum to 1" and for equality checks on
/// quantities derived from ratios of integer counts.
pub const PROB_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum EntropyError {
    #[error("distribution has no entries")]
    EmptyDistribution,
    #[error("probability at index {index} is negative ({value})")]
    NegativeProbability { index: usize, value: f64 },
    #[error("probability at index {index} is not finite")]
    NonFiniteProbability { index: usize },
    #[error("probabilities sum to {sum}, expected 1 within {PROB_SUM_TOLERANCE}")]
    SumNotOne { sum: f64 },
    #[error("{count} labels provided for {probs} probabilities")]
    LabelCountMismatch { count: usize, probs: usize },
    #[error("count at index {index} is negative ({value})")]
    NegativeCount { index: usize, value: f64 },
    #[error("counts sum to zero, cannot normalize")]
    ZeroTotal,
    #[error("cube cell {pattern} is negative ({value})")]
    NegativeCell { pattern: &'static str, value: f64 },
    #[error("cube cell {pattern} is not finite")]
    NonFiniteCell { pattern: &'static str },
    #[error("cube total is zero")]
    ZeroTotalCube,
    #[error("no axes requested for marginalization")]
    EmptyAxes,
    #[error("axis {0:?} requested more than once")]
    DuplicateAxis(Axis),
    #[error("distributions have different lengths: {observed} observed vs {predicted} predicted")]
    LengthMismatch { observed: usize, predicted: usize },
    #[error("labels differ at index {index}: observed {observed:?}, predicted {predicted:?}")]
    LabelMismatch { index: usize, observed: String, predicted: String },
    #[error("predicted probability at index {index} is zero but observed is {observed}; smooth the prediction (floor zero entries at a small epsilon and renormalize) before evaluating")]
    UnsmoothedZero { index: usize, observed: f64 },
}

/// One of the three measurement dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    U,
    I,
    G,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::U, Axis::I, Axis::G];

    fn bit(self) -> usize {
        match self {
            Axis::U => 2,
            Axis::I => 1,
            Axis::G => 0,
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::U => write!(f, "U"),
            Axis::I => write!(f, "I"),
            Axis::G => write!(f, "G"),
        }
    }
}

/// An information quantity in bits (log base 2).
///
/// Always finite on valid input; the millibit view is `bits × 1000`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct InformationValue {
    bits: f64,
}

impl InformationValue {
    pub fn from_bits(bits: f64) -> Self {
        debug_assert!(bits.is_finite(), "information value must be finite");
        InformationValue { bits }
    }

    pub fn from_millibits(mbit: f64) -> Self {
        Self::from_bits(mbit / 1000.0)
    }

    pub fn bits(self) -> f64 {
        self.bits
    }

    pub fn millibits(self) -> f64 {
        self.bits * 1000.0
    }
}

impl std::ops::Sub for InformationValue {
    type Output = InformationValue;

    fn sub(self, rhs: Self) -> Self {
        InformationValue::from_bits(self.bits - rhs.bits)
    }
}

impl std::ops::Add for InformationValue {
    type Output = InformationValue;

    fn add(self, rhs: Self) -> Self {
        InformationValue::from_bits(self.bits + rhs.bits)
    }
}

/// A finite list of category probabilities: non-negative, summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl Distribution {
    /// Validates and wraps a probability vector.
    pub fn new(probs: Vec<f64>, labels: Option<Vec<String>>) -> Result<Self, EntropyError> {
        if probs.is_empty() {
            return Err(EntropyError::EmptyDistribution);
        }
        for (index, &p) in probs.iter().enumerate() {
            if !p.is_finite() {
                return Err(EntropyError::NonFiniteProbability { index });
            }
            if p < 0.0 {
                return Err(EntropyError::NegativeProbability { index, value: p });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(EntropyError::SumNotOne { sum });
        }
        if let Some(ref l) = labels {
            if l.len() != probs.len() {
                return Err(EntropyError::LabelCountMismatch { count: l.len(), probs: probs.len() });
            }
        }
        Ok(Distribution { probs, labels })
    }

    /// Normalizes non-negative counts into a distribution.
    pub fn from_counts(counts: &[f64], labels: Option<Vec<String>>) -> Result<Self, EntropyError> {
        if counts.is_empty() {
            return Err(EntropyError::EmptyDistribution);
        }
        for (index, &c) in counts.iter().enumerate() {
            if !c.is_finite() {
                return Err(EntropyError::NonFiniteProbability { index });
            }
            if c < 0.0 {
                return Err(EntropyError::NegativeCount { index, value: c });
            }
        }
        let total: f64 = counts.iter().sum();
        if total <= 0.0 {
            return Err(EntropyError::ZeroTotal);
        }
        let probs = counts.iter().map(|c| c / total).collect();
        if let Some(ref l) = labels {
            if l.len() != counts.len() {
                return Err(EntropyError::LabelCountMismatch { count: l.len(), probs: counts.len() });
            }
        }
        Ok(Distribution { probs, labels })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Exclusive-cell names in index order (index = u·4 + i·2 + g).
pub const CELL_NAMES: [&str; 8] = ["none", "g", "i", "ig", "u", "ug", "ui", "uig"];

/// The 8 mutually exclusive cell counts of the 2×2×2 presence/absence cube.
///
/// Cells are indexed by presence pattern `(u, i, g)` with `u` the most
/// significant bit: index `u·4 + i·2 + g`. Counts are real-valued so smoothed
/// or normalized inputs reuse the same type; they may be exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CellCube {
    cells: [f64; 8],
}

impl CellCube {
    pub fn new(cells: [f64; 8]) -> Result<Self, EntropyError> {
        for (idx, &c) in cells.iter().enumerate() {
            if !c.is_finite() {
                return Err(EntropyError::NonFiniteCell { pattern: CELL_NAMES[idx] });
            }
            if c < 0.0 {
                return Err(EntropyError::NegativeCell { pattern: CELL_NAMES[idx], value: c });
            }
        }
        Ok(CellCube { cells })
    }

    pub fn index(u: bool, i: bool, g: bool) -> usize {
        (u as usize) * 4 + (i as usize) * 2 + (g as usize)
    }

    pub fn cell(&self, u: bool, i: bool, g: bool) -> f64 {
        self.cells[Self::index(u, i, g)]
    }

    pub fn cells(&self) -> &[f64; 8] {
        &self.cells
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().sum()
    }

    /// Marginal count over the given axes for one presence pattern of them.
    fn marginal_count(&self, axes: &[Axis], pattern: usize) -> f64 {
        let mut sum = 0.0;
        for idx in 0..8 {
            let mut key = 0usize;
            for (pos, ax) in axes.iter().enumerate() {
                let present = (idx >> ax.bit()) & 1;
                key |= present << (axes.len() - 1 - pos);
            }
            if key == pattern {
                sum += self.cells[idx];
            }
        }
        sum
    }
}

/// Shannon entropy H = −Σ p·log₂(p) of a distribution, in bits.
///
/// Lies in `[0, log₂(n)]` for n categories.
pub fn shannon_entropy(d: &Distribution) -> InformationValue {
    let h = d
        .probs()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    InformationValue::from_bits(h)
}

/// Distribution over the requested axes, summing out the others.
///
/// Patterns of the kept axes are enumerated in ascending binary order with
/// the first requested axis as the most significant bit, so `[Axis::U]`
/// yields `(p(u=0), p(u=1))`.
pub fn marginalize(cube: &CellCube, axes: &[Axis]) -> Result<Distribution, EntropyError> {
    if axes.is_empty() {
        return Err(EntropyError::EmptyAxes);
    }
    for (i, ax) in axes.iter().enumerate() {
        if axes[..i].contains(ax) {
            return Err(EntropyError::DuplicateAxis(*ax));
        }
    }
    if cube.total() <= 0.0 {
        return Err(EntropyError::ZeroTotalCube);
    }
    let n = 1usize << axes.len();
    let mut counts = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for pattern in 0..n {
        counts.push(cube.marginal_count(axes, pattern));
        let label = axes
            .iter()
            .enumerate()
            .map(|(pos, ax)| format!("{}={}", ax, (pattern >> (axes.len() - 1 - pos)) & 1))
            .collect::<Vec<_>>()
            .join(",");
        labels.push(label);
    }
    Distribution::from_counts(&counts, Some(labels))
}

/// Bilateral transmission T_XY = H_X + H_Y − H_XY, in bits.
///
/// Non-negative up to rounding; exactly zero when the two axes are
/// independent in the cube.
pub fn transmission2(cube: &CellCube, pair: (Axis, Axis)) -> Result<InformationValue, EntropyError> {
    if pair.0 == pair.1 {
        return Err(EntropyError::DuplicateAxis(pair.0));
    }
    let h_x = shannon_entropy(&marginalize(cube, &[pair.0])?);
    let h_y = shannon_entropy(&marginalize(cube, &[pair.1])?);
    let h_xy = shannon_entropy(&marginalize(cube, &[pair.0, pair.1])?);
    Ok(h_x + h_y - h_xy)
}

/// Trilateral transmission T_UIG, in bits: the mutual information in three
/// dimensions, H_U + H_I + H_G − H_UI − H_IG − H_UG + H_UIG.
///
/// Signed: a negative value indicates uncertainty reduction by the
/// configuration of bilateral relations.
pub fn transmission3(cube: &CellCube) -> Result<InformationValue, EntropyError> {
    use Axis::{G, I, U};
    let h_u = shannon_entropy(&marginalize(cube, &[U])?);
    let h_i = shannon_entropy(&marginalize(cube, &[I])?);
    let h_g = shannon_entropy(&marginalize(cube, &[G])?);
    let h_ui = shannon_entropy(&marginalize(cube, &[U, I])?);
    let h_ig = shannon_entropy(&marginalize(cube, &[I, G])?);
    let h_ug = shannon_entropy(&marginalize(cube, &[U, G])?);
    let h_uig = shannon_entropy(&marginalize(cube, &[U, I, G])?);
    Ok(h_u + h_i + h_g - h_ui - h_ig - h_ug + h_uig)
}

/// Information of the message I = Σ q·log₂(q/p), in bits, with `q` the
/// observed and `p` the predicted distribution.
///
/// Non-negative, and zero only when the two distributions coincide. A zero
/// predicted probability facing observed mass is a domain error: the caller
/// must smooth the prediction first.
pub fn info_of_message(observed: &Distribution, predicted: &Distribution) -> Result<InformationValue, EntropyError> {
    if observed.len() != predicted.len() {
        return Err(EntropyError::LengthMismatch { observed: observed.len(), predicted: predicted.len() });
    }
    if let (Some(lq), Some(lp)) = (observed.labels(), predicted.labels()) {
        for (index, (a, b)) in lq.iter().zip(lp).enumerate() {
            if a != b {
                return Err(EntropyError::LabelMismatch { index, observed: a.clone(), predicted: b.clone() });
            }
        }
    }
    let mut sum = 0.0;
    for (index, (&q, &p)) in observed.probs().iter().zip(predicted.probs()).enumerate() {
        if q > 0.0 {
            if p <= 0.0 {
                return Err(EntropyError::UnsmoothedZero { index, observed: q });
            }
            sum += q * (q / p).log2();
        }
    }
    Ok(InformationValue::from_bits(sum.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(probs: &[f64]) -> Distribution {
        Distribution::new(probs.to_vec(), None).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn entropy_uniform_over_four_is_two_bits() {
        let h = shannon_entropy(&dist(&[0.25; 4]));
        assert!(close(h.bits(), 2.0, 1e-12));
    }

    #[test]
    fn entropy_degenerate_is_zero() {
        let h = shannon_entropy(&dist(&[1.0, 0.0, 0.0]));
        assert_eq!(h.bits(), 0.0);
    }

    #[test]
    fn entropy_dyadic_probabilities() {
        let h = shannon_entropy(&dist(&[0.5, 0.25, 0.25]));
        assert!(close(h.bits(), 1.5, 1e-12));
    }

    #[test]
    fn entropy_uniform_matches_log2_n() {
        for n in 1..=1024usize {
            let probs = vec![1.0 / n as f64; n];
            let h = shannon_entropy(&Distribution::new(probs, None).unwrap());
            assert!(close(h.bits(), (n as f64).log2(), 1e-9), "n = {}", n);
        }
    }

    #[test]
    fn distribution_rejects_negative_entry_naming_index() {
        let err = Distribution::new(vec![0.6, -0.1, 0.5], None).unwrap_err();
        assert_eq!(err, EntropyError::NegativeProbability { index: 1, value: -0.1 });
    }

    #[test]
    fn distribution_rejects_bad_sum() {
        let err = Distribution::new(vec![0.5, 0.4], None).unwrap_err();
        assert!(matches!(err, EntropyError::SumNotOne { .. }));
    }

    #[test]
    fn distribution_rejects_empty() {
        assert_eq!(Distribution::new(vec![], None).unwrap_err(), EntropyError::EmptyDistribution);
    }

    #[test]
    fn marginalize_symmetric_cube_is_even() {
        let cube = CellCube::new([1.0; 8]).unwrap();
        let d = marginalize(&cube, &[Axis::U]).unwrap();
        assert_eq!(d.probs(), &[0.5, 0.5]);
        assert_eq!(d.labels().unwrap(), &["U=0".to_string(), "U=1".to_string()]);
    }

    #[test]
    fn marginalize_single_occupied_cell() {
        let mut cells = [0.0; 8];
        cells[CellCube::index(true, true, true)] = 10.0;
        let cube = CellCube::new(cells).unwrap();
        let d = marginalize(&cube, &[Axis::U, Axis::I]).unwrap();
        assert_eq!(d.probs(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn marginalize_patent_1993_cube_to_five_decimals() {
        // exclusive cells of the 1993 patent row, none-cell from the total
        let mut cells = [0.0; 8];
        cells[CellCube::index(false, false, false)] = 96402.0;
        cells[CellCube::index(true, false, false)] = 2137.0;
        cells[CellCube::index(false, true, false)] = 9044.0;
        cells[CellCube::index(false, false, true)] = 1760.0;
        cells[CellCube::index(true, true, false)] = 338.0;
        cells[CellCube::index(true, false, true)] = 525.0;
        cells[CellCube::index(false, true, true)] = 271.0;
        cells[CellCube::index(true, true, true)] = 63.0;
        let cube = CellCube::new(cells).unwrap();
        let d = marginalize(&cube, &[Axis::U]).unwrap();
        assert!(close(d.probs()[0], 0.97229, 5e-6));
        assert!(close(d.probs()[1], 0.02771, 5e-6));
    }

    #[test]
    fn marginalize_rejects_empty_axes_and_duplicates() {
        let cube = CellCube::new([1.0; 8]).unwrap();
        assert_eq!(marginalize(&cube, &[]).unwrap_err(), EntropyError::EmptyAxes);
        assert_eq!(
            marginalize(&cube, &[Axis::U, Axis::U]).unwrap_err(),
            EntropyError::DuplicateAxis(Axis::U)
        );
    }

    #[test]
    fn marginalize_rejects_zero_total() {
        let cube = CellCube::new([0.0; 8]).unwrap();
        assert_eq!(marginalize(&cube, &[Axis::U]).unwrap_err(), EntropyError::ZeroTotalCube);
    }

    #[test]
    fn cube_rejects_negative_cell() {
        let mut cells = [1.0; 8];
        cells[3] = -0.5;
        let err = CellCube::new(cells).unwrap_err();
        assert_eq!(err, EntropyError::NegativeCell { pattern: "ig", value: -0.5 });
    }

    fn product_cube(pu: f64, pi: f64, pg: f64, total: f64) -> CellCube {
        let mut cells = [0.0; 8];
        for idx in 0..8 {
            let fu = if idx & 4 != 0 { pu } else { 1.0 - pu };
            let fi = if idx & 2 != 0 { pi } else { 1.0 - pi };
            let fg = if idx & 1 != 0 { pg } else { 1.0 - pg };
            cells[idx] = fu * fi * fg * total;
        }
        CellCube::new(cells).unwrap()
    }

    #[test]
    fn transmission2_zero_on_independent_product_cube() {
        let cube = product_cube(0.5, 0.5, 0.5, 8.0);
        let t = transmission2(&cube, (Axis::U, Axis::I)).unwrap();
        assert!(t.bits().abs() < 1e-12);
    }

    #[test]
    fn transmission2_one_bit_on_perfect_correlation() {
        let mut cells = [0.0; 8];
        cells[CellCube::index(false, false, false)] = 50.0;
        cells[CellCube::index(true, true, false)] = 50.0;
        let cube = CellCube::new(cells).unwrap();
        let t = transmission2(&cube, (Axis::U, Axis::I)).unwrap();
        assert!(close(t.bits(), 1.0, 1e-12));
    }

    #[test]
    fn transmission2_folded_two_by_two_independence() {
        // u=10, i=10, ui=5, total=20 folds to an exactly independent cube
        let mut cells = [0.0; 8];
        cells[CellCube::index(true, true, false)] = 5.0;
        cells[CellCube::index(true, false, false)] = 5.0;
        cells[CellCube::index(false, true, false)] = 5.0;
        cells[CellCube::index(false, false, false)] = 5.0;
        let cube = CellCube::new(cells).unwrap();
        let t = transmission2(&cube, (Axis::U, Axis::I)).unwrap();
        assert!(t.bits().abs() < 1e-12);
    }

    #[test]
    fn transmission2_rejects_same_axis_twice() {
        let cube = CellCube::new([1.0; 8]).unwrap();
        assert_eq!(
            transmission2(&cube, (Axis::G, Axis::G)).unwrap_err(),
            EntropyError::DuplicateAxis(Axis::G)
        );
    }

    #[test]
    fn transmission3_zero_on_independent_product_cube() {
        let cube = product_cube(0.5, 0.5, 0.5, 8.0);
        let t = transmission3(&cube).unwrap();
        assert!(t.bits().abs() < 1e-12);
    }

    #[test]
    fn transmission3_minus_one_on_xor_parity_cube() {
        let mut cells = [0.0; 8];
        for idx in 0..8usize {
            if (idx.count_ones() % 2) == 0 {
                cells[idx] = 0.25;
            }
        }
        let cube = CellCube::new(cells).unwrap();
        let t = transmission3(&cube).unwrap();
        assert!(close(t.bits(), -1.0, 1e-12));
    }

    #[test]
    fn transmission3_plus_one_on_fully_redundant_cube() {
        let mut cells = [0.0; 8];
        cells[CellCube::index(false, false, false)] = 50.0;
        cells[CellCube::index(true, true, true)] = 50.0;
        let cube = CellCube::new(cells).unwrap();
        let t = transmission3(&cube).unwrap();
        assert!(close(t.bits(), 1.0, 1e-12));
    }

    #[test]
    fn info_of_message_identical_is_zero() {
        let q = dist(&[0.3, 0.7]);
        assert_eq!(info_of_message(&q, &q).unwrap().bits(), 0.0);
    }

    #[test]
    fn info_of_message_one_of_two_certainty() {
        let q = dist(&[1.0, 0.0]);
        let p = dist(&[0.5, 0.5]);
        assert!(close(info_of_message(&q, &p).unwrap().bits(), 1.0, 1e-12));
    }

    #[test]
    fn info_of_message_hand_value() {
        let q = dist(&[0.75, 0.25]);
        let p = dist(&[0.5, 0.5]);
        let i = info_of_message(&q, &p).unwrap();
        assert!(close(i.bits(), 0.188721875540867, 1e-12));
        assert!(close(i.millibits(), 188.721875540867, 1e-9));
    }

    #[test]
    fn info_of_message_rejects_length_mismatch() {
        let q = dist(&[0.5, 0.5]);
        let p = dist(&[0.5, 0.25, 0.25]);
        assert_eq!(
            info_of_message(&q, &p).unwrap_err(),
            EntropyError::LengthMismatch { observed: 2, predicted: 3 }
        );
    }

    #[test]
    fn info_of_message_rejects_label_mismatch() {
        let q = Distribution::new(vec![0.5, 0.5], Some(vec!["a".into(), "b".into()])).unwrap();
        let p = Distribution::new(vec![0.5, 0.5], Some(vec!["a".into(), "c".into()])).unwrap();
        assert!(matches!(
            info_of_message(&q, &p).unwrap_err(),
            EntropyError::LabelMismatch { index: 1, .. }
        ));
    }

    #[test]
    fn info_of_message_rejects_unsmoothed_zero() {
        let q = dist(&[0.5, 0.5]);
        let p = dist(&[1.0, 0.0]);
        let err = info_of_message(&q, &p).unwrap_err();
        assert_eq!(err, EntropyError::UnsmoothedZero { index: 1, observed: 0.5 });
        assert!(err.to_string().contains("smooth"));
    }
}
