//! Cardinality-based worst-case measures: ambiguity, marginal ambiguities,
//! sparsity and the β / η ratios.
//!
//! Ratios are exact. `β = 1` versus `β < 1` is a classification boundary, so
//! floating point only appears when rendering.

use num_rational::Ratio;
use crate::error::{Error, Result};
use crate::support::{CellView, SupportSet};

/// Smallest `b` with `2^b ≥ k`.
pub fn ceil_log2(k: u64) -> u32 {
    assert!(k >= 1, "ceil_log2 of 0");
    if k == 1 {
        0
    } else {
        64 - (k - 1).leading_zeros()
    }
}

/// Checked variant of [`ceil_log2`] for signed input.
pub fn try_ceil_log2(k: i64) -> Result<u32> {
    if k <= 0 {
        return Err(Error::InvalidArgument(format!(
            "ceil_log2 needs k >= 1, got {k}"
        )));
    }
    Ok(ceil_log2(k as u64))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureSummary {
    /// μ, the number of points.
    pub ambiguity: u32,
    /// μ_{X_i} for each informant.
    pub marginal_ambiguities: Vec<u32>,
    /// γ = μ / q^N.
    pub sparsity: Ratio<u64>,
    /// Σ_i ⌈log μ_{X_i}⌉.
    pub naive_bit_budget: u32,
    /// ⌈log μ⌉.
    pub min_bits_bound: u32,
}

pub fn summarize(s: &SupportSet) -> MeasureSummary {
    let space = s.space();
    let ambiguity = s.len() as u32;
    let slices = space.slices();
    let marginal_ambiguities: Vec<u32> = (0..space.n())
        .map(|i| slices.projection_size(s.cells(), i))
        .collect();
    let naive_bit_budget = marginal_ambiguities
        .iter()
        .map(|&m| ceil_log2(m as u64))
        .sum();
    MeasureSummary {
        ambiguity,
        marginal_ambiguities,
        sparsity: Ratio::new(ambiguity as u64, space.total_cells() as u64),
        naive_bit_budget,
        min_bits_bound: ceil_log2(ambiguity as u64),
    }
}

/// A normalized cost together with the singleton-support flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NormalizedCost {
    pub value: Ratio<u64>,
    pub degenerate: bool,
}

impl NormalizedCost {
    fn degenerate() -> Self {
        NormalizedCost {
            value: Ratio::from_integer(0),
            degenerate: true,
        }
    }

    /// Strictly below one.
    pub fn is_compressible(&self) -> bool {
        self.value < Ratio::from_integer(1)
    }
}

/// β = #_b / Σ_i ⌈log μ_{X_i}⌉. Zero and flagged when the budget is zero.
pub fn beta(summary: &MeasureSummary, bits_worst: u32) -> Result<NormalizedCost> {
    if bits_worst > summary.naive_bit_budget {
        return Err(Error::InconsistentInput(format!(
            "#_b = {bits_worst} exceeds the naive budget {}",
            summary.naive_bit_budget
        )));
    }
    if summary.naive_bit_budget == 0 {
        return Ok(NormalizedCost::degenerate());
    }
    Ok(NormalizedCost {
        value: Ratio::new(bits_worst as u64, summary.naive_bit_budget as u64),
        degenerate: false,
    })
}

/// η = #_n / N. Zero and flagged for singleton supports.
pub fn eta(summary: &MeasureSummary, informants_worst: u32) -> Result<NormalizedCost> {
    let n = summary.marginal_ambiguities.len() as u32;
    if informants_worst > n {
        return Err(Error::InconsistentInput(format!(
            "#_n = {informants_worst} exceeds N = {n}"
        )));
    }
    if summary.ambiguity == 1 {
        return Ok(NormalizedCost::degenerate());
    }
    Ok(NormalizedCost {
        value: Ratio::new(informants_worst as u64, n as u64),
        degenerate: false,
    })
}

/// Renders an exact ratio as `"num/den"`.
pub fn ratio_string<T: std::fmt::Display + Clone + num_integer::Integer>(r: &Ratio<T>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}
