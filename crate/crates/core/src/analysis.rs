//! Classification, threshold cardinalities, incompressibility counts and
//! compressibility-region tables.
//!
//! Every enumeration-based result is computed over raw subsets of cells (no
//! symmetry quotienting) so counts line up with `C(q^N, m)` denominators.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::enumerate::{binomial, binomial_big, Enumeration, Workers};
use crate::error::{Error, Result};
use crate::measures::{beta, ceil_log2, eta, summarize};
use crate::oracle::{CostReport, Evaluator, Metric, TargetFunction};
use crate::space::{CellSet, SampleSpace};
use crate::support::{CellView, SupportSet};

/// Incompressibility predicates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Predicate {
    /// `#_b = N·⌈log2 q⌉`: every informant effectively sends a full symbol.
    MaxRateBits,
    /// `#_n = N`.
    AllInformants,
    /// `β = 1` with the marginal-ambiguity denominator (singletons excluded).
    BetaOne,
}

impl Predicate {
    pub fn name(&self) -> &'static str {
        match self {
            Predicate::MaxRateBits => "max_rate_bits",
            Predicate::AllInformants => "all_informants",
            Predicate::BetaOne => "beta_one",
        }
    }

    pub fn metric(&self) -> Metric {
        match self {
            Predicate::MaxRateBits | Predicate::BetaOne => Metric::Bits,
            Predicate::AllInformants => Metric::Informants,
        }
    }

    /// Evaluates the predicate on a set of cells.
    pub fn holds(&self, ev: &Evaluator, cells: CellSet) -> bool {
        let space = ev.space();
        match self {
            Predicate::MaxRateBits => {
                ev.worst_case(cells, Metric::Bits) == space.max_rate_bits()
            }
            Predicate::AllInformants => {
                ev.worst_case(cells, Metric::Informants) == space.num_informants()
            }
            Predicate::BetaOne => {
                let budget: u32 = (0..space.n())
                    .map(|i| ceil_log2(ev.slices().projection_size(cells, i) as u64))
                    .sum();
                budget > 0 && ev.worst_case(cells, Metric::Bits) == budget
            }
        }
    }
}

/// Which family of thresholds a [`ThresholdSet`] describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Dsc,
    BitwiseOr,
}

impl Mode {
    pub fn function(&self) -> TargetFunction {
        match self {
            Mode::Dsc => TargetFunction::Identity,
            Mode::BitwiseOr => TargetFunction::BitwiseOr,
        }
    }

    pub fn of(function: TargetFunction) -> Self {
        match function {
            TargetFunction::Identity => Mode::Dsc,
            TargetFunction::BitwiseOr => Mode::BitwiseOr,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Dsc => "dsc",
            Mode::BitwiseOr => "bitwise_or",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Formula,
    Oracle,
}

impl Source {
    pub fn name(&self) -> &'static str {
        match self {
            Source::Formula => "formula",
            Source::Oracle => "oracle",
        }
    }
}

/// Threshold cardinalities. `m1`/`m2` refer to bits, `m3`/`m4` to informants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ThresholdSet {
    pub mode: Mode,
    pub source: Source,
    /// Smallest cardinality admitting a bit-incompressible set.
    pub m1: Option<u128>,
    /// Largest cardinality admitting a bit-compressible set.
    pub m2: Option<u128>,
    /// Smallest cardinality admitting an informant-incompressible set.
    pub m3: Option<u128>,
    /// Largest cardinality admitting an informant-compressible set.
    pub m4: Option<u128>,
}

impl ThresholdSet {
    fn empty(mode: Mode, source: Source) -> Self {
        ThresholdSet {
            mode,
            source,
            m1: None,
            m2: None,
            m3: None,
            m4: None,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "mode": self.mode.name(),
            "source": self.source.name(),
            "M1": self.m1.map(|v| v.to_string()),
            "M2": self.m2.map(|v| v.to_string()),
            "M3": self.m3.map(|v| v.to_string()),
            "M4": self.m4.map(|v| v.to_string()),
        })
    }
}

/// Full cost report for one set.
pub fn classify(s: &SupportSet, f: TargetFunction) -> CostReport {
    let space = s.space();
    let ev = Evaluator::new(space, f);
    let measures = summarize(s);
    let bits_strategy = ev.strategy(s.cells(), Metric::Bits);
    let informants_strategy = ev.strategy(s.cells(), Metric::Informants);
    let bits_worst = bits_strategy.worst_case();
    let informants_worst = informants_strategy.worst_case();
    let beta = beta(&measures, bits_worst).expect("oracle respects the naive budget");
    let eta = eta(&measures, informants_worst).expect("oracle queries at most N informants");
    CostReport {
        function: f,
        bits_worst,
        informants_worst,
        bit_compressible: beta.is_compressible(),
        informant_compressible: eta.is_compressible(),
        max_rate: bits_worst == space.max_rate_bits(),
        all_informants: informants_worst == space.num_informants(),
        measures,
        beta,
        eta,
        bits_strategy,
        informants_strategy,
    }
}

/// Closed-form thresholds. Bitwise OR only has `M1` and `M3`.
pub fn formula_thresholds(q: u32, n: u32, mode: Mode) -> Result<ThresholdSet> {
    if q < 2 || n < 1 {
        return Err(Error::InvalidSpace(format!("need q >= 2 and N >= 1, got {q}x{n}")));
    }
    let overflow = || Error::InvalidArgument(format!("thresholds for {q}x{n} overflow u128"));
    let (q, n) = (q as u128, n as u128);
    let q_pow = q.checked_pow(n as u32 - 1).ok_or_else(overflow)?;
    let m1 = n * (q - 1) + 1;
    let m3 = n + 1;
    let mut t = ThresholdSet::empty(mode, Source::Formula);
    t.m1 = Some(m1);
    t.m3 = Some(m3);
    if mode == Mode::Dsc {
        t.m2 = Some(q_pow.checked_mul(q - 1).ok_or_else(overflow)?);
        t.m4 = Some(q_pow);
    }
    Ok(t)
}

/// Smallest cardinality with a set satisfying `pred`, scanning upwards.
fn first_satisfying(
    space: SampleSpace,
    ev: &Evaluator,
    pred: Predicate,
    guard: u128,
    workers: &Workers,
) -> Result<Option<u128>> {
    for m in 1..=space.total_cells() {
        let en = Enumeration::new(space, m, guard)?;
        if workers.any(&en, |s| pred.holds(ev, s.cells())) {
            return Ok(Some(m as u128));
        }
    }
    Ok(None)
}

/// Largest cardinality with a set violating `pred`, scanning downwards.
fn last_violating(
    space: SampleSpace,
    ev: &Evaluator,
    pred: Predicate,
    guard: u128,
    workers: &Workers,
) -> Result<Option<u128>> {
    for m in (1..=space.total_cells()).rev() {
        let en = Enumeration::new(space, m, guard)?;
        if workers.any(&en, |s| !pred.holds(ev, s.cells())) {
            return Ok(Some(m as u128));
        }
    }
    Ok(None)
}

/// Thresholds for one predicate by exhaustive enumeration. Bit predicates
/// fill `m1`/`m2`; `AllInformants` fills `m3`/`m4`.
pub fn oracle_thresholds(
    space: SampleSpace,
    f: TargetFunction,
    pred: Predicate,
    guard: u128,
    workers: &Workers,
) -> Result<ThresholdSet> {
    let ev = Evaluator::new(space, f);
    let low = first_satisfying(space, &ev, pred, guard, workers)?;
    let high = last_violating(space, &ev, pred, guard, workers)?;
    let mut t = ThresholdSet::empty(Mode::of(f), Source::Oracle);
    match pred.metric() {
        Metric::Bits => {
            t.m1 = low;
            t.m2 = high;
        }
        Metric::Informants => {
            t.m3 = low;
            t.m4 = high;
        }
    }
    Ok(t)
}

/// `M1`–`M4` from both standard predicates.
pub fn oracle_thresholds_all(
    space: SampleSpace,
    f: TargetFunction,
    guard: u128,
    workers: &Workers,
) -> Result<ThresholdSet> {
    let bits = oracle_thresholds(space, f, Predicate::MaxRateBits, guard, workers)?;
    let informants = oracle_thresholds(space, f, Predicate::AllInformants, guard, workers)?;
    Ok(ThresholdSet {
        m3: informants.m3,
        m4: informants.m4,
        ..bits
    })
}

/// Exact count of incompressible sets at one cardinality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountReport {
    pub space: SampleSpace,
    pub cardinality: u32,
    pub predicate: Predicate,
    pub function: TargetFunction,
    pub incompressible_count: BigUint,
    pub total_sets: BigUint,
    pub fraction: BigRational,
}

impl CountReport {
    pub fn to_json(&self) -> Value {
        json!({
            "space": self.space.to_string(),
            "cardinality": self.cardinality,
            "predicate": self.predicate.name(),
            "function": self.function.name(),
            "incompressible_count": self.incompressible_count.to_string(),
            "total_sets": self.total_sets.to_string(),
            "fraction": big_fraction_json(&self.fraction),
        })
    }

    /// One CSV row under the region-table header.
    pub fn to_csv(&self) -> String {
        let exists = !self.incompressible_count.is_zero();
        let all = self.incompressible_count == self.total_sets;
        let label = RegionLabel::from_flags(exists, all);
        format!(
            "{CSV_HEADER}\n{},{},{},{},{},{}\n",
            self.cardinality,
            exists,
            all,
            label.name(),
            self.incompressible_count,
            self.total_sets
        )
    }
}

fn to_big_fraction(count: &BigUint, total: &BigUint) -> BigRational {
    BigRational::new(count.clone().into(), total.clone().into())
}

/// `{"exact": "num/den", "approx": "d.dddddd"}` for an exact fraction.
pub fn big_fraction_json(r: &BigRational) -> Value {
    json!({
        "exact": format!("{}/{}", r.numer(), r.denom()),
        "approx": decimal_approx(r, 6),
    })
}

/// [`big_fraction_json`] for a machine-word ratio.
pub fn fraction_json(r: &num_rational::Ratio<u64>) -> Value {
    big_fraction_json(&to_big_fraction(&BigUint::from(*r.numer()), &BigUint::from(*r.denom())))
}

/// Fixed-point rendering, rounded half up.
pub fn decimal_approx(r: &BigRational, digits: u32) -> String {
    let negative = r.numer() < &num_bigint::BigInt::zero();
    let numer = r.numer().magnitude().clone();
    let denom = r.denom().magnitude().clone();
    let scale = BigUint::from(10u32).pow(digits);
    let scaled = (numer * &scale * 2u32 + &denom) / (denom * 2u32);
    let int_part = &scaled / &scale;
    let frac_part = &scaled % &scale;
    let mut out = String::new();
    if negative && !scaled.is_zero() {
        out.push('-');
    }
    write!(out, "{int_part}").unwrap();
    if digits > 0 {
        write!(out, ".{:0>width$}", frac_part.to_string(), width = digits as usize).unwrap();
    }
    out
}

pub fn count_at_cardinality(
    space: SampleSpace,
    cardinality: u32,
    pred: Predicate,
    f: TargetFunction,
    guard: u128,
    workers: &Workers,
) -> Result<CountReport> {
    let en = Enumeration::new(space, cardinality, guard)?;
    let ev = Evaluator::new(space, f);
    let count = workers.count(&en, |s| pred.holds(&ev, s.cells()));
    let count = BigUint::from(count);
    let total = BigUint::from(en.total());
    Ok(CountReport {
        space,
        cardinality,
        predicate: pred,
        function: f,
        fraction: to_big_fraction(&count, &total),
        incompressible_count: count,
        total_sets: total,
    })
}

/// Closed-form incompressible counts at `M1` and `M3` and their fractions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaCounts {
    pub m1: BigUint,
    /// `q^(N-1)·((N-1)(q-1)+1)`.
    pub m1_count: BigUint,
    /// `C(q^N, M1)`.
    pub m1_total: BigUint,
    pub m1_fraction: BigRational,
    pub m3: BigUint,
    /// `q^N·(q-1)^N`.
    pub m3_count: BigUint,
    /// `C(q^N, M3)`.
    pub m3_total: BigUint,
    pub m3_fraction: BigRational,
}

impl FormulaCounts {
    pub fn to_json(&self) -> Value {
        json!({
            "M1": self.m1.to_string(),
            "M1_count": self.m1_count.to_string(),
            "M1_total": self.m1_total.to_string(),
            "M1_fraction": big_fraction_json(&self.m1_fraction),
            "M3": self.m3.to_string(),
            "M3_count": self.m3_count.to_string(),
            "M3_total": self.m3_total.to_string(),
            "M3_fraction": big_fraction_json(&self.m3_fraction),
        })
    }
}

pub fn formula_counts(q: u32, n: u32) -> Result<FormulaCounts> {
    if q < 2 || n < 1 {
        return Err(Error::InvalidSpace(format!("need q >= 2 and N >= 1, got {q}x{n}")));
    }
    let qb = BigUint::from(q);
    let q1 = BigUint::from(q - 1);
    let cells = qb.pow(n);
    let m1 = BigUint::from(n) * &q1 + 1u32;
    let m1_count = qb.pow(n - 1) * (BigUint::from(n - 1) * &q1 + 1u32);
    let m3 = BigUint::from(n + 1);
    let m3_count = qb.pow(n) * q1.pow(n);
    let to_u64 = |b: &BigUint| {
        u64::try_from(b).map_err(|_| Error::InvalidArgument(format!("cardinality {b} too large")))
    };
    let m1_total = binomial_big(&cells, to_u64(&m1)?);
    let m3_total = binomial_big(&cells, to_u64(&m3)?);
    Ok(FormulaCounts {
        m1_fraction: to_big_fraction(&m1_count, &m1_total),
        m3_fraction: to_big_fraction(&m3_count, &m3_total),
        m1,
        m1_count,
        m1_total,
        m3,
        m3_count,
        m3_total,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropositionRow {
    pub q: u32,
    pub n: u32,
    pub thresholds: ThresholdSet,
    /// `M3 < M1 < M4 < M2`.
    pub holds: bool,
}

/// Evaluates the strict chain `M3 < M1 < M4 < M2` from the formulas.
pub fn verify_proposition(
    q_range: std::ops::RangeInclusive<u32>,
    n_range: std::ops::RangeInclusive<u32>,
) -> Result<Vec<PropositionRow>> {
    let mut rows = Vec::new();
    for q in q_range {
        for n in n_range.clone() {
            let t = formula_thresholds(q, n, Mode::Dsc)?;
            let (m1, m2, m3, m4) = (
                t.m1.unwrap(),
                t.m2.unwrap(),
                t.m3.unwrap(),
                t.m4.unwrap(),
            );
            rows.push(PropositionRow {
                q,
                n,
                thresholds: t,
                holds: m3 < m1 && m1 < m4 && m4 < m2,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionLabel {
    AllCompressible,
    Mixed,
    AllIncompressible,
}

impl RegionLabel {
    pub fn from_flags(exists: bool, all: bool) -> Self {
        if all {
            RegionLabel::AllIncompressible
        } else if exists {
            RegionLabel::Mixed
        } else {
            RegionLabel::AllCompressible
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RegionLabel::AllCompressible => "all_compressible",
            RegionLabel::Mixed => "mixed",
            RegionLabel::AllIncompressible => "all_incompressible",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionRow {
    pub cardinality: u32,
    pub exists_incompressible: bool,
    pub all_incompressible: bool,
    pub label: RegionLabel,
    /// Exact counts (oracle mode only).
    pub count: Option<u128>,
    pub total: u128,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionTable {
    pub space: SampleSpace,
    pub function: TargetFunction,
    pub predicate: Predicate,
    pub source: Source,
    pub rows: Vec<RegionRow>,
}

pub const CSV_HEADER: &str = "cardinality,exists_incompressible,all_incompressible,label,count,total";

impl RegionTable {
    /// Label runs as `(label, first m, last m)`.
    pub fn bands(&self) -> Vec<(RegionLabel, u32, u32)> {
        let mut out: Vec<(RegionLabel, u32, u32)> = Vec::new();
        for row in &self.rows {
            match out.last_mut() {
                Some((label, _, end)) if *label == row.label => *end = row.cardinality,
                _ => out.push((row.label, row.cardinality, row.cardinality)),
            }
        }
        out
    }

    /// Checks the monotonicity and label invariants, returning the first offending cardinality.
    pub fn check_invariants(&self) -> std::result::Result<(), u32> {
        let mut prev: Option<&RegionRow> = None;
        for row in &self.rows {
            let label_ok = row.label == RegionLabel::from_flags(row.exists_incompressible, row.all_incompressible);
            let implication_ok = !row.all_incompressible || row.exists_incompressible;
            let monotone_ok = prev.is_none_or(|p| {
                (!p.exists_incompressible || row.exists_incompressible)
                    && (!p.all_incompressible || row.all_incompressible)
            });
            if !(label_ok && implication_ok && monotone_ok) {
                return Err(row.cardinality);
            }
            prev = Some(row);
        }
        Ok(())
    }

    /// First cardinality with an incompressible set (`M1` or `M3`).
    pub fn first_exists(&self) -> Option<u32> {
        self.rows
            .iter()
            .find(|r| r.exists_incompressible)
            .map(|r| r.cardinality)
    }

    /// Last cardinality with a compressible set (`M2` or `M4`).
    pub fn last_not_all(&self) -> Option<u32> {
        self.rows
            .iter()
            .rev()
            .find(|r| !r.all_incompressible)
            .map(|r| r.cardinality)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.cardinality,
                r.exists_incompressible,
                r.all_incompressible,
                r.label.name(),
                r.count.map(|c| c.to_string()).unwrap_or_default(),
                r.total
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "space": self.space.to_string(),
            "function": self.function.name(),
            "predicate": self.predicate.name(),
            "source": self.source.name(),
            "rows": self.rows.iter().map(|r| json!({
                "cardinality": r.cardinality,
                "exists_incompressible": r.exists_incompressible,
                "all_incompressible": r.all_incompressible,
                "label": r.label.name(),
                "count": r.count.map(|c| c.to_string()),
                "total": r.total.to_string(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Per-cardinality compressibility flags for `m = 1..=q^N`.
///
/// Oracle mode counts every subset. Formula mode (identity only) derives the
/// flags from `M1`/`M2` or `M3`/`M4`.
pub fn region_table(
    space: SampleSpace,
    f: TargetFunction,
    pred: Predicate,
    source: Source,
    guard: u128,
    workers: &Workers,
) -> Result<RegionTable> {
    let cells = space.total_cells();
    let rows = match source {
        Source::Oracle => {
            let ev = Evaluator::new(space, f);
            let mut rows = Vec::with_capacity(cells as usize);
            for m in 1..=cells {
                let en = Enumeration::new(space, m, guard)?;
                let count = workers.count(&en, |s| pred.holds(&ev, s.cells()));
                let exists = count > 0;
                let all = count == en.total();
                rows.push(RegionRow {
                    cardinality: m,
                    exists_incompressible: exists,
                    all_incompressible: all,
                    label: RegionLabel::from_flags(exists, all),
                    count: Some(count),
                    total: en.total(),
                });
            }
            rows
        }
        Source::Formula => {
            if f != TargetFunction::Identity || pred == Predicate::BetaOne {
                return Err(Error::InvalidArgument(
                    "formula regions exist only for identity with max-rate or all-informants"
                        .to_string(),
                ));
            }
            let t = formula_thresholds(space.alphabet_size(), space.num_informants(), Mode::Dsc)?;
            let (low, high) = match pred.metric() {
                Metric::Bits => (t.m1.unwrap(), t.m2.unwrap()),
                Metric::Informants => (t.m3.unwrap(), t.m4.unwrap()),
            };
            (1..=cells)
                .map(|m| {
                    let exists = m as u128 >= low;
                    let all = m as u128 > high;
                    RegionRow {
                        cardinality: m,
                        exists_incompressible: exists,
                        all_incompressible: all,
                        label: RegionLabel::from_flags(exists, all),
                        count: None,
                        total: binomial(cells, m),
                    }
                })
                .collect()
        }
    };
    Ok(RegionTable {
        space,
        function: f,
        predicate: pred,
        source,
        rows,
    })
}

/// First set (in combination order) at cardinality `m` satisfying the
/// predicate, or violating it when `negate` is set.
pub fn find_witness(
    space: SampleSpace,
    cardinality: u32,
    pred: Predicate,
    f: TargetFunction,
    negate: bool,
    guard: u128,
    workers: &Workers,
) -> Result<Option<SupportSet>> {
    let en = Enumeration::new(space, cardinality, guard)?;
    let ev = Evaluator::new(space, f);
    Ok(workers.find_first(&en, |s| pred.holds(&ev, s.cells()) != negate))
}

/// Every set at cardinality `m` satisfying the predicate, in combination order.
pub fn all_witnesses(
    space: SampleSpace,
    cardinality: u32,
    pred: Predicate,
    f: TargetFunction,
    guard: u128,
    workers: &Workers,
) -> Result<Vec<SupportSet>> {
    let en = Enumeration::new(space, cardinality, guard)?;
    let ev = Evaluator::new(space, f);
    Ok(workers.map_reduce(
        &en,
        Vec::new,
        |mut acc, _, s| {
            if pred.holds(&ev, s.cells()) {
                acc.push(s);
            }
            acc
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    ))
}

/// `count / total` in lowest terms.
pub fn fraction_of(count: u128, total: u128) -> BigRational {
    to_big_fraction(&BigUint::from(count), &BigUint::from(total))
}
