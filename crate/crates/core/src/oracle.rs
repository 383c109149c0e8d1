//! Exact worst-case protocol costs in the asymmetric sink/informant model.
//!
//! Only the sink knows the support set. In the block-serial model it queries
//! one informant at a time, choosing the next informant from the answers so
//! far. A queried informant is resolved completely and is charged
//! `⌈log2 k⌉` bits, where `k` is the number of values that informant can
//! still take given the current consistent set. Downlink bits are free.
//!
//! ```text
//! B(C) = 0                                   if f is constant on C
//!      = min_i [ ⌈log2 |C_i|⌉ + max_v B(C | x_i = v) ]   over i with |C_i| ≥ 2
//! Q(C) = same recursion with each query costing 1
//! ```
//!
//! [`worst_case_bits_interleaved`] is a separate diagnostic oracle in which the
//! sink may ask arbitrary one-bit membership questions of any informant in any
//! order. It is never used for threshold or count verification.

use std::collections::HashMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::measures::{ceil_log2, MeasureSummary, NormalizedCost};
use crate::space::{CellSet, Point, SampleSpace, Slices};
use crate::support::{CellView, SupportSet};

/// Default cap on memo entries for the diagnostic oracle.
pub const DEFAULT_STATE_CAP: usize = 1 << 22;

/// What the sink must learn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TargetFunction {
    /// The full data vector.
    Identity,
    /// Bitwise OR of the standard binary encodings of the symbols, each
    /// `⌈log2 q⌉` bits wide.
    BitwiseOr,
}

impl TargetFunction {
    pub fn name(&self) -> &'static str {
        match self {
            TargetFunction::Identity => "identity",
            TargetFunction::BitwiseOr => "bitwise_or",
        }
    }

    pub fn eval(&self, space: SampleSpace, point: &Point) -> Result<Output> {
        space.check_point(point)?;
        Ok(match self {
            TargetFunction::Identity => Output::Point(point.clone()),
            TargetFunction::BitwiseOr => {
                Output::Value(point.coords().iter().fold(0, |acc, &c| acc | c))
            }
        })
    }

    fn cell_key(&self, space: SampleSpace, cell: u32) -> u32 {
        match self {
            TargetFunction::Identity => cell,
            TargetFunction::BitwiseOr => {
                (0..space.n()).fold(0, |acc, i| acc | space.coord_of(cell, i))
            }
        }
    }
}

/// Value of the target function.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Output {
    Point(Point),
    Value(u32),
}

impl Output {
    pub fn to_json(&self) -> Value {
        match self {
            Output::Point(p) => json!(p.coords()),
            Output::Value(v) => json!(v),
        }
    }
}

/// Which cost a strategy minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Worst-case informant bits, `#_b`.
    Bits,
    /// Worst-case informants queried, `#_n`.
    Informants,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Bits => "bits",
            Metric::Informants => "informants",
        }
    }
}

/// Precomputed tables for one `(space, f)` pair. Cheap to share across threads.
#[derive(Clone, Debug)]
pub struct Evaluator {
    slices: Slices,
    function: TargetFunction,
    /// For `BitwiseOr`: mask of cells per output value.
    classes: Vec<CellSet>,
    keys: Vec<u32>,
}

impl Evaluator {
    pub fn new(space: SampleSpace, function: TargetFunction) -> Self {
        let keys: Vec<u32> = (0..space.total_cells())
            .map(|k| function.cell_key(space, k))
            .collect();
        let classes = match function {
            TargetFunction::Identity => Vec::new(),
            TargetFunction::BitwiseOr => {
                let width = keys.iter().copied().max().unwrap_or(0) as usize + 1;
                let mut classes = vec![CellSet::EMPTY; width];
                for (k, &key) in keys.iter().enumerate() {
                    classes[key as usize].insert(k as u32);
                }
                classes
            }
        };
        Evaluator {
            slices: space.slices(),
            function,
            classes,
            keys,
        }
    }

    pub fn space(&self) -> SampleSpace {
        self.slices.space()
    }

    pub fn function(&self) -> TargetFunction {
        self.function
    }

    pub fn slices(&self) -> &Slices {
        &self.slices
    }

    /// True when `f` takes a single value on `cells` (or `cells` is empty).
    #[inline]
    pub fn is_constant(&self, cells: CellSet) -> bool {
        match self.function {
            TargetFunction::Identity => cells.len() <= 1,
            TargetFunction::BitwiseOr => match cells.first() {
                None => true,
                Some(k) => cells.is_subset(self.classes[self.keys[k as usize] as usize]),
            },
        }
    }

    /// `|f(cells)|`.
    pub fn distinct_outputs(&self, cells: CellSet) -> u32 {
        match self.function {
            TargetFunction::Identity => cells.len(),
            TargetFunction::BitwiseOr => self
                .classes
                .iter()
                .filter(|c| !c.intersect(cells).is_empty())
                .count() as u32,
        }
    }

    fn output_of(&self, cell: u32) -> Output {
        match self.function {
            TargetFunction::Identity => Output::Point(self.space().index_point(cell)),
            TargetFunction::BitwiseOr => Output::Value(self.keys[cell as usize]),
        }
    }

    /// Optimal block-serial cost of `cells` under `metric`.
    pub fn worst_case(&self, cells: CellSet, metric: Metric) -> u32 {
        BlockSerial::new(self, metric).cost(cells)
    }

    /// Optimal cost together with the extracted strategy.
    pub fn strategy(&self, cells: CellSet, metric: Metric) -> StrategyTree {
        let mut solver = BlockSerial::new(self, metric);
        let root = solver.extract(cells);
        StrategyTree {
            space: self.space(),
            function: self.function,
            metric,
            root,
        }
    }
}

struct BlockSerial<'a> {
    ev: &'a Evaluator,
    metric: Metric,
    memo: HashMap<u64, u32>,
}

impl<'a> BlockSerial<'a> {
    fn new(ev: &'a Evaluator, metric: Metric) -> Self {
        BlockSerial {
            ev,
            metric,
            memo: HashMap::new(),
        }
    }

    fn query_cost(&self, candidates: u32) -> u32 {
        match self.metric {
            Metric::Bits => ceil_log2(candidates as u64),
            Metric::Informants => 1,
        }
    }

    fn cost(&mut self, cells: CellSet) -> u32 {
        if self.ev.is_constant(cells) {
            return 0;
        }
        if let Some(&c) = self.memo.get(&cells.bits()) {
            return c;
        }
        let space = self.ev.space();
        let mut best = u32::MAX;
        for i in 0..space.n() {
            let proj = self.ev.slices.projection_mask(cells, i);
            let k = proj.count_ones();
            if k < 2 {
                continue;
            }
            let here = self.query_cost(k);
            if here >= best {
                continue;
            }
            let mut worst = 0;
            for v in CellSet(proj) {
                let child = cells.intersect(self.ev.slices.slice(i, v));
                worst = worst.max(self.cost(child));
                if here + worst >= best {
                    break;
                }
            }
            best = best.min(here + worst);
        }
        debug_assert!(best != u32::MAX, "non-constant set has a useful query");
        self.memo.insert(cells.bits(), best);
        best
    }

    /// Builds the tree, breaking ties by the lowest informant index.
    fn extract(&mut self, cells: CellSet) -> StrategyNode {
        if self.ev.is_constant(cells) {
            let first = cells.first().expect("consistent sets in a strategy are nonempty");
            return StrategyNode::Leaf {
                consistent: cells,
                output: self.ev.output_of(first),
            };
        }
        let target = self.cost(cells);
        let space = self.ev.space();
        for i in 0..space.n() {
            let proj = self.ev.slices.projection_mask(cells, i);
            let k = proj.count_ones();
            if k < 2 {
                continue;
            }
            let worst = CellSet(proj)
                .iter()
                .map(|v| self.cost(cells.intersect(self.ev.slices.slice(i, v))))
                .max()
                .unwrap_or(0);
            if self.query_cost(k) + worst == target {
                let candidates: Vec<u32> = CellSet(proj).iter().collect();
                let children = candidates
                    .iter()
                    .map(|&v| self.extract(cells.intersect(self.ev.slices.slice(i, v))))
                    .collect();
                return StrategyNode::Query {
                    informant: i,
                    candidates,
                    children,
                    consistent: cells,
                    worst_case: target,
                };
            }
        }
        unreachable!("optimal value is attained by some informant")
    }
}

/// Node of an adaptive sink strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrategyNode {
    Leaf {
        consistent: CellSet,
        output: Output,
    },
    Query {
        informant: usize,
        /// Sorted projection of the consistent set on `informant`; one child each.
        candidates: Vec<u32>,
        children: Vec<StrategyNode>,
        consistent: CellSet,
        worst_case: u32,
    },
}

impl StrategyNode {
    pub fn consistent(&self) -> CellSet {
        match self {
            StrategyNode::Leaf { consistent, .. } | StrategyNode::Query { consistent, .. } => {
                *consistent
            }
        }
    }

    /// Worst-case remaining cost annotation.
    pub fn worst_case(&self) -> u32 {
        match self {
            StrategyNode::Leaf { .. } => 0,
            StrategyNode::Query { worst_case, .. } => *worst_case,
        }
    }

    fn to_json(&self, space: SampleSpace) -> Value {
        let points: Vec<Vec<u32>> = self
            .consistent()
            .iter()
            .map(|k| space.index_point(k).coords().to_vec())
            .collect();
        match self {
            StrategyNode::Leaf { output, .. } => json!({
                "kind": "leaf",
                "output": output.to_json(),
                "consistent": points,
                "worst_case": 0,
            }),
            StrategyNode::Query {
                informant,
                candidates,
                children,
                worst_case,
                ..
            } => json!({
                "kind": "query",
                "informant": informant,
                "candidates": candidates,
                "consistent": points,
                "worst_case": worst_case,
                "children": children.iter().map(|c| c.to_json(space)).collect::<Vec<_>>(),
            }),
        }
    }
}

/// Adaptive strategy with its worst-case cost annotations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyTree {
    pub space: SampleSpace,
    pub function: TargetFunction,
    pub metric: Metric,
    pub root: StrategyNode,
}

impl StrategyTree {
    pub fn worst_case(&self) -> u32 {
        self.root.worst_case()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "function": self.function.name(),
            "metric": self.metric.name(),
            "worst_case": self.worst_case(),
            "root": self.root.to_json(self.space),
        })
    }
}

/// One answered query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptStep {
    pub informant: usize,
    pub value: u32,
    /// `⌈log2 |candidates|⌉` at the node where the query was made.
    pub bits: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub steps: Vec<TranscriptStep>,
    pub output: Output,
}

impl Transcript {
    pub fn total_bits(&self) -> u32 {
        self.steps.iter().map(|s| s.bits).sum()
    }

    pub fn informants_queried(&self) -> u32 {
        self.steps.len() as u32
    }

    /// Cost of this run under the given metric.
    pub fn cost(&self, metric: Metric) -> u32 {
        match metric {
            Metric::Bits => self.total_bits(),
            Metric::Informants => self.informants_queried(),
        }
    }
}

/// Runs a strategy against the realized data vector `point`.
pub fn simulate(strategy: &StrategyTree, point: &Point) -> Result<Transcript> {
    let space = strategy.space;
    let index = space
        .point_index(point)
        .map_err(|_| Error::PointNotInSupport(point.coords().to_vec()))?;
    if !strategy.root.consistent().contains(index) {
        return Err(Error::PointNotInSupport(point.coords().to_vec()));
    }
    let mut steps = Vec::new();
    let mut node = &strategy.root;
    loop {
        match node {
            StrategyNode::Leaf { output, .. } => {
                return Ok(Transcript {
                    steps,
                    output: output.clone(),
                })
            }
            StrategyNode::Query {
                informant,
                candidates,
                children,
                ..
            } => {
                let value = point.coords()[*informant];
                let slot = candidates
                    .binary_search(&value)
                    .expect("consistent point answers with a listed candidate");
                steps.push(TranscriptStep {
                    informant: *informant,
                    value,
                    bits: ceil_log2(candidates.len() as u64),
                });
                node = &children[slot];
            }
        }
    }
}

/// `#_b` under the block-serial model, with an optimal strategy.
pub fn worst_case_bits(s: &SupportSet, f: TargetFunction) -> (u32, StrategyTree) {
    let tree = Evaluator::new(s.space(), f).strategy(s.cells(), Metric::Bits);
    (tree.worst_case(), tree)
}

/// `#_n` under the block-serial model, with an optimal strategy.
pub fn worst_case_informants(s: &SupportSet, f: TargetFunction) -> (u32, StrategyTree) {
    let tree = Evaluator::new(s.space(), f).strategy(s.cells(), Metric::Informants);
    (tree.worst_case(), tree)
}

/// Block-serial `#_b` when informants must be queried in the given order
/// (informants that are already determined are skipped at no cost).
pub fn worst_case_bits_fixed_order(
    s: &SupportSet,
    f: TargetFunction,
    order: &[usize],
) -> Result<u32> {
    let space = s.space();
    let mut seen = vec![false; space.n()];
    for &i in order {
        space.check_informant(i)?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidPermutation(format!(
                "informant {i} repeated in order {order:?}"
            )));
        }
    }
    if seen.iter().any(|&x| !x) {
        return Err(Error::InvalidPermutation(format!(
            "order {order:?} does not cover all informants"
        )));
    }
    let ev = Evaluator::new(space, f);
    fn go(ev: &Evaluator, cells: CellSet, order: &[usize]) -> u32 {
        if ev.is_constant(cells) {
            return 0;
        }
        let (&i, rest) = order.split_first().expect("all informants resolved");
        let proj = ev.slices().projection_mask(cells, i);
        let here = ceil_log2(proj.count_ones() as u64);
        here + CellSet(proj)
            .iter()
            .map(|v| go(ev, cells.intersect(ev.slices().slice(i, v)), rest))
            .max()
            .unwrap_or(0)
    }
    Ok(go(&ev, s.cells(), order))
}

/// Diagnostic bit-adaptive oracle: the sink asks one-bit questions
/// "is x_i ∈ T?" of any informant, interleaving freely, until `f` is
/// determined. Returns the optimal worst-case number of answer bits.
pub fn worst_case_bits_interleaved(
    s: &SupportSet,
    f: TargetFunction,
    state_cap: usize,
) -> Result<u32> {
    let ev = Evaluator::new(s.space(), f);
    let mut solver = Interleaved {
        ev: &ev,
        memo: HashMap::new(),
        cap: state_cap,
    };
    solver.cost(s.cells())
}

struct Interleaved<'a> {
    ev: &'a Evaluator,
    memo: HashMap<u64, u32>,
    cap: usize,
}

impl Interleaved<'_> {
    fn cost(&mut self, cells: CellSet) -> Result<u32> {
        if self.ev.is_constant(cells) {
            return Ok(0);
        }
        if let Some(&c) = self.memo.get(&cells.bits()) {
            return Ok(c);
        }
        let lower = ceil_log2(self.ev.distinct_outputs(cells) as u64);
        let mut best = u32::MAX;
        'search: for i in 0..self.ev.space().n() {
            let proj = self.ev.slices.projection_mask(cells, i);
            if proj.count_ones() < 2 {
                continue;
            }
            // Questions T and its complement are equivalent: fix the lowest
            // value inside T and range over the remaining values.
            let low = proj & proj.wrapping_neg();
            let rest = proj & !low;
            let mut sub = rest;
            loop {
                let t = sub | low;
                if t != proj {
                    let inside = self.select(cells, i, t);
                    let outside = cells.minus(inside);
                    let a = self.cost(inside)?;
                    if 1 + a < best {
                        let b = self.cost(outside)?;
                        best = best.min(1 + a.max(b));
                        if best == lower {
                            break 'search;
                        }
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        if self.memo.len() >= self.cap {
            return Err(Error::StateSpaceTooLarge { limit: self.cap });
        }
        self.memo.insert(cells.bits(), best);
        Ok(best)
    }

    fn select(&self, cells: CellSet, informant: usize, values: u64) -> CellSet {
        CellSet(values).iter().fold(CellSet::EMPTY, |acc, v| {
            acc.union(cells.intersect(self.ev.slices.slice(informant, v)))
        })
    }
}

/// Per-set summary combining measures and both block-serial oracles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CostReport {
    pub function: TargetFunction,
    pub measures: MeasureSummary,
    pub bits_worst: u32,
    pub informants_worst: u32,
    pub beta: NormalizedCost,
    pub eta: NormalizedCost,
    /// β < 1.
    pub bit_compressible: bool,
    /// η < 1.
    pub informant_compressible: bool,
    /// `#_b = N·⌈log2 q⌉`.
    pub max_rate: bool,
    /// `#_n = N`.
    pub all_informants: bool,
    pub bits_strategy: StrategyTree,
    pub informants_strategy: StrategyTree,
}

impl CostReport {
    pub fn degenerate(&self) -> bool {
        self.beta.degenerate || self.eta.degenerate
    }
}
