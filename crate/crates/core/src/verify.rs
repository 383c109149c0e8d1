//! Verification suites: each check compares an exhaustive or closed-form
//! result against its reference and carries a counterexample on failure.

use serde_json::{json, Value};

use crate::analysis::{
    all_witnesses, count_at_cardinality, formula_counts, formula_thresholds, oracle_thresholds,
    region_table, verify_proposition, Mode, Predicate, Source,
};
use crate::enumerate::Workers;
use crate::error::Result;
use crate::measures::{ceil_log2, summarize};
use crate::oracle::{
    simulate, worst_case_bits_interleaved, Evaluator, Metric, TargetFunction,
};
use crate::space::{CellSet, SampleSpace};
use crate::support::{CellView, Format, SupportSet};
use crate::symmetry::{apply_symmetry, Symmetry};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub expected: Value,
    pub actual: Value,
    /// JSON-serialized support set demonstrating a failure.
    pub counterexample: Option<String>,
}

impl Check {
    fn compare(name: impl Into<String>, expected: Value, actual: Value) -> Self {
        Check {
            name: name.into(),
            passed: expected == actual,
            expected,
            actual,
            counterexample: None,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "passed": self.passed,
            "expected": self.expected,
            "actual": self.actual,
            "counterexample": self.counterexample,
        })
    }
}

fn opt(v: Option<u128>) -> Value {
    v.map_or(Value::Null, |x| json!(x.to_string()))
}

/// Oracle thresholds against the closed forms. Identity checks M1–M4;
/// bitwise OR checks M1, uniqueness of its witness, and M3.
pub fn lemmas(
    space: SampleSpace,
    f: TargetFunction,
    guard: u128,
    workers: &Workers,
) -> Result<Vec<Check>> {
    let q = space.alphabet_size();
    let n = space.num_informants();
    let formula = formula_thresholds(q, n, Mode::of(f))?;
    let bits = oracle_thresholds(space, f, Predicate::MaxRateBits, guard, workers)?;
    let informants = oracle_thresholds(space, f, Predicate::AllInformants, guard, workers)?;
    let mut checks = Vec::new();
    match f {
        TargetFunction::Identity => {
            checks.push(Check::compare(format!("M1 {space}"), opt(formula.m1), opt(bits.m1)));
            checks.push(Check::compare(format!("M2 {space}"), opt(formula.m2), opt(bits.m2)));
            checks.push(Check::compare(format!("M3 {space}"), opt(formula.m3), opt(informants.m3)));
            checks.push(Check::compare(format!("M4 {space}"), opt(formula.m4), opt(informants.m4)));
        }
        TargetFunction::BitwiseOr => {
            checks.push(Check::compare(format!("OR M1 {space}"), opt(formula.m1), opt(bits.m1)));
            if let Some(m1) = bits.m1 {
                let witnesses =
                    all_witnesses(space, m1 as u32, Predicate::MaxRateBits, f, guard, workers)?;
                let mut c = Check::compare(
                    format!("OR M1 witness unique {space}"),
                    json!(1),
                    json!(witnesses.len()),
                );
                if !c.passed {
                    c.counterexample = witnesses.get(1).map(json_of);
                }
                checks.push(c);
            }
            checks.push(Check::compare(
                format!("OR M3 {space}"),
                opt(formula.m3),
                opt(informants.m3),
            ));
        }
    }
    Ok(checks)
}

fn json_of(s: &SupportSet) -> String {
    s.serialize(Format::Json).expect("json is always available")
}

/// Enumerated counts at `M1` (max-rate bits) and `M3` (all informants).
/// Identity compares against the closed forms; bitwise OR records the
/// enumerated count as ground truth.
pub fn counts(
    space: SampleSpace,
    f: TargetFunction,
    predicate: Option<Predicate>,
    guard: u128,
    workers: &Workers,
) -> Result<Vec<Check>> {
    let q = space.alphabet_size();
    let n = space.num_informants();
    let thresholds = formula_thresholds(q, n, Mode::of(f))?;
    let closed = formula_counts(q, n)?;
    let mut checks = Vec::new();
    let wanted = |p: Predicate| predicate.is_none_or(|x| x == p);
    let cases = [
        (Predicate::MaxRateBits, thresholds.m1, closed.m1_count.clone(), "M1"),
        (Predicate::AllInformants, thresholds.m3, closed.m3_count.clone(), "M3"),
    ];
    for (pred, m, reference, label) in cases {
        if !wanted(pred) {
            continue;
        }
        let Some(m) = m.filter(|&m| m <= space.total_cells() as u128) else {
            continue;
        };
        let report = count_at_cardinality(space, m as u32, pred, f, guard, workers)?;
        let actual = json!({
            "count": report.incompressible_count.to_string(),
            "total": report.total_sets.to_string(),
        });
        let check = match f {
            TargetFunction::Identity => {
                let expected = json!({
                    "count": reference.to_string(),
                    "total": report.total_sets.to_string(),
                });
                Check::compare(format!("{label} {} count {space}", pred.name()), expected, actual)
            }
            TargetFunction::BitwiseOr => Check {
                name: format!("OR {label} {} count {space} (ground truth)", pred.name()),
                passed: true,
                expected: Value::Null,
                actual,
                counterexample: None,
            },
        };
        checks.push(check);
    }
    Ok(checks)
}

/// Strict chain `M3 < M1 < M4 < M2` over a parameter grid.
pub fn proposition(
    q_range: std::ops::RangeInclusive<u32>,
    n_range: std::ops::RangeInclusive<u32>,
) -> Result<Vec<Check>> {
    Ok(verify_proposition(q_range, n_range)?
        .into_iter()
        .map(|row| {
            let t = row.thresholds;
            Check {
                name: format!("proposition {}x{}", row.q, row.n),
                passed: row.holds,
                expected: json!("M3 < M1 < M4 < M2"),
                actual: json!([opt(t.m3), opt(t.m1), opt(t.m4), opt(t.m2)]),
                counterexample: None,
            }
        })
        .collect())
}

/// One violated property on one set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub property: &'static str,
    pub set: SupportSet,
    pub detail: String,
}

/// Generators of the relabeling group for `f`: coordinate transposition and
/// rotation always; value transposition and rotation on coordinate 0 for
/// identity only.
pub fn symmetry_generators(space: SampleSpace, f: TargetFunction) -> Vec<Symmetry> {
    let n = space.n();
    let q = space.alphabet_size();
    let mut gens = Vec::new();
    if n >= 2 {
        let mut swap: Vec<usize> = (0..n).collect();
        swap.swap(0, 1);
        gens.push(Symmetry::permute(space, swap));
        let rotate: Vec<usize> = (0..n).map(|j| (j + 1) % n).collect();
        gens.push(Symmetry::permute(space, rotate));
    }
    if f == TargetFunction::Identity {
        let mut swap = Symmetry::identity(space);
        swap.value_maps[0].swap(0, 1);
        gens.push(swap);
        let mut cycle = Symmetry::identity(space);
        cycle.value_maps[0] = (0..q).map(|v| (v + 1) % q).collect();
        gens.push(cycle);
    }
    gens
}

/// Per-set checks of the oracle invariants.
pub fn check_set(
    s: &SupportSet,
    f: TargetFunction,
    ev: &Evaluator,
    identity: &Evaluator,
    state_cap: usize,
) -> Result<Vec<Violation>> {
    let space = s.space();
    let cells = s.cells();
    let mut out = Vec::new();
    let mut flag = |ok: bool, property: &'static str, detail: String| {
        if !ok {
            out.push(Violation {
                property,
                set: *s,
                detail,
            });
        }
    };
    let bits_tree = ev.strategy(cells, Metric::Bits);
    let inf_tree = ev.strategy(cells, Metric::Informants);
    let bits = bits_tree.worst_case();
    let informants = inf_tree.worst_case();
    let summary = summarize(s);
    let outputs = ev.distinct_outputs(cells);

    flag(
        bits <= space.max_rate_bits(),
        "bits_upper",
        format!("#_b={bits} > N*ceil(log q)={}", space.max_rate_bits()),
    );
    flag(
        (bits == 0) == ev.is_constant(cells),
        "bits_zero_iff_constant",
        format!("#_b={bits}, constant={}", ev.is_constant(cells)),
    );
    flag(
        ceil_log2(outputs as u64) <= bits,
        "bits_lower",
        format!("ceil(log |f(S)|)={} > #_b={bits}", ceil_log2(outputs as u64)),
    );
    if f == TargetFunction::Identity {
        flag(
            summary.min_bits_bound <= bits && bits <= summary.naive_bit_budget,
            "measure_bounds",
            format!(
                "ceil(log mu)={} <= #_b={bits} <= budget={} violated",
                summary.min_bits_bound, summary.naive_bit_budget
            ),
        );
    }
    flag(
        informants <= space.num_informants(),
        "informants_upper",
        format!("#_n={informants} > N"),
    );
    if outputs >= 2 {
        flag(
            informants <= bits,
            "informants_le_bits",
            format!("#_n={informants} > #_b={bits}"),
        );
        flag(informants >= 1, "eta_lower", format!("#_n={informants} < 1"));
    }

    // Superset monotonicity against every one-cell extension.
    for extra in space.full().minus(cells) {
        let bigger = cells.union(CellSet::singleton(extra));
        let b2 = ev.worst_case(bigger, Metric::Bits);
        let n2 = ev.worst_case(bigger, Metric::Informants);
        flag(
            bits <= b2 && informants <= n2,
            "superset_monotone",
            format!("adding cell {extra}: #_b {bits}->{b2}, #_n {informants}->{n2}"),
        );
    }

    for sym in symmetry_generators(space, f) {
        let image = apply_symmetry(s, &sym)?;
        let b2 = ev.worst_case(image.cells(), Metric::Bits);
        let n2 = ev.worst_case(image.cells(), Metric::Informants);
        flag(
            bits == b2 && informants == n2,
            "symmetry_invariant",
            format!("{sym:?}: #_b {bits}->{b2}, #_n {informants}->{n2}"),
        );
    }

    if f != TargetFunction::Identity {
        let b_id = identity.worst_case(cells, Metric::Bits);
        let n_id = identity.worst_case(cells, Metric::Informants);
        flag(
            bits <= b_id && informants <= n_id,
            "function_dominance",
            format!("f: ({bits},{informants}) identity: ({b_id},{n_id})"),
        );
    }

    let interleaved = worst_case_bits_interleaved(s, f, state_cap)?;
    flag(
        interleaved <= bits,
        "interleaved_dominance",
        format!("interleaved {interleaved} > block-serial {bits}"),
    );

    for (tree, metric) in [(&bits_tree, Metric::Bits), (&inf_tree, Metric::Informants)] {
        let mut attained = false;
        for p in s.points() {
            let t = simulate(tree, &p)?;
            let cost = t.cost(metric);
            attained |= cost == tree.worst_case();
            flag(
                t.output == f.eval(space, &p)? && cost <= tree.worst_case(),
                "strategy_sound",
                format!("{} strategy on {p}: output {:?}, cost {cost}", metric.name(), t.output),
            );
        }
        flag(
            attained,
            "strategy_worst_case_attained",
            format!("{} strategy never reaches {}", metric.name(), tree.worst_case()),
        );
    }

    let max_rate = bits == space.max_rate_bits();
    let all_informants = informants == space.num_informants();
    if f == TargetFunction::Identity {
        flag(
            !max_rate || all_informants,
            "max_rate_implies_all_informants",
            format!("#_b={bits} is max-rate but #_n={informants}"),
        );
    }
    Ok(out)
}

/// Runs [`check_set`] on every nonempty subset of the space, plus region
/// monotonicity for both predicates.
pub fn invariants(
    space: SampleSpace,
    f: TargetFunction,
    guard: u128,
    state_cap: usize,
    workers: &Workers,
) -> Result<Vec<Check>> {
    let ev = Evaluator::new(space, f);
    let identity = Evaluator::new(space, TargetFunction::Identity);
    let mut violations: Vec<Violation> = Vec::new();
    let mut checked = 0u128;
    for m in 1..=space.total_cells() {
        let en = crate::enumerate::Enumeration::new(space, m, guard)?;
        let found = workers.map_reduce(
            &en,
            || Ok(Vec::new()),
            |acc: Result<Vec<Violation>>, _, s| {
                let mut acc = acc?;
                acc.extend(check_set(&s, f, &ev, &identity, state_cap)?);
                Ok(acc)
            },
            |a, b| {
                let mut a = a?;
                a.extend(b?);
                Ok(a)
            },
        )?;
        checked += en.total();
        violations.extend(found);
    }
    let mut checks = vec![Check {
        name: format!("set invariants {space} {}", f.name()),
        passed: violations.is_empty(),
        expected: json!({"violations": 0}),
        actual: json!({
            "sets": checked.to_string(),
            "violations": violations.len(),
            "first": violations.first().map(|v| format!("{}: {}", v.property, v.detail)),
        }),
        counterexample: violations.first().map(|v| json_of(&v.set)),
    }];
    for pred in [Predicate::MaxRateBits, Predicate::AllInformants] {
        let table = region_table(space, f, pred, Source::Oracle, guard, workers)?;
        let result = table.check_invariants();
        checks.push(Check {
            name: format!("region monotonicity {space} {} {}", f.name(), pred.name()),
            passed: result.is_ok(),
            expected: json!(null),
            actual: json!(result.err()),
            counterexample: None,
        });
    }
    Ok(checks)
}

/// `(passed, total)`.
pub fn summarize_checks(checks: &[Check]) -> (usize, usize) {
    (checks.iter().filter(|c| c.passed).count(), checks.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::DEFAULT_ENUMERATION_GUARD as GUARD;
    use crate::oracle::DEFAULT_STATE_CAP;

    #[test]
    fn lemma_suite_3x2() {
        let space = SampleSpace::new(3, 2).unwrap();
        let checks = lemmas(space, TargetFunction::Identity, GUARD, &Workers::sequential()).unwrap();
        assert_eq!(summarize_checks(&checks), (4, 4));
    }

    #[test]
    fn counts_suite_5x2_all_informants() {
        let space = SampleSpace::new(5, 2).unwrap();
        let checks = counts(
            space,
            TargetFunction::Identity,
            Some(Predicate::AllInformants),
            GUARD,
            &Workers::sequential(),
        )
        .unwrap();
        assert_eq!(checks.len(), 1);
        assert!(checks[0].passed);
        assert_eq!(checks[0].actual["count"], "400");
    }

    #[test]
    fn proposition_suite_default_grid() {
        let checks = proposition(3..=10, 3..=10).unwrap();
        assert_eq!(summarize_checks(&checks), (64, 64));
    }

    #[test]
    fn invariant_suite_small_spaces() {
        for (q, n) in [(2, 2), (3, 2), (2, 3)] {
            let space = SampleSpace::new(q, n).unwrap();
            for f in [TargetFunction::Identity, TargetFunction::BitwiseOr] {
                let checks =
                    invariants(space, f, GUARD, DEFAULT_STATE_CAP, &Workers::sequential()).unwrap();
                for c in &checks {
                    assert!(c.passed, "{}: {}", c.name, c.actual);
                }
            }
        }
    }

    #[test]
    fn failing_check_carries_counterexample() {
        let space = SampleSpace::new(4, 2).unwrap();
        let checks = lemmas(space, TargetFunction::BitwiseOr, GUARD, &Workers::sequential()).unwrap();
        let unique = checks.iter().find(|c| c.name.contains("unique")).unwrap();
        assert!(!unique.passed);
        assert!(unique.counterexample.is_some());
    }
}
