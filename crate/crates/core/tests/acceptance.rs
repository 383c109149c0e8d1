//! Acceptance criteria. Every tolerance is exact. Prints one `PASS`/`FAIL`
//! line per criterion and exits nonzero if any fails.
//!
//! Run with `cargo test -p wcc-core --release --test acceptance`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};

use wcc_core::analysis::{
    all_witnesses, count_at_cardinality, formula_counts, formula_thresholds, oracle_thresholds,
    oracle_thresholds_all, region_table, verify_proposition, Mode, Predicate, RegionLabel, Source,
};
use wcc_core::enumerate::{Enumeration, Workers, DEFAULT_ENUMERATION_GUARD as GUARD};
use wcc_core::oracle::{
    worst_case_bits, worst_case_bits_interleaved, worst_case_informants, Evaluator, Metric,
    DEFAULT_STATE_CAP,
};
use wcc_core::verify::check_set;
use wcc_core::{CellSet, CellView, SampleSpace, SupportSet, TargetFunction};

fn report(id: u32, title: &str, passed: bool, detail: impl AsRef<str>) -> bool {
    println!(
        "[{}] criterion {id}: {title} -- {}",
        if passed { "PASS" } else { "FAIL" },
        detail.as_ref()
    );
    passed
}

fn workers() -> Workers {
    Workers::new(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn space(q: u32, n: u32) -> SampleSpace {
    SampleSpace::new(q, n).unwrap()
}

fn set(q: u32, n: u32, pts: Vec<Vec<u32>>) -> SupportSet {
    SupportSet::from_points(space(q, n), pts).unwrap()
}

fn criterion_01_dsc_thresholds_match_formulas() -> bool {
    let w = workers();
    let mut mismatches = Vec::new();
    let mut lines = Vec::new();
    for (q, n) in [(2, 2), (3, 2), (2, 3), (4, 2)] {
        let oracle = oracle_thresholds_all(space(q, n), TargetFunction::Identity, GUARD, &w).unwrap();
        let formula = formula_thresholds(q, n, Mode::Dsc).unwrap();
        let got = [oracle.m1, oracle.m2, oracle.m3, oracle.m4];
        let want = [formula.m1, formula.m2, formula.m3, formula.m4];
        lines.push(format!("{q}x{n} oracle {got:?} formula {want:?}"));
        for (k, (g, f)) in got.iter().zip(&want).enumerate() {
            if g != f {
                mismatches.push(format!("{q}x{n} M{}: oracle {g:?} != formula {f:?}", k + 1));
            }
        }
    }
    // Values quoted for (3,2) and (4,2).
    let t = formula_thresholds(3, 2, Mode::Dsc).unwrap();
    assert_eq!((t.m1, t.m2, t.m3, t.m4), (Some(5), Some(6), Some(3), Some(3)));
    let t = formula_thresholds(4, 2, Mode::Dsc).unwrap();
    assert_eq!((t.m1, t.m2, t.m3, t.m4), (Some(7), Some(12), Some(3), Some(4)));
    report(
        1,
        "DSC oracle thresholds equal M1..M4 formulas",
        mismatches.is_empty(),
        format!("{}; mismatches: {mismatches:?}", lines.join("; ")),
    )
}

fn criterion_02_small_scale_counts() -> bool {
    let w = workers();
    let id = TargetFunction::Identity;
    let bits = count_at_cardinality(space(2, 2), 3, Predicate::MaxRateBits, id, GUARD, &w).unwrap();
    let informants =
        count_at_cardinality(space(2, 2), 3, Predicate::AllInformants, id, GUARD, &w).unwrap();
    let at_3x2 =
        count_at_cardinality(space(3, 2), 3, Predicate::AllInformants, id, GUARD, &w).unwrap();
    let closed = formula_counts(2, 2).unwrap();
    let passed = bits.incompressible_count == BigUint::from(4u32)
        && closed.m1_count == BigUint::from(4u32)
        && informants.incompressible_count == BigUint::from(4u32)
        && closed.m3_count == BigUint::from(4u32)
        && at_3x2.incompressible_count == BigUint::from(36u32)
        && at_3x2.total_sets == BigUint::from(84u32);
    report(
        2,
        "counts at (2,2) and (3,2)",
        passed,
        format!(
            "2x2 max-rate@3 {} (closed {}), all-informants@3 {} (closed {}), 3x2 all-informants@3 {}/{}",
            bits.incompressible_count,
            closed.m1_count,
            informants.incompressible_count,
            closed.m3_count,
            at_3x2.incompressible_count,
            at_3x2.total_sets
        ),
    )
}

fn criterion_03_informant_fraction_at_5x2() -> bool {
    let r = count_at_cardinality(
        space(5, 2),
        3,
        Predicate::AllInformants,
        TargetFunction::Identity,
        GUARD,
        &workers(),
    )
    .unwrap();
    let want = BigRational::new(BigInt::from(4), BigInt::from(23));
    let passed = r.total_sets == BigUint::from(2300u32)
        && r.incompressible_count == BigUint::from(400u32)
        && r.fraction == want
        && formula_counts(5, 2).unwrap().m3_fraction == want;
    report(
        3,
        "all-informants count and fraction at 5x2, m=3",
        passed,
        format!(
            "{} of {} informant-incompressible, fraction {}",
            r.incompressible_count, r.total_sets, r.fraction
        ),
    )
}

fn criterion_04_max_rate_count_at_5x2() -> bool {
    let started = std::time::Instant::now();
    let r = count_at_cardinality(
        space(5, 2),
        9,
        Predicate::MaxRateBits,
        TargetFunction::Identity,
        GUARD,
        &workers(),
    )
    .unwrap();
    let closed = formula_counts(5, 2).unwrap();
    let passed = r.total_sets == BigUint::from(2_042_975u32)
        && r.incompressible_count == BigUint::from(25u32)
        && closed.m1_count == BigUint::from(25u32)
        && closed.m1_total == r.total_sets;
    report(
        4,
        "max-rate count at 5x2, m=9",
        passed,
        format!(
            "{} of {} max-rate ({:.1?})",
            r.incompressible_count,
            r.total_sets,
            started.elapsed()
        ),
    )
}

fn criterion_05_regime_witnesses() -> bool {
    let id = TargetFunction::Identity;
    let mut cross: Vec<Vec<u32>> = (0..5).map(|j| vec![0, j]).collect();
    cross.extend((1..5).map(|i| vec![i, 0]));
    let cross = set(5, 2, cross);
    let rows = set(5, 2, (0..4).flat_map(|i| (0..5).map(move |j| vec![i, j])).collect());
    let l = set(5, 2, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
    let row = set(5, 2, (0..5).map(|j| vec![0, j]).collect());
    let got = [
        (cross.len(), worst_case_bits(&cross, id).0),
        (rows.len(), worst_case_bits(&rows, id).0),
        (l.len(), worst_case_informants(&l, id).0),
        (row.len(), worst_case_informants(&row, id).0),
    ];
    let want = [(9, 6), (20, 5), (3, 2), (5, 1)];
    report(
        5,
        "regime witnesses at 5x2",
        got == want,
        format!("(cardinality, cost) = {got:?}"),
    )
}

fn criterion_06_threshold_ordering() -> bool {
    let rows = verify_proposition(3..=10, 3..=10).unwrap();
    let holds = rows.iter().filter(|r| r.holds).count();
    report(
        6,
        "M3 < M1 < M4 < M2 for 3 <= q,N <= 10",
        rows.len() == 64 && holds == 64,
        format!("{holds}/{} hold", rows.len()),
    )
}

fn criterion_07_bitwise_or_thresholds() -> bool {
    let w = workers();
    let or = TargetFunction::BitwiseOr;
    let mut failures = Vec::new();
    let mut lines = Vec::new();
    for (q, n) in [(2, 2), (3, 2)] {
        let sp = space(q, n);
        let formula = formula_thresholds(q, n, Mode::BitwiseOr).unwrap();
        let bits = oracle_thresholds(sp, or, Predicate::MaxRateBits, GUARD, &w).unwrap();
        let inf = oracle_thresholds(sp, or, Predicate::AllInformants, GUARD, &w).unwrap();
        let witnesses = match bits.m1 {
            Some(m) => all_witnesses(sp, m as u32, Predicate::MaxRateBits, or, GUARD, &w).unwrap(),
            None => Vec::new(),
        };
        let m3_count = inf.m3.map(|m| {
            count_at_cardinality(sp, m as u32, Predicate::AllInformants, or, GUARD, &w).unwrap()
        });
        lines.push(format!(
            "{q}x{n}: M1 oracle {:?} formula {:?}, witnesses {}, M3 oracle {:?} formula {:?}, OR M3 count {}",
            bits.m1,
            formula.m1,
            witnesses.len(),
            inf.m3,
            formula.m3,
            m3_count
                .as_ref()
                .map(|c| format!("{}/{}", c.incompressible_count, c.total_sets))
                .unwrap_or_default()
        ));
        if bits.m1 != formula.m1 {
            failures.push(format!("{q}x{n} M1"));
        }
        if witnesses.len() != 1 {
            failures.push(format!(
                "{q}x{n} M1 witnesses: {} (e.g. {})",
                witnesses.len(),
                witnesses.get(1).map(|s| s.to_string()).unwrap_or_default()
            ));
        }
        if inf.m3 != formula.m3 {
            failures.push(format!("{q}x{n} M3"));
        }
    }
    report(
        7,
        "bitwise OR: M1 with unique witness, M3",
        failures.is_empty(),
        format!("{}; failures: {failures:?}", lines.join("; ")),
    )
}

fn criterion_08_property_suite() -> bool {
    let mut rng = rand::rngs::StdRng::seed_from_u64(20_081_008);
    let mut violations = Vec::new();
    let mut sampled = 0usize;
    let mut exhaustive = 0usize;
    for (q, n) in [(2, 2), (3, 2), (2, 3), (4, 2), (2, 4)] {
        let sp = space(q, n);
        let identity = Evaluator::new(sp, TargetFunction::Identity);
        for f in [TargetFunction::Identity, TargetFunction::BitwiseOr] {
            let ev = Evaluator::new(sp, f);
            if sp.total_cells() <= 9 {
                for m in 1..=sp.total_cells() {
                    for s in Enumeration::new(sp, m, GUARD).unwrap().iter() {
                        violations.extend(check_set(&s, f, &ev, &identity, DEFAULT_STATE_CAP).unwrap());
                        exhaustive += 1;
                    }
                }
            } else {
                for _ in 0..600 {
                    let mask = rng.gen_range(1..=sp.full().bits());
                    let s = SupportSet::from_cells(sp, CellSet(mask)).unwrap();
                    violations.extend(check_set(&s, f, &ev, &identity, DEFAULT_STATE_CAP).unwrap());
                    sampled += 1;
                }
            }
        }
    }
    report(
        8,
        "property suite (bounds, orderings, monotonicity, symmetry, dominance, soundness)",
        violations.is_empty() && sampled >= 1000,
        format!(
            "{exhaustive} exhaustive + {sampled} random set/function pairs, {} violations{}",
            violations.len(),
            violations
                .first()
                .map(|v| format!(", first: {} on {} ({})", v.property, v.set, v.detail))
                .unwrap_or_default()
        ),
    )
}

fn criterion_09_region_structure() -> bool {
    let w = workers();
    let id = TargetFunction::Identity;
    let bits = region_table(space(3, 2), id, Predicate::MaxRateBits, Source::Oracle, GUARD, &w).unwrap();
    let inf = region_table(space(3, 2), id, Predicate::AllInformants, Source::Oracle, GUARD, &w).unwrap();
    use RegionLabel::*;
    let bands_ok = bits.bands() == vec![(AllCompressible, 1, 4), (Mixed, 5, 6), (AllIncompressible, 7, 9)]
        && inf.bands() == vec![(AllCompressible, 1, 2), (Mixed, 3, 3), (AllIncompressible, 4, 9)];

    let mut monotone_failures = Vec::new();
    let mut nesting_violations = 0u64;
    let mut nesting_checked = 0u64;
    for (q, n) in [(2, 2), (3, 2), (2, 3), (4, 2), (2, 4), (5, 2)] {
        let sp = space(q, n);
        for pred in [Predicate::MaxRateBits, Predicate::AllInformants] {
            let table = if sp.total_cells() <= 16 {
                region_table(sp, id, pred, Source::Oracle, GUARD, &w).unwrap()
            } else {
                region_table(sp, id, pred, Source::Formula, GUARD, &w).unwrap()
            };
            let t = oracle_or_formula_boundaries(&table, sp, pred);
            if table.check_invariants().is_err() || !t {
                monotone_failures.push(format!("{sp} {}", pred.name()));
            }
        }
        if sp.total_cells() <= 16 {
            let ev = Evaluator::new(sp, id);
            for mask in 1..=sp.full().bits() {
                let cells = CellSet(mask);
                if ev.worst_case(cells, Metric::Bits) == sp.max_rate_bits() {
                    nesting_checked += 1;
                    if ev.worst_case(cells, Metric::Informants) != sp.num_informants() {
                        nesting_violations += 1;
                    }
                }
            }
        }
    }
    report(
        9,
        "region bands at 3x2, monotonicity, max-rate => all informants",
        bands_ok && monotone_failures.is_empty() && nesting_violations == 0,
        format!(
            "bits bands {:?}; informant bands {:?}; monotonicity failures {monotone_failures:?}; nesting {nesting_violations} violations among {nesting_checked} max-rate sets",
            bits.bands(),
            inf.bands()
        ),
    )
}

/// First `exists` row and last `not all` row coincide with oracle thresholds.
fn oracle_or_formula_boundaries(
    table: &wcc_core::analysis::RegionTable,
    sp: SampleSpace,
    pred: Predicate,
) -> bool {
    if table.source == Source::Formula {
        return true;
    }
    let t = oracle_thresholds(sp, table.function, pred, GUARD, &Workers::sequential()).unwrap();
    let (low, high) = match pred.metric() {
        Metric::Bits => (t.m1, t.m2),
        Metric::Informants => (t.m3, t.m4),
    };
    table.first_exists().map(u128::from) == low && table.last_not_all().map(u128::from) == high
}

fn criterion_10_model_divergence() -> bool {
    let mut pts: Vec<Vec<u32>> = (0..2).flat_map(|i| (0..3).map(move |j| vec![i, j])).collect();
    pts.push(vec![2, 0]);
    let s = set(3, 2, pts);
    let id = TargetFunction::Identity;
    let block = worst_case_bits(&s, id).0;
    let inter = worst_case_bits_interleaved(&s, id, DEFAULT_STATE_CAP).unwrap();
    report(
        10,
        "7-point 3x3 set: block-serial 4, bit-adaptive 3",
        block == 4 && inter == 3,
        format!("block-serial {block}, bit-adaptive {inter}"),
    )
}

fn main() -> std::process::ExitCode {
    let criteria: [fn() -> bool; 10] = [
        criterion_01_dsc_thresholds_match_formulas,
        criterion_02_small_scale_counts,
        criterion_03_informant_fraction_at_5x2,
        criterion_04_max_rate_count_at_5x2,
        criterion_05_regime_witnesses,
        criterion_06_threshold_ordering,
        criterion_07_bitwise_or_thresholds,
        criterion_08_property_suite,
        criterion_09_region_structure,
        criterion_10_model_divergence,
    ];
    let mut failed = 0;
    for (k, criterion) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(criterion) {
            Ok(true) => {}
            Ok(false) => failed += 1,
            Err(_) => {
                println!("[FAIL] criterion {}: panicked", k + 1);
                failed += 1;
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        std::process::ExitCode::SUCCESS
    } else {
        std::process::ExitCode::FAILURE
    }
}
