//! `wcc`: worst-case compressibility lab.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
//! 3 resource-guard refusal.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use wcc_core::analysis::{
    self, classify, count_at_cardinality, find_witness, formula_counts, formula_thresholds,
    fraction_json, oracle_thresholds_all, region_table, Mode, Predicate, Source,
};
use wcc_core::enumerate::{Workers, DEFAULT_ENUMERATION_GUARD};
use wcc_core::oracle::{worst_case_bits_interleaved, DEFAULT_STATE_CAP};
use wcc_core::space::DEFAULT_CELL_CAP;
use wcc_core::verify::{self, Check};
use wcc_core::{CellView, CostReport, Error, Format, SampleSpace, SupportSet, TargetFunction};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "wcc", version, about = "Worst-case compressibility of correlated sources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cost report for one support set.
    Analyze(AnalyzeArgs),
    /// Threshold cardinalities M1..M4.
    Thresholds(ThresholdArgs),
    /// Exact count of incompressible sets per cardinality.
    Enumerate(EnumerateArgs),
    /// Per-cardinality region table (plot-ready CSV).
    Regions(RegionArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// First set at a cardinality satisfying (or violating) a predicate.
    Witness(WitnessArgs),
}

#[derive(Args)]
struct Common {
    /// Target function.
    #[arg(long, value_enum, default_value_t = FunctionArg::Identity)]
    function: FunctionArg,
    /// Output format; each command has its own default.
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
    /// Write output here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads for enumeration. Output does not depend on this.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: u32,
    /// Maximum number of cells q^N.
    #[arg(long, default_value_t = DEFAULT_CELL_CAP)]
    cell_cap: u32,
    /// Maximum number of subsets enumerated at one cardinality.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_GUARD)]
    enum_guard: u128,
    /// Maximum memoized states of the bit-adaptive oracle.
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    state_cap: usize,
    /// Acknowledge guard values above their defaults.
    #[arg(long)]
    allow_large: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Support-set file (JSON, or grid for N = 2).
    #[arg(long)]
    input: PathBuf,
    /// Input format; detected from the content when omitted.
    #[arg(long, value_enum)]
    input_format: Option<InFormat>,
    /// Expected space; rejected if the file disagrees.
    #[arg(long)]
    space: Option<String>,
    #[arg(long, value_enum, default_value_t = ModelArg::BlockSerial)]
    model: ModelArg,
    /// Include optimal strategy trees.
    #[arg(long)]
    strategies: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    space: String,
    #[arg(long, value_enum, default_value_t = SourceArg::Formula)]
    mode: SourceArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    space: String,
    /// Single cardinality; every cardinality when omitted.
    #[arg(long)]
    cardinality: Option<u32>,
    #[arg(long, value_enum, default_value_t = PredicateArg::MaxRateBits)]
    predicate: PredicateArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct RegionArgs {
    #[arg(long)]
    space: String,
    /// Shorthand for the max-rate-bits or all-informants predicate.
    #[arg(long, value_enum, conflicts_with = "predicate")]
    kind: Option<KindArg>,
    #[arg(long, value_enum)]
    predicate: Option<PredicateArg>,
    #[arg(long, value_enum, default_value_t = SourceArg::Oracle)]
    mode: SourceArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: SuiteArg,
    /// Space for lemmas, counts and invariants.
    #[arg(long)]
    space: Option<String>,
    /// Restrict the counts suite to one predicate.
    #[arg(long, value_enum)]
    predicate: Option<PredicateArg>,
    /// Inclusive range for q and N in the proposition suite.
    #[arg(long, default_value = "3..10")]
    range: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long)]
    space: String,
    #[arg(long)]
    cardinality: u32,
    #[arg(long, value_enum, default_value_t = PredicateArg::MaxRateBits)]
    predicate: PredicateArg,
    /// Search for a set violating the predicate instead.
    #[arg(long)]
    negate: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionArg {
    Identity,
    Bitor,
}

impl FunctionArg {
    fn target(self) -> TargetFunction {
        match self {
            FunctionArg::Identity => TargetFunction::Identity,
            FunctionArg::Bitor => TargetFunction::BitwiseOr,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    BlockSerial,
    BitAdaptive,
}

#[derive(Clone, Copy, ValueEnum)]
enum PredicateArg {
    MaxRateBits,
    AllInformants,
    BetaOne,
}

impl PredicateArg {
    fn predicate(self) -> Predicate {
        match self {
            PredicateArg::MaxRateBits => Predicate::MaxRateBits,
            PredicateArg::AllInformants => Predicate::AllInformants,
            PredicateArg::BetaOne => Predicate::BetaOne,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Bits,
    Informants,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Formula,
    Oracle,
}

impl SourceArg {
    fn source(self) -> Source {
        match self {
            SourceArg::Formula => Source::Formula,
            SourceArg::Oracle => Source::Oracle,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Lemmas,
    Counts,
    Proposition,
    Invariants,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
    Grid,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum InFormat {
    Json,
    Grid,
}

/// Failure carrying its exit code.
enum Failure {
    Usage(String),
    Guard(String),
    /// A completed run whose verdict is negative; output was still written.
    Verdict,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_guard() {
            Failure::Guard(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

impl Common {
    fn validate(&self) -> Outcome<()> {
        if self.allow_large {
            return Ok(());
        }
        let raised = self.cell_cap > DEFAULT_CELL_CAP
            || self.enum_guard > DEFAULT_ENUMERATION_GUARD
            || self.state_cap > DEFAULT_STATE_CAP;
        if raised {
            return Err(usage("guard values above their defaults require --allow-large"));
        }
        Ok(())
    }

    fn workers(&self) -> Workers {
        Workers::new(self.jobs as usize)
    }

    fn space(&self, spec: &str) -> Outcome<SampleSpace> {
        Ok(SampleSpace::parse_spec(spec, self.cell_cap)?)
    }

    fn format(&self, default: OutFormat, allowed: &[OutFormat]) -> Outcome<OutFormat> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(usage(format!("format {} is not available for this command", format_name(f))))
        }
    }

    fn emit(&self, text: &str) -> Outcome<()> {
        match &self.output {
            Some(path) => fs::write(path, text)
                .map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| usage(format!("cannot write output: {e}")))
            }
        }
    }
}

fn format_name(f: OutFormat) -> &'static str {
    match f {
        OutFormat::Json => "json",
        OutFormat::Csv => "csv",
        OutFormat::Grid => "grid",
        OutFormat::Text => "text",
    }
}

/// Prepends the version and model identifiers to a JSON object.
fn envelope(model: &str, body: Value) -> String {
    let mut map = serde_json::Map::new();
    map.insert("version".into(), json!(VERSION));
    map.insert("model".into(), json!(model));
    if let Value::Object(fields) = body {
        map.extend(fields);
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(map)).expect("json value");
    text.push('\n');
    text
}

const BLOCK_SERIAL: &str = "block-serial";
const BIT_ADAPTIVE: &str = "bit-adaptive";

fn read_support(args: &AnalyzeArgs) -> Outcome<SupportSet> {
    let bytes = fs::read(&args.input)
        .map_err(|e| usage(format!("cannot read {}: {e}", args.input.display())))?;
    let format = match args.input_format {
        Some(InFormat::Json) => Format::Json,
        Some(InFormat::Grid) => Format::Grid,
        None if bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{') => Format::Json,
        None => Format::Grid,
    };
    let s = SupportSet::parse(&bytes, format, args.common.cell_cap)?;
    if let Some(spec) = &args.space {
        let expected = args.common.space(spec)?;
        if expected != s.space() {
            return Err(usage(format!(
                "input is over {} but --space is {expected}",
                s.space()
            )));
        }
    }
    Ok(s)
}

fn cost_json(s: &SupportSet, r: &CostReport, strategies: bool) -> Value {
    let m = &r.measures;
    let mut body = json!({
        "space": s.space().to_string(),
        "function": r.function.name(),
        "cardinality": s.len(),
        "measures": {
            "ambiguity": m.ambiguity,
            "marginal_ambiguities": m.marginal_ambiguities,
            "sparsity": fraction_json(&m.sparsity),
            "naive_bit_budget": m.naive_bit_budget,
            "min_bits_bound": m.min_bits_bound,
        },
        "bits_worst": r.bits_worst,
        "informants_worst": r.informants_worst,
        "beta": fraction_json(&r.beta.value),
        "eta": fraction_json(&r.eta.value),
        "bit_compressible": r.bit_compressible,
        "informant_compressible": r.informant_compressible,
        "max_rate": r.max_rate,
        "all_informants": r.all_informants,
        "degenerate": r.degenerate(),
    });
    if strategies {
        body["strategies"] = json!({
            "bits": r.bits_strategy.to_json(),
            "informants": r.informants_strategy.to_json(),
        });
    }
    body
}

fn text_lines(v: &Value, prefix: &str, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                text_lines(x, &key, out);
            }
        }
        Value::String(s) => out.push_str(&format!("{prefix}: {s}\n")),
        other => out.push_str(&format!("{prefix}: {other}\n")),
    }
}

fn render_text(model: &str, body: &Value) -> String {
    let mut out = format!("version: {VERSION}\nmodel: {model}\n");
    text_lines(body, "", &mut out);
    out
}

fn cmd_analyze(args: &AnalyzeArgs) -> Outcome<()> {
    let c = &args.common;
    let format = c.format(OutFormat::Json, &[OutFormat::Json, OutFormat::Text])?;
    let s = read_support(args)?;
    let f = c.function.target();
    let report = classify(&s, f);
    let (model, body) = match args.model {
        ModelArg::BlockSerial => (BLOCK_SERIAL, cost_json(&s, &report, args.strategies)),
        ModelArg::BitAdaptive => {
            if args.strategies {
                return Err(usage("strategy trees are only available for block-serial"));
            }
            let bits = worst_case_bits_interleaved(&s, f, c.state_cap)?;
            let body = json!({
                "diagnostic": true,
                "space": s.space().to_string(),
                "function": f.name(),
                "cardinality": s.len(),
                "bits_worst": bits,
                "block_serial_bits_worst": report.bits_worst,
                "degenerate": report.degenerate(),
            });
            (BIT_ADAPTIVE, body)
        }
    };
    let text = match format {
        OutFormat::Text => render_text(model, &body),
        _ => envelope(model, body),
    };
    c.emit(&text)
}

fn cmd_thresholds(args: &ThresholdArgs) -> Outcome<()> {
    let c = &args.common;
    let format = c.format(OutFormat::Json, &[OutFormat::Json, OutFormat::Csv, OutFormat::Text])?;
    let space = c.space(&args.space)?;
    let f = c.function.target();
    let (q, n) = (space.alphabet_size(), space.num_informants());
    let t = match args.mode {
        SourceArg::Formula => formula_thresholds(q, n, Mode::of(f))?,
        SourceArg::Oracle => oracle_thresholds_all(space, f, c.enum_guard, &c.workers())?,
    };
    let show = |v: Option<u128>| v.map(|x| x.to_string()).unwrap_or_default();
    let text = match format {
        OutFormat::Csv => format!(
            "space,function,source,M1,M2,M3,M4\n{space},{},{},{},{},{},{}\n",
            f.name(),
            t.source.name(),
            show(t.m1),
            show(t.m2),
            show(t.m3),
            show(t.m4)
        ),
        OutFormat::Text => format!(
            "version: {VERSION}\nmodel: {BLOCK_SERIAL}\nspace: {space}\nfunction: {}\nsource: {}\nM1: {}\nM2: {}\nM3: {}\nM4: {}\n",
            f.name(),
            t.source.name(),
            show(t.m1),
            show(t.m2),
            show(t.m3),
            show(t.m4)
        ),
        _ => {
            let mut body = json!({
                "space": space.to_string(),
                "function": f.name(),
                "thresholds": t.to_json(),
            });
            if matches!(args.mode, SourceArg::Formula) && f == TargetFunction::Identity {
                body["counts"] = formula_counts(q, n)?.to_json();
            }
            envelope(BLOCK_SERIAL, body)
        }
    };
    c.emit(&text)
}

fn cmd_enumerate(args: &EnumerateArgs) -> Outcome<()> {
    let c = &args.common;
    let format = c.format(OutFormat::Json, &[OutFormat::Json, OutFormat::Csv])?;
    let space = c.space(&args.space)?;
    let f = c.function.target();
    let pred = args.predicate.predicate();
    let cardinalities: Vec<u32> = match args.cardinality {
        Some(m) => vec![m],
        None => (1..=space.total_cells()).collect(),
    };
    let workers = c.workers();
    let reports = cardinalities
        .into_iter()
        .map(|m| count_at_cardinality(space, m, pred, f, c.enum_guard, &workers))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match format {
        OutFormat::Csv => {
            let mut out = String::from(analysis::CSV_HEADER);
            out.push('\n');
            for r in &reports {
                // Skip the per-report header line.
                out.push_str(r.to_csv().split_once('\n').map_or("", |(_, row)| row));
            }
            out
        }
        _ => envelope(
            BLOCK_SERIAL,
            json!({
                "space": space.to_string(),
                "function": f.name(),
                "predicate": pred.name(),
                "counts": reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            }),
        ),
    };
    c.emit(&text)
}

fn cmd_regions(args: &RegionArgs) -> Outcome<()> {
    let c = &args.common;
    let format = c.format(OutFormat::Csv, &[OutFormat::Csv, OutFormat::Json])?;
    let space = c.space(&args.space)?;
    let pred = match (args.kind, args.predicate) {
        (_, Some(p)) => p.predicate(),
        (Some(KindArg::Informants), None) => Predicate::AllInformants,
        (Some(KindArg::Bits), None) | (None, None) => Predicate::MaxRateBits,
    };
    let f = c.function.target();
    let table = region_table(space, f, pred, args.mode.source(), c.enum_guard, &c.workers())?;
    let text = match format {
        OutFormat::Json => envelope(BLOCK_SERIAL, table.to_json()),
        _ => table.to_csv(),
    };
    c.emit(&text)
}

fn parse_range(text: &str) -> Outcome<std::ops::RangeInclusive<u32>> {
    let bad = || usage(format!("range must look like LO..HI, got {text:?}"));
    let (lo, hi) = text.split_once("..").ok_or_else(bad)?;
    let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn cmd_verify(args: &VerifyArgs) -> Outcome<()> {
    let c = &args.common;
    let format = c.format(OutFormat::Json, &[OutFormat::Json, OutFormat::Text])?;
    let f = c.function.target();
    let workers = c.workers();
    let space = || {
        let spec = args
            .space
            .as_deref()
            .ok_or_else(|| usage("this suite requires --space"))?;
        c.space(spec)
    };
    let (suite, checks): (&str, Vec<Check>) = match args.suite {
        SuiteArg::Lemmas => ("lemmas", verify::lemmas(space()?, f, c.enum_guard, &workers)?),
        SuiteArg::Counts => (
            "counts",
            verify::counts(
                space()?,
                f,
                args.predicate.map(PredicateArg::predicate),
                c.enum_guard,
                &workers,
            )?,
        ),
        SuiteArg::Proposition => {
            let r = parse_range(&args.range)?;
            ("proposition", verify::proposition(r.clone(), r)?)
        }
        SuiteArg::Invariants => (
            "invariants",
            verify::invariants(space()?, f, c.enum_guard, c.state_cap, &workers)?,
        ),
    };
    let (passed, total) = verify::summarize_checks(&checks);
    let text = match format {
        OutFormat::Text => {
            let mut out = format!("version: {VERSION}\nmodel: {BLOCK_SERIAL}\nsuite: {suite}\n");
            for ch in &checks {
                out.push_str(&format!(
                    "[{}] {}: expected {} actual {}\n",
                    if ch.passed { "PASS" } else { "FAIL" },
                    ch.name,
                    ch.expected,
                    ch.actual
                ));
                if let Some(cx) = &ch.counterexample {
                    out.push_str(&format!("  counterexample: {cx}\n"));
                }
            }
            out.push_str(&format!("{passed}/{total} passed\n"));
            out
        }
        _ => envelope(
            BLOCK_SERIAL,
            json!({
                "suite": suite,
                "function": f.name(),
                "passed": passed,
                "total": total,
                "all_passed": passed == total,
                "checks": checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            }),
        ),
    };
    c.emit(&text)?;
    if passed == total {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn cmd_witness(args: &WitnessArgs) -> Outcome<()> {
    let c = &args.common;
    let space = c.space(&args.space)?;
    let default = if space.num_informants() == 2 { OutFormat::Grid } else { OutFormat::Json };
    let format = c.format(default, &[OutFormat::Grid, OutFormat::Json])?;
    if format == OutFormat::Grid && space.num_informants() != 2 {
        return Err(usage("grid output requires N = 2"));
    }
    let f = c.function.target();
    let pred = args.predicate.predicate();
    let found = find_witness(
        space,
        args.cardinality,
        pred,
        f,
        args.negate,
        c.enum_guard,
        &c.workers(),
    )?;
    let Some(set) = found else {
        eprintln!(
            "no set of cardinality {} in {space} {} {}",
            args.cardinality,
            if args.negate { "violates" } else { "satisfies" },
            pred.name()
        );
        return Err(Failure::Verdict);
    };
    let text = match format {
        OutFormat::Grid => set.serialize(Format::Grid)?,
        _ => {
            let points: Value = serde_json::from_str(&set.serialize(Format::Json)?)
                .expect("support serializes to valid json");
            envelope(
                BLOCK_SERIAL,
                json!({
                    "function": f.name(),
                    "predicate": pred.name(),
                    "negate": args.negate,
                    "cardinality": args.cardinality,
                    "witness": points,
                }),
            )
        }
    };
    c.emit(&text)
}

fn run(cli: &Cli) -> Outcome<()> {
    let common = match &cli.command {
        Command::Analyze(a) => &a.common,
        Command::Thresholds(a) => &a.common,
        Command::Enumerate(a) => &a.common,
        Command::Regions(a) => &a.common,
        Command::Verify(a) => &a.common,
        Command::Witness(a) => &a.common,
    };
    common.validate()?;
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Thresholds(a) => cmd_thresholds(a),
        Command::Enumerate(a) => cmd_enumerate(a),
        Command::Regions(a) => cmd_regions(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Witness(a) => cmd_witness(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Guard(msg)) => {
            eprintln!("refused: {msg}");
            ExitCode::from(3)
        }
    }
}
