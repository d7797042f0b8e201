//! Command line front end: enumeration, triangulation, ball sampling,
//! private counting, verification suites, and experiment tables.
//!
//! Output conventions shared by every subcommand:
//! - JSON results are single objects carrying `schema_version`, the
//!   subcommand name, a config echo (arguments, seed, trials, threads),
//!   and the hash of any poset involved.
//! - CSV results start with `#`-prefixed comment lines carrying the same
//!   provenance, followed by a header row and data rows.
//! - Identical invocations produce byte-identical output.
//!
//! Exit codes: 0 success, 1 invalid input or arguments, 2 internal error.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use posetball::chains::triangulation;
use posetball::eb::{count_ebs, enumerate_ebs, ENUMERATION_CAP};
use posetball::experiments::{
    lp_curve, nhis_experiment, random_ratio_sweep_grid, structure_sweep,
};
use posetball::mechanism::{self, CountVector, MechanismConfig};
use posetball::randposet::default_steps;
use posetball::rng::{stream_rng, DEFAULT_SEED};
use posetball::sampling::PosetBallSampler;
use posetball::verification::{run_suite, VerifySuite};
use posetball::{MaximalPolicy, Poset, RootedPoset};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "posetball",
    version,
    about = "Noise tailored to partially ordered binary counts: sampling, private release, verification, experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Base seed; all randomness derives from it deterministically.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Default number of random draws for sampling-based subcommands.
    #[arg(long, global = true, default_value_t = 10_000)]
    trials: u64,

    /// Accepted for interface stability; execution is sequential, and
    /// results never depend on this value.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// List every extended bipartition of a poset plus the total count.
    Enumerate {
        /// Poset file (JSON with d, optional labels, relations).
        #[arg(long)]
        poset: PathBuf,
        /// Print only the total count (works beyond the enumeration cap).
        #[arg(long)]
        count_only: bool,
    },
    /// Emit the simplices triangulating a poset ball, one CSV row each.
    Triangulate {
        /// Poset file; see `sample --help` for how the root is chosen.
        #[arg(long)]
        poset: PathBuf,
    },
    /// Draw uniform samples from a poset ball as CSV rows.
    ///
    /// If element 0 of the input poset is its unique maximum the file is
    /// taken as the rooted poset and rows carry all d coordinates.
    /// Otherwise a root is adjoined internally and the root coordinate is
    /// dropped, so rows again have d columns (the marginal used when
    /// adding noise to d counts). Row i is drawn from stream (seed, i).
    Sample {
        /// Poset file (JSON with d, optional labels, relations).
        #[arg(long)]
        poset: PathBuf,
        /// Number of samples (defaults to --trials).
        #[arg(long)]
        n: Option<u64>,
        /// Rule for picking maximal elements inside the sampler.
        #[arg(long, default_value = "auto", value_parser = parse_policy)]
        policy: MaximalPolicy,
    },
    /// Release per-item counts under ε-differential privacy.
    Mechanism(MechanismArgs),
    /// Generate a random poset via a Markov chain on labeled DAGs and
    /// write it in the poset file format.
    Randposet {
        /// Number of elements (at most 64).
        #[arg(long)]
        d: usize,
        /// Markov chain steps (default 10·d⁴).
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Run verification suites and report pass/fail with statistics.
    Verify {
        /// One of: uniformity, volume, lp, simplex, mechanism, all.
        #[arg(long, default_value = "all", value_parser = parse_suite)]
        suite: SuiteArg,
    },
    /// Produce experiment tables as CSV.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Args)]
#[command(group(
    clap::ArgGroup::new("input").required(true).args(["records", "counts"])
))]
struct MechanismArgs {
    /// Poset file describing the question order.
    #[arg(long)]
    poset: PathBuf,
    /// CSV of respondent records: one row per record, d binary columns.
    #[arg(long)]
    records: Option<PathBuf>,
    /// CSV holding d precomputed counts (any row/column layout).
    #[arg(long)]
    counts: Option<PathBuf>,
    /// Number of records behind --counts (defaults to the largest count).
    #[arg(long, requires = "counts")]
    record_count: Option<u64>,
    /// Privacy parameter ε.
    #[arg(long)]
    epsilon: f64,
    /// Sensitivity Δ of the induced norm (1 for binary records).
    #[arg(long, default_value_t = 1.0)]
    sensitivity: f64,
    /// Rule for picking maximal elements inside the ball sampler.
    #[arg(long, default_value = "auto", value_parser = parse_policy)]
    policy: MaximalPolicy,
    /// Use a generic ℓp baseline instead of the poset ball.
    #[arg(long, value_enum)]
    baseline: Option<Baseline>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Baseline {
    /// Cube noise (ℓ∞ ball, sensitivity Δ).
    Linf,
    /// Laplace noise (ℓ1 ball, sensitivity d·Δ).
    L1,
}

impl Baseline {
    fn name(self) -> &'static str {
        match self {
            Baseline::Linf => "linf",
            Baseline::L1 => "l1",
        }
    }
}

#[derive(Clone, Copy)]
enum SuiteArg {
    All,
    One(VerifySuite),
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Scaled expected squared norm of cube-enclosing ℓp balls on a grid.
    LpCurve {
        /// Dimensions, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,50")]
        d: Vec<usize>,
        /// Exponents, comma separated; `inf` is accepted.
        #[arg(long, value_delimiter = ',', default_value = "1,1.5,2,3,inf", value_parser = parse_p)]
        p: Vec<f64>,
    },
    /// Mean poset-ball / cube noise ratio over random posets per dimension.
    RandomRatio {
        #[arg(long, default_value_t = 2)]
        d_min: usize,
        #[arg(long, default_value_t = 10)]
        d_max: usize,
        #[arg(long, default_value_t = 1)]
        d_step: usize,
        /// Random posets per dimension.
        #[arg(long, default_value_t = 20)]
        posets: usize,
    },
    /// Ratio bucketed by depth and reduced edge count at fixed dimension.
    Structure {
        #[arg(long, default_value_t = 10)]
        d: usize,
        /// Total random posets to draw.
        #[arg(long, default_value_t = 5000)]
        posets: usize,
        /// Smallest bucket kept in the summary.
        #[arg(long, default_value_t = 100)]
        min_bucket: usize,
    },
    /// Ratio on the bundled questionnaire posets.
    Nhis {
        /// Question sections to combine: 1, 12, or 123 (comma separated).
        #[arg(long, value_delimiter = ',', default_value = "1,12,123", value_parser = parse_sections)]
        sections: Vec<u8>,
    },
}

fn parse_policy(s: &str) -> std::result::Result<MaximalPolicy, posetball::Error> {
    s.parse()
}

fn parse_suite(s: &str) -> std::result::Result<SuiteArg, posetball::Error> {
    if s.eq_ignore_ascii_case("all") {
        Ok(SuiteArg::All)
    } else {
        s.parse().map(SuiteArg::One)
    }
}

fn parse_p(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") || t == "∞" {
        return Ok(f64::INFINITY);
    }
    t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"))
}

fn parse_sections(s: &str) -> std::result::Result<u8, String> {
    match s.trim() {
        "1" => Ok(1),
        "12" => Ok(2),
        "123" => Ok(3),
        other => Err(format!("{other:?}: expected 1, 12, or 123")),
    }
}

fn sections_label(n: u8) -> &'static str {
    match n {
        1 => "1",
        2 => "12",
        _ => "123",
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(&cli)));
    let code = match outcome {
        Ok(Ok(())) => 0,
        Ok(Err(err)) => {
            eprintln!("error: {err:#}");
            1
        }
        Err(_) => {
            eprintln!("internal error: unexpected panic (see message above)");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> Result<()> {
    if cli.threads == 0 {
        bail!("--threads must be at least 1");
    }
    let text = match &cli.command {
        Command::Enumerate { poset, count_only } => run_enumerate(cli, poset, *count_only)?,
        Command::Triangulate { poset } => run_triangulate(cli, poset)?,
        Command::Sample { poset, n, policy } => run_sample(cli, poset, *n, *policy)?,
        Command::Mechanism(args) => run_mechanism(cli, args)?,
        Command::Randposet { d, steps } => run_randposet(cli, *d, *steps)?,
        Command::Verify { suite } => run_verify(cli, *suite)?,
        Command::Experiment(cmd) => run_experiment(cli, cmd)?,
    };
    emit(cli.out.as_deref(), &text)
}

// ---------------------------------------------------------------------------
// Shared plumbing.

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .context("writing stdout")
        }
    }
}

fn load_poset(path: &Path) -> Result<Poset> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading poset file {}", path.display()))?;
    Poset::parse(&text).with_context(|| format!("parsing poset file {}", path.display()))
}

/// A rooted view of the input: the file itself when element 0 is already
/// the unique maximum, otherwise an internal augmentation (flag = true).
fn rooted_view(poset: &Poset) -> (RootedPoset, bool) {
    match RootedPoset::from_poset(poset.clone()) {
        Ok(rooted) => (rooted, false),
        Err(_) => (RootedPoset::augment(poset), true),
    }
}

/// Arguments after the binary name, for the config echo.
fn argv_tail() -> Vec<String> {
    std::env::args().skip(1).collect()
}

fn config_echo(cli: &Cli) -> serde_json::Value {
    json!({
        "argv": argv_tail(),
        "seed": cli.seed,
        "trials": cli.trials,
        "threads": cli.threads,
    })
}

fn json_output(value: &serde_json::Value) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value).context("serializing output")?;
    text.push('\n');
    Ok(text)
}

fn preamble(cli: &Cli, command: &str, extra: &[String]) -> Vec<String> {
    let mut lines = vec![
        format!("schema_version {SCHEMA_VERSION}"),
        format!("command {command}"),
        format!("argv {}", argv_tail().join(" ")),
        format!("seed {}", cli.seed),
        format!("trials {}", cli.trials),
    ];
    lines.extend(extra.iter().cloned());
    lines
}

fn csv_table(comments: &[String], header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut text = String::new();
    for line in comments {
        let _ = writeln!(text, "# {line}");
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).context("writing csv header")?;
    for row in rows {
        writer.write_record(row).context("writing csv row")?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| anyhow::anyhow!("flushing csv: {e}"))?;
    text.push_str(std::str::from_utf8(&bytes).context("csv is utf-8")?);
    Ok(text)
}

fn fmt_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else {
        format!("{x}")
    }
}

// ---------------------------------------------------------------------------
// Subcommands.

fn run_enumerate(cli: &Cli, path: &Path, count_only: bool) -> Result<String> {
    let poset = load_poset(path)?;
    let total = count_ebs(&poset)?;
    let mut text = String::new();
    for line in preamble(cli, "enumerate", &[format!("poset {}", poset.hash_hex())]) {
        let _ = writeln!(text, "# {line}");
    }
    if !count_only {
        for eb in enumerate_ebs(&poset)? {
            let a: Vec<String> = eb.order_a().iter().map(|v| v.to_string()).collect();
            let b: Vec<String> = eb.order_b().iter().map(|v| v.to_string()).collect();
            let _ = writeln!(text, "A: {} | B: {}", a.join(","), b.join(","));
        }
    }
    let _ = writeln!(text, "total: {total}");
    Ok(text)
}

fn run_triangulate(cli: &Cli, path: &Path) -> Result<String> {
    let poset = load_poset(path)?;
    let (rooted, augmented) = rooted_view(&poset);
    let tri = triangulation(&rooted, ENUMERATION_CAP)?;
    let dim = rooted.dimension();
    let comments = preamble(
        cli,
        "triangulate",
        &[
            format!("poset {}", poset.hash_hex()),
            format!("root {}", if augmented { "adjoined" } else { "element 0" }),
        ],
    );
    let mut header: Vec<String> = vec!["id".into(), "bipartition".into()];
    for i in 0..=dim {
        header.push(format!("v{i}"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut rows = Vec::with_capacity(tri.len());
    for (id, (eb, simplex)) in tri.iter().enumerate() {
        let a: Vec<String> = eb.order_a().iter().map(|v| v.to_string()).collect();
        let b: Vec<String> = eb.order_b().iter().map(|v| v.to_string()).collect();
        let mut row = vec![id.to_string(), format!("A: {} | B: {}", a.join(","), b.join(","))];
        for vertex in simplex.vertices() {
            let coords: Vec<String> = vertex.iter().map(|c| c.to_string()).collect();
            row.push(coords.join(" "));
        }
        rows.push(row);
    }
    csv_table(&comments, &header_refs, &rows)
}

fn column_names(poset: &Poset) -> Vec<String> {
    match poset.labels() {
        Some(labels) => labels.to_vec(),
        None => (0..poset.len()).map(|i| format!("x{i}")).collect(),
    }
}

fn run_sample(cli: &Cli, path: &Path, n: Option<u64>, policy: MaximalPolicy) -> Result<String> {
    let poset = load_poset(path)?;
    let (rooted, augmented) = rooted_view(&poset);
    let sampler = PosetBallSampler::new(&rooted, policy)?;
    let n = n.unwrap_or(cli.trials);
    let comments = preamble(
        cli,
        "sample",
        &[
            format!("poset {}", poset.hash_hex()),
            format!("policy {}", policy.name()),
            format!("root {}", if augmented { "adjoined (column dropped)" } else { "element 0" }),
        ],
    );
    let names = column_names(&poset);
    let header: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut rows = Vec::with_capacity(n as usize);
    for i in 0..n {
        let mut rng = stream_rng(cli.seed, i);
        let y = sampler.sample(&mut rng);
        let coords = if augmented { &y[1..] } else { &y[..] };
        rows.push(coords.iter().map(|c| fmt_f64(*c)).collect());
    }
    csv_table(&comments, &header, &rows)
}

fn run_mechanism(cli: &Cli, args: &MechanismArgs) -> Result<String> {
    let poset = load_poset(&args.poset)?;
    let data = if let Some(path) = &args.records {
        let records = read_records_csv(path, poset.len())?;
        mechanism::aggregate(&poset, &records)?
    } else {
        let path = args.counts.as_ref().expect("clap enforces records xor counts");
        let counts = read_counts_csv(path, poset.len())?;
        let record_count = args
            .record_count
            .unwrap_or_else(|| counts.iter().copied().max().unwrap_or(0));
        CountVector::new(&poset, counts, record_count)?
    };
    let config = MechanismConfig::new(args.epsilon)?
        .with_sensitivity(args.sensitivity)?
        .with_policy(args.policy)
        .with_seed(cli.seed);
    let mut rng = stream_rng(cli.seed, 0);
    let raw: Vec<f64> = data.counts.iter().map(|&c| c as f64).collect();
    let release = match args.baseline {
        None => mechanism::private_count(&poset, &data, &config, &mut rng)?,
        Some(Baseline::Linf) => mechanism::linf_mechanism(&raw, &config, &mut rng)?,
        Some(Baseline::L1) => mechanism::laplace_mechanism(&raw, &config, &mut rng)?,
    };
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "mechanism",
        "config": {
            "argv": argv_tail(),
            "seed": cli.seed,
            "trials": cli.trials,
            "threads": cli.threads,
            "epsilon": args.epsilon,
            "sensitivity": args.sensitivity,
            "policy": args.policy.name(),
            "baseline": args.baseline.map(Baseline::name),
        },
        "poset_hash": poset.hash_hex(),
        "d": poset.len(),
        "record_count": data.record_count,
        "counts": data.counts,
        "release": release,
    });
    json_output(&value)
}

fn run_randposet(cli: &Cli, d: usize, steps: Option<u64>) -> Result<String> {
    let steps = steps.unwrap_or_else(|| default_steps(d));
    let mut rng = stream_rng(cli.seed, 0);
    let mut chain = posetball::randposet::DagChain::new(d)?;
    chain.run(steps, &mut rng);
    let poset = posetball::randposet::dag_to_poset(chain.arcs())?;
    let notes = format!(
        "randposet --d {d} --seed {} --steps {steps}; poset_hash {}",
        cli.seed,
        poset.hash_hex()
    );
    Ok(poset.to_file_string_with_notes(Some(notes)))
}

fn run_verify(cli: &Cli, suite: SuiteArg) -> Result<String> {
    let suites: Vec<VerifySuite> = match suite {
        SuiteArg::All => VerifySuite::all().to_vec(),
        SuiteArg::One(s) => vec![s],
    };
    let mut reports = Vec::with_capacity(suites.len());
    let mut all_passed = true;
    for s in suites {
        let report = run_suite(s, cli.seed, cli.trials)?;
        all_passed &= report.passed;
        reports.push(serde_json::to_value(&report).context("serializing report")?);
    }
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "verify",
        "config": config_echo(cli),
        "passed": all_passed,
        "reports": reports,
    });
    json_output(&value)
}

fn run_experiment(cli: &Cli, cmd: &ExperimentCmd) -> Result<String> {
    match cmd {
        ExperimentCmd::LpCurve { d, p } => {
            let rows = lp_curve(d, p)?;
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![r.d.to_string(), fmt_f64(r.p), fmt_f64(r.scaled_expected)])
                .collect();
            let comments = preamble(cli, "experiment lp-curve", &[]);
            csv_table(&comments, &["d", "p", "scaled_expected"], &table)
        }
        ExperimentCmd::RandomRatio { d_min, d_max, d_step, posets } => {
            if *d_step == 0 {
                bail!("--d-step must be at least 1");
            }
            if *d_min == 0 || d_min > d_max {
                bail!("bad dimension range {d_min}..={d_max}");
            }
            let ds: Vec<usize> = (*d_min..=*d_max).step_by(*d_step).collect();
            let rows = random_ratio_sweep_grid(&ds, *posets, cli.trials, cli.seed)?;
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.d.to_string(),
                        fmt_f64(r.mean_ratio),
                        fmt_f64(r.stderr),
                        r.n_posets.to_string(),
                    ]
                })
                .collect();
            let comments = preamble(cli, "experiment random-ratio", &[]);
            csv_table(&comments, &["d", "mean_ratio", "stderr", "n_posets"], &table)
        }
        ExperimentCmd::Structure { d, posets, min_bucket } => {
            let sweep = structure_sweep(*d, *posets, cli.trials, *min_bucket, cli.seed)?;
            let mut table = Vec::new();
            for row in sweep.depth_buckets.iter().chain(sweep.edge_buckets.iter()) {
                table.push(vec![
                    row.metric.to_string(),
                    row.bucket.to_string(),
                    fmt_f64(row.mean_ratio),
                    row.n.to_string(),
                ]);
            }
            let comments = preamble(
                cli,
                "experiment structure",
                &[format!("total_posets {}", sweep.total_posets)],
            );
            csv_table(&comments, &["metric", "bucket", "mean_ratio", "n"], &table)
        }
        ExperimentCmd::Nhis { sections } => {
            let mut table = Vec::new();
            let mut extra = Vec::new();
            for (i, &s) in sections.iter().enumerate() {
                let mut rng = stream_rng(cli.seed, i as u64);
                let record = nhis_experiment(s, cli.trials, &mut rng)?;
                extra.push(format!("poset {} {}", sections_label(s), record.poset_hash));
                table.push(vec![
                    sections_label(s).to_string(),
                    record.d.to_string(),
                    fmt_f64(record.ratio),
                    record.trials.to_string(),
                ]);
            }
            let comments = preamble(cli, "experiment nhis", &extra);
            csv_table(&comments, &["sections", "d", "ratio", "trials"], &table)
        }
    }
}

// ---------------------------------------------------------------------------
// CSV input.

/// Reads binary records: one row per record, `d` columns of 0/1. A single
/// leading header row of non-numeric names is allowed and skipped;
/// `#`-prefixed lines are comments.
fn read_records_csv(path: &Path, d: usize) -> Result<Vec<Vec<u8>>> {
    let rows = read_numeric_csv(path)?;
    let mut records = Vec::with_capacity(rows.len());
    for (index, row) in rows.into_iter().enumerate() {
        if row.len() != d {
            bail!(
                "record {index} in {} has {} columns, expected {d}",
                path.display(),
                row.len()
            );
        }
        let mut record = Vec::with_capacity(d);
        for value in row {
            if value > 1 {
                bail!("record {index} in {} contains {value}; entries must be 0 or 1", path.display());
            }
            record.push(value as u8);
        }
        records.push(record);
    }
    Ok(records)
}

/// Reads `d` counts laid out as a single row, a single column, or any
/// rectangle; all numeric fields are flattened in row-major order.
fn read_counts_csv(path: &Path, d: usize) -> Result<Vec<u64>> {
    let rows = read_numeric_csv(path)?;
    let counts: Vec<u64> = rows.into_iter().flatten().collect();
    if counts.len() != d {
        bail!("{} holds {} counts, expected {d}", path.display(), counts.len());
    }
    Ok(counts)
}

fn read_numeric_csv(path: &Path) -> Result<Vec<Vec<u64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("reading {}", path.display()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<u64>, _> =
            record.iter().map(|f| f.parse::<u64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            // Tolerate one leading header row of column names.
            Err(_) if index == 0 && rows.is_empty() => continue,
            Err(e) => bail!("row {index} of {} is not numeric: {e}", path.display()),
        }
    }
    Ok(rows)
}
