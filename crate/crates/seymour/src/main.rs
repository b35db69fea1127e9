//! Command-line front door: file I/O, subcommand dispatch, and reports in
//! text or line-oriented JSON.

use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use seymour::degenerate;
use seymour::error::{Error, Result};
use seymour::graph::{MissingStructure, OrientedGraph, Tournament, VertexId};
use seymour::io;
use seymour::matching::{self, ForcedStatus};
use seymour::median::{self, SedimentOutcome};
use seymour::oracle::{self, FuzzConfig, FuzzReport, InstanceClass};
use seymour::witness;

#[derive(Parser)]
#[command(
    name = "seymour",
    version,
    about = "Second-neighborhood witnesses in near-tournaments",
    max_term_width = 100
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Label table: one vertex name per line, for vertex 0, 1, ...
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
    /// Dump full traces: choice vectors, orderings, sedimentation history.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    JsonLines,
}

#[derive(Subcommand)]
enum Command {
    /// Per-vertex neighborhoods, sinks, and the missing-edge structure.
    Analyze {
        /// Edge-list file, or `-` for stdin.
        input: PathBuf,
    },
    /// Find a verified witness with the pipeline the structure calls for.
    Witness {
        input: PathBuf,
    },
    /// Exact maximum-value ordering of a tournament.
    MedianOrder {
        input: PathBuf,
        /// Largest vertex count the exact solver will accept.
        #[arg(long, default_value_t = median::DEFAULT_EXACT_LIMIT)]
        limit_n: usize,
    },
    /// Decompose the missing-edge digraph into paths and cycles.
    Delta {
        input: PathBuf,
    },
    /// Orient the missing edges into a safe completion.
    Complete {
        input: PathBuf,
        /// Search all safe completions for one of maximum ordering value.
        #[arg(long)]
        max: bool,
    },
    /// Iterate sedimentation on a good median order of the completion.
    Sediment {
        input: PathBuf,
        /// Step budget before giving up.
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
    /// Split into a 2-degenerate and an independent part, then scan for a witness.
    Degenerate {
        input: PathBuf,
        /// Partition file (`A: ...` / `B: ...`); searched for when absent.
        #[arg(long)]
        partition: Option<PathBuf>,
        /// Largest vertex count the partition search will accept.
        #[arg(long, default_value_t = degenerate::DEFAULT_PARTITION_LIMIT)]
        limit_n: usize,
    },
    /// Run seeded property fuzzing over one instance class.
    Fuzz {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Instance class to generate.
        #[arg(long, default_value = "tournament-minus-matching")]
        class: String,
        /// Master seed; per-trial seeds derive from it.
        #[arg(long, default_value_t = 0x5EED)]
        seed: u64,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Largest instance size to generate (sizes range from 4 up to this).
        #[arg(long, default_value_t = 10)]
        limit_n: usize,
    },
    /// Emit one generated instance as an edge list.
    Gen {
        #[arg(long, default_value = "tournament-minus-matching")]
        class: String,
        /// Vertex count.
        #[arg(short = 'n', long, default_value_t = 8)]
        size: usize,
        #[arg(long, default_value_t = 0x5EED)]
        seed: u64,
    },
    /// Emit the built-in six-vertex sinkless reference instance.
    Figure2,
}

fn main() {
    // Die quietly when the read end of a pipe closes, like other line tools.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::try_parse().unwrap_or_else(|e| {
        let _ = e.print();
        process::exit(if e.use_stderr() { 1 } else { 0 });
    });
    match run(&cli) {
        Ok(code) => process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            process::exit(e.exit_code());
        }
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Error::Input(format!("reading stdin: {e}")))?;
        return Ok(text);
    }
    std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("reading {}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<OrientedGraph> {
    io::parse_edge_list(&read_input(path)?)
}

/// Vertex names: the label table where provided, indices otherwise.
struct Names(Vec<String>);

impl Names {
    fn load(cli: &Cli) -> Result<Names> {
        Ok(Names(match &cli.labels {
            Some(path) => io::parse_labels(&read_input(path)?),
            None => Vec::new(),
        }))
    }

    fn of(&self, v: VertexId) -> String {
        self.0.get(v).cloned().unwrap_or_else(|| v.to_string())
    }

    fn list(&self, vs: &[VertexId]) -> String {
        if vs.is_empty() {
            "(none)".into()
        } else {
            vs.iter().map(|&v| self.of(v)).collect::<Vec<_>>().join(", ")
        }
    }

    fn json(&self, n: usize) -> serde_json::Value {
        if self.0.is_empty() {
            serde_json::Value::Null
        } else {
            json!((0..n).map(|v| self.of(v)).collect::<Vec<_>>())
        }
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let names = Names::load(cli)?;
    match &cli.command {
        Command::Analyze { input } => analyze(cli, &names, &load_graph(input)?),
        Command::Witness { input } => {
            let g = load_graph(input)?;
            let report = witness::find_witness(&g)?;
            print_witness(cli, &names, &report);
            Ok(0)
        }
        Command::MedianOrder { input, limit_n } => {
            let t = Tournament::new(load_graph(input)?)?;
            let order = median::compute_median_order_limited(&t, *limit_n)?;
            match cli.format {
                Format::Text => {
                    println!("order: {}", names.list(order.order()));
                    println!("value: {}", order.value());
                    println!("feed: {}", names.of(order.feed_vertex()));
                }
                Format::JsonLines => println!(
                    "{}",
                    json!({
                        "record": "median-order",
                        "order": order.order(),
                        "value": order.value(),
                        "feed": order.feed_vertex(),
                    })
                ),
            }
            Ok(0)
        }
        Command::Delta { input } => delta(cli, &names, &load_graph(input)?),
        Command::Complete { input, max } => complete(cli, &names, &load_graph(input)?, *max),
        Command::Sediment { input, steps } => sediment(cli, &names, &load_graph(input)?, *steps),
        Command::Degenerate { input, partition, limit_n } => {
            let g = load_graph(input)?;
            let (a, b) = match partition {
                Some(path) => io::parse_partition(&read_input(path)?)?,
                None => match degenerate::find_partition_limited(&g, *limit_n)? {
                    Some(p) => (p.two_degenerate, p.independent),
                    None => {
                        return Err(Error::Input(
                            "no split into a 2-degenerate and an independent part exists"
                                .into(),
                        ))
                    }
                },
            };
            let report = witness::witness_degenerate(&g, &a, &b)?;
            match cli.format {
                Format::Text => {
                    println!("two-degenerate part: {}", names.list(&a));
                    println!("independent part: {}", names.list(&b));
                }
                Format::JsonLines => println!(
                    "{}",
                    json!({"record": "partition", "two_degenerate": a, "independent": b})
                ),
            }
            print_witness(cli, &names, &report);
            Ok(0)
        }
        Command::Fuzz { trials, class, seed, jobs, limit_n } => {
            if *limit_n < 4 {
                return Err(Error::Input("fuzzing needs a size limit of at least 4".into()));
            }
            let config = FuzzConfig {
                class: InstanceClass::parse(class)?,
                trials: *trials,
                n_range: (4, *limit_n),
                master_seed: *seed,
                jobs: *jobs,
            };
            let report = oracle::fuzz(&config)?;
            print_fuzz(cli, &config, &report);
            Ok(fuzz_exit_code(&report))
        }
        Command::Gen { class, size, seed } => {
            let instance = oracle::generate(InstanceClass::parse(class)?, *size, *seed)?;
            match cli.format {
                Format::Text => {
                    if let Some(p) = &instance.partition {
                        println!("# A: {}", io::format_ordering(&p.two_degenerate));
                        println!("# B: {}", io::format_ordering(&p.independent));
                    }
                    print!("{}", io::format_edge_list(&instance.graph));
                }
                Format::JsonLines => println!(
                    "{}",
                    json!({
                        "record": "instance",
                        "class": instance.class.name(),
                        "n": instance.graph.vertex_count(),
                        "arcs": instance.graph.arcs(),
                        "partition": instance.partition.as_ref().map(|p| json!({
                            "two_degenerate": p.two_degenerate,
                            "independent": p.independent,
                        })),
                    })
                ),
            }
            Ok(0)
        }
        Command::Figure2 => {
            let (g, labels) = oracle::figure2_instance();
            match cli.format {
                Format::Text => {
                    println!("# labels: {}", labels.join(" "));
                    print!("{}", io::format_edge_list(&g));
                }
                Format::JsonLines => println!(
                    "{}",
                    json!({
                        "record": "instance",
                        "n": g.vertex_count(),
                        "arcs": g.arcs(),
                        "labels": labels,
                    })
                ),
            }
            Ok(0)
        }
    }
}

fn analyze(cli: &Cli, names: &Names, g: &OrientedGraph) -> Result<i32> {
    oracle::check_neighborhood_agreement(g)?;
    let reports: Vec<_> = (0..g.vertex_count())
        .map(|v| g.neighborhood_report(v))
        .collect::<Result<_>>()?;
    let witnesses: Vec<VertexId> =
        reports.iter().filter(|r| r.is_witness).map(|r| r.vertex).collect();
    let structure = g.classify_missing_structure();
    match cli.format {
        Format::Text => {
            println!("{} vertices, {} arcs", g.vertex_count(), g.arc_count());
            let missing = g.missing_edges();
            if missing.is_empty() {
                println!("missing edges: (none)");
            } else {
                let pairs: Vec<String> = missing
                    .iter()
                    .map(|&(u, v)| format!("{{{}, {}}}", names.of(u), names.of(v)))
                    .collect();
                println!("missing edges: {}", pairs.join(" "));
            }
            println!("structure: {}", describe_structure(&structure, names));
            for r in &reports {
                println!(
                    "{}: out -> {} | second -> {} | {}",
                    names.of(r.vertex),
                    names.list(&r.out),
                    names.list(&r.second),
                    if r.is_witness { "witness" } else { "not a witness" }
                );
            }
            println!("sinks: {}", names.list(&g.find_sinks()));
            println!("witnesses: {}", names.list(&witnesses));
        }
        Format::JsonLines => {
            println!(
                "{}",
                json!({
                    "record": "graph",
                    "n": g.vertex_count(),
                    "arcs": g.arc_count(),
                    "structure": structure,
                    "sinks": g.find_sinks(),
                    "witnesses": witnesses,
                    "labels": names.json(g.vertex_count()),
                })
            );
            for r in &reports {
                let mut value = serde_json::to_value(r).expect("report serializes");
                value["record"] = json!("vertex");
                println!("{value}");
            }
        }
    }
    Ok(0)
}

fn describe_structure(s: &MissingStructure, names: &Names) -> String {
    match s {
        MissingStructure::PureMatching { pairs } if pairs.is_empty() => "tournament".into(),
        MissingStructure::PureMatching { pairs } => {
            format!("tournament minus a matching of {} edge(s)", pairs.len())
        }
        MissingStructure::MatchingPlusStar { pairs, center, leaves } => format!(
            "tournament minus a matching of {} edge(s) plus a star at {} with {} leaf(s)",
            pairs.len(),
            names.of(*center),
            leaves.len()
        ),
        MissingStructure::Other => "outside the matching and star classes".into(),
    }
}

fn print_witness(cli: &Cli, names: &Names, report: &witness::WitnessReport) {
    match cli.format {
        Format::Text => {
            println!("witness: {}", names.of(report.witness));
            println!("argument: {}", report.proof_path.tag());
            println!(
                "neighborhood: {} out, {} second",
                report.out_neighbors.len(),
                report.second_out_neighbors.len()
            );
            if cli.verbose {
                println!("out -> {}", names.list(&report.out_neighbors));
                println!("second -> {}", names.list(&report.second_out_neighbors));
                println!("certified together: {}", names.list(&report.witnesses));
            }
        }
        Format::JsonLines => {
            let mut value = serde_json::to_value(report).expect("report serializes");
            value["record"] = json!("witness");
            println!("{value}");
        }
    }
}

fn delta(cli: &Cli, names: &Names, g: &OrientedGraph) -> Result<i32> {
    let d = matching::build_delta(g)?;
    let status: Vec<ForcedStatus> = d
        .nodes
        .iter()
        .map(|&(a, b)| matching::forced_status(g, a, b))
        .collect::<Result<_>>()?;
    match cli.format {
        Format::Text => {
            println!("missing edges: {}", d.nodes.len());
            for (i, &(a, b)) in d.nodes.iter().enumerate() {
                println!(
                    "e{i} = {{{}, {}}} [{}]",
                    names.of(a),
                    names.of(b),
                    describe_status(status[i], names)
                );
            }
            for arc in &d.arcs {
                println!(
                    "e{} -> e{} (orienting {} -> {} forces {} -> {})",
                    arc.from,
                    arc.to,
                    names.of(arc.first.0),
                    names.of(arc.first.1),
                    names.of(arc.second.0),
                    names.of(arc.second.1)
                );
            }
            for (i, p) in d.paths.iter().enumerate() {
                let chain: Vec<String> = p.iter().map(|e| format!("e{e}")).collect();
                println!("path {i}: {}", chain.join(" -> "));
            }
            for (i, c) in d.cycles.iter().enumerate() {
                let chain: Vec<String> = c.iter().map(|e| format!("e{e}")).collect();
                println!("cycle {i}: {} -> e{}", chain.join(" -> "), c[0]);
            }
            let blocks = matching::home_partition(g, &d);
            let described: Vec<String> = blocks
                .iter()
                .map(|b| format!("{{{}}}", names.list(b)))
                .collect();
            println!("homes: {}", described.join(" "));
        }
        Format::JsonLines => {
            println!(
                "{}",
                json!({
                    "record": "delta",
                    "edges": d.nodes,
                    "forced": status
                        .iter()
                        .map(|s| describe_status(*s, &Names(Vec::new())))
                        .collect::<Vec<_>>(),
                    "arcs": d.arcs.iter().map(|a| json!({
                        "from": a.from,
                        "to": a.to,
                        "first": a.first,
                        "second": a.second,
                    })).collect::<Vec<_>>(),
                    "paths": d.paths,
                    "cycles": d.cycles,
                    "homes": matching::home_partition(g, &d),
                })
            );
        }
    }
    Ok(0)
}

fn describe_status(s: ForcedStatus, names: &Names) -> String {
    match s {
        ForcedStatus::Unforced => "unforced".into(),
        ForcedStatus::SinglyForced { from, to } => {
            format!("forced {} -> {}", names.of(from), names.of(to))
        }
        ForcedStatus::DualForced => "dual-forced".into(),
    }
}

fn complete(cli: &Cli, names: &Names, g: &OrientedGraph, max: bool) -> Result<i32> {
    let (completion, choices, median) = if max {
        let m = matching::max_value_safe_completion(g)?;
        (m.completion, m.choices, Some(m.median))
    } else {
        let d = matching::build_delta(g)?;
        let k = matching::free_choice_edges(g, &d)?.len();
        let choices = vec![false; k];
        (matching::safe_completion(g, &choices)?, choices, None)
    };
    match cli.format {
        Format::Text => {
            let bits: Vec<&str> = choices.iter().map(|&b| if b { "1" } else { "0" }).collect();
            println!("choices: {}", if bits.is_empty() { "(none)".into() } else { bits.join(" ") });
            if let Some(m) = &median {
                println!("order: {}", names.list(m.order()));
                println!("value: {}", m.value());
            }
            if cli.verbose {
                for (&(u, v), &(x, y)) in completion.dashed() {
                    println!(
                        "dashed {} -> {} (carried by {} -> {})",
                        names.of(u),
                        names.of(v),
                        names.of(x),
                        names.of(y)
                    );
                }
            }
            print!("{}", io::format_edge_list(completion.tournament().graph()));
        }
        Format::JsonLines => {
            println!(
                "{}",
                json!({
                    "record": "completion",
                    "choices": choices,
                    "arcs": completion.tournament().graph().arcs(),
                    "dashed": completion.dashed().iter()
                        .map(|(k, v)| json!({"arc": k, "fact": v}))
                        .collect::<Vec<_>>(),
                    "order": median.as_ref().map(|m| m.order().to_vec()),
                    "value": median.as_ref().map(|m| m.value()),
                })
            );
        }
    }
    Ok(0)
}

fn sediment(cli: &Cli, names: &Names, g: &OrientedGraph, steps: usize) -> Result<i32> {
    let max = matching::max_value_safe_completion(g)?;
    let t = max.completion.tournament();
    let d = matching::build_delta(g)?;
    let partition = median::ModulePartition::new(t.graph(), matching::home_partition(g, &d))?;
    let good = median::good_median_order(t, &partition, &max.median)?;
    let outcome = median::sediment_iterate(t, &partition, &good, steps)?;
    match cli.format {
        Format::Text => match &outcome {
            SedimentOutcome::Stable { fixpoint, steps } => {
                println!("stable after {steps} step(s)");
                println!("order: {}", names.list(fixpoint.order()));
                println!("value: {}", fixpoint.value());
            }
            SedimentOutcome::Periodic { history, period_start } => {
                println!(
                    "periodic: step {} repeats step {period_start}",
                    history.len() - 1
                );
                if cli.verbose {
                    for (i, order) in history.iter().enumerate() {
                        println!("step {i}: {}", names.list(order));
                    }
                } else {
                    println!("order: {}", names.list(&history[*period_start]));
                }
            }
        },
        Format::JsonLines => match &outcome {
            SedimentOutcome::Stable { fixpoint, steps } => println!(
                "{}",
                json!({
                    "record": "sediment",
                    "outcome": "stable",
                    "steps": steps,
                    "order": fixpoint.order(),
                    "value": fixpoint.value(),
                })
            ),
            SedimentOutcome::Periodic { history, period_start } => println!(
                "{}",
                json!({
                    "record": "sediment",
                    "outcome": "periodic",
                    "period_start": period_start,
                    "orbit": history,
                })
            ),
        },
    }
    Ok(0)
}

fn fuzz_exit_code(report: &FuzzReport) -> i32 {
    if !report.violations.is_empty() {
        3
    } else if !report.refutation_flags.is_empty() {
        4
    } else {
        0
    }
}

fn print_fuzz(cli: &Cli, config: &FuzzConfig, report: &FuzzReport) {
    match cli.format {
        Format::Text => {
            println!(
                "{} trial(s) on {}, sizes {}..={}, master seed {}",
                report.trials,
                config.class.name(),
                config.n_range.0,
                config.n_range.1,
                config.master_seed
            );
            for (tag, count) in &report.branch_coverage {
                println!("covered {tag}: {count}");
            }
            for v in &report.violations {
                println!(
                    "violation [trial {} seed {}] {}: {}",
                    v.trial, v.seed, v.property, v.message
                );
                if cli.verbose {
                    println!("instance:\n{}shrunk:\n{}", v.instance, v.shrunk);
                }
            }
            for f in &report.refutation_flags {
                println!(
                    "potential refutation [trial {} seed {}] {}: {}",
                    f.trial, f.seed, f.probe, f.message
                );
                println!("instance:\n{}shrunk:\n{}", f.instance, f.shrunk);
            }
            println!(
                "result: {} violation(s), {} potential refutation(s)",
                report.violations.len(),
                report.refutation_flags.len()
            );
        }
        Format::JsonLines => {
            println!(
                "{}",
                json!({
                    "record": "fuzz-summary",
                    "class": config.class.name(),
                    "trials": report.trials,
                    "violations": report.violations.len(),
                    "refutation_flags": report.refutation_flags.len(),
                    "branch_coverage": report.branch_coverage,
                })
            );
            for v in &report.violations {
                let mut value = serde_json::to_value(v).expect("violation serializes");
                value["record"] = json!("violation");
                println!("{value}");
            }
            for f in &report.refutation_flags {
                let mut value = serde_json::to_value(f).expect("flag serializes");
                value["record"] = json!("refutation-flag");
                println!("{value}");
            }
        }
    }
}
