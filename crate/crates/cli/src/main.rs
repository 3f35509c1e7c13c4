use std::fs;
use std::io::{self, Write as _};
use std::process::ExitCode;

use bifree::binorm::{norm_bounds, DEFAULT_NORM_BUDGET};
use bifree::experiment::{run_experiment, ExperimentError, ExperimentParams, ExperimentReport, EXPERIMENT_IDS};
use bifree::homomorphism::{distortion_growth, qsur_growth, Budgets, HomError, Verdict};
use bifree::killer::{cyclically_reduced_killer, killer_word};
use bifree::quasimorphism::{separation_witness, CountingQm, QmError};
use bifree::stallings::{GraphError, StallingsGraph};
use bifree::{classify, Homomorphism, Rank, Word};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

const PASS: u8 = 0;
const VIOLATED: u8 = 1;
const BUDGET: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "bifree", version, about = "Exact computations in free groups with conjugation-invariant word norms")]
struct Cli {
    /// Write output to FILE instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Freely and cyclically reduce a word.
    Reduce {
        word: String,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Certified bounds on the conjugation-invariant norm.
    Norm {
        word: String,
        #[arg(long)]
        rank: Option<usize>,
        /// Longest cyclic core searched exactly by the upper bound.
        #[arg(long, default_value_t = DEFAULT_NORM_BUDGET)]
        budget: usize,
        /// Extra counting quasi-morphism patterns for the lower bound.
        #[arg(long = "qm", value_name = "PATTERN")]
        qms: Vec<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Counting quasi-morphisms.
    Qm {
        #[command(subcommand)]
        command: QmCommand,
    },
    /// Folded Stallings graph of a subgroup.
    Graph {
        generators: Vec<String>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Killer word for a subgroup of infinite index.
    Killer {
        generators: Vec<String>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Classify a homomorphism F_m -> F_n given by generator images.
    Analyze {
        #[arg(long)]
        source_rank: usize,
        #[arg(long)]
        target_rank: usize,
        #[arg(long = "image", num_args = 1.., required = true)]
        images: Vec<String>,
        /// Also compute the growth table up to K.
        #[arg(long, value_name = "K")]
        growth: Option<u64>,
        #[arg(long, default_value_t = 12)]
        ball: usize,
        #[arg(long, default_value_t = 5_000_000)]
        budget: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run one of the built-in experiments.
    Experiment {
        id: String,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        lift_len: Option<usize>,
        #[arg(long)]
        word: Option<String>,
        #[arg(long)]
        kmax: Option<u64>,
        #[arg(long)]
        source_rank: Option<usize>,
        #[arg(long)]
        target_rank: Option<usize>,
        #[arg(long = "image", num_args = 1..)]
        images: Vec<String>,
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Subcommand)]
enum QmCommand {
    /// ψ_w(g).
    Eval {
        pattern: String,
        g: String,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Homogenisation ψ̄_w(g).
    Homog {
        pattern: String,
        g: String,
        #[arg(long)]
        rank: Option<usize>,
        /// Maximum number of core blocks scanned.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// A quasi-morphism separating two elements.
    Separate {
        g: String,
        h: String,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: USAGE, message: message.into() }
    }

    fn violated(message: impl Into<String>) -> Self {
        Failure { code: VIOLATED, message: message.into() }
    }

    fn budget(message: impl Into<String>) -> Self {
        Failure { code: BUDGET, message: message.into() }
    }
}

impl From<bifree::WordError> for Failure {
    fn from(e: bifree::WordError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<QmError> for Failure {
    fn from(e: QmError) -> Self {
        match e {
            QmError::BudgetExhausted { .. } => Failure::budget(e.to_string()),
            QmError::Word(w) => w.into(),
            other => Failure::violated(other.to_string()),
        }
    }
}

impl From<bifree::NormError> for Failure {
    fn from(e: bifree::NormError) -> Self {
        match e {
            bifree::NormError::Qm(q) => q.into(),
            bifree::NormError::Word(w) => w.into(),
            other => Failure::violated(other.to_string()),
        }
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::BudgetExhausted { .. } => Failure::budget(e.to_string()),
            GraphError::Word(w) => w.into(),
            other => Failure::violated(other.to_string()),
        }
    }
}

impl From<HomError> for Failure {
    fn from(e: HomError) -> Self {
        match e {
            HomError::Graph(g) => g.into(),
            HomError::Qm(q) => q.into(),
            HomError::Norm(n) => n.into(),
            HomError::Word(w) => w.into(),
            HomError::ImageCount { .. } => Failure::usage(e.to_string()),
            other => Failure::violated(other.to_string()),
        }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        if e.is_budget() {
            return Failure::budget(e.to_string());
        }
        match e {
            ExperimentError::Unknown(id) => {
                Failure::usage(format!("unknown experiment {id:?}; expected one of {}", EXPERIMENT_IDS.join(", ")))
            }
            ExperimentError::Word(w) => w.into(),
            other => Failure::violated(other.to_string()),
        }
    }
}

fn rank_for(explicit: Option<usize>, words: &[&str]) -> Result<Rank, Failure> {
    let inferred = words.iter().filter_map(|w| Word::infer_rank(w)).max().unwrap_or(0);
    match explicit {
        Some(n) if n < inferred => Err(Failure::usage(format!("--rank {n} is too small for the given words"))),
        Some(n) => Ok(Rank::new(n)?),
        None => Ok(Rank::new(inferred.max(2))?),
    }
}

fn parse_all(rank: Rank, words: &[String]) -> Result<Vec<Word>, Failure> {
    words.iter().map(|w| Word::parse(rank, w).map_err(Failure::from)).collect()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

fn unsupported(format: Format, command: &str) -> Failure {
    let name = match format {
        Format::Text => "text",
        Format::Json => "json",
        Format::Csv => "csv",
        Format::Dot => "dot",
    };
    Failure::usage(format!("--format {name} is not available for {command}"))
}

fn csv_table(columns: &[String], rows: &[Vec<String>]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(columns).expect("in-memory write");
    for r in rows {
        writer.write_record(r).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("flush")).expect("utf-8")
}

fn run(cli: Cli) -> Result<(String, u8), Failure> {
    match cli.command {
        Command::Reduce { word, rank, format } => {
            let rank = rank_for(rank, &[&word])?;
            let g = Word::parse(rank, &word)?;
            let (cyclic, conjugator) = g.cyclic_reduce();
            let out = match format {
                Format::Text => format!("{g}\ncyclic {cyclic} conjugator {conjugator}\n"),
                Format::Json => to_json(&json!({ "reduced": g, "cyclic": cyclic.word(), "conjugator": conjugator })),
                f => return Err(unsupported(f, "reduce")),
            };
            Ok((out, PASS))
        }
        Command::Norm { word, rank, budget, qms, format } => {
            let mut words: Vec<&str> = vec![&word];
            words.extend(qms.iter().map(String::as_str));
            let rank = rank_for(rank, &words)?;
            let g = Word::parse(rank, &word)?;
            let witnesses = parse_all(rank, &qms)?
                .into_iter()
                .map(|p| CountingQm::new(p).map_err(Failure::from))
                .collect::<Result<Vec<_>, _>>()?;
            let bounds = norm_bounds(&g, &witnesses, budget)?;
            let out = match format {
                Format::Text => {
                    let factors: Vec<String> =
                        bounds.upper_certificate.iter().map(|f| format!("({})", f.value())).collect();
                    format!(
                        "{} <= |{g}| <= {}\ncertificate {}\n",
                        bounds.lower,
                        bounds.upper,
                        if factors.is_empty() { "1".to_string() } else { factors.join(" ") }
                    )
                }
                Format::Json => to_json(&bounds),
                f => return Err(unsupported(f, "norm")),
            };
            Ok((out, PASS))
        }
        Command::Qm { command } => run_qm(command),
        Command::Graph { generators, rank, format } => {
            let words: Vec<&str> = generators.iter().map(String::as_str).collect();
            let rank = rank_for(rank, &words)?;
            let graph = StallingsGraph::build(rank, &parse_all(rank, &generators)?)?;
            let out = match format {
                Format::Dot => graph.to_dot(),
                Format::Json => to_json(&graph.schema()),
                Format::Text => {
                    let mut s = format!(
                        "vertices {} edges {} rank {} index {}\n",
                        graph.vertex_count(),
                        graph.edge_count(),
                        graph.subgroup_rank(),
                        match graph.index() {
                            bifree::Index::Finite(d) => d.to_string(),
                            bifree::Index::Infinite => "infinite".into(),
                        }
                    );
                    for e in graph.edges() {
                        s += &format!("v{} -{}-> v{}\n", e.src, bifree::Letter::new(e.generator, false), e.dst);
                    }
                    for c in graph.bad_vertices() {
                        let missing: String = c.missing.iter().map(|l| l.to_text()).collect();
                        s += &format!("bad v{} valence {} missing {missing}\n", c.vertex, c.valence);
                    }
                    s
                }
                f => return Err(unsupported(f, "graph")),
            };
            Ok((out, PASS))
        }
        Command::Killer { generators, rank, trace, format } => {
            let words: Vec<&str> = generators.iter().map(String::as_str).collect();
            let rank = rank_for(rank, &words)?;
            let graph = StallingsGraph::build(rank, &parse_all(rank, &generators)?)?;
            let killer = killer_word(&graph).map_err(|e| Failure::violated(e.to_string()))?;
            let cyclic = if rank.get() >= 2 { cyclically_reduced_killer(&graph, &killer).ok() } else { None };
            let out = match format {
                Format::Json => to_json(&json!({
                    "killer": killer.word,
                    "verified": killer.verified,
                    "cyclically_reduced": cyclic.as_ref().map(|c| &c.word),
                    "trace": if trace { Some(&killer.steps) } else { None },
                })),
                Format::Text => {
                    let mut s = String::new();
                    if trace {
                        for (k, step) in killer.steps.iter().enumerate() {
                            match step.terminus {
                                None => s += &format!("w{} = {}: reading from v{} leaves the graph\n", k + 1, step.after, step.vertex),
                                Some(t) => {
                                    let bad = step.bad_vertex.expect("bad vertex");
                                    let walk = if step.extension.is_identity() {
                                        format!("v{t} is bad")
                                    } else {
                                        format!("continue by {} to bad vertex v{bad}", step.extension)
                                    };
                                    s += &format!(
                                        "w{} = {}: from v{} the word ends at v{t}, {walk}, exit by {}\n",
                                        k + 1,
                                        step.after,
                                        step.vertex,
                                        step.exit.expect("exit letter"),
                                    )
                                }
                            }
                        }
                    }
                    s += &format!("killer {}\n", killer.word);
                    if let Some(c) = &cyclic {
                        s += &format!("cyclically reduced {}\n", c.word);
                    }
                    s
                }
                f => return Err(unsupported(f, "killer")),
            };
            Ok((out, PASS))
        }
        Command::Analyze { source_rank, target_rank, images, growth, ball, budget, format } => {
            let target = Rank::new(target_rank)?;
            let source = Rank::new(source_rank)?;
            let hom = Homomorphism::new(source, target, parse_all(target, &images)?)?;
            let budgets = Budgets { image_ball_radius: ball, max_paths: budget, ..Budgets::default() };
            let verdict = classify(&hom, &budgets)?;
            let (columns, rows) = match (&verdict, growth) {
                (Verdict::FiniteIndexProper { witness, .. }, Some(k)) => {
                    let rows = distortion_growth(witness, &hom, k, &budgets)?;
                    (
                        vec!["k", "source_value", "source_qm_bound", "source_lower", "image_upper"],
                        rows.iter()
                            .map(|r| {
                                vec![
                                    r.k.to_string(),
                                    r.source_value.to_string(),
                                    r.source_qm_bound.to_string(),
                                    r.source_lower.to_string(),
                                    r.image_upper.to_string(),
                                ]
                            })
                            .collect::<Vec<_>>(),
                    )
                }
                (Verdict::InfiniteIndex { witness }, Some(k)) => {
                    let rows = qsur_growth(witness, k)?;
                    (
                        vec!["k", "value", "lower"],
                        rows.iter().map(|r| vec![r.k.to_string(), r.value.to_string(), r.lower.to_string()]).collect(),
                    )
                }
                _ => (Vec::new(), Vec::new()),
            };
            let columns: Vec<String> = columns.into_iter().map(String::from).collect();
            let out = match format {
                Format::Json => {
                    let mut value = json!({ "homomorphism": hom, "verdict": verdict });
                    if growth.is_some() {
                        value["growth"] = json!({ "columns": columns, "rows": rows });
                    }
                    to_json(&value)
                }
                Format::Csv => {
                    if growth.is_none() || columns.is_empty() {
                        return Err(Failure::usage("--format csv needs --growth and a non-isomorphism with a growth table"));
                    }
                    csv_table(&columns, &rows)
                }
                Format::Text => format!("{}\n", verdict.kind()),
                f => return Err(unsupported(f, "analyze")),
            };
            Ok((out, PASS))
        }
        Command::Experiment {
            id,
            max_len,
            lift_len,
            word,
            kmax,
            source_rank,
            target_rank,
            images,
            trace,
            budget,
            format,
        } => {
            let word = match word {
                Some(w) => {
                    let rank = rank_for(None, &[&w])?;
                    Some(Word::parse(rank, &w)?)
                }
                None => None,
            };
            let homomorphism = if images.is_empty() {
                None
            } else {
                let target = Rank::new(target_rank.ok_or_else(|| Failure::usage("--image needs --target-rank"))?)?;
                let source = Rank::new(source_rank.unwrap_or(images.len()))?;
                Some(Homomorphism::new(source, target, parse_all(target, &images)?)?)
            };
            let mut budgets = Budgets::default();
            if let Some(b) = budget {
                budgets.max_paths = b;
            }
            let params = ExperimentParams { max_len, lift_len, word, kmax, homomorphism, trace, budgets };
            let report = run_experiment(&id, &params)?;
            let code = if report.passed { PASS } else { VIOLATED };
            let out = match format {
                Format::Json => to_json(&report),
                Format::Csv => report
                    .tables
                    .iter()
                    .map(|t| format!("# {}\n{}", t.name, csv_table(&t.columns, &t.rows)))
                    .collect::<Vec<_>>()
                    .join("\n"),
                Format::Text => report_text(&report),
                f => return Err(unsupported(f, "experiment")),
            };
            Ok((out, code))
        }
    }
}

fn run_qm(command: QmCommand) -> Result<(String, u8), Failure> {
    match command {
        QmCommand::Eval { pattern, g, rank, format } => {
            let rank = rank_for(rank, &[&pattern, &g])?;
            let qm = CountingQm::new(Word::parse(rank, &pattern)?)?;
            let g = Word::parse(rank, &g)?;
            let value = qm.psi(&g)?;
            let out = match format {
                Format::Text => format!("{value}\n"),
                Format::Json => to_json(&json!({ "pattern": qm.pattern(), "g": g, "value": value })),
                f => return Err(unsupported(f, "qm eval")),
            };
            Ok((out, PASS))
        }
        QmCommand::Homog { pattern, g, rank, budget, format } => {
            let rank = rank_for(rank, &[&pattern, &g])?;
            let qm = CountingQm::new(Word::parse(rank, &pattern)?)?;
            let g = Word::parse(rank, &g)?;
            let value = match budget {
                Some(b) => qm.homogenize_within(&g, b)?,
                None => qm.homogenize(&g)?,
            };
            let out = match format {
                Format::Text => format!("{value}\n"),
                Format::Json => to_json(&json!({ "pattern": qm.pattern(), "g": g, "value": value })),
                f => return Err(unsupported(f, "qm homog")),
            };
            Ok((out, PASS))
        }
        QmCommand::Separate { g, h, rank, format } => {
            let rank = rank_for(rank, &[&g, &h])?;
            let (g, h) = (Word::parse(rank, &g)?, Word::parse(rank, &h)?);
            let qm = separation_witness(&g, &h)?;
            let (vg, vh) = (qm.homogenize(&g)?, qm.homogenize(&h)?);
            let out = match format {
                Format::Text => format!("pattern {}\nvalues {vg} {vh}\n", qm.pattern()),
                Format::Json => to_json(&json!({ "pattern": qm.pattern(), "values": [vg, vh] })),
                f => return Err(unsupported(f, "qm separate")),
            };
            Ok((out, PASS))
        }
    }
}

fn report_text(report: &ExperimentReport) -> String {
    let mut s = format!("experiment {}\n", report.id);
    for (k, v) in &report.parameters {
        s += &format!("  {k} = {v}\n");
    }
    for t in &report.tables {
        s += &format!("\n[{}]\n{}\n", t.name, t.columns.join("\t"));
        for r in &t.rows {
            s += &format!("{}\n", r.join("\t"));
        }
    }
    s.push('\n');
    for c in &report.checks {
        s += &format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    s += &format!("{}\n", if report.passed { "passed" } else { "failed" });
    s
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(USAGE),
            };
        }
    };
    let out_path = cli.out.clone();
    match run(cli) {
        Ok((output, code)) => {
            let written = match &out_path {
                Some(path) => fs::write(path, &output),
                None => io::stdout().write_all(output.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(VIOLATED);
            }
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
