//! `spreadgraph`: build, check, attack and convert spread hypergraphs.
//!
//! Exit codes: 0 on pass or success, 1 on a failed check, 2 on usage or
//! input errors. Errors are printed to stderr as JSON.

mod manifest;

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use spreadgraph::attack::{find_dense_subset, AttackConfig};
use spreadgraph::exact::{parse_rational, Fraction, Rational};
use spreadgraph::extractor::{distinctify, family_from_graph, graph_from_family, tuple_graph_from_family, ExtractorFamily};
use spreadgraph::game::{play, GameConfig, Strategy};
use spreadgraph::hypergraph::DEFAULT_SUBSET_BUDGET;
use spreadgraph::rates::{classify_ext, curves_to_csv, emit_threshold_curves, threshold_beta, FWindow, RateParams, Variant};
use spreadgraph::sampler::{
    construct_certified_with, verify_spread, SamplerError, SpreadParams, VerifyMode, DEFAULT_SAMPLES_PER_STRATUM,
};
use spreadgraph::{Hypergraph, VertexSet};

use manifest::Run;

const BUDGET_ENV: &str = "SPREADGRAPH_BUDGET";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed { kind: &'static str, message: String },
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Failed {
            kind: "io",
            message: format!("{}: {e}", path.display()),
        }
    }

    fn failed(kind: &'static str, e: impl Display) -> Self {
        CliError::Failed {
            kind,
            message: e.to_string(),
        }
    }

    fn render(&self) -> String {
        let (kind, message) = match self {
            CliError::Usage(m) => ("usage", m.as_str()),
            CliError::Failed { kind, message } => (*kind, message.as_str()),
        };
        json!({"error": kind, "message": message}).to_string()
    }
}

#[derive(Parser)]
#[command(name = "spreadgraph", version, about = "Spread hypergraphs and the extractor families they encode")]
struct Cli {
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Threshold rate, input-length window and classification.
    Bounds(BoundsArgs),
    /// Sample a spread graph and certify it.
    Construct(ConstructArgs),
    /// Certify that no small set induces many edges.
    Verify(VerifyArgs),
    /// Search for a small dense subset.
    Attack(AttackArgs),
    /// Convert between graphs and extractor families.
    #[command(subcommand)]
    Extract(ExtractCommand),
    /// Play the budgeted description game.
    Game(GameArgs),
}

#[derive(Args, Serialize)]
struct BoundsArgs {
    #[arg(long)]
    alpha: Option<String>,
    /// Rate to classify; defaults to the threshold rate.
    #[arg(long)]
    beta: Option<String>,
    /// Family size; a comma list with --curve.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<u32>,
    /// Emit threshold curves as CSV.
    #[arg(long)]
    curve: bool,
    #[arg(long, default_value_t = 101)]
    points: u32,
    #[arg(long, default_value_t = 0)]
    slack: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ConstructArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    beta: String,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long = "D", default_value_t = 0, allow_hyphen_values = true)]
    d: i64,
    #[arg(long, default_value_t = 2)]
    d_slack: u32,
    #[arg(long)]
    target_edges: Option<u64>,
    #[arg(long)]
    edge_bound: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    max_attempts: u64,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    cert: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ModeArg {
    Exhaustive,
    Randomized,
    AttackAssisted,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    graph: PathBuf,
    #[arg(long)]
    cap: u64,
    #[arg(long)]
    bound: u64,
    #[arg(long, value_enum, default_value = "exhaustive")]
    mode: ModeArg,
    #[arg(long, default_value_t = DEFAULT_SAMPLES_PER_STRATUM)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Attack parameters for attack-assisted mode.
    #[arg(long, default_value = "1/2")]
    beta: String,
    #[arg(long = "D", default_value_t = 0, allow_hyphen_values = true)]
    d: i64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct AttackArgs {
    graph: PathBuf,
    #[arg(long)]
    beta: String,
    #[arg(long = "D", default_value_t = 0, allow_hyphen_values = true)]
    d: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExtractCommand {
    /// Graph file to family file.
    ToFamily(ToFamilyArgs),
    /// Family file to graph file.
    ToGraph(ToGraphArgs),
}

#[derive(Args, Serialize)]
struct ToFamilyArgs {
    graph: PathBuf,
    /// Input length; defaults to log2 of the edge count.
    #[arg(long)]
    f_n: Option<u32>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ToGraphArgs {
    family: PathBuf,
    /// Pad colliding outputs with unused strings first.
    #[arg(long)]
    distinctify: bool,
    /// Emit ordered tuples instead of sets.
    #[arg(long, conflicts_with = "distinctify")]
    tuples: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum StrategyArg {
    Exhaustive,
    GreedyAttack,
    Explicit,
}

#[derive(Args, Serialize)]
struct GameArgs {
    graph: PathBuf,
    #[arg(long)]
    adv_budget: u64,
    #[arg(long)]
    resp_budget: u64,
    #[arg(long, value_enum, default_value = "exhaustive")]
    strategy: StrategyArg,
    /// Vertex ids for the explicit strategy.
    #[arg(long, value_delimiter = ',')]
    set: Vec<u32>,
    #[arg(long, default_value = "1/2")]
    beta: String,
    #[arg(long = "D", default_value_t = 0, allow_hyphen_values = true)]
    d: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn rational(name: &str, s: &str) -> Result<Rational, CliError> {
    parse_rational(s).map_err(|e| CliError::usage(format!("--{name}: {e}")))
}

fn search_budget() -> Result<u64, CliError> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("{BUDGET_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SUBSET_BUDGET),
    }
}

fn read_graph(run: &mut Run, path: &Path) -> Result<Hypergraph, CliError> {
    let text = run.read(path)?;
    Hypergraph::from_json(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn pretty(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("outputs serialize") + "\n"
}

fn attack_config(seed: u64) -> AttackConfig {
    AttackConfig {
        seed,
        ..AttackConfig::default()
    }
}

type Outcome = Result<bool, CliError>;

fn cmd_bounds(args: BoundsArgs) -> Outcome {
    let mut run = Run::new("bounds", &args, None);
    if args.curve {
        let rows = emit_threshold_curves(&args.k, args.points).map_err(|e| CliError::usage(e.to_string()))?;
        run.write(args.output.as_deref(), &curves_to_csv(&rows))?;
        run.finish()?;
        return Ok(true);
    }
    let alpha = rational("alpha", args.alpha.as_deref().ok_or_else(|| CliError::usage("--alpha is required"))?)?;
    let [k] = args.k[..] else {
        return Err(CliError::usage("give exactly one --k without --curve"));
    };
    let threshold = threshold_beta(&alpha, k);
    let beta = match &args.beta {
        Some(b) => rational("beta", b)?,
        None => threshold.clone(),
    };
    let mut out = format!("threshold_beta: {}\n", Fraction(&threshold));
    out.push_str(&format!("alpha: {}\nbeta: {}\nk: {k}\n", Fraction(&alpha), Fraction(&beta)));
    for (name, variant) in [("total", Variant::Total), ("partial", Variant::Partial)] {
        let params = RateParams::new(alpha.clone(), beta.clone(), k, variant).map_err(|e| CliError::usage(e.to_string()))?;
        out.push_str(&format!("{name}.classification: {}\n", classify_ext(&params)));
        match FWindow::new(&params, args.slack) {
            Ok(w) => {
                let sqrt = if w.upper_sqrt_term { " + sqrt(n)" } else { "" };
                out.push_str(&format!(
                    "{name}.f_window: [{} n - {s}, {} n + {s}{sqrt}]\n",
                    Fraction(&w.lower_coeff),
                    Fraction(&w.upper_coeff),
                    s = w.slack_constant
                ));
            }
            Err(e) => out.push_str(&format!("{name}.f_window: undefined ({e})\n")),
        }
    }
    run.write(args.output.as_deref(), &out)?;
    run.finish()?;
    Ok(true)
}

fn cmd_construct(args: ConstructArgs) -> Outcome {
    let mut run = Run::new("construct", &args, Some(args.seed));
    let mut builder = SpreadParams::builder(args.n, args.k, rational("beta", &args.beta)?)
        .d(args.d)
        .d_slack(args.d_slack)
        .seed(args.seed);
    if let Some(a) = &args.alpha {
        builder = builder.alpha(rational("alpha", a)?);
    }
    if let Some(t) = args.target_edges {
        builder = builder.target_edges(t);
    }
    if let Some(b) = args.edge_bound {
        builder = builder.edge_bound(b);
    }
    let params = builder.build().map_err(|e| CliError::usage(e.to_string()))?;
    let (ok, g, cert) = match construct_certified_with(&params, args.max_attempts, search_budget()?) {
        Ok((g, cert)) => (true, g, cert),
        Err(SamplerError::AttemptsExhausted { best, .. }) => {
            let (g, cert) = *best;
            (false, g, cert)
        }
        Err(e) => return Err(CliError::failed("construct", e)),
    };
    run.write(Some(&args.output), &(g.to_json() + "\n"))?;
    let cert_text = cert.to_json() + "\n";
    match &args.cert {
        Some(path) => run.write(Some(path), &cert_text)?,
        None => eprintln!("{}", json!({"pass": cert.pass, "max_e": cert.max_e, "edges": g.edge_count(), "attempts": cert.attempts})),
    }
    run.finish()?;
    Ok(ok)
}

fn cmd_verify(args: VerifyArgs) -> Outcome {
    let mut run = Run::new("verify", &args, Some(args.seed));
    let g = read_graph(&mut run, &args.graph)?;
    let mode = match args.mode {
        ModeArg::Exhaustive => VerifyMode::Exhaustive { budget: search_budget()? },
        ModeArg::Randomized => VerifyMode::Randomized {
            samples_per_stratum: args.samples,
            seed: args.seed,
        },
        ModeArg::AttackAssisted => VerifyMode::AttackAssisted {
            samples_per_stratum: args.samples,
            seed: args.seed,
            beta: rational("beta", &args.beta)?,
            d: args.d,
            attack: attack_config(args.seed),
        },
    };
    let cert = verify_spread(&g, args.cap, args.bound, &mode).map_err(|e| CliError::failed("verify", e))?;
    run.write(args.output.as_deref(), &(cert.to_json() + "\n"))?;
    run.finish()?;
    Ok(cert.pass)
}

fn cmd_attack(args: AttackArgs) -> Outcome {
    let mut run = Run::new("attack", &args, Some(args.seed));
    let g = read_graph(&mut run, &args.graph)?;
    let beta = rational("beta", &args.beta)?;
    let result = find_dense_subset(&g, &beta, args.d, &attack_config(args.seed)).map_err(|e| CliError::failed("attack", e))?;
    run.write(args.output.as_deref(), &pretty(&result))?;
    run.finish()?;
    Ok(result.achieved)
}

fn cmd_extract(cmd: ExtractCommand) -> Outcome {
    match cmd {
        ExtractCommand::ToFamily(args) => {
            let mut run = Run::new("extract to-family", &args, None);
            let g = read_graph(&mut run, &args.graph)?;
            let f_n = match args.f_n {
                Some(f) => f,
                None => {
                    let m = g.edge_count();
                    if !m.is_power_of_two() {
                        return Err(CliError::usage(format!("{m} edges is not a power of two; pass --f-n")));
                    }
                    m.trailing_zeros()
                }
            };
            let fam = family_from_graph(&g, f_n).map_err(|e| CliError::failed("extract", e))?;
            run.write(args.output.as_deref(), &(fam.to_json() + "\n"))?;
            run.finish()?;
        }
        ExtractCommand::ToGraph(args) => {
            let mut run = Run::new("extract to-graph", &args, None);
            let text = run.read(&args.family)?;
            let mut fam = ExtractorFamily::from_json(&text)
                .map_err(|e| CliError::usage(format!("{}: {e}", args.family.display())))?;
            if args.distinctify {
                fam = distinctify(&fam).map_err(|e| CliError::failed("extract", e))?;
            }
            let g = if args.tuples { tuple_graph_from_family(&fam) } else { graph_from_family(&fam) }
                .map_err(|e| CliError::failed("extract", e))?;
            run.write(args.output.as_deref(), &(g.to_json() + "\n"))?;
            run.finish()?;
        }
    }
    Ok(true)
}

fn cmd_game(args: GameArgs) -> Outcome {
    let mut run = Run::new("game", &args, Some(args.seed));
    let g = read_graph(&mut run, &args.graph)?;
    let strategy = match args.strategy {
        StrategyArg::Exhaustive => Strategy::Exhaustive {
            search_budget: search_budget()?,
        },
        StrategyArg::GreedyAttack => Strategy::GreedyAttack {
            beta: rational("beta", &args.beta)?,
            d: args.d,
            config: attack_config(args.seed),
        },
        StrategyArg::Explicit => Strategy::Explicit {
            set: VertexSet::new(args.set.iter().copied()),
        },
    };
    let config = GameConfig {
        adversary_budget: args.adv_budget,
        responder_budget: args.resp_budget,
        strategy,
    };
    let outcome = play(&g, &config).map_err(|e| CliError::failed("game", e))?;
    run.write(args.output.as_deref(), &pretty(&outcome))?;
    run.finish()?;
    Ok(outcome.responder_within_budget)
}

fn run(cli: Cli) -> Outcome {
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build_global()
            .map_err(|e| CliError::failed("workers", e))?;
    }
    match cli.command {
        Command::Bounds(a) => cmd_bounds(a),
        Command::Construct(a) => cmd_construct(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Extract(c) => cmd_extract(c),
        Command::Game(a) => cmd_game(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", CliError::usage(e.to_string().trim_end()).render());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.render());
            ExitCode::from(2)
        }
    }
}
