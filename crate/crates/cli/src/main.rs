//! `talkgraph`: conversation-aware re-ranking of speaker identification
//! scores, driven by case manifests.
//!
//! Subcommands: `rerank` (process a manifest, write a report and the final
//! interaction graph), `evaluate` (print baseline vs re-ranked accuracy for a
//! labeled manifest), `simulate` (generate a synthetic manifest), and
//! `export-graph` (write a manifest's interaction graph).
//!
//! Exit codes: 0 success, 2 usage or input error, 3 missing ground-truth
//! labels where they are required.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use talkgraph_core::io::{
    export_graph, load_case_with_warnings, write_case, write_report, CaseReport, GraphFormat,
};
use talkgraph_core::metrics::{accuracy_report, diff_report, AccuracyReport, Side};
use talkgraph_core::model::{Case, Config};
use talkgraph_core::rerank::process_case;
use talkgraph_core::synth::{generate_case, topology_drift, SynthSpec};
use talkgraph_core::InteractionGraph;

#[derive(Parser)]
#[command(
    name = "talkgraph",
    version,
    about = "Re-ranks multi-speaker identification decisions with an evolving interaction graph"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print per-conversation detail.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Re-rank a case manifest; write a report and the final graph export.
    Rerank(RerankArgs),
    /// Print baseline and re-ranked accuracy for a fully labeled manifest.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic case manifest.
    Simulate(SimulateArgs),
    /// Export the interaction graph implied by a manifest.
    ExportGraph(ExportGraphArgs),
}

/// Re-ranking knobs; every flag overrides one config field and defaults match
/// the library defaults.
#[derive(Args)]
struct ConfigArgs {
    /// Weight of the pair-interaction boost (0 disables it).
    #[arg(long)]
    lambda: Option<f64>,
    /// Candidates kept per utterance after pruning.
    #[arg(long)]
    top_k: Option<usize>,
    /// Keep candidates scoring at least this fraction of the slot's best.
    #[arg(long)]
    rel_threshold: Option<f64>,
    /// Whether one speaker may fill several slots of a conversation.
    #[arg(long)]
    allow_repeat_speakers: Option<bool>,
    /// Cap on combinations enumerated per conversation.
    #[arg(long)]
    max_combinations: Option<u64>,
}

impl ConfigArgs {
    fn to_config(&self) -> Config {
        let defaults = Config::default();
        Config {
            lambda: self.lambda.unwrap_or(defaults.lambda),
            top_k: self.top_k.unwrap_or(defaults.top_k),
            rel_threshold: self.rel_threshold.unwrap_or(defaults.rel_threshold),
            allow_repeat_speakers: self
                .allow_repeat_speakers
                .unwrap_or(defaults.allow_repeat_speakers),
            max_combinations: self.max_combinations.unwrap_or(defaults.max_combinations),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Dot,
    AdjacencyJson,
}

impl FormatArg {
    fn to_format(self) -> GraphFormat {
        match self {
            FormatArg::Dot => GraphFormat::Dot,
            FormatArg::AdjacencyJson => GraphFormat::AdjacencyJson,
        }
    }

    fn extension(self) -> &'static str {
        match self {
            FormatArg::Dot => "dot",
            FormatArg::AdjacencyJson => "json",
        }
    }
}

#[derive(Args)]
struct RerankArgs {
    /// Case manifest to process.
    manifest: PathBuf,
    /// Report path (default: `<manifest stem>-report.json` beside the input).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Graph export path (default: `<manifest stem>-graph.<ext>`).
    #[arg(long)]
    graph_out: Option<PathBuf>,
    /// Graph export format.
    #[arg(long, value_enum, default_value = "dot")]
    format: FormatArg,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Fully labeled case manifest.
    manifest: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Where to write the generated manifest.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    n_speakers: usize,
    #[arg(long, default_value_t = 4)]
    n_groups: usize,
    /// Probability that a conversation stays inside one group.
    #[arg(long, default_value_t = 0.9)]
    within_group_bias: f64,
    #[arg(long, default_value_t = 50)]
    n_conversations: usize,
    #[arg(long, default_value_t = 2)]
    slots_min: usize,
    #[arg(long, default_value_t = 4)]
    slots_max: usize,
    /// Mean raw-score margin of the true speaker over impostors.
    #[arg(long, default_value_t = 3.2)]
    separability: f64,
    /// Standard deviation of the Gaussian score noise.
    #[arg(long, default_value_t = 1.0)]
    noise_sd: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Regroup the population from this conversation index on.
    #[arg(long, requires = "regroup")]
    drift_at: Option<usize>,
    /// Comma-separated new group per old group, e.g. `0,0,1,1` merges pairs.
    #[arg(long, requires = "drift_at", value_delimiter = ',')]
    regroup: Option<Vec<usize>>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphSource {
    /// Record each conversation's ground-truth speaker set.
    Truth,
    /// Run the re-ranker and record its predicted speaker sets.
    Reranked,
}

#[derive(Args)]
struct ExportGraphArgs {
    /// Case manifest to read.
    manifest: PathBuf,
    /// Which speaker sets build the graph.
    #[arg(long, value_enum, default_value = "reranked")]
    from: GraphSource,
    /// Export format.
    #[arg(long, value_enum, default_value = "dot")]
    format: FormatArg,
    /// Output path (default: `<manifest stem>-graph.<ext>`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

/// Raised where an operation needs ground-truth labels and the manifest has
/// none; mapped to exit code 3.
#[derive(Debug, thiserror::Error)]
#[error("manifest is not fully labeled: {0}; ground-truth labels are required")]
struct MissingLabels(String);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    let missing_labels = err.chain().any(|cause| {
        cause.is::<MissingLabels>()
            || matches!(
                cause.downcast_ref::<talkgraph_core::MetricsError>(),
                Some(talkgraph_core::MetricsError::MissingTruth { .. })
            )
    });
    if missing_labels {
        3
    } else {
        2
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Rerank(args) => run_rerank(args, cli.verbose),
        Command::Evaluate(args) => run_evaluate(args, cli.verbose),
        Command::Simulate(args) => run_simulate(args, cli.verbose),
        Command::ExportGraph(args) => run_export_graph(args, cli.verbose),
    }
}

fn load_manifest(path: &Path) -> Result<Case> {
    let (case, warnings) = load_case_with_warnings(path)
        .with_context(|| format!("cannot load manifest {}", path.display()))?;
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
    Ok(case)
}

fn sibling_path(manifest: &Path, suffix: &str, extension: &str) -> PathBuf {
    let stem = manifest
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "case".to_string());
    manifest.with_file_name(format!("{stem}-{suffix}.{extension}"))
}

fn require_labels(case: &Case) -> Result<()> {
    for conversation in &case.conversations {
        for utterance in &conversation.utterances {
            if utterance.truth.is_none() {
                return Err(MissingLabels(format!(
                    "conversation {}, utterance {}",
                    conversation.conversation_id, utterance.utterance_id
                ))
                .into());
            }
        }
    }
    Ok(())
}

fn run_rerank(args: RerankArgs, verbose: bool) -> Result<()> {
    let case = load_manifest(&args.manifest)?;
    let config = args.config.to_config();
    let outcome = process_case(&case, &config).context("re-ranking failed")?;
    if verbose {
        for decision in &outcome.decisions {
            let join = |ids: &[talkgraph_core::SpeakerId]| {
                ids.iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            };
            println!(
                "{}: baseline {} -> reranked {} (score {:.4} -> {:.4}, {} combinations{})",
                decision.conversation_id,
                join(&decision.baseline.assignment),
                join(&decision.reranked.assignment),
                decision.baseline.score,
                decision.reranked.score,
                decision.n_combinations_scored,
                if decision.pruned { ", budget-pruned" } else { "" },
            );
        }
    }
    let labeled = case.fully_labeled();
    let metrics_for = |side| -> Result<Option<AccuracyReport>> {
        if labeled {
            Ok(Some(accuracy_report(&outcome.decisions, &case, side)?))
        } else {
            Ok(None)
        }
    };
    let report = CaseReport {
        case_id: case.case_id.clone(),
        config,
        baseline: metrics_for(Side::Baseline)?,
        reranked: metrics_for(Side::Reranked)?,
        diffs: diff_report(&outcome.decisions, &case)?,
        decisions: outcome.decisions,
    };
    let out = args
        .out
        .unwrap_or_else(|| sibling_path(&args.manifest, "report", "json"));
    let graph_out = args
        .graph_out
        .unwrap_or_else(|| sibling_path(&args.manifest, "graph", args.format.extension()));
    write_report(&report, &out)?;
    export_graph(&outcome.graph, args.format.to_format(), &graph_out)?;
    println!(
        "wrote report to {} and graph to {}",
        out.display(),
        graph_out.display()
    );
    Ok(())
}

fn run_evaluate(args: EvaluateArgs, verbose: bool) -> Result<()> {
    let case = load_manifest(&args.manifest)?;
    require_labels(&case)?;
    let config = args.config.to_config();
    let outcome = process_case(&case, &config).context("re-ranking failed")?;
    let baseline = accuracy_report(&outcome.decisions, &case, Side::Baseline)?;
    let reranked = accuracy_report(&outcome.decisions, &case, Side::Reranked)?;
    if verbose {
        println!(
            "case {}: {} conversations, {} utterances",
            case.case_id, baseline.n_conversations, baseline.n_utterances
        );
        for (b, r) in baseline
            .per_conversation
            .iter()
            .zip(&reranked.per_conversation)
        {
            println!(
                "{}: baseline {}/{} correct, reranked {}/{} correct",
                b.conversation_id, b.n_slots_correct, b.n_slots, r.n_slots_correct, r.n_slots
            );
        }
        println!(
            "speaker accuracy (baseline, reranked), conversation accuracy (baseline, reranked):"
        );
    }
    println!(
        "{:.1} {:.1} {:.1} {:.1}",
        100.0 * baseline.speaker_accuracy,
        100.0 * reranked.speaker_accuracy,
        100.0 * baseline.conversation_accuracy,
        100.0 * reranked.conversation_accuracy,
    );
    Ok(())
}

fn run_simulate(args: SimulateArgs, verbose: bool) -> Result<()> {
    let mut spec = SynthSpec {
        n_speakers: args.n_speakers,
        n_groups: args.n_groups,
        within_group_bias: args.within_group_bias,
        n_conversations: args.n_conversations,
        slots_per_conversation: (args.slots_min, args.slots_max),
        score_separability: args.separability,
        noise_sd: args.noise_sd,
        seed: args.seed,
        drift: None,
    };
    if let (Some(drift_at), Some(regroup)) = (args.drift_at, &args.regroup) {
        spec = topology_drift(&spec, drift_at, regroup)?;
    }
    let case = generate_case(&spec).context("invalid simulation spec")?;
    write_case(&case, &args.out)?;
    if verbose {
        println!(
            "case {}: {} speakers, {} conversations, seed {}",
            case.case_id,
            case.enrolled.len(),
            case.conversations.len(),
            args.seed
        );
    }
    println!("wrote manifest to {}", args.out.display());
    Ok(())
}

fn truth_graph(case: &Case) -> Result<InteractionGraph> {
    require_labels(case)?;
    let mut graph = InteractionGraph::new();
    for conversation in &case.conversations {
        let speakers = conversation
            .utterances
            .iter()
            .filter_map(|u| u.truth.clone())
            .collect();
        graph.record_conversation(&speakers);
    }
    Ok(graph)
}

fn run_export_graph(args: ExportGraphArgs, verbose: bool) -> Result<()> {
    let case = load_manifest(&args.manifest)?;
    let graph = match args.from {
        GraphSource::Truth => truth_graph(&case)?,
        GraphSource::Reranked => {
            process_case(&case, &args.config.to_config())
                .context("re-ranking failed")?
                .graph
        }
    };
    let out = args
        .out
        .unwrap_or_else(|| sibling_path(&args.manifest, "graph", args.format.extension()));
    export_graph(&graph, args.format.to_format(), &out)?;
    if verbose {
        println!(
            "graph: {} speakers, {} edges, total weight {}",
            graph.n_nodes(),
            graph.n_edges(),
            graph.total_weight()
        );
    }
    println!("wrote graph to {}", out.display());
    Ok(())
}
