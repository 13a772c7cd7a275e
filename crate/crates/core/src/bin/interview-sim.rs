use std::collections::BTreeMap;
use std::error::Error;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use tracing::{info, warn};
use tracing_subscriber::EnvFilter;

use interview_sim::agents::{AgentHandle, AgentRole, PromptSet};
use interview_sim::analysis::annotations::{write_consistency_table, write_distribution, write_json_report};
use interview_sim::analysis::counterfactual::{counterfactual_records, CounterfactualRecord};
use interview_sim::analysis::discourse::label_transcript;
use interview_sim::analysis::{
    aggregate_consistency, discourse_distribution, exchanges, read_annotations, score_consistency, write_annotations,
    Annotation, CounterfactualVariant,
};
use interview_sim::batch::{run_batch, write_jsonl, BatchConfig, BatchError};
use interview_sim::config::{AgentSource, Config, RoleAgents};
use interview_sim::corpus::{derive_scenario, read_corpus, run_pipeline, write_outputs, PipelineConfig, PipelineInputs};
use interview_sim::domain::{AblationMode, PersonaKind, RunRecord, Scenario};
use interview_sim::engine::{Clock, FixedClock, SystemClock};
use interview_sim::persona::PersonaCatalog;
use interview_sim::report::{build_report, render_conditions, write_report};
use interview_sim::server;
use interview_sim::sessions::{AgentSpecs, SessionStore, StoreOptions};

type CliResult = Result<(), Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "interview-sim", version, about = "Informational-interview game simulator and analysis tools")]
struct Cli {
    /// TOML or JSON config with backends and defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter raw transcripts into a labeled corpus.
    PrepCorpus {
        /// Directory with NPR-style CSVs and/or MediaSum-style JSON.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "scripted:keyword-gate")]
        gate: String,
    },
    /// Turn a labeled corpus into playable scenarios.
    DeriveScenarios {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "scripted:extractive-summarizer")]
        summarizer: String,
        /// Fixed persona; otherwise personas are assigned round-robin.
        #[arg(long)]
        persona: Option<PersonaKind>,
        #[arg(long)]
        max_turns: Option<u32>,
    },
    /// Play a seeded batch of games and write the run log.
    Simulate(SimulateArgs),
    /// Generate counterfactual next questions over a corpus.
    Counterfactual {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "baseline")]
        variant: CounterfactualVariant,
        #[arg(long, default_value = "scripted:followup-generator")]
        generator: String,
        /// Scenario directory supplying outlines by transcript id.
        #[arg(long)]
        scenarios: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score counterfactual questions against the real ones.
    Consistency {
        /// One or more counterfactual JSONL files.
        #[arg(long, required = true, num_args = 1..)]
        counterfactuals: Vec<PathBuf>,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "scripted:overlap-consistency")]
        judge: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label interviewer turns with discourse roles and bin them over time.
    Discourse {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "scripted:heuristic-discourse")]
        judge: String,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate run logs into condition, persona and curve tables.
    Report {
        #[arg(long, required = true, num_args = 1..)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the interactive session API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long)]
        scenarios: Option<PathBuf>,
        /// Static UI assets served under /ui.
        #[arg(long)]
        ui: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[command(flatten)]
        agents: AgentArgs,
    },
}

#[derive(Args)]
struct AgentArgs {
    #[arg(long, default_value = "scripted:outline-interviewer")]
    interviewer: String,
    #[arg(long, default_value = "scripted:template-source")]
    source: String,
    #[arg(long, default_value = "scripted:cue-judge")]
    judge: String,
    #[arg(long, default_value = "scripted:keyword-retriever")]
    retriever: String,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 20)]
    games: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "full")]
    ablation: AblationMode,
    /// Scenario directory; the bundled scenarios otherwise.
    #[arg(long)]
    scenarios: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    agents: AgentArgs,
}

fn load_config(path: Option<&Path>) -> Result<Config, Box<dyn Error>> {
    Ok(match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    })
}

fn prompts(config: &Config) -> Result<PromptSet, Box<dyn Error>> {
    Ok(match &config.templates {
        Some(dir) => PromptSet::with_overrides(dir)?,
        None => PromptSet::bundled(),
    })
}

fn catalog(config: &Config) -> Result<PersonaCatalog, Box<dyn Error>> {
    Ok(match &config.personas {
        Some(p) => PersonaCatalog::load(p)?,
        None => PersonaCatalog::bundled(),
    })
}

fn scenarios(dir: Option<&Path>) -> Result<Vec<Scenario>, Box<dyn Error>> {
    Ok(match dir {
        Some(d) => Scenario::load_dir(d)?,
        None => Scenario::bundled(),
    })
}

fn agent(spec: &str, role: AgentRole, config: &Config) -> Result<AgentHandle, Box<dyn Error>> {
    Ok(AgentSource::resolve(spec, role, config)?.instantiate(0))
}

fn role_agents(a: &AgentArgs, config: &Config) -> Result<RoleAgents, Box<dyn Error>> {
    Ok(RoleAgents {
        interviewer: AgentSource::resolve(&a.interviewer, AgentRole::Interviewer, config)?,
        source: AgentSource::resolve(&a.source, AgentRole::Source, config)?,
        judge: AgentSource::resolve(&a.judge, AgentRole::Judge, config)?,
        retriever: AgentSource::resolve(&a.retriever, AgentRole::Retriever, config)?,
    })
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn prep_corpus(config: &Config, input: &Path, out: &Path, gate: &str) -> CliResult {
    let transcripts = PipelineInputs::from_dir(input)?.read()?;
    let gate = agent(gate, AgentRole::Gate, config)?;
    let output = run_pipeline(transcripts, &PipelineConfig::default(), gate.as_ref(), &prompts(config)?)?;
    write_outputs(&output, out)?;
    for s in &output.report.stages {
        println!("{:<16} {:>6} -> {:>6}", s.stage, s.input, s.kept);
    }
    println!("kept {} of {}", output.report.kept, output.report.total_input);
    Ok(())
}

fn derive_scenarios(
    config: &Config,
    corpus: &Path,
    out: &Path,
    summarizer: &str,
    persona: Option<PersonaKind>,
    max_turns: Option<u32>,
) -> CliResult {
    let corpus = read_corpus(corpus)?;
    let summarizer = agent(summarizer, AgentRole::Summarizer, config)?;
    let prompts = prompts(config)?;
    std::fs::create_dir_all(out)?;
    let (mut written, mut skipped) = (0, 0);
    for (i, t) in corpus.iter().enumerate() {
        let persona = persona.unwrap_or(PersonaKind::ALL[i % PersonaKind::ALL.len()]);
        let k = max_turns.unwrap_or(config.default_max_turns);
        match derive_scenario(t, summarizer.as_ref(), &prompts, persona, k) {
            Ok(s) => {
                write_json(&out.join(format!("{}.json", s.id)), &s)?;
                written += 1;
            }
            Err(e @ interview_sim::corpus::DeriveError::Agent { .. }) => return Err(e.into()),
            Err(e) => {
                warn!(transcript = %t.id, error = %e, "skipped");
                skipped += 1;
            }
        }
    }
    println!("wrote {written} scenarios, skipped {skipped}");
    Ok(())
}

fn simulate(config: &Config, args: &SimulateArgs) -> CliResult {
    let agents = role_agents(&args.agents, config)?;
    let clock: Box<dyn Clock> = if agents.all_scripted() {
        Box::new(FixedClock::default())
    } else {
        Box::new(SystemClock)
    };
    let batch = BatchConfig {
        games: args.games,
        seed: args.seed,
        ablation: args.ablation,
        engine: config.engine(),
    };
    let result = run_batch(
        &scenarios(args.scenarios.as_deref())?,
        &catalog(config)?,
        Arc::new(prompts(config)?),
        &agents,
        &batch,
        clock.as_ref(),
    );
    match result {
        Ok(outcome) => {
            write_jsonl(&args.out, &outcome.records)?;
            println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
            Ok(())
        }
        Err(BatchError::TooManyAborts {
            aborted,
            total,
            records,
        }) => {
            write_jsonl(&args.out, &records)?;
            Err(format!("{aborted} of {total} games aborted; partial log written to {}", args.out.display()).into())
        }
        Err(e) => Err(e.into()),
    }
}

fn outlines(dir: Option<&Path>) -> Result<BTreeMap<String, Scenario>, Box<dyn Error>> {
    Ok(match dir {
        Some(d) => Scenario::load_dir(d)?.into_iter().map(|s| (s.id.clone(), s)).collect(),
        None => BTreeMap::new(),
    })
}

fn counterfactual(
    config: &Config,
    corpus: &Path,
    variant: CounterfactualVariant,
    generator: &str,
    scenario_dir: Option<&Path>,
    out: &Path,
) -> CliResult {
    let corpus = read_corpus(corpus)?;
    let generator = agent(generator, AgentRole::Generator, config)?;
    let by_id = outlines(scenario_dir)?;
    let records = counterfactual_records(
        &corpus,
        variant,
        &|id| by_id.get(id).map(|s| s.outline.clone()),
        generator.as_ref(),
        &prompts(config)?,
    )?;
    write_annotations(out, &records)?;
    println!("wrote {} counterfactual questions ({variant})", records.len());
    Ok(())
}

fn consistency(config: &Config, inputs: &[PathBuf], corpus: &Path, judge: &str, out: &Path) -> CliResult {
    let corpus: BTreeMap<String, _> = read_corpus(corpus)?.into_iter().map(|t| (t.id.clone(), t)).collect();
    let judge = agent(judge, AgentRole::Judge, config)?;
    let prompts = prompts(config)?;
    let mut by_variant: BTreeMap<CounterfactualVariant, Vec<_>> = BTreeMap::new();
    let mut annotations = Vec::new();
    for path in inputs {
        for r in read_annotations::<CounterfactualRecord>(path)? {
            let t = corpus
                .get(&r.transcript_id)
                .ok_or_else(|| format!("{}: transcript {} not in corpus", path.display(), r.transcript_id))?;
            let ex = exchanges(t)?;
            let context = &ex[..r.turn_index.saturating_sub(1).min(ex.len())];
            let v = score_consistency(&r.generated, &r.human, context, judge.as_ref(), &prompts)?;
            by_variant.entry(r.variant).or_default().push(v);
            let mut a = Annotation::new(r.transcript_id.clone(), r.turn_index);
            a.verdict = Some(v);
            annotations.push(a);
        }
    }
    let rows = by_variant
        .iter()
        .map(|(k, vs)| Ok((k.to_string(), aggregate_consistency(vs)?)))
        .collect::<Result<Vec<_>, interview_sim::analysis::AnalysisError>>()?;
    write_annotations(&out.join("verdicts.jsonl"), &annotations)?;
    write_consistency_table(&rows, out, "consistency")?;
    for (name, s) in &rows {
        let cells: Vec<String> = s.values().iter().map(|v| format!("{v:5.1}")).collect();
        println!("{name:<12} n={:<5} {}", s.n, cells.join(" "));
    }
    Ok(())
}

fn discourse(config: &Config, corpus: &Path, judge: &str, bins: Option<usize>, out: &Path) -> CliResult {
    let corpus = read_corpus(corpus)?;
    let judge = agent(judge, AgentRole::Judge, config)?;
    let prompts = prompts(config)?;
    let mut labels = Vec::new();
    for t in &corpus {
        labels.extend(label_transcript(t, judge.as_ref(), &prompts)?);
    }
    let points: Vec<_> = labels.iter().map(|l| (l.position(), l.role)).collect();
    let dist = discourse_distribution(&points, bins.unwrap_or(config.discourse_bins))?;
    let annotations: Vec<Annotation> = labels
        .iter()
        .map(|l| {
            let mut a = Annotation::new(l.transcript_id.clone(), l.turn_index);
            a.role = Some(l.role);
            a
        })
        .collect();
    write_annotations(&out.join("labels.jsonl"), &annotations)?;
    write_distribution(&dist, out, "discourse")?;
    write_json_report(&labels, &out.join("labels_detail.json"))?;
    println!("labeled {} turns from {} transcripts", labels.len(), corpus.len());
    Ok(())
}

fn report(runs: &[PathBuf], out: &Path) -> CliResult {
    let mut records: Vec<RunRecord> = Vec::new();
    for p in runs {
        records.extend(interview_sim::batch::read_jsonl::<RunRecord>(p)?);
    }
    let report = build_report(&records);
    for w in &report.warnings {
        warn!("{w}");
    }
    write_report(&report, out)?;
    print!("{}", render_conditions(&report));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn serve(
    config: Config,
    host: &str,
    port: u16,
    data_dir: PathBuf,
    scenario_dir: Option<&Path>,
    ui: Option<PathBuf>,
    agents: &AgentArgs,
) -> CliResult {
    // Resolve once up front so a bad spec fails at startup.
    let resolved = role_agents(agents, &config)?;
    let defaults = AgentSpecs {
        interviewer: resolved.interviewer.spec(),
        source: resolved.source.spec(),
        judge: resolved.judge.spec(),
        retriever: resolved.retriever.spec(),
    };
    let store = SessionStore::open(StoreOptions {
        data_dir,
        scenarios: scenarios(scenario_dir)?,
        catalog: catalog(&config)?,
        prompts: Arc::new(prompts(&config)?),
        config,
        defaults,
        clock: Arc::new(SystemClock),
    })?;
    let addr: SocketAddr = format!("{host}:{port}").parse()?;
    let app = server::router(Arc::new(store), ui);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(server::serve(addr, app))?;
    Ok(())
}

fn run(cli: Cli) -> CliResult {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::PrepCorpus { input, out, gate } => prep_corpus(&config, &input, &out, &gate),
        Command::DeriveScenarios {
            corpus,
            out,
            summarizer,
            persona,
            max_turns,
        } => derive_scenarios(&config, &corpus, &out, &summarizer, persona, max_turns),
        Command::Simulate(args) => simulate(&config, &args),
        Command::Counterfactual {
            corpus,
            variant,
            generator,
            scenarios,
            out,
        } => counterfactual(&config, &corpus, variant, &generator, scenarios.as_deref(), &out),
        Command::Consistency {
            counterfactuals,
            corpus,
            judge,
            out,
        } => consistency(&config, &counterfactuals, &corpus, &judge, &out),
        Command::Discourse { corpus, judge, bins, out } => discourse(&config, &corpus, &judge, bins, &out),
        Command::Report { runs, out } => report(&runs, &out),
        Command::Serve {
            port,
            data_dir,
            scenarios,
            ui,
            host,
            agents,
        } => serve(config, &host, port, data_dir, scenarios.as_deref(), ui, &agents),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {
            info!("done");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
