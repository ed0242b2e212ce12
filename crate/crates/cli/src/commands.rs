use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;
use xshuffle_core::experiment::{
    build_manifest, generate_schedule, load_network_responses, read_response_log, Schedule, ScheduleConfig,
    TestPlan, CANONICAL_PRACTICE_TRIALS,
};
use xshuffle_core::imagecore::{load_cifar100_binary, read_image_file, write_image_file, ImageFormat};
use xshuffle_core::stats::{
    accuracy_table, fit_family, read_cell_counts, render_text, write_accuracy_csv, CorrectnessTable,
};
use xshuffle_core::{apply, Dataset, Probability, ReportFamily, Split, Transform, TransformKind, TransformOutput};

use crate::api::{router, AppState};
use crate::config::{SeedPolicy, ServiceConfig, DEFAULT_LISTEN, LISTEN_ENV, SYNTHETIC_LEN};
use crate::store::SessionStore;

#[derive(Debug, Parser)]
#[command(name = "xshuffle", version, about = "Extreme pixel-shuffling transforms and the human/network comparison experiment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply one transform to an image file or a directory of images.
    Transform(TransformArgs),
    /// Print the 18 transform configurations as JSON.
    Manifest(ManifestArgs),
    /// Generate a session schedule.
    Schedule(ScheduleArgs),
    /// Accuracy table and regression reports from responses.
    Analyze(AnalyzeArgs),
    /// Run the HTTP experiment service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// baseline, grid, randomized, within, local or flatten (full names work too).
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub block: Option<usize>,
    #[arg(long)]
    pub prob: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// png or ppm; defaults to the output file's extension.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct ManifestArgs {
    /// One compact JSON entry per line instead of a document.
    #[arg(long)]
    pub lines: bool,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    /// CIFAR-100 test-split binary; a seeded synthetic set is used otherwise.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = CANONICAL_PRACTICE_TRIALS)]
    pub practice: usize,
    /// Test trials per condition instead of the canonical plan.
    #[arg(long)]
    pub per_condition: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, requires_all = ["responses", "networks"], conflicts_with = "counts")]
    pub schedule: Option<PathBuf>,
    /// Human JSON-lines response log.
    #[arg(long)]
    pub responses: Option<PathBuf>,
    /// Network answers, `trial_id,agent,chosen_option`.
    #[arg(long)]
    pub networks: Option<PathBuf>,
    /// Per-condition correct counts instead of trial-level inputs.
    #[arg(long, required_unless_present = "schedule")]
    pub counts: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = LISTEN_ENV, default_value = DEFAULT_LISTEN)]
    pub listen: String,
    #[arg(long, default_value = "xshuffle-data")]
    pub data_dir: PathBuf,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Give every session this schedule seed instead of a fresh one.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub practice: Option<usize>,
    #[arg(long)]
    pub per_condition: Option<usize>,
    #[arg(long, default_value_t = 3000)]
    pub timeout_ms: u64,
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad transform parameters or image dimensions.
    #[error("{0}")]
    Spec(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Spec(_) => ExitCode::from(2),
            _ => ExitCode::FAILURE,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Transform(a) => transform(&a),
        Command::Manifest(a) => manifest(&a),
        Command::Schedule(a) => schedule(&a),
        Command::Analyze(a) => analyze(&a),
        Command::Serve(a) => serve(a),
    }
}

pub fn parse_kind(s: &str) -> Result<TransformKind, CliError> {
    Ok(match s {
        "baseline" => TransformKind::Baseline,
        "grid" => TransformKind::GridShuffle,
        "randomized" | "random" => TransformKind::RandomizedShuffle,
        "within" => TransformKind::WithinGridShuffle,
        "local" => TransformKind::LocalGridShuffle,
        "flatten" => TransformKind::ColorFlatten,
        other => other.parse().map_err(CliError::Spec)?,
    })
}

/// Assembles a transform from command-line parts. Grid shuffle defaults to
/// p = 1; every other parameter must be given exactly when it applies.
pub fn build_transform(kind: TransformKind, block: Option<usize>, prob: Option<f64>) -> Result<Transform, CliError> {
    let spec = |m: String| CliError::Spec(m);
    let probability = |p: Option<f64>| -> Result<Probability, CliError> {
        let p = p.ok_or_else(|| spec(format!("{kind} needs --prob")))?;
        Probability::new(p).map_err(|e| spec(e.to_string()))
    };
    let block_size = |b: Option<usize>| b.ok_or_else(|| spec(format!("{kind} needs --block")));
    let uses_block = matches!(
        kind,
        TransformKind::GridShuffle | TransformKind::WithinGridShuffle | TransformKind::LocalGridShuffle
    );
    if block.is_some() && !uses_block {
        return Err(spec(format!("--block does not apply to {kind}")));
    }
    if prob.is_some() && matches!(kind, TransformKind::Baseline | TransformKind::ColorFlatten) {
        return Err(spec(format!("--prob does not apply to {kind}")));
    }
    Ok(match kind {
        TransformKind::Baseline => Transform::Baseline,
        TransformKind::ColorFlatten => Transform::ColorFlatten,
        TransformKind::GridShuffle => Transform::GridShuffle {
            block_size: block_size(block)?,
            probability: probability(prob.or(Some(1.0)))?,
        },
        TransformKind::RandomizedShuffle => Transform::RandomizedShuffle {
            probability: probability(prob)?,
        },
        TransformKind::WithinGridShuffle => Transform::WithinGridShuffle {
            block_size: block_size(block)?,
            probability: probability(prob)?,
        },
        TransformKind::LocalGridShuffle => Transform::LocalGridShuffle {
            block_size: block_size(block)?,
            probability: probability(prob)?,
        },
    })
}

fn is_image(path: &Path) -> bool {
    path.is_file() && ImageFormat::from_path(path).is_some()
}

fn transform(a: &TransformArgs) -> Result<(), CliError> {
    let t = build_transform(parse_kind(&a.kind)?, a.block, a.prob)?;
    let spec = t.with_seed(a.seed);
    let format = a
        .format
        .as_deref()
        .map(|f| f.parse::<ImageFormat>().map_err(|e| CliError::Spec(e.to_string())))
        .transpose()?;

    let jobs: Vec<(PathBuf, PathBuf)> = if a.input.is_dir() {
        fs::create_dir_all(&a.output)?;
        let ext = match format {
            Some(ImageFormat::Ppm) => "ppm",
            _ => "png",
        };
        let mut inputs: Vec<PathBuf> = fs::read_dir(&a.input)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        inputs.retain(|p| is_image(p));
        inputs.sort();
        inputs
            .into_iter()
            .map(|p| {
                let out = a.output.join(p.file_name().unwrap_or_default()).with_extension(ext);
                (p, out)
            })
            .collect()
    } else {
        vec![(a.input.clone(), a.output.clone())]
    };

    for (input, output) in jobs {
        let img = read_image_file(&input).map_err(|e| input_err(format!("{}: {e}", input.display())))?;
        let out = apply(&spec, &img).map_err(|e| CliError::Spec(format!("{}: {e}", input.display())))?;
        if let TransformOutput::Flattened(flat) = &out {
            fs::write(output.with_extension("bin"), flat.to_bytes())?;
        }
        write_image_file(&output, &out.into_display_image(), format)
            .map_err(|e| input_err(format!("{}: {e}", output.display())))?;
    }
    Ok(())
}

fn manifest(a: &ManifestArgs) -> Result<(), CliError> {
    let m = build_manifest();
    let mut out = io::stdout().lock();
    if a.lines {
        for e in &m.entries {
            serde_json::to_writer(&mut out, e).map_err(input_err)?;
            writeln!(out)?;
        }
    } else {
        serde_json::to_writer_pretty(&mut out, &m).map_err(input_err)?;
        writeln!(out)?;
    }
    Ok(())
}

fn load_dataset(path: Option<&Path>) -> Result<Dataset, CliError> {
    match path {
        None => Ok(Dataset::synthetic(Split::Test, SYNTHETIC_LEN, 0)),
        Some(p) => load_cifar100_binary(&fs::read(p)?, Split::Test).map_err(|e| input_err(format!("{}: {e}", p.display()))),
    }
}

fn schedule(a: &ScheduleArgs) -> Result<(), CliError> {
    let ds = load_dataset(a.dataset.as_deref())?;
    let mut plan = TestPlan::canonical();
    if let Some(n) = a.per_condition {
        plan.entries.iter_mut().for_each(|e| e.trials = n);
    }
    let cfg = ScheduleConfig {
        n_practice: a.practice,
        n_test: plan.total(),
        plan,
    };
    let s = generate_schedule(&ds, a.seed, &cfg).map_err(|e| CliError::Spec(e.to_string()))?;
    let json = serde_json::to_string_pretty(&s).map_err(input_err)?;
    match &a.output {
        Some(p) => fs::write(p, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}

fn load_table(a: &AnalyzeArgs) -> Result<CorrectnessTable, CliError> {
    if let Some(counts) = &a.counts {
        return read_cell_counts(File::open(counts)?).map_err(input_err);
    }
    let (Some(sched), Some(resp), Some(nets)) = (&a.schedule, &a.responses, &a.networks) else {
        return Err(input_err("analyze needs --counts or --schedule, --responses and --networks"));
    };
    let schedule: Schedule = serde_json::from_reader(BufReader::new(File::open(sched)?)).map_err(input_err)?;
    let human = read_response_log(BufReader::new(File::open(resp)?)).map_err(input_err)?;
    let networks = load_network_responses(File::open(nets)?, &schedule).map_err(input_err)?;
    CorrectnessTable::assemble(&schedule, &human, &networks).map_err(input_err)
}

fn analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let table = load_table(a)?;
    fs::create_dir_all(a.out.join("ols"))?;
    let acc = accuracy_table(&table);
    write_accuracy_csv(File::create(a.out.join("accuracy.csv"))?, &acc).map_err(input_err)?;

    let mut out = io::stdout().lock();
    writeln!(out, "{:<20}{:>6}{:>10}{:>10}{:>10}{:>10}{:>8}", "family", "n", "Humans", "VOne", "R101", "R50", "R²")?;
    for family in ReportFamily::ALL {
        let report = match fit_family(&table, family) {
            Ok(r) => r,
            Err(e) => {
                writeln!(out, "{:<20}  skipped: {e}", family.id())?;
                continue;
            }
        };
        let stem = a.out.join("ols").join(family.id());
        fs::write(
            stem.with_extension("json"),
            serde_json::to_string_pretty(&report).map_err(input_err)? + "\n",
        )?;
        fs::write(stem.with_extension("txt"), render_text(family.title(), &report))?;
        let est = report.estimates();
        writeln!(
            out,
            "{:<20}{:>6}{:>10.4}{:>10.4}{:>10.4}{:>10.4}{:>8.3}",
            family.id(),
            report.n,
            est[0],
            est[1],
            est[2],
            est[3],
            report.r_squared
        )?;
    }
    Ok(())
}

fn serve(a: ServeArgs) -> Result<(), CliError> {
    let config = ServiceConfig {
        listen: a.listen,
        data_dir: a.data_dir,
        dataset: a.dataset,
        seed_policy: a.seed.map_or(SeedPolicy::PerSession, SeedPolicy::Fixed),
        practice_trials: a.practice,
        trials_per_condition: a.per_condition,
        confirmation_timeout_ms: a.timeout_ms,
    };
    config.validate().map_err(input_err)?;
    let dataset = config.load_dataset().map_err(input_err)?;
    let store = SessionStore::open(&config.data_dir).map_err(input_err)?;
    tracing::info!(sessions = store.session_ids().len(), "replayed session logs");
    let listen = config.listen.clone();
    let state = Arc::new(AppState { store, dataset, config });

    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&listen).await?;
        tracing::info!("listening on {}", listener.local_addr()?);
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })?;
    Ok(())
}
