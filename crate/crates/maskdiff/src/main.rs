//! Command-line interface: `generate` runs one prompt, `bench` runs a
//! suite file and writes a TPF/TPS report.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use maskdiff::model::scripted::ScriptedModel;
use maskdiff::{
    engine, metrics, run_benchmark, CachePolicy, DecoderKind, GenerationConfig, GenerationResult,
    RunReport, Suite, ToyModel, ToyModelParams, TraceRecorder,
};

#[derive(Parser)]
#[command(name = "maskdiff", version, about = "Masked-diffusion inference engine and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one sequence from a comma-separated prompt of token ids.
    Generate(GenerateArgs),
    /// Run a benchmark suite and report TPF/TPS per sequence.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Prompt token ids, e.g. --prompt 5,7,9
    #[arg(long, value_delimiter = ',', required = true)]
    prompt: Vec<u32>,
    /// Capture every forward's logits to a replayable trace file.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite file (JSON, one record per prompt).
    #[arg(long)]
    suite: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config file whose keys mirror these flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model: "toy" or "scripted:PATH".
    #[arg(long)]
    model: Option<String>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,

    #[arg(long)]
    gen_len: Option<usize>,
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long, value_enum)]
    decoder: Option<DecoderKind>,
    #[arg(long, value_enum)]
    cache: Option<CachePolicy>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    hier_hi: Option<f64>,
    #[arg(long)]
    hier_lo: Option<f64>,
    #[arg(long)]
    credit_alpha: Option<f64>,
    #[arg(long)]
    credit_beta: Option<f64>,
    #[arg(long)]
    credit_gamma: Option<f64>,

    #[arg(long, overrides_with = "no_smooth")]
    smooth: bool,
    #[arg(long, overrides_with = "smooth")]
    no_smooth: bool,

    #[arg(long)]
    alpha_init: Option<f64>,
    #[arg(long)]
    alpha_growth: Option<f64>,
    #[arg(long)]
    alpha_preset: Option<f64>,
    /// Resting value of the decode-threshold schedule; mirrors --threshold
    /// unless set explicitly.
    #[arg(long)]
    sched_target: Option<f64>,
    #[arg(long)]
    sched_decay_steps: Option<u32>,
    #[arg(long)]
    prefix_look: Option<usize>,
    #[arg(long)]
    after_look: Option<usize>,
    #[arg(long)]
    warmup_times: Option<u32>,

    #[arg(long, overrides_with = "no_early_stop")]
    early_stop: bool,
    #[arg(long, overrides_with = "early_stop")]
    no_early_stop: bool,

    /// Record per-forward cache staleness and the dense-oracle logit
    /// deviation (toy model only; slow).
    #[arg(long)]
    measure_staleness: bool,

    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mask_id: Option<u32>,
    #[arg(long)]
    eos_id: Option<u32>,
}

/// Config-file counterpart of the flags; all keys optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
struct ConfigFile {
    model: Option<String>,
    gen_len: Option<usize>,
    block_size: Option<usize>,
    decoder: Option<DecoderKind>,
    cache: Option<CachePolicy>,
    threshold: Option<f64>,
    hier_hi: Option<f64>,
    hier_lo: Option<f64>,
    credit_alpha: Option<f64>,
    credit_beta: Option<f64>,
    credit_gamma: Option<f64>,
    smooth: Option<bool>,
    alpha_init: Option<f64>,
    alpha_growth: Option<f64>,
    alpha_preset: Option<f64>,
    sched_target: Option<f64>,
    sched_decay_steps: Option<u32>,
    prefix_look: Option<usize>,
    after_look: Option<usize>,
    warmup_times: Option<u32>,
    early_stop: Option<bool>,
    measure_staleness: Option<bool>,
    seed: Option<u64>,
    mask_id: Option<u32>,
    eos_id: Option<u32>,
}

enum ModelSpec {
    Toy,
    Scripted(PathBuf),
}

impl ModelSpec {
    fn parse(raw: &str) -> anyhow::Result<Self> {
        if raw == "toy" {
            return Ok(ModelSpec::Toy);
        }
        if let Some(path) = raw.strip_prefix("scripted:") {
            return Ok(ModelSpec::Scripted(PathBuf::from(path)));
        }
        bail!("unknown model '{raw}'; expected 'toy' or 'scripted:PATH'");
    }
}

struct Resolved {
    config: GenerationConfig,
    model: ModelSpec,
    mask_id: u32,
    eos_id: u32,
}

fn resolve(common: &CommonArgs) -> anyhow::Result<Resolved> {
    let file: ConfigFile = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config file {}", path.display()))?;
            toml::from_str(&text)
                .with_context(|| format!("parsing config file {}", path.display()))?
        }
        None => ConfigFile::default(),
    };

    let mut cfg = GenerationConfig::default();
    macro_rules! pick {
        ($field:ident) => {
            if let Some(v) = file.$field {
                cfg.$field = v;
            }
            if let Some(v) = common.$field {
                cfg.$field = v;
            }
        };
    }
    pick!(gen_len);
    pick!(block_size);
    pick!(decoder);
    pick!(cache);
    pick!(threshold);
    pick!(hier_hi);
    pick!(hier_lo);
    pick!(credit_alpha);
    pick!(credit_beta);
    pick!(credit_gamma);
    pick!(alpha_init);
    pick!(alpha_growth);
    pick!(alpha_preset);
    pick!(sched_decay_steps);
    pick!(prefix_look);
    pick!(after_look);
    pick!(warmup_times);
    pick!(seed);

    if let Some(v) = file.smooth {
        cfg.smooth = v;
    }
    if common.smooth {
        cfg.smooth = true;
    } else if common.no_smooth {
        cfg.smooth = false;
    }

    if let Some(v) = file.early_stop {
        cfg.early_stop = v;
    }
    if common.early_stop {
        cfg.early_stop = true;
    } else if common.no_early_stop {
        cfg.early_stop = false;
    }

    if file.measure_staleness.unwrap_or(false) || common.measure_staleness {
        cfg.measure_staleness = true;
    }

    // The schedule rests at the static threshold unless targeted elsewhere.
    cfg.sched_target = cfg.threshold;
    if let Some(v) = file.sched_target {
        cfg.sched_target = v;
    }
    if let Some(v) = common.sched_target {
        cfg.sched_target = v;
    }

    let model_raw = common
        .model
        .clone()
        .or(file.model)
        .unwrap_or_else(|| "toy".to_string());
    let model = ModelSpec::parse(&model_raw)?;

    let mask_id = common.mask_id.or(file.mask_id).unwrap_or(0);
    let eos_id = common.eos_id.or(file.eos_id).unwrap_or(1);

    cfg.validate()?;
    Ok(Resolved { config: cfg, model, mask_id, eos_id })
}

fn write_report(report: &RunReport, target: Option<&Path>) -> anyhow::Result<()> {
    let text = report.to_json_pretty();
    match target {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing report to {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn print_generation_summary(result: &GenerationResult) {
    let tpf = metrics::tpf(result).map(|v| format!("{v:.4}")).unwrap_or_else(|_| "-".into());
    let tps = metrics::tps(result).map(|v| format!("{v:.1}")).unwrap_or_else(|_| "-".into());
    println!("generated ids: {:?}", &result.final_ids[result.prompt_len..]);
    println!(
        "tokens before EOS: {}  forwards: {}  wall: {:.4}s  TPF: {}  TPS: {}{}",
        result.tokens_before_eos,
        result.forwards,
        result.wall_seconds,
        tpf,
        tps,
        if result.early_terminated { "  (early termination)" } else { "" },
    );
    if let Some(s) = &result.staleness {
        println!(
            "cache staleness: mean stale fraction {:.3}, max age {}{}",
            s.mean_stale_fraction,
            s.max_age,
            s.max_abs_deviation
                .map(|d| format!(", max logit deviation {d:.3e}"))
                .unwrap_or_default(),
        );
    }
}

fn cmd_generate(args: &GenerateArgs) -> anyhow::Result<()> {
    let resolved = resolve(&args.common)?;
    let (result, mask_id, eos_id) = match resolved.model {
        ModelSpec::Toy => {
            let params = ToyModelParams { seed: resolved.config.seed, ..Default::default() };
            let toy = ToyModel::new(params)?;
            if let Some(trace_path) = &args.trace {
                let mut recorder = TraceRecorder::new(toy);
                let result = engine::generate(
                    &mut recorder,
                    &args.prompt,
                    resolved.mask_id,
                    resolved.eos_id,
                    &resolved.config,
                )?;
                recorder.save(trace_path, resolved.mask_id, resolved.eos_id)?;
                eprintln!(
                    "trace: {} steps written to {}",
                    recorder.steps_recorded(),
                    trace_path.display()
                );
                (result, resolved.mask_id, resolved.eos_id)
            } else {
                let mut model = toy;
                let result = engine::generate(
                    &mut model,
                    &args.prompt,
                    resolved.mask_id,
                    resolved.eos_id,
                    &resolved.config,
                )?;
                (result, resolved.mask_id, resolved.eos_id)
            }
        }
        ModelSpec::Scripted(path) => {
            let scripted = ScriptedModel::load(&path)?;
            // Scripted files carry their own reserved ids.
            let (mask_id, eos_id) = (scripted.mask_id(), scripted.eos_id());
            let mut model = scripted;
            if let Some(trace_path) = &args.trace {
                let mut recorder = TraceRecorder::new(model);
                let result =
                    engine::generate(&mut recorder, &args.prompt, mask_id, eos_id, &resolved.config)?;
                recorder.save(trace_path, mask_id, eos_id)?;
                (result, mask_id, eos_id)
            } else {
                let result =
                    engine::generate(&mut model, &args.prompt, mask_id, eos_id, &resolved.config)?;
                (result, mask_id, eos_id)
            }
        }
    };

    print_generation_summary(&result);

    if args.common.report.is_some() {
        let row = metrics::SequenceReport::from_result("prompt-0", None, &result)?;
        let report = RunReport::assemble(resolved.config.clone(), vec![row]);
        write_report(&report, args.common.report.as_deref())?;
    }
    let _ = (mask_id, eos_id);
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> anyhow::Result<()> {
    let resolved = resolve(&args.common)?;
    let suite = Suite::load(&args.suite)?;
    let report = match resolved.model {
        ModelSpec::Toy => {
            let params = ToyModelParams { seed: resolved.config.seed, ..Default::default() };
            let model = ToyModel::new(params)?;
            run_benchmark(&model, &suite, resolved.mask_id, resolved.eos_id, &resolved.config)?
        }
        ModelSpec::Scripted(path) => {
            let model = ScriptedModel::load(&path)?;
            let (mask_id, eos_id) = (model.mask_id(), model.eos_id());
            run_benchmark(&model, &suite, mask_id, eos_id, &resolved.config)?
        }
    };

    eprintln!(
        "suite: {} sequences ({} failed)  mean TPF {:.4}  mean TPS {:.1}",
        report.n, report.failed, report.aggregate.mean_tpf, report.aggregate.mean_tps
    );
    write_report(&report, args.common.report.as_deref())?;
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Bench(args) => cmd_bench(args),
    }
}
