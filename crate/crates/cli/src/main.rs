//! Batch front end for the generative design engine.
//!
//! Subcommands: `run` executes the design loop from a config, streaming one
//! JSON record per epoch plus a final summary record; `sample` draws
//! structures from the configured domain; `scaling-study` sweeps
//! reconstruction difficulty and records per-run errors; `validate` checks
//! structure records against the configured domain.
//!
//! Exit codes: 0 success, 2 configuration/schema error, 3 runtime error
//! (partial output is flushed before exiting).

mod config;

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use config::{ConfigError, Experiment, ExperimentConfig};
use gendesign::design::{run_design, EpochRecord};
use gendesign::domain::validate;
use gendesign::geometry::Structure;
use gendesign::sampler::sample_structure;
use gendesign::suites::synthetic;

#[derive(Parser)]
#[command(name = "gendesign", version, about = "Generative design of 2D polygonal structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the design loop and write epoch records plus a summary
    Run {
        /// Experiment configuration (JSON)
        #[arg(long)]
        config: String,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config output path
        #[arg(long)]
        out: Option<String>,
        /// Override the epoch budget
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Sample structures from the configured domain
    Sample {
        #[arg(long)]
        config: String,
        /// Number of structures to draw
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Output path (defaults to stdout)
        #[arg(long)]
        out: Option<String>,
    },
    /// Reconstruction-error sweep over a complexity axis
    ScalingStudy {
        #[arg(long)]
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Validate structure records produced by `sample`
    Validate {
        #[arg(long)]
        config: String,
        /// Structure records, one JSON object per line
        #[arg(long)]
        input: String,
        #[arg(long)]
        out: Option<String>,
    },
}

enum CliError {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            out,
            epochs,
        } => cmd_run(&config, seed, out, epochs),
        Command::Sample {
            config,
            count,
            seed,
            out,
        } => cmd_sample(&config, count, seed, out),
        Command::ScalingStudy { config, seed, out } => cmd_scaling_study(&config, seed, out),
        Command::Validate { config, input, out } => cmd_validate(&config, &input, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_experiment(path: &str, seed: Option<u64>) -> Result<Experiment, CliError> {
    let (cfg, digest) = ExperimentConfig::load(path)?;
    let mut exp = cfg.build(digest)?;
    if let Some(s) = seed {
        exp.design.seed = s;
    }
    Ok(exp)
}

fn open_writer(path: Option<&str>) -> Result<Box<dyn Write>, CliError> {
    match path {
        None => Ok(Box::new(std::io::stdout().lock())),
        Some(p) => {
            let file = File::create(p)
                .map_err(|e| CliError::Runtime(format!("cannot create {p}: {e}")))?;
            Ok(Box::new(BufWriter::new(file)))
        }
    }
}

fn write_record(w: &mut dyn Write, value: &serde_json::Value) -> Result<(), CliError> {
    serde_json::to_writer(&mut *w, value)
        .map_err(|e| CliError::Runtime(format!("write failed: {e}")))?;
    writeln!(w).map_err(|e| CliError::Runtime(format!("write failed: {e}")))
}

fn cmd_run(
    config: &str,
    seed: Option<u64>,
    out: Option<String>,
    epochs: Option<usize>,
) -> Result<(), CliError> {
    let mut exp = load_experiment(config, seed)?;
    if let Some(e) = epochs {
        exp.design.max_epochs = e;
    }
    exp.design
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let out_path = out
        .or_else(|| exp.output.clone())
        .ok_or_else(|| CliError::Config("an output path is required (config or --out)".into()))?;

    let started = Instant::now();
    let mut writer = open_writer(Some(&out_path))?;
    let run_result = {
        let writer = &mut writer;
        let mut sink = |rec: &EpochRecord| -> Result<(), String> {
            let mut v = serde_json::to_value(rec).map_err(|e| e.to_string())?;
            v["type"] = json!("epoch");
            serde_json::to_writer(&mut *writer, &v).map_err(|e| e.to_string())?;
            writeln!(writer).map_err(|e| e.to_string())?;
            writer.flush().map_err(|e| e.to_string())
        };
        run_design(&mut exp.toolkit, &exp.domain, &exp.design, &mut sink)
    };
    // partial records are already flushed when the loop fails
    let outcome = run_result.map_err(|e| CliError::Runtime(e.to_string()))?;

    let last = outcome
        .records
        .last()
        .ok_or_else(|| CliError::Runtime("run produced no epochs".into()))?;
    let (cheap_calls, accurate_calls) = exp.toolkit.estimator.call_breakdown();
    let summary = json!({
        "type": "summary",
        "best_objectives": last.best_objectives,
        "final_hypervolume": last.hypervolume,
        "estimator_calls": { "cheap": cheap_calls, "accurate": accurate_calls },
        "epochs": outcome.epochs_run,
        "seed": exp.design.seed,
        "config_digest": exp.digest,
    });
    write_record(writer.as_mut(), &summary)?;
    writer
        .flush()
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    println!(
        "run complete: {} epochs, best objective {:?}, {} estimator calls, {:.2}s, records in {}",
        outcome.epochs_run,
        last.best_objectives.values(),
        cheap_calls + accurate_calls,
        started.elapsed().as_secs_f64(),
        out_path,
    );
    Ok(())
}

fn cmd_sample(
    config: &str,
    count: usize,
    seed: Option<u64>,
    out: Option<String>,
) -> Result<(), CliError> {
    let exp = load_experiment(config, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(exp.design.seed);
    let mut writer = open_writer(out.as_deref())?;
    for index in 0..count {
        let structure = sample_structure(&exp.domain, &exp.sampler_cfg, &mut rng)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        debug_assert!(validate(&structure, &exp.domain).valid());
        let record = json!({
            "type": "structure",
            "index": index,
            "structure": structure,
        });
        write_record(writer.as_mut(), &record)?;
    }
    writer
        .flush()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn cmd_scaling_study(
    config: &str,
    seed: Option<u64>,
    out: Option<String>,
) -> Result<(), CliError> {
    let exp = load_experiment(config, seed)?;
    let block = exp
        .scaling
        .as_ref()
        .ok_or_else(|| CliError::Config("scaling block is required for scaling-study".into()))?;
    if block.values.is_empty() || block.repetitions == 0 {
        return Err(CliError::Config(
            "scaling.values must be non-empty and repetitions >= 1".into(),
        ));
    }

    let rows = synthetic::scaling_study(
        block.axis.into(),
        &block.values,
        block.repetitions,
        block.population,
        block.generations,
        exp.design.seed,
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut writer = open_writer(out.as_deref().or(exp.output.as_deref()))?;
    for row in &rows {
        let record = json!({
            "type": "scaling",
            "sweep_value": row.sweep_value,
            "repetition": row.repetition,
            "error": row.error,
        });
        write_record(writer.as_mut(), &record)?;
    }

    // per-value medians and the rank correlation across the sweep
    let mut medians = Vec::new();
    for value in &block.values {
        let errs: Vec<f64> = rows
            .iter()
            .filter(|r| r.sweep_value == *value)
            .map(|r| r.error)
            .collect();
        medians.push((*value, synthetic::median(&errs)));
    }
    let xs: Vec<f64> = medians.iter().map(|(v, _)| *v).collect();
    let ys: Vec<f64> = medians.iter().map(|(_, m)| *m).collect();
    let summary = json!({
        "type": "scaling_summary",
        "medians": medians
            .iter()
            .map(|(v, m)| json!({"sweep_value": v, "median_error": m}))
            .collect::<Vec<_>>(),
        "spearman": synthetic::spearman(&xs, &ys),
        "seed": exp.design.seed,
        "config_digest": exp.digest,
    });
    write_record(writer.as_mut(), &summary)?;
    writer
        .flush()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn cmd_validate(config: &str, input: &str, out: Option<String>) -> Result<(), CliError> {
    let exp = load_experiment(config, None)?;
    let file =
        File::open(input).map_err(|e| CliError::Runtime(format!("cannot open {input}: {e}")))?;
    let reader = BufReader::new(file);
    let mut writer = open_writer(out.as_deref())?;

    let mut invalid = 0usize;
    for (line_no, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CliError::Runtime(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| CliError::Runtime(format!("line {}: {e}", line_no + 1)))?;
        if value.get("type").and_then(|t| t.as_str()) != Some("structure") {
            continue;
        }
        let structure: Structure = serde_json::from_value(value["structure"].clone())
            .map_err(|e| CliError::Runtime(format!("line {}: {e}", line_no + 1)))?;
        let report = validate(&structure, &exp.domain);
        if !report.valid() {
            invalid += 1;
        }
        let record = json!({
            "type": "report",
            "index": value.get("index").cloned().unwrap_or(json!(line_no)),
            "valid": report.valid(),
            "violations": report.violations,
        });
        write_record(writer.as_mut(), &record)?;
    }
    writer
        .flush()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    if invalid > 0 {
        eprintln!("{invalid} structures failed validation");
    }
    Ok(())
}
