//! `driftgov` — label-free drift monitoring with governance alerts.
//!
//! Subcommands cover the full pipeline: `profile` freezes a reference,
//! `monitor` turns new data into governance alerts, `inject` perturbs a
//! dataset under a drift scenario, `evaluate` runs the four-scenario
//! evaluation with structural verifications, and `synth` generates
//! offline test data.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 data error,
//! 3 verification failure (`evaluate` only).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use driftgov::config::{
    parse_window_policy, ConfigError, MonitorConfigFile, ProfileDocument, SchemaConfig,
    CONFIG_SCHEMA_VERSION,
};
use driftgov::harness::{self, EvaluationOptions, HarnessError};
use driftgov::ingest::{self, WindowPolicy};
use driftgov::inject::{self, ScenarioKind};
use driftgov::logreg::FitOptions;
use driftgov::proxies::ProfileOptions;
use driftgov::report::{self, InjectionManifest};
use driftgov::synth::{self, SynthConfig};

#[derive(Parser)]
#[command(
    name = "driftgov",
    version,
    about = "Label-free governance drift monitoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the reference scorer and freeze the reference profile.
    Profile {
        /// Decision records (CSV or line-JSON).
        #[arg(long)]
        data: PathBuf,
        /// Schema mapping config (JSON).
        #[arg(long)]
        schema: PathBuf,
        /// Window policy: `calendar_year` or `fixed:N`.
        #[arg(long, default_value = "calendar_year")]
        windows: String,
        /// Output profile document.
        #[arg(long)]
        out: PathBuf,
        /// Quantile bins per distribution.
        #[arg(long, default_value_t = 10)]
        bins: usize,
    },
    /// Monitor a data file against a frozen profile; emit line-JSON alerts.
    Monitor {
        #[arg(long)]
        data: PathBuf,
        /// Profile document from the `profile` stage.
        #[arg(long)]
        profile: PathBuf,
        /// Monitor config (JSON); defaults to the credit preset.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output alerts file (one JSON object per line).
        #[arg(long)]
        out: PathBuf,
        /// Override the window policy.
        #[arg(long)]
        windows: Option<String>,
    },
    /// Apply a drift scenario to a dataset and emit the perturbed copy.
    Inject {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        /// One of: baseline, covariate, mixed, pure.
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 0)]
        noise_seed: u64,
        #[arg(long, default_value_t = 1)]
        flip_seed: u64,
        /// Output data file; a `.manifest.json` is written alongside.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "calendar_year")]
        windows: String,
        /// Comma-separated noise target features.
        #[arg(long)]
        targets: Option<String>,
    },
    /// Full four-scenario evaluation with structural verifications.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        noise_seed: u64,
        #[arg(long, default_value_t = 1)]
        flip_seed: u64,
        /// Output report (JSON).
        #[arg(long)]
        out: PathBuf,
        /// Also emit flat CSV tables into this directory.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        #[arg(long)]
        windows: Option<String>,
        #[arg(long)]
        targets: Option<String>,
    },
    /// Generate a synthetic labeled dataset with known ground truth.
    Synth {
        #[arg(long)]
        records: usize,
        #[arg(long)]
        years: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write the matching schema config here.
        #[arg(long)]
        schema_out: Option<PathBuf>,
    },
}

/// Failures mapped onto the documented exit codes.
enum CliError {
    /// Exit 1: bad invocation or configuration.
    Usage(String),
    /// Exit 2: the data could not be processed.
    Data(String),
    /// Exit 3: a structural verification failed.
    Verification(String),
}

impl CliError {
    fn report(&self) -> (&str, u8) {
        match self {
            CliError::Usage(m) => (m, 1),
            CliError::Data(m) => (m, 2),
            CliError::Verification(m) => (m, 3),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<ingest::IngestError> for CliError {
    fn from(e: ingest::IngestError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<inject::InjectError> for CliError {
    fn from(e: inject::InjectError) -> Self {
        CliError::Data(e.to_string())
    }
}

fn io_data(e: std::io::Error) -> CliError {
    CliError::Data(e.to_string())
}

fn parse_scenario(text: &str) -> Result<ScenarioKind, CliError> {
    match text {
        "baseline" => Ok(ScenarioKind::Baseline),
        "covariate" => Ok(ScenarioKind::Covariate),
        "mixed" => Ok(ScenarioKind::Mixed),
        "pure" | "pure_concept" => Ok(ScenarioKind::PureConcept),
        other => Err(CliError::Usage(format!(
            "unknown scenario `{other}`; use baseline, covariate, mixed or pure"
        ))),
    }
}

fn parse_targets(text: Option<&str>) -> Option<Vec<String>> {
    text.map(|t| {
        t.split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (message, code) = e.report();
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Profile {
            data,
            schema,
            windows,
            out,
            bins,
        } => {
            let schema = SchemaConfig::load(&schema)?;
            let policy = parse_window_policy(&windows)?;
            let (batch, report) = ingest::load_records(&data, &schema.mapping)?;
            eprintln!(
                "read {} rows ({} dropped)",
                report.rows_read,
                report.rows_dropped()
            );
            let prepared = harness::prepare_dataset(&batch, policy)?;
            let options = ProfileOptions {
                bin_count: bins,
                ..ProfileOptions::default()
            };
            let doc = harness::build_profile_document(
                &prepared,
                &schema.mapping,
                &FitOptions::default(),
                options,
            )?;
            doc.save(&out)?;
            eprintln!(
                "profile frozen from window `{}` ({} records) -> {}",
                prepared.dataset.reference().label,
                prepared.dataset.reference().records.len(),
                out.display()
            );
            Ok(())
        }
        Command::Monitor {
            data,
            profile,
            config,
            out,
            windows,
        } => {
            let doc = ProfileDocument::load(&profile)?;
            let config_file = match config {
                Some(path) => MonitorConfigFile::load(&path)?,
                None => MonitorConfigFile::credit(),
            };
            let policy = match windows {
                Some(text) => parse_window_policy(&text)?,
                None => config_file.window_policy.unwrap_or(doc.window_policy),
            };
            let (batch, _) = ingest::load_records(&data, &doc.mapping)?;
            let dataset =
                harness::prepare_monitoring_dataset(&batch, policy, &doc.imputation_means)?;
            let alerts = harness::monitor_windows(&dataset, &doc.profile, &config_file.monitor)?;
            let mut lines = String::new();
            for alert in &alerts {
                lines.push_str(&serde_json::to_string(alert).expect("alert serializes"));
                lines.push('\n');
            }
            std::fs::write(&out, lines).map_err(io_data)?;
            eprintln!("{} alerts -> {}", alerts.len(), out.display());
            Ok(())
        }
        Command::Inject {
            data,
            schema,
            scenario,
            noise_seed,
            flip_seed,
            out,
            windows,
            targets,
        } => {
            let schema = SchemaConfig::load(&schema)?;
            let kind = parse_scenario(&scenario)?;
            let policy = parse_window_policy(&windows)?;
            let (batch, _) = ingest::load_records(&data, &schema.mapping)?;
            let prepared = harness::prepare_dataset(&batch, policy)?;
            let dataset = &prepared.dataset;
            let mut spec = inject::scenario_schedule(kind, dataset.monitoring_count())
                .with_seeds(noise_seed, flip_seed);
            if let Some(list) = parse_targets(targets.as_deref()) {
                spec = spec.with_target_features(&list);
            }
            let application = inject::apply_scenario(dataset, &spec)?;

            let emitted_mapping = ingest::SchemaMapping {
                label_positive_value: "1".into(),
                ..schema.mapping.clone()
            };
            let records: Vec<_> = application
                .dataset
                .windows
                .iter()
                .flat_map(|w| w.records.iter().cloned())
                .collect();
            ingest::write_records_csv(
                &out,
                &emitted_mapping,
                &application.dataset.feature_names,
                &records,
            )
            .map_err(io_data)?;

            let manifest = InjectionManifest {
                schema_version: CONFIG_SCHEMA_VERSION,
                spec,
                rng_algorithm: driftgov::rng::RNG_ALGORITHM.to_string(),
                windows: application.windows,
                source: report::fingerprint(dataset),
                emitted_mapping,
            };
            let manifest_path = manifest_path_for(&out);
            driftgov::config::save_json(&manifest_path, &manifest)?;
            eprintln!(
                "{} records ({} scenario) -> {} (+ {})",
                records.len(),
                kind.name(),
                out.display(),
                manifest_path.display()
            );
            Ok(())
        }
        Command::Evaluate {
            data,
            schema,
            config,
            noise_seed,
            flip_seed,
            out,
            csv_dir,
            windows,
            targets,
        } => {
            let schema = SchemaConfig::load(&schema)?;
            let config_file = match config {
                Some(path) => MonitorConfigFile::load(&path)?,
                None => MonitorConfigFile::credit(),
            };
            let policy = match windows {
                Some(text) => parse_window_policy(&text)?,
                None => config_file
                    .window_policy
                    .unwrap_or(WindowPolicy::CalendarYear),
            };
            let (batch, _) = ingest::load_records(&data, &schema.mapping)?;
            let prepared = harness::prepare_dataset(&batch, policy)?;
            let mut options = EvaluationOptions {
                monitor_config: config_file.monitor.clone(),
                noise_seed,
                flip_seed,
                ..EvaluationOptions::default()
            };
            if let Some(list) = parse_targets(targets.as_deref()) {
                options.target_features = list;
            }
            let evaluation = harness::run_evaluation(&prepared, &options)?;
            evaluation.report.write_json(&out).map_err(io_data)?;
            if let Some(dir) = csv_dir {
                report::write_csv_tables(&evaluation.report, &dir).map_err(io_data)?;
            }
            for v in &evaluation.report.verifications {
                eprintln!(
                    "verification {}: {} (max discrepancy {})",
                    v.check,
                    if v.pass { "pass" } else { "FAIL" },
                    v.max_discrepancy
                );
            }
            eprintln!("report -> {}", out.display());
            if !evaluation.report.all_verifications_pass() {
                return Err(CliError::Verification(
                    "structural verification failed; see report".into(),
                ));
            }
            Ok(())
        }
        Command::Synth {
            records,
            years,
            seed,
            out,
            schema_out,
        } => {
            if records == 0 || years == 0 {
                return Err(CliError::Usage(
                    "--records and --years must be positive".into(),
                ));
            }
            let batch = synth::generate(&SynthConfig {
                records,
                years,
                seed,
                start_year: 2008,
            });
            let mapping = synth::canonical_mapping();
            ingest::write_records_csv(&out, &mapping, &batch.feature_names, &batch.records)
                .map_err(io_data)?;
            if let Some(path) = schema_out {
                driftgov::config::save_json(&path, &SchemaConfig::new(mapping))?;
            }
            eprintln!("{records} synthetic records -> {}", out.display());
            Ok(())
        }
    }
}

fn manifest_path_for(out: &std::path::Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}
