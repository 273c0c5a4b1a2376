//! `isarf` command-line driver: synth, extract, cv, train, predict.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use isarf_core::eval::{run_cv, summary_table, write_report, CvConfig, ModelVariant};
use isarf_core::features::{extract_feature_vector, FeatureOptions, FeatureTable, DEFAULT_LARGE_LESION_ML};
use isarf_core::forest::{load_model, save_model, IsarfModel, IsarfParams, DEFAULT_MIN_GROUP_SIZE};
use isarf_core::selection::SelectionConfig;
use isarf_core::synth::{generate_cohort, load_subject, read_manifest, CohortConfig};
use isarf_core::Error;

const EXIT_DATA: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "isarf", version, about = "Infection-size-aware random forest screening pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic cohort.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long = "covid-frac")]
        covid_frac: Option<f64>,
        /// Both classes share one lesion profile.
        #[arg(long = "null-effect")]
        null_effect: bool,
    },
    /// Extract the 96-feature table of a cohort.
    Extract {
        #[arg(long)]
        cohort: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        /// Lesion volume (mL) counted by `num_large`.
        #[arg(long = "large-lesion-ml", default_value_t = DEFAULT_LARGE_LESION_ML)]
        large_lesion_ml: f64,
    },
    /// Cross-validate one model variant.
    Cv {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long = "min-group-size", default_value_t = DEFAULT_MIN_GROUP_SIZE)]
        min_group_size: usize,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Fit the size-split model on a whole feature table.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long = "model-out")]
        model_out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long = "min-group-size", default_value_t = DEFAULT_MIN_GROUP_SIZE)]
        min_group_size: usize,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Score a feature table with a saved model; writes `id,prob,group`.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical(_) => EXIT_NUMERICAL,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn data(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_DATA,
        message: message.into(),
    }
}

fn require_file(path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(data(format!("no such file: {}", path.display())))
    }
}

fn require_dir(path: &Path) -> Result<(), Failure> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(data(format!("no such directory: {}", path.display())))
    }
}

/// The parent of an output path must exist.
fn require_output(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => {
            Err(data(format!("output directory does not exist: {}", p.display())))
        }
        _ => Ok(()),
    }
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(usage("--jobs must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| data(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn isarf_params(min_group_size: usize) -> Result<IsarfParams, Failure> {
    if min_group_size == 0 {
        return Err(usage("--min-group-size must be at least 1"));
    }
    Ok(IsarfParams {
        min_group_size,
        ..IsarfParams::default()
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Synth {
            out,
            n,
            seed,
            covid_frac,
            null_effect,
        } => {
            require_output(&out)?;
            let mut config = CohortConfig {
                n_subjects: n,
                seed,
                ..CohortConfig::default()
            };
            if let Some(f) = covid_frac {
                config.covid_fraction = f;
            }
            if null_effect {
                config = config.null_effect();
            }
            let truth = generate_cohort(&config, &out)?;
            log::info!("wrote {} subjects to {}", truth.len(), out.display());
        }
        Command::Extract {
            cohort,
            out,
            jobs,
            large_lesion_ml,
        } => {
            require_dir(&cohort)?;
            require_output(&out)?;
            if !(large_lesion_ml >= 0.0 && large_lesion_ml.is_finite()) {
                return Err(usage("--large-lesion-ml must be a non-negative number"));
            }
            let entries = read_manifest(&cohort)?;
            let options = FeatureOptions { large_lesion_ml };
            let vectors = with_jobs(jobs, || {
                entries
                    .par_iter()
                    .map(|e| {
                        let s = load_subject(&cohort, e)?;
                        extract_feature_vector(&s, &options)
                            .map_err(|err| annotate(err, &e.subject_id))
                    })
                    .collect::<isarf_core::Result<Vec<_>>>()
            })??;
            FeatureTable::from_vectors(&vectors).write_csv(&out)?;
            log::info!("wrote {} rows to {}", vectors.len(), out.display());
        }
        Command::Cv {
            features,
            model,
            seed,
            out,
            folds,
            threshold,
            min_group_size,
            jobs,
        } => {
            let variant = ModelVariant::parse(&model).map_err(|e| usage(e.to_string()))?;
            require_file(&features)?;
            require_output(&out)?;
            if folds < 2 {
                return Err(usage("--folds must be at least 2"));
            }
            if !(0.0..=1.0).contains(&threshold) {
                return Err(usage("--threshold must lie in [0, 1]"));
            }
            let mut config = CvConfig::new(variant, seed);
            config.folds = folds;
            config.threshold = threshold;
            config.isarf = isarf_params(min_group_size)?;
            let table = FeatureTable::read_csv(&features)?;
            let report = with_jobs(jobs, || run_cv(&table, &config))??;
            write_report(&report, &out)?;
            print!("{}", summary_table(&report));
        }
        Command::Train {
            features,
            model_out,
            seed,
            min_group_size,
            jobs,
        } => {
            require_file(&features)?;
            require_output(&model_out)?;
            let params = isarf_params(min_group_size)?;
            let table = FeatureTable::read_csv(&features)?;
            let model = with_jobs(jobs, || IsarfModel::train(&table, seed, &params, &SelectionConfig::default()))??;
            save_model(&model, &model_out)?;
            log::info!(
                "model with {} size groups written to {}",
                model.n_groups(),
                model_out.display()
            );
        }
        Command::Predict { model, features, out } => {
            require_file(&model)?;
            require_file(&features)?;
            require_output(&out)?;
            let m = load_model(&model)?;
            let table = FeatureTable::read_csv(&features)?;
            let predictions = m.predict_table(&table)?;
            write_predictions(&out, &table.ids, &predictions)?;
        }
    }
    Ok(())
}

fn annotate(e: Error, subject: &str) -> Error {
    match e {
        Error::Numerical(m) => Error::Numerical(format!("subject {subject}: {m}")),
        Error::InvalidInput(m) => Error::InvalidInput(format!("subject {subject}: {m}")),
        other => other,
    }
}

fn write_predictions(path: &Path, ids: &[String], predictions: &[(f64, usize)]) -> Result<(), Failure> {
    let io = |e: std::io::Error| data(format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "id,prob,group").map_err(io)?;
    for (id, (p, g)) in ids.iter().zip(predictions) {
        writeln!(w, "{id},{p},{g}").map_err(io)?;
    }
    w.flush().map_err(io)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
