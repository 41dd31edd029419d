//! Command-line front end. Flags override values from the config file.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ensfs_core::preprocess::pipeline::run_pipeline;
use ensfs_core::synth::generate;

use crate::config::RunConfig;
use crate::error::{EnsfsError, Result};
use crate::harness::{prepare, run_experiment1, run_experiment2, run_prestudy, with_jobs};
use crate::io::{load_dataset, save_dataset, save_transform_params, write_text};
use crate::report::{hyperparameters_csv, summary, write_config_echo, write_report};

#[derive(Debug, Parser)]
#[command(name = "ensfs", version, about = "Ensemble feature selection experiments on small mixed-type tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset and its metadata sidecar.
    Synth,
    /// Clean, impute, encode and transform the whole dataset.
    Preprocess,
    /// Nested grid search for RENT hyperparameters.
    Prestudy,
    /// Both selectors over a range of max_s values.
    Exp1,
    /// UBayFS over a range of prior weights for the elevated features.
    Exp2,
}

#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// [paths] data
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// [paths] metadata
    #[arg(long, global = true)]
    pub metadata: Option<PathBuf>,
    /// [paths] output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// jobs (0 = all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// [folds] k
    #[arg(long, global = true)]
    pub folds: Option<usize>,
    /// [folds] seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// [rent] models and [ubayfs] models
    #[arg(long, global = true)]
    pub models: Option<usize>,
    /// [experiment] max_s
    #[arg(long, global = true)]
    pub max_s: Option<usize>,
    /// [experiment] max_s_values, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub max_s_values: Option<Vec<usize>>,
    /// [experiment] w_values, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub w_values: Option<Vec<f64>>,
    /// [experiment] elevated, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    pub elevated: Option<Vec<String>>,
    /// [experiment] knn_k
    #[arg(long, global = true)]
    pub knn_k: Option<usize>,
    /// [experiment] leakage_check
    #[arg(long, global = true)]
    pub leakage_check: bool,
    /// [experiment] curves
    #[arg(long, global = true)]
    pub curves: bool,
    /// [synth] profile
    #[arg(long, global = true)]
    pub profile: Option<String>,
    /// [synth] seed
    #[arg(long, global = true)]
    pub synth_seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($flag:expr, $field:expr) => {
                if let Some(v) = $flag.clone() {
                    $field = v;
                }
            };
        }
        set!(self.data, cfg.paths.data);
        set!(self.metadata, cfg.paths.metadata);
        set!(self.out, cfg.paths.output);
        set!(self.jobs, cfg.jobs);
        set!(self.folds, cfg.folds.k);
        set!(self.seed, cfg.folds.seed);
        set!(self.models, cfg.rent.models);
        set!(self.models, cfg.ubayfs.models);
        set!(self.max_s, cfg.experiment.max_s);
        set!(self.max_s_values, cfg.experiment.max_s_values);
        set!(self.w_values, cfg.experiment.w_values);
        set!(self.elevated, cfg.experiment.elevated);
        set!(self.knn_k, cfg.experiment.knn_k);
        set!(self.profile, cfg.synth.profile);
        set!(self.synth_seed, cfg.synth.seed);
        cfg.experiment.leakage_check |= self.leakage_check;
        cfg.experiment.curves |= self.curves;
    }
}

pub fn effective_config(o: &Overrides) -> Result<RunConfig> {
    let mut cfg = match &o.config {
        Some(p) => RunConfig::from_file(p).map_err(|e| match e {
            EnsfsError::FileNotFound(p) => EnsfsError::Config(format!("config file {} not found", p.display())),
            other => other,
        })?,
        None => RunConfig::default(),
    };
    o.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = effective_config(&cli.overrides)?;
    with_jobs(cfg.jobs, || dispatch(&cli.command, &cfg))?
}

fn dispatch(command: &Command, cfg: &RunConfig) -> Result<()> {
    if let Command::Synth = command {
        let spec = cfg.synth.resolve()?;
        let ds = generate(&spec)?;
        save_dataset(&ds, &cfg.paths.data, &cfg.paths.metadata)?;
        println!(
            "wrote {} rows x {} features to {} and {}",
            ds.n_rows(),
            ds.n_features(),
            cfg.paths.data.display(),
            cfg.paths.metadata.display()
        );
        return Ok(());
    }

    let ds = load_dataset(&cfg.paths.data, &cfg.paths.metadata)?;
    let prep = prepare(&ds, cfg)?;
    match command {
        Command::Synth => unreachable!(),
        Command::Preprocess => {
            let all: Vec<usize> = (0..prep.dataset.n_rows()).collect();
            let out = run_pipeline(&prep.dataset, &all, &cfg.preprocess)?;
            let dir = cfg.paths.output.join("preprocess");
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header: Vec<&str> = out.train.columns.iter().map(|c| c.name.as_str()).collect();
            header.push("target");
            w.write_record(&header)?;
            for i in 0..out.train.n_rows() {
                let mut rec: Vec<String> = out.train.values.row(i).iter().map(|x| format!("{x:?}")).collect();
                rec.push(out.train.target[i].to_string());
                w.write_record(&rec)?;
            }
            let bytes = w.into_inner().map_err(|e| EnsfsError::Config(e.to_string()))?;
            write_text(&dir.join("encoded.csv"), &String::from_utf8(bytes).expect("utf-8"))?;
            save_transform_params(&out.params, &dir.join("transform_params.toml"))?;
            write_config_echo(&dir, cfg)?;
            println!(
                "raw {}x{} -> encoded {}x{} ({} incomplete rows dropped, {} imputation fallbacks)",
                ds.n_rows(),
                ds.n_features(),
                out.train.n_rows(),
                out.train.n_cols(),
                ds.n_rows() - prep.dataset.n_rows(),
                out.train_warnings.len()
            );
        }
        Command::Prestudy => {
            let choices = run_prestudy(&prep, cfg, &[cfg.experiment.max_s])?;
            let dir = cfg.paths.output.join("prestudy");
            let table = hyperparameters_csv(&choices)?;
            write_text(&dir.join("hyperparameters.csv"), &table)?;
            write_config_echo(&dir, cfg)?;
            print!("{table}");
        }
        Command::Exp1 => {
            let report = run_experiment1(&prep, cfg)?;
            write_report(&report, cfg)?;
            print!("{}", summary(&report));
        }
        Command::Exp2 => {
            let report = run_experiment2(&prep, cfg)?;
            write_report(&report, cfg)?;
            print!("{}", summary(&report));
        }
    }
    Ok(())
}

/// Runs the CLI and returns the process exit code: 0 ok, 1 runtime error,
/// 2 usage or configuration error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                2
            } else {
                1
            }
        }
    }
}
