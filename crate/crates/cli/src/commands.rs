use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use slsm_core::experiment::{run_monte_carlo, trial_dataset, ExperimentReport, ReferenceConfig, ReferenceModel, TrialConfig};
use slsm_core::lsq::fit;
use slsm_core::rng::stream_rng;
use slsm_core::{sample_exact, sample_rejection, stretched_fit, Error, FitResult, ModelSpec, StretchedGaussian, StretchedOptions};

use crate::args::{Cli, Command, ExperimentArgs, FitArgs, FitMethod, SampleArgs, SampleMethod, TablesArgs, DEFAULT_SEED};
use crate::error::CliError;
use crate::format::{csv_bytes, emit, float, floats, json_bytes, read_xy_csv};
use crate::manifest::{CommandName, ConfigFile, RunManifest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleConfig {
    pub alpha: f64,
    pub beta: f64,
    pub diffusivity: f64,
    pub time: f64,
    pub n: usize,
    pub method: SampleMethod,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            diffusivity: 0.25,
            time: 1.0,
            n: 1000,
            method: SampleMethod::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub input: Option<PathBuf>,
    pub model: ModelSpec,
    pub method: FitMethod,
    pub beta: Option<f64>,
    pub fitting: StretchedOptions,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            input: None,
            model: ModelSpec::Polynomial { degree: 2 },
            method: FitMethod::Lsm,
            beta: None,
            fitting: StretchedOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub trial: TrialConfig,
    pub repetitions: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            trial: TrialConfig::reference(ReferenceModel::Polynomial, 0.4, 30.0, DEFAULT_SEED)
                .expect("reference configuration is valid"),
            repetitions: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TablesConfig {
    pub repetitions: usize,
    pub configs: Vec<ReferenceConfig>,
    pub fitting: StretchedOptions,
}

impl Default for TablesConfig {
    fn default() -> Self {
        Self {
            repetitions: 100,
            configs: ReferenceConfig::grid(),
            fitting: StretchedOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stages {
    pub beta: f64,
    pub transition: FitResult,
    #[serde(rename = "final")]
    pub final_fit: FitResult,
}

/// JSON written by `fit`. For stretched fits the top-level numbers are those
/// of the final stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub manifest: RunManifest,
    pub model: ModelSpec,
    pub method: FitMethod,
    pub params: Vec<f64>,
    pub sse: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<Stages>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub manifest: RunManifest,
    pub report: ExperimentReport,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    let file = cli.config.as_deref().map(ConfigFile::load).transpose()?;
    let name = match (&cli.command, &file) {
        (Some(c), Some(f)) if c.name() != f.command => {
            return Err(CliError::Usage(format!(
                "config file is for `{:?}`, not `{:?}`",
                f.command,
                c.name()
            )))
        }
        (Some(c), _) => c.name(),
        (None, Some(f)) => f.command,
        (None, None) => return Err(CliError::Usage("no subcommand given (see --help)".into())),
    };
    let seed = cli.seed.or(file.as_ref().and_then(|f| f.seed)).unwrap_or(DEFAULT_SEED);
    let out = cli.out.clone().or_else(|| file.as_ref().and_then(|f| f.out.clone()).map(PathBuf::from));

    match (name, cli.command) {
        (CommandName::Sample, cmd) => {
            let args = match cmd {
                Some(Command::Sample(a)) => a,
                _ => SampleArgs::default(),
            };
            sample(resolve_sample(&args, file.as_ref())?, seed, out.as_deref())
        }
        (CommandName::Fit, cmd) => {
            let args = match cmd {
                Some(Command::Fit(a)) => a,
                _ => FitArgs::default(),
            };
            fit_command(resolve_fit(&args, file.as_ref())?, seed, out.as_deref())
        }
        (CommandName::Experiment, cmd) => {
            let args = match cmd {
                Some(Command::Experiment(a)) => a,
                _ => ExperimentArgs::default(),
            };
            experiment(resolve_experiment(&args, file.as_ref(), seed)?, out.as_deref())
        }
        (CommandName::Tables, cmd) => {
            let args = match cmd {
                Some(Command::Tables(a)) => a,
                _ => TablesArgs::default(),
            };
            let dir = out.unwrap_or_else(|| PathBuf::from("tables"));
            tables(resolve_tables(&args, file.as_ref())?, seed, &dir)
        }
    }
}

fn base_config<T: Default + for<'de> Deserialize<'de>>(file: Option<&ConfigFile>) -> Result<T, CliError> {
    file.map(ConfigFile::config_as).transpose().map(Option::unwrap_or_default)
}

fn check_starts(starts: Option<usize>) -> Result<Option<usize>, CliError> {
    match starts {
        Some(0) => Err(CliError::Usage("--starts must be at least 1".into())),
        s => Ok(s),
    }
}

fn resolve_sample(args: &SampleArgs, file: Option<&ConfigFile>) -> Result<SampleConfig, CliError> {
    let mut cfg: SampleConfig = base_config(file)?;
    cfg.alpha = args.alpha.unwrap_or(cfg.alpha);
    cfg.beta = args.beta.unwrap_or(cfg.beta);
    cfg.diffusivity = args.diffusivity.unwrap_or(cfg.diffusivity);
    cfg.time = args.time.unwrap_or(cfg.time);
    cfg.n = args.n.unwrap_or(cfg.n);
    cfg.method = args.method.unwrap_or(cfg.method);
    if cfg.n == 0 {
        return Err(CliError::Usage("invalid parameter `n`: need at least one sample".into()));
    }
    Ok(cfg)
}

fn resolve_fit(args: &FitArgs, file: Option<&ConfigFile>) -> Result<FitConfig, CliError> {
    let mut cfg: FitConfig = base_config(file)?;
    if args.input.is_some() {
        cfg.input.clone_from(&args.input);
    }
    cfg.model = args.model.unwrap_or(cfg.model);
    cfg.method = args.method.unwrap_or(cfg.method);
    cfg.beta = args.beta.or(cfg.beta);
    if let Some(e) = args.transition_eval {
        cfg.fitting.transition_eval = e.into();
    }
    if let Some(s) = check_starts(args.starts)? {
        cfg.fitting.nonlinear.starts = s;
    }
    if cfg.input.is_none() {
        return Err(CliError::Usage("fit needs --input".into()));
    }
    if cfg.method == FitMethod::Stretched && cfg.beta.is_none() {
        return Err(CliError::Usage("--method stretched needs --beta".into()));
    }
    Ok(cfg)
}

fn resolve_experiment(args: &ExperimentArgs, file: Option<&ConfigFile>, seed: u64) -> Result<ExperimentConfig, CliError> {
    let mut cfg: ExperimentConfig = base_config(file)?;
    if let Some(case) = args.case {
        cfg.trial = case.trial_config(seed)?;
    }
    let trial = &mut cfg.trial;
    trial.seed = seed;
    trial.n = args.observations.unwrap_or(trial.n);
    trial.x_domain = (args.x_min.unwrap_or(trial.x_domain.0), args.x_max.unwrap_or(trial.x_domain.1));
    if let Some(a) = args.abscissas {
        trial.abscissas = a.into();
    }
    if let Some(e) = args.transition_eval {
        trial.fitting.transition_eval = e.into();
    }
    if let Some(s) = check_starts(args.starts)? {
        trial.fitting.nonlinear.starts = s;
    }
    cfg.repetitions = args.repetitions.unwrap_or(cfg.repetitions);
    if cfg.repetitions == 0 {
        return Err(CliError::Usage("--repetitions must be at least 1".into()));
    }
    trial.validate()?;
    Ok(cfg)
}

fn resolve_tables(args: &TablesArgs, file: Option<&ConfigFile>) -> Result<TablesConfig, CliError> {
    let mut cfg: TablesConfig = base_config(file)?;
    cfg.repetitions = args.repetitions.unwrap_or(cfg.repetitions);
    if let Some(c) = &args.configs {
        cfg.configs.clone_from(c);
    }
    if let Some(e) = args.transition_eval {
        cfg.fitting.transition_eval = e.into();
    }
    if let Some(s) = check_starts(args.starts)? {
        cfg.fitting.nonlinear.starts = s;
    }
    if cfg.repetitions == 0 {
        return Err(CliError::Usage("--repetitions must be at least 1".into()));
    }
    if cfg.configs.is_empty() {
        return Err(CliError::Usage("no configurations selected".into()));
    }
    Ok(cfg)
}

fn manifest_for<C: Serialize>(name: CommandName, cfg: &C, seed: u64, out: Option<&Path>) -> RunManifest {
    let mut manifest = RunManifest::new(name, cfg, seed, out);
    manifest.outputs = out.map(|p| vec![p.display().to_string()]).unwrap_or_default();
    manifest
}

pub fn sample(cfg: SampleConfig, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let law = StretchedGaussian::new(cfg.alpha, cfg.beta, cfg.diffusivity, cfg.time)?;
    let mut rng = stream_rng(seed, 0);
    let values = match cfg.method {
        SampleMethod::Exact => sample_exact(&law, &mut rng, cfg.n)?,
        SampleMethod::Rejection => sample_rejection(&law, &mut rng, cfg.n)?,
    };
    let manifest = manifest_for(CommandName::Sample, &cfg, seed, out);
    let mut text = format!("# {}\n", serde_json::to_string(&manifest).expect("manifest serializes"));
    for v in values {
        text.push_str(&float(v));
        text.push('\n');
    }
    emit(out, text.as_bytes())
}

pub fn fit_command(cfg: FitConfig, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let input = cfg.input.as_deref().expect("resolved fit config has an input");
    let data = read_xy_csv(input)?;
    let manifest = manifest_for(CommandName::Fit, &cfg, seed, out);
    let report = match cfg.method {
        FitMethod::Lsm => {
            let result = match fit(cfg.model, &data, None, &cfg.fitting.nonlinear) {
                Ok(r) => r,
                Err(Error::NonConvergence(best)) => *best,
                Err(e) => return Err(e.into()),
            };
            FitReport {
                manifest,
                model: cfg.model,
                method: cfg.method,
                params: result.params.to_vec(),
                sse: result.sse,
                iterations: result.iterations,
                converged: result.converged,
                stages: None,
            }
        }
        FitMethod::Stretched => {
            let beta = cfg.beta.expect("resolved stretched config has a beta");
            let s = stretched_fit(cfg.model, &data, beta, &cfg.fitting)?;
            FitReport {
                manifest,
                model: cfg.model,
                method: cfg.method,
                params: s.final_fit.params.to_vec(),
                sse: s.final_fit.sse,
                iterations: s.final_fit.iterations,
                converged: s.converged(),
                stages: Some(Stages {
                    beta,
                    transition: s.transition,
                    final_fit: s.final_fit,
                }),
            }
        }
    };
    emit(out, &json_bytes(&report))?;
    if report.converged {
        Ok(())
    } else {
        Err(CliError::NotConverged)
    }
}

pub fn experiment(cfg: ExperimentConfig, out: Option<&Path>) -> Result<(), CliError> {
    let report = run_monte_carlo(&cfg.trial, cfg.repetitions)?;
    let manifest = manifest_for(CommandName::Experiment, &cfg, cfg.trial.seed, out);
    emit(out, &json_bytes(&ExperimentOutput { manifest, report }))
}

fn param_names(model: ModelSpec) -> Vec<String> {
    (0..model.param_count())
        .map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("p{i}")
            }
        })
        .collect()
}

fn table_rows(report: &ExperimentReport) -> (Vec<String>, Vec<Vec<String>>) {
    let trial = report.representative_trial();
    let truth = &report.config.truth;
    let mut header = vec!["method".to_string()];
    header.extend(param_names(report.config.regression));
    header.extend(["error1".to_string(), "error2".to_string()]);
    let row = |label: &str, params: &[f64], e1: f64, e2: f64| {
        let mut r = vec![label.to_string()];
        r.extend(floats(params));
        r.extend([float(e1), float(e2)]);
        r
    };
    let final_fit = &trial.slsm_fit.final_fit;
    let rows = vec![
        row("f", &truth.params, 0.0, 0.0),
        row("LSM", &trial.lsm_fit.params, trial.lsm_error1, trial.lsm_error2),
        row("Stretched-LSM", &final_fit.params, trial.slsm_error1, trial.slsm_error2),
    ];
    (header, rows)
}

const SUMMARY_HEADER: [&str; 14] = [
    "metric",
    "lsm_median",
    "lsm_q1",
    "lsm_q3",
    "lsm_iqr",
    "slsm_median",
    "slsm_q1",
    "slsm_q3",
    "slsm_iqr",
    "win_rate",
    "completed",
    "excluded",
    "nonconverged",
    "representative_trial",
];

fn summary_rows(report: &ExperimentReport) -> Vec<Vec<String>> {
    let s = &report.summary;
    let representative = report.representative_trial().index;
    [
        ("error1", &s.lsm_error1, &s.slsm_error1, report.win_rate_error1),
        ("error2", &s.lsm_error2, &s.slsm_error2, report.win_rate_error2),
    ]
    .into_iter()
    .map(|(metric, lsm, slsm, rate)| {
        let mut r = vec![metric.to_string()];
        r.extend(floats(&[lsm.median, lsm.q1, lsm.q3, lsm.iqr, slsm.median, slsm.q1, slsm.q3, slsm.iqr, rate]));
        r.extend([report.completed(), report.excluded(), report.nonconverged, representative as usize].map(|c| c.to_string()));
        r
    })
    .collect()
}

fn figure_rows(report: &ExperimentReport) -> Result<Vec<Vec<String>>, CliError> {
    let trial = report.representative_trial();
    let data = trial_dataset(&report.config, trial.index)?;
    Ok(data
        .points()
        .map(|(x, y)| {
            floats(&[
                x,
                y,
                report.config.truth.eval(x),
                trial.lsm_fit.eval(x),
                trial.slsm_fit.final_fit.eval(x),
            ])
        })
        .collect())
}

pub fn tables(cfg: TablesConfig, seed: u64, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let mut outputs = Vec::new();
    let mut write = |name: String, bytes: Vec<u8>| -> Result<(), CliError> {
        let path = dir.join(&name);
        fs::write(&path, bytes).map_err(CliError::io(&path))?;
        outputs.push(path.display().to_string());
        Ok(())
    };
    for case in &cfg.configs {
        let mut trial = case.trial_config(seed)?;
        trial.fitting = cfg.fitting;
        let report = run_monte_carlo(&trial, cfg.repetitions)?;
        let slug = case.slug();

        let (header, rows) = table_rows(&report);
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        write(format!("table_{slug}.csv"), csv_bytes(&header, &rows)?)?;
        write(format!("summary_{slug}.csv"), csv_bytes(&SUMMARY_HEADER, &summary_rows(&report))?)?;
        let figure = figure_rows(&report)?;
        write(
            format!("figure_{slug}.csv"),
            csv_bytes(&["x", "y_noisy", "f_true", "F_lsm", "F_slsm"], &figure)?,
        )?;
        eprintln!(
            "{case}: win rate error1 {:.2}, error2 {:.2} over {} trials",
            report.win_rate_error1,
            report.win_rate_error2,
            report.completed()
        );
    }
    let mut manifest = RunManifest::new(CommandName::Tables, &cfg, seed, Some(dir));
    manifest.outputs = outputs;
    let path = dir.join("manifest.json");
    fs::write(&path, json_bytes(&manifest)).map_err(CliError::io(&path))
}
