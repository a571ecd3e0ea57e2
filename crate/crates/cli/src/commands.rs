//! Subcommand implementations, kept out of `main` so tests can drive them.

use std::collections::HashMap;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, OnceLock};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use padguard_core::distance::{
    evaluate, fit, random_search_cv, write_dataset_csv, write_model, GbdtHyperParams,
    RegressionMetrics, Sample, SearchSpace,
};
use padguard_core::mission::write_transition_log;
use padguard_core::sim::{
    generate_dataset, resolve_estimator, DatasetConfig, DistanceEstimator, DistanceSpec,
    TraceRecord,
};
use padguard_core::{
    oracle_solve, run_scenario, solve, LandingProblem, LandingSolution, Scenario, SimulationTrace,
    SolverConfig, Transport, WorldPoint2D,
};

use crate::bundled;
use crate::metrics::LocalizationEval;
use crate::report::{build_report, localization_from_trace, RunReport};

/// Reads a scenario from a bundled name or a file path. Returns the directory
/// that relative paths inside the scenario resolve against.
pub fn load_scenario(arg: &str) -> Result<(Scenario, PathBuf)> {
    if let Some(text) = bundled::get(arg) {
        let sc = Scenario::from_json(text).with_context(|| format!("bundled scenario {arg}"))?;
        return Ok((sc, bundled::dir()));
    }
    let path = Path::new(arg);
    let text =
        fs::read_to_string(path).with_context(|| format!("reading scenario {}", path.display()))?;
    let sc = Scenario::from_json(&text).with_context(|| format!("scenario {}", path.display()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((sc, base))
}

/// Trained estimators are reused across runs in one process; training is
/// deterministic, so the cache never changes a result.
pub fn estimator_for(spec: &DistanceSpec, base_dir: &Path) -> Result<DistanceEstimator> {
    static CACHE: OnceLock<Mutex<HashMap<String, DistanceEstimator>>> = OnceLock::new();
    let DistanceSpec::Train { .. } = spec else {
        return Ok(resolve_estimator(spec, base_dir)?);
    };
    let key = serde_json::to_string(spec)?;
    let cache = CACHE.get_or_init(Default::default);
    if let Some(e) = cache.lock().expect("cache lock").get(&key) {
        return Ok(e.clone());
    }
    let e = resolve_estimator(spec, base_dir)?;
    cache.lock().expect("cache lock").insert(key, e.clone());
    Ok(e)
}

/// Runs a scenario with the given seed and returns its trace.
pub fn simulate(
    sc: &Scenario,
    base_dir: &Path,
    seed: u64,
    transport: Transport,
) -> Result<SimulationTrace> {
    let mut sc = sc.clone();
    sc.seed = seed;
    let est = estimator_for(&sc.distance, base_dir)?;
    Ok(run_scenario(&sc, &est, transport)?)
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    scenario_id: &'a str,
    seed: u64,
    transport: Transport,
    files: Vec<&'a str>,
}

/// `run`: simulate and write the trace, report, transition log and manifest
/// into `out_dir`.
pub fn cmd_run(
    scenario: &str,
    seed: u64,
    out_dir: &Path,
    transport: Transport,
    csv: bool,
) -> Result<RunReport> {
    let (sc, base) = load_scenario(scenario)?;
    let trace = simulate(&sc, &base, seed, transport)?;
    let report = build_report(&trace)?;
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    fs::write(out_dir.join("trace.jsonl"), trace.to_jsonl())?;
    fs::write(out_dir.join("report.json"), report.to_json())?;
    let log: Vec<_> = trace.transitions().cloned().collect();
    write_transition_log(&log, fs::File::create(out_dir.join("transitions.jsonl"))?)?;
    let mut files = vec!["trace.jsonl", "report.json", "transitions.jsonl"];
    if csv {
        write_csvs(&trace, out_dir)?;
        files.extend(["uav.csv", "people.csv"]);
    }
    let manifest = Manifest {
        tool: "padguard",
        version: env!("CARGO_PKG_VERSION"),
        scenario_id: &sc.id,
        seed,
        transport,
        files,
    };
    let mut m = serde_json::to_string_pretty(&manifest)?;
    m.push('\n');
    fs::write(out_dir.join("manifest.json"), m)?;
    Ok(report)
}

fn write_csvs(trace: &SimulationTrace, dir: &Path) -> Result<()> {
    let mut uav = csv::Writer::from_path(dir.join("uav.csv"))?;
    uav.write_record(["t", "mode", "x", "y", "z"])?;
    let mut people = csv::Writer::from_path(dir.join("people.csv"))?;
    people.write_record(["t", "id", "x", "y"])?;
    for r in &trace.records {
        match r {
            TraceRecord::Uav {
                t, mode, position, ..
            } => {
                let mode = serde_json::to_value(mode)?;
                uav.write_record([
                    t.to_string(),
                    mode.as_str().unwrap_or_default().to_string(),
                    position.x.to_string(),
                    position.y.to_string(),
                    position.z.to_string(),
                ])?;
            }
            TraceRecord::Truth { t, people: ps } => {
                for p in ps {
                    people.write_record([
                        t.to_string(),
                        p.id.to_string(),
                        p.x.to_string(),
                        p.y.to_string(),
                    ])?;
                }
            }
            _ => {}
        }
    }
    uav.flush()?;
    people.flush()?;
    Ok(())
}

pub fn read_trace(path: &Path) -> Result<SimulationTrace> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(SimulationTrace::read_jsonl(BufReader::new(f))?)
}

/// `report`: recompute the run report from a stored trace.
pub fn cmd_report(trace: &Path) -> Result<RunReport> {
    Ok(build_report(&read_trace(trace)?)?)
}

/// `eval`: localization accuracy of the ground side in a stored trace.
pub fn cmd_eval(trace: &Path) -> Result<LocalizationEval> {
    let t = read_trace(trace)?;
    let sc = t.scenario().context("trace has no header")?;
    localization_from_trace(&t, sc).context("no detection could be matched to ground truth")
}

#[derive(Debug, Clone, Deserialize)]
pub struct PlanInput {
    #[serde(flatten)]
    pub problem: LandingProblem,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleCheck {
    pub grid_step: f64,
    pub solution: LandingSolution,
    /// Solver objective minus oracle objective; negative means the solver lost.
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanOutput {
    pub solution: LandingSolution,
    pub landing_point: WorldPoint2D,
    pub oracle: Option<OracleCheck>,
}

/// `plan`: solve one landing problem, optionally cross-checked by the grid oracle.
pub fn cmd_plan(input: &str, oracle_grid: Option<f64>) -> Result<PlanOutput> {
    let PlanInput { problem, solver } = serde_json::from_str(input).context("parsing problem")?;
    problem.validate()?;
    let solution = solve(&problem, &solver);
    let oracle = oracle_grid.map(|step| {
        let o = oracle_solve(&problem, step, &solver);
        OracleCheck {
            grid_step: step,
            solution: o,
            gap: solution.objective - o.objective,
        }
    });
    Ok(PlanOutput {
        landing_point: solution.landing_point(&problem),
        solution,
        oracle,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub samples: usize,
    /// Fraction of samples kept out of training.
    pub holdout: f64,
    pub seed: u64,
    pub dataset: DatasetConfig,
    pub tuned: GbdtHyperParams,
    /// Random-search trials replacing `tuned`; 0 keeps it.
    pub search_trials: usize,
    pub folds: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            samples: 5000,
            holdout: 0.2,
            seed: 0,
            dataset: DatasetConfig::default(),
            tuned: GbdtHyperParams::default(),
            search_trials: 0,
            folds: 5,
        }
    }
}

/// Library defaults of the reference boosting implementation.
pub fn library_default_hyper() -> GbdtHyperParams {
    GbdtHyperParams::exact(6, 0.3, 100)
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainOutput {
    pub train_samples: usize,
    pub holdout_samples: usize,
    pub default_hyper: GbdtHyperParams,
    pub tuned_hyper: GbdtHyperParams,
    pub default_metrics: RegressionMetrics,
    pub tuned_metrics: RegressionMetrics,
    /// Share of holdout boxes whose normalized area is below 0.0135 ("far" boxes).
    pub far_fraction: f64,
}

impl TrainOutput {
    /// Comparison table with one row per hyperparameter set.
    pub fn table(&self) -> String {
        let row = |name: &str, m: &RegressionMetrics| {
            format!(
                "{name:<16}{:>8.3}{:>8.3}{:>8.3}{:>8.3}\n",
                m.mae, m.medae, m.maxerr, m.expvar
            )
        };
        let mut s = format!(
            "{:<16}{:>8}{:>8}{:>8}{:>8}\n",
            "Hyperparameters", "MAE", "MedAE", "MaxErr", "ExpVar"
        );
        s += &row("Default", &self.default_metrics);
        s += &row("Tuned", &self.tuned_metrics);
        s
    }
}

pub struct TrainResult {
    pub output: TrainOutput,
    pub model: padguard_core::GbdtModel,
    pub train: Vec<Sample>,
    pub holdout: Vec<Sample>,
}

/// `train-dist`: synthesize a dataset, fit default and tuned models, score both on the holdout.
pub fn cmd_train_dist(cfg: &TrainConfig) -> Result<TrainResult> {
    if !(0.0 < cfg.holdout && cfg.holdout < 1.0) {
        bail!("holdout fraction must be in (0, 1)");
    }
    let dataset = DatasetConfig {
        samples: cfg.samples,
        ..cfg.dataset
    };
    let data = generate_dataset(&dataset, cfg.seed)?;
    let n_hold = ((data.len() as f64) * cfg.holdout).round() as usize;
    if n_hold == 0 || n_hold >= data.len() {
        bail!(
            "{} samples are too few for a {} holdout",
            data.len(),
            cfg.holdout
        );
    }
    // samples are i.i.d., so a tail split is a random split
    let (train, holdout) = data.split_at(data.len() - n_hold);
    let tuned_hyper = if cfg.search_trials > 0 {
        random_search_cv(
            train,
            &SearchSpace::default(),
            cfg.folds,
            cfg.search_trials,
            cfg.seed,
        )?
    } else {
        cfg.tuned
    };
    let default_hyper = library_default_hyper();
    let default_model = fit(train, &default_hyper, cfg.seed)?;
    let model = fit(train, &tuned_hyper, cfg.seed)?;
    let far = holdout
        .iter()
        .filter(|s| s.features.area() < 0.0135)
        .count();
    Ok(TrainResult {
        output: TrainOutput {
            train_samples: train.len(),
            holdout_samples: holdout.len(),
            default_hyper,
            tuned_hyper,
            default_metrics: evaluate(&default_model, holdout)?,
            tuned_metrics: evaluate(&model, holdout)?,
            far_fraction: far as f64 / holdout.len() as f64,
        },
        model,
        train: train.to_vec(),
        holdout: holdout.to_vec(),
    })
}

/// Writes the model, metrics, table and dataset of a training run.
pub fn write_train_outputs(res: &TrainResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_model(&res.model, fs::File::create(dir.join("model.txt"))?)?;
    let mut m = serde_json::to_string_pretty(&res.output)?;
    m.push('\n');
    fs::write(dir.join("metrics.json"), m)?;
    fs::write(dir.join("table.txt"), res.output.table())?;
    write_dataset_csv(&res.train, fs::File::create(dir.join("train.csv"))?)?;
    write_dataset_csv(&res.holdout, fs::File::create(dir.join("holdout.csv"))?)?;
    Ok(())
}
