//! Simulation presets: each runs seeded replicates of one model/algorithm
//! pairing and records the per-iteration error trace.

use std::fmt;
use std::str::FromStr;

use lloyd_core::commu::{fit_commu_lloyd, CommuConfig};
use lloyd_core::crowd::{fit_crowd_lloyd, CrowdConfig};
use lloyd_core::lloyd::{corrupt_cyclic, fit_lloyd, log_budget, Init, LloydConfig};
use lloyd_core::model::Reference;
use lloyd_core::rng::child_seed;
use lloyd_core::samplers::{
    sample_crowd, sample_gmm, sample_sbm, sample_uniform_labels, sigma_for_snr, CrowdSpec, GmmSpec,
    SbmSpec,
};
use lloyd_core::{ConvergenceTrace, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// k = 10 orthonormal centers in d = 100, sigma = 2/SNR, SNR in {6,7,8,9}.
    Fig1,
    /// k in {5,10,25,50}, 1000/k points per cluster, sigma = 0.25.
    Fig2K,
    SbmBalanced,
    SbmSparse,
    SbmUnbalanced,
    /// 100 workers, 1000 items, two classes, observation rate in {1, 0.5, 0.2}.
    CrowdTable,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2K => "fig2-k",
            Preset::SbmBalanced => "sbm-balanced",
            Preset::SbmSparse => "sbm-sparse",
            Preset::SbmUnbalanced => "sbm-unbalanced",
            Preset::CrowdTable => "crowd-table",
        }
    }

    /// Sample size, used as the floor `1/n` when plotting `ln A`.
    pub fn sample_size(self) -> usize {
        match self {
            Preset::Fig1 | Preset::Fig2K | Preset::SbmUnbalanced | Preset::CrowdTable => 1000,
            Preset::SbmBalanced | Preset::SbmSparse => 2000,
        }
    }

    /// Iterations recorded per replicate (the trace has one more row).
    pub fn default_iterations(self) -> usize {
        match self {
            Preset::Fig1 => 15,
            Preset::Fig2K => 20,
            Preset::SbmBalanced | Preset::SbmSparse | Preset::SbmUnbalanced => {
                log_budget(self.sample_size(), 4.0)
            }
            Preset::CrowdTable => CrowdConfig::default().max_iter,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as clap::ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub reps: usize,
    pub seed: u64,
    pub iterations: Option<usize>,
    /// Target group-wise error of the corrupted-truth initializer used by
    /// the mixture presets. Defaults to 0.454 (fig1) and 0.37 (fig2-k).
    pub init_error: Option<f64>,
    /// Record wall-clock time per iteration (makes output non-reproducible).
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(preset: Preset, reps: usize, seed: u64) -> Self {
        Self {
            preset,
            reps,
            seed,
            iterations: None,
            init_error: None,
            timing: false,
        }
    }
}

/// One line of the trace CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// Preset arm, e.g. `fig1/snr=9`.
    pub preset: String,
    pub replicate: usize,
    pub iteration: usize,
    #[serde(rename = "A")]
    pub misclustering: Option<f64>,
    #[serde(rename = "G")]
    pub groupwise: Option<f64>,
    #[serde(rename = "Lambda")]
    pub center_error: Option<f64>,
    pub objective: Option<f64>,
    pub elapsed_ms: Option<f64>,
}

pub fn trace_rows(arm: &str, replicate: usize, trace: &ConvergenceTrace, timing: bool) -> Vec<TraceRow> {
    trace
        .entries
        .iter()
        .map(|e| TraceRow {
            preset: arm.to_owned(),
            replicate,
            iteration: e.iteration,
            misclustering: e.metrics.misclustering,
            groupwise: e.metrics.groupwise,
            center_error: e.metrics.center_error,
            objective: e.metrics.objective,
            elapsed_ms: timing.then(|| e.elapsed.as_secs_f64() * 1e3),
        })
        .collect()
}

pub fn write_trace_csv<W: std::io::Write>(rows: &[TraceRow], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn trace_csv_string(rows: &[TraceRow]) -> String {
    let mut buf = Vec::new();
    write_trace_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

pub fn read_trace_csv(text: &str) -> csv::Result<Vec<TraceRow>> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}

struct Arm {
    label: String,
    run: Box<dyn Fn(usize) -> Result<ConvergenceTrace> + Sync>,
}

fn mixture_arm(label: String, spec: GmmSpec, init_error: f64, iterations: usize, seed: u64) -> Arm {
    let k = spec.centers.k();
    Arm {
        label,
        run: Box::new(move |rep| {
            // same noise draw for every arm of a replicate
            let (y, z) = sample_gmm(&spec, child_seed(seed, "mixture-data", rep as u64));
            let init = corrupt_cyclic(&z, init_error, child_seed(seed, "mixture-init", rep as u64))?;
            let reference = Reference::with_centers(z, spec.centers.clone());
            let config = LloydConfig::default().with_max_iter(iterations).full_budget();
            Ok(fit_lloyd(&y, k, &Init::Labels(init), &config, Some(&reference))?.trace)
        }),
    }
}

fn sbm_arm(label: String, spec: SbmSpec, iterations: usize, seed: u64) -> Arm {
    Arm {
        label,
        run: Box::new(move |rep| {
            let (graph, z) = sample_sbm(&spec, child_seed(seed, "sbm-data", rep as u64));
            let mut config = CommuConfig::default().with_seed(child_seed(seed, "sbm-fit", rep as u64));
            config.max_iter = Some(iterations);
            config.early_stop = false;
            Ok(fit_commu_lloyd(&graph, spec.k, &config, Some(&Reference::labels(z)))?.trace)
        }),
    }
}

fn crowd_arm(label: String, observe_prob: f64, iterations: usize, seed: u64) -> Arm {
    Arm {
        label,
        run: Box::new(move |rep| {
            let rep = rep as u64;
            let spec = CrowdSpec::simulation_preset(observe_prob, child_seed(seed, "crowd-confusion", rep))?;
            let truth = sample_uniform_labels(1000, 2, child_seed(seed, "crowd-truth", rep))?;
            let table = sample_crowd(&spec, &truth, child_seed(seed, "crowd-answers", rep))?;
            let config = CrowdConfig {
                max_iter: iterations,
                early_stop: false,
            };
            Ok(fit_crowd_lloyd(&table, &config, Some(&Reference::labels(truth)))?.trace)
        }),
    }
}

fn arms(config: &ExperimentConfig) -> Result<Vec<Arm>> {
    let preset = config.preset;
    let iterations = config.iterations.unwrap_or_else(|| preset.default_iterations());
    let seed = config.seed;
    let name = preset.name();
    Ok(match preset {
        Preset::Fig1 => {
            let g0 = config.init_error.unwrap_or(0.454);
            let mut arms = Vec::new();
            for snr in [6.0, 7.0, 8.0, 9.0] {
                let spec = GmmSpec::orthonormal(10, 100, 100, sigma_for_snr(snr))?;
                arms.push(mixture_arm(format!("{name}/snr={snr}"), spec, g0, iterations, seed));
            }
            arms
        }
        Preset::Fig2K => {
            let g0 = config.init_error.unwrap_or(0.37);
            let mut arms = Vec::new();
            for k in [5, 10, 25, 50] {
                let spec = GmmSpec::orthonormal(k, 100, 1000 / k, 0.25)?;
                arms.push(mixture_arm(format!("{name}/k={k}"), spec, g0, iterations, seed));
            }
            arms
        }
        Preset::SbmBalanced => vec![sbm_arm(name.into(), SbmSpec::balanced(), iterations, seed)],
        Preset::SbmSparse => vec![sbm_arm(name.into(), SbmSpec::sparse(), iterations, seed)],
        Preset::SbmUnbalanced => vec![sbm_arm(name.into(), SbmSpec::unbalanced(), iterations, seed)],
        Preset::CrowdTable => [1.0, 0.5, 0.2]
            .into_iter()
            .map(|p| crowd_arm(format!("{name}/p={p}"), p, iterations, seed))
            .collect(),
    })
}

/// Run every arm of the preset for `reps` replicates. Rows are ordered by
/// arm, replicate, iteration regardless of scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TraceRow>> {
    if config.reps == 0 {
        return Err(lloyd_core::ClusterError::InvalidParameter(
            "at least one replicate is required".into(),
        ));
    }
    let mut rows = Vec::new();
    for arm in arms(config)? {
        let traces: Vec<ConvergenceTrace> = (0..config.reps)
            .into_par_iter()
            .map(|rep| (arm.run)(rep))
            .collect::<Result<_>>()?;
        for (rep, trace) in traces.iter().enumerate() {
            rows.extend(trace_rows(&arm.label, rep, trace, config.timing));
        }
    }
    Ok(rows)
}

/// Per-arm averages over replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmSummary {
    pub arm: String,
    pub reps: usize,
    /// Mean misclustering rate per iteration.
    pub mean_error: Vec<f64>,
    /// Mean of `ln max(A, floor)` per iteration.
    pub mean_log_error: Vec<f64>,
}

impl ArmSummary {
    pub fn initial_error(&self) -> f64 {
        self.mean_error[0]
    }

    pub fn final_error(&self) -> f64 {
        *self.mean_error.last().expect("non-empty trace")
    }
}

/// Group rows by arm (in order of first appearance) and average the
/// misclustering rate at each iteration. Missing values are skipped.
pub fn summarize(rows: &[TraceRow], floor: f64) -> Vec<ArmSummary> {
    let mut order: Vec<&str> = Vec::new();
    for r in rows {
        if !order.contains(&r.preset.as_str()) {
            order.push(&r.preset);
        }
    }
    order
        .into_iter()
        .map(|arm| {
            let arm_rows: Vec<&TraceRow> = rows.iter().filter(|r| r.preset == arm).collect();
            let iters = arm_rows.iter().map(|r| r.iteration + 1).max().unwrap_or(0);
            let mut sum = vec![0.0; iters];
            let mut log_sum = vec![0.0; iters];
            let mut count = vec![0usize; iters];
            for r in &arm_rows {
                if let Some(a) = r.misclustering {
                    sum[r.iteration] += a;
                    log_sum[r.iteration] += a.max(floor).ln();
                    count[r.iteration] += 1;
                }
            }
            let mut reps: Vec<usize> = arm_rows.iter().map(|r| r.replicate).collect();
            reps.sort_unstable();
            reps.dedup();
            let mean = |s: &[f64]| s.iter().zip(&count).map(|(v, &c)| v / c.max(1) as f64).collect();
            ArmSummary {
                arm: arm.to_owned(),
                reps: reps.len(),
                mean_error: mean(&sum),
                mean_log_error: mean(&log_sum),
            }
        })
        .collect()
}
