use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use ndarray::Array1;

use lloyd_bench::experiments::{summarize, trace_csv_string, trace_rows};
use lloyd_bench::io;
use lloyd_bench::svg::render_svg;
use lloyd_bench::{run_experiment, ExperimentConfig, Preset};
use lloyd_core::commu::{fit_commu_lloyd, CommuConfig, Threshold, TrimStyle};
use lloyd_core::crowd::{fit_crowd_lloyd, CrowdConfig};
use lloyd_core::lloyd::{
    fit_lloyd, fit_symmetric_two, labels_to_signs, random_init_search, random_labels, Init,
    LloydConfig, SymmetricInit,
};
use lloyd_core::model::{
    confusion_counts, groupwise_rate, misclustering_rate, misclustering_rate_bijective, Reference,
};
use lloyd_core::rng;
use lloyd_core::samplers::{
    sample_crowd, sample_gmm, sample_sbm, sample_symmetric_two, sample_uniform_labels,
    sigma_for_snr, CrowdSpec, GmmSpec, SbmSpec,
};
use lloyd_core::spectral::{spectral_cluster, SpectralOptions};
use lloyd_core::LabelVector;

#[derive(Parser)]
#[command(name = "lloyd", version, about = "Lloyd's algorithm for mixtures, block models and crowdsourcing")]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "LLOYD_OUT_DIR", default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic data set and its true labels.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        #[arg(long, global = true, default_value_t = 0)]
        seed: u64,
    },
    /// Fit a model and write labels, parameters and the iteration trace.
    Fit(FitArgs),
    /// Compare a predicted labeling with the truth.
    Eval {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        pred: PathBuf,
    },
    /// Run a simulation preset and write the trace CSV and an SVG chart.
    Experiment {
        #[arg(value_enum)]
        preset: Preset,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Iterations per replicate (preset default otherwise).
        #[arg(long)]
        iters: Option<usize>,
        /// Group-wise error of the initializer for the mixture presets.
        #[arg(long)]
        init_error: Option<f64>,
        /// Record wall-clock time per iteration.
        #[arg(long)]
        timing: bool,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Spherical Gaussian mixture with orthonormal centers.
    Gmm {
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        d: usize,
        #[arg(long, default_value_t = 100)]
        per_cluster: usize,
        #[arg(long, conflicts_with = "snr")]
        sigma: Option<f64>,
        /// Sets sigma = 2 / snr.
        #[arg(long)]
        snr: Option<f64>,
    },
    /// Symmetric two-component mixture with center `norm * e_1`.
    Sym2 {
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        d: usize,
        #[arg(long)]
        norm: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
    },
    /// Stochastic block model.
    Sbm {
        #[arg(long, value_enum, conflicts_with_all = ["sizes", "p_in", "p_out"])]
        preset: Option<SbmPreset>,
        /// Comma-separated community sizes.
        #[arg(long, value_delimiter = ',', requires_all = ["p_in", "p_out"])]
        sizes: Vec<usize>,
        #[arg(long)]
        p_in: Option<f64>,
        #[arg(long)]
        p_out: Option<f64>,
    },
    /// Crowd answers with diagonal confusion entries drawn from U[lo, hi].
    Crowd {
        #[arg(long, default_value_t = 100)]
        workers: usize,
        #[arg(long, default_value_t = 1000)]
        items: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0.3)]
        lo: f64,
        #[arg(long, default_value_t = 0.9)]
        hi: f64,
        #[arg(long, default_value_t = 1.0)]
        observe: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SbmPreset {
    Balanced,
    Sparse,
    Unbalanced,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Lloyd,
    Sym2,
    Commu,
    Crowd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitKind {
    Spectral,
    Random,
    Mv,
    File,
}

#[derive(Args)]
struct FitArgs {
    #[arg(value_enum)]
    algo: Algo,
    /// Dense CSV (lloyd, sym2), edge list (commu) or crowd CSV (crowd).
    #[arg(long)]
    data: PathBuf,
    /// Number of clusters (ignored by sym2 and crowd).
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, value_enum)]
    init: Option<InitKind>,
    /// Labels file for `--init file`.
    #[arg(long)]
    init_file: Option<PathBuf>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// True labels, for the error columns of the trace.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Failure probability of the random-restart search (sym2, random init).
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Trimming threshold as a multiple of the mean degree (commu).
    #[arg(long, default_value_t = 2.0)]
    trim: f64,
    /// Zero only the rows of trimmed nodes (commu).
    #[arg(long)]
    trim_rows_only: bool,
    #[arg(long)]
    timing: bool,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Gen { kind, seed } => generate(kind, seed, &cli.out),
        Command::Fit(args) => fit(&args, &cli.out),
        Command::Eval { truth, pred } => evaluate(&truth, &pred),
        Command::Experiment {
            preset,
            reps,
            seed,
            iters,
            init_error,
            timing,
        } => {
            let config = ExperimentConfig {
                iterations: iters,
                init_error,
                timing,
                ..ExperimentConfig::new(preset, reps, seed)
            };
            experiment(&config, &cli.out)
        }
    }
}

fn generate(kind: GenKind, seed: u64, out: &Path) -> Result<()> {
    match kind {
        GenKind::Gmm {
            k,
            d,
            per_cluster,
            sigma,
            snr,
        } => {
            let sigma = match (sigma, snr) {
                (Some(s), _) => s,
                (None, Some(r)) => sigma_for_snr(r),
                (None, None) => bail!("one of --sigma or --snr is required"),
            };
            let spec = GmmSpec::orthonormal(k, d, per_cluster, sigma)?;
            let (y, z) = sample_gmm(&spec, seed);
            io::write_dense(&out.join("data.csv"), y.as_array())?;
            io::write_dense(&out.join("centers.csv"), spec.centers.as_array())?;
            io::write_labels(&out.join("truth.txt"), &z)?;
        }
        GenKind::Sym2 { n, d, norm, sigma } => {
            if d == 0 {
                bail!("--d must be positive");
            }
            let mut theta = Array1::zeros(d);
            theta[0] = norm;
            let (y, signs) = sample_symmetric_two(&theta, sigma, n, seed)?;
            io::write_dense(&out.join("data.csv"), y.as_array())?;
            io::write_labels(&out.join("truth.txt"), &lloyd_core::lloyd::signs_to_labels(&signs))?;
        }
        GenKind::Sbm {
            preset,
            sizes,
            p_in,
            p_out,
        } => {
            let spec = match (preset, p_in, p_out) {
                (Some(SbmPreset::Balanced), ..) => SbmSpec::balanced(),
                (Some(SbmPreset::Sparse), ..) => SbmSpec::sparse(),
                (Some(SbmPreset::Unbalanced), ..) => SbmSpec::unbalanced(),
                (None, Some(a), Some(b)) => SbmSpec::from_probabilities(a, b, sizes)?,
                _ => bail!("give --preset or all of --sizes, --p-in, --p-out"),
            };
            let (graph, z) = sample_sbm(&spec, seed);
            io::write_edges(&out.join("edges.txt"), &graph)?;
            io::write_labels(&out.join("truth.txt"), &z)?;
        }
        GenKind::Crowd {
            workers,
            items,
            k,
            lo,
            hi,
            observe,
        } => {
            let spec = CrowdSpec::uniform_diagonal(workers, k, lo, hi, observe, rng::child_seed(seed, "confusion", 0))?;
            let truth = sample_uniform_labels(items, k, rng::child_seed(seed, "truth", 0))?;
            let table = sample_crowd(&spec, &truth, rng::child_seed(seed, "answers", 0))?;
            io::write_crowd(&out.join("crowd.csv"), &table)?;
            io::write_text(&out.join("confusion.csv"), &io::format_confusion(&spec.confusion))?;
            io::write_labels(&out.join("truth.txt"), &truth)?;
        }
    }
    info!("wrote data set to {}", out.display());
    Ok(())
}

fn fit(args: &FitArgs, out: &Path) -> Result<()> {
    let init = args.init.unwrap_or(match args.algo {
        Algo::Lloyd | Algo::Commu => InitKind::Spectral,
        Algo::Sym2 => InitKind::Random,
        Algo::Crowd => InitKind::Mv,
    });
    let allowed = match args.algo {
        Algo::Lloyd => [InitKind::Spectral, InitKind::Random, InitKind::File].contains(&init),
        Algo::Sym2 => [InitKind::Random, InitKind::File].contains(&init),
        Algo::Commu => init == InitKind::Spectral,
        Algo::Crowd => init == InitKind::Mv,
    };
    if !allowed {
        bail!("this initializer is not available for the chosen algorithm");
    }
    let init_labels = |k: Option<usize>| -> Result<LabelVector> {
        let path = args.init_file.as_deref().context("--init file needs --init-file")?;
        Ok(io::read_labels(path, k)?)
    };
    let truth = args.truth.as_deref().map(|p| io::read_labels(p, None)).transpose()?;
    let mut config = LloydConfig::default().with_seed(args.seed);
    config.max_iter = args.iters;

    let trace = match args.algo {
        Algo::Lloyd => {
            let y = io::read_dense(&args.data)?;
            let start = match init {
                InitKind::Spectral => {
                    let options = SpectralOptions::default().with_seed(args.seed);
                    spectral_cluster(&y, args.k, &options)?.labels
                }
                InitKind::Random => random_labels(y.n(), args.k, &mut rng::stream(args.seed, "cli-init", 0)),
                _ => init_labels(Some(args.k))?,
            };
            let reference = truth.map(|t| t.with_k(args.k)).transpose()?.map(Reference::labels);
            let fit = fit_lloyd(&y, args.k, &Init::Labels(start), &config, reference.as_ref())?;
            io::write_labels(&out.join("labels.txt"), &fit.labels)?;
            io::write_dense(&out.join("centers.csv"), fit.centers.as_array())?;
            fit.trace
        }
        Algo::Sym2 => {
            let y = io::read_dense(&args.data)?;
            let reference = truth.map(|t| t.with_k(2)).transpose()?.map(Reference::labels);
            let fit = match init {
                InitKind::Random => random_init_search(&y, args.delta, &config, reference.as_ref())?.best,
                _ => {
                    let signs = labels_to_signs(&init_labels(Some(2))?);
                    fit_symmetric_two(&y, &SymmetricInit::Signs(signs), &config, reference.as_ref())?
                }
            };
            io::write_labels(&out.join("labels.txt"), &fit.labels())?;
            io::write_dense(&out.join("centers.csv"), fit.centers().as_array())?;
            fit.trace
        }
        Algo::Commu => {
            let graph = io::read_edges(&args.data, truth.as_ref().map(LabelVector::len))?;
            let commu = CommuConfig {
                threshold: Threshold::Relative(args.trim),
                trim_style: if args.trim_rows_only { TrimStyle::RowOnly } else { TrimStyle::Symmetric },
                max_iter: args.iters,
                ..CommuConfig::default().with_seed(args.seed)
            };
            let reference = truth.map(|t| t.with_k(args.k)).transpose()?.map(Reference::labels);
            let fit = fit_commu_lloyd(&graph, args.k, &commu, reference.as_ref())?;
            info!("trimming threshold {:.3}", fit.tau);
            io::write_labels(&out.join("labels.txt"), &fit.labels)?;
            fit.trace
        }
        Algo::Crowd => {
            let table = io::read_crowd(&args.data)?;
            let crowd = CrowdConfig {
                max_iter: args.iters.unwrap_or(CrowdConfig::default().max_iter),
                ..CrowdConfig::default()
            };
            let reference = truth.map(|t| t.with_k(table.classes())).transpose()?.map(Reference::labels);
            let fit = fit_crowd_lloyd(&table, &crowd, reference.as_ref())?;
            if !fit.confusion.degenerate_rows.is_empty() {
                info!("{} confusion rows had no observations", fit.confusion.degenerate_rows.len());
            }
            io::write_labels(&out.join("labels.txt"), &fit.labels)?;
            io::write_text(&out.join("confusion.csv"), &io::format_confusion(&fit.confusion))?;
            fit.trace
        }
    };
    let rows = trace_rows("fit", 0, &trace, args.timing);
    io::write_text(&out.join("trace.csv"), &trace_csv_string(&rows))?;
    if let Some(last) = trace.last() {
        info!("{} iterations", last.iteration);
        if let Some(a) = last.metrics.misclustering {
            println!("final misclustering rate: {a}");
        }
    }
    Ok(())
}

fn evaluate(truth: &Path, pred: &Path) -> Result<()> {
    let truth = io::read_labels(truth, None)?;
    let pred = io::read_labels(pred, None)?;
    let k = truth.k().max(pred.k());
    let (truth, pred) = (truth.with_k(k)?, pred.with_k(k)?);
    let mapped = misclustering_rate(&truth, &pred)?;
    let bijective = misclustering_rate_bijective(&truth, &pred)?;
    let groupwise = groupwise_rate(&truth, &pred)?;
    println!("misclustering (best map): {}", mapped.rate);
    println!("misclustering (best permutation): {}", bijective.rate);
    println!("group-wise rate: {}", groupwise.rate);
    println!("confusion counts (rows: true, columns: predicted):");
    for row in confusion_counts(&truth, &pred)? {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        println!("{}", cells.join(" "));
    }
    Ok(())
}

fn experiment(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let name = config.preset.name();
    let rows = run_experiment(config)?;
    let csv = trace_csv_string(&rows);
    let floor = 1.0 / config.preset.sample_size() as f64;
    let svg = render_svg(&csv, floor, name)?;
    io::write_text(&out.join(format!("{name}.csv")), &csv)?;
    io::write_text(&out.join(format!("{name}.svg")), &svg)?;
    for s in summarize(&rows, floor) {
        println!(
            "{}: reps={} initial error {:.4}, final error {:.4}",
            s.arm,
            s.reps,
            s.initial_error(),
            s.final_error()
        );
    }
    info!("wrote {name}.csv and {name}.svg to {}", out.display());
    Ok(())
}
