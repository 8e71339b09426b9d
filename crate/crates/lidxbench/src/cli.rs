//! Command-line entry points wiring datasets, attacks, the harness, and
//! analysis into reproducible runs.
//!
//! Every subcommand accepts `--config <json>` supplying any of its flags;
//! explicit flags win. `LIDXBENCH_OUT_DIR`, when set, overrides the output
//! directory (CI hook).

use crate::analysis::{rank_bin_coverage, summarize, value_space_ecdf};
use crate::attacks::{generate_static_poison, AttackVariant, BlackBoxStrategy};
use crate::datasets::{load_sosd, prepare, synth_lognormal, synth_uniform, write_keys, Dataset, DatasetSource};
use crate::harness::{
    run_aca_paired, run_static_experiment, AcaReport, ExperimentConfig, ReportFile, StaticConfig,
    StaticReport, CSV_HEADER,
};
use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

const OUT_DIR_ENV: &str = "LIDXBENCH_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "lidxbench", version, about = "Learned-index adversarial workload workbench")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset: a keys file plus a disjoint holdout file
    Gen(GenArgs),
    /// Build a statically poisoned dataset from a keys file
    Poison(PoisonArgs),
    /// Run attack experiments and emit JSON reports plus a flat CSV
    AttackBench(BenchArgs),
    /// Summarize reports and compute rank-bin coverage diagnostics
    Analyze(AnalyzeArgs),
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn load_config<T: for<'de> Deserialize<'de> + Default>(path: &Option<PathBuf>) -> anyhow::Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn resolve_out(flag: Option<PathBuf>, file: Option<PathBuf>) -> PathBuf {
    if let Ok(dir) = std::env::var(OUT_DIR_ENV) {
        return PathBuf::from(dir);
    }
    pick(flag, file, PathBuf::from("out"))
}

pub fn run() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Gen(args) => cmd_gen(args),
        Command::Poison(args) => cmd_poison(args),
        Command::AttackBench(args) => cmd_attack_bench(args),
        Command::Analyze(args) => cmd_analyze(args),
    }
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GenArgs {
    /// JSON config file supplying any flag of this subcommand
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Key distribution: lognormal | uniform
    #[arg(long)]
    dist: Option<String>,
    /// Clean dataset size after dedup and subsampling
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long)]
    lo: Option<u64>,
    #[arg(long)]
    hi: Option<u64>,
    /// Holdout size as a fraction of n, reserved for control streams
    #[arg(long)]
    holdout_frac: Option<f64>,
    /// Basename for the emitted files (defaults to the distribution)
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_gen(args: GenArgs) -> anyhow::Result<()> {
    let file: GenArgs = load_config(&args.config)?;
    let dist = pick(args.dist, file.dist, "lognormal".into());
    let n = pick(args.n, file.n, 100_000);
    let seed = pick(args.seed, file.seed, 42);
    let holdout_frac = pick(args.holdout_frac, file.holdout_frac, 0.1);
    let out = resolve_out(args.out, file.out);
    let name = pick(args.name, file.name, dist.clone());

    // oversample so dedup losses cannot starve the subsample
    let raw_n = ((n as f64 * (1.0 + holdout_frac) * 1.25) as usize).max(n + 64);
    let (raw, source) = match dist.as_str() {
        "lognormal" => {
            let mu = pick(args.mu, file.mu, 0.0);
            let sigma = pick(args.sigma, file.sigma, 1.0);
            let scale = pick(args.scale, file.scale, 1e9);
            (
                synth_lognormal(raw_n, mu, sigma, scale, seed)?,
                DatasetSource::Lognormal { n: raw_n, mu, sigma, scale },
            )
        }
        "uniform" => {
            let lo = pick(args.lo, file.lo, 0);
            let hi = pick(args.hi, file.hi, 1_000_000_000_000);
            (
                synth_uniform(raw_n, lo, hi, seed)?,
                DatasetSource::Uniform { n: raw_n, lo, hi },
            )
        }
        other => bail!("unknown distribution '{other}' (expected lognormal|uniform)"),
    };

    let dataset = prepare(&name, &raw, n, holdout_frac, seed.wrapping_add(0x9E37_79B9), source)?;
    fs::create_dir_all(&out)?;
    let keys_path = out.join(format!("{name}.keys.sosd"));
    let holdout_path = out.join(format!("{name}.holdout.sosd"));
    write_keys(&keys_path, &dataset.keys)?;
    write_keys(&holdout_path, &dataset.holdout)?;
    println!("wrote {} ({} keys)", keys_path.display(), dataset.keys.len());
    println!(
        "wrote {} ({} keys)",
        holdout_path.display(),
        dataset.holdout.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// poison
// ---------------------------------------------------------------------------

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PoisonArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Keys file to poison (sorted unique u64 keys)
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Poisoning budget as a fraction of the dataset size
    #[arg(long)]
    alpha: Option<f64>,
    /// Absolute poisoning budget; overrides --alpha
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_poison(args: PoisonArgs) -> anyhow::Result<()> {
    let file: PoisonArgs = load_config(&args.config)?;
    let Some(dataset_path) = args.dataset.or(file.dataset) else {
        bail!("--dataset is required");
    };
    let seed = pick(args.seed, file.seed, 42);
    let out = resolve_out(args.out, file.out);
    let name = pick(
        args.name,
        file.name,
        dataset_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into()),
    );

    let keys = load_sosd(&dataset_path)?;
    if keys.windows(2).any(|w| w[0] >= w[1]) {
        bail!("dataset keys must be sorted and unique; run gen or prepare first");
    }
    let alpha = pick(args.alpha, file.alpha, 0.2);
    let budget = args
        .budget
        .or(file.budget)
        .unwrap_or_else(|| (alpha * keys.len() as f64).round() as u64);

    let poison = if budget > 0 {
        generate_static_poison(&keys, budget as usize, seed)?
    } else {
        Vec::new()
    };
    if (poison.len() as u64) < budget {
        eprintln!(
            "warning: integer gaps exhausted after {} keys (budget was {budget})",
            poison.len()
        );
    }

    let mut merged = keys.clone();
    merged.extend_from_slice(&poison);
    merged.sort_unstable();

    fs::create_dir_all(&out)?;
    let poison_path = out.join(format!("{name}.poison.sosd"));
    let merged_path = out.join(format!("{name}.poisoned.sosd"));
    write_keys(&poison_path, &poison)?;
    write_keys(&merged_path, &merged)?;
    println!("wrote {} ({} keys)", poison_path.display(), poison.len());
    println!("wrote {} ({} keys)", merged_path.display(), merged.len());
    Ok(())
}

// ---------------------------------------------------------------------------
// attack-bench
// ---------------------------------------------------------------------------

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BenchArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Rerun the exact experiment set recorded in a manifest.json
    #[arg(long)]
    #[serde(skip)]
    manifest: Option<PathBuf>,
    /// Clean keys file
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Holdout keys file (required for the control variant)
    #[arg(long)]
    holdout: Option<PathBuf>,
    /// Attack variant, repeatable: static | blackbox | whitebox | control
    #[arg(long)]
    variant: Vec<String>,
    /// Poisoning budget fraction, repeatable
    #[arg(long)]
    alpha: Vec<f64>,
    /// Adversarial inserts per round
    #[arg(long)]
    batch: Option<u64>,
    #[arg(long)]
    reps: Option<usize>,
    /// Clean-key lookups per timed phase
    #[arg(long)]
    probes: Option<usize>,
    /// Untimed warm-up lookups before each timed phase
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Black-box strategy: uniform | clustered
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Everything needed to reproduce a run; written to the output directory
/// before any experiment starts. Contains no timestamps or timing data, so
/// reruns produce byte-identical manifests.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub dataset_path: PathBuf,
    pub holdout_path: Option<PathBuf>,
    pub dataset_name: String,
    pub seed: u64,
    pub static_experiments: Vec<StaticConfig>,
    pub aca_experiments: Vec<ExperimentConfig>,
}

fn load_dataset(name: &str, keys_path: &Path, holdout_path: Option<&Path>) -> anyhow::Result<Dataset> {
    let keys = load_sosd(keys_path)?;
    if keys.is_empty() {
        bail!("dataset {} is empty", keys_path.display());
    }
    if keys.windows(2).any(|w| w[0] >= w[1]) {
        bail!("dataset keys must be sorted and unique");
    }
    let holdout = match holdout_path {
        Some(p) => load_sosd(p)?,
        None => Vec::new(),
    };
    Ok(Dataset {
        name: name.to_string(),
        keys,
        holdout,
        source: DatasetSource::File { path: keys_path.to_path_buf() },
    })
}

fn cmd_attack_bench(args: BenchArgs) -> anyhow::Result<()> {
    let file: BenchArgs = load_config(&args.config)?;
    let out = resolve_out(args.out.clone(), file.out.clone());

    let manifest: RunManifest = if let Some(path) = &args.manifest {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    } else {
        let Some(dataset_path) = args.dataset.or(file.dataset) else {
            bail!("--dataset is required");
        };
        if !dataset_path.exists() {
            bail!("dataset path {} does not exist", dataset_path.display());
        }
        let holdout_path = args.holdout.or(file.holdout);
        let variants = if args.variant.is_empty() { file.variant } else { args.variant };
        if variants.is_empty() {
            bail!("at least one --variant is required");
        }
        let variants: Vec<AttackVariant> = variants
            .iter()
            .map(|v| v.parse())
            .collect::<crate::error::Result<_>>()?;
        let alphas = if args.alpha.is_empty() { file.alpha } else { args.alpha };
        let batch = pick(args.batch, file.batch, 1_000);
        let reps = pick(args.reps, file.reps, 5);
        let probes = pick(args.probes, file.probes, 10_000);
        let warmup = pick(args.warmup, file.warmup, probes);
        let seed = pick(args.seed, file.seed, 42);
        let strategy = match pick(args.strategy, file.strategy, "uniform".into()).as_str() {
            "uniform" => BlackBoxStrategy::Uniform,
            "clustered" => BlackBoxStrategy::Clustered { width_fraction: 0.05 },
            other => bail!("unknown strategy '{other}' (expected uniform|clustered)"),
        };
        let name = pick(
            args.name,
            file.name,
            dataset_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into()),
        );

        let mut static_experiments = Vec::new();
        let mut aca_experiments = Vec::new();
        for variant in variants {
            match variant {
                AttackVariant::StaticPoison => {
                    let alphas = if alphas.is_empty() {
                        vec![0.05, 0.10, 0.15, 0.20]
                    } else {
                        alphas.clone()
                    };
                    let mut cfg = StaticConfig::new(&name, &alphas);
                    cfg.repetitions = reps;
                    cfg.lookup_sample = probes;
                    cfg.warmup_lookups = warmup;
                    cfg.seed = seed;
                    static_experiments.push(cfg);
                }
                _ => {
                    let alphas = if alphas.is_empty() { vec![0.20] } else { alphas.clone() };
                    for &alpha in &alphas {
                        let mut cfg = ExperimentConfig::new(&name, variant, alpha, batch);
                        cfg.repetitions = reps;
                        cfg.lookup_sample = probes;
                        cfg.warmup_lookups = warmup;
                        cfg.seed = seed;
                        cfg.blackbox_strategy = strategy;
                        aca_experiments.push(cfg);
                    }
                }
            }
        }
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            dataset_path,
            holdout_path,
            dataset_name: name,
            seed,
            static_experiments,
            aca_experiments,
        }
    };

    let dataset = load_dataset(
        &manifest.dataset_name,
        &manifest.dataset_path,
        manifest.holdout_path.as_deref(),
    )?;
    if manifest
        .aca_experiments
        .iter()
        .any(|c| c.variant == AttackVariant::RealKeyControl)
        && dataset.holdout.is_empty()
    {
        bail!("the control variant requires --holdout");
    }

    fs::create_dir_all(&out)?;
    let manifest_path = out.join("manifest.json");
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    println!("wrote {}", manifest_path.display());

    let mut csv_rows: Vec<String> = vec![CSV_HEADER.to_string()];
    let mut static_reports: Vec<StaticReport> = Vec::new();
    let mut aca_reports: Vec<AcaReport> = Vec::new();

    for cfg in &manifest.static_experiments {
        let report = run_static_experiment(&dataset, cfg)?;
        csv_rows.extend(report.csv_rows());
        let path = out.join(format!("{}.report.json", cfg.experiment_id()));
        fs::write(&path, serde_json::to_string_pretty(&ReportFile::Static(report.clone()))?)?;
        println!("wrote {}", path.display());
        for a in &report.alphas {
            println!(
                "  static alpha={:<5} learned slowdown {:.3} +/- {:.3} | btree {:.3} +/- {:.3}",
                a.alpha,
                a.learned_slowdown_mean,
                a.learned_slowdown_std,
                a.baseline_slowdown_mean,
                a.baseline_slowdown_std
            );
        }
        static_reports.push(report);
    }

    if !manifest.aca_experiments.is_empty() {
        // repetitions interleave across experiments for paired comparability
        let reports = run_aca_paired(&dataset, &manifest.aca_experiments)?;
        for report in reports {
            csv_rows.extend(report.csv_rows());
            let path = out.join(format!("{}.report.json", report.config.experiment_id()));
            fs::write(&path, serde_json::to_string_pretty(&ReportFile::Aca(report.clone()))?)?;
            println!("wrote {}", path.display());
            println!(
                "  {} alpha={} rounds={} peak slowdown {:.3} final {:.3}",
                report.config.variant,
                report.config.alpha,
                report.rounds,
                report.peak_slowdown,
                report.final_slowdown
            );
            aca_reports.push(report);
        }
    }

    let csv_path = out.join("rounds.csv");
    fs::write(&csv_path, csv_rows.join("\n") + "\n")?;
    println!("wrote {}", csv_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct AnalyzeArgs {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Directory of *.report.json files to summarize
    #[arg(long)]
    reports: Option<PathBuf>,
    /// Clean keys file for rank-bin coverage
    #[arg(long)]
    clean: Option<PathBuf>,
    /// Inserted-key stream file for rank-bin coverage
    #[arg(long)]
    inserted: Option<PathBuf>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_analyze(args: AnalyzeArgs) -> anyhow::Result<()> {
    let file: AnalyzeArgs = load_config(&args.config)?;
    let out = resolve_out(args.out, file.out);
    let reports_dir = args.reports.or(file.reports);
    let clean = args.clean.or(file.clean);
    let inserted = args.inserted.or(file.inserted);
    let bins = pick(args.bins, file.bins, 100);
    if reports_dir.is_none() && (clean.is_none() || inserted.is_none()) {
        bail!("nothing to do: pass --reports and/or both --clean and --inserted");
    }
    fs::create_dir_all(&out)?;

    if let Some(dir) = reports_dir {
        let mut aca = Vec::new();
        let mut statics = Vec::new();
        let mut entries: Vec<PathBuf> = fs::read_dir(&dir)
            .with_context(|| format!("reading {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.file_name().map_or(false, |n| n.to_string_lossy().ends_with(".report.json")))
            .collect();
        entries.sort();
        if entries.is_empty() {
            bail!("no *.report.json files in {}", dir.display());
        }
        for path in entries {
            let text = fs::read_to_string(&path)?;
            match serde_json::from_str::<ReportFile>(&text)
                .with_context(|| format!("parsing {}", path.display()))?
            {
                ReportFile::Aca(r) => aca.push(r),
                ReportFile::Static(r) => statics.push(r),
            }
        }
        let rows = summarize(&aca, &statics)?;
        let mut csv = String::from("dataset,variant,alpha,reports,peak_mean,peak_std,final_mean,final_std\n");
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{},{},{:.6},{:.6},{:.6},{:.6}\n",
                r.dataset, r.variant, r.alpha, r.reports, r.peak_mean, r.peak_std, r.final_mean, r.final_std
            ));
        }
        let csv_path = out.join("summary.csv");
        fs::write(&csv_path, csv)?;
        let json_path = out.join("summary.json");
        fs::write(&json_path, serde_json::to_string_pretty(&rows)?)?;
        println!("wrote {}", csv_path.display());
        println!("wrote {}", json_path.display());
    }

    if let (Some(clean_path), Some(inserted_path)) = (clean, inserted) {
        let clean_keys = load_sosd(&clean_path)?;
        let inserted_keys = load_sosd(&inserted_path)?;
        let coverage = rank_bin_coverage(&clean_keys, &inserted_keys, bins)?;
        let mut csv = String::from("bin,count,ecdf\n");
        for (i, (&c, &e)) in coverage.bin_counts.iter().zip(&coverage.ecdf).enumerate() {
            csv.push_str(&format!("{i},{c},{e:.6}\n"));
        }
        let path = out.join("rank_bins.csv");
        fs::write(&path, csv)?;
        println!(
            "wrote {} (occupied fraction {:.3})",
            path.display(),
            coverage.occupied_fraction
        );

        let ecdf = value_space_ecdf(&inserted_keys, bins)?;
        let mut csv = String::from("value,fraction\n");
        for (v, f) in ecdf {
            csv.push_str(&format!("{v},{f:.6}\n"));
        }
        let path = out.join("value_ecdf.csv");
        fs::write(&path, csv)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
