//! `recnet` command-line tool.
//!
//! Exit status is 0 on success, 1 on runtime or I/O failure and 2 on bad
//! flags or parameters.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use recnet::experiments::{compare_to_theory, report_json, write_report};
use recnet::fitting::{default_d_min, fit_exponential_decay, fit_power_law};
use recnet::io::{ingest_edge_list, write_edge_list, write_qualities, write_trace};
use recnet::stats::{degree_histogram, recency_curve, DegreeHistogram, DegreeMode, RecencyCurve};
use recnet::theory::{predicted_degree_density, predicted_e_of_t};
use recnet::{generate, run_ensemble, AttractivenessKind, Error, ExperimentConfig, ModelParams, ParetoParams, SeedSpec};

#[derive(Parser, Debug)]
#[command(name = "recnet", version, about = "Preferential attachment with recency: simulate, measure, compare")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Grow one graph and write its edge list and qualities.
    Generate(GenerateArgs),
    /// Degree histogram and recency curve of an edge-list file.
    Stats(StatsArgs),
    /// Closed-form degree density or recency curve.
    Theory(TheoryArgs),
    /// Fit a power-law tail or an exponential decay to a CSV table.
    Fit(FitArgs),
    /// Run a replica ensemble and write the report.
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Final number of vertices (>= 2).
    #[arg(long)]
    n: usize,
    /// Edges added per new vertex (>= 1).
    #[arg(long)]
    m: usize,
    /// Recency scale N, in vertex-arrival steps (>= 1).
    #[arg(long = "N")]
    scale: usize,
    /// Pareto tail exponent of the quality law (> 1).
    #[arg(long)]
    gamma: f64,
    /// Pareto lower bound of the quality law (> 0).
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// window, exp, general:<a1a2a3>:<tau> or agepower:<exponent>.
    #[arg(long, default_value = "window")]
    kind: String,
    /// Master seed (decimal 64-bit integer).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path stem; writes <out>.edges, <out>.qualities and, with --trace, <out>.trace.csv.
    #[arg(long)]
    out: PathBuf,
    /// Also record the total attractiveness Q(t) after every step.
    #[arg(long)]
    trace: bool,
}

#[derive(Args, Debug)]
struct StatsArgs {
    /// Edge-list file with a recnet header.
    #[arg(long = "in")]
    input: PathBuf,
    /// Quality file, one value per vertex.
    #[arg(long)]
    qualities: Option<PathBuf>,
    /// Comma-separated ascending gaps T, in steps; defaults to 0,N/4,N/2,3N/4,N,2N.
    #[arg(long = "T-grid", value_delimiter = ',')]
    t_grid: Option<Vec<u64>>,
    /// Degree counted in the histogram: in or total.
    #[arg(long = "d-mode", default_value = "in")]
    d_mode: String,
    /// Lower cutoff for the tail fit; defaults to 2m.
    #[arg(long = "d-min")]
    d_min: Option<u64>,
    /// Directory for degree_table.csv, recency_table.csv and summary.json.
    #[arg(long = "out-dir", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct TheoryArgs {
    /// Pareto tail exponent (> 1).
    #[arg(long)]
    gamma: Option<f64>,
    /// Edges per new vertex.
    #[arg(long)]
    m: Option<usize>,
    /// Print the degree density at this single degree.
    #[arg(long)]
    d: Option<f64>,
    /// Print a d,density table over lo,hi (inclusive).
    #[arg(long = "d-range", value_delimiter = ',', num_args = 2)]
    d_range: Option<Vec<u64>>,
    /// Print a T,e_of_T table for --kind and --N over these gaps, in steps.
    #[arg(long = "T-grid", value_delimiter = ',')]
    t_grid: Option<Vec<u64>>,
    /// window or exp, for the recency table.
    #[arg(long, default_value = "window")]
    kind: String,
    /// Recency scale N, in steps, for the recency table.
    #[arg(long = "N")]
    scale: Option<usize>,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(subcommand)]
    target: FitTarget,
}

#[derive(Subcommand, Debug)]
enum FitTarget {
    /// Tail exponent from a d,count CSV (extra columns ignored).
    PowerLaw {
        /// CSV with degree in column 1 and count in column 2.
        #[arg(long = "in")]
        input: PathBuf,
        /// Smallest degree in the tail (>= 2).
        #[arg(long = "d-min", default_value_t = 4)]
        d_min: u64,
    },
    /// Decay scale from a T,e_of_T CSV (extra columns ignored).
    Decay {
        /// CSV with gap T in column 1 and e(T) in column 2.
        #[arg(long = "in")]
        input: PathBuf,
        /// Largest gap used, in steps; defaults to the last row.
        #[arg(long = "t-max")]
        t_max: Option<u64>,
    },
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// JSON or .toml config file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Final number of vertices per replica.
    #[arg(long)]
    n: Option<usize>,
    /// Edges added per new vertex.
    #[arg(long)]
    m: Option<usize>,
    /// Recency scale N, in steps.
    #[arg(long = "N")]
    scale: Option<usize>,
    /// Pareto tail exponent (> 1).
    #[arg(long)]
    gamma: Option<f64>,
    /// Pareto lower bound (> 0).
    #[arg(long)]
    a: Option<f64>,
    /// window, exp, general:<a1a2a3>:<tau> or agepower:<exponent>.
    #[arg(long)]
    kind: Option<String>,
    /// Master seed; replica k uses stream k.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of replicas.
    #[arg(long)]
    replicas: Option<u64>,
    /// Comma-separated ascending gaps T, in steps.
    #[arg(long = "T-grid", value_delimiter = ',')]
    t_grid: Option<Vec<u64>>,
    /// Degree range lo,hi compared with theory.
    #[arg(long = "d-range", value_delimiter = ',', num_args = 2)]
    d_range: Option<Vec<u64>>,
    /// Degree counted in the histogram: in or total.
    #[arg(long = "d-mode")]
    d_mode: Option<String>,
    /// Lower cutoff for the tail fit.
    #[arg(long = "d-min")]
    d_min: Option<u64>,
    /// Record Q(t) and report its deviation from N times the mean quality.
    #[arg(long)]
    trace: bool,
    /// Directory for report.json, degree_table.csv and recency_table.csv; without it the report goes to stdout.
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// Worker threads; defaults to the number of processors, 1 runs sequentially.
    #[arg(long)]
    parallelism: Option<usize>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Six significant digits, for human-readable output.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-5..6).contains(&mag) {
        format!("{:.*}", (5 - mag).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

fn build_params(
    n: usize,
    m: usize,
    scale: usize,
    gamma: f64,
    a: f64,
    kind: &str,
    seed: u64,
) -> recnet::Result<ModelParams> {
    let kind = AttractivenessKind::parse(kind, scale)?;
    ModelParams::new(n, m, kind, ParetoParams::new(gamma, a)?, SeedSpec::new(seed, 0))
}

/// Prefixes I/O errors with the path involved.
fn with_path<T>(path: &Path, result: recnet::Result<T>) -> recnet::Result<T> {
    result.map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_generate(args: GenerateArgs) -> recnet::Result<()> {
    let params = build_params(args.n, args.m, args.scale, args.gamma, args.a, &args.kind, args.seed)?
        .with_trace(args.trace);
    let start = Instant::now();
    let graph = generate(&params)?;
    let elapsed = start.elapsed();

    let edges_path = with_suffix(&args.out, ".edges");
    write_edge_list(&graph, File::create(&edges_path)?)?;
    if let Some(q) = &graph.qualities {
        write_qualities(q, File::create(with_suffix(&args.out, ".qualities"))?)?;
    }
    if args.trace {
        write_trace(&graph, File::create(with_suffix(&args.out, ".trace.csv"))?)?;
    }
    println!(
        "{} edges, {} vertices -> {} ({} s)",
        graph.edges.len(),
        graph.n(),
        edges_path.display(),
        sig6(elapsed.as_secs_f64())
    );
    Ok(())
}

fn default_grid(scale: u64) -> Vec<u64> {
    let mut grid = vec![0, scale / 4, scale / 2, 3 * scale / 4, scale, 2 * scale];
    grid.dedup();
    grid
}

fn cmd_stats(args: StatsArgs) -> recnet::Result<()> {
    let mode: DegreeMode = args.d_mode.parse()?;
    let graph = with_path(&args.input, ingest_edge_list(&args.input, args.qualities.as_deref()))?;
    let grid = args
        .t_grid
        .unwrap_or_else(|| default_grid(graph.params.recency_scale as u64));
    let hist = degree_histogram(&graph, mode);
    let curve = recency_curve(&graph, &grid)?;
    let d_min = args.d_min.unwrap_or_else(|| default_d_min(graph.params.m));
    let fit = fit_power_law(&hist, d_min);

    fs::create_dir_all(&args.out_dir)?;
    hist.write_csv(File::create(args.out_dir.join("degree_table.csv"))?)?;
    curve.write_csv(File::create(args.out_dir.join("recency_table.csv"))?)?;
    let summary = json!({
        "n": graph.n(),
        "edges": graph.edges.len(),
        "degree_mode": mode,
        "histogram_total": hist.total(),
        "recency": curve.points.iter().map(|&(t, e)| json!({"T": t, "e_of_T": e})).collect::<Vec<_>>(),
        "power_law": fit.as_ref().ok(),
        "power_law_error": fit.as_ref().err().map(|e| e.to_string()),
    });
    let mut out = File::create(args.out_dir.join("summary.json"))?;
    serde_json::to_writer_pretty(&mut out, &summary)?;
    writeln!(out)?;

    println!("n {} edges {}", graph.n(), graph.edges.len());
    for &(t, e) in &curve.points {
        println!("e({t}) = {}", sig6(e));
    }
    match fit {
        Ok(f) => println!("tail exponent (d >= {}) {}", f.d_min, sig6(f.exponent_mle)),
        Err(e) => println!("tail exponent unavailable: {e}"),
    }
    Ok(())
}

fn cmd_theory(args: TheoryArgs) -> recnet::Result<()> {
    let mut printed = false;
    if args.d.is_some() || args.d_range.is_some() {
        let gamma = args.gamma.ok_or_else(|| usage("--gamma is required for the degree density"))?;
        let m = args.m.ok_or_else(|| usage("--m is required for the degree density"))?;
        ParetoParams::new(gamma, 1.0)?;
        if m < 1 {
            return Err(usage("--m must be >= 1"));
        }
        if let Some(d) = args.d {
            println!("{}", sig6(predicted_degree_density(d, m, gamma)));
        }
        if let Some(range) = &args.d_range {
            let (lo, hi) = (range[0], range[1]);
            if lo > hi {
                return Err(usage("--d-range needs lo <= hi"));
            }
            println!("d,density");
            for d in lo..=hi {
                println!("{d},{}", sig6(predicted_degree_density(d as f64, m, gamma)));
            }
        }
        printed = true;
    }
    if let Some(grid) = &args.t_grid {
        let scale = args.scale.ok_or_else(|| usage("--N is required for the recency curve"))?;
        let kind = AttractivenessKind::parse(&args.kind, scale)?;
        println!("T,e_of_T");
        for &t in grid {
            println!("{t},{}", sig6(predicted_e_of_t(&kind, t, scale)?));
        }
        printed = true;
    }
    if !printed {
        return Err(usage("nothing to print: give --d, --d-range or --T-grid"));
    }
    Ok(())
}

/// First two numeric columns of a CSV with their 1-based line numbers; a
/// non-numeric first line is a header.
fn read_two_columns(path: &Path) -> recnet::Result<Vec<(usize, f64, f64)>> {
    let reader = BufReader::new(with_path(path, File::open(path).map_err(Error::from))?);
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let parsed = match (cols.next(), cols.next()) {
            (Some(x), Some(y)) => x.parse::<f64>().ok().zip(y.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some((x, y)) => rows.push((i + 1, x, y)),
            None if i == 0 => continue,
            None => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    reason: format!("expected two numeric columns, got `{line}`"),
                })
            }
        }
    }
    Ok(rows)
}

fn tagged(kind: &str, value: Value) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("type".into(), json!(kind));
    if let Value::Object(fields) = value {
        obj.extend(fields);
    }
    Value::Object(obj)
}

fn cmd_fit(args: FitArgs) -> recnet::Result<()> {
    let out = match args.target {
        FitTarget::PowerLaw { input, d_min } => {
            let rows = read_two_columns(&input)?;
            let mut counts = std::collections::BTreeMap::new();
            for &(line, d, c) in &rows {
                if d < 0.0 || c < 0.0 || d.fract() != 0.0 || c.fract() != 0.0 {
                    return Err(Error::Parse {
                        path: input.clone(),
                        line,
                        reason: format!("degree and count must be non-negative integers, got {d},{c}"),
                    });
                }
                *counts.entry(d as u64).or_insert(0) += c as u64;
            }
            let n = counts.values().sum::<u64>() as usize;
            let hist = DegreeHistogram {
                counts,
                n,
                mode: DegreeMode::In,
            };
            tagged("power_law", serde_json::to_value(fit_power_law(&hist, d_min)?)?)
        }
        FitTarget::Decay { input, t_max } => {
            let rows = read_two_columns(&input)?;
            let curve = RecencyCurve {
                points: rows.iter().map(|&(_, t, e)| (t as u64, e)).collect(),
            };
            let t_max = t_max.or_else(|| curve.points.last().map(|p| p.0)).unwrap_or(0);
            tagged("decay", serde_json::to_value(fit_exponential_decay(&curve, t_max)?)?)
        }
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn experiment_config(args: &ExperimentArgs) -> recnet::Result<ExperimentConfig> {
    let base = match &args.config {
        Some(path) => Some(with_path(path, ExperimentConfig::from_path(path))?),
        None => None,
    };
    let p = base.as_ref().map(|c| &c.params);
    let need = |flag: &str| usage(format!("--{flag} is required without --config"));
    let n = args.n.or(p.map(|p| p.n)).ok_or_else(|| need("n"))?;
    let m = args.m.or(p.map(|p| p.m)).ok_or_else(|| need("m"))?;
    let scale = args.scale.or(p.map(|p| p.recency_scale)).ok_or_else(|| need("N"))?;
    let gamma = args.gamma.or(p.map(|p| p.pareto.gamma())).ok_or_else(|| need("gamma"))?;
    let a = args.a.or(p.map(|p| p.pareto.a())).unwrap_or(1.0);
    let kind = args
        .kind
        .clone()
        .or(p.map(|p| p.kind.label()))
        .unwrap_or_else(|| "window".into());
    let seed = args.seed.or(p.map(|p| p.seed.master_seed)).unwrap_or(0);
    let trace = args.trace || p.is_some_and(|p| p.record_weight_trace);
    let params = build_params(n, m, scale, gamma, a, &kind, seed)?.with_trace(trace);

    let mut config = match base {
        Some(mut c) => {
            c.params = params;
            c
        }
        None => ExperimentConfig::new(params, 10, default_grid(scale as u64), (1, 20)),
    };
    if let Some(r) = args.replicas {
        config.replicas = r;
    }
    if let Some(grid) = &args.t_grid {
        config.t_grid = grid.clone();
    }
    if let Some(range) = &args.d_range {
        config.d_range = (range[0], range[1]);
    }
    if let Some(mode) = &args.d_mode {
        config.degree_mode = mode.parse()?;
    }
    if args.d_min.is_some() {
        config.fit_d_min = args.d_min;
    }
    if args.out_dir.is_some() {
        config.output_dir = args.out_dir.clone();
    }
    if args.parallelism.is_some() {
        config.parallelism = args.parallelism;
    }
    config.validate()?;
    Ok(config)
}

fn cmd_experiment(args: ExperimentArgs) -> recnet::Result<()> {
    let config = experiment_config(&args)?;
    let start = Instant::now();
    let report = run_ensemble(&config)?;
    let elapsed = start.elapsed();
    match &config.output_dir {
        Some(dir) => {
            write_report(&report, dir)?;
            let table = compare_to_theory(&report);
            println!(
                "{} replicas of n={} in {} s -> {}",
                config.replicas,
                config.params.n,
                sig6(elapsed.as_secs_f64()),
                dir.display()
            );
            match table.max_rel_error {
                Some(err) => println!(
                    "largest relative degree error (unflagged) {}, flagged rows {}",
                    sig6(err),
                    table.flagged_rows
                ),
                None if !table.degrees.is_empty() => {
                    println!("all {} degree rows flagged outside the validity range", table.flagged_rows)
                }
                None => {}
            }
            if let Some(fit) = &report.fits.power_law {
                println!("tail exponent (d >= {}) {}", fit.d_min, sig6(fit.exponent_mle));
            }
            if let Some(fit) = &report.fits.decay {
                println!("decay scale {}", sig6(fit.scale_estimate));
            }
        }
        None => println!("{}", report_json(&report)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Theory(a) => cmd_theory(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("recnet: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
