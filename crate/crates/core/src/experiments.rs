//! Replica ensembles: generate `R` independent graphs, reduce each to its
//! statistics, aggregate, and compare against the closed forms.
//!
//! Replicas run in parallel (see [`crate::parallel`]); aggregation is a
//! single sequential pass in stream order, so a config always produces the
//! same report bytes.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{default_d_min, fit_exponential_decay, fit_power_law, DecayFit, PowerLawFit};
use crate::generator::{generate, ModelParams};
use crate::parallel::{map_indexed, Execution};
use crate::stats::{degree_histogram, recency_curve, weight_deviation, DegreeHistogram, DegreeMode, RecencyCurve};
use crate::theory::TheoryPrediction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Model parameters; `params.seed.master_seed` is the ensemble seed.
    pub params: ModelParams,
    pub replicas: u64,
    #[serde(rename = "T_grid")]
    pub t_grid: Vec<u64>,
    pub d_range: (u64, u64),
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; `None` uses every available processor.
    #[serde(default)]
    pub parallelism: Option<usize>,
    /// Histogram compared against the density formula.
    #[serde(default)]
    pub degree_mode: DegreeMode,
    #[serde(default)]
    pub fit_d_min: Option<u64>,
    #[serde(default)]
    pub decay_fit_t_max: Option<u64>,
    /// First step of the weight-trace check; defaults to `⌈N·ln N⌉`.
    #[serde(default)]
    pub warmup: Option<usize>,
    /// Moment order for `1 < γ ≤ 2`.
    #[serde(default)]
    pub alpha: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(params: ModelParams, replicas: u64, t_grid: Vec<u64>, d_range: (u64, u64)) -> Self {
        Self {
            params,
            replicas,
            t_grid,
            d_range,
            output_dir: None,
            parallelism: None,
            degree_mode: DegreeMode::In,
            fit_d_min: None,
            decay_fit_t_max: None,
            warmup: None,
            alpha: None,
        }
    }

    /// Loads a `.toml` or JSON config file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let config: ExperimentConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.replicas < 1 {
            return Err(Error::invalid("replicas", "must be >= 1"));
        }
        let (lo, hi) = self.d_range;
        if lo < 1 || lo > hi {
            return Err(Error::invalid("d_range", format!("need 1 <= d_lo <= d_hi, got ({lo}, {hi})")));
        }
        if self.t_grid.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("T_grid", "must be sorted ascending"));
        }
        Ok(())
    }

    pub fn warmup_steps(&self) -> usize {
        self.warmup.unwrap_or_else(|| {
            let s = self.params.recency_scale as f64;
            (s * s.ln()).ceil() as usize
        })
    }
}

/// Everything the report needs from one replica; the graph itself is
/// dropped once this is computed.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicaSummary {
    pub stream_id: u64,
    pub n: usize,
    /// Histogram in the config's degree mode.
    pub degrees: DegreeHistogram,
    /// Total-degree histogram, used for the concentration check.
    pub total_degrees: DegreeHistogram,
    pub recency: RecencyCurve,
    pub weight_dev: Option<(f64, f64)>,
}

pub fn summarize_replica(config: &ExperimentConfig, stream_id: u64) -> Result<ReplicaSummary> {
    let params = config
        .params
        .clone()
        .with_seed(config.params.seed.with_stream(stream_id));
    let graph = generate(&params)?;
    let weight_dev = match &graph.weight_trace {
        Some(trace) => {
            let d = weight_deviation(
                trace,
                params.recency_scale,
                params.pareto.mean(),
                config.warmup_steps(),
            )?;
            Some((d.max_abs_dev, d.max_rel_dev))
        }
        None => None,
    };
    Ok(ReplicaSummary {
        stream_id,
        n: graph.n(),
        degrees: degree_histogram(&graph, config.degree_mode),
        total_degrees: degree_histogram(&graph, DegreeMode::Total),
        recency: recency_curve(&graph, &config.t_grid)?,
        weight_dev,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeRow {
    pub d: u64,
    /// Ensemble mean of `N_n(d)/n`.
    pub mean: f64,
    pub stddev: f64,
    pub theory: Option<f64>,
    pub rel_error: Option<f64>,
    pub in_validity: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecencyRow {
    #[serde(rename = "T")]
    pub t: u64,
    pub mean: f64,
    pub stddev: f64,
    pub theory: Option<f64>,
    pub abs_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub d: u64,
    pub ensemble_mean: f64,
    pub radius: f64,
    pub prob_bound: f64,
    /// Fraction of replicas with `|N_n(d) − mean| ≤ radius`.
    pub fraction_within: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightTraceSummary {
    pub warmup: usize,
    /// `N·E[ζ]`.
    pub reference: f64,
    pub max_abs_dev: Vec<f64>,
    pub max_rel_dev: Vec<f64>,
}

impl WeightTraceSummary {
    pub fn replicas_within(&self, rel_tol: f64) -> usize {
        self.max_rel_dev.iter().filter(|&&d| d <= rel_tol).count()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    /// Fit over the pooled ensemble histogram.
    pub power_law: Option<PowerLawFit>,
    pub power_law_error: Option<String>,
    /// Fit over the ensemble-mean recency curve.
    pub decay: Option<DecayFit>,
    pub decay_error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRow {
    pub stream_id: u64,
    pub master_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub degrees: Vec<DegreeRow>,
    pub recency: Vec<RecencyRow>,
    pub concentration: Vec<ConcentrationRow>,
    pub weight_trace: Option<WeightTraceSummary>,
    pub fits: Fits,
    pub seeds: Vec<SeedRow>,
    /// `None` for exploratory kinds.
    pub theory: Option<TheoryPrediction>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Generates every replica and aggregates them.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let exec = Execution::from_parallelism(config.parallelism);
    let results = map_indexed(config.replicas, exec, |id| summarize_replica(config, id));
    let mut summaries = Vec::with_capacity(results.len());
    for (id, r) in results.into_iter().enumerate() {
        summaries.push(r.map_err(|e| Error::Replica {
            stream_id: id as u64,
            source: Box::new(e),
        })?);
    }
    let report = aggregate(config, summaries)?;
    if let Some(dir) = &config.output_dir {
        write_report(&report, dir)?;
    }
    Ok(report)
}

/// Reduces replica summaries (in any order) to a report. Summaries are
/// processed in stream order.
pub fn aggregate(config: &ExperimentConfig, mut summaries: Vec<ReplicaSummary>) -> Result<ExperimentReport> {
    if summaries.is_empty() {
        return Err(Error::invalid("replicas", "nothing to aggregate"));
    }
    summaries.sort_by_key(|s| s.stream_id);
    let params = &config.params;
    let theory = if params.kind.is_exploratory() {
        None
    } else {
        Some(TheoryPrediction::new(
            &params.kind,
            params.n,
            params.m,
            params.pareto.gamma(),
            config.alpha,
        )?)
    };

    let (lo, hi) = config.d_range;
    let degrees = (lo..=hi)
        .map(|d| {
            let fractions: Vec<f64> = summaries.iter().map(|s| s.degrees.fraction(d)).collect();
            let (mean, stddev) = mean_std(&fractions);
            let th = theory.as_ref().map(|t| t.density(d as f64));
            DegreeRow {
                d,
                mean,
                stddev,
                theory: th,
                rel_error: th.map(|t| (mean - t).abs() / t),
                in_validity: theory.as_ref().map(|t| t.in_validity_range(d as f64)),
            }
        })
        .collect();

    let recency: Vec<RecencyRow> = config
        .t_grid
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let values: Vec<f64> = summaries.iter().map(|s| s.recency.points[k].1).collect();
            let (mean, stddev) = mean_std(&values);
            let th = theory.as_ref().map(|p| p.e_of_t(t));
            RecencyRow {
                t,
                mean,
                stddev,
                theory: th,
                abs_error: th.map(|p| (mean - p).abs()),
            }
        })
        .collect();

    let (radius, prob_bound) = crate::theory::concentration_bound(params.n.max(3), params.recency_scale);
    let concentration = (1..=hi)
        .map(|d| {
            let counts: Vec<f64> = summaries.iter().map(|s| s.total_degrees.count(d) as f64).collect();
            let (ensemble_mean, _) = mean_std(&counts);
            let within = counts.iter().filter(|&&c| (c - ensemble_mean).abs() <= radius).count();
            ConcentrationRow {
                d,
                ensemble_mean,
                radius,
                prob_bound,
                fraction_within: within as f64 / counts.len() as f64,
            }
        })
        .collect();

    let weight_trace = if summaries.iter().all(|s| s.weight_dev.is_some()) {
        Some(WeightTraceSummary {
            warmup: config.warmup_steps(),
            reference: params.recency_scale as f64 * params.pareto.mean(),
            max_abs_dev: summaries.iter().map(|s| s.weight_dev.unwrap().0).collect(),
            max_rel_dev: summaries.iter().map(|s| s.weight_dev.unwrap().1).collect(),
        })
    } else {
        None
    };

    let mut fits = Fits::default();
    let mut pooled = summaries[0].degrees.clone();
    for s in &summaries[1..] {
        pooled.merge(&s.degrees);
    }
    match fit_power_law(&pooled, config.fit_d_min.unwrap_or_else(|| default_d_min(params.m))) {
        Ok(f) => fits.power_law = Some(f),
        Err(e) => fits.power_law_error = Some(e.to_string()),
    }
    let mean_curve = RecencyCurve {
        points: recency.iter().map(|r| (r.t, r.mean)).collect(),
    };
    let t_max = config
        .decay_fit_t_max
        .or_else(|| config.t_grid.last().copied())
        .unwrap_or(0);
    match fit_exponential_decay(&mean_curve, t_max) {
        Ok(f) => fits.decay = Some(f),
        Err(e) => fits.decay_error = Some(e.to_string()),
    }

    let seeds = summaries
        .iter()
        .map(|s| SeedRow {
            stream_id: s.stream_id,
            master_seed: params.seed.master_seed,
        })
        .collect();

    Ok(ExperimentReport {
        config: config.clone(),
        degrees,
        recency,
        concentration,
        weight_trace,
        fits,
        seeds,
        theory,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeComparison {
    pub d: u64,
    pub empirical: f64,
    pub theory: f64,
    pub rel_error: f64,
    /// Outside the validity range; excluded from summaries.
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecencyComparison {
    #[serde(rename = "T")]
    pub t: u64,
    pub empirical: f64,
    pub theory: f64,
    pub abs_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub degrees: Vec<DegreeComparison>,
    pub recency: Vec<RecencyComparison>,
    pub flagged_rows: usize,
    /// Over unflagged degree rows; `None` when every row is flagged.
    pub max_rel_error: Option<f64>,
    pub max_abs_recency_error: Option<f64>,
}

impl ComparisonTable {
    /// True when every unflagged degree row is within `rel_tol` and every
    /// recency row within `abs_tol`.
    pub fn passes(&self, rel_tol: f64, abs_tol: f64) -> bool {
        self.max_rel_error.is_none_or(|e| e <= rel_tol) && self.max_abs_recency_error.is_none_or(|e| e <= abs_tol)
    }
}

pub fn compare_to_theory(report: &ExperimentReport) -> ComparisonTable {
    let degrees: Vec<DegreeComparison> = report
        .degrees
        .iter()
        .filter_map(|r| {
            Some(DegreeComparison {
                d: r.d,
                empirical: r.mean,
                theory: r.theory?,
                rel_error: r.rel_error?,
                flagged: !r.in_validity?,
            })
        })
        .collect();
    let recency: Vec<RecencyComparison> = report
        .recency
        .iter()
        .filter_map(|r| {
            Some(RecencyComparison {
                t: r.t,
                empirical: r.mean,
                theory: r.theory?,
                abs_error: r.abs_error?,
            })
        })
        .collect();
    let max = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))));
    ComparisonTable {
        flagged_rows: degrees.iter().filter(|r| r.flagged).count(),
        max_rel_error: max(&mut degrees.iter().filter(|r| !r.flagged).map(|r| r.rel_error)),
        max_abs_recency_error: max(&mut recency.iter().map(|r| r.abs_error)),
        degrees,
        recency,
    }
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `report.json`, `degree_table.csv` and `recency_table.csv` into
/// `dir`, creating it when needed.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut json = BufWriter::new(File::create(dir.join("report.json"))?);
    serde_json::to_writer_pretty(&mut json, report)?;
    writeln!(json)?;
    json.flush()?;

    let mut deg = BufWriter::new(File::create(dir.join("degree_table.csv"))?);
    writeln!(deg, "d,mean,stddev,theory,rel_error,in_validity")?;
    for r in &report.degrees {
        writeln!(
            deg,
            "{},{},{},{},{},{}",
            r.d,
            r.mean,
            r.stddev,
            opt(&r.theory),
            opt(&r.rel_error),
            opt(&r.in_validity)
        )?;
    }
    deg.flush()?;

    let mut rec = BufWriter::new(File::create(dir.join("recency_table.csv"))?);
    writeln!(rec, "T,mean,stddev,theory,abs_error")?;
    for r in &report.recency {
        writeln!(
            rec,
            "{},{},{},{},{}",
            r.t,
            r.mean,
            r.stddev,
            opt(&r.theory),
            opt(&r.abs_error)
        )?;
    }
    rec.flush()?;
    Ok(())
}

/// Serializes a report the way [`write_report`] does.
pub fn report_json(report: &ExperimentReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

/// Per-degree ensemble means as a map, handy for ad-hoc checks.
pub fn mean_fractions(report: &ExperimentReport) -> BTreeMap<u64, f64> {
    report.degrees.iter().map(|r| (r.d, r.mean)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attractiveness::AttractivenessKind;
    use crate::quality::{ParetoParams, SeedSpec};

    fn config(kind: &str, replicas: u64) -> ExperimentConfig {
        let params = ModelParams::new(
            3000,
            2,
            AttractivenessKind::parse(kind, 50).unwrap(),
            ParetoParams::new(2.5, 1.0).unwrap(),
            SeedSpec::new(17, 0),
        )
        .unwrap()
        .with_trace(true);
        let mut c = ExperimentConfig::new(params, replicas, vec![0, 10, 25, 50, 100], (1, 12));
        c.parallelism = Some(2);
        c
    }

    #[test]
    fn single_replica_has_zero_spread() {
        let cfg = config("exp", 1);
        let report = run_ensemble(&cfg).unwrap();
        let single = summarize_replica(&cfg, 0).unwrap();
        for row in &report.degrees {
            assert_eq!(row.stddev, 0.0);
            assert_eq!(row.mean, single.degrees.fraction(row.d));
        }
        for (k, row) in report.recency.iter().enumerate() {
            assert_eq!(row.stddev, 0.0);
            assert_eq!(row.mean, single.recency.points[k].1);
        }
        assert_eq!(report.seeds, vec![SeedRow { stream_id: 0, master_seed: 17 }]);
    }

    #[test]
    fn same_config_same_bytes() {
        let cfg = config("window", 4);
        let a = report_json(&run_ensemble(&cfg).unwrap()).unwrap();
        let b = report_json(&run_ensemble(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
        let mut seq = cfg.clone();
        seq.parallelism = Some(1);
        let c = run_ensemble(&seq).unwrap();
        let mut d = run_ensemble(&cfg).unwrap();
        d.config.parallelism = Some(1);
        assert_eq!(c, d);
    }

    #[test]
    fn replica_order_does_not_matter() {
        let cfg = config("exp", 5);
        let forward: Vec<_> = (0..5).map(|i| summarize_replica(&cfg, i).unwrap()).collect();
        let backward: Vec<_> = (0..5).rev().map(|i| summarize_replica(&cfg, i).unwrap()).collect();
        let a = aggregate(&cfg, forward.clone()).unwrap();
        let b = aggregate(&cfg, backward).unwrap();
        assert_eq!(a, b);
        // Mean equals the mean of per-replica values.
        for row in &a.degrees {
            let direct = forward.iter().map(|s| s.degrees.fraction(row.d)).sum::<f64>() / 5.0;
            assert_eq!(row.mean, direct);
        }
    }

    #[test]
    fn report_fields_are_consistent() {
        let cfg = config("window", 3);
        let report = run_ensemble(&cfg).unwrap();
        assert_eq!(report.degrees.len(), 12);
        assert_eq!(report.concentration.len(), 12);
        assert!(report.concentration.iter().all(|c| (0.0..=1.0).contains(&c.fraction_within)));
        assert_eq!(report.weight_trace.as_ref().unwrap().max_rel_dev.len(), 3);
        assert_eq!(report.recency[0].mean, 1.0);
        assert_eq!(report.recency[3].mean, 0.0);
        assert!(report.theory.is_some());
        let json: serde_json::Value = serde_json::from_str(&report_json(&report).unwrap()).unwrap();
        for key in ["config", "degrees", "recency", "concentration", "weight_trace", "fits", "seeds"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn comparison_flags_rows_outside_validity() {
        let cfg = config("window", 2);
        let report = run_ensemble(&cfg).unwrap();
        let table = compare_to_theory(&report);
        let vmax = report.theory.as_ref().unwrap().d_validity_max;
        for row in &table.degrees {
            assert_eq!(row.flagged, row.d as f64 > vmax);
        }
        assert_eq!(table.flagged_rows, table.degrees.iter().filter(|r| r.flagged).count());
    }

    #[test]
    fn perfect_agreement_has_zero_error() {
        let cfg = config("window", 1);
        let mut report = run_ensemble(&cfg).unwrap();
        for row in &mut report.degrees {
            row.mean = row.theory.unwrap();
            row.rel_error = Some(0.0);
        }
        let table = compare_to_theory(&report);
        assert!(table.degrees.iter().all(|r| r.rel_error == 0.0));
    }

    #[test]
    fn exploratory_kind_has_no_theory_columns() {
        let mut cfg = config("general:101:40", 2);
        cfg.params.record_weight_trace = false;
        let report = run_ensemble(&cfg).unwrap();
        assert!(report.theory.is_none());
        assert!(report.degrees.iter().all(|r| r.theory.is_none()));
        assert!(report.weight_trace.is_none());
        assert!(compare_to_theory(&report).degrees.is_empty());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = config("exp", 0);
        assert!(run_ensemble(&cfg).is_err());
        cfg.replicas = 1;
        cfg.d_range = (0, 4);
        assert!(run_ensemble(&cfg).is_err());
        cfg.d_range = (5, 4);
        assert!(run_ensemble(&cfg).is_err());
        cfg.d_range = (1, 4);
        cfg.t_grid = vec![5, 1];
        assert!(run_ensemble(&cfg).is_err());
    }

    #[test]
    fn replica_failure_names_the_stream() {
        let mut cfg = config("exp", 2);
        cfg.warmup = Some(1_000_000);
        match run_ensemble(&cfg) {
            Err(Error::Replica { stream_id, .. }) => assert_eq!(stream_id, 0),
            other => panic!("expected replica error, got {other:?}"),
        }
    }
}
