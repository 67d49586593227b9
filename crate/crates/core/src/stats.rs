//! Empirical statistics over a finished graph.
//!
//! Everything here is a pure function of the graph. Multi-edges count with
//! multiplicity.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::attractiveness::AttractivenessKind;
use crate::error::{Error, Result};
use crate::generator::{GrownGraph, WeightTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeMode {
    /// In-degree plus out-degree.
    Total,
    #[default]
    In,
}

impl std::str::FromStr for DegreeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" | "total-degree" => Ok(DegreeMode::Total),
            "in" | "in-degree" => Ok(DegreeMode::In),
            _ => Err(Error::invalid("degree mode", format!("`{s}` is neither `total` nor `in`"))),
        }
    }
}

/// `N_n(d)` (or `N_n^in(d)`) for every degree present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeHistogram {
    pub counts: BTreeMap<u64, u64>,
    pub n: usize,
    pub mode: DegreeMode,
}

impl DegreeHistogram {
    pub fn from_degrees(degrees: &[u64], mode: DegreeMode) -> Self {
        let mut counts = BTreeMap::new();
        for &d in degrees {
            *counts.entry(d).or_insert(0) += 1;
        }
        Self {
            counts,
            n: degrees.len(),
            mode,
        }
    }

    pub fn count(&self, d: u64) -> u64 {
        self.counts.get(&d).copied().unwrap_or(0)
    }

    /// `N_n(d) / n`.
    pub fn fraction(&self, d: u64) -> f64 {
        self.count(d) as f64 / self.n as f64
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Adds another histogram's counts into this one (pooled ensembles).
    pub fn merge(&mut self, other: &DegreeHistogram) {
        for (&d, &c) in &other.counts {
            *self.counts.entry(d).or_insert(0) += c;
        }
        self.n += other.n;
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "d,count")?;
        for (d, c) in &self.counts {
            writeln!(out, "{d},{c}")?;
        }
        Ok(())
    }
}

pub fn degree_histogram(graph: &GrownGraph, mode: DegreeMode) -> DegreeHistogram {
    let degrees = match mode {
        DegreeMode::Total => graph.total_degrees(),
        DegreeMode::In => graph.in_degrees(),
    };
    DegreeHistogram::from_degrees(&degrees, mode)
}

/// Sampled `e(T)` values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RecencyCurve {
    pub points: Vec<(u64, f64)>,
}

impl RecencyCurve {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "T,e_of_T")?;
        for (t, e) in &self.points {
            writeln!(out, "{t},{e}")?;
        }
        Ok(())
    }

    pub fn value_at(&self, t: u64) -> Option<f64> {
        self.points.iter().find(|(x, _)| *x == t).map(|(_, v)| *v)
    }
}

/// Fraction of edges whose endpoints differ by more than `t`.
/// Zero for an edgeless graph.
pub fn e_of_t(graph: &GrownGraph, t: u64) -> f64 {
    if graph.edges.is_empty() {
        return 0.0;
    }
    let long = graph.edges.iter().filter(|e| u64::from(e.gap()) > t).count();
    long as f64 / graph.edges.len() as f64
}

/// `e(T)` at every grid point. The grid must be sorted ascending.
pub fn recency_curve(graph: &GrownGraph, grid: &[u64]) -> Result<RecencyCurve> {
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("T grid", "must be sorted ascending"));
    }
    if graph.edges.is_empty() {
        return Ok(RecencyCurve {
            points: grid.iter().map(|&t| (t, 0.0)).collect(),
        });
    }
    // gap_counts[g] = number of edges with gap exactly g; gaps are < n.
    let mut gap_counts = vec![0u64; graph.n() + 1];
    for e in &graph.edges {
        gap_counts[e.gap() as usize] += 1;
    }
    // longer_than[g] = edges with gap > g
    let mut longer_than = vec![0u64; gap_counts.len()];
    let mut acc = 0;
    for g in (0..gap_counts.len()).rev() {
        longer_than[g] = acc;
        acc += gap_counts[g];
    }
    let total = graph.edges.len() as f64;
    let points = grid
        .iter()
        .map(|&t| {
            let c = longer_than.get(t as usize).copied().unwrap_or(0);
            (t, c as f64 / total)
        })
        .collect();
    Ok(RecencyCurve { points })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightDeviation {
    pub max_abs_dev: f64,
    pub max_rel_dev: f64,
}

/// Largest deviation of `Q(t)` from `N·E[ζ]` over steps `t ≥ warmup`.
pub fn weight_deviation(
    trace: &WeightTrace,
    scale: usize,
    mean_quality: f64,
    warmup: usize,
) -> Result<WeightDeviation> {
    let reference = scale as f64 * mean_quality;
    let max_abs_dev = trace
        .iter()
        .filter(|&(t, _)| t >= warmup)
        .map(|(_, q)| (q - reference).abs())
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))))
        .ok_or_else(|| Error::invalid("warmup", format!("no trace entries at or after step {warmup}")))?;
    Ok(WeightDeviation {
        max_abs_dev,
        max_rel_dev: max_abs_dev / reference,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityBin {
    pub q_low: f64,
    pub q_high: f64,
    /// Absent when no eligible vertex falls in the bin.
    pub mean_in_degree: Option<f64>,
    pub count: u64,
}

/// Empirical analogue of the in-degree-given-quality law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalDegreeEstimate {
    pub quality_bins: Vec<QualityBin>,
}

/// Bin edges `a, a·f, a·f², …` with the last edge at infinity, giving
/// `count` bins covering `[a, ∞)`.
pub fn log_bin_edges(a: f64, factor: f64, count: usize) -> Vec<f64> {
    assert!(factor > 1.0 && count >= 1);
    let mut edges: Vec<f64> = (0..count).map(|k| a * factor.powi(k as i32)).collect();
    edges.push(f64::INFINITY);
    edges
}

/// Mean death-time in-degree per quality bin, over vertices
/// `N ≤ p ≤ n−N+1` of a window-mode graph. `bin_edges` are ascending; bin
/// `k` is `[edges[k], edges[k+1])`.
pub fn indegree_by_quality(graph: &GrownGraph, bin_edges: &[f64]) -> Result<ConditionalDegreeEstimate> {
    let scale = match graph.params.kind {
        AttractivenessKind::Window { scale } => scale,
        other => {
            return Err(Error::WrongKind {
                required: "window",
                actual: other.label(),
            })
        }
    };
    let qualities = graph
        .qualities
        .as_ref()
        .ok_or_else(|| Error::invalid("qualities", "graph was loaded without qualities"))?;
    if bin_edges.len() < 2 || bin_edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("bin edges", "need at least two strictly ascending edges"));
    }
    if bin_edges[0] < graph.params.pareto.a() {
        return Err(Error::invalid("bin edges", "first edge lies below the minimum quality a"));
    }

    let indeg = graph.in_degrees();
    let bins = bin_edges.len() - 1;
    let mut sums = vec![0u64; bins];
    let mut counts = vec![0u64; bins];
    let n = graph.n();
    let hi = (n + 1).saturating_sub(scale);
    for p in scale.max(1)..=hi {
        let q = qualities[p - 1];
        // partition_point gives the first edge > q
        let k = bin_edges.partition_point(|&e| e <= q);
        if k == 0 || k > bins {
            continue;
        }
        sums[k - 1] += indeg[p - 1];
        counts[k - 1] += 1;
    }
    let quality_bins = (0..bins)
        .map(|k| QualityBin {
            q_low: bin_edges[k],
            q_high: bin_edges[k + 1],
            mean_in_degree: (counts[k] > 0).then(|| sums[k] as f64 / counts[k] as f64),
            count: counts[k],
        })
        .collect();
    Ok(ConditionalDegreeEstimate { quality_bins })
}
