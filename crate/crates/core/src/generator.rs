//! The growth process.
//!
//! A graph of size `n` starts from vertices 1 and 2 joined by the edge
//! `(2, 1)`. At each step `t = 2..n−1` vertex `t+1` arrives with a fresh
//! quality and sends `m` independent edges to vertices `1..=t`, each chosen
//! with probability `attr_t(i) / Σ_j attr_t(j)`. Multi-edges are kept.
//!
//! Random draws are consumed in a fixed order (one quality per vertex, then
//! `m` uniforms for that vertex's targets), so [`generate`] and the
//! linear-scan oracle [`generate_naive`] see identical streams.

use serde::{Deserialize, Serialize};

use crate::attractiveness::{attr_value, scan_sample, AttractivenessKind, WeightIndex};
use crate::error::{Error, Result};
use crate::quality::{derive_stream, pareto_sample, ParetoParams, RandomStream, SeedSpec};

/// 1-based vertex index.
pub type VertexId = u32;

/// Largest `n` accepted by [`generate_naive`].
pub const NAIVE_MAX_VERTICES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub source: VertexId,
    pub target: VertexId,
}

impl Edge {
    /// Index gap `source − target`, always ≥ 1.
    #[inline]
    pub fn gap(&self) -> u32 {
        self.source - self.target
    }
}

/// Full parameterization of one growth process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    pub n: usize,
    pub m: usize,
    /// Recency scale `N`.
    pub recency_scale: usize,
    pub pareto: ParetoParams,
    pub kind: AttractivenessKind,
    pub seed: SeedSpec,
    pub record_weight_trace: bool,
}

impl ModelParams {
    /// Builds and validates parameters for one of the kinds, taking `N` from
    /// the kind when it has one.
    pub fn new(
        n: usize,
        m: usize,
        kind: AttractivenessKind,
        pareto: ParetoParams,
        seed: SeedSpec,
    ) -> Result<Self> {
        let params = Self {
            n,
            m,
            recency_scale: kind.scale().unwrap_or(1),
            pareto,
            kind,
            seed,
            record_weight_trace: false,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_trace(mut self, record: bool) -> Self {
        self.record_weight_trace = record;
        self
    }

    pub fn with_seed(mut self, seed: SeedSpec) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::invalid("n", format!("must be >= 2, got {}", self.n)));
        }
        if self.n > VertexId::MAX as usize {
            return Err(Error::invalid("n", "exceeds the 32-bit vertex id range"));
        }
        if self.m < 1 {
            return Err(Error::invalid("m", "must be >= 1"));
        }
        if self.recency_scale < 1 {
            return Err(Error::invalid("N", "must be >= 1"));
        }
        self.kind.validate()?;
        if let Some(scale) = self.kind.scale() {
            if scale != self.recency_scale {
                return Err(Error::invalid(
                    "N",
                    format!("kind scale {scale} differs from N = {}", self.recency_scale),
                ));
            }
        }
        Ok(())
    }

    /// Number of edges every graph of these parameters has.
    pub fn edge_count(&self) -> usize {
        1 + self.m * (self.n - 2)
    }
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: usize,
    m: usize,
    #[serde(rename = "N")]
    recency_scale: usize,
    gamma: f64,
    a: f64,
    kind: String,
    seed: u64,
    #[serde(default)]
    stream_id: u64,
    #[serde(default)]
    record_weight_trace: bool,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        let params = ModelParams {
            n: raw.n,
            m: raw.m,
            recency_scale: raw.recency_scale,
            pareto: ParetoParams::new(raw.gamma, raw.a)?,
            kind: AttractivenessKind::parse(&raw.kind, raw.recency_scale)?,
            seed: SeedSpec::new(raw.seed, raw.stream_id),
            record_weight_trace: raw.record_weight_trace,
        };
        params.validate()?;
        Ok(params)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            n: p.n,
            m: p.m,
            recency_scale: p.recency_scale,
            gamma: p.pareto.gamma(),
            a: p.pareto.a(),
            kind: p.kind.label(),
            seed: p.seed.master_seed,
            stream_id: p.seed.stream_id,
            record_weight_trace: p.record_weight_trace,
        }
    }
}

/// `Q(t)` recorded after each step, starting at `first_step`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightTrace {
    pub first_step: usize,
    pub values: Vec<f64>,
}

impl WeightTrace {
    /// `(t, Q(t))` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(k, &q)| (self.first_step + k, q))
    }
}

/// A finished graph: qualities, edges in generation order, and optionally
/// the total-attractiveness trace.
#[derive(Clone, Debug, PartialEq)]
pub struct GrownGraph {
    pub params: ModelParams,
    /// `qualities[i]` is the quality of vertex `i+1`; `None` for ingested
    /// graphs without a qualities file.
    pub qualities: Option<Vec<f64>>,
    pub edges: Vec<Edge>,
    pub weight_trace: Option<WeightTrace>,
}

impl GrownGraph {
    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn in_degrees(&self) -> Vec<u64> {
        let mut d = vec![0u64; self.n()];
        for e in &self.edges {
            d[e.target as usize - 1] += 1;
        }
        d
    }

    pub fn out_degrees(&self) -> Vec<u64> {
        let mut d = vec![0u64; self.n()];
        for e in &self.edges {
            d[e.source as usize - 1] += 1;
        }
        d
    }

    /// In-degree plus out-degree, multi-edges counted with multiplicity.
    pub fn total_degrees(&self) -> Vec<u64> {
        let mut d = vec![0u64; self.n()];
        for e in &self.edges {
            d[e.source as usize - 1] += 1;
            d[e.target as usize - 1] += 1;
        }
        d
    }
}

struct Growth {
    stream: RandomStream,
    qualities: Vec<f64>,
    edges: Vec<Edge>,
    trace: Option<Vec<f64>>,
}

impl Growth {
    fn start(params: &ModelParams) -> Self {
        let mut stream = derive_stream(params.seed);
        let mut qualities = Vec::with_capacity(params.n);
        qualities.push(pareto_sample(&mut stream, &params.pareto));
        qualities.push(pareto_sample(&mut stream, &params.pareto));
        let mut edges = Vec::with_capacity(params.edge_count());
        edges.push(Edge { source: 2, target: 1 });
        Self {
            stream,
            qualities,
            edges,
            trace: params.record_weight_trace.then(|| Vec::with_capacity(params.n - 1)),
        }
    }

    fn finish(self, params: &ModelParams) -> GrownGraph {
        GrownGraph {
            params: params.clone(),
            qualities: Some(self.qualities),
            edges: self.edges,
            weight_trace: self.trace.map(|values| WeightTrace { first_step: 2, values }),
        }
    }
}

pub fn generate(params: &ModelParams) -> Result<GrownGraph> {
    params.validate()?;
    let m = params.m;
    let mut g = Growth::start(params);
    let mut index = WeightIndex::with_capacity(params.kind, params.n);
    // The initial edge gives vertices 1 and 2 degree 1 each.
    index.push_with_degree(g.qualities[0], 1);
    index.push_with_degree(g.qualities[1], 1);
    if let Some(trace) = g.trace.as_mut() {
        trace.push(index.total());
    }

    let uses_degree = params.kind.uses_degree();
    let mut targets = Vec::with_capacity(m);
    for t in 2..params.n {
        let q = pareto_sample(&mut g.stream, &params.pareto);
        g.qualities.push(q);
        targets.clear();
        for _ in 0..m {
            let u = g.stream.uniform();
            let target = index.sample(u).map_err(|_| Error::ZeroTotalWeight { step: t })?;
            debug_assert!(target >= 1 && target <= t);
            targets.push(target);
        }
        for &target in &targets {
            g.edges.push(Edge {
                source: (t + 1) as VertexId,
                target: target as VertexId,
            });
            if uses_degree {
                index.add_degree(target, 1);
            }
        }
        index.push_with_degree(q, m as u64);
        if let Some(trace) = g.trace.as_mut() {
            trace.push(index.total());
        }
    }
    Ok(g.finish(params))
}

/// Oracle generator: recomputes every weight from [`attr_value`] at each
/// step and samples by linear scan. `O(n²)`; limited to
/// [`NAIVE_MAX_VERTICES`].
pub fn generate_naive(params: &ModelParams) -> Result<GrownGraph> {
    params.validate()?;
    if params.n > NAIVE_MAX_VERTICES {
        return Err(Error::invalid(
            "n",
            format!("naive generator is capped at {NAIVE_MAX_VERTICES} vertices"),
        ));
    }
    let m = params.m;
    let mut g = Growth::start(params);
    let mut degrees: Vec<u64> = vec![1, 1];
    let weights_at = |qualities: &[f64], degrees: &[u64], t: usize| -> Vec<f64> {
        (1..=t)
            .map(|i| attr_value(&params.kind, qualities[i - 1], degrees[i - 1], i, t).unwrap())
            .collect()
    };
    if let Some(trace) = g.trace.as_mut() {
        trace.push(weights_at(&g.qualities, &degrees, 2).iter().sum());
    }

    let mut targets = Vec::with_capacity(m);
    for t in 2..params.n {
        let q = pareto_sample(&mut g.stream, &params.pareto);
        g.qualities.push(q);
        let weights = weights_at(&g.qualities, &degrees, t);
        targets.clear();
        for _ in 0..m {
            let u = g.stream.uniform();
            let target = scan_sample(&weights, u).ok_or(Error::ZeroTotalWeight { step: t })?;
            targets.push(target);
        }
        for &target in &targets {
            g.edges.push(Edge {
                source: (t + 1) as VertexId,
                target: target as VertexId,
            });
            degrees[target - 1] += 1;
        }
        degrees.push(m as u64);
        if let Some(trace) = g.trace.as_mut() {
            trace.push(weights_at(&g.qualities, &degrees, t + 1).iter().sum());
        }
    }
    Ok(g.finish(params))
}

/// In-degree of `p` once its window lifespan is over. Window mode only,
/// for `N ≤ p ≤ n−N+1`.
pub fn in_degree_at_death(graph: &GrownGraph, p: usize) -> Result<u64> {
    let n_scale = match graph.params.kind {
        AttractivenessKind::Window { scale } => scale,
        other => {
            return Err(Error::WrongKind {
                required: "window",
                actual: other.label(),
            })
        }
    };
    let n = graph.n();
    let hi = (n + 1).saturating_sub(n_scale);
    if p < n_scale || p > hi {
        return Err(Error::VertexOutOfRange {
            vertex: p,
            lo: n_scale,
            hi,
        });
    }
    let last = p + n_scale;
    Ok(graph
        .edges
        .iter()
        .filter(|e| e.target as usize == p && e.source as usize <= last)
        .count() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, m: usize, kind: &str, scale: usize, seed: u64) -> ModelParams {
        ModelParams::new(
            n,
            m,
            AttractivenessKind::parse(kind, scale).unwrap(),
            ParetoParams::new(2.5, 1.0).unwrap(),
            SeedSpec::new(seed, 0),
        )
        .unwrap()
    }

    #[test]
    fn base_graph() {
        for m in [1, 4] {
            let g = generate(&params(2, m, "window", 3, 1)).unwrap();
            assert_eq!(g.edges, vec![Edge { source: 2, target: 1 }]);
            assert_eq!(g.qualities.as_ref().unwrap().len(), 2);
            let g = generate_naive(&params(2, m, "exp", 3, 1)).unwrap();
            assert_eq!(g.edges, vec![Edge { source: 2, target: 1 }]);
        }
    }

    #[test]
    fn three_vertices_two_edges_each() {
        let g = generate(&params(3, 2, "exp", 5, 4)).unwrap();
        assert_eq!(g.edges.len(), 3);
        assert!(g.edges[1..].iter().all(|e| e.source == 3 && e.target <= 2));
    }

    #[test]
    fn five_vertices_outdegree_three() {
        let g = generate(&params(5, 3, "window", 2, 7)).unwrap();
        assert_eq!(g.edges.len(), 10);
        let out = g.out_degrees();
        assert_eq!(&out[2..], &[3, 3, 3]);
        assert!(g.edges.iter().all(|e| e.gap() <= 2));
    }

    #[test]
    fn rejects_invalid_params() {
        let pareto = ParetoParams::new(2.0, 1.0).unwrap();
        let w = AttractivenessKind::Window { scale: 3 };
        assert!(ModelParams::new(1, 1, w, pareto, SeedSpec::default()).is_err());
        assert!(ModelParams::new(5, 0, w, pareto, SeedSpec::default()).is_err());
        let mut p = ModelParams::new(5, 1, w, pareto, SeedSpec::default()).unwrap();
        p.recency_scale = 4;
        assert!(generate(&p).is_err());
        let big = params(NAIVE_MAX_VERTICES + 1, 1, "window", 3, 0);
        assert!(generate_naive(&big).is_err());
    }

    #[test]
    fn trace_has_one_entry_per_step() {
        let p = params(50, 2, "exp", 10, 3).with_trace(true);
        let g = generate(&p).unwrap();
        let trace = g.weight_trace.unwrap();
        assert_eq!(trace.first_step, 2);
        assert_eq!(trace.values.len(), 49);
    }

    #[test]
    fn degree_sum_and_no_loops() {
        for kind in ["window", "exp", "general:111:20", "agepower:0.5", "general:010:1"] {
            let p = params(400, 3, kind, 25, 9);
            let g = generate(&p).unwrap();
            let total: u64 = g.total_degrees().iter().sum();
            assert_eq!(total as usize, 2 * p.edge_count(), "{kind}");
            assert!(g.edges.iter().all(|e| e.source > e.target), "{kind}");
        }
    }

    #[test]
    fn exploratory_kinds_match_the_oracle() {
        for kind in ["general:111:20", "agepower:0.5", "general:110:1"] {
            let p = params(300, 2, kind, 25, 12);
            assert_eq!(generate(&p).unwrap().edges, generate_naive(&p).unwrap().edges, "{kind}");
        }
    }

    #[test]
    fn naive_trace_matches_fast_trace() {
        let p = params(500, 2, "exp", 30, 5).with_trace(true);
        let fast = generate(&p).unwrap().weight_trace.unwrap();
        let slow = generate_naive(&p).unwrap().weight_trace.unwrap();
        for (a, b) in fast.values.iter().zip(&slow.values) {
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn death_in_degree_matches_scan() {
        let scale = 20;
        let p = params(300, 2, "window", scale, 21);
        let g = generate(&p).unwrap();
        let indeg = g.in_degrees();
        for v in scale..=(300 - scale + 1) {
            let brute = g.edges.iter().filter(|e| e.target as usize == v).count() as u64;
            assert_eq!(in_degree_at_death(&g, v).unwrap(), brute);
            assert_eq!(indeg[v - 1], brute);
        }
        assert!(in_degree_at_death(&g, scale - 1).is_err());
        assert!(in_degree_at_death(&g, 300 - scale + 2).is_err());
        let e = generate(&params(300, 2, "exp", scale, 21)).unwrap();
        assert!(matches!(in_degree_at_death(&e, 100), Err(Error::WrongKind { .. })));
    }

    #[test]
    fn vertex_without_edges_has_zero_death_degree() {
        // m = 1, N = 1: every edge goes to the immediate predecessor.
        let g = generate(&params(30, 1, "window", 1, 2)).unwrap();
        assert!(g.edges.iter().all(|e| e.gap() == 1));
        let mut g = g;
        g.edges.retain(|e| e.target != 10);
        assert_eq!(in_degree_at_death(&g, 10).unwrap(), 0);
    }

    #[test]
    fn params_serde_round_trip() {
        let p = params(100, 2, "general:101:3.5", 1, 8).with_trace(true);
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"N\":1"));
        let back: ModelParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
