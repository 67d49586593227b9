//! Edge-list and quality files.
//!
//! Edge list: a header line
//! `# recnet v1 n=<n> m=<m> N=<N> gamma=<γ> a=<a> kind=<kind> seed=<seed>`
//! followed by one `source target` pair per line, 1-based, in generation
//! order. Qualities live in a parallel file with one decimal per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::attractiveness::AttractivenessKind;
use crate::error::{Error, Result};
use crate::generator::{Edge, GrownGraph, ModelParams, VertexId};
use crate::quality::{ParetoParams, SeedSpec};

pub const HEADER_TAG: &str = "# recnet v1";

pub fn header_line(params: &ModelParams) -> String {
    format!(
        "{HEADER_TAG} n={} m={} N={} gamma={} a={} kind={} seed={}",
        params.n,
        params.m,
        params.recency_scale,
        params.pareto.gamma(),
        params.pareto.a(),
        params.kind.label(),
        params.seed.master_seed
    )
}

pub fn write_edge_list<W: Write>(graph: &GrownGraph, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "{}", header_line(&graph.params))?;
    for e in &graph.edges {
        writeln!(out, "{} {}", e.source, e.target)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_qualities<W: Write>(qualities: &[f64], out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    for q in qualities {
        writeln!(out, "{q}")?;
    }
    out.flush()?;
    Ok(())
}

/// Writes the weight trace as `t,Q` CSV.
pub fn write_trace<W: Write>(graph: &GrownGraph, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "t,Q")?;
    if let Some(trace) = &graph.weight_trace {
        for (t, q) in trace.iter() {
            writeln!(out, "{t},{q}")?;
        }
    }
    out.flush()?;
    Ok(())
}

fn parse_err(path: &Path, line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        reason: reason.into(),
    }
}

/// Parses a header line into model parameters.
pub fn parse_header(line: &str) -> std::result::Result<ModelParams, String> {
    let rest = line
        .strip_prefix(HEADER_TAG)
        .ok_or_else(|| format!("missing `{HEADER_TAG}` header"))?;
    let mut n = None;
    let mut m = None;
    let mut scale = None;
    let mut gamma = None;
    let mut a = None;
    let mut kind = None;
    let mut seed = None;
    for field in rest.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| format!("header field `{field}` is not key=value"))?;
        let bad = |what: &str| format!("header field {key}: bad {what} `{value}`");
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(|_| bad("integer"))?),
            "m" => m = Some(value.parse::<usize>().map_err(|_| bad("integer"))?),
            "N" => scale = Some(value.parse::<usize>().map_err(|_| bad("integer"))?),
            "gamma" => gamma = Some(value.parse::<f64>().map_err(|_| bad("number"))?),
            "a" => a = Some(value.parse::<f64>().map_err(|_| bad("number"))?),
            "kind" => kind = Some(value.to_string()),
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("integer"))?),
            _ => return Err(format!("unknown header field `{key}`")),
        }
    }
    let missing = |k: &str| format!("header lacks `{k}=`");
    let scale = scale.ok_or_else(|| missing("N"))?;
    let kind = AttractivenessKind::parse(&kind.ok_or_else(|| missing("kind"))?, scale).map_err(|e| e.to_string())?;
    let pareto = ParetoParams::new(gamma.ok_or_else(|| missing("gamma"))?, a.ok_or_else(|| missing("a"))?)
        .map_err(|e| e.to_string())?;
    let params = ModelParams {
        n: n.ok_or_else(|| missing("n"))?,
        m: m.ok_or_else(|| missing("m"))?,
        recency_scale: scale,
        pareto,
        kind,
        seed: SeedSpec::new(seed.ok_or_else(|| missing("seed"))?, 0),
        record_weight_trace: false,
    };
    params.validate().map_err(|e| e.to_string())?;
    Ok(params)
}

/// Reads an edge list (and optionally its qualities) into a read-only
/// graph. Edges must point from a later vertex to an earlier one; edge
/// counts are not required to match the generator's.
pub fn ingest_edge_list(path: &Path, qualities_path: Option<&Path>) -> Result<GrownGraph> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();
    let params = loop {
        match lines.next() {
            None => return Err(parse_err(path, 1, format!("empty file, missing `{HEADER_TAG}` header"))),
            Some((i, line)) => {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                break parse_header(line.trim()).map_err(|r| parse_err(path, i + 1, r))?;
            }
        }
    };
    let n = params.n;
    let mut edges = Vec::new();
    for (i, line) in lines {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let (s, t) = match (parts.next(), parts.next(), parts.next()) {
            (Some(s), Some(t), None) => (s, t),
            _ => return Err(parse_err(path, lineno, format!("expected `source target`, got `{trimmed}`"))),
        };
        let parse_id = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| parse_err(path, lineno, format!("bad vertex id `{s}`")))
        };
        let (s, t) = (parse_id(s)?, parse_id(t)?);
        for v in [s, t] {
            if v < 1 || v > n {
                return Err(parse_err(path, lineno, format!("vertex {v} outside 1..={n}")));
            }
        }
        if t >= s {
            return Err(parse_err(
                path,
                lineno,
                format!("edge {s} {t}: target must precede source"),
            ));
        }
        edges.push(Edge {
            source: s as VertexId,
            target: t as VertexId,
        });
    }

    let qualities = match qualities_path {
        Some(qp) => Some(read_qualities(qp, n)?),
        None => None,
    };
    Ok(GrownGraph {
        params,
        qualities,
        edges,
        weight_trace: None,
    })
}

pub fn read_qualities(path: &Path, n: usize) -> Result<Vec<f64>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::with_capacity(n);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let q: f64 = trimmed
            .parse()
            .map_err(|_| parse_err(path, i + 1, format!("bad quality `{trimmed}`")))?;
        out.push(q);
    }
    if out.len() != n {
        return Err(parse_err(
            path,
            out.len(),
            format!("expected {n} qualities, found {}", out.len()),
        ));
    }
    Ok(out)
}
