//! Attractiveness functions and the incremental weighted-sampling index.
//!
//! The two analysed kinds are the hard window `q(i)·I[i > t−N]` and the
//! exponential decay `q(i)·e^(−(t−i)/N)`. Two exploratory kinds come along
//! without any theory attached: the factorized family
//! `q^α₁ · d^α₂ · e^(−α₃·age/τ)` and the age-power law `d · (age+1)^(−x)`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Relative cutoff below which decayed keys are dropped on rebuild.
pub const DEFAULT_TRUNCATION_EPSILON: f64 = 1e-15;

/// Largest exponent `(t−b)/N` the shifted keys may reach before the base is
/// moved forward (natural-log units).
pub const DEFAULT_RESCALE_CAP: f64 = 300.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AttractivenessKind {
    /// `q(i)` while `now − i < N`, zero afterwards.
    Window { scale: usize },
    /// `q(i)·e^(−(now−i)/N)`.
    Exponential { scale: usize },
    /// `q^α₁ · d^α₂ · e^(−α₃·age/τ)`. Exploratory.
    GeneralFactorized {
        quality: bool,
        degree: bool,
        decay: bool,
        tau: f64,
    },
    /// `d · (age+1)^(−exponent)`. Exploratory.
    AgePower { exponent: f64 },
}

impl AttractivenessKind {
    /// Parses a CLI/header label. `window` and `exp` take their scale from
    /// `scale`; the exploratory labels carry their own parameters
    /// (`general:<a1><a2><a3>:<tau>`, `agepower:<exponent>`).
    pub fn parse(label: &str, scale: usize) -> Result<Self> {
        let kind = match label {
            "window" => AttractivenessKind::Window { scale },
            "exp" | "exponential" => AttractivenessKind::Exponential { scale },
            other => {
                if let Some(rest) = other.strip_prefix("general:") {
                    let (bits, tau) = rest
                        .split_once(':')
                        .ok_or_else(|| Error::invalid("kind", "expected general:<a1a2a3>:<tau>"))?;
                    let flags: Vec<bool> = bits
                        .chars()
                        .map(|c| match c {
                            '0' => Ok(false),
                            '1' => Ok(true),
                            _ => Err(Error::invalid("kind", format!("exponent flag `{c}` not in {{0,1}}"))),
                        })
                        .collect::<Result<_>>()?;
                    if flags.len() != 3 {
                        return Err(Error::invalid("kind", "general kind needs exactly three flags"));
                    }
                    let tau: f64 = tau
                        .parse()
                        .map_err(|_| Error::invalid("kind", format!("bad tau `{tau}`")))?;
                    AttractivenessKind::GeneralFactorized {
                        quality: flags[0],
                        degree: flags[1],
                        decay: flags[2],
                        tau,
                    }
                } else if let Some(x) = other.strip_prefix("agepower:") {
                    let exponent: f64 = x
                        .parse()
                        .map_err(|_| Error::invalid("kind", format!("bad exponent `{x}`")))?;
                    AttractivenessKind::AgePower { exponent }
                } else {
                    return Err(Error::invalid("kind", format!("unknown kind `{other}`")));
                }
            }
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            AttractivenessKind::Window { scale } | AttractivenessKind::Exponential { scale } => {
                if scale < 1 {
                    return Err(Error::invalid("N", "must be >= 1"));
                }
            }
            AttractivenessKind::GeneralFactorized { tau, .. } => {
                if !(tau.is_finite() && tau > 0.0) {
                    return Err(Error::invalid("tau", format!("must be > 0, got {tau}")));
                }
            }
            AttractivenessKind::AgePower { exponent } => {
                if !(exponent.is_finite() && exponent > 0.0) {
                    return Err(Error::invalid("exponent", format!("must be > 0, got {exponent}")));
                }
            }
        }
        Ok(())
    }

    /// The recency scale `N` of the analysed kinds.
    pub fn scale(&self) -> Option<usize> {
        match *self {
            AttractivenessKind::Window { scale } | AttractivenessKind::Exponential { scale } => Some(scale),
            _ => None,
        }
    }

    /// Exploratory kinds have no closed-form predictions.
    pub fn is_exploratory(&self) -> bool {
        self.scale().is_none()
    }

    pub fn uses_degree(&self) -> bool {
        matches!(
            self,
            AttractivenessKind::GeneralFactorized { degree: true, .. } | AttractivenessKind::AgePower { .. }
        )
    }

    /// Label without the scale, as used on the command line.
    pub fn label(&self) -> String {
        self.to_string()
    }

    fn decay_rate(&self) -> Option<f64> {
        match *self {
            AttractivenessKind::Exponential { scale } => Some(scale as f64),
            AttractivenessKind::GeneralFactorized { decay: true, tau, .. } => Some(tau),
            _ => None,
        }
    }

    /// Age-independent part of the weight.
    fn fitness(&self, q: f64, degree: u64) -> f64 {
        match *self {
            AttractivenessKind::Window { .. } | AttractivenessKind::Exponential { .. } => q,
            AttractivenessKind::GeneralFactorized {
                quality, degree: d, ..
            } => {
                let mut w = 1.0;
                if quality {
                    w *= q;
                }
                if d {
                    w *= degree as f64;
                }
                w
            }
            AttractivenessKind::AgePower { .. } => degree as f64,
        }
    }
}

impl fmt::Display for AttractivenessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AttractivenessKind::Window { .. } => write!(f, "window"),
            AttractivenessKind::Exponential { .. } => write!(f, "exp"),
            AttractivenessKind::GeneralFactorized {
                quality,
                degree,
                decay,
                tau,
            } => write!(
                f,
                "general:{}{}{}:{}",
                quality as u8, degree as u8, decay as u8, tau
            ),
            AttractivenessKind::AgePower { exponent } => write!(f, "agepower:{exponent}"),
        }
    }
}

/// Kind label paired with a recency scale, e.g. for config files.
impl FromStr for AttractivenessKind {
    type Err = Error;

    /// Accepts `<label>` (scale 1) or `<label>@<N>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.rsplit_once('@') {
            Some((label, n)) => {
                let scale = n
                    .parse()
                    .map_err(|_| Error::invalid("N", format!("bad scale `{n}`")))?;
                Self::parse(label, scale)
            }
            None => Self::parse(s, 1),
        }
    }
}

/// Weight of a vertex with quality `q` and current degree `degree`, born at
/// step `birth`, evaluated at step `now`.
pub fn attr_value(kind: &AttractivenessKind, q: f64, degree: u64, birth: usize, now: usize) -> Result<f64> {
    if birth > now {
        return Err(Error::invalid(
            "birth",
            format!("birth {birth} is after the current step {now}"),
        ));
    }
    let age = (now - birth) as f64;
    let w = match *kind {
        AttractivenessKind::Window { scale } => {
            if now - birth < scale {
                q
            } else {
                0.0
            }
        }
        AttractivenessKind::Exponential { scale } => q * (-age / scale as f64).exp(),
        AttractivenessKind::GeneralFactorized { decay, tau, .. } => {
            let f = kind.fitness(q, degree);
            if decay {
                f * (-age / tau).exp()
            } else {
                f
            }
        }
        AttractivenessKind::AgePower { exponent } => degree as f64 * (age + 1.0).powf(-exponent),
    };
    Ok(w)
}

/// Linear-scan inverse CDF over explicit weights: the smallest 1-based `j`
/// whose running prefix sum strictly exceeds `u·Σw`.
///
/// This is the reference the tree descent in [`WeightIndex::sample`] must
/// match.
pub fn scan_sample(weights: &[f64], u: f64) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let x = u * total;
    let mut prefix = 0.0;
    let mut last_positive = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            prefix += w;
            last_positive = Some(i + 1);
            if prefix > x {
                return last_positive;
            }
        }
    }
    last_positive
}

/// Complete binary sum tree over a power-of-two number of leaves.
///
/// Internal nodes are recomputed from their children on every update, so
/// no rounding residue accumulates and an all-zero subtree sums to exactly
/// zero.
#[derive(Clone, Debug)]
struct SumTree {
    capacity: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    fn with_capacity(capacity: usize) -> Self {
        let capacity = capacity.max(1).next_power_of_two();
        Self {
            capacity,
            nodes: vec![0.0; 2 * capacity],
        }
    }

    #[inline]
    fn total(&self) -> f64 {
        self.nodes[1]
    }

    #[inline]
    fn leaf(&self, i: usize) -> f64 {
        self.nodes[self.capacity + i]
    }

    fn set(&mut self, i: usize, value: f64) {
        let mut k = self.capacity + i;
        self.nodes[k] = value;
        while k > 1 {
            k >>= 1;
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    /// Replaces every leaf and recomputes the internal nodes bottom-up.
    fn rebuild(&mut self, leaves: impl Iterator<Item = f64>) {
        let cap = self.capacity;
        self.nodes[cap..].iter_mut().for_each(|v| *v = 0.0);
        for (slot, v) in self.nodes[cap..].iter_mut().zip(leaves) {
            *slot = v;
        }
        for k in (1..cap).rev() {
            self.nodes[k] = self.nodes[2 * k] + self.nodes[2 * k + 1];
        }
    }

    fn grow(&mut self, min_capacity: usize) {
        if min_capacity <= self.capacity {
            return;
        }
        let old: Vec<f64> = self.nodes[self.capacity..].to_vec();
        *self = SumTree::with_capacity(min_capacity);
        self.rebuild(old.into_iter());
    }

    /// Leaf index of the first strictly positive prefix exceeding `x`.
    /// Requires `total() > 0`. Never lands on a zero leaf: when rounding
    /// pushes `x` past the right edge of a subtree whose right half is
    /// empty, the descent stays left.
    fn find(&self, mut x: f64) -> usize {
        let mut k = 1;
        while k < self.capacity {
            let left = self.nodes[2 * k];
            let right = self.nodes[2 * k + 1];
            if x < left || right <= 0.0 {
                k *= 2;
            } else {
                x -= left;
                k = 2 * k + 1;
            }
        }
        k - self.capacity
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    /// Leaf = logical weight.
    Direct,
    /// Leaf = fitness·e^((i−base)/rate); logical = leaf·e^(−(t−base)/rate).
    Shifted,
    /// Leaves recomputed from scratch every step.
    Dense,
}

/// Incremental prefix-sum index over the attractiveness of vertices `1..=t`.
///
/// Supports appending a vertex (which advances the step and applies the
/// kind's decay), degree increments for degree-dependent kinds, the total
/// `Q(t)`, and inverse-CDF sampling in `O(log t)`.
#[derive(Clone, Debug)]
pub struct WeightIndex {
    kind: AttractivenessKind,
    layout: Layout,
    tree: SumTree,
    qualities: Vec<f64>,
    degrees: Vec<u64>,
    base: usize,
    decay_rate: f64,
    truncation_epsilon: f64,
    rescale_cap: f64,
    /// First vertex still carrying weight (window: the oldest alive one).
    window_start: usize,
}

impl WeightIndex {
    pub fn new(kind: AttractivenessKind) -> Self {
        Self::with_capacity(kind, 16)
    }

    pub fn with_capacity(kind: AttractivenessKind, capacity: usize) -> Self {
        let layout = match kind {
            AttractivenessKind::Window { .. } => Layout::Direct,
            AttractivenessKind::Exponential { .. } => Layout::Shifted,
            AttractivenessKind::GeneralFactorized { decay, .. } => {
                if decay {
                    Layout::Shifted
                } else {
                    Layout::Direct
                }
            }
            AttractivenessKind::AgePower { .. } => Layout::Dense,
        };
        Self {
            kind,
            layout,
            tree: SumTree::with_capacity(capacity),
            qualities: Vec::with_capacity(capacity),
            degrees: Vec::new(),
            base: 0,
            decay_rate: kind.decay_rate().unwrap_or(1.0),
            truncation_epsilon: DEFAULT_TRUNCATION_EPSILON,
            rescale_cap: DEFAULT_RESCALE_CAP,
            window_start: 1,
        }
    }

    /// Sets the relative truncation cutoff (0 disables truncation).
    pub fn truncation_epsilon(mut self, epsilon: f64) -> Self {
        self.truncation_epsilon = epsilon.max(0.0);
        self
    }

    /// Sets the exponent cap that triggers a base shift.
    pub fn rescale_cap(mut self, cap: f64) -> Self {
        assert!(cap > 0.0 && cap < 700.0, "rescale cap must lie in (0, 700)");
        self.rescale_cap = cap;
        self
    }

    pub fn kind(&self) -> &AttractivenessKind {
        &self.kind
    }

    /// Current step `t`, the number of vertices pushed so far.
    pub fn current_step(&self) -> usize {
        self.qualities.len()
    }

    pub fn window_start(&self) -> usize {
        self.window_start
    }

    pub fn is_empty(&self) -> bool {
        self.qualities.is_empty()
    }

    pub fn push(&mut self, q: f64) {
        self.push_with_degree(q, 0)
    }

    /// Appends vertex `t+1` with quality `q` and initial degree `degree`,
    /// advancing the step to `t+1`.
    pub fn push_with_degree(&mut self, q: f64, degree: u64) {
        let v = self.qualities.len() + 1;
        self.qualities.push(q);
        if self.kind.uses_degree() {
            self.degrees.push(degree);
        }
        if v > self.tree.capacity {
            self.tree.grow(v);
        }
        match self.layout {
            Layout::Direct => {
                self.tree.set(v - 1, self.kind.fitness(q, degree));
                if let AttractivenessKind::Window { scale } = self.kind {
                    if v > scale {
                        let dead = v - scale;
                        self.tree.set(dead - 1, 0.0);
                        self.window_start = dead + 1;
                    }
                }
            }
            Layout::Shifted => {
                let key = self.shifted_key(v);
                self.tree.set(v - 1, key);
                if (v - self.base) as f64 / self.decay_rate > self.rescale_cap {
                    self.rebase(v);
                }
            }
            Layout::Dense => self.rebuild_dense(),
        }
    }

    /// Adds `by` to the degree of vertex `v` (degree-dependent kinds only;
    /// a no-op otherwise).
    pub fn add_degree(&mut self, v: usize, by: u64) {
        if !self.kind.uses_degree() {
            return;
        }
        assert!(v >= 1 && v <= self.current_step(), "vertex {v} not in index");
        self.degrees[v - 1] += by;
        match self.layout {
            Layout::Direct => {
                let w = self.kind.fitness(self.qualities[v - 1], self.degrees[v - 1]);
                self.tree.set(v - 1, w);
            }
            Layout::Shifted => {
                if v >= self.window_start {
                    let key = self.shifted_key(v);
                    self.tree.set(v - 1, key);
                }
            }
            Layout::Dense => {
                let t = self.current_step();
                self.tree.set(v - 1, self.dense_weight(v, t));
            }
        }
    }

    /// `Q(t)`: the sum of the logical weights.
    pub fn total(&self) -> f64 {
        self.tree.total() * self.scale_factor()
    }

    /// Logical weight of vertex `v` at the current step.
    pub fn weight(&self, v: usize) -> f64 {
        assert!(v >= 1 && v <= self.current_step(), "vertex {v} not in index");
        self.tree.leaf(v - 1) * self.scale_factor()
    }

    /// All logical weights in vertex order.
    pub fn weights(&self) -> Vec<f64> {
        (1..=self.current_step()).map(|v| self.weight(v)).collect()
    }

    /// Inverse-CDF draw: the smallest vertex whose prefix of logical weights
    /// strictly exceeds `u·total`. `u` must lie in `[0, 1)`.
    pub fn sample(&self, u: f64) -> Result<usize> {
        let total = self.tree.total();
        if !(total > 0.0) {
            return Err(Error::ZeroTotalWeight {
                step: self.current_step(),
            });
        }
        Ok(self.tree.find(u * total) + 1)
    }

    fn scale_factor(&self) -> f64 {
        match self.layout {
            Layout::Shifted => {
                let t = self.current_step();
                (-((t - self.base) as f64) / self.decay_rate).exp()
            }
            _ => 1.0,
        }
    }

    fn degree(&self, v: usize) -> u64 {
        self.degrees.get(v - 1).copied().unwrap_or(0)
    }

    fn shifted_key(&self, v: usize) -> f64 {
        let f = self.kind.fitness(self.qualities[v - 1], self.degree(v));
        f * ((v as f64 - self.base as f64) / self.decay_rate).exp()
    }

    /// Moves the shift base to `new_base`, recomputing every key and
    /// dropping those below `truncation_epsilon · total`.
    fn rebase(&mut self, new_base: usize) {
        self.base = new_base;
        let start = self.window_start;
        let t = self.current_step();
        let keys: Vec<f64> = (start..=t).map(|v| self.shifted_key(v)).collect();
        let total: f64 = keys.iter().sum();
        let cutoff = self.truncation_epsilon * total;
        let mut first_live = t;
        let mut leaves = vec![0.0; start - 1];
        for (offset, &k) in keys.iter().enumerate() {
            let k = if k < cutoff { 0.0 } else { k };
            if k > 0.0 && start + offset < first_live {
                first_live = start + offset;
            }
            leaves.push(k);
        }
        // Keys only shrink relative to the newest one, so a leading run of
        // zeros never comes back.
        self.window_start = first_live;
        self.tree.rebuild(leaves.into_iter());
    }

    fn dense_weight(&self, v: usize, t: usize) -> f64 {
        attr_value(&self.kind, self.qualities[v - 1], self.degree(v), v, t).unwrap_or(0.0)
    }

    fn rebuild_dense(&mut self) {
        let t = self.current_step();
        let leaves: Vec<f64> = (1..=t).map(|v| self.dense_weight(v, t)).collect();
        self.tree.rebuild(leaves.into_iter());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const WINDOW3: AttractivenessKind = AttractivenessKind::Window { scale: 3 };

    #[test]
    fn attr_value_examples() {
        let n = 10;
        let w = AttractivenessKind::Window { scale: n };
        let e = AttractivenessKind::Exponential { scale: n };
        assert_eq!(attr_value(&w, 3.0, 0, 5, 5 + n).unwrap(), 0.0);
        assert_eq!(attr_value(&w, 3.0, 0, 5, 5 + n - 1).unwrap(), 3.0);
        assert_eq!(attr_value(&e, 3.0, 0, 4, 4).unwrap(), 3.0);
        assert_relative_eq!(attr_value(&e, 2.0, 0, 1, 1 + n).unwrap(), 2.0 * (-1f64).exp());
        assert_relative_eq!(attr_value(&e, 2.0, 0, 1, 1 + n).unwrap(), 0.7358, epsilon = 1e-4);
        assert!(attr_value(&e, 2.0, 0, 3, 2).is_err());
    }

    #[test]
    fn exploratory_attr_values() {
        let g = AttractivenessKind::GeneralFactorized {
            quality: true,
            degree: true,
            decay: true,
            tau: 2.0,
        };
        assert_relative_eq!(attr_value(&g, 3.0, 4, 1, 3).unwrap(), 12.0 * (-1f64).exp());
        let pa = AttractivenessKind::parse("general:010:1", 1).unwrap();
        assert_eq!(attr_value(&pa, 3.0, 4, 1, 100).unwrap(), 4.0);
        let ap = AttractivenessKind::AgePower { exponent: 1.0 };
        assert_eq!(attr_value(&ap, 9.0, 6, 1, 3).unwrap(), 2.0);
    }

    #[test]
    fn kind_labels_round_trip() {
        for label in ["window", "exp", "general:101:2.5", "agepower:0.5"] {
            let k = AttractivenessKind::parse(label, 7).unwrap();
            assert_eq!(k.to_string(), label);
        }
        assert_eq!(
            "window@40".parse::<AttractivenessKind>().unwrap(),
            AttractivenessKind::Window { scale: 40 }
        );
        assert!(AttractivenessKind::parse("general:12:1", 1).is_err());
        assert!(AttractivenessKind::parse("general:101:0", 1).is_err());
        assert!(AttractivenessKind::parse("window", 0).is_err());
        assert!(AttractivenessKind::parse("linear", 3).is_err());
    }

    #[test]
    fn push_examples() {
        let mut idx = WeightIndex::new(AttractivenessKind::Exponential { scale: 4 });
        idx.push(5.0);
        assert_eq!(idx.total(), 5.0);
        assert_eq!(idx.current_step(), 1);

        let n = 6;
        let mut idx = WeightIndex::new(AttractivenessKind::Window { scale: n });
        for _ in 0..n {
            idx.push(1.0);
        }
        assert_eq!(idx.total(), n as f64);
        idx.push(1.0);
        assert_eq!(idx.total(), n as f64);
        assert_eq!(idx.weight(1), 0.0);

        let mut idx = WeightIndex::new(AttractivenessKind::Exponential { scale: 1 });
        idx.push(1.0);
        idx.push(1.0);
        assert_relative_eq!(idx.total(), 1.0 + (-1f64).exp(), max_relative = 1e-15);
    }

    #[test]
    fn total_examples() {
        let mut idx = WeightIndex::new(AttractivenessKind::Window { scale: 10 });
        let qs = [1.5, 2.0, 7.25, 3.0];
        for q in qs {
            idx.push(q);
        }
        assert_eq!(idx.total(), qs.iter().sum::<f64>());

        let mut idx = WeightIndex::new(AttractivenessKind::Exponential { scale: 5 }).truncation_epsilon(0.0);
        for _ in 0..40 {
            idx.push(1.0);
        }
        let expected: f64 = (0..40).map(|k| (-(k as f64) / 5.0).exp()).sum();
        assert_relative_eq!(idx.total(), expected, max_relative = 1e-14);

        let mut idx = WeightIndex::new(WINDOW3);
        idx.push(7.0);
        assert_eq!(idx.total(), 7.0);
    }

    #[test]
    fn sample_examples() {
        let mut idx = WeightIndex::new(WINDOW3);
        idx.push(2.0);
        for u in [0.0, 0.3, 0.999_999] {
            assert_eq!(idx.sample(u).unwrap(), 1);
        }
        idx.push(6.0); // weights 2, 6 → relative 1:3
        assert_eq!(idx.sample(0.2).unwrap(), 1);
        assert_eq!(idx.sample(0.5).unwrap(), 2);
        assert_eq!(idx.sample(0.25).unwrap(), 2); // prefix 2 > 2.0 is false
        assert_eq!(scan_sample(&[1.0, 3.0], 0.2), Some(1));
        assert_eq!(scan_sample(&[1.0, 3.0], 0.5), Some(2));
        assert_eq!(scan_sample(&[1.0, 3.0], 0.25), Some(2));
    }

    #[test]
    fn sample_rejects_empty_and_all_zero() {
        let idx = WeightIndex::new(WINDOW3);
        assert!(matches!(idx.sample(0.5), Err(Error::ZeroTotalWeight { .. })));
        let mut idx = WeightIndex::new(AttractivenessKind::parse("general:010:1", 1).unwrap());
        idx.push(1.0);
        assert!(idx.sample(0.5).is_err());
        idx.add_degree(1, 1);
        assert_eq!(idx.sample(0.5).unwrap(), 1);
    }

    #[test]
    fn zero_weight_vertices_are_never_returned() {
        let mut idx = WeightIndex::new(WINDOW3);
        for q in [5.0, 1.0, 1.0, 1.0, 1.0] {
            idx.push(q);
        }
        // Vertices 1, 2 are dead.
        for u in [0.0, 1e-300, 0.5, 1.0 - f64::EPSILON] {
            let v = idx.sample(u).unwrap();
            assert!((3..=5).contains(&v), "u={u} gave {v}");
        }
    }

    #[test]
    fn window_alive_set_is_exact() {
        let n = 7;
        let mut idx = WeightIndex::new(AttractivenessKind::Window { scale: n });
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for t in 1..=200usize {
            idx.push(1.0 + rng.random::<f64>() * 10.0);
            let lo = if t > n { t - n + 1 } else { 1 };
            for v in 1..=t {
                assert_eq!(idx.weight(v) > 0.0, v >= lo, "t={t} v={v}");
                if v < lo {
                    assert_eq!(idx.weight(v), 0.0);
                }
            }
        }
    }

    #[test]
    fn exponential_total_matches_direct_sum() {
        let n = 50;
        let kind = AttractivenessKind::Exponential { scale: n };
        let mut idx = WeightIndex::new(kind).truncation_epsilon(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut qs = Vec::new();
        // 300·N steps is the rescale horizon; stay below it.
        for t in 1..=5000usize {
            let q = 1.0 / (1.0 - rng.random::<f64>()).sqrt();
            qs.push(q);
            idx.push(q);
            if t % 97 == 0 {
                let direct: f64 = qs
                    .iter()
                    .enumerate()
                    .map(|(i, q)| q * (-((t - i - 1) as f64) / n as f64).exp())
                    .sum();
                let rel = (idx.total() - direct).abs() / direct;
                assert!(rel <= 2f64.powi(-40), "t={t} rel={rel}");
            }
        }
    }

    #[test]
    fn rebase_keeps_totals_consistent() {
        let n = 3;
        let kind = AttractivenessKind::Exponential { scale: n };
        let mut idx = WeightIndex::new(kind).rescale_cap(5.0);
        for _ in 0..2000 {
            idx.push(1.0);
        }
        let expected = 1.0 / (1.0 - (-1.0 / n as f64).exp());
        assert_relative_eq!(idx.total(), expected, max_relative = 1e-12);
        assert!(idx.window_start() > 1800);
        let v = idx.sample(0.999).unwrap();
        assert!(v >= idx.window_start());
    }

    #[test]
    fn selection_frequencies_match_weights() {
        let mut idx = WeightIndex::new(AttractivenessKind::Window { scale: 100 });
        let ws = [1.0, 2.0, 0.5, 4.0, 3.0, 1.25, 6.0, 2.5, 1.0, 0.75];
        for w in ws {
            idx.push(w);
        }
        let total: f64 = ws.iter().sum();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let draws = 1_000_000;
        let mut counts = [0u64; 10];
        for _ in 0..draws {
            counts[idx.sample(rng.random::<f64>()).unwrap() - 1] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let p = ws[i] / total;
            let sd = (draws as f64 * p * (1.0 - p)).sqrt();
            assert!((c as f64 - draws as f64 * p).abs() < 4.0 * sd, "vertex {} count {c}", i + 1);
        }
    }

    #[test]
    fn degree_increments_update_weights() {
        let kind = AttractivenessKind::parse("general:110:1", 1).unwrap();
        let mut idx = WeightIndex::new(kind);
        idx.push_with_degree(2.0, 1);
        idx.push_with_degree(3.0, 1);
        assert_eq!(idx.total(), 5.0);
        idx.add_degree(1, 2);
        assert_eq!(idx.weight(1), 6.0);
        assert_eq!(idx.total(), 9.0);

        let kind = AttractivenessKind::AgePower { exponent: 1.0 };
        let mut idx = WeightIndex::new(kind);
        idx.push_with_degree(1.0, 2);
        idx.push_with_degree(1.0, 2);
        // step 2: vertex 1 has age 1, vertex 2 age 0
        assert_eq!(idx.weights(), vec![1.0, 2.0]);
        idx.add_degree(1, 2);
        assert_eq!(idx.weight(1), 2.0);
    }

    fn kind_strategy() -> impl Strategy<Value = AttractivenessKind> {
        prop_oneof![
            (1usize..60).prop_map(|scale| AttractivenessKind::Window { scale }),
            (1usize..60).prop_map(|scale| AttractivenessKind::Exponential { scale }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn tree_descent_matches_linear_scan(
            kind in kind_strategy(),
            len in 1usize..10_000,
            seed in any::<u64>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = WeightIndex::with_capacity(kind, len).truncation_epsilon(0.0);
            for _ in 0..len {
                idx.push(1.0 / (1.0 - rng.random::<f64>()).powf(0.5));
            }
            let weights = idx.weights();
            for _ in 0..64 {
                let u = rng.random::<f64>();
                prop_assert_eq!(Some(idx.sample(u).unwrap()), scan_sample(&weights, u));
            }
        }

        #[test]
        fn totals_track_weight_sums(kind in kind_strategy(), len in 1usize..3000, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = WeightIndex::new(kind).truncation_epsilon(0.0);
            for _ in 0..len {
                idx.push(1.0 + 9.0 * rng.random::<f64>());
            }
            let sum: f64 = idx.weights().iter().sum();
            prop_assert!((idx.total() - sum).abs() <= 2f64.powi(-40) * sum);
            prop_assert!(idx.weights().iter().all(|&w| w >= 0.0));
        }
    }
}
