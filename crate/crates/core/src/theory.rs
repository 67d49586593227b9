//! Closed-form predictions and their validity ranges.
//!
//! Error terms inside the asymptotic statements are dropped; comparisons
//! absorb them into tolerances.

use serde::{Deserialize, Serialize};

use crate::attractiveness::AttractivenessKind;
use crate::error::{Error, Result};

/// Moment order entering the validity exponents: 2 when `γ > 2`, otherwise
/// any value in `(1, γ)` (default: the midpoint).
pub fn alpha_constant(gamma: f64, alpha_choice: Option<f64>) -> Result<f64> {
    if !(gamma > 1.0) {
        return Err(Error::invalid("gamma", format!("must be > 1, got {gamma}")));
    }
    if gamma > 2.0 {
        return Ok(2.0);
    }
    match alpha_choice {
        None => Ok((1.0 + gamma) / 2.0),
        Some(a) if a > 1.0 && a < gamma => Ok(a),
        Some(a) => Err(Error::invalid(
            "alpha",
            format!("must lie in (1, {gamma}) for gamma <= 2, got {a}"),
        )),
    }
}

/// `γ·d^(−γ−1)·((γ−1)m/γ)^γ`, the limiting fraction of vertices of degree `d`.
pub fn predicted_degree_density(d: f64, m: usize, gamma: f64) -> f64 {
    gamma * d.powf(-gamma - 1.0) * ((gamma - 1.0) * m as f64 / gamma).powf(gamma)
}

/// `∫_{d₀}^∞` of [`predicted_degree_density`]: `((γ−1)m/(γ·d₀))^γ`.
pub fn predicted_tail_mass(d0: f64, m: usize, gamma: f64) -> f64 {
    ((gamma - 1.0) * m as f64 / (gamma * d0)).powf(gamma)
}

/// Expected `e(T)`: `max(0, 1 − T/N)` for the window, `e^(−T/N)` for the
/// exponential kind.
pub fn predicted_e_of_t(kind: &AttractivenessKind, t: u64, scale: usize) -> Result<f64> {
    let ratio = t as f64 / scale as f64;
    match kind {
        AttractivenessKind::Window { .. } => Ok((1.0 - ratio).max(0.0)),
        AttractivenessKind::Exponential { .. } => Ok((-ratio).exp()),
        other => Err(Error::NoPrediction(other.label())),
    }
}

/// Chebyshev concentration for `N_n(d)`: radius `√(N·n·ln n)` exceeded with
/// probability at most `2/ln n`.
pub fn concentration_bound(n: usize, scale: usize) -> (f64, f64) {
    let ln_n = (n as f64).ln();
    ((scale as f64 * n as f64 * ln_n).sqrt(), 2.0 / ln_n)
}

/// Largest degree (up to the unknown constant) for which the density
/// formula is claimed.
pub fn degree_validity_max(
    kind: &AttractivenessKind,
    n: usize,
    scale: usize,
    gamma: f64,
    alpha: f64,
) -> Result<f64> {
    let (n, s) = (n as f64, scale as f64);
    match kind {
        AttractivenessKind::Window { .. } => Ok((n / s)
            .powf(1.0 / (gamma + 1.0))
            .min(s.powf((alpha - 1.0) / (gamma + alpha + 1.0)))),
        AttractivenessKind::Exponential { .. } => {
            // ln N vanishes at N = 1; the size term is then unbounded.
            let size_term = if scale > 1 {
                (n / (s * s.ln())).powf(1.0 / (gamma + 1.0))
            } else {
                f64::INFINITY
            };
            Ok(size_term.min(s.powf((alpha - 1.0) / (alpha + (gamma + 1.0) * (alpha + 1.0)))))
        }
        other => Err(Error::NoPrediction(other.label())),
    }
}

/// All predictions for one parameter set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryPrediction {
    pub kind: String,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub scale: usize,
    pub gamma: f64,
    pub alpha: f64,
    pub concentration_radius: f64,
    pub concentration_prob_bound: f64,
    pub d_validity_max: f64,
}

impl TheoryPrediction {
    pub fn new(
        kind: &AttractivenessKind,
        n: usize,
        m: usize,
        gamma: f64,
        alpha_choice: Option<f64>,
    ) -> Result<Self> {
        let scale = kind.scale().ok_or_else(|| Error::NoPrediction(kind.label()))?;
        if n < 3 {
            return Err(Error::invalid("n", "predictions need n >= 3"));
        }
        let alpha = alpha_constant(gamma, alpha_choice)?;
        let (radius, prob) = concentration_bound(n, scale);
        Ok(Self {
            kind: kind.label(),
            n,
            m,
            scale,
            gamma,
            alpha,
            concentration_radius: radius,
            concentration_prob_bound: prob,
            d_validity_max: degree_validity_max(kind, n, scale, gamma, alpha)?,
        })
    }

    pub fn density(&self, d: f64) -> f64 {
        predicted_degree_density(d, self.m, self.gamma)
    }

    pub fn e_of_t(&self, t: u64) -> f64 {
        let kind = AttractivenessKind::parse(&self.kind, self.scale).expect("kind label written by new()");
        predicted_e_of_t(&kind, t, self.scale).expect("analysed kind")
    }

    /// Whether `d` lies inside the claimed validity range.
    pub fn in_validity_range(&self, d: f64) -> bool {
        d <= self.d_validity_max
    }

    /// CSV rows `d,density,in_validity` for `d` in `lo..=hi`.
    pub fn degree_table(&self, lo: u64, hi: u64) -> String {
        let mut s = String::from("d,density,in_validity\n");
        for d in lo.max(1)..=hi {
            s.push_str(&format!(
                "{d},{},{}\n",
                self.density(d as f64),
                self.in_validity_range(d as f64)
            ));
        }
        s
    }

    /// CSV rows `T,e_of_T`.
    pub fn recency_table(&self, grid: &[u64]) -> String {
        let mut s = String::from("T,e_of_T\n");
        for &t in grid {
            s.push_str(&format!("{t},{}\n", self.e_of_t(t)));
        }
        s
    }
}
