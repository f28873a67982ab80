//! Sufficient conditions: the degree/fugacity imbalance inequality
//! `6 Δ_L Δ_R λ_R <= (1+λ_L)^{δ_R/Δ_L}`, its specializations to regular and
//! biregular classes, Kotecký–Preiss certificates (analytic and empirical),
//! and the complex zero-free region condition.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{BipartiteGraph, DegreeBounds, GraphError};
use crate::polymer::{kp_vertex_sum, ComplexRegion, Fugacities, KpVerdict, PolymerError};
use crate::scalar::Scalar;

/// Relative tolerance under which two sides of an inequality are reported
/// as a boundary case instead of being rounded either way.
pub const BOUNDARY_GUARD: f64 = 1e-12;

/// The `η` delivered by the analytic certificate.
pub const ANALYTIC_ETA: f64 = 0.1;

/// Largest `s` with `Σ_{k≥1} s^k / k^{3/2} < e/2` used by the analytic chain.
pub const SERIES_THRESHOLD: f64 = 0.832;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConditionError {
    #[error("degree parameters {0:?} do not describe a graph class with edges on both sides")]
    InvalidBounds(DegreeBounds),
    #[error("structural mismatch: {0}")]
    StructuralMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Polymer(#[from] PolymerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    /// Both sides agree to within [`BOUNDARY_GUARD`].
    Boundary,
    Fails,
}

/// Outcome of a `lhs <= rhs` check, keeping both sides for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub verdict: Verdict,
}

impl ConditionCheck {
    pub fn compare(lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let verdict = if (lhs - rhs).abs() <= BOUNDARY_GUARD * scale {
            Verdict::Boundary
        } else if lhs < rhs {
            Verdict::Holds
        } else {
            Verdict::Fails
        };
        Self { lhs, rhs, verdict }
    }

    /// True for `Holds` and `Boundary`: every condition here is closed or
    /// remains sufficient at equality.
    pub fn holds(&self) -> bool {
        self.verdict != Verdict::Fails
    }

    /// `lhs / rhs`; values at most one mean the condition holds.
    pub fn margin(&self) -> f64 {
        self.lhs / self.rhs
    }
}

fn check_bounds(bounds: &DegreeBounds) -> Result<(), ConditionError> {
    if bounds.delta_l_max == 0 || bounds.delta_r_min == 0 || bounds.delta_r_min > bounds.delta_r_max
    {
        return Err(ConditionError::InvalidBounds(*bounds));
    }
    Ok(())
}

fn check_real(lam: &Fugacities) -> Result<(), ConditionError> {
    if !(lam.lambda_l >= 0.0
        && lam.lambda_r >= 0.0
        && lam.lambda_l.is_finite()
        && lam.lambda_r.is_finite())
    {
        return Err(ConditionError::InvalidParameter(format!(
            "fugacities must be finite and nonnegative, got ({}, {})",
            lam.lambda_l, lam.lambda_r
        )));
    }
    Ok(())
}

/// `6 Δ_L Δ_R λ_R <= (1+λ_L)^{δ_R/Δ_L}`.
pub fn check_main_condition(
    bounds: &DegreeBounds,
    lam: &Fugacities,
) -> Result<ConditionCheck, ConditionError> {
    check_bounds(bounds)?;
    check_real(lam)?;
    let (dl, dr_min, dr_max) = (
        bounds.delta_l_max as f64,
        bounds.delta_r_min as f64,
        bounds.delta_r_max as f64,
    );
    let lhs = 6.0 * dl * dr_max * lam.lambda_r;
    let rhs = ((dr_min / dl) * lam.lambda_l.ln_1p()).exp();
    Ok(ConditionCheck::compare(lhs, rhs))
}

/// The three specializations of the main condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorollaryPart {
    /// `Δ`-regular graphs: `λ_L >= 6Δ²λ_R`.
    Regular,
    /// `(Δ_L, Δ_R)`-biregular with `Δ_R > Δ_L` and `λ_L = λ_R = λ`:
    /// `λ > (6Δ_LΔ_R)^{Δ_L/(Δ_R−Δ_L)}`.
    Unbalanced,
    /// Biregular at `λ_L = λ_R = 1` with `Δ_L >= 6`:
    /// `Δ_R >= 7 Δ_L ln Δ_L`.
    UniformWeights,
}

impl CorollaryPart {
    pub fn from_index(part: u8) -> Option<Self> {
        match part {
            1 => Some(Self::Regular),
            2 => Some(Self::Unbalanced),
            3 => Some(Self::UniformWeights),
            _ => None,
        }
    }
}

/// Smallest left degree for which the uniform-weight specialization is
/// guaranteed to imply the main condition.
pub const UNIFORM_WEIGHTS_MIN_LEFT_DEGREE: usize = 6;

/// Checks a specialization's hypothesis as `lhs <= rhs`. Structural
/// requirements (regularity, degree order, unit fugacities) are errors.
pub fn check_corollary(
    bounds: &DegreeBounds,
    lam: &Fugacities,
    part: CorollaryPart,
) -> Result<ConditionCheck, ConditionError> {
    check_bounds(bounds)?;
    check_real(lam)?;
    let biregular = bounds.delta_r_min == bounds.delta_r_max;
    let dl = bounds.delta_l_max as f64;
    let dr = bounds.delta_r_max as f64;
    match part {
        CorollaryPart::Regular => {
            if !(biregular && bounds.delta_l_max == bounds.delta_r_max) {
                return Err(ConditionError::StructuralMismatch(format!(
                    "regular case needs Δ_L = δ_R = Δ_R, got {bounds:?}"
                )));
            }
            Ok(ConditionCheck::compare(
                6.0 * dl * dl * lam.lambda_r,
                lam.lambda_l,
            ))
        }
        CorollaryPart::Unbalanced => {
            if !biregular || bounds.delta_r_max <= bounds.delta_l_max {
                return Err(ConditionError::StructuralMismatch(format!(
                    "unbalanced case needs a biregular class with Δ_R > Δ_L, got {bounds:?}"
                )));
            }
            if lam.lambda_l != lam.lambda_r {
                return Err(ConditionError::StructuralMismatch(format!(
                    "unbalanced case needs λ_L = λ_R, got ({}, {})",
                    lam.lambda_l, lam.lambda_r
                )));
            }
            let threshold = (dl / (dr - dl) * (6.0 * dl * dr).ln()).exp();
            Ok(ConditionCheck::compare(threshold, lam.lambda_l))
        }
        CorollaryPart::UniformWeights => {
            if !biregular {
                return Err(ConditionError::StructuralMismatch(format!(
                    "uniform-weight case needs a biregular class, got {bounds:?}"
                )));
            }
            if bounds.delta_l_max < UNIFORM_WEIGHTS_MIN_LEFT_DEGREE {
                return Err(ConditionError::StructuralMismatch(format!(
                    "uniform-weight case needs Δ_L >= {UNIFORM_WEIGHTS_MIN_LEFT_DEGREE}, got {}",
                    bounds.delta_l_max
                )));
            }
            if lam.lambda_l != 1.0 || lam.lambda_r != 1.0 {
                return Err(ConditionError::StructuralMismatch(format!(
                    "uniform-weight case needs λ_L = λ_R = 1, got ({}, {})",
                    lam.lambda_l, lam.lambda_r
                )));
            }
            Ok(ConditionCheck::compare(7.0 * dl * dl.ln(), dr))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMode {
    /// Implied by the main condition through the series bound.
    Analytic,
    /// Every per-vertex sum plus its tail fits under the bound.
    Empirical,
    /// Some per-vertex partial sum alone exceeds the bound.
    Failed,
    /// Some tail could not be bounded, or head plus tail exceeds the bound.
    Inconclusive,
}

/// Evidence that `Σ_{γ∋v} |w_γ| e^{(1/2+η)|γ|} <= 1/(2(Δ_R(Δ_L−1)+1))` for
/// every right vertex `v`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KpCertificate {
    pub eta: f64,
    pub mode: CertificateMode,
    /// Worst ratio of left side to bound; at most one when valid.
    pub worst_margin: f64,
    /// Per right vertex ratio (empirical checks only).
    pub per_vertex_margins: Vec<f64>,
    /// Which inequality chain produced the verdict.
    pub provenance: String,
}

impl KpCertificate {
    pub fn is_valid(&self) -> bool {
        matches!(
            self.mode,
            CertificateMode::Analytic | CertificateMode::Empirical
        )
    }
}

/// Certifies the KP condition. When the main condition holds and
/// `eta <= 0.1` the analytic chain certifies `η = 0.1`; otherwise each right
/// vertex is checked by enumeration up to `k_max` plus a geometric tail at
/// the requested `eta`.
pub fn certify_kp(
    graph: &BipartiteGraph,
    lam: &Fugacities,
    eta: f64,
    k_max: usize,
) -> Result<KpCertificate, ConditionError> {
    if eta.is_nan() || eta <= 0.0 || k_max == 0 {
        return Err(ConditionError::InvalidParameter(format!(
            "need eta > 0 and k_max >= 1, got eta = {eta}, k_max = {k_max}"
        )));
    }
    let profile = graph.degree_profile()?;
    if eta <= ANALYTIC_ETA && profile.delta_l_max > 0 && profile.delta_r_min > 0 {
        let main = check_main_condition(&profile.bounds(), lam)?;
        if main.holds() {
            return Ok(KpCertificate {
                eta: ANALYTIC_ETA,
                mode: CertificateMode::Analytic,
                worst_margin: analytic_margin(&profile.bounds(), lam),
                per_vertex_margins: Vec::new(),
                provenance: format!(
                    "6·Δ_L·Δ_R·λ_R = {:.6} <= (1+λ_L)^(δ_R/Δ_L) = {:.6}; series bound with s <= {SERIES_THRESHOLD}",
                    main.lhs, main.rhs
                ),
            });
        }
    }
    certify_kp_empirical(graph, lam, eta, k_max)
}

/// Left side of the analytic chain relative to its target:
/// `(Δ_R(Δ_L−1)+1) λ_R e^{3/2+η} / (1+λ_L)^{δ_R/Δ_L}` over `0.832`.
fn analytic_margin(bounds: &DegreeBounds, lam: &Fugacities) -> f64 {
    let radius = (bounds.delta_r_max * (bounds.delta_l_max - 1) + 1) as f64;
    let envelope = lam.weight_envelope(bounds.delta_l_max, bounds.delta_r_min);
    radius * envelope * (1.5 + ANALYTIC_ETA).exp() / SERIES_THRESHOLD
}

/// Per-vertex enumeration of the KP sums up to `k_max` plus a geometric
/// tail. Works for complex fugacities through `|w_γ|`.
pub fn certify_kp_empirical<T: Scalar>(
    graph: &BipartiteGraph,
    lam: &Fugacities<T>,
    eta: f64,
    k_max: usize,
) -> Result<KpCertificate, ConditionError> {
    let sums = (0..graph.n_right())
        .into_par_iter()
        .map(|v| kp_vertex_sum(graph, v, lam, eta, k_max))
        .collect::<Result<Vec<_>, _>>()?;
    let verdict_rank = |v: KpVerdict| match v {
        KpVerdict::Satisfied => 0,
        KpVerdict::Inconclusive => 1,
        KpVerdict::Violated => 2,
    };
    let worst = sums
        .iter()
        .map(|s| verdict_rank(s.verdict))
        .max()
        .unwrap_or(0);
    let mode = match worst {
        0 => CertificateMode::Empirical,
        1 => CertificateMode::Inconclusive,
        _ => CertificateMode::Failed,
    };
    let per_vertex_margins: Vec<f64> = sums
        .iter()
        .map(|s| match s.verdict {
            KpVerdict::Violated => s.partial / s.bound,
            _ => s.margin(),
        })
        .collect();
    let worst_margin = per_vertex_margins.iter().copied().fold(0.0, f64::max);
    Ok(KpCertificate {
        eta,
        mode,
        worst_margin,
        per_vertex_margins,
        provenance: format!("per-vertex enumeration up to size {k_max} plus geometric tail"),
    })
}

/// `6 Δ_L Δ_R Λ_R <= (1+Λ_L)^{δ_R/Δ_L}`.
pub fn check_complex_region(
    bounds: &DegreeBounds,
    region: &ComplexRegion,
) -> Result<ConditionCheck, ConditionError> {
    check_bounds(bounds)?;
    let (dl, dr_min, dr_max) = (
        bounds.delta_l_max as f64,
        bounds.delta_r_min as f64,
        bounds.delta_r_max as f64,
    );
    let lhs = 6.0 * dl * dr_max * region.big_lambda_r;
    let rhs = ((dr_min / dl) * region.big_lambda_l.ln_1p()).exp();
    Ok(ConditionCheck::compare(lhs, rhs))
}

pub fn in_region(lam: &Fugacities<num_complex::Complex64>, region: &ComplexRegion) -> bool {
    region.contains(lam)
}

/// `Σ_{k=1}^{terms} s^k / k^{3/2}`, summed from the smallest term up.
pub fn polylog_three_halves(s: f64, terms: usize) -> f64 {
    (1..=terms)
        .rev()
        .map(|k| (k as f64 * s.ln()).exp() / (k as f64).powf(1.5))
        .sum()
}
