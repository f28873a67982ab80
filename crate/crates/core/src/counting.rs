//! The approximate counting driver and the complex zero probe.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cluster::{
    largest_feasible_cutoff, truncated_expansion, truncation_error_bound, ClusterError,
    ClusterLimits,
};
use crate::conditions::{
    certify_kp, certify_kp_empirical, check_complex_region, CertificateMode, ConditionCheck,
    ConditionError, KpCertificate,
};
use crate::graph::BipartiteGraph;
use crate::oracle::{self, OracleError};
use crate::polymer::{ComplexRegion, Fugacities};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CountError {
    #[error("certification failed; try `exact` (KP certificate {mode:?}, worst margin {worst_margin:.4})")]
    CertificationFailed {
        mode: CertificateMode,
        worst_margin: f64,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cluster enumeration cannot reach even m = 1: {0}")]
    Infeasible(ClusterError),
    #[error("complex region condition fails ({lhs:.6} > {rhs:.6}); the probe would be vacuous")]
    RegionFails { lhs: f64, rhs: f64 },
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// `ceil(ln(n_R/ε)/η)`, at least 1.
pub fn choose_m(n_right: usize, epsilon: f64, eta: f64) -> Result<usize, CountError> {
    if !(epsilon > 0.0 && eta > 0.0 && n_right >= 1) {
        return Err(CountError::InvalidParameter(format!(
            "need epsilon > 0, eta > 0, n_R >= 1; got {epsilon}, {eta}, {n_right}"
        )));
    }
    let m = ((n_right as f64 / epsilon).ln() / eta).ceil();
    Ok(if m >= 1.0 { m as usize } else { 1 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountOptions {
    /// Requested KP decay rate; the analytic certificate may raise it to 0.1.
    pub eta: f64,
    /// Cutoff override; `None` uses [`choose_m`].
    pub m: Option<usize>,
    /// Largest polymer size enumerated by the empirical KP check.
    pub k_max: usize,
    pub limits: ClusterLimits,
}

impl Default for CountOptions {
    fn default() -> Self {
        Self {
            eta: 0.1,
            m: None,
            k_max: 6,
            limits: ClusterLimits::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountResult {
    /// `n_L ln(1+λ_L) + T_m`.
    pub log_z_estimate: f64,
    /// `n_L ln(1+λ_L)`.
    pub log_prefactor: f64,
    /// `T_m`, bit-identical to [`truncated_expansion`] at the same `m`.
    pub expansion: f64,
    pub epsilon: f64,
    pub m_used: usize,
    pub m_required: usize,
    /// True when the cluster cap forced `m_used < m_required`.
    pub degraded: bool,
    pub certificate: KpCertificate,
    /// `n_R e^{−m_used η}`, a bound on `|log Ẑ − log Z|`.
    pub error_bound: f64,
    pub n_left: usize,
    pub n_right: usize,
    pub wall_time: Duration,
}

/// The machine-readable summary of a [`CountResult`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct CountReport {
    pub log_Z_estimate: f64,
    pub epsilon: f64,
    pub m_used: usize,
    pub eta: f64,
    pub certificate_mode: CertificateMode,
    pub error_bound: f64,
    pub n_L: usize,
    pub n_R: usize,
    pub wall_time_ms: f64,
}

impl CountResult {
    pub fn report(&self) -> CountReport {
        CountReport {
            log_Z_estimate: self.log_z_estimate,
            epsilon: self.epsilon,
            m_used: self.m_used,
            eta: self.certificate.eta,
            certificate_mode: self.certificate.mode,
            error_bound: self.error_bound,
            n_L: self.n_left,
            n_R: self.n_right,
            wall_time_ms: self.wall_time.as_secs_f64() * 1e3,
        }
    }
}

/// Certified approximation of `log Z` with `|log Ẑ − log Z| <= ε`, or a
/// refusal when the KP condition cannot be certified.
///
/// When the cluster cap is hit at the required cutoff, the largest feasible
/// cutoff is used instead and the result is flagged `degraded`, carrying its
/// weaker bound.
pub fn approx_log_z(
    graph: &BipartiteGraph,
    lam: &Fugacities,
    epsilon: f64,
    options: &CountOptions,
) -> Result<CountResult, CountError> {
    let start = Instant::now();
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(CountError::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let n_left = graph.n_left();
    let n_right = graph.n_right();
    let log_prefactor = n_left as f64 * lam.lambda_l.ln_1p();

    if n_right == 0 {
        // Ξ = 1: nothing to expand
        let certificate = certify_kp_empirical(graph, lam, options.eta, options.k_max)?;
        return Ok(CountResult {
            log_z_estimate: log_prefactor,
            log_prefactor,
            expansion: 0.0,
            epsilon,
            m_used: 1,
            m_required: 1,
            degraded: false,
            certificate,
            error_bound: 0.0,
            n_left,
            n_right,
            wall_time: start.elapsed(),
        });
    }

    let certificate = certify_kp(graph, lam, options.eta, options.k_max)?;
    if !certificate.is_valid() {
        return Err(CountError::CertificationFailed {
            mode: certificate.mode,
            worst_margin: certificate.worst_margin,
        });
    }
    let m_required = match options.m {
        Some(0) => return Err(ClusterError::InvalidCutoff.into()),
        Some(m) => m,
        None => choose_m(n_right, epsilon, certificate.eta)?,
    };

    let m_used = largest_feasible_cutoff(graph, lam, m_required, options.limits)?.ok_or(
        CountError::Infeasible(ClusterError::CapExceeded {
            cap: options.limits.max_clusters,
            m: 1,
        }),
    )?;
    let estimate = truncated_expansion(graph, lam, m_used, Some(&certificate), options.limits)?;
    let degraded = m_used < m_required;

    Ok(CountResult {
        log_z_estimate: log_prefactor + estimate.value,
        log_prefactor,
        expansion: estimate.value,
        epsilon,
        m_used: estimate.m,
        m_required,
        degraded,
        error_bound: truncation_error_bound(n_right, estimate.m, certificate.eta),
        certificate,
        n_left,
        n_right,
        wall_time: start.elapsed(),
    })
}

/// Where a probe point was drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeLocation {
    /// `|λ_R| = Λ_R` and `|1+λ_L| = 1+Λ_L`.
    Boundary,
    /// Strictly inside both constraints.
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbePoint {
    pub lambda_l: (f64, f64),
    pub lambda_r: (f64, f64),
    pub location: ProbeLocation,
    pub abs_z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroProbeReport {
    pub region: ComplexRegion,
    pub region_check: ConditionCheck,
    pub samples: usize,
    pub min_abs_z: f64,
    pub argmin: Option<ProbePoint>,
    /// Points where `|Z|` vanished to within [`ZERO_TOLERANCE`].
    pub zeros: Vec<ProbePoint>,
}

/// `|Z|` at or below this counts as a zero.
pub const ZERO_TOLERANCE: f64 = 1e-12;

/// The `i`-th probe point. Even indices lie on the boundary torus, odd
/// ones inside: `|λ_R|` uniform over the disc of radius `Λ_R` by area and
/// `|1+λ_L|` in `[1+Λ_L, 5(1+Λ_L)]`.
fn probe_point(
    region: &ComplexRegion,
    index: usize,
    rng: &mut ChaCha8Rng,
) -> (Fugacities<Complex64>, ProbeLocation) {
    let tau = std::f64::consts::TAU;
    let (theta_l, theta_r): (f64, f64) = (rng.gen::<f64>() * tau, rng.gen::<f64>() * tau);
    let (radius_l, radius_r, location) = if index.is_multiple_of(2) {
        (
            1.0 + region.big_lambda_l,
            region.big_lambda_r,
            ProbeLocation::Boundary,
        )
    } else {
        let (u, v): (f64, f64) = (rng.gen(), rng.gen());
        (
            (1.0 + region.big_lambda_l) * (1.0 + 4.0 * u),
            region.big_lambda_r * v.sqrt(),
            ProbeLocation::Interior,
        )
    };
    let lam = Fugacities {
        lambda_l: Complex64::from_polar(radius_l, theta_l) - 1.0,
        lambda_r: Complex64::from_polar(radius_r, theta_r),
    };
    (lam, location)
}

/// Evaluates exact complex `Z` at `samples` points of the region and
/// reports the smallest modulus. Refuses when the region condition fails.
pub fn zero_probe(
    graph: &BipartiteGraph,
    region: &ComplexRegion,
    samples: usize,
    seed: u64,
) -> Result<ZeroProbeReport, CountError> {
    let profile = graph.degree_profile().map_err(ConditionError::from)?;
    let region_check = check_complex_region(&profile.bounds(), region)?;
    if !region_check.holds() {
        return Err(CountError::RegionFails {
            lhs: region_check.lhs,
            rhs: region_check.rhs,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_abs_z = f64::INFINITY;
    let mut argmin = None;
    let mut zeros = Vec::new();
    for i in 0..samples {
        let (lam, location) = probe_point(region, i, &mut rng);
        let abs_z = oracle::exact_z_complex(graph, &lam)?.norm();
        let point = ProbePoint {
            lambda_l: (lam.lambda_l.re, lam.lambda_l.im),
            lambda_r: (lam.lambda_r.re, lam.lambda_r.im),
            location,
            abs_z,
        };
        if abs_z <= ZERO_TOLERANCE {
            zeros.push(point);
        }
        if abs_z < min_abs_z {
            min_abs_z = abs_z;
            argmin = Some(point);
        }
    }
    Ok(ZeroProbeReport {
        region: *region,
        region_check,
        samples,
        min_abs_z,
        argmin,
        zeros,
    })
}
