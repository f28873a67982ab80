//! Approximate counting and sampling for the bivariate hard-core model on
//! bipartite graphs with unbalanced degrees or fugacities.
//!
//! The hard-core partition function is rewritten as
//! `Z(G) = (1+λ_L)^{|L|} Ξ(P)`, where `Ξ` is the partition function of a
//! polymer model whose polymers are 2-linked subsets of the right side. When
//! the Kotecký–Preiss condition holds, the truncated cluster expansion of
//! `log Ξ` gives a deterministic approximation with an explicit error bound,
//! and ratios of restricted partition functions drive an approximate
//! sampler. Exact enumeration routines serve as ground truth on small
//! graphs.

pub mod cluster;
pub mod conditions;
mod connected;
pub mod counting;
pub mod cumulants;
pub mod graph;
pub mod oracle;
pub mod polymer;
pub mod sampler;
pub mod scalar;

pub use cluster::{
    enumerate_clusters, truncated_expansion, ursell, Cluster, ClusterError, ClusterLimits,
    ExpansionEstimate,
};
pub use conditions::{
    certify_kp, check_complex_region, check_corollary, check_main_condition, CertificateMode,
    ConditionCheck, ConditionError, CorollaryPart, KpCertificate, Verdict,
};
pub use counting::{
    approx_log_z, choose_m, zero_probe, CountError, CountOptions, CountReport, CountResult,
    ZeroProbeReport,
};
pub use cumulants::{
    cumulants_from_moments, decay_experiment, moments_from_cumulants, truncated_cumulant,
    CumulantError, CumulantQuery, DecayError, DecayQuery, DecayRow,
};
pub use graph::{
    BipartiteGraph, DegreeBounds, DegreeProfile, GraphError, GraphFamily, Side, Vertex,
};
pub use oracle::{exact_log_z, exact_xi, exact_z, OracleError, SignedLog};
pub use polymer::{ComplexRegion, Fugacities, Polymer, PolymerError, PolymerSet};
pub use sampler::{
    extend_to_independent_set, sample_independent_set, sample_polymer_config, PolymerConfig,
    PolymerSampler, SamplerBackend, SamplerError, SamplerOptions,
};
pub use scalar::Scalar;
