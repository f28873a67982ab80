use std::io;
use std::path::PathBuf;

use hardcore::{
    ClusterError, ConditionError, CountError, DecayError, GraphError, OracleError, PolymerError,
    SamplerError,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: io::Error },
    #[error("malformed graph in {}: {source}", path.display())]
    MalformedGraph { path: PathBuf, source: GraphError },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Polymer(#[from] PolymerError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Count(#[from] CountError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Decay(#[from] DecayError),
    #[error("cannot start the worker pool: {0}")]
    Threads(String),
}

impl CliError {
    /// True when the input was fine but no certificate backs the request.
    pub fn is_refusal(&self) -> bool {
        matches!(
            self,
            Self::Count(CountError::CertificationFailed { .. } | CountError::RegionFails { .. })
                | Self::Sampler(SamplerError::NotCertified)
                | Self::Decay(DecayError::NotCertified)
        )
    }

    pub fn exit_code(&self) -> u8 {
        if self.is_refusal() {
            2
        } else {
            1
        }
    }

    pub fn kind(&self) -> &'static str {
        if self.is_refusal() {
            return "certification_refused";
        }
        match self {
            Self::Usage(_) => "usage",
            Self::Read { .. } | Self::Write { .. } => "io",
            Self::MalformedGraph { .. } | Self::Graph(_) => "graph",
            _ => "input",
        }
    }
}
