//! Semistable degenerations: instances, the page module `V` with its
//! differentials, the per-direction pipeline and instance generators.

pub mod generate;
pub mod instance;
pub mod page;
pub mod pipeline;

pub use generate::{generate, Family};
pub use instance::{DegenerationInstance, StratumHodge, StratumPackage};
pub use page::{build_page, page_dim, PageModule, Summand};
pub use pipeline::{run_pipeline, spectral_pages, DirectionReport, PipelineOptions, PipelineReport, WeightPages, SCOPE_NOTE};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DegenerationError {
    #[error("schema error: {0}")]
    SchemaError(String),
    #[error("purity violation: {0}")]
    PurityViolation(String),
    #[error("hard Lefschetz fails on stratum {stratum}: {detail}")]
    HardLefschetzViolation { stratum: String, detail: String },
    #[error("pairing violation: {0}")]
    PairingViolation(String),
    #[error("Hodge data violation: {0}")]
    HodgeViolation(String),
    #[error("restriction and Gysin maps are not adjoint: {0}")]
    AdjointnessViolation(String),
    #[error("compatibility violation: {0}")]
    CompatibilityViolation(String),
    #[error("page module fails its axioms: {}", .0.join("; "))]
    AxiomFailure(Vec<String>),
    #[error("theorem check failed: {}", .0.join("; "))]
    TheoremCheckFailure(Vec<String>),
    #[error("bad generator parameters: {0}")]
    ParamError(String),
}

impl DegenerationError {
    /// Short stable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            DegenerationError::SchemaError(_) => "SchemaError",
            DegenerationError::PurityViolation(_) => "PurityViolation",
            DegenerationError::HardLefschetzViolation { .. } => "HardLefschetzViolation",
            DegenerationError::PairingViolation(_) => "PairingViolation",
            DegenerationError::HodgeViolation(_) => "HodgeViolation",
            DegenerationError::AdjointnessViolation(_) => "AdjointnessViolation",
            DegenerationError::CompatibilityViolation(_) => "CompatibilityViolation",
            DegenerationError::AxiomFailure(_) => "AxiomFailure",
            DegenerationError::TheoremCheckFailure(_) => "TheoremCheckFailure",
            DegenerationError::ParamError(_) => "ParamError",
        }
    }
}
