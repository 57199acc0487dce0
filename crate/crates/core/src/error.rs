use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite single-particle energy at mode n = {label}")]
    NonFiniteEnergy { label: i64 },

    #[error("gapless Bogoliubov mode at k = {k:.6} (degenerate ground state); perturb mu or the chain length")]
    GaplessMode { k: f64 },

    #[error("eigenvalue {value:e} lies outside [{lo}, {hi}] beyond the clamping tolerance")]
    SpectrumOutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("Majorana spectrum is not paired: {0:e} has no partner {1:e}")]
    UnpairedMajoranaSpectrum(f64, f64),

    #[error("correlation data has no anomalous part; use the number-conserving path")]
    MissingAnomalous,

    #[error("dense Hermitian eigensolver did not converge ({dim}x{dim})")]
    EigenNonConvergence { dim: usize },

    #[error("many-body ground state is degenerate or nearly so (gap {gap:e})")]
    DegenerateGroundState { gap: f64 },

    #[error("at {axis} = {value}: {source}")]
    SweepPoint {
        axis: &'static str,
        value: f64,
        #[source]
        source: Box<Error>,
    },
}
