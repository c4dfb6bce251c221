use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("generation {0} out of range 1..={max}", max = crate::triadic::MAX_LEVEL)]
    GenerationOutOfRange(u32),

    #[error("interval index {index} out of range for generation {generation}")]
    IndexOutOfRange { generation: u32, index: u128 },

    #[error("depth {0} exceeds the exact-arithmetic limit {max}", max = crate::triadic::MAX_LEVEL)]
    DepthOutOfRange(u32),

    #[error("non-finite input {0}")]
    NonFinite(f64),

    #[error("alpha must lie in (0, 1), got {0}")]
    AlphaOutOfRange(f64),

    #[error("triadic arithmetic overflow")]
    Overflow,

    #[error("domain error: {0}")]
    Domain(String),

    /// The certified psi interval is too wide to decide the reflection zone.
    #[error("zone of ({x1}, {x2}) is uncertain at depth {depth}; raise the geometry depth")]
    UncertainZone { x1: f64, x2: f64, depth: u32 },

    #[error("point ({x1}, {x2}) lies on the graph")]
    OnGraph { x1: f64, x2: f64 },

    #[error("differential undefined at ({x1}, {x2})")]
    DerivativeUndefined { x1: f64, x2: f64 },

    #[error("no in-domain cells in the requested window")]
    EmptyMask,

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::GenerationOutOfRange(_) | Error::IndexOutOfRange { .. } => "range",
            Error::DepthOutOfRange(_) => "range",
            Error::NonFinite(_) | Error::AlphaOutOfRange(_) | Error::Domain(_) => "domain",
            Error::Overflow => "overflow",
            Error::UncertainZone { .. } => "uncertain_zone",
            Error::OnGraph { .. } => "on_graph",
            Error::DerivativeUndefined { .. } => "derivative_undefined",
            Error::EmptyMask => "empty_mask",
            Error::Precondition(_) => "precondition",
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}
