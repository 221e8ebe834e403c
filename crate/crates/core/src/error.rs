use thiserror::Error;

/// Errors produced by the numerical layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "parameters are not in a canonical gauge (need lambda0 = 0 with a = -1, or lambda0 = 1)"
    )]
    NonCanonicalGauge,

    #[error("branch {branch} of the critical-level map is undefined for a = {a}")]
    BranchUndefined { branch: u8, a: f64 },

    #[error("root polishing failed to converge: {0}")]
    IllConditioned(String),

    #[error("point r = {r} lies outside the positivity band (q(r) = {q})")]
    OutsideBand { r: f64, q: f64 },

    #[error("integral diverges: band endpoint r = {r} has multiplicity {multiplicity}")]
    Divergent { r: f64, multiplicity: u32 },

    #[error("band has zero width (circle level); no arc to integrate")]
    Degenerate,

    #[error("integrand has a non-integrable pole at r = 0")]
    IntegrandPole,

    #[error(
        "quadrature did not reach the requested tolerance (last refinement changed by {0:.3e})"
    )]
    NotConverged(f64),

    #[error("configuration is not in the two-band region")]
    WrongRegion,

    #[error("step control could not meet the per-step error target (h = {0:.3e})")]
    ToleranceFailure(f64),

    #[error("band endpoint has multiplicity >= 2; the drop is exceptional and the piece has unbounded length")]
    Exceptional,

    #[error("fundamental piece did not close within {0:.3} units of arc length")]
    NonClosure(f64),

    #[error("assembled curve endpoint misses the start by {gap:.3e} (tolerance {tol:.3e})")]
    NotClosed { gap: f64, tol: f64 },

    #[error("self-intersection test is ambiguous at the maximum refinement (grid-level contact)")]
    InsufficientResolution,

    #[error("input curve is a circle; the bound degenerates (the denominator integral vanishes)")]
    CircularInput,
}

pub type Result<T> = std::result::Result<T, Error>;
