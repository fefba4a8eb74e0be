use thiserror::Error;

use crate::quadrature::QuadratureError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A parameter violates one of its invariants. `constraint` names the
    /// violated condition verbatim, e.g. `gating_window_s > 0`.
    #[error("invalid parameter {name}: constraint `{constraint}` violated (got {value})")]
    InvalidParameter {
        name: String,
        constraint: String,
        value: f64,
    },

    #[error("satellite is at or below the local horizon (zenith angle {zenith_deg:.3} deg)")]
    BelowHorizon { zenith_deg: f64 },

    #[error(transparent)]
    Quadrature(#[from] QuadratureError),

    #[error("wavepackets have different wavelengths ({0} m vs {1} m)")]
    WavelengthMismatch(f64, f64),

    #[error("gating window passes almost nothing (P_gw = {p_gw:e} below floor {floor:e})")]
    DegenerateWindow { p_gw: f64, floor: f64 },

    #[error("{0} is not an accepted success signature")]
    UnacceptedSignature(String),

    #[error("success signatures are not symmetric: {0:?}")]
    SymmetryViolation([f64; 4]),

    #[error("conditional probability undefined: {0}")]
    UndefinedConditional(&'static str),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}

impl Error {
    pub(crate) fn invalid(name: &str, constraint: &str, value: f64) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            constraint: constraint.to_string(),
            value,
        }
    }
}

/// `value > 0`; infinity is accepted (e.g. no turbulence).
pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::invalid(name, &format!("{name} > 0"), value))
    }
}

pub(crate) fn require_non_negative(name: &str, value: f64) -> Result<()> {
    if value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, &format!("{name} >= 0"), value))
    }
}

pub(crate) fn require_probability(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::invalid(name, &format!("0 <= {name} <= 1"), value))
    }
}
