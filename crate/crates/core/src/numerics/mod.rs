//! Adaptive quadrature, nested 2D integration and Richardson-extrapolated
//! differentiation. Every result carries its own error estimate.

mod diff;
mod gauss;
mod quad;

pub use diff::{
    differentiate, differentiate_with, second_derivative, try_differentiate_with, Derivative, DiffSettings, Stencil,
};
pub use gauss::{gauss_legendre, GaussRule};
pub use quad::{
    integrate_1d, integrate_2d, integrate_semi_infinite, try_integrate_1d, try_integrate_semi_infinite,
    try_integrate_semi_infinite_scaled, Domain,
};

use thiserror::Error;

/// Tolerances and subdivision limits shared by every integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth of a single subinterval.
    pub max_depth: u32,
    /// Growth factor of the cutoff when a semi-infinite integral falls back
    /// to escalating truncation.
    pub tail_cutoff_growth: f64,
}

impl QuadSettings {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self, NumericsError> {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
        .validated()
    }

    /// Tolerances used for the equilibrium and special-function integrals.
    pub fn equilibrium() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-7,
            max_depth: 40,
            tail_cutoff_growth: 2.0,
        }
    }

    /// Looser tolerances for the expensive non-equilibrium integrands.
    pub fn nonequilibrium() -> Self {
        Self {
            abs_tol: 1e-6,
            rel_tol: 1e-5,
            ..Self::equilibrium()
        }
    }

    pub fn with_abs_tol(self, abs_tol: f64) -> Self {
        Self { abs_tol, ..self }
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }

    /// Both tolerances divided by `factor`; used for inner integrals of a
    /// nested scheme.
    pub fn tightened(self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol / factor,
            rel_tol: self.rel_tol / factor,
            ..self
        }
    }

    pub fn validated(self) -> Result<Self, NumericsError> {
        let tol_ok = |t: f64| t.is_finite() && t >= 0.0;
        if !tol_ok(self.abs_tol) || !tol_ok(self.rel_tol) {
            return Err(NumericsError::InvalidSettings("tolerances must be finite and >= 0"));
        }
        if self.abs_tol == 0.0 && self.rel_tol == 0.0 {
            return Err(NumericsError::InvalidSettings(
                "at least one tolerance must be positive",
            ));
        }
        if self.max_depth == 0 {
            return Err(NumericsError::InvalidSettings("max_depth must be >= 1"));
        }
        if !(self.tail_cutoff_growth > 1.0) || !self.tail_cutoff_growth.is_finite() {
            return Err(NumericsError::InvalidSettings("tail_cutoff_growth must be > 1"));
        }
        Ok(self)
    }

    /// Target accuracy for a result of magnitude `value`.
    pub fn tolerance_for(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self::equilibrium()
    }
}

/// A numerical value together with an error estimate and its cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl Estimate {
    pub fn new(value: f64, error: f64, evaluations: usize) -> Self {
        Self {
            value,
            error: error.abs(),
            evaluations,
        }
    }

    /// Exact value with no error (e.g. a closed form).
    pub fn exact(value: f64) -> Self {
        Self::new(value, 0.0, 1)
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            error: self.error * factor.abs(),
            evaluations: self.evaluations,
        }
    }

    /// Whether `reference` lies within the reported error bar.
    pub fn brackets(&self, reference: f64) -> bool {
        (self.value - reference).abs() <= self.error
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;

    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
            evaluations: self.evaluations + rhs.evaluations,
        }
    }
}

impl std::ops::Sub for Estimate {
    type Output = Estimate;

    fn sub(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value - rhs.value,
            error: self.error + rhs.error,
            evaluations: self.evaluations + rhs.evaluations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("tolerance not met: best estimate {} +/- {}", best.value, best.error)]
    ToleranceNotMet { best: Estimate },
    #[error("integrand or function returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
    #[error("divergent tail: contributions not shrinking beyond cutoff {cutoff}")]
    DivergentTail { cutoff: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("invalid settings: {0}")]
    InvalidSettings(&'static str),
}

impl NumericsError {
    /// The best available estimate, if the failure carried one.
    pub fn best_estimate(&self) -> Option<Estimate> {
        match self {
            NumericsError::ToleranceNotMet { best } => Some(*best),
            _ => None,
        }
    }
}
