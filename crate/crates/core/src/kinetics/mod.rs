//! Photon distributions, the tensor structures of the Wigner function and
//! finite-difference checks of the scalar transport and constraint
//! equations.
//!
//! Natural units, metric signature (+,−,−,−). `FourVector` components are
//! contravariant; [`FourVector::lower`] gives the covariant ones.

mod field;
mod residual;
mod tensor;

pub use field::{
    equilibrium_distribution, free_streaming_distribution, BoseEinstein, DistributionField, FieldFn, FreeStreaming,
};
pub use residual::{
    axial_constraint_residual, frame_constraint_residual, transport_residual, wave_residual, RESIDUAL_STEP,
};
pub use tensor::{c_minus, c_plus, currents, energy_momentum_density, levi_civita, IndexPosition, RankTwoTensor};

use std::ops::{Add, Index, Mul, Sub};

use thiserror::Error;

use crate::numerics::NumericsError;

/// The metric diag(1, −1, −1, −1).
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KineticsError {
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("p.u = {0} vanishes; tensor structure is singular")]
    Singular(f64),
    #[error("distribution value must be >= 0, got {0}")]
    NegativeDistribution(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    /// Rest frame of the medium.
    pub const REST_FRAME: FourVector = FourVector([1.0, 0.0, 0.0, 0.0]);

    pub const fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Self([x0, x1, x2, x3])
    }

    pub fn from_time_space(t: f64, x: [f64; 3]) -> Self {
        Self([t, x[0], x[1], x[2]])
    }

    pub fn time(&self) -> f64 {
        self.0[0]
    }

    pub fn spatial(&self) -> [f64; 3] {
        [self.0[1], self.0[2], self.0[3]]
    }

    /// Covariant components x_μ = g_μν x^ν.
    pub fn lower(&self) -> [f64; 4] {
        let mut out = self.0;
        for (c, g) in out.iter_mut().zip(METRIC) {
            *c *= g;
        }
        out
    }

    pub fn dot(&self, other: &FourVector) -> f64 {
        self.0[0] * other.0[0] - self.0[1] * other.0[1] - self.0[2] * other.0[2] - self.0[3] * other.0[3]
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    /// Copy with component `mu` shifted by `h`.
    pub fn shifted(&self, mu: usize, h: f64) -> Self {
        let mut out = *self;
        out.0[mu] += h;
        out
    }
}

impl Index<usize> for FourVector {
    type Output = f64;

    fn index(&self, mu: usize) -> &f64 {
        &self.0[mu]
    }
}

impl Add for FourVector {
    type Output = FourVector;

    fn add(self, rhs: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for FourVector {
    type Output = FourVector;

    fn sub(self, rhs: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;

    fn mul(self, s: f64) -> FourVector {
        FourVector(self.0.map(|c| c * s))
    }
}

/// Photon three-momentum with ε_p = |p| fixed at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnShellMomentum {
    p: [f64; 3],
    energy: f64,
}

impl OnShellMomentum {
    pub fn new(p: [f64; 3]) -> Self {
        let energy = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        Self { p, energy }
    }

    pub fn spatial(&self) -> [f64; 3] {
        self.p
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// (ε_p, p⃗).
    pub fn four_vector(&self) -> FourVector {
        FourVector::from_time_space(self.energy, self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_and_lowering() {
        let v = FourVector::new(2.0, 1.0, -1.0, 0.5);
        assert_eq!(v.lower(), [2.0, -1.0, 1.0, -0.5]);
        assert_eq!(v.norm_sq(), 4.0 - 1.0 - 1.0 - 0.25);
        assert_eq!(FourVector::REST_FRAME.norm_sq(), 1.0);
        assert_eq!((v + v - v * 2.0).0, [0.0; 4]);
    }

    #[test]
    fn on_shell_is_light_like() {
        let k = OnShellMomentum::new([0.3, -1.2, 2.5]);
        assert!(k.four_vector().norm_sq().abs() < 1e-12);
        assert_eq!(k.energy(), (0.09f64 + 1.44 + 6.25).sqrt());
    }
}
