//! Casimir force between plates immersed in an equilibrium photon gas.
//!
//! Everything is a function of the single dimensionless product aT. The
//! thermal sum S(aT) = Σ n³/(e^{nπ/aT} − 1) grows like (aT)⁴/15 and cancels
//! against 16(aT)⁴ in the ratio, so above [`DUAL_SWITCH_RATIO`] the ratio is
//! taken from the modular dual series
//! R(aT) = 3840 (aT)⁴ Σ n³/(e^{4πn·aT} − 1), which has no cancellation.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::kinetics::BoseEinstein;
use crate::numerics::{try_integrate_semi_infinite_scaled, Estimate, NumericsError, QuadSettings};

/// aT above which `ratio_eq` uses the dual series.
pub const DUAL_SWITCH_RATIO: f64 = 2.0;
/// aT above which `thermal_force` uses the dual series.
pub const DUAL_SWITCH_FORCE: f64 = 20.0;
/// Relative size of the last retained series term.
const SERIES_CUTOFF: f64 = 1e-16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriumError {
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("invalid range: need 0 <= min < max and samples >= 2 (got [{min}, {max}], {samples} samples)")]
    InvalidRange { min: f64, max: f64, samples: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPoint {
    pub a_t: f64,
    /// F/F₀ with F₀ the vacuum force.
    pub ratio: f64,
    /// Thermal force F_T·a⁴.
    pub thermal_force_a4: f64,
}

impl EquilibriumPoint {
    pub fn at(a_t: f64) -> Self {
        Self {
            a_t,
            ratio: ratio_eq(a_t),
            thermal_force_a4: thermal_force(a_t),
        }
    }
}

/// Vacuum force F₀a⁴ = −π²/240.
pub fn vacuum_force_a4() -> f64 {
    -PI * PI / 240.0
}

/// Σ_{n≥1} n³ / (e^{n·rate} − 1), stopped once a term drops below
/// 10⁻¹⁶ of the partial sum.
fn bose_cubic_sum(rate: f64) -> f64 {
    let mut sum = 0.0;
    let mut n = 1u32;
    loop {
        let nf = f64::from(n);
        let term = nf * nf * nf / (nf * rate).exp_m1();
        sum += term;
        // Terms fall once n·rate > 3, so only stop on the decaying side.
        if (term <= SERIES_CUTOFF * sum && nf * rate > 3.0) || term == 0.0 || n > 1_000_000 {
            return sum;
        }
        n += 1;
    }
}

/// Σ n³/(e^{nπ/aT} − 1).
fn thermal_sum(a_t: f64) -> f64 {
    if a_t == 0.0 {
        return 0.0;
    }
    bose_cubic_sum(PI / a_t)
}

/// Σ n³/(e^{4πn·aT} − 1).
fn dual_sum(a_t: f64) -> f64 {
    bose_cubic_sum(4.0 * PI * a_t)
}

/// Thermal contribution to the force, F_T·a⁴ =
/// π²(aT)⁴/15 − π² Σ n³/(e^{nπ/aT} − 1). NaN for negative aT.
pub fn thermal_force(a_t: f64) -> f64 {
    if !(a_t >= 0.0) {
        return f64::NAN;
    }
    if a_t <= DUAL_SWITCH_FORCE {
        PI * PI * a_t.powi(4) / 15.0 - PI * PI * thermal_sum(a_t)
    } else {
        PI * PI / 240.0 - 16.0 * PI * PI * a_t.powi(4) * dual_sum(a_t)
    }
}

/// Ratio of the total force to the vacuum force,
/// R(aT) = 1 + 240 Σ n³/(e^{nπ/aT} − 1) − 16(aT)⁴. NaN for negative aT.
pub fn ratio_eq(a_t: f64) -> f64 {
    if !(a_t >= 0.0) {
        return f64::NAN;
    }
    if a_t == 0.0 {
        return 1.0;
    }
    if a_t <= DUAL_SWITCH_RATIO {
        1.0 + 240.0 * thermal_sum(a_t) - 16.0 * a_t.powi(4)
    } else {
        3840.0 * a_t.powi(4) * dual_sum(a_t)
    }
}

/// `ratio_eq` with a rounding-error bound: the direct form loses the size
/// of its largest cancelling term, the dual form keeps full relative
/// precision.
pub fn ratio_eq_estimate(a_t: f64) -> Estimate {
    let value = ratio_eq(a_t);
    let magnitude = if a_t <= DUAL_SWITCH_RATIO {
        1.0 + 240.0 * thermal_sum(a_t) + 16.0 * a_t.powi(4)
    } else {
        value.abs()
    };
    Estimate::new(value, 32.0 * f64::EPSILON * magnitude, 1)
}

/// R for plate separation `a` and temperature `temperature` separately.
pub fn ratio_eq_dimensional(a: f64, temperature: f64) -> f64 {
    ratio_eq(a * temperature)
}

/// (F₀ + F_T)/F₀, the ratio composed from the two forces.
pub fn ratio_from_forces(a_t: f64) -> f64 {
    let f0 = vacuum_force_a4();
    (f0 + thermal_force(a_t)) / f0
}

/// Photon energy density 2∫d³p/(2π)³ ε_p f₊ = (1/π²)∫₀^∞ p³ f₊(p) dp.
pub fn energy_density(temperature: f64, settings: &QuadSettings) -> Result<Estimate, EquilibriumError> {
    let field = BoseEinstein::new(temperature).map_err(|_| EquilibriumError::NonPositiveTemperature(temperature))?;
    let integral = try_integrate_semi_infinite_scaled(
        |p| {
            if p == 0.0 {
                return Ok::<f64, NumericsError>(0.0);
            }
            Ok(p * p * p * field.occupation(p))
        },
        0.0,
        4.0 * temperature,
        settings,
    )?;
    Ok(integral.scaled(1.0 / (PI * PI)))
}

/// Uniform samples of R over [min, max]. A single sample with min == max is
/// allowed and yields that one point.
pub fn eq_curve(min: f64, max: f64, samples: usize) -> Result<Vec<EquilibriumPoint>, EquilibriumError> {
    let invalid = || EquilibriumError::InvalidRange { min, max, samples };
    if !(min >= 0.0 && max.is_finite()) {
        return Err(invalid());
    }
    if samples == 1 && min == max {
        return Ok(vec![EquilibriumPoint::at(min)]);
    }
    if samples < 2 || !(min < max) {
        return Err(invalid());
    }
    let step = (max - min) / (samples - 1) as f64;
    Ok((0..samples)
        .into_par_iter()
        .map(|i| {
            let a_t = if i == samples - 1 { max } else { min + step * i as f64 };
            EquilibriumPoint::at(a_t)
        })
        .collect())
}
