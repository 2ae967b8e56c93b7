//! Casimir force in the freely streaming photon gas.
//!
//! The energy shift is Δ𝓔(τ) = (1/2π)(Σₙ − ∫dn) g(n), τ = t/a, with
//!
//! g(ν) = ∫₀^∞ dp ∫₀¹ dz p ε e^{−√((pτ)² + (εz − νπτ)²)},  ε = √(p² + π²ν²).
//!
//! Substituting b = pτ and u = εz − c with c = νπτ turns g into
//! τ⁻² ∫∫ b e^{−√(b² + u²)} db du over the region −c ≤ u ≤ ε − c. In polar
//! coordinates (b, u) = ρ(cos θ, sin θ) both boundaries give closed-form
//! radial limits (the upper one is a quadratic in ρ), and the radial integral
//! ∫ρ² e^{−ρ} dρ is elementary, so g is a single smooth-by-pieces integral
//! over θ. [`inner_integral_nested`] keeps the direct nested quadrature as
//! an independent check.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use thiserror::Error;

use crate::modesum::{abel_plana_diff, sum_minus_integral_bilateral, ModeFunction, ModesumError, Parity};
use crate::numerics::{
    try_differentiate_with, try_integrate_1d, try_integrate_semi_infinite_scaled, DiffSettings, Estimate,
    NumericsError, QuadSettings,
};
use crate::specfun::ap_kernel;

/// Below this t/a the curve reports the t = 0 closed form instead of the
/// slowly converging mode sum.
pub const SMALL_TIME_THRESHOLD: f64 = 0.05;

/// Relative accuracy of the angular integral behind every g(ν).
const ANGULAR_REL_TOL: f64 = 1e-13;

/// Extra tightening of the mode-sum escalation relative to the caller's
/// tolerances, so finite differences of Δ𝓔 are not dominated by truncation
/// jumps.
const SUM_MARGIN: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoneqError {
    #[error("t/a must be positive for the mode sum, got {0}")]
    NonPositiveTime(f64),
    #[error("invalid range: need 0 <= min < max and samples >= 2 (got [{min}, {max}], {samples} samples)")]
    InvalidRange { min: f64, max: f64, samples: usize },
    #[error(transparent)]
    Modesum(#[from] ModesumError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

impl From<NoneqError> for ModesumError {
    fn from(e: NoneqError) -> Self {
        match e {
            NoneqError::Modesum(m) => m,
            NoneqError::Numerics(n) => ModesumError::Numerics(n),
            other => ModesumError::Numerics(NumericsError::InvalidSettings(match other {
                NoneqError::NonPositiveTime(_) => "t/a must be positive",
                _ => "invalid range",
            })),
        }
    }
}

/// ∫_lo^hi ρ² e^{−ρ} dρ. Differences of the lower mass are used when both
/// limits are small, differences of the upper tail otherwise.
fn radial_mass(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if hi <= 1.0 {
        lower_mass(hi) - lower_mass(lo)
    } else {
        upper_tail_mass(lo) - upper_tail_mass(hi)
    }
}

/// ∫₀^ρ r² e^{−r} dr = 2e^{−ρ} Σ_{k≥3} ρ^k/k!, for ρ ≤ 1.
fn lower_mass(rho: f64) -> f64 {
    let mut term = rho * rho * rho / 6.0;
    let mut series = term;
    let mut k = 3.0;
    while term > 1e-17 * series {
        k += 1.0;
        term *= rho / k;
        series += term;
    }
    2.0 * (-rho).exp() * series
}

/// ∫_ρ^∞ r² e^{−r} dr = e^{−ρ}(ρ² + 2ρ + 2).
fn upper_tail_mass(rho: f64) -> f64 {
    if rho == f64::INFINITY {
        return 0.0;
    }
    (-rho).exp() * (rho * rho + 2.0 * rho + 2.0)
}

/// Radial measure of the integration region along the ray at angle θ,
/// i.e. Σ over its radial intervals of ∫ρ² e^{−ρ} dρ.
fn radial_weight(theta: f64, c: f64, tau: f64) -> f64 {
    let (s, co) = theta.sin_cos();
    // Lower boundary u ≥ −c, i.e. ρ s ≥ −c.
    let (a_lo, a_hi) = if c >= 0.0 {
        if s >= 0.0 {
            (0.0, f64::INFINITY)
        } else {
            (0.0, c / -s)
        }
    } else if s <= 0.0 {
        return 0.0;
    } else {
        (-c / s, f64::INFINITY)
    };
    let clip = |lo: f64, hi: f64| radial_mass(lo.max(a_lo), hi.min(a_hi));

    // Upper boundary τ²(u + c)² ≤ b² + c², a quadratic αρ² + βρ + γ ≤ 0 in ρ.
    let tau2 = tau * tau;
    let alpha = tau2 * s * s - co * co;
    let beta = 2.0 * tau2 * c * s;
    let gamma = c * c * (tau2 - 1.0);
    let inf = f64::INFINITY;
    if c == 0.0 {
        return if alpha <= 0.0 { clip(0.0, inf) } else { 0.0 };
    }
    let reduced = tau2 - co * co;
    if reduced < 0.0 {
        // No real roots; α < 0 here, so the inequality holds for every ρ.
        return clip(0.0, inf);
    }
    let root_disc = 2.0 * c.abs() * reduced.sqrt();
    if alpha == 0.0 {
        if beta == 0.0 {
            return if gamma <= 0.0 { clip(0.0, inf) } else { 0.0 };
        }
        let r = -gamma / beta;
        return if beta > 0.0 { clip(0.0, r) } else { clip(r, inf) };
    }
    let q = -0.5 * (beta + beta.signum() * root_disc);
    let (r1, r2) = if q == 0.0 {
        let r = (-gamma / alpha).max(0.0).sqrt();
        (-r, r)
    } else {
        let (x, y) = (q / alpha, gamma / q);
        (x.min(y), x.max(y))
    };
    if alpha > 0.0 {
        clip(r1.max(0.0), r2)
    } else {
        clip(0.0, r1) + clip(r2.max(0.0), inf)
    }
}

/// Breakpoints of the angular integrand: the ray directions where the
/// quadratic degenerates (α = 0), where its roots merge (cos θ = τ) and θ = 0.
fn angular_breakpoints(tau: f64) -> Vec<f64> {
    let mut points = vec![-FRAC_PI_2, 0.0, FRAC_PI_2];
    let degenerate = (1.0 / tau).atan();
    points.extend([-degenerate, degenerate]);
    if tau < 1.0 {
        let merge = tau.acos();
        points.extend([-merge, merge]);
    }
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

/// Validated t/a for the mode sum.
fn check_time(t_over_a: f64) -> Result<f64, NoneqError> {
    if t_over_a > 0.0 && t_over_a.is_finite() {
        Ok(t_over_a)
    } else {
        Err(NoneqError::NonPositiveTime(t_over_a))
    }
}

/// g(ν) with its quadrature error.
pub fn inner_integral_estimate(n: f64, t_over_a: f64, settings: &QuadSettings) -> Result<Estimate, NoneqError> {
    let tau = check_time(t_over_a)?;
    settings.validated()?;
    let scale = 1.0 / (tau * tau);
    let c = n * PI * tau;
    if c == 0.0 {
        // Region 0 ≤ u ≤ b/τ: the whole radial range for 0 ≤ θ ≤ atan(1/τ).
        return Ok(Estimate::exact(2.0 * scale / (1.0 + tau * tau).sqrt()));
    }
    // A full half-plane carries radial mass 2 on each ray, so 4 τ⁻² bounds g.
    let angular = QuadSettings {
        abs_tol: ANGULAR_REL_TOL.min(settings.abs_tol / scale) * 1e-2,
        rel_tol: ANGULAR_REL_TOL.min(settings.rel_tol),
        ..*settings
    };
    let points = angular_breakpoints(tau);
    let mut total = Estimate::new(0.0, 0.0, 0);
    for w in points.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // θ = lo + (hi − lo)(3x² − 2x³) flattens square-root behaviour at
        // either end of the piece.
        let span = hi - lo;
        let piece = try_integrate_1d(
            |x| {
                let theta = lo + span * x * x * (3.0 - 2.0 * x);
                let jac = span * 6.0 * x * (1.0 - x);
                Ok::<f64, NumericsError>(jac * theta.cos() * radial_weight(theta, c, tau))
            },
            0.0,
            1.0,
            &angular,
        )?;
        total = total + piece;
    }
    Ok(total.scaled(scale))
}

/// g(n) = ∫₀^∞ dp ∫₀¹ dz p ε e^{−√((pτ)² + (εz − nπτ)²)} for real n.
pub fn inner_integral(n: f64, t_over_a: f64, settings: &QuadSettings) -> Result<f64, NoneqError> {
    inner_integral_estimate(n, t_over_a, settings).map(|e| e.value)
}

/// The same double integral by direct nested quadrature: z inner, p outer
/// on a semi-infinite map of scale a/t. Slow; used for cross-checks.
pub fn inner_integral_nested(n: f64, t_over_a: f64, settings: &QuadSettings) -> Result<Estimate, NoneqError> {
    let tau = check_time(t_over_a)?;
    let c = n * PI * tau;
    let inner_settings = settings.tightened(10.0);
    let outer = try_integrate_semi_infinite_scaled(
        |p| {
            if p == 0.0 {
                return Ok(0.0);
            }
            let eps = (p * p + PI * PI * n * n).sqrt();
            let b = p * tau;
            // The exponent peaks at z = c/ε; split there.
            let peak = (c / eps).clamp(0.0, 1.0);
            let integrand = |z: f64| {
                let u = eps * z - c;
                Ok::<f64, NoneqError>(p * eps * (-(b * b + u * u).sqrt()).exp())
            };
            let mut sum = 0.0;
            for (lo, hi) in [(0.0, peak), (peak, 1.0)] {
                if hi > lo {
                    sum += try_integrate_1d(integrand, lo, hi, &inner_settings)?.value;
                }
            }
            Ok::<f64, NoneqError>(sum)
        },
        0.0,
        1.0 / tau,
        settings,
    )?;
    Ok(outer)
}

/// Mode function n ↦ g(n) at fixed t/a.
struct ModeIntegrand {
    tau: f64,
    settings: QuadSettings,
}

impl ModeFunction for ModeIntegrand {
    fn eval(&self, n: f64) -> f64 {
        inner_integral(n, self.tau, &self.settings).unwrap_or(f64::NAN)
    }

    fn parity(&self) -> Parity {
        Parity::None
    }

    /// g approaches its limits at rate π·min(τ, |1 − τ|) per mode.
    fn decay_hint(&self) -> Option<f64> {
        let rate = PI * self.tau.min((1.0 - self.tau).abs());
        Some((8.0 / rate).min(256.0))
    }

    fn cell_difference(&self, n: f64, settings: &QuadSettings) -> Result<Estimate, ModesumError> {
        let centre = inner_integral(n, self.tau, &self.settings)?;
        let cell = QuadSettings {
            abs_tol: settings.abs_tol,
            rel_tol: 1e-10,
            ..*settings
        };
        try_integrate_1d(
            |s| {
                let plus = inner_integral(n + s, self.tau, &self.settings)?;
                let minus = inner_integral(n - s, self.tau, &self.settings)?;
                Ok::<f64, ModesumError>(2.0 * centre - plus - minus)
            },
            0.0,
            0.5,
            &cell,
        )
    }
}

/// Δ𝓔(t/a) = (1/2π)(Σₙ − ∫dn) g(n) for t/a > 0.
pub fn delta_e(t_over_a: f64, settings: &QuadSettings) -> Result<Estimate, NoneqError> {
    let tau = check_time(t_over_a)?;
    let settings = settings.validated()?;
    let modes = ModeIntegrand { tau, settings };
    let sum = sum_minus_integral_bilateral(&modes, &settings.tightened(SUM_MARGIN))?;
    let estimate = Estimate::new(sum.value, sum.tail_error, sum.n_truncation as usize).scaled(0.5 / PI);
    if estimate.error > settings.tolerance_for(estimate.value) {
        return Err(NumericsError::ToleranceNotMet { best: estimate }.into());
    }
    Ok(estimate)
}

/// Δ𝓔 at t = 0 from the Abel–Plana closed form,
/// −2π ∫₀^∞ [πx²/4 − x(I₁(πx) − L₁(πx))/2] / (e^{2πx} − 1) dx.
pub fn delta_e_zero(settings: &QuadSettings) -> Result<Estimate, NoneqError> {
    let integral = abel_plana_diff(ap_kernel, 0.0, &settings.validated()?.tightened(100.0))?;
    Ok(integral.scaled(-2.0 * PI))
}

/// Limit of the mode sum itself as t/a → 0⁺. The summand tends to
/// −(1 + π|n|) e^{−π|n|}/(2π), whose regularized sum is elementary.
pub fn delta_e_small_time_limit() -> f64 {
    let x = (-PI).exp();
    let sum = 1.0 + 2.0 * x / (1.0 - x) + 2.0 * PI * x / ((1.0 - x) * (1.0 - x));
    -sum / (2.0 * PI) + 2.0 / (PI * PI)
}

/// Where Δ𝓔 of a [`NoneqPoint`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaSource {
    /// Mode sum with a finite-difference derivative.
    ModeSum,
    /// The t = 0 closed form, used at t/a = 0 and, with a continuity
    /// warning, below [`SMALL_TIME_THRESHOLD`].
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoneqPoint {
    pub t_over_a: f64,
    pub delta_e: f64,
    pub delta_e_error: f64,
    /// ∂Δ𝓔/∂(t/a).
    pub d_delta: f64,
    pub d_delta_error: f64,
    /// F/F₀ = 1 − (240/π²)(3Δ𝓔 + t/a ∂Δ𝓔/∂(t/a)), computed from the stored
    /// fields.
    pub ratio: f64,
    pub ratio_error: f64,
    pub source: DeltaSource,
}

impl NoneqPoint {
    fn new(t_over_a: f64, delta: Estimate, derivative: Estimate, source: DeltaSource) -> Self {
        let k = 240.0 / (PI * PI);
        Self {
            t_over_a,
            delta_e: delta.value,
            delta_e_error: delta.error,
            d_delta: derivative.value,
            d_delta_error: derivative.error,
            ratio: ratio_from_fields(t_over_a, delta.value, derivative.value),
            ratio_error: k * (3.0 * delta.error + t_over_a * derivative.error),
            source,
        }
    }

    /// Whether the closed form stood in for a small positive t/a.
    pub fn continuity_warning(&self) -> bool {
        self.source == DeltaSource::ClosedForm && self.t_over_a > 0.0
    }
}

/// 1 − (240/π²)(3Δ𝓔 + ∂Δ𝓔 · t/a).
pub fn ratio_from_fields(t_over_a: f64, delta_e: f64, d_delta: f64) -> f64 {
    1.0 - 240.0 / (PI * PI) * (3.0 * delta_e + d_delta * t_over_a)
}

/// Finite-difference step for ∂Δ𝓔/∂(t/a).
pub fn derivative_step(t_over_a: f64) -> f64 {
    (0.02 * t_over_a).max(0.01)
}

fn derivative_settings(t_over_a: f64) -> DiffSettings {
    DiffSettings::default()
        .with_step(derivative_step(t_over_a))
        .with_levels(2)
        .with_lower_bound(0.0)
}

fn closed_form_point(t_over_a: f64, settings: &QuadSettings) -> Result<NoneqPoint, NoneqError> {
    let zero = delta_e_zero(settings)?;
    Ok(NoneqPoint::new(
        t_over_a,
        zero,
        Estimate::exact(0.0),
        DeltaSource::ClosedForm,
    ))
}

/// The force ratio at one time.
pub fn ratio_noneq(t_over_a: f64, settings: &QuadSettings) -> Result<NoneqPoint, NoneqError> {
    if !(t_over_a >= 0.0 && t_over_a.is_finite()) {
        return Err(NoneqError::NonPositiveTime(t_over_a));
    }
    if t_over_a < SMALL_TIME_THRESHOLD {
        return closed_form_point(t_over_a, settings);
    }
    let delta = delta_e(t_over_a, settings)?;
    let derivative = try_differentiate_with(
        |t| delta_e(t, settings).map(|e| e.value),
        t_over_a,
        &derivative_settings(t_over_a),
    )?;
    Ok(NoneqPoint::new(
        t_over_a,
        delta,
        derivative.estimate,
        DeltaSource::ModeSum,
    ))
}

/// A sampled curve with the spline cross-check of the derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct NoneqCurve {
    pub points: Vec<NoneqPoint>,
    /// Largest |finite-difference − spline| derivative over interior mode-sum
    /// samples; NaN when fewer than four such samples exist.
    pub spline_derivative_gap: f64,
}

fn sample_grid(min: f64, max: f64, samples: usize) -> Result<Vec<f64>, NoneqError> {
    let invalid = || NoneqError::InvalidRange { min, max, samples };
    if !(min >= 0.0 && max.is_finite()) {
        return Err(invalid());
    }
    if samples == 1 && min == max {
        return Ok(vec![min]);
    }
    if samples < 2 || !(min < max) {
        return Err(invalid());
    }
    let step = (max - min) / (samples - 1) as f64;
    Ok((0..samples)
        .map(|i| if i == samples - 1 { max } else { min + step * i as f64 })
        .collect())
}

/// Stencil abscissae used by the two-level central difference at `t`.
fn stencil(t: f64) -> [f64; 4] {
    let h = derivative_step(t);
    [t - h, t + h, t - 0.5 * h, t + 0.5 * h]
}

/// Central difference with one Richardson step from the four stencil values.
fn stencil_derivative(t: f64, values: [f64; 4], errors: [f64; 4]) -> Estimate {
    let h = derivative_step(t);
    let coarse = (values[1] - values[0]) / (2.0 * h);
    let fine = (values[3] - values[2]) / h;
    let value = fine + (fine - coarse) / 3.0;
    let noise = (errors[0] + errors[1]) / (2.0 * h) + (errors[2] + errors[3]) / h;
    Estimate::new(value, (value - fine).abs() + 2.0 * noise, 4)
}

/// Δ𝓔 on `[min, max]`. Every Δ𝓔 needed by the samples and their derivative
/// stencils is collected into one deduplicated grid and evaluated once.
pub fn noneq_curve_detailed(
    min: f64,
    max: f64,
    samples: usize,
    settings: &QuadSettings,
) -> Result<NoneqCurve, NoneqError> {
    let grid = sample_grid(min, max, samples)?;
    let mut needed: Vec<f64> = Vec::new();
    for &t in &grid {
        if t >= SMALL_TIME_THRESHOLD {
            needed.push(t);
            needed.extend(stencil(t));
        }
    }
    needed.sort_by(f64::total_cmp);
    needed.dedup();
    let values: Vec<Estimate> = needed
        .par_iter()
        .map(|&t| delta_e(t, settings))
        .collect::<Result<_, _>>()?;
    let lookup = |t: f64| {
        let i = needed
            .binary_search_by(|x| x.total_cmp(&t))
            .expect("stencil point evaluated");
        values[i]
    };
    let zero = if grid.iter().any(|&t| t < SMALL_TIME_THRESHOLD) {
        Some(delta_e_zero(settings)?)
    } else {
        None
    };
    let points: Vec<NoneqPoint> = grid
        .iter()
        .map(|&t| match zero {
            Some(z) if t < SMALL_TIME_THRESHOLD => NoneqPoint::new(t, z, Estimate::exact(0.0), DeltaSource::ClosedForm),
            _ => {
                let s = stencil(t).map(lookup);
                let d = stencil_derivative(t, s.map(|e| e.value), s.map(|e| e.error));
                NoneqPoint::new(t, lookup(t), d, DeltaSource::ModeSum)
            }
        })
        .collect();
    let gap = spline_gap(&points);
    Ok(NoneqCurve {
        points,
        spline_derivative_gap: gap,
    })
}

/// Sampled force ratio over `[min, max]`, in grid order.
pub fn noneq_curve(min: f64, max: f64, samples: usize, settings: &QuadSettings) -> Result<Vec<NoneqPoint>, NoneqError> {
    noneq_curve_detailed(min, max, samples, settings).map(|c| c.points)
}

fn spline_gap(points: &[NoneqPoint]) -> f64 {
    let numeric: Vec<&NoneqPoint> = points.iter().filter(|p| p.source == DeltaSource::ModeSum).collect();
    if numeric.len() < 4 {
        return f64::NAN;
    }
    let xs: Vec<f64> = numeric.iter().map(|p| p.t_over_a).collect();
    let ys: Vec<f64> = numeric.iter().map(|p| p.delta_e).collect();
    let slopes = natural_spline_slopes(&xs, &ys);
    numeric
        .iter()
        .zip(&slopes)
        .skip(1)
        .take(numeric.len() - 2)
        .map(|(p, s)| (p.d_delta - s).abs())
        .fold(0.0, f64::max)
}

/// First derivatives at the knots of the natural cubic spline through
/// (xs, ys).
pub fn natural_spline_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    assert!(n >= 2 && ys.len() == n, "spline needs matching abscissae and values");
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    // Second derivatives m with m₀ = m_{n−1} = 0 by the Thomas algorithm.
    let mut m = vec![0.0; n];
    if n > 2 {
        let size = n - 2;
        let mut diag = vec![0.0; size];
        let mut rhs = vec![0.0; size];
        for i in 0..size {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h[i + 1] - (ys[i + 1] - ys[i]) / h[i]);
        }
        for i in 1..size {
            let w = h[i] / diag[i - 1];
            diag[i] -= w * h[i];
            rhs[i] -= w * rhs[i - 1];
        }
        m[size] = rhs[size - 1] / diag[size - 1];
        for i in (0..size - 1).rev() {
            m[i + 1] = (rhs[i] - h[i + 1] * m[i + 2]) / diag[i];
        }
    }
    (0..n)
        .map(|i| {
            if i + 1 < n {
                (ys[i + 1] - ys[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0
            } else {
                (ys[i] - ys[i - 1]) / h[i - 1] + h[i - 1] * (m[i - 1] + 2.0 * m[i]) / 6.0
            }
        })
        .collect()
}
