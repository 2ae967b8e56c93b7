//! Regularized differences between a sum over discrete cavity modes and the
//! corresponding integral, (Σₙ − ∫dn) g.
//!
//! The default strategy pairs each integer n with its unit cell
//! [n − ½, n + ½] and sums the cell differences `g(n) − ∫ g`, which decay as
//! fast as g'' does. The truncation N starts at 16 and doubles until the
//! total changes by less than the tolerance; the remaining tail is estimated
//! by the Euler–Maclaurin midpoint correction.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::numerics::{try_integrate_1d, try_integrate_semi_infinite_scaled, Estimate, NumericsError, QuadSettings};

const INITIAL_TRUNCATION: u64 = 16;
const MAX_TRUNCATION: u64 = 1 << 18;
/// Consecutive non-shrinking escalation steps tolerated before giving up.
const MAX_STALLS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModesumError {
    #[error("regularization failed: cell differences not decaying (N = {n_truncation}, last change {last_change})")]
    RegularizationFailed { n_truncation: u64, last_change: f64 },
    #[error("mode function returned a non-finite value at n = {n}")]
    NonFinite { n: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Summand of a mode sum, as a function of the continuous mode index n.
pub trait ModeFunction: Sync {
    fn eval(&self, n: f64) -> f64;

    fn parity(&self) -> Parity {
        Parity::None
    }

    /// Rough number of modes over which g approaches its asymptote; sets the
    /// initial truncation.
    fn decay_hint(&self) -> Option<f64> {
        None
    }

    /// `g(n) − ∫_{n−½}^{n+½} g(ν) dν`, integrated as
    /// `∫₀^{½} [2g(n) − g(n+s) − g(n−s)] ds` so the tolerance applies to the
    /// difference itself.
    fn cell_difference(&self, n: f64, settings: &QuadSettings) -> Result<Estimate, ModesumError> {
        let centre = checked_eval(self, n)?;
        try_integrate_1d(
            |s| {
                let plus = checked_eval(self, n + s)?;
                let minus = checked_eval(self, n - s)?;
                Ok(2.0 * centre - plus - minus)
            },
            0.0,
            0.5,
            settings,
        )
    }

    /// `g(0) − ∫₀^{½} g(ν) dν`, the first cell of the half-line sum.
    fn half_cell_difference(&self, settings: &QuadSettings) -> Result<Estimate, ModesumError> {
        let g0 = checked_eval(self, 0.0)?;
        let rest = try_integrate_1d(
            |s| Ok::<_, ModesumError>(g0 - checked_eval(self, s)?),
            0.0,
            0.5,
            settings,
        )?;
        Ok(rest + Estimate::exact(0.5 * g0))
    }

    /// First and third derivative of g at `n`, for the tail correction.
    fn edge_derivatives(&self, n: f64) -> Result<(f64, f64), ModesumError> {
        let h = 0.25;
        let f = |k: f64| checked_eval(self, n + k * h);
        let (p2, p1, m1, m2) = (f(2.0)?, f(1.0)?, f(-1.0)?, f(-2.0)?);
        let first = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
        let third = (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h);
        Ok((first, third))
    }
}

fn checked_eval<G: ModeFunction + ?Sized>(g: &G, n: f64) -> Result<f64, ModesumError> {
    let v = g.eval(n);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ModesumError::NonFinite { n })
    }
}

/// A mode function built from a closure.
pub struct ModeFn<F> {
    f: F,
    parity: Parity,
    decay_hint: Option<f64>,
}

impl<F: Fn(f64) -> f64 + Sync> ModeFn<F> {
    pub fn new(f: F) -> Self {
        Self {
            f,
            parity: Parity::None,
            decay_hint: None,
        }
    }

    pub fn with_parity(self, parity: Parity) -> Self {
        Self { parity, ..self }
    }

    pub fn with_decay_hint(self, hint: f64) -> Self {
        Self {
            decay_hint: Some(hint),
            ..self
        }
    }
}

impl<F: Fn(f64) -> f64 + Sync> ModeFunction for ModeFn<F> {
    fn eval(&self, n: f64) -> f64 {
        (self.f)(n)
    }

    fn parity(&self) -> Parity {
        self.parity
    }

    fn decay_hint(&self) -> Option<f64> {
        self.decay_hint
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizedDiff {
    pub value: f64,
    /// Size of the last escalation step plus accumulated quadrature error.
    pub tail_error: f64,
    pub n_truncation: u64,
}

/// Σₙ g(n) − ∫ g over n > N, from the midpoint Euler–Maclaurin expansion.
fn upper_tail<G: ModeFunction + ?Sized>(g: &G, n: u64) -> Result<f64, ModesumError> {
    let (d1, d3) = g.edge_derivatives(n as f64 + 0.5)?;
    Ok(d1 / 24.0 - 7.0 * d3 / 5760.0)
}

/// Same for n < −N, by reflection.
fn lower_tail<G: ModeFunction + ?Sized>(g: &G, n: u64) -> Result<f64, ModesumError> {
    let (d1, d3) = g.edge_derivatives(-(n as f64) - 0.5)?;
    Ok(-d1 / 24.0 + 7.0 * d3 / 5760.0)
}

fn initial_truncation<G: ModeFunction + ?Sized>(g: &G) -> u64 {
    let mut n = INITIAL_TRUNCATION;
    if let Some(hint) = g.decay_hint().filter(|h| h.is_finite() && *h > 0.0) {
        while (n as f64) < hint && n < MAX_TRUNCATION {
            n *= 2;
        }
    }
    n
}

/// Weighted cell differences, evaluated in parallel and summed in index
/// order. Also returns the largest unweighted difference among the last
/// `edge` cells, the outermost ones.
fn batch<G: ModeFunction + ?Sized>(
    g: &G,
    cells: &[(f64, f64)],
    edge: usize,
    settings: &QuadSettings,
) -> Result<(Estimate, f64), ModesumError> {
    let values: Vec<Estimate> = cells
        .par_iter()
        .map(|&(n, _)| g.cell_difference(n, settings))
        .collect::<Result<_, _>>()?;
    let outer = values
        .iter()
        .rev()
        .take(edge)
        .map(|e| e.value.abs())
        .fold(0.0, f64::max);
    let sum = values
        .into_iter()
        .zip(cells)
        .fold(Estimate::new(0.0, 0.0, 0), |acc, (c, &(_, w))| acc + c.scaled(w));
    Ok((sum, outer))
}

/// Doubles N until the regularized total settles. `cells(lo, hi)` lists the
/// cells with lo ≤ |n| ≤ hi in order, `edge` of them per |n|.
fn escalate<G, C, T>(
    g: &G,
    settings: &QuadSettings,
    first: Estimate,
    edge: usize,
    cells: C,
    tails: T,
) -> Result<RegularizedDiff, ModesumError>
where
    G: ModeFunction + ?Sized,
    C: Fn(u64, u64) -> Vec<(f64, f64)>,
    T: Fn(u64) -> Result<f64, ModesumError>,
{
    let settings = settings.validated()?;
    let cell_settings = settings.tightened(10.0);
    let mut n = initial_truncation(g);
    let (mut partial, mut outer) = batch(g, &cells(1, n), edge, &cell_settings)?;
    partial = first + partial;
    let mut total = partial.value + tails(n)?;
    let mut previous_change = f64::INFINITY;
    let mut stalls = 0;
    loop {
        let next = 2 * n;
        let (added, new_outer) = batch(g, &cells(n + 1, next), edge, &cell_settings)?;
        partial = partial + added;
        let new_total = partial.value + tails(next)?;
        let change = (new_total - total).abs();
        n = next;
        total = new_total;
        let tolerance = settings.tolerance_for(total);
        // The tail correction can absorb polynomial growth, so check the
        // cells themselves as well.
        let cells_decaying = new_outer <= cell_settings.abs_tol || new_outer < outer;
        if !cells_decaying {
            return Err(ModesumError::RegularizationFailed {
                n_truncation: n,
                last_change: change,
            });
        }
        outer = new_outer;
        if change <= tolerance {
            return Ok(RegularizedDiff {
                value: total,
                tail_error: change + partial.error,
                n_truncation: n,
            });
        }
        if change >= previous_change {
            stalls += 1;
        } else {
            stalls = 0;
        }
        if stalls >= MAX_STALLS || n >= MAX_TRUNCATION {
            return Err(ModesumError::RegularizationFailed {
                n_truncation: n,
                last_change: change,
            });
        }
        previous_change = change;
    }
}

/// (Σ_{n=−∞}^{∞} − ∫_{−∞}^{∞} dn) g by cell pairing.
pub fn sum_minus_integral_bilateral<G: ModeFunction + ?Sized>(
    g: &G,
    settings: &QuadSettings,
) -> Result<RegularizedDiff, ModesumError> {
    let cell_settings = settings.tightened(10.0);
    match g.parity() {
        Parity::Odd => {
            settings.validated()?;
            Ok(RegularizedDiff {
                value: 0.0,
                tail_error: 0.0,
                n_truncation: 0,
            })
        }
        // Each positive cell stands for itself and its mirror image.
        Parity::Even => escalate(
            g,
            settings,
            g.cell_difference(0.0, &cell_settings)?,
            1,
            |lo, hi| (lo..=hi).map(|n| (n as f64, 2.0)).collect(),
            |n| Ok(2.0 * upper_tail(g, n)?),
        ),
        Parity::None => escalate(
            g,
            settings,
            g.cell_difference(0.0, &cell_settings)?,
            2,
            |lo, hi| (lo..=hi).flat_map(|n| [(n as f64, 1.0), (-(n as f64), 1.0)]).collect(),
            |n| Ok(upper_tail(g, n)? + lower_tail(g, n)?),
        ),
    }
}

/// (Σ_{n=0}^{∞} − ∫₀^{∞} dn) g with the n = 0 term at full weight.
pub fn sum_minus_integral_halfline<G: ModeFunction + ?Sized>(
    g: &G,
    settings: &QuadSettings,
) -> Result<RegularizedDiff, ModesumError> {
    let cell_settings = settings.tightened(10.0);
    escalate(
        g,
        settings,
        g.half_cell_difference(&cell_settings)?,
        1,
        |lo, hi| (lo..=hi).map(|n| (n as f64, 1.0)).collect(),
        |n| upper_tail(g, n),
    )
}

/// `g0/2 + ∫₀^∞ kernel(y) / (e^{2πy} − 1) dy`: the Abel–Plana form of
/// (Σ_{n≥0} − ∫₀^∞) g, with the analytic continuation already folded into
/// `kernel`.
pub fn abel_plana_diff<K>(kernel: K, g0: f64, settings: &QuadSettings) -> Result<Estimate, NumericsError>
where
    K: Fn(f64) -> f64,
{
    let integral = try_integrate_semi_infinite_scaled(
        |y| {
            let k = kernel(y);
            if k == 0.0 {
                return Ok::<f64, NumericsError>(0.0);
            }
            Ok(k / (2.0 * PI * y).exp_m1())
        },
        0.0,
        1.0 / (2.0 * PI),
        settings,
    )?;
    Ok(integral + Estimate::exact(0.5 * g0))
}

/// Dimensionless vacuum energy variation a³ΔE_vac.
///
/// With the zero-point factor ½ for each of the two polarizations, the
/// transverse momentum integral in zeta regularization gives
/// ∫d²p/(2π)² ε = −m³/(6π) for m = nπ/a, so a³ΔE = −(π²/6)(Σ − ∫) n³.
/// The n = 0 term vanishes, so its weight does not matter here.
pub fn vacuum_energy_variation() -> f64 {
    let settings = QuadSettings::equilibrium().tightened(100.0);
    let diff = abel_plana_diff(|y| 2.0 * y * y * y, 0.0, &settings)
        .map(|e| e.value)
        .unwrap_or(1.0 / 120.0);
    -PI * PI / 6.0 * diff
}
