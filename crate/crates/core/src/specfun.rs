//! Modified Bessel function I₁, modified Struve function L₁ and the
//! Abel–Plana kernel built from their difference.
//!
//! Both functions grow like e^z/√(2πz) while their difference I₁ − L₁ stays
//! bounded (it tends to 2/π). The kernel only needs the difference, so it is
//! evaluated in three regimes:
//!
//! * `z ≤ 8`: ascending power series of both functions;
//! * `8 < z ≤ 25`: the Laplace-type integral
//!   `I₁(z) − L₁(z) = (2z/π) ∫₀^{π/2} sin²θ e^{−z cos θ} dθ`, which has no
//!   cancellation;
//! * `z > 25`: the asymptotic series of `L₁(z) − I₁(z)` in powers of `(2/z)²`.

use std::f64::consts::{FRAC_2_PI, PI};
use std::sync::OnceLock;

use thiserror::Error;

use crate::numerics::{gauss_legendre, GaussRule};

/// Argument where the kernel switches from power series to the integral
/// representation, in units of x (z = πx).
pub const KERNEL_SERIES_CROSSOVER: f64 = SERIES_LIMIT_Z / PI;
/// Argument where the kernel switches to the asymptotic difference series.
pub const KERNEL_ASYMPTOTIC_CROSSOVER: f64 = ASYMPTOTIC_LIMIT_Z / PI;

const SERIES_LIMIT_Z: f64 = 8.0;
const ASYMPTOTIC_LIMIT_Z: f64 = 25.0;
/// Beyond this the Bessel power series is replaced by Hankel's expansion.
const BESSEL_SERIES_LIMIT: f64 = 30.0;
/// I₁(z) overflows an f64 just above z ≈ 713.98.
pub const BESSEL_OVERFLOW_ARG: f64 = 713.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecfunError {
    #[error("argument {0} outside the domain x >= 0")]
    Domain(f64),
    #[error("argument {0} overflows; use the scaled difference form")]
    Range(f64),
}

/// A function value with an estimate of its relative error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecfunResult {
    pub value: f64,
    pub est_rel_err: f64,
}

fn check_arg(x: f64) -> Result<(), SpecfunError> {
    if !(x >= 0.0) {
        return Err(SpecfunError::Domain(x));
    }
    if x > BESSEL_OVERFLOW_ARG {
        return Err(SpecfunError::Range(x));
    }
    Ok(())
}

/// Σ_k (z/2)^{2k+ν} / (k! (k+ν)!) for integer order ν; all terms positive.
fn bessel_i_series(order: u32, z: f64) -> SpecfunResult {
    let half = 0.5 * z;
    let mut term = half.powi(order as i32) / (1..=order).map(f64::from).product::<f64>();
    let q = half * half;
    let mut sum = term;
    let mut k = 0u32;
    while term > f64::EPSILON * 0.25 * sum {
        k += 1;
        term *= q / (f64::from(k) * f64::from(k + order));
        sum += term;
        if k > 2000 {
            break;
        }
    }
    SpecfunResult {
        value: sum,
        est_rel_err: f64::EPSILON * (2.0 + 0.5 * f64::from(k).sqrt()),
    }
}

/// Hankel expansion e^z/√(2πz) Σ (−1)^k a_k(ν)/z^k, dropping the
/// exponentially small second solution.
fn bessel_i_asymptotic(order: u32, z: f64) -> SpecfunResult {
    let mu = 4.0 * f64::from(order * order);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut last = 1.0;
    for k in 1..60 {
        let kf = f64::from(k);
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu - odd * odd) / (kf * 8.0 * z);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        last = term.abs();
        if last < 0.25 * f64::EPSILON * sum.abs() {
            break;
        }
    }
    let prefactor = (z - 0.5 * (2.0 * PI * z).ln()).exp();
    SpecfunResult {
        value: prefactor * sum,
        est_rel_err: last / sum.abs() + 4.0 * f64::EPSILON * (1.0 + z * f64::EPSILON),
    }
}

fn bessel_i(order: u32, x: f64) -> Result<SpecfunResult, SpecfunError> {
    check_arg(x)?;
    if x <= BESSEL_SERIES_LIMIT {
        Ok(bessel_i_series(order, x))
    } else {
        Ok(bessel_i_asymptotic(order, x))
    }
}

/// Modified Bessel function I₁(x) with its error estimate.
pub fn bessel_i1_detailed(x: f64) -> Result<SpecfunResult, SpecfunError> {
    bessel_i(1, x)
}

/// Modified Bessel function of the first kind of order one, x ≥ 0.
pub fn bessel_i1(x: f64) -> Result<f64, SpecfunError> {
    bessel_i1_detailed(x).map(|r| r.value)
}

#[cfg(test)]
pub(crate) fn bessel_i0(x: f64) -> Result<f64, SpecfunError> {
    bessel_i(0, x).map(|r| r.value)
}

#[cfg(test)]
pub(crate) fn bessel_i2(x: f64) -> Result<f64, SpecfunError> {
    bessel_i(2, x).map(|r| r.value)
}

/// Σ_k (z/2)^{2k+2} / (Γ(k+3/2) Γ(k+5/2)), with the half-integer gamma
/// values carried through the term ratio.
fn struve_l1_series(z: f64) -> SpecfunResult {
    let q = 0.25 * z * z;
    // Γ(3/2) Γ(5/2) = 3π/8
    let mut term = q * 8.0 / (3.0 * PI);
    let mut sum = term;
    let mut k = 0u32;
    while term > 0.25 * f64::EPSILON * sum {
        let kf = f64::from(k);
        term *= q / ((kf + 1.5) * (kf + 2.5));
        sum += term;
        k += 1;
        if k > 2000 {
            break;
        }
    }
    SpecfunResult {
        value: sum,
        est_rel_err: f64::EPSILON * (2.0 + 0.5 * f64::from(k).sqrt()),
    }
}

/// Asymptotic series of L₁(z) − I₁(z) = Σ c_k (2/z)^{2k}, with
/// c_k = (−1)^{k+1} Γ(k+½) / (π Γ(3/2−k)).
fn struve_minus_bessel_asymptotic(z: f64) -> SpecfunResult {
    let w = (2.0 / z).powi(2);
    let mut coeff = -FRAC_2_PI;
    let mut power = 1.0;
    let mut sum = coeff;
    let mut last = coeff.abs();
    for k in 0..200 {
        let kf = f64::from(k);
        coeff *= -(kf + 0.5) * (0.5 - kf);
        power *= w;
        let term = coeff * power;
        if term.abs() >= last {
            break;
        }
        sum += term;
        last = term.abs();
        if last < 0.25 * f64::EPSILON * sum.abs() {
            break;
        }
    }
    SpecfunResult {
        value: sum,
        est_rel_err: last / sum.abs() + 2.0 * f64::EPSILON,
    }
}

fn laplace_rule() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(64))
}

/// (2z/π) ∫₀^{π/2} sin²θ e^{−z cos θ} dθ, split at π/4 so the boundary
/// layer near θ = π/2 is resolved.
fn bessel_minus_struve_integral(z: f64) -> SpecfunResult {
    let rule = laplace_rule();
    let integrand = |theta: f64| {
        let s = theta.sin();
        s * s * (-z * theta.cos()).exp()
    };
    let quarter = 0.25 * PI;
    let value = rule.integrate(0.0, quarter, integrand) + rule.integrate(quarter, 0.5 * PI, integrand);
    SpecfunResult {
        value: 2.0 * z / PI * value,
        est_rel_err: 16.0 * f64::EPSILON,
    }
}

/// I₁(z) − L₁(z) from the ascending series of both functions.
fn bessel_minus_struve_series(z: f64) -> SpecfunResult {
    let i1 = bessel_i_series(1, z);
    let l1 = struve_l1_series(z);
    let value = i1.value - l1.value;
    let cancellation = if value != 0.0 { i1.value / value.abs() } else { 1.0 };
    SpecfunResult {
        value,
        est_rel_err: (i1.est_rel_err + l1.est_rel_err) * cancellation.max(1.0),
    }
}

/// I₁(z) − L₁(z), bounded for all z ≥ 0 and tending to 2/π.
pub fn bessel_minus_struve(z: f64) -> Result<SpecfunResult, SpecfunError> {
    if !(z >= 0.0) {
        return Err(SpecfunError::Domain(z));
    }
    Ok(bessel_minus_struve_branch(z, Branch::for_arg(z)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Branch {
    Series,
    Integral,
    Asymptotic,
}

impl Branch {
    fn for_arg(z: f64) -> Self {
        if z <= SERIES_LIMIT_Z {
            Branch::Series
        } else if z <= ASYMPTOTIC_LIMIT_Z {
            Branch::Integral
        } else {
            Branch::Asymptotic
        }
    }
}

pub(crate) fn bessel_minus_struve_branch(z: f64, branch: Branch) -> SpecfunResult {
    match branch {
        Branch::Series => bessel_minus_struve_series(z),
        Branch::Integral => bessel_minus_struve_integral(z),
        Branch::Asymptotic => {
            let r = struve_minus_bessel_asymptotic(z);
            SpecfunResult {
                value: -r.value,
                est_rel_err: r.est_rel_err,
            }
        }
    }
}

/// Modified Struve function L₁(x) with its error estimate.
pub fn struve_l1_detailed(x: f64) -> Result<SpecfunResult, SpecfunError> {
    check_arg(x)?;
    if x <= SERIES_LIMIT_Z {
        return Ok(struve_l1_series(x));
    }
    let i1 = bessel_i1_detailed(x)?;
    let diff = bessel_minus_struve_branch(x, Branch::for_arg(x));
    let value = i1.value - diff.value;
    Ok(SpecfunResult {
        value,
        est_rel_err: i1.est_rel_err + diff.est_rel_err * diff.value.abs() / value,
    })
}

/// Modified Struve function of order one, x ≥ 0.
pub fn struve_l1(x: f64) -> Result<f64, SpecfunError> {
    struve_l1_detailed(x).map(|r| r.value)
}

/// z/2 − (I₁(z) − L₁(z)) without the cancellation of the leading z/2 at
/// small z.
fn kernel_core(z: f64, branch: Branch) -> SpecfunResult {
    match branch {
        Branch::Series => {
            // I₁ series without its k = 0 term z/2.
            let head = 0.5 * z;
            let i1 = bessel_i_series(1, z);
            let l1 = struve_l1_series(z);
            let i1_rest = if z < 1.0 {
                let q = 0.25 * z * z;
                let mut term = head;
                let mut sum = 0.0;
                let mut k = 0.0;
                loop {
                    k += 1.0;
                    term *= q / (k * (k + 1.0));
                    sum += term;
                    if term <= 0.25 * f64::EPSILON * sum {
                        break;
                    }
                }
                sum
            } else {
                i1.value - head
            };
            let value = l1.value - i1_rest;
            let scale = l1.value + i1_rest.abs();
            SpecfunResult {
                value,
                est_rel_err: 4.0 * f64::EPSILON * scale / value.abs().max(f64::MIN_POSITIVE),
            }
        }
        _ => {
            let d = bessel_minus_struve_branch(z, branch);
            let value = 0.5 * z - d.value;
            SpecfunResult {
                value,
                est_rel_err: (d.est_rel_err * d.value.abs() + f64::EPSILON * 0.5 * z) / value.abs(),
            }
        }
    }
}

/// πx²/4 − x [I₁(πx) − L₁(πx)] / 2 with its error estimate.
pub fn ap_kernel_detailed(x: f64) -> SpecfunResult {
    if !(x >= 0.0) {
        return SpecfunResult {
            value: f64::NAN,
            est_rel_err: f64::INFINITY,
        };
    }
    if x == 0.0 {
        return SpecfunResult {
            value: 0.0,
            est_rel_err: 0.0,
        };
    }
    ap_kernel_branch(x, Branch::for_arg(PI * x))
}

pub(crate) fn ap_kernel_branch(x: f64, branch: Branch) -> SpecfunResult {
    let core = kernel_core(PI * x, branch);
    SpecfunResult {
        value: 0.5 * x * core.value,
        est_rel_err: core.est_rel_err + f64::EPSILON,
    }
}

/// Abel–Plana kernel of the zero-time non-equilibrium energy shift,
/// `πx²/4 − x [I₁(πx) − L₁(πx)] / 2`. Behaves as πx³/3 near zero and as
/// πx²/4 − x/π for large x. Returns NaN for negative x.
pub fn ap_kernel(x: f64) -> f64 {
    ap_kernel_detailed(x).value
}
