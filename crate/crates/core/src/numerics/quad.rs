use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::gauss::{GAUSS10_WEIGHTS, KRONROD21_NODES, KRONROD21_WEIGHTS};
use super::{Estimate, NumericsError, QuadSettings};

/// Hard cap on the number of live subintervals of one adaptive run.
const MAX_SEGMENTS: usize = 20_000;
/// Escalation steps before a truncated tail is declared divergent.
const MAX_TAIL_STEPS: usize = 96;

/// Integration range of one axis of a nested integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Finite { lo: f64, hi: f64 },
    SemiInfinite { lo: f64 },
}

/// Failure of a fallible integrand, kept apart from integrator failures so
/// that only the latter trigger fallbacks.
enum Failure<E> {
    Integrand(E),
    Numerics(NumericsError),
}

impl<E: From<NumericsError>> Failure<E> {
    fn into_error(self) -> E {
        match self {
            Failure::Integrand(e) => e,
            Failure::Numerics(e) => e.into(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn eval_checked<F, E>(f: &mut F, x: f64) -> Result<f64, Failure<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let y = f(x).map_err(Failure::Integrand)?;
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Failure::Numerics(NumericsError::NonFinite { x }))
    }
}

/// One 21-point Kronrod panel with the embedded 10-point Gauss estimate,
/// error scaled as in QUADPACK's qk21.
fn kronrod21<F, E>(f: &mut F, lo: f64, hi: f64) -> Result<(f64, f64), Failure<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = eval_checked(f, center)?;
    let mut res_k = fc * KRONROD21_WEIGHTS[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut values = [(0.0, 0.0); 10];
    for (j, node) in KRONROD21_NODES[..10].iter().enumerate() {
        let dx = half * node;
        let f1 = eval_checked(f, center - dx)?;
        let f2 = eval_checked(f, center + dx)?;
        values[j] = (f1, f2);
        res_k += KRONROD21_WEIGHTS[j] * (f1 + f2);
        res_abs += KRONROD21_WEIGHTS[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += GAUSS10_WEIGHTS[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = KRONROD21_WEIGHTS[10] * (fc - mean).abs();
    for (j, (f1, f2)) in values.iter().enumerate() {
        res_asc += KRONROD21_WEIGHTS[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    // Normalising by the weight sum (accumulated in the same order) makes
    // constants integrate exactly.
    let mut weight_sum = KRONROD21_WEIGHTS[10];
    for w in &KRONROD21_WEIGHTS[..10] {
        weight_sum += w * 2.0;
    }
    let value = res_k * (hi - lo) / weight_sum;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, err))
}

fn adaptive<F, E>(f: &mut F, lo: f64, hi: f64, settings: &QuadSettings) -> Result<Estimate, Failure<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (value, error) = kronrod21(f, lo, hi)?;
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Segment> = Vec::new();
    heap.push(Segment {
        lo,
        hi,
        value,
        error,
        depth: 0,
    });
    let mut total_value = value;
    let mut total_error = error;

    loop {
        if total_error <= settings.tolerance_for(total_value) {
            break;
        }
        let Some(worst) = heap.pop() else {
            let best = Estimate::new(total_value, total_error, evaluations);
            return Err(Failure::Numerics(NumericsError::ToleranceNotMet { best }));
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        let too_deep = worst.depth >= settings.max_depth;
        let too_narrow = mid <= worst.lo || mid >= worst.hi;
        if too_deep || too_narrow || heap.len() + frozen.len() >= MAX_SEGMENTS {
            frozen.push(worst);
            continue;
        }
        let (v1, e1) = kronrod21(f, worst.lo, mid)?;
        let (v2, e2) = kronrod21(f, mid, worst.hi)?;
        evaluations += 42;
        total_value += v1 + v2 - worst.value;
        total_error += e1 + e2 - worst.error;
        for (a, b, v, e) in [(worst.lo, mid, v1, e1), (mid, worst.hi, v2, e2)] {
            heap.push(Segment {
                lo: a,
                hi: b,
                value: v,
                error: e,
                depth: worst.depth + 1,
            });
        }
    }

    // Re-sum in a fixed order so the result does not depend on heap layout.
    let mut segments: Vec<Segment> = heap.into_vec();
    segments.extend(frozen);
    segments.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let value = segments.iter().map(|s| s.value).sum();
    let error = segments.iter().map(|s| s.error).sum();
    Ok(Estimate::new(value, error, evaluations))
}

/// Adaptive integral of `f` over `[lo, hi]`.
pub fn integrate_1d<F>(f: F, lo: f64, hi: f64, settings: &QuadSettings) -> Result<Estimate, NumericsError>
where
    F: Fn(f64) -> f64,
{
    try_integrate_1d(|x| Ok::<f64, NumericsError>(f(x)), lo, hi, settings)
}

/// As [`integrate_1d`] for integrands that can fail.
pub fn try_integrate_1d<F, E>(mut f: F, lo: f64, hi: f64, settings: &QuadSettings) -> Result<Estimate, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    settings.validated()?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(NumericsError::InvalidInterval { lo, hi }.into());
    }
    adaptive(&mut f, lo, hi, settings).map_err(Failure::into_error)
}

/// Integral of `f` over `[lo, inf)`.
pub fn integrate_semi_infinite<F>(f: F, lo: f64, settings: &QuadSettings) -> Result<Estimate, NumericsError>
where
    F: Fn(f64) -> f64,
{
    try_integrate_semi_infinite(|x| Ok::<f64, NumericsError>(f(x)), lo, settings)
}

pub fn try_integrate_semi_infinite<F, E>(f: F, lo: f64, settings: &QuadSettings) -> Result<Estimate, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    try_integrate_semi_infinite_scaled(f, lo, 1.0, settings)
}

/// Semi-infinite integral with the map `x = lo + scale * u / (1 - u)`.
/// `scale` should match the decay length of `f`. Falls back to escalating
/// truncation if the mapped integrand cannot be integrated to tolerance.
pub fn try_integrate_semi_infinite_scaled<F, E>(
    mut f: F,
    lo: f64,
    scale: f64,
    settings: &QuadSettings,
) -> Result<Estimate, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    settings.validated()?;
    if !lo.is_finite() {
        return Err(NumericsError::InvalidInterval { lo, hi: f64::INFINITY }.into());
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(NumericsError::InvalidSettings("scale must be positive").into());
    }
    let mut mapped = |u: f64| -> Result<f64, E> {
        let one_minus = 1.0 - u;
        let x = lo + scale * u / one_minus;
        let y = f(x)?;
        if y == 0.0 {
            return Ok(0.0);
        }
        Ok(y * scale / (one_minus * one_minus))
    };
    match adaptive(&mut mapped, 0.0, 1.0, settings) {
        Ok(est) => Ok(est),
        Err(Failure::Integrand(e)) => Err(e),
        Err(Failure::Numerics(_)) => truncated_tail(&mut f, lo, scale, settings).map_err(Failure::into_error),
    }
}

fn truncated_tail<F, E>(f: &mut F, lo: f64, scale: f64, settings: &QuadSettings) -> Result<Estimate, Failure<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let growth = settings.tail_cutoff_growth;
    let piece_settings = settings.tightened(2.0);
    let mut total = Estimate::new(0.0, 0.0, 0);
    let mut a = lo;
    let mut b = lo + scale;
    let mut previous: Option<f64> = None;
    let mut stalled = 0;
    for step in 0..MAX_TAIL_STEPS {
        let piece = match adaptive(f, a, b, &piece_settings) {
            Ok(p) => p,
            Err(Failure::Numerics(NumericsError::ToleranceNotMet { best })) => best,
            Err(e) => return Err(e),
        };
        total = total + piece;
        let size = piece.value.abs();
        if step >= 1 && size + piece.error <= 0.5 * settings.tolerance_for(total.value) {
            return Ok(total);
        }
        if let Some(prev) = previous {
            if size >= 0.9 * prev {
                stalled += 1;
            } else {
                stalled = 0;
            }
        }
        if stalled >= 4 {
            return Err(Failure::Numerics(NumericsError::DivergentTail { cutoff: b }));
        }
        previous = Some(size);
        a = b;
        b = lo + (b - lo) * growth;
    }
    Err(Failure::Numerics(NumericsError::DivergentTail { cutoff: a }))
}

fn try_integrate_domain<F, E>(f: F, domain: Domain, settings: &QuadSettings) -> Result<Estimate, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    match domain {
        Domain::Finite { lo, hi } => try_integrate_1d(f, lo, hi, settings),
        Domain::SemiInfinite { lo } => try_integrate_semi_infinite(f, lo, settings),
    }
}

/// Nested integral of `f(x, y)`: `y` inner, `x` outer. Inner tolerances are
/// ten times tighter than the outer ones; the reported error is the outer
/// estimate.
pub fn integrate_2d<F>(
    f: F,
    x_domain: Domain,
    y_domain: Domain,
    settings: &QuadSettings,
) -> Result<Estimate, NumericsError>
where
    F: Fn(f64, f64) -> f64,
{
    let inner_settings = settings.tightened(10.0);
    let inner_evals = Cell::new(0usize);
    let outer = try_integrate_domain(
        |x| {
            let inner = try_integrate_domain(|y| Ok::<f64, NumericsError>(f(x, y)), y_domain, &inner_settings)?;
            inner_evals.set(inner_evals.get() + inner.evaluations);
            Ok::<f64, NumericsError>(inner.value)
        },
        x_domain,
        settings,
    )?;
    Ok(Estimate::new(outer.value, outer.error, inner_evals.get()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tight() -> QuadSettings {
        QuadSettings::new(1e-12, 1e-10).unwrap()
    }

    #[test]
    fn polynomial_and_constant() {
        let s = QuadSettings::default();
        let q = integrate_1d(|x| x * x, 0.0, 1.0, &s).unwrap();
        assert!((q.value - 1.0 / 3.0).abs() < 1e-14);
        let c = integrate_1d(|_| 1.0, 0.0, 1.0, &s).unwrap();
        assert_eq!(c.value, 1.0);
        assert!(c.evaluations >= 1);
    }

    #[test]
    fn damped_sine() {
        let q = integrate_1d(|x: f64| (-x).exp() * x.sin(), 0.0, 20.0, &tight()).unwrap();
        // Antiderivative -e^{-x}(sin x + cos x)/2.
        let want = 0.5 - 0.5 * (-20.0f64).exp() * (20.0f64.sin() + 20.0f64.cos());
        assert!((q.value - want).abs() <= q.error.max(1e-12));
        assert!((q.value - 0.5).abs() < 1e-8);
    }

    #[test]
    fn semi_infinite_examples() {
        let s = tight();
        let e = integrate_semi_infinite(|x: f64| (-x).exp(), 0.0, &s).unwrap();
        assert!((e.value - 1.0).abs() < 1e-10);
        let g = integrate_semi_infinite(|x: f64| x.powi(3) * (-x).exp(), 0.0, &s).unwrap();
        assert!((g.value - 6.0).abs() < 1e-9);
        let b = integrate_semi_infinite(|x: f64| x.powi(3) / x.exp_m1(), 0.0, &s).unwrap();
        assert!((b.value - PI.powi(4) / 15.0).abs() < 1e-9, "{}", b.value);
    }

    #[test]
    fn non_decaying_integrand_is_divergent() {
        let err = integrate_semi_infinite(|x| 1.0 / (1.0 + x), 0.0, &QuadSettings::default()).unwrap_err();
        assert!(matches!(err, NumericsError::DivergentTail { .. }), "{err:?}");
        let err = integrate_semi_infinite(|_| 1.0, 0.0, &QuadSettings::default()).unwrap_err();
        assert!(matches!(err, NumericsError::DivergentTail { .. }), "{err:?}");
    }

    #[test]
    fn nan_is_a_hard_error() {
        let err = integrate_1d(
            |x| if x > 0.5 { f64::NAN } else { x },
            0.0,
            1.0,
            &QuadSettings::default(),
        )
        .unwrap_err();
        assert!(matches!(err, NumericsError::NonFinite { .. }));
    }

    #[test]
    fn unattainable_tolerance_reports_best_estimate() {
        let s = QuadSettings {
            abs_tol: 1e-300,
            rel_tol: 0.0,
            max_depth: 3,
            tail_cutoff_growth: 2.0,
        };
        let err = integrate_1d(|x: f64| x.sqrt(), 0.0, 1.0, &s).unwrap_err();
        let best = err.best_estimate().expect("carries the best estimate");
        assert!((best.value - 2.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn invalid_inputs() {
        let s = QuadSettings::default();
        assert!(matches!(
            integrate_1d(|x| x, 1.0, 0.0, &s),
            Err(NumericsError::InvalidInterval { .. })
        ));
        assert!(QuadSettings::new(0.0, 0.0).is_err());
        assert!(QuadSettings::new(-1.0, 1e-3).is_err());
        let bad_depth = QuadSettings { max_depth: 0, ..s };
        assert!(bad_depth.validated().is_err());
    }

    #[test]
    fn two_dimensional_examples() {
        let s = QuadSettings::new(1e-10, 1e-9).unwrap();
        let unit = Domain::Finite { lo: 0.0, hi: 1.0 };
        let half = Domain::SemiInfinite { lo: 0.0 };
        let one = integrate_2d(|_, _| 1.0, unit, unit, &s).unwrap();
        assert!((one.value - 1.0).abs() < 1e-14);
        let sep = integrate_2d(|x: f64, y: f64| (-x - y).exp(), half, half, &s).unwrap();
        assert!((sep.value - 1.0).abs() < 1e-8);
        let gauss = integrate_2d(|x: f64, y: f64| x * y * (-x * x - y * y).exp(), half, half, &s).unwrap();
        assert!((gauss.value - 0.25).abs() < 1e-8);
    }
}
