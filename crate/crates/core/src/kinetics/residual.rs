use super::{levi_civita, DistributionField, FourVector, KineticsError, OnShellMomentum, METRIC};
use crate::numerics::{differentiate_with, second_derivative, DiffSettings, Estimate};

/// Base step of every finite-difference residual, in the field's
/// dimensionless coordinates.
pub const RESIDUAL_STEP: f64 = 1e-4;

fn diff_settings() -> DiffSettings {
    DiffSettings::default().with_step(RESIDUAL_STEP).with_levels(3)
}

/// ∂_μ f at x by central differences.
fn partials<F>(f: &F, x: &FourVector, p: &OnShellMomentum) -> Result<[Estimate; 4], KineticsError>
where
    F: DistributionField + ?Sized,
{
    let settings = diff_settings();
    let mut out = [Estimate::exact(0.0); 4];
    for (mu, slot) in out.iter_mut().enumerate() {
        let d = differentiate_with(|h| f.eval(&x.shifted(mu, h), p), 0.0, &settings)?;
        *slot = d.estimate;
    }
    Ok(out)
}

fn combine(terms: impl IntoIterator<Item = (f64, Estimate)>) -> Estimate {
    terms
        .into_iter()
        .fold(Estimate::new(0.0, 0.0, 0), |acc, (c, e)| acc + e.scaled(c))
}

/// p^μ ∂_μ f = ε_p ∂_t f + p⃗·∇f.
pub fn transport_residual<F>(f: &F, x: &FourVector, p: &OnShellMomentum) -> Result<Estimate, KineticsError>
where
    F: DistributionField + ?Sized,
{
    let d = partials(f, x, p)?;
    let k = p.four_vector();
    Ok(combine((0..4).map(|mu| (k[mu], d[mu]))))
}

/// ∂²f = (∂_t² − ∇²) f.
pub fn wave_residual<F>(f: &F, x: &FourVector, p: &OnShellMomentum) -> Result<Estimate, KineticsError>
where
    F: DistributionField + ?Sized,
{
    let settings = diff_settings();
    let mut terms = Vec::with_capacity(4);
    for (mu, g) in METRIC.iter().enumerate() {
        let d2 = second_derivative(|h| f.eval(&x.shifted(mu, h), p), 0.0, &settings)?;
        terms.push((*g, d2));
    }
    Ok(combine(terms))
}

/// r_μ = p_μ (u·∂f) − (p·u) ∂_μ f.
pub fn frame_constraint_residual<F>(
    f: &F,
    x: &FourVector,
    p: &OnShellMomentum,
    u: &FourVector,
) -> Result<[Estimate; 4], KineticsError>
where
    F: DistributionField + ?Sized,
{
    let d = partials(f, x, p)?;
    let k = p.four_vector();
    let kl = k.lower();
    let pu = k.dot(u);
    let u_dot_grad = combine((0..4).map(|nu| (u[nu], d[nu])));
    Ok(std::array::from_fn(|mu| u_dot_grad.scaled(kl[mu]) - d[mu].scaled(pu)))
}

/// ε_μνσρ ∂^ν f₋ p^σ u^ρ for a supplied axial distribution f₋.
pub fn axial_constraint_residual<F>(
    f_minus: &F,
    x: &FourVector,
    p: &OnShellMomentum,
    u: &FourVector,
) -> Result<[Estimate; 4], KineticsError>
where
    F: DistributionField + ?Sized,
{
    let d = partials(f_minus, x, p)?;
    let k = p.four_vector();
    Ok(std::array::from_fn(|mu| {
        let mut terms = Vec::new();
        for nu in 0..4 {
            for sigma in 0..4 {
                for rho in 0..4 {
                    let e = levi_civita([mu, nu, sigma, rho], true);
                    if e != 0.0 {
                        terms.push((e * METRIC[nu] * k[sigma] * u[rho], d[nu]));
                    }
                }
            }
        }
        combine(terms)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::{equilibrium_distribution, FieldFn, FreeStreaming};

    fn point() -> (FourVector, OnShellMomentum) {
        (
            FourVector::new(0.4, 0.3, -0.2, 0.9),
            OnShellMomentum::new([0.5, -0.7, 1.1]),
        )
    }

    #[test]
    fn equilibrium_residuals_vanish() {
        let f = equilibrium_distribution(1.3).unwrap();
        let (x, p) = point();
        assert_eq!(transport_residual(&f, &x, &p).unwrap().value, 0.0);
        assert_eq!(wave_residual(&f, &x, &p).unwrap().value, 0.0);
        for r in frame_constraint_residual(&f, &x, &p, &FourVector::REST_FRAME).unwrap() {
            assert_eq!(r.value, 0.0);
        }
    }

    #[test]
    fn free_streaming_transport_vanishes() {
        let (x, p) = point();
        let r = transport_residual(&FreeStreaming, &x, &p).unwrap();
        assert!(r.value.abs() <= r.error.max(1e-10), "{r:?}");
        assert!(r.value.abs() < 1e-6);
    }

    #[test]
    fn invalid_ansatz_detected() {
        let f = FieldFn(|x: &FourVector, _: &OnShellMomentum| x[1]);
        let (x, p) = point();
        let r = transport_residual(&f, &x, &p).unwrap();
        assert!((r.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn quadratic_wave_residual() {
        let f = FieldFn(|x: &FourVector, _: &OnShellMomentum| x[0] * x[0] + x[1] * x[1]);
        let (x, p) = point();
        let r = wave_residual(&f, &x, &p).unwrap();
        assert!(r.value.abs() < 1e-5, "{r:?}");
        assert!(r.value.abs() <= r.error + 1e-12);
    }

    #[test]
    fn frame_time_component_is_identically_zero_in_rest_frame() {
        let (x, p) = point();
        let r = frame_constraint_residual(&FreeStreaming, &x, &p, &FourVector::REST_FRAME).unwrap();
        assert_eq!(r[0].value, 0.0);
    }

    #[test]
    fn axial_residual_of_constant_and_streaming_fields() {
        let (x, p) = point();
        let u = FourVector::REST_FRAME;
        let constant = FieldFn(|_: &FourVector, _: &OnShellMomentum| 0.25);
        for r in axial_constraint_residual(&constant, &x, &p, &u).unwrap() {
            assert_eq!(r.value, 0.0);
        }
        // For u = rest frame only the spatial derivatives perpendicular to p⃗
        // survive, so a field depending on x⃗ ∥ p⃗ alone passes.
        let k = p.spatial();
        let along = FieldFn(move |x: &FourVector, _: &OnShellMomentum| {
            (-(x[1] * k[0] + x[2] * k[1] + x[3] * k[2]).powi(2)).exp()
        });
        for r in axial_constraint_residual(&along, &x, &p, &u).unwrap() {
            assert!(r.value.abs() < 1e-8, "{r:?}");
        }
    }
}
