use super::{FourVector, KineticsError, OnShellMomentum};

/// A scalar photon distribution f(x, p).
pub trait DistributionField: Send + Sync {
    fn eval(&self, x: &FourVector, p: &OnShellMomentum) -> f64;

    /// Analytic ∂_μ f = ∂f/∂x^μ, when known.
    fn gradient(&self, _x: &FourVector, _p: &OnShellMomentum) -> Option<[f64; 4]> {
        None
    }
}

/// Bose–Einstein distribution 1/(e^{ε_p/T} − 1) in the rest frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoseEinstein {
    temperature: f64,
}

impl BoseEinstein {
    pub fn new(temperature: f64) -> Result<Self, KineticsError> {
        if temperature > 0.0 && temperature.is_finite() {
            Ok(Self { temperature })
        } else {
            Err(KineticsError::NonPositiveTemperature(temperature))
        }
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Occupation at energy ε; infinite at ε = 0.
    pub fn occupation(&self, energy: f64) -> f64 {
        1.0 / (energy / self.temperature).exp_m1()
    }
}

impl DistributionField for BoseEinstein {
    fn eval(&self, _x: &FourVector, p: &OnShellMomentum) -> f64 {
        self.occupation(p.energy())
    }

    fn gradient(&self, _x: &FourVector, _p: &OnShellMomentum) -> Option<[f64; 4]> {
        Some([0.0; 4])
    }
}

pub fn equilibrium_distribution(temperature: f64) -> Result<BoseEinstein, KineticsError> {
    BoseEinstein::new(temperature)
}

/// Free streaming of the initial profile e^{−ε_p r₀} from t = 0:
/// f(x, p) = exp(−|ε_p x⃗ − p⃗ t|).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FreeStreaming;

impl FreeStreaming {
    /// Position at t = 0 on the characteristic through (t, x⃗).
    fn origin(x: &FourVector, p: &OnShellMomentum) -> [f64; 3] {
        let e = p.energy();
        let (t, xs, ps) = (x.time(), x.spatial(), p.spatial());
        if e == 0.0 {
            return xs;
        }
        std::array::from_fn(|i| xs[i] - ps[i] * t / e)
    }
}

impl DistributionField for FreeStreaming {
    fn eval(&self, x: &FourVector, p: &OnShellMomentum) -> f64 {
        let y = Self::origin(x, p);
        let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        (-p.energy() * r).exp()
    }

    fn gradient(&self, x: &FourVector, p: &OnShellMomentum) -> Option<[f64; 4]> {
        let y = Self::origin(x, p);
        let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        if r == 0.0 {
            // Cusp on the characteristic through the origin.
            return Some([0.0; 4]);
        }
        let f = (-p.energy() * r).exp();
        let e = p.energy();
        let ps = p.spatial();
        let unit = y.map(|c| c / r);
        let dt = f * (unit[0] * ps[0] + unit[1] * ps[1] + unit[2] * ps[2]);
        Some([dt, -e * f * unit[0], -e * f * unit[1], -e * f * unit[2]])
    }
}

pub fn free_streaming_distribution() -> FreeStreaming {
    FreeStreaming
}

/// Arbitrary field from a closure, e.g. a trial ansatz.
pub struct FieldFn<F>(pub F);

impl<F> DistributionField for FieldFn<F>
where
    F: Fn(&FourVector, &OnShellMomentum) -> f64 + Send + Sync,
{
    fn eval(&self, x: &FourVector, p: &OnShellMomentum) -> f64 {
        (self.0)(x, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn bose_einstein_values() {
        let f = equilibrium_distribution(1.0).unwrap();
        let x = FourVector::default();
        assert!((f.eval(&x, &OnShellMomentum::new([0.0, 0.0, LN_2])) - 1.0).abs() < 1e-15);
        let direct = 1.0 / (std::f64::consts::E - 1.0);
        assert!((f.eval(&x, &OnShellMomentum::new([0.6, 0.0, 0.8])) - direct).abs() < 1e-15);
        assert_eq!(f.eval(&x, &OnShellMomentum::new([1e4, 0.0, 0.0])), 0.0);
        assert!(matches!(
            BoseEinstein::new(0.0),
            Err(KineticsError::NonPositiveTemperature(_))
        ));
        assert!(BoseEinstein::new(-2.0).is_err());
    }

    #[test]
    fn free_streaming_values() {
        let f = free_streaming_distribution();
        let p = OnShellMomentum::new([0.0, 3.0, 4.0]);
        assert_eq!(f.eval(&FourVector::default(), &p), 1.0);
        let r0 = 0.7;
        let x = FourVector::new(0.0, r0, 0.0, 0.0);
        assert!((f.eval(&x, &p) - (-5.0 * r0).exp()).abs() < 1e-15);
        for t in [0.5, 2.0, 17.0] {
            let on_ray = FourVector::from_time_space(t, [0.0, 3.0 * t / 5.0, 4.0 * t / 5.0]);
            assert!((f.eval(&on_ray, &p) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn analytic_gradient_matches_direct_formula() {
        // ∂_x of exp(−|ε x⃗ − p⃗ t|) at a point off the characteristic.
        let f = FreeStreaming;
        let p = OnShellMomentum::new([1.0, 0.0, 0.0]);
        let x = FourVector::new(0.5, 2.0, 0.0, 0.0);
        let g = f.gradient(&x, &p).unwrap();
        let value = (-(2.0f64 - 0.5)).exp();
        assert!((g[1] + value).abs() < 1e-15);
        assert!((g[0] - value).abs() < 1e-15);
        assert_eq!(g[2], 0.0);
    }
}
