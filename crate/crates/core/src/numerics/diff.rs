use super::{Estimate, NumericsError};

/// Finite-difference stencil that produced a derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    Central,
    /// Used when a central stencil would cross the lower domain edge.
    Forward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub estimate: Estimate,
    pub stencil: Stencil,
}

impl Derivative {
    pub fn value(&self) -> f64 {
        self.estimate.value
    }

    pub fn error(&self) -> f64 {
        self.estimate.error
    }

    pub fn is_one_sided(&self) -> bool {
        self.stencil == Stencil::Forward
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffSettings {
    /// Initial step; `None` selects `max(1e-3, 1e-2 |x|)`.
    pub step: Option<f64>,
    /// Number of step halvings in the Richardson table (>= 2).
    pub levels: usize,
    /// Domain edge below which the function must not be evaluated.
    pub lower_bound: Option<f64>,
}

impl Default for DiffSettings {
    fn default() -> Self {
        Self {
            step: None,
            levels: 3,
            lower_bound: None,
        }
    }
}

impl DiffSettings {
    pub fn with_step(self, step: f64) -> Self {
        Self {
            step: Some(step),
            ..self
        }
    }

    pub fn with_levels(self, levels: usize) -> Self {
        Self { levels, ..self }
    }

    pub fn with_lower_bound(self, lower: f64) -> Self {
        Self {
            lower_bound: Some(lower),
            ..self
        }
    }

    fn step_at(&self, x: f64) -> f64 {
        self.step.unwrap_or_else(|| (1e-2 * x.abs()).max(1e-3))
    }
}

/// Richardson table over steps h, h/2, h/4, ... `order_step` is the power
/// gap between successive error terms (2 for symmetric stencils) and
/// `first_order` the leading power.
fn richardson(estimates: &[f64], first_order: i32, order_step: i32) -> (f64, f64) {
    let n = estimates.len();
    let mut table = vec![estimates.to_vec()];
    for j in 1..n {
        let prev = &table[j - 1];
        let factor = 2f64.powi(first_order + order_step * (j as i32 - 1));
        let row: Vec<f64> = (1..prev.len())
            .map(|k| prev[k] + (prev[k] - prev[k - 1]) / (factor - 1.0))
            .collect();
        table.push(row);
    }
    let best = table[n - 1][0];
    let previous_level = *table[n - 2].last().expect("at least two levels");
    (best, (best - previous_level).abs())
}

fn checked<F, E>(f: &mut F, x: f64) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    let y = f(x)?;
    if y.is_finite() {
        Ok(y)
    } else {
        Err(NumericsError::NonFinite { x }.into())
    }
}

/// Central difference with three Richardson levels and the default step.
pub fn differentiate<F>(f: F, x: f64, h0: Option<f64>) -> Result<Derivative, NumericsError>
where
    F: Fn(f64) -> f64,
{
    let settings = DiffSettings {
        step: h0,
        ..DiffSettings::default()
    };
    differentiate_with(f, x, &settings)
}

pub fn differentiate_with<F>(f: F, x: f64, settings: &DiffSettings) -> Result<Derivative, NumericsError>
where
    F: Fn(f64) -> f64,
{
    try_differentiate_with(|t| Ok::<f64, NumericsError>(f(t)), x, settings)
}

/// First derivative of a fallible function. Switches to a forward stencil
/// when `x - h` would fall below `settings.lower_bound`.
pub fn try_differentiate_with<F, E>(mut f: F, x: f64, settings: &DiffSettings) -> Result<Derivative, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<NumericsError>,
{
    let h0 = settings.step_at(x);
    if !(h0.is_finite() && h0 > 0.0) {
        return Err(NumericsError::InvalidSettings("step must be positive").into());
    }
    if settings.levels < 2 {
        return Err(NumericsError::InvalidSettings("need at least two Richardson levels").into());
    }
    let forward = settings.lower_bound.is_some_and(|lb| x - h0 < lb);
    let mut estimates = Vec::with_capacity(settings.levels);
    let mut evaluations = 0;
    let mut fx = None;
    let mut scale: f64 = 0.0;
    for k in 0..settings.levels {
        let h = h0 / 2f64.powi(k as i32);
        let d = if forward {
            let f0 = match fx {
                Some(v) => v,
                None => {
                    evaluations += 1;
                    let v = checked(&mut f, x)?;
                    fx = Some(v);
                    v
                }
            };
            let f1 = checked(&mut f, x + h)?;
            evaluations += 1;
            scale = scale.max(f0.abs()).max(f1.abs());
            (f1 - f0) / h
        } else {
            let fp = checked(&mut f, x + h)?;
            let fm = checked(&mut f, x - h)?;
            evaluations += 2;
            scale = scale.max(fp.abs()).max(fm.abs());
            (fp - fm) / (2.0 * h)
        };
        estimates.push(d);
    }
    let (value, spread) = if forward {
        richardson(&estimates, 1, 1)
    } else {
        richardson(&estimates, 2, 2)
    };
    let h_min = h0 / 2f64.powi(settings.levels as i32 - 1);
    let roundoff = 4.0 * f64::EPSILON * scale / h_min;
    Ok(Derivative {
        estimate: Estimate::new(value, spread + roundoff, evaluations),
        stencil: if forward { Stencil::Forward } else { Stencil::Central },
    })
}

/// Second derivative by the symmetric three-point stencil with Richardson
/// extrapolation.
pub fn second_derivative<F>(f: F, x: f64, settings: &DiffSettings) -> Result<Estimate, NumericsError>
where
    F: Fn(f64) -> f64,
{
    let h0 = settings.step_at(x);
    if settings.levels < 2 || !(h0 > 0.0) {
        return Err(NumericsError::InvalidSettings("need a positive step and two levels"));
    }
    let f0 = f(x);
    if !f0.is_finite() {
        return Err(NumericsError::NonFinite { x });
    }
    let mut scale = f0.abs();
    let mut estimates = Vec::with_capacity(settings.levels);
    for k in 0..settings.levels {
        let h = h0 / 2f64.powi(k as i32);
        let (fp, fm) = (f(x + h), f(x - h));
        if !fp.is_finite() {
            return Err(NumericsError::NonFinite { x: x + h });
        }
        if !fm.is_finite() {
            return Err(NumericsError::NonFinite { x: x - h });
        }
        scale = scale.max(fp.abs()).max(fm.abs());
        estimates.push((fp - 2.0 * f0 + fm) / (h * h));
    }
    let (value, spread) = richardson(&estimates, 2, 2);
    let h_min = h0 / 2f64.powi(settings.levels as i32 - 1);
    let roundoff = 8.0 * f64::EPSILON * scale / (h_min * h_min);
    Ok(Estimate::new(value, spread + roundoff, 1 + 2 * settings.levels))
}
