use super::{FourVector, KineticsError, METRIC};

/// Whether a tensor's stored components carry lower or upper indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexPosition {
    Lower,
    Upper,
}

/// 4×4 real components. `imaginary` marks a tensor whose physical value is
/// i times the stored components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankTwoTensor {
    pub components: [[f64; 4]; 4],
    pub indices: IndexPosition,
    pub imaginary: bool,
}

impl RankTwoTensor {
    pub fn zero(indices: IndexPosition) -> Self {
        Self {
            components: [[0.0; 4]; 4],
            indices,
            imaginary: false,
        }
    }

    pub fn get(&self, mu: usize, nu: usize) -> f64 {
        self.components[mu][nu]
    }

    /// Largest |T_μν − T_νμ|.
    pub fn asymmetry(&self) -> f64 {
        self.max_over_pairs(|a, b| a - b)
    }

    /// Largest |T_μν + T_νμ|.
    pub fn symmetric_part(&self) -> f64 {
        self.max_over_pairs(|a, b| a + b)
    }

    fn max_over_pairs(&self, op: impl Fn(f64, f64) -> f64) -> f64 {
        let mut worst: f64 = 0.0;
        for mu in 0..4 {
            for nu in 0..4 {
                worst = worst.max(op(self.components[mu][nu], self.components[nu][mu]).abs());
            }
        }
        worst
    }

    /// Trace with the metric; the metric is its own inverse, so this is the
    /// same for either index position.
    pub fn trace(&self) -> f64 {
        (0..4).map(|mu| METRIC[mu] * self.components[mu][mu]).sum()
    }

    /// v^μ T_μν for a contravariant `v`, lowering `v` first when the tensor
    /// has upper indices.
    pub fn contract_first(&self, v: &FourVector) -> [f64; 4] {
        let w = match self.indices {
            IndexPosition::Lower => v.0,
            IndexPosition::Upper => v.lower(),
        };
        std::array::from_fn(|nu| (0..4).map(|mu| w[mu] * self.components[mu][nu]).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flatten().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Totally antisymmetric symbol with ε^{0123} = +1, so ε_{0123} = −1.
pub fn levi_civita(indices: [usize; 4], lower: bool) -> f64 {
    let mut perm = indices;
    if perm.iter().any(|&i| i > 3) {
        return 0.0;
    }
    let mut sign = 1.0;
    for i in 0..4 {
        for j in i + 1..4 {
            if perm[i] == perm[j] {
                return 0.0;
            }
        }
    }
    for i in 0..4 {
        while perm[i] != i {
            let j = perm[i];
            perm.swap(i, j);
            sign = -sign;
        }
    }
    if lower {
        -sign
    } else {
        sign
    }
}

fn check_frame(p: &FourVector, u: &FourVector) -> Result<f64, KineticsError> {
    let pu = p.dot(u);
    if pu == 0.0 || !pu.is_finite() {
        return Err(KineticsError::Singular(pu));
    }
    Ok(pu)
}

/// C⁺_μν = p_μp_ν/(p·u)² − (p_μu_ν + p_νu_μ)/(p·u) + g_μν.
pub fn c_plus(p: &FourVector, u: &FourVector) -> Result<RankTwoTensor, KineticsError> {
    let pu = check_frame(p, u)?;
    let (pl, ul) = (p.lower(), u.lower());
    let components = std::array::from_fn(|mu| {
        std::array::from_fn(|nu| {
            let metric = if mu == nu { METRIC[mu] } else { 0.0 };
            pl[mu] * pl[nu] / (pu * pu) - (pl[mu] * ul[nu] + pl[nu] * ul[mu]) / pu + metric
        })
    });
    Ok(RankTwoTensor {
        components,
        indices: IndexPosition::Lower,
        imaginary: false,
    })
}

/// C⁻_μν = i ε_μνσρ p^σ u^ρ / (2 p·u); the stored components omit the i.
pub fn c_minus(p: &FourVector, u: &FourVector) -> Result<RankTwoTensor, KineticsError> {
    let pu = check_frame(p, u)?;
    let mut components = [[0.0; 4]; 4];
    for (mu, row) in components.iter_mut().enumerate() {
        for (nu, c) in row.iter_mut().enumerate() {
            let mut s = 0.0;
            for sigma in 0..4 {
                for rho in 0..4 {
                    let e = levi_civita([mu, nu, sigma, rho], true);
                    if e != 0.0 {
                        s += e * p[sigma] * u[rho];
                    }
                }
            }
            *c = s / (2.0 * pu);
        }
    }
    Ok(RankTwoTensor {
        components,
        indices: IndexPosition::Lower,
        imaginary: true,
    })
}

/// t^μν = 2 p^μ p^ν f, stored with upper indices so that t⁰⁰ is the energy
/// density.
pub fn energy_momentum_density(p: &FourVector, fval: f64) -> Result<RankTwoTensor, KineticsError> {
    if !(fval >= 0.0) {
        return Err(KineticsError::NegativeDistribution(fval));
    }
    let components = std::array::from_fn(|mu| std::array::from_fn(|nu| 2.0 * p[mu] * p[nu] * fval));
    Ok(RankTwoTensor {
        components,
        indices: IndexPosition::Upper,
        imaginary: false,
    })
}

/// Vector current j_μ = ∂_μ f₊ and axial current j₅^μ = p^μ f₋.
pub fn currents(p: &FourVector, f_plus_grad: [f64; 4], f_minus_val: f64) -> ([f64; 4], [f64; 4]) {
    (f_plus_grad, p.0.map(|c| c * f_minus_val))
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: FourVector = FourVector::new(1.0, 0.0, 0.0, 1.0);
    const U: FourVector = FourVector::REST_FRAME;

    #[test]
    fn c_plus_constraints_and_trace() {
        let c = c_plus(&P, &U).unwrap();
        assert!(c.contract_first(&P).iter().all(|x| x.abs() < 1e-12));
        assert!(c.contract_first(&U).iter().all(|x| x.abs() < 1e-12));
        assert!((c.trace() - 2.0).abs() < 1e-12);
        assert_eq!(c.asymmetry(), 0.0);
    }

    #[test]
    fn c_minus_block_structure() {
        let c = c_minus(&P, &U).unwrap();
        assert!(c.imaginary);
        assert_eq!(c.symmetric_part(), 0.0);
        for mu in 0..4 {
            for nu in 0..4 {
                let v = c.get(mu, nu);
                if (mu, nu) == (1, 2) || (mu, nu) == (2, 1) {
                    assert!((v.abs() - 0.5).abs() < 1e-15);
                } else {
                    assert_eq!(v, 0.0);
                }
            }
        }
        assert!(c.contract_first(&P).iter().all(|&x| x == 0.0));
        assert!(c.contract_first(&U).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn singular_frame() {
        let u = FourVector::new(0.0, 0.0, 0.0, 0.0);
        assert!(matches!(c_plus(&P, &u), Err(KineticsError::Singular(_))));
        assert!(matches!(c_minus(&P, &u), Err(KineticsError::Singular(_))));
    }

    #[test]
    fn levi_civita_signs() {
        assert_eq!(levi_civita([0, 1, 2, 3], false), 1.0);
        assert_eq!(levi_civita([0, 1, 2, 3], true), -1.0);
        assert_eq!(levi_civita([1, 0, 2, 3], false), -1.0);
        assert_eq!(levi_civita([1, 2, 3, 0], false), -1.0);
        assert_eq!(levi_civita([0, 0, 2, 3], false), 0.0);
    }

    #[test]
    fn energy_momentum_examples() {
        let t = energy_momentum_density(&P, 0.5).unwrap();
        let expect = [[1.0, 0.0, 0.0, 1.0], [0.0; 4], [0.0; 4], [1.0, 0.0, 0.0, 1.0]];
        assert_eq!(t.components, expect);
        assert_eq!(t.trace(), 0.0);
        assert_eq!(energy_momentum_density(&P, 0.0).unwrap().max_abs(), 0.0);
        assert!(energy_momentum_density(&P, -1.0).is_err());
    }

    #[test]
    fn current_examples() {
        let (j, j5) = currents(&P, [0.0; 4], 0.0);
        assert_eq!(j, [0.0; 4]);
        assert_eq!(j5, [0.0; 4]);
        let (_, j5) = currents(&P, [0.0; 4], 1.0);
        assert_eq!(j5, [1.0, 0.0, 0.0, 1.0]);
    }
}
