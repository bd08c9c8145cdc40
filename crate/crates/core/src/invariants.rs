//! Conserved quantities and norm functionals.

use crate::spectral::Field;

/// A named scalar functional value.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalValue {
    pub name: &'static str,
    pub value: f64,
    pub alpha: Option<f64>,
    /// Set for the Hamiltonian below `alpha = 1/3`, where the continuum
    /// functional is not defined on the natural energy space.
    pub formally_undefined: bool,
}

impl FunctionalValue {
    fn new(name: &'static str, value: f64, alpha: Option<f64>) -> Self {
        Self {
            name,
            value,
            alpha,
            formally_undefined: false,
        }
    }
}

/// `M(u) = int u^2`.
pub fn mass(f: &Field) -> FunctionalValue {
    FunctionalValue::new("mass", f.inner(f), None)
}

/// `int |D^{alpha/2} u|^2`, i.e. the quadratic form of `|xi|^alpha`.
pub fn fractional_energy(f: &Field, alpha: f64) -> f64 {
    f.spectral_quadratic_form(|xi| if xi == 0.0 { zero_weight(alpha) } else { xi.abs().powf(alpha) })
}

fn zero_weight(alpha: f64) -> f64 {
    // |0|^0 = 1; for negative orders the zero mode is dropped (operand mean-free)
    if alpha == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `int u^3`.
pub fn cubic_moment(f: &Field) -> f64 {
    f.grid().dx() * f.samples().iter().map(|v| v * v * v).sum::<f64>()
}

/// `H(u) = 1/2 int |D^{alpha/2} u|^2 - 1/6 int u^3`.
pub fn hamiltonian(f: &Field, alpha: f64) -> FunctionalValue {
    let value = 0.5 * fractional_energy(f, alpha) - cubic_moment(f) / 6.0;
    FunctionalValue {
        formally_undefined: alpha < 1.0 / 3.0,
        ..FunctionalValue::new("hamiltonian", value, Some(alpha))
    }
}

/// `E(u) = int u^2 + |D^{alpha/2} u|^2`.
pub fn bbm_energy(f: &Field, alpha: f64) -> FunctionalValue {
    FunctionalValue::new("bbm_energy", f.inner(f) + fractional_energy(f, alpha), Some(alpha))
}

/// `H(u) = 1/2 int (u^2 + u^3 / 3)`.
pub fn bbm_hamiltonian(f: &Field) -> FunctionalValue {
    FunctionalValue::new("bbm_hamiltonian", 0.5 * (f.inner(f) + cubic_moment(f) / 3.0), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn mass_examples() {
        let g = make_grid(64, PI).unwrap();
        assert_relative_eq!(mass(&Field::from_fn(g, f64::sin)).value, PI, max_relative = 1e-14);
        assert_eq!(mass(&Field::zeros(g)).value, 0.0);
        let mass_spec = Field::from_fn(g, f64::sin).spectral_quadratic_form(|_| 1.0);
        assert_relative_eq!(mass_spec, PI, max_relative = 1e-13);
    }

    #[test]
    fn hamiltonian_examples() {
        let g = make_grid(64, PI).unwrap();
        let c = Field::from_fn(g, f64::cos);
        for alpha in [0.2, 0.5, 1.0, 2.0] {
            let h = hamiltonian(&c, alpha);
            assert_relative_eq!(h.value, PI / 2.0, max_relative = 1e-13);
            assert_eq!(h.formally_undefined, alpha < 1.0 / 3.0);
        }
        assert_eq!(hamiltonian(&Field::zeros(g), 1.0).value, 0.0);
    }

    #[test]
    fn bbm_examples() {
        let g = make_grid(64, PI).unwrap();
        let c = Field::from_fn(g, f64::cos);
        for alpha in [0.3, 1.0, 2.0] {
            assert_relative_eq!(bbm_energy(&c, alpha).value, 2.0 * PI, max_relative = 1e-13);
        }
        let c2 = Field::from_fn(g, |x| (2.0 * x).cos());
        assert_relative_eq!(bbm_energy(&c2, 1.0).value, 3.0 * PI, max_relative = 1e-13);
        assert_relative_eq!(bbm_hamiltonian(&c).value, PI / 2.0, max_relative = 1e-13);
        assert_eq!(bbm_hamiltonian(&Field::zeros(g)).value, 0.0);
        let one = Field::constant(g, 1.0);
        assert_relative_eq!(bbm_hamiltonian(&one).value, 4.0 * PI / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn bbm_energy_matches_weighted_parseval() {
        let g = make_grid(128, 4.0).unwrap();
        let f = Field::from_fn(g, |x| (-x * x).exp() * (1.0 + 0.3 * x));
        let e = bbm_energy(&f, 0.7).value;
        let w = f.spectral_quadratic_form(|xi| 1.0 + xi.abs().powf(0.7));
        assert_relative_eq!(e, w, max_relative = 1e-12);
    }

    #[test]
    fn cubic_sign_flip() {
        let g = make_grid(256, 10.0).unwrap();
        let f = Field::from_fn(g, |x| 3.0 / (x / 2.0).cosh().powi(2) + 0.1 * x.sin());
        let h = hamiltonian(&f, 1.3).value;
        let hm = hamiltonian(&f.scale(-1.0), 1.3).value;
        assert!((hm - h - cubic_moment(&f) / 3.0).abs() < 1e-12 * cubic_moment(&f).abs());
    }
}
