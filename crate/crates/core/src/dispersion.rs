//! Dispersion symbols `p(xi)` for `u_t + u u_x - L u_x = 0`, `L^ = p`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("alpha outside (-1, 2]: {0}")]
    AlphaOutOfRange(f64),
    #[error("depth h0 must be positive, got {0}")]
    BadDepth(f64),
    #[error("surface tension tau must be non-negative, got {0}")]
    BadTension(f64),
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
    #[error("gaussian width must be positive, got {0}")]
    BadWidth(f64),
    #[error("symbol `{0}` is not integrable over the line, k(0) is infinite")]
    NotIntegrable(String),
    #[error("quadrature needs a positive cutoff and at least one interval")]
    BadQuadrature,
}

/// Symbol family with its parameters.
#[derive(Clone)]
pub enum SymbolFamily {
    /// `|xi|^alpha`
    Power { alpha: f64 },
    /// `(tanh xi / xi)^(1/2)`
    WhithamTanh,
    /// `[tanh(|xi| h0) / |xi|]^(1/2) [1 + tau xi^2]^(1/2)`, with `g = rho = 1`.
    Capillary { h0: f64, tau: f64 },
    /// `xi^2 / (1 + eps xi^2)`
    Zaitsev { eps: f64 },
    /// `1 / (1 + |xi|^alpha)`, the smoothing symbol of the fractional BBM equation.
    Bbm { alpha: f64 },
    /// `exp(-(xi / width)^2)`, an integrable kernel with finite `k(0)`.
    Gaussian { width: f64 },
    /// User closure.
    Custom {
        name: String,
        eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        integrable: bool,
        alpha_equivalent: Option<f64>,
    },
}

impl fmt::Debug for SymbolFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolFamily::Power { alpha } => write!(f, "Power {{ alpha: {alpha} }}"),
            SymbolFamily::WhithamTanh => write!(f, "WhithamTanh"),
            SymbolFamily::Capillary { h0, tau } => write!(f, "Capillary {{ h0: {h0}, tau: {tau} }}"),
            SymbolFamily::Zaitsev { eps } => write!(f, "Zaitsev {{ eps: {eps} }}"),
            SymbolFamily::Bbm { alpha } => write!(f, "Bbm {{ alpha: {alpha} }}"),
            SymbolFamily::Gaussian { width } => write!(f, "Gaussian {{ width: {width} }}"),
            SymbolFamily::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Even real dispersion symbol.
#[derive(Debug, Clone)]
pub struct DispersionSymbol {
    family: SymbolFamily,
}

/// `tanh(x) / x`, exact 1 at the origin.
fn tanhc(x: f64) -> f64 {
    let a = x.abs();
    if a < 1e-4 {
        let a2 = a * a;
        1.0 - a2 / 3.0 + 2.0 * a2 * a2 / 15.0
    } else {
        a.tanh() / a
    }
}

pub fn power_symbol(alpha: f64) -> Result<DispersionSymbol, SymbolError> {
    if !(alpha > -1.0 && alpha <= 2.0) {
        return Err(SymbolError::AlphaOutOfRange(alpha));
    }
    Ok(DispersionSymbol {
        family: SymbolFamily::Power { alpha },
    })
}

pub fn whitham_symbol() -> DispersionSymbol {
    DispersionSymbol {
        family: SymbolFamily::WhithamTanh,
    }
}

pub fn capillary_symbol(h0: f64, tau: f64) -> Result<DispersionSymbol, SymbolError> {
    if !(h0 > 0.0 && h0.is_finite()) {
        return Err(SymbolError::BadDepth(h0));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(SymbolError::BadTension(tau));
    }
    Ok(DispersionSymbol {
        family: SymbolFamily::Capillary { h0, tau },
    })
}

pub fn zaitsev_symbol(eps: f64) -> Result<DispersionSymbol, SymbolError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(SymbolError::BadEpsilon(eps));
    }
    Ok(DispersionSymbol {
        family: SymbolFamily::Zaitsev { eps },
    })
}

pub fn bbm_symbol(alpha: f64) -> Result<DispersionSymbol, SymbolError> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(SymbolError::AlphaOutOfRange(alpha));
    }
    Ok(DispersionSymbol {
        family: SymbolFamily::Bbm { alpha },
    })
}

pub fn gaussian_symbol(width: f64) -> Result<DispersionSymbol, SymbolError> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(SymbolError::BadWidth(width));
    }
    Ok(DispersionSymbol {
        family: SymbolFamily::Gaussian { width },
    })
}

impl DispersionSymbol {
    /// Wraps a closure. Only `p(|xi|)` is queried, so the result is even by construction.
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        integrable: bool,
    ) -> Self {
        Self {
            family: SymbolFamily::Custom {
                name: name.into(),
                eval: Arc::new(eval),
                integrable,
                alpha_equivalent: None,
            },
        }
    }

    pub fn family(&self) -> &SymbolFamily {
        &self.family
    }

    pub fn tag(&self) -> &str {
        match &self.family {
            SymbolFamily::Power { .. } => "power",
            SymbolFamily::WhithamTanh => "whitham",
            SymbolFamily::Capillary { .. } => "capillary",
            SymbolFamily::Zaitsev { .. } => "zaitsev",
            SymbolFamily::Bbm { .. } => "bbm",
            SymbolFamily::Gaussian { .. } => "gaussian",
            SymbolFamily::Custom { name, .. } => name,
        }
    }

    /// `p(xi)`. For the power family with `alpha < 0` the value at zero is `+inf`.
    pub fn evaluate(&self, xi: f64) -> f64 {
        let a = xi.abs();
        match &self.family {
            SymbolFamily::Power { alpha } => {
                if a == 0.0 {
                    if *alpha > 0.0 {
                        0.0
                    } else if *alpha == 0.0 {
                        1.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    a.powf(*alpha)
                }
            }
            SymbolFamily::WhithamTanh => tanhc(a).sqrt(),
            SymbolFamily::Capillary { h0, tau } => {
                (h0 * tanhc(a * h0)).sqrt() * (1.0 + tau * a * a).sqrt()
            }
            SymbolFamily::Zaitsev { eps } => a * a / (1.0 + eps * a * a),
            SymbolFamily::Bbm { alpha } => 1.0 / (1.0 + a.powf(*alpha)),
            SymbolFamily::Gaussian { width } => (-(a / width).powi(2)).exp(),
            SymbolFamily::Custom { eval, .. } => eval(a),
        }
    }

    /// `xi p(xi)`, the dispersion relation of the linear part; zero at `xi = 0`
    /// for every supported family (power requires `alpha > -1`).
    pub fn phase_rate(&self, xi: f64) -> f64 {
        if xi == 0.0 {
            0.0
        } else {
            xi * self.evaluate(xi)
        }
    }

    /// Effective high-frequency order: `p(xi) ~ |xi|^a` as `xi -> inf`.
    pub fn alpha_equivalent(&self) -> Option<f64> {
        match &self.family {
            SymbolFamily::Power { alpha } => Some(*alpha),
            SymbolFamily::WhithamTanh => Some(-0.5),
            SymbolFamily::Capillary { tau, .. } => Some(if *tau > 0.0 { 0.5 } else { -0.5 }),
            SymbolFamily::Zaitsev { .. } => Some(0.0),
            SymbolFamily::Bbm { alpha } => Some(-alpha),
            SymbolFamily::Gaussian { .. } => None,
            SymbolFamily::Custom { alpha_equivalent, .. } => *alpha_equivalent,
        }
    }

    /// Power-law order, when the symbol is exactly `|xi|^alpha`.
    pub fn power_alpha(&self) -> Option<f64> {
        match &self.family {
            SymbolFamily::Power { alpha } => Some(*alpha),
            _ => None,
        }
    }

    /// Whether `int p(xi) dxi` is finite.
    pub fn is_integrable(&self) -> bool {
        match &self.family {
            SymbolFamily::Power { .. }
            | SymbolFamily::WhithamTanh
            | SymbolFamily::Capillary { .. }
            | SymbolFamily::Zaitsev { .. } => false,
            SymbolFamily::Bbm { alpha } => *alpha > 1.0,
            SymbolFamily::Gaussian { .. } => true,
            SymbolFamily::Custom { integrable, .. } => *integrable,
        }
    }
}

/// `k(0) = (1 / 2 pi) int p(xi) dxi` by the trapezoid rule on `[-cutoff, cutoff]`
/// with `n_quad` intervals.
pub fn kernel_value_at_zero(
    p: &DispersionSymbol,
    cutoff: f64,
    n_quad: usize,
) -> Result<f64, SymbolError> {
    if !p.is_integrable() {
        return Err(SymbolError::NotIntegrable(p.tag().to_string()));
    }
    if !(cutoff > 0.0 && cutoff.is_finite()) || n_quad == 0 {
        return Err(SymbolError::BadQuadrature);
    }
    let h = 2.0 * cutoff / n_quad as f64;
    let mut sum = 0.5 * (p.evaluate(-cutoff) + p.evaluate(cutoff));
    for i in 1..n_quad {
        sum += p.evaluate(-cutoff + i as f64 * h);
    }
    Ok(sum * h / (2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn power_examples() {
        let p = power_symbol(1.0).unwrap();
        assert_eq!(p.evaluate(3.0), 3.0);
        assert_abs_diff_eq!(power_symbol(0.5).unwrap().evaluate(2.0), std::f64::consts::SQRT_2, epsilon = 1e-15);
        assert_eq!(power_symbol(0.0).unwrap().evaluate(7.0), 1.0);
        assert_eq!(power_symbol(0.0).unwrap().evaluate(0.0), 1.0);
        assert_eq!(power_symbol(0.7).unwrap().evaluate(0.0), 0.0);
        assert!(power_symbol(-0.5).unwrap().evaluate(0.0).is_infinite());
        assert_eq!(power_symbol(-0.5).unwrap().phase_rate(0.0), 0.0);
        for bad in [-1.0, -1.5, 2.01, f64::NAN] {
            assert!(power_symbol(bad).is_err());
        }
    }

    #[test]
    fn whitham_examples() {
        let p = whitham_symbol();
        assert_eq!(p.evaluate(0.0), 1.0);
        assert_abs_diff_eq!(p.evaluate(100.0), 0.1, epsilon = 1e-10);
        // tanh(1) = 0.7615941559557649 from its series; sqrt by hand: 0.872694...
        assert_abs_diff_eq!(p.evaluate(1.0), 0.7615941559557649f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.evaluate(1.0), 0.8726936, epsilon = 1e-7);
        // series branch joins the direct formula smoothly
        let below = p.evaluate(0.99e-4);
        let above = p.evaluate(1.01e-4);
        assert!(below > above && below - above < 1e-8);
    }

    #[test]
    fn capillary_examples() {
        assert_abs_diff_eq!(capillary_symbol(1.0, 0.0).unwrap().evaluate(0.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(capillary_symbol(4.0, 0.0).unwrap().evaluate(0.0), 2.0, epsilon = 1e-15);
        let p = capillary_symbol(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(p.evaluate(100.0), 10.0005, epsilon = 1e-3);
        assert!(capillary_symbol(-1.0, 0.0).is_err());
        assert!(capillary_symbol(1.0, -0.1).is_err());
    }

    #[test]
    fn zaitsev_examples() {
        let p = zaitsev_symbol(1.0).unwrap();
        assert_eq!(p.evaluate(1.0), 0.5);
        assert_eq!(p.evaluate(0.0), 0.0);
        let q = zaitsev_symbol(0.01).unwrap();
        assert_abs_diff_eq!(q.evaluate(1e8), 100.0, epsilon = 1e-6);
        assert!(q.evaluate(1e3) < 100.0);
        assert!(zaitsev_symbol(0.0).is_err());
    }

    #[test]
    fn kernel_at_zero() {
        let g = DispersionSymbol::custom("gauss", |x| (-x * x).exp(), true);
        let k0 = kernel_value_at_zero(&g, 12.0, 4000).unwrap();
        assert_abs_diff_eq!(k0, 0.28209479177387814, epsilon = 1e-12);
        let same = kernel_value_at_zero(&gaussian_symbol(1.0).unwrap(), 12.0, 4000).unwrap();
        assert_eq!(k0, same);
        assert!(matches!(
            kernel_value_at_zero(&zaitsev_symbol(1.0).unwrap(), 10.0, 100),
            Err(SymbolError::NotIntegrable(_))
        ));
        assert!(kernel_value_at_zero(&whitham_symbol(), 10.0, 100).is_err());
        assert!(kernel_value_at_zero(&power_symbol(0.5).unwrap(), 10.0, 100).is_err());
        let zero = DispersionSymbol::custom("zero", |_| 0.0, true);
        assert_eq!(kernel_value_at_zero(&zero, 5.0, 10).unwrap(), 0.0);
    }

    fn all_families() -> Vec<DispersionSymbol> {
        vec![
            power_symbol(-0.5).unwrap(),
            power_symbol(0.6).unwrap(),
            power_symbol(2.0).unwrap(),
            whitham_symbol(),
            capillary_symbol(1.0, 0.3).unwrap(),
            zaitsev_symbol(0.5).unwrap(),
            bbm_symbol(0.5).unwrap(),
            gaussian_symbol(2.0).unwrap(),
        ]
    }

    #[test]
    fn evenness_is_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for p in all_families() {
            for _ in 0..1000 {
                let xi: f64 = rng.gen_range(-50.0..50.0);
                assert_eq!(p.evaluate(xi).to_bits(), p.evaluate(-xi).to_bits(), "{:?}", p);
            }
        }
    }

    #[test]
    fn whitham_is_strictly_decreasing() {
        let p = whitham_symbol();
        let mut prev = p.evaluate(0.0);
        for i in 1..=10_000 {
            let v = p.evaluate(i as f64 * 1e-3);
            assert!(v < prev, "not decreasing at {}", i);
            prev = v;
        }
    }

    #[test]
    fn high_frequency_order() {
        let xi = 1e6f64;
        for p in [
            power_symbol(0.6).unwrap(),
            power_symbol(1.5).unwrap(),
            whitham_symbol(),
            capillary_symbol(1.0, 1.0).unwrap(),
        ] {
            let measured = p.evaluate(xi).ln() / xi.ln();
            assert!((measured - p.alpha_equivalent().unwrap()).abs() < 1e-2, "{:?}", p);
        }
    }
}
