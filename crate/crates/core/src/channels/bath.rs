use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Below this `|λ² - 2γ₀λ|^{1/2}` the critically damped limit is used.
const CRITICAL_TOL: f64 = 1e-12;

/// Resonant Lorentzian reservoir driving spontaneous decay of a qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianBath {
    /// Spectral width λ; the reservoir correlation time is 1/λ.
    pub lambda: f64,
    /// Coupling strength γ₀; the system relaxation time is 1/γ₀.
    pub gamma0: f64,
}

#[derive(Debug, Clone, Copy)]
enum Regime {
    /// `d = √(λ² - 2γ₀λ)` real
    Overdamped(f64),
    /// `d' = √(2γ₀λ - λ²)`
    Oscillating(f64),
    Critical,
}

impl LorentzianBath {
    pub fn new(lambda: f64, gamma0: f64) -> Result<Self> {
        let bath = Self { lambda, gamma0 };
        bath.check()?;
        Ok(bath)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma0 must be > 0, got {}", self.gamma0)));
        }
        Ok(())
    }

    /// Reservoir correlation time `1/λ`.
    pub fn correlation_time(&self) -> f64 {
        1.0 / self.lambda
    }

    /// System relaxation time `1/γ₀`.
    pub fn relaxation_time(&self) -> f64 {
        1.0 / self.gamma0
    }

    /// `λ > 2γ₀`: |G| decays monotonically.
    pub fn is_weak_coupling(&self) -> bool {
        self.lambda > 2.0 * self.gamma0
    }

    fn regime(&self) -> Regime {
        let disc = self.lambda * self.lambda - 2.0 * self.gamma0 * self.lambda;
        let d = disc.abs().sqrt();
        if d < CRITICAL_TOL {
            Regime::Critical
        } else if disc > 0.0 {
            Regime::Overdamped(d)
        } else {
            Regime::Oscillating(d)
        }
    }

    /// `G(t)` and `Ġ(t)`.
    pub fn g_and_derivative(&self, t: f64) -> Result<(f64, f64)> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeTime(t));
        }
        let l = self.lambda;
        Ok(match self.regime() {
            Regime::Overdamped(d) => {
                // Written as two decaying exponentials so large t cannot overflow cosh.
                let (r1, r2) = ((-l + d) / 2.0, (-l - d) / 2.0);
                let (a, b) = ((1.0 + l / d) / 2.0, (1.0 - l / d) / 2.0);
                let (e1, e2) = ((r1 * t).exp(), (r2 * t).exp());
                (a * e1 + b * e2, a * r1 * e1 + b * r2 * e2)
            }
            Regime::Oscillating(d) => {
                let w = d / 2.0;
                let env = (-l * t / 2.0).exp();
                let (s, c) = (w * t).sin_cos();
                let g = env * (c + (l / d) * s);
                (g, -l / 2.0 * g + env * (-w * s + (l / 2.0) * c))
            }
            Regime::Critical => {
                let env = (-l * t / 2.0).exp();
                (env * (1.0 + l * t / 2.0), -env * l * l * t / 4.0)
            }
        })
    }

    /// Time-local decay rate `γ(t) = -2 Re(Ġ/G)`; singular at zeros of G.
    pub fn decay_rate(&self, t: f64) -> Result<f64> {
        let (g, dg) = self.g_and_derivative(t)?;
        Ok(-2.0 * dg / g)
    }
}

/// The decoherence amplitude `G(t)`; real for this bath, so `Im G = 0`.
pub fn g_function(bath: &LorentzianBath, t: f64) -> Result<C64> {
    bath.check()?;
    Ok(C64::new(bath.g_and_derivative(t)?.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn naive_overdamped(l: f64, g0: f64, t: f64) -> f64 {
        let d = (l * l - 2.0 * g0 * l).sqrt();
        (-l * t / 2.0).exp() * ((d * t / 2.0).cosh() + l / d * (d * t / 2.0).sinh())
    }

    #[test]
    fn g_is_one_at_origin() {
        for (l, g0) in [(4.0, 1.0), (0.2, 2.0), (2.0, 1.0)] {
            let bath = LorentzianBath::new(l, g0).unwrap();
            assert_eq!(g_function(&bath, 0.0).unwrap(), C64::new(1.0, 0.0));
            assert_abs_diff_eq!(bath.g_and_derivative(0.0).unwrap().1, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn overdamped_matches_hyperbolic_form() {
        let bath = LorentzianBath::new(4.0, 1.0).unwrap();
        for t in [0.1, 1.0, 3.3, 10.0] {
            assert_abs_diff_eq!(
                g_function(&bath, t).unwrap().re,
                naive_overdamped(4.0, 1.0, t),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn weak_coupling_is_monotone() {
        let bath = LorentzianBath::new(4.0, 1.0).unwrap();
        let values: Vec<f64> = (0..=1000)
            .map(|i| g_function(&bath, i as f64 * 0.01).unwrap().norm())
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn strong_coupling_first_zero() {
        let (l, g0) = (0.2_f64, 2.0_f64);
        let bath = LorentzianBath::new(l, g0).unwrap();
        let dp = (2.0 * g0 * l - l * l).sqrt();
        assert_abs_diff_eq!(dp, 0.76_f64.sqrt(), epsilon = 1e-15);
        // Independent root of tan(d't/2) = -d'/λ: bisect on sin + (λ/d') cos form.
        let f = |t: f64| (dp * t / 2.0).tan() + dp / l;
        let (mut a, mut b) = (
            (std::f64::consts::PI / 2.0 + 1e-9) * 2.0 / dp,
            std::f64::consts::PI * 2.0 / dp - 1e-9,
        );
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(a) * f(m) <= 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
        let root = 0.5 * (a + b);
        assert_abs_diff_eq!(g_function(&bath, root).unwrap().re, 0.0, epsilon = 1e-12);
        // and G has no earlier sign change
        assert!((0..100).all(|i| g_function(&bath, root * i as f64 / 100.0).unwrap().re > 0.0));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for (l, g0) in [(4.0, 1.0), (0.2, 2.0), (2.0, 1.0)] {
            let bath = LorentzianBath::new(l, g0).unwrap();
            for t in [0.3, 1.7, 5.2] {
                let h = 1e-5;
                let fd = (bath.g_and_derivative(t + h).unwrap().0 - bath.g_and_derivative(t - h).unwrap().0)
                    / (2.0 * h);
                assert_abs_diff_eq!(bath.g_and_derivative(t).unwrap().1, fd, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn critical_limit_is_continuous() {
        let near = LorentzianBath::new(2.0, 1.0 - 1e-7).unwrap();
        let critical = LorentzianBath::new(2.0, 1.0).unwrap();
        for t in [0.5, 2.0, 6.0] {
            assert_abs_diff_eq!(
                g_function(&near, t).unwrap().re,
                g_function(&critical, t).unwrap().re,
                epsilon = 1e-6
            );
        }
    }

    #[test]
    fn invalid_bath_rejected() {
        assert!(LorentzianBath::new(0.0, 1.0).is_err());
        assert!(LorentzianBath::new(1.0, -1.0).is_err());
    }
}
