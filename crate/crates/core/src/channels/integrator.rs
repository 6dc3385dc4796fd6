use num_complex::Complex64 as C64;

use super::{ChannelModel, TermRate};
use crate::error::{Error, Result};
use crate::qmath::{kron, ComplexMatrix};
use crate::states::{bell_density, DensityMatrix};

/// Step used when a generic channel is evolved through [`super::evolve_bell`].
pub const DEFAULT_STEP: f64 = 1e-3;

const RENORMALIZE_ABOVE: f64 = 1e-12;
const MAX_TRACE_DRIFT: f64 = 1e-8;

struct LiftedTerm {
    rate: TermRate,
    jump: ComplexMatrix,
    jump_dag: ComplexMatrix,
    /// L†L
    number: ComplexMatrix,
}

struct Liouvillian {
    terms: Vec<LiftedTerm>,
    hamiltonian: Option<ComplexMatrix>,
}

impl Liouvillian {
    fn new(channel: &ChannelModel) -> Self {
        let generator = channel.generator();
        let id = ComplexMatrix::identity(2);
        let terms = generator
            .terms
            .into_iter()
            .map(|term| {
                let jump = kron(&term.jump, &id);
                let jump_dag = jump.adjoint();
                let number = &jump_dag * &jump;
                LiftedTerm { rate: term.rate, jump, jump_dag, number }
            })
            .collect();
        let hamiltonian = generator.hamiltonian.map(|h| kron(&h, &id));
        Self { terms, hamiltonian }
    }

    /// `(L_t ⊗ id)(ρ)`
    fn apply(&self, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let mut out = ComplexMatrix::zeros(4, 4);
        if let Some(h) = &self.hamiltonian {
            out = &out - &h.commutator(rho).scale(C64::new(0.0, 1.0));
        }
        for term in &self.terms {
            let gamma = term.rate.value(t)?;
            if gamma == 0.0 {
                continue;
            }
            let jump = &(&term.jump * rho) * &term.jump_dag;
            let decay = term.number.anticommutator(rho).scale_real(0.5);
            out = &out + &(&jump - &decay).scale_real(gamma);
        }
        Ok(out)
    }
}

fn axpy(y: &ComplexMatrix, h: f64, k: &ComplexMatrix) -> ComplexMatrix {
    y + &k.scale_real(h)
}

/// Fixed-step classical RK4 integration of the system–ancilla master
/// equation from the Bell pair up to `t_end`.
///
/// The step is shrunk so an integer number of steps lands on `t_end`. The
/// result is Hermitized; a trace drift between 1e-12 and 1e-8 is renormalized
/// and anything larger is rejected.
pub fn integrate_master_equation(channel: &ChannelModel, t_end: f64, step: f64) -> Result<DensityMatrix> {
    super::into_state(integrate_matrix(channel, t_end, step)?, t_end)
}

/// The integrated matrix before the positivity check.
fn integrate_matrix(channel: &ChannelModel, t_end: f64, step: f64) -> Result<ComplexMatrix> {
    channel.check()?;
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidParameter(format!("integration step must be > 0, got {step}")));
    }
    if t_end < 0.0 || t_end.is_nan() {
        return Err(Error::NegativeTime(t_end));
    }
    let liouvillian = Liouvillian::new(channel);
    let mut rho = bell_density().into_matrix();
    let n = (t_end / step).ceil() as usize;
    if n > 0 {
        let h = t_end / n as f64;
        for i in 0..n {
            let t = i as f64 * h;
            let k1 = liouvillian.apply(t, &rho)?;
            let k2 = liouvillian.apply(t + h / 2.0, &axpy(&rho, h / 2.0, &k1))?;
            let k3 = liouvillian.apply(t + h / 2.0, &axpy(&rho, h / 2.0, &k2))?;
            let k4 = liouvillian.apply(t + h, &axpy(&rho, h, &k3))?;
            let incr = &(&k1 + &k2.scale_real(2.0)) + &(&k3.scale_real(2.0) + &k4);
            rho = axpy(&rho, h / 6.0, &incr);
        }
    }

    let mut rho = rho.hermitian_part();
    let trace = rho.trace().re;
    let drift = (trace - 1.0).abs();
    if drift.is_nan() || drift > MAX_TRACE_DRIFT {
        return Err(Error::StepTooLarge { drift });
    }
    if drift > RENORMALIZE_ABOVE {
        rho = rho.scale_real(1.0 / trace);
    }
    Ok(rho)
}

/// Largest entry-wise gap between the integrated and closed-form Bell
/// evolution over `times`. Each time is integrated from scratch; the
/// integrated matrix is compared as is, so a coarse step that breaks
/// positivity still yields a deviation.
pub fn integrator_deviation(channel: &ChannelModel, times: &[f64], step: f64) -> Result<f64> {
    let gap = |&t: &f64| -> Result<f64> {
        let numeric = integrate_matrix(channel, t, step)?;
        let exact = super::evolve_bell(channel, t)?;
        Ok(numeric.max_abs_diff(exact.matrix()))
    };
    #[cfg(feature = "parallel")]
    let gaps: Result<Vec<f64>> = {
        use rayon::prelude::*;
        times.par_iter().map(gap).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let gaps: Result<Vec<f64>> = times.iter().map(gap).collect();
    Ok(gaps?.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::super::{evolve_bell, Generator, GeneratorTerm, LorentzianBath, RateFunction};
    use super::*;
    use crate::qmath::ops;

    #[test]
    fn constant_dephasing_matches_closed_form() {
        let ch = ChannelModel::Dephasing(RateFunction::constant(1.0));
        let numeric = integrate_master_equation(&ch, 1.0, 1e-3).unwrap();
        let exact = evolve_bell(&ch, 1.0).unwrap();
        assert!(numeric.matrix().max_abs_diff(exact.matrix()) < 1e-6);
    }

    #[test]
    fn weak_coupling_damping_matches_closed_form() {
        let ch = ChannelModel::AmplitudeDamping(LorentzianBath::new(4.0, 1.0).unwrap());
        let numeric = integrate_master_equation(&ch, 2.0, 1e-3).unwrap();
        let exact = evolve_bell(&ch, 2.0).unwrap();
        assert!(numeric.matrix().max_abs_diff(exact.matrix()) < 1e-6);
    }

    #[test]
    fn zero_rates_leave_bell_unchanged() {
        let ch = ChannelModel::Pauli([RateFunction::zero(), RateFunction::zero(), RateFunction::zero()]);
        let rho = integrate_master_equation(&ch, 3.0, 1e-2).unwrap();
        assert_eq!(rho.matrix().max_abs_diff(bell_density().matrix()), 0.0);
    }

    #[test]
    fn hamiltonian_term_rotates_coherence() {
        // H = (ω/2)σ_z rotates the |00⟩⟨11| coherence by e^{-iωt}.
        let omega = 1.3;
        let ch = ChannelModel::Generic(Generator {
            terms: vec![],
            hamiltonian: Some(ops::sigma_z().scale_real(omega / 2.0)),
        });
        let t = 0.9;
        let rho = integrate_master_equation(&ch, t, 1e-3).unwrap();
        let expected = C64::from_polar(0.5, -omega * t);
        assert!((rho.matrix()[(0, 3)] - expected).norm() < 1e-9);
    }

    #[test]
    fn generic_pauli_matches_named_family() {
        let rates = [RateFunction::constant(0.3), RateFunction::sinusoid(0.5, 2.0), RateFunction::constant(0.2)];
        let named = ChannelModel::Pauli(rates.clone());
        let generic = ChannelModel::Generic(Generator {
            terms: vec![
                GeneratorTerm { rate: TermRate::Function { rate: rates[0].clone(), scale: 0.5 }, jump: ops::sigma_x() },
                GeneratorTerm { rate: TermRate::Function { rate: rates[1].clone(), scale: 0.5 }, jump: ops::sigma_y() },
                GeneratorTerm { rate: TermRate::Function { rate: rates[2].clone(), scale: 0.5 }, jump: ops::sigma_z() },
            ],
            hamiltonian: None,
        });
        let a = evolve_bell(&named, 1.5).unwrap();
        let b = evolve_bell(&generic, 1.5).unwrap();
        assert!(a.matrix().max_abs_diff(b.matrix()) < 1e-6);
    }

    #[test]
    fn coarse_step_reports_deviation() {
        let ch = ChannelModel::AmplitudeDamping(LorentzianBath::new(4.0, 1.0).unwrap());
        let dev = integrator_deviation(&ch, &[0.2, 1.0, 2.0], 0.5).unwrap();
        assert!(dev > 1e-6 && dev < 0.1, "{dev}");
    }

    #[test]
    fn invalid_step_rejected() {
        let ch = ChannelModel::Dephasing(RateFunction::constant(1.0));
        assert!(integrate_master_equation(&ch, 1.0, 0.0).is_err());
        assert!(integrate_master_equation(&ch, 1.0, -1e-3).is_err());
    }
}
