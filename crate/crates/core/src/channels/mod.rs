//! Qubit dynamical maps acting on the system half of a Bell pair.
//!
//! Each named family has a closed-form solution for the evolved
//! system–ancilla state; every family also exposes its time-local generator,
//! which [`integrate_master_equation`] integrates independently.

mod bath;
mod integrator;
mod rate;

pub use bath::{g_function, LorentzianBath};
pub use integrator::{integrate_master_equation, integrator_deviation, DEFAULT_STEP};
pub use rate::{gamma_integral, RateFunction, RateTable};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qmath::{ops, ComplexMatrix};
use crate::states::{bell_density, validate, DensityMatrix};

/// Where the scalar rate of one dissipator comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum TermRate {
    /// `scale · γ(t)`
    Function { rate: RateFunction, scale: f64 },
    /// `γ(t) = -2 Re(Ġ/G)` of a Lorentzian bath.
    Lorentzian(LorentzianBath),
}

impl TermRate {
    pub fn value(&self, t: f64) -> Result<f64> {
        match self {
            TermRate::Function { rate, scale } => Ok(scale * rate.value(t)?),
            TermRate::Lorentzian(bath) => bath.decay_rate(t),
        }
    }
}

/// One dissipator `γ(t) (L ρ L† - ½{L†L, ρ})` with a 2×2 jump operator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorTerm {
    pub rate: TermRate,
    pub jump: ComplexMatrix,
}

/// Time-local generator `L_t ρ = -i[H, ρ] + Σ_k γ_k(t) D[L_k] ρ` on one qubit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Generator {
    pub terms: Vec<GeneratorTerm>,
    /// Optional constant 2×2 Hamiltonian.
    pub hamiltonian: Option<ComplexMatrix>,
}

impl Generator {
    pub fn check(&self) -> Result<()> {
        for term in &self.terms {
            if term.jump.rows() != 2 || term.jump.cols() != 2 {
                return Err(Error::InvalidParameter("jump operators must be 2x2".into()));
            }
        }
        if let Some(h) = &self.hamiltonian {
            if h.rows() != 2 || h.cols() != 2 {
                return Err(Error::InvalidParameter("the Hamiltonian must be 2x2".into()));
            }
            let deviation = h.hermiticity_deviation();
            if deviation > crate::qmath::HERMITIAN_TOL {
                return Err(Error::NotHermitian { deviation });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChannelModel {
    /// `½γ(t)(σ_z ρ σ_z - ρ)`
    Dephasing(RateFunction),
    /// Spontaneous decay into a Lorentzian reservoir at resonance.
    AmplitudeDamping(LorentzianBath),
    /// `½ Σ_k γ_k(t)(σ_k ρ σ_k - ρ)` with k = x, y, z.
    Pauli([RateFunction; 3]),
    /// Arbitrary generator, evolved by numerical integration only.
    Generic(Generator),
}

impl ChannelModel {
    pub fn family_name(&self) -> &'static str {
        match self {
            ChannelModel::Dephasing(_) => "dephasing",
            ChannelModel::AmplitudeDamping(_) => "amplitude-damping",
            ChannelModel::Pauli(_) => "pauli",
            ChannelModel::Generic(_) => "generic",
        }
    }

    pub fn check(&self) -> Result<()> {
        match self {
            ChannelModel::AmplitudeDamping(bath) => bath.check(),
            ChannelModel::Generic(g) => g.check(),
            _ => Ok(()),
        }
    }

    /// Characteristic rate used for the default time horizon.
    pub fn max_rate(&self) -> f64 {
        match self {
            ChannelModel::Dephasing(r) => r.scale(),
            ChannelModel::AmplitudeDamping(bath) => bath.gamma0,
            ChannelModel::Pauli(rates) => rates.iter().map(RateFunction::scale).fold(0.0, f64::max),
            ChannelModel::Generic(g) => g
                .terms
                .iter()
                .map(|term| match &term.rate {
                    TermRate::Function { rate, scale } => rate.scale() * scale.abs(),
                    TermRate::Lorentzian(bath) => bath.gamma0,
                })
                .fold(0.0, f64::max),
        }
    }

    /// Default horizon `20 / max-rate` (20 time units for a rate-free channel).
    pub fn default_t_max(&self) -> f64 {
        let rate = self.max_rate();
        if rate > 0.0 {
            20.0 / rate
        } else {
            20.0
        }
    }

    /// Latest time the channel's rate functions can be evaluated at.
    pub fn horizon(&self) -> f64 {
        let rates: Vec<&RateFunction> = match self {
            ChannelModel::Dephasing(r) => vec![r],
            ChannelModel::Pauli(rs) => rs.iter().collect(),
            ChannelModel::Generic(g) => g
                .terms
                .iter()
                .filter_map(|term| match &term.rate {
                    TermRate::Function { rate, .. } => Some(rate),
                    TermRate::Lorentzian(_) => None,
                })
                .collect(),
            ChannelModel::AmplitudeDamping(_) => vec![],
        };
        rates.iter().map(|r| r.horizon()).fold(f64::INFINITY, f64::min)
    }

    /// The time-local generator of this family.
    pub fn generator(&self) -> Generator {
        let half = |rate: &RateFunction, jump: ComplexMatrix| GeneratorTerm {
            rate: TermRate::Function { rate: rate.clone(), scale: 0.5 },
            jump,
        };
        match self {
            // ½γ(σρσ - ρ) = ½γ D[σ]ρ because σ² = 1
            ChannelModel::Dephasing(rate) => Generator {
                terms: vec![half(rate, ops::sigma_z())],
                hamiltonian: None,
            },
            ChannelModel::Pauli([g1, g2, g3]) => Generator {
                terms: vec![
                    half(g1, ops::sigma_x()),
                    half(g2, ops::sigma_y()),
                    half(g3, ops::sigma_z()),
                ],
                hamiltonian: None,
            },
            ChannelModel::AmplitudeDamping(bath) => Generator {
                terms: vec![GeneratorTerm {
                    rate: TermRate::Lorentzian(*bath),
                    jump: ops::sigma_minus(),
                }],
                hamiltonian: None,
            },
            ChannelModel::Generic(g) => g.clone(),
        }
    }

    /// Coefficients `(F, G, H)` of the evolved Pauli pair: decay factors of
    /// the z, x and y Bloch components.
    pub fn pauli_factors(rates: &[RateFunction; 3], t: f64) -> Result<(f64, f64, f64)> {
        let g1 = gamma_integral(&rates[0], t)?;
        let g2 = gamma_integral(&rates[1], t)?;
        let g3 = gamma_integral(&rates[2], t)?;
        Ok(((-(g1 + g2)).exp(), (-(g2 + g3)).exp(), (-(g1 + g3)).exp()))
    }
}

/// Bell pair with the system coherence scaled by `coherence`.
pub fn dephased_bell_matrix(coherence: f64) -> ComplexMatrix {
    let c = 0.5 * coherence;
    ComplexMatrix::from_real(
        4,
        4,
        &[
            0.5, 0.0, 0.0, c, //
            0.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 0.0, //
            c, 0.0, 0.0, 0.5,
        ],
    )
    .expect("4x4")
}

/// Bell pair after amplitude damping with amplitude `g`.
///
/// The excited population of the system shrinks by `|G|²` and its coherence
/// by `G`; the lower-right entry is `|G|²/2`.
pub fn damped_bell_matrix(g: C64) -> ComplexMatrix {
    let zero = C64::new(0.0, 0.0);
    let half = |x: f64| C64::new(0.5 * x, 0.0);
    let p = g.norm_sqr();
    ComplexMatrix::from_vec(
        4,
        4,
        vec![
            half(1.0), zero, zero, g * 0.5, //
            zero, half(1.0 - p), zero, zero, //
            zero, zero, zero, zero, //
            g.conj() * 0.5, zero, zero, half(p),
        ],
    )
    .expect("4x4")
}

/// Bell pair after a Pauli channel with Bloch decay factors `(F, G, H)`.
pub fn pauli_bell_matrix(f: f64, g: f64, h: f64) -> ComplexMatrix {
    ComplexMatrix::from_real(
        4,
        4,
        &[
            1.0 + f, 0.0, 0.0, g + h, //
            0.0, 1.0 - f, g - h, 0.0, //
            0.0, g - h, 1.0 - f, 0.0, //
            g + h, 0.0, 0.0, 1.0 + f,
        ],
    )
    .expect("4x4")
    .scale_real(0.25)
}

/// Closed-form eigenvalues of [`pauli_bell_matrix`].
pub fn pauli_bell_eigenvalues(f: f64, g: f64, h: f64) -> [f64; 4] {
    [
        (1.0 + f + (g + h)) / 4.0,
        (1.0 + f - (g + h)) / 4.0,
        (1.0 - f + (g - h)) / 4.0,
        (1.0 - f - (g - h)) / 4.0,
    ]
}

/// The system–ancilla state at time `t`, starting from the Bell pair.
///
/// Fails with [`Error::Unphysical`] if the channel does not map the Bell pair
/// to a density matrix at `t`.
pub fn evolve_bell(channel: &ChannelModel, t: f64) -> Result<DensityMatrix> {
    channel.check()?;
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    if t == 0.0 {
        return Ok(bell_density());
    }
    let matrix = match channel {
        ChannelModel::Dephasing(rate) => dephased_bell_matrix((-gamma_integral(rate, t)?).exp()),
        ChannelModel::AmplitudeDamping(bath) => damped_bell_matrix(g_function(bath, t)?),
        ChannelModel::Pauli(rates) => {
            let (f, g, h) = ChannelModel::pauli_factors(rates, t)?;
            pauli_bell_matrix(f, g, h)
        }
        ChannelModel::Generic(_) => return integrate_master_equation(channel, t, DEFAULT_STEP),
    };
    into_state(matrix, t)
}

pub(crate) fn into_state(matrix: ComplexMatrix, t: f64) -> Result<DensityMatrix> {
    let report = validate(&matrix);
    if report.min_eigenvalue < -crate::states::EIGEN_CLIP {
        return Err(Error::Unphysical { t, min_eigenvalue: report.min_eigenvalue });
    }
    DensityMatrix::new(matrix)
}
