//! Entropic quantities of a system qubit entangled with a non-evolving
//! ancilla. All values are in bits.
//!
//! The system is always the first tensor factor of a two-qubit state and the
//! ancilla the second. Because the system, ancilla and environment together
//! stay in a pure state, the entropy of the evolved system–ancilla pair is
//! also the entropy the environment has acquired (the entropy exchange).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmath::Subsystem;
use crate::states::{DensityMatrix, PureState};

/// Slack allowed on the quantum-loss bounds.
pub const BOUND_TOL: f64 = 1e-9;

/// `-Σ p log₂ p` with `0 log 0 = 0`.
pub fn shannon_bits(probabilities: &[f64]) -> f64 {
    let h: f64 = probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    // -0.0 from an all-zero-or-one spectrum
    h.max(0.0)
}

/// Binary entropy `H₂(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    shannon_bits(&[p, 1.0 - p])
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(shannon_bits(&rho.spectrum()?))
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "4x4 two-qubit state".into(),
            found: format!("{0}x{0}", rho.dim()),
        });
    }
    Ok(())
}

/// `S(AB) - S(B)` where `B` is the `condition_on` factor.
pub fn conditional_entropy(rho_ab: &DensityMatrix, condition_on: Subsystem) -> Result<f64> {
    require_two_qubits(rho_ab)?;
    Ok(von_neumann_entropy(rho_ab)? - von_neumann_entropy(&rho_ab.marginal(condition_on)?)?)
}

/// `S(A) + S(B) - S(AB)`
pub fn mutual_information(rho_ab: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho_ab)?;
    let sa = von_neumann_entropy(&rho_ab.marginal(Subsystem::First)?)?;
    let sb = von_neumann_entropy(&rho_ab.marginal(Subsystem::Second)?)?;
    Ok(sa + sb - von_neumann_entropy(rho_ab)?)
}

/// Entropy of the evolved system–ancilla state, equal to the entropy the
/// environment picked up.
pub fn entropy_exchange(rho_sa_t: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho_sa_t)?;
    von_neumann_entropy(rho_sa_t)
}

/// `S(evolved system) - S_e`
pub fn coherent_information(rho_sa_t: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho_sa_t)?;
    Ok(von_neumann_entropy(&rho_sa_t.marginal(Subsystem::First)?)? - entropy_exchange(rho_sa_t)?)
}

/// `S(initial system) - I_c`, checked against `0 ≤ L_Q ≤ 2 min(S(ρ^S), S_e)`.
///
/// `s_system_initial` is the entropy of the system marginal *before*
/// evolution (1 bit for the Bell start), while `rho_sa_t` is the evolved pair.
pub fn quantum_loss(rho_sa_t: &DensityMatrix, s_system_initial: f64) -> Result<f64> {
    require_two_qubits(rho_sa_t)?;
    let s_sys = von_neumann_entropy(&rho_sa_t.marginal(Subsystem::First)?)?;
    let s_e = entropy_exchange(rho_sa_t)?;
    checked_loss(s_system_initial, s_sys, s_e)
}

fn checked_loss(s_system_initial: f64, s_system: f64, s_exchange: f64) -> Result<f64> {
    let loss = s_system_initial - (s_system - s_exchange);
    let upper = 2.0 * s_system_initial.min(s_exchange);
    if !(loss >= -BOUND_TOL && loss <= upper + BOUND_TOL) {
        return Err(Error::Inconsistent {
            quantity: "quantum loss",
            value: loss,
            lower: 0.0,
            upper,
        });
    }
    Ok(loss)
}

/// `2 S_e - L_Q`
pub fn quantum_noise(rho_sa_t: &DensityMatrix, quantum_loss: f64) -> Result<f64> {
    Ok(2.0 * entropy_exchange(rho_sa_t)? - quantum_loss)
}

/// Mutual entanglement `2 S(ρ^A)` of a pure two-qubit state.
pub fn mutual_entanglement_initial(psi: &PureState) -> Result<f64> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > crate::states::NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    if psi.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: "two-qubit pure state".into(),
            found: format!("{} amplitudes", psi.dim()),
        });
    }
    Ok(2.0 * von_neumann_entropy(&psi.projector().marginal(Subsystem::Second)?)?)
}

/// Every entropic quantity of one evolved system–ancilla state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropySnapshot {
    pub t: f64,
    pub s_system: f64,
    pub s_ancilla: f64,
    pub s_exchange: f64,
    pub coherent_info: f64,
    pub quantum_loss: f64,
    pub mutual_info: f64,
    pub quantum_noise: f64,
}

impl EntropySnapshot {
    /// Computes all quantities from one spectrum of the joint state and one of
    /// each marginal.
    pub fn from_state(t: f64, rho_sa_t: &DensityMatrix, s_system_initial: f64) -> Result<Self> {
        require_two_qubits(rho_sa_t)?;
        let s_system = von_neumann_entropy(&rho_sa_t.marginal(Subsystem::First)?)?;
        let s_ancilla = von_neumann_entropy(&rho_sa_t.marginal(Subsystem::Second)?)?;
        let s_exchange = von_neumann_entropy(rho_sa_t)?;
        let quantum_loss = checked_loss(s_system_initial, s_system, s_exchange)?;
        Ok(Self {
            t,
            s_system,
            s_ancilla,
            s_exchange,
            coherent_info: s_system - s_exchange,
            quantum_loss,
            mutual_info: s_system + s_ancilla - s_exchange,
            quantum_noise: 2.0 * s_exchange - quantum_loss,
        })
    }

    /// Remaining mutual entanglement `I_Q - L_Q`, with `I_Q = 2 s_system_initial`.
    pub fn remaining_mutual_entanglement(&self, s_system_initial: f64) -> f64 {
        2.0 * s_system_initial - self.quantum_loss
    }
}
