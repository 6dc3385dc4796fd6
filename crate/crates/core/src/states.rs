//! Density matrices, pure states and purification.
//!
//! Two-qubit operators are ordered `|s a⟩` with the system qubit on the left,
//! so basis index = `2 * s + a`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmath::{hermitian_eigen, hermitian_eigenvalues, partial_trace, ComplexMatrix, Subsystem};

pub const TRACE_TOL: f64 = 1e-10;
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Eigenvalues in `[-EIGEN_CLIP, 0)` are treated as roundoff.
pub const EIGEN_CLIP: f64 = 1e-12;
pub const NORM_TOL: f64 = 1e-12;

/// Outcome of checking a candidate density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityReport {
    pub hermiticity_deviation: f64,
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
    pub passed: bool,
}

/// Checks Hermiticity, unit trace and positivity of `m`.
///
/// For a non-Hermitian input the minimum eigenvalue is that of its
/// Hermitian part.
pub fn validate(m: &ComplexMatrix) -> ValidityReport {
    if !m.is_square() {
        return ValidityReport {
            hermiticity_deviation: f64::INFINITY,
            trace_deviation: f64::INFINITY,
            min_eigenvalue: f64::NAN,
            passed: false,
        };
    }
    let hermiticity_deviation = m.hermiticity_deviation();
    let trace_deviation = (m.trace() - C64::new(1.0, 0.0)).norm();
    let min_eigenvalue = hermitian_eigenvalues(&m.hermitian_part())
        .map(|e| e.eigenvalues.last().copied().unwrap_or(f64::NAN))
        .unwrap_or(f64::NAN);
    let passed = hermiticity_deviation <= HERMITICITY_TOL
        && trace_deviation <= TRACE_TOL
        && min_eigenvalue >= -EIGEN_CLIP;
    ValidityReport { hermiticity_deviation, trace_deviation, min_eigenvalue, passed }
}

/// A validated qubit (2×2) or two-qubit (4×4) density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() || !matches!(matrix.rows(), 2 | 4) {
            return Err(Error::DimensionMismatch {
                expected: "2x2 or 4x4".into(),
                found: format!("{}x{}", matrix.rows(), matrix.cols()),
            });
        }
        let report = validate(&matrix);
        if !report.passed {
            return Err(Error::InvalidState {
                hermiticity: report.hermiticity_deviation,
                trace: report.trace_deviation,
                min_eigenvalue: report.min_eigenvalue,
            });
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Eigenvalues in descending order, roundoff negatives set to zero and
    /// rescaled to sum to one.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        clipped(hermitian_eigenvalues(&self.matrix)?.eigenvalues)
    }

    /// Reduced state of one qubit of a two-qubit state.
    pub fn marginal(&self, keep: Subsystem) -> Result<DensityMatrix> {
        DensityMatrix::new(partial_trace(&self.matrix, keep)?)
    }
}

pub(crate) fn clipped(mut eigenvalues: Vec<f64>) -> Result<Vec<f64>> {
    for v in &mut eigenvalues {
        if *v < -EIGEN_CLIP {
            return Err(Error::InvalidState {
                hermiticity: 0.0,
                trace: 0.0,
                min_eigenvalue: *v,
            });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    // The trace is one by construction; undo the eigensolver's drift so a
    // pure state gives exactly {1, 0, ...}.
    let total: f64 = eigenvalues.iter().sum();
    if total > 0.0 {
        eigenvalues.iter_mut().for_each(|v| *v /= total);
    }
    Ok(eigenvalues)
}

/// A normalized state vector of one or two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if !matches!(amplitudes.len(), 2 | 4) {
            return Err(Error::DimensionMismatch {
                expected: "2 or 4 amplitudes".into(),
                found: format!("{}", amplitudes.len()),
            });
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `|ψ⟩⟨ψ|`
    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix { matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes) }
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `(|00⟩ + |11⟩)/√2`, system qubit first.
pub fn bell_state() -> PureState {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = C64::new(0.0, 0.0);
    PureState { amplitudes: vec![h, z, z, h] }
}

/// `|Φ⁺⟩⟨Φ⁺|` with exact ½ entries; the projector of [`bell_state`] carries
/// the roundoff of (1/√2)².
pub fn bell_density() -> DensityMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        m[(r, c)] = C64::new(0.5, 0.0);
    }
    DensityMatrix { matrix: m }
}

/// Purifies a qubit state with an ancilla: `Σ_i √λ_i |v_i⟩ ⊗ |i⟩`.
///
/// `v_i` are the eigenvectors of `rho` in descending eigenvalue order and the
/// ancilla uses the computational basis in that same order.
pub fn purify(rho: &DensityMatrix) -> Result<PureState> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: "2x2 density matrix".into(),
            found: format!("{}x{}", rho.dim(), rho.dim()),
        });
    }
    let eig = hermitian_eigen(rho.matrix())?;
    let weights = clipped(eig.eigenvalues.clone())?;
    let vectors = eig.eigenvectors.as_ref().expect("eigenvectors requested");
    let mut amplitudes = vec![C64::new(0.0, 0.0); 4];
    for (i, w) in weights.iter().enumerate() {
        let root = w.sqrt();
        for s in 0..2 {
            amplitudes[2 * s + i] += vectors[(s, i)] * root;
        }
    }
    // Renormalize the tiny drift left by clipping and the eigen solver.
    let n = norm(&amplitudes);
    for a in &mut amplitudes {
        *a /= n;
    }
    PureState::new(amplitudes)
}
