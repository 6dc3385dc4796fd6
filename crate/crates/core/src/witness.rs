//! Quantum-loss trajectories and the non-Markovianity measure built on them.
//!
//! A channel is sampled on a uniform grid starting from the Bell pair. Runs
//! of grid points where the loss decreases become intervals, whose endpoints
//! are then refined by bisection against the continuous loss evaluator. The
//! measure is the sum of the loss drops over those intervals; since the
//! integrand is a total derivative this is exact, not a quadrature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{evolve_bell, g_function, ChannelModel, RateFunction};
use crate::entropy::EntropySnapshot;
use crate::error::{Error, Result};

/// Derivatives above `-DEFAULT_THRESHOLD` count as flat.
pub const DEFAULT_THRESHOLD: f64 = 1e-9;
pub const DEFAULT_POINTS: usize = 2001;
/// Tolerance of the analytic Markovianity predicates.
pub const VERDICT_TOL: f64 = 1e-12;
pub const VERDICT_GRID: usize = 10_000;

/// Entropy of the system half of the Bell pair before evolution.
const BELL_SYSTEM_ENTROPY: f64 = 1.0;

/// How grid points of a trajectory are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon data parallelism; identical to `Sequential` without the
    /// `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Markovian,
    NonMarkovian,
    Unavailable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Markovian => "markovian",
            Verdict::NonMarkovian => "non-markovian",
            Verdict::Unavailable => "unavailable",
        }
    }

    fn from_markovian(markovian: bool) -> Self {
        if markovian {
            Verdict::Markovian
        } else {
            Verdict::NonMarkovian
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Open time interval `(start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

/// A decreasing-loss interval and the (negative) change of loss across it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossDrop {
    pub start: f64,
    pub end: f64,
    pub drop: f64,
}

/// Entropic quantities of one channel sampled on a uniform grid from t = 0.
#[derive(Debug, Clone)]
pub struct Trajectory {
    channel: ChannelModel,
    pub times: Vec<f64>,
    pub snapshots: Vec<EntropySnapshot>,
    /// dL_Q/dt: central differences inside, one-sided at the ends.
    pub derivative: Vec<f64>,
}

impl Trajectory {
    pub fn channel(&self) -> &ChannelModel {
        &self.channel
    }

    pub fn t_max(&self) -> f64 {
        *self.times.last().expect("non-empty grid")
    }

    pub fn spacing(&self) -> f64 {
        self.t_max() / (self.times.len() - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn quantum_loss(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.quantum_loss).collect()
    }

    pub fn mutual_info(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.mutual_info).collect()
    }

    /// dI/dt on the grid, same stencil as [`Self::derivative`].
    pub fn mutual_info_derivative(&self) -> Vec<f64> {
        finite_difference(&self.times, &self.mutual_info())
    }

    /// Snapshot of the channel at an arbitrary time.
    pub fn snapshot_at(&self, t: f64) -> Result<EntropySnapshot> {
        snapshot(&self.channel, t)
    }

    /// Quantum loss at an arbitrary time.
    pub fn loss_at(&self, t: f64) -> Result<f64> {
        Ok(self.snapshot_at(t)?.quantum_loss)
    }
}

fn snapshot(channel: &ChannelModel, t: f64) -> Result<EntropySnapshot> {
    EntropySnapshot::from_state(t, &evolve_bell(channel, t)?, BELL_SYSTEM_ENTROPY)
}

/// Samples the channel with the default [`Execution`].
pub fn sample_trajectory(channel: &ChannelModel, t_max: f64, n_points: usize) -> Result<Trajectory> {
    sample_trajectory_with(channel, t_max, n_points, Execution::default())
}

pub fn sample_trajectory_with(
    channel: &ChannelModel,
    t_max: f64,
    n_points: usize,
    execution: Execution,
) -> Result<Trajectory> {
    channel.check()?;
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::InvalidGrid(format!("t_max must be > 0, got {t_max}")));
    }
    if n_points < 3 {
        return Err(Error::InvalidGrid(format!("need at least 3 points, got {n_points}")));
    }
    if t_max > channel.horizon() {
        return Err(Error::InvalidGrid(format!(
            "t_max {t_max} exceeds the last tabulated rate time {}",
            channel.horizon()
        )));
    }
    let times: Vec<f64> = (0..n_points)
        .map(|i| t_max * i as f64 / (n_points - 1) as f64)
        .collect();
    let snapshots = evaluate(channel, &times, execution)?;
    let loss: Vec<f64> = snapshots.iter().map(|s| s.quantum_loss).collect();
    let derivative = finite_difference(&times, &loss);
    Ok(Trajectory { channel: channel.clone(), times, snapshots, derivative })
}

#[cfg(feature = "parallel")]
fn evaluate(channel: &ChannelModel, times: &[f64], execution: Execution) -> Result<Vec<EntropySnapshot>> {
    match execution {
        Execution::Parallel => times.par_iter().map(|&t| snapshot(channel, t)).collect(),
        Execution::Sequential => times.iter().map(|&t| snapshot(channel, t)).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn evaluate(channel: &ChannelModel, times: &[f64], _execution: Execution) -> Result<Vec<EntropySnapshot>> {
    times.iter().map(|&t| snapshot(channel, t)).collect()
}

/// Central differences on a uniform grid, first-order one-sided at the ends.
pub fn finite_difference(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    assert_eq!(n, times.len());
    assert!(n >= 2, "need at least two samples");
    (0..n)
        .map(|i| {
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (values[hi] - values[lo]) / (times[hi] - times[lo])
        })
        .collect()
}

/// Maximal index runs `[i, j]` with `rate[k] < -threshold`.
fn decreasing_runs(rate: &[f64], threshold: f64) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (k, &d) in rate.iter().enumerate() {
        match (d < -threshold, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                runs.push((s, k - 1));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, rate.len() - 1));
    }
    runs
}

/// Finds where the scalar `quantity` decreases faster than `threshold` and
/// refines the run boundaries by bisection on its continuous derivative.
fn refined_intervals(
    traj: &Trajectory,
    grid_rate: &[f64],
    quantity: impl Fn(&EntropySnapshot) -> f64,
    threshold: f64,
) -> Result<Vec<Interval>> {
    let spacing = traj.spacing();
    let t_max = traj.t_max();
    let delta = spacing * 1e-2;
    let rate_at = |t: f64| -> Result<f64> {
        let (lo, hi) = ((t - delta).max(0.0), (t + delta).min(t_max));
        Ok((quantity(&traj.snapshot_at(hi)?) - quantity(&traj.snapshot_at(lo)?)) / (hi - lo))
    };
    let decreasing = |t: f64| -> Result<bool> { Ok(rate_at(t)? < -threshold) };
    // Bisect between a point where `decreasing` is `from` and one where it is not.
    let bisect = |mut a: f64, mut b: f64, at_a: bool| -> Result<f64> {
        let tol = spacing * 1e-3;
        while (b - a).abs() > tol {
            let m = 0.5 * (a + b);
            if decreasing(m)? == at_a {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    };

    let n = traj.times.len();
    decreasing_runs(grid_rate, threshold)
        .into_iter()
        .map(|(i, j)| {
            let start = if i == 0 { 0.0 } else { bisect(traj.times[i - 1], traj.times[i], false)? };
            let end = if j == n - 1 { t_max } else { bisect(traj.times[j], traj.times[j + 1], true)? };
            Ok(Interval { start, end })
        })
        .collect()
}

/// Intervals on which the quantum loss decreases.
pub fn detect_intervals(traj: &Trajectory, deriv_threshold: f64) -> Result<Vec<Interval>> {
    check_threshold(deriv_threshold)?;
    refined_intervals(traj, &traj.derivative, |s| s.quantum_loss, deriv_threshold)
}

/// Intervals on which the system–ancilla mutual information increases.
pub fn mutual_info_witness(traj: &Trajectory, deriv_threshold: f64) -> Result<Vec<Interval>> {
    check_threshold(deriv_threshold)?;
    let negated: Vec<f64> = traj.mutual_info_derivative().iter().map(|d| -d).collect();
    refined_intervals(traj, &negated, |s| -s.mutual_info, deriv_threshold)
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::InvalidParameter(format!("derivative threshold must be > 0, got {threshold}")));
    }
    Ok(())
}

/// Outcome of the quantum-loss witness on one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonMarkovReport {
    pub intervals: Vec<LossDrop>,
    /// Signed measure, `≤ 0`.
    pub measure: f64,
    pub magnitude: f64,
    pub analytic_verdict: Verdict,
    pub numeric_verdict: Verdict,
    /// End of the sampled window; the measure only covers `[0, horizon]`.
    pub horizon: f64,
}

impl NonMarkovReport {
    pub fn is_markovian(&self) -> bool {
        self.numeric_verdict == Verdict::Markovian
    }
}

pub fn measure(traj: &Trajectory) -> Result<NonMarkovReport> {
    measure_with_threshold(traj, DEFAULT_THRESHOLD)
}

pub fn measure_with_threshold(traj: &Trajectory, deriv_threshold: f64) -> Result<NonMarkovReport> {
    let mut intervals = Vec::new();
    for iv in detect_intervals(traj, deriv_threshold)? {
        let drop = traj.loss_at(iv.end)? - traj.loss_at(iv.start)?;
        if drop < 0.0 {
            intervals.push(LossDrop { start: iv.start, end: iv.end, drop });
        }
    }
    let measure = intervals.iter().fold(0.0, |acc, iv| acc + iv.drop);
    Ok(NonMarkovReport {
        measure,
        magnitude: measure.abs(),
        numeric_verdict: Verdict::from_markovian(intervals.is_empty()),
        analytic_verdict: analytic_verdict(traj.channel(), traj.t_max())?,
        horizon: traj.t_max(),
        intervals,
    })
}

/// Markovianity from the closed-form conditions of each family, checked
/// pointwise on a 10⁴-point grid over `[0, t_max]`.
///
/// * dephasing: `γ(t) ≥ 0`
/// * amplitude damping: `d|G|/dt ≤ 0`
/// * Pauli: `γ₁+γ₂ ≥ 0`, `γ₁+γ₃ ≥ 0`, `γ₂+γ₃ ≥ 0`
pub fn analytic_verdict(channel: &ChannelModel, t_max: f64) -> Result<Verdict> {
    if t_max.is_nan() || t_max <= 0.0 {
        return Err(Error::InvalidGrid(format!("t_max must be > 0, got {t_max}")));
    }
    let grid: Vec<f64> = (0..VERDICT_GRID)
        .map(|i| t_max * i as f64 / (VERDICT_GRID - 1) as f64)
        .collect();
    let rate_values = |r: &RateFunction| -> Result<Vec<f64>> { grid.iter().map(|&t| r.value(t)).collect() };
    let markovian = match channel {
        ChannelModel::Dephasing(rate) => rate_values(rate)?.iter().all(|&g| g >= -VERDICT_TOL),
        ChannelModel::AmplitudeDamping(bath) => {
            let modulus: Vec<f64> = grid
                .iter()
                .map(|&t| g_function(bath, t).map(|g| g.norm()))
                .collect::<Result<_>>()?;
            let dt = grid[1] - grid[0];
            modulus.windows(2).all(|w| (w[1] - w[0]) / dt <= VERDICT_TOL)
        }
        ChannelModel::Pauli(rates) => {
            let [g1, g2, g3] = [rate_values(&rates[0])?, rate_values(&rates[1])?, rate_values(&rates[2])?];
            (0..grid.len()).all(|k| {
                g1[k] + g2[k] >= -VERDICT_TOL && g1[k] + g3[k] >= -VERDICT_TOL && g2[k] + g3[k] >= -VERDICT_TOL
            })
        }
        ChannelModel::Generic(_) => return Ok(Verdict::Unavailable),
    };
    Ok(Verdict::from_markovian(markovian))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::LorentzianBath;
    use crate::entropy::binary_entropy;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn sine_dephasing() -> ChannelModel {
        ChannelModel::Dephasing(RateFunction::sinusoid(1.0, 1.0))
    }

    #[test]
    fn grid_validation() {
        let ch = ChannelModel::Dephasing(RateFunction::constant(1.0));
        assert!(matches!(sample_trajectory(&ch, 1.0, 2), Err(Error::InvalidGrid(_))));
        assert!(matches!(sample_trajectory(&ch, 0.0, 10), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn constant_dephasing_is_monotone() {
        let ch = ChannelModel::Dephasing(RateFunction::constant(1.0));
        let traj = sample_trajectory(&ch, 5.0, 501).unwrap();
        let loss = traj.quantum_loss();
        assert_abs_diff_eq!(loss[0], 0.0, epsilon = 1e-9);
        assert!(loss.windows(2).all(|w| w[1] > w[0]));
        let end = binary_entropy((1.0 + (-5.0f64).exp()) / 2.0);
        assert_abs_diff_eq!(*loss.last().unwrap(), end, epsilon = 1e-12);
        assert!(end > 0.9999 && end < 1.0);
        assert!(detect_intervals(&traj, DEFAULT_THRESHOLD).unwrap().is_empty());
        let report = measure(&traj).unwrap();
        assert_eq!(report.measure, 0.0);
        assert!(report.is_markovian());
        assert_eq!(report.analytic_verdict, Verdict::Markovian);
    }

    #[test]
    fn zero_rate_channel_has_no_loss() {
        let ch = ChannelModel::Dephasing(RateFunction::zero());
        let traj = sample_trajectory(&ch, 3.0, 31).unwrap();
        assert!(traj.quantum_loss().iter().all(|&l| l.abs() < 1e-12));
        let report = measure(&traj).unwrap();
        assert!(report.intervals.is_empty());
        assert_eq!(report.measure, 0.0);
        assert_eq!(report.numeric_verdict, Verdict::Markovian);
    }

    #[test]
    fn sine_dephasing_one_period() {
        let traj = sample_trajectory(&sine_dephasing(), 2.0 * PI, 2001).unwrap();
        let report = measure(&traj).unwrap();
        assert_eq!(report.intervals.len(), 1);
        let iv = report.intervals[0];
        assert_abs_diff_eq!(iv.start, PI, epsilon = 1e-3);
        assert_abs_diff_eq!(iv.end, 2.0 * PI, epsilon = 1e-3);
        let expected = -binary_entropy((1.0 + (-2.0f64).exp()) / 2.0);
        assert_abs_diff_eq!(report.measure, expected, epsilon = 1e-6);
        assert_abs_diff_eq!(report.measure, -0.9867, epsilon = 1e-4);
        assert_eq!(report.analytic_verdict, Verdict::NonMarkovian);
    }

    #[test]
    fn mutual_info_witness_agrees() {
        let traj = sample_trajectory(&sine_dephasing(), 4.0 * PI, 2001).unwrap();
        let a = detect_intervals(&traj, DEFAULT_THRESHOLD).unwrap();
        let b = mutual_info_witness(&traj, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x.start, y.start, epsilon = 1e-3);
            assert_abs_diff_eq!(x.end, y.end, epsilon = 1e-3);
        }
    }

    #[test]
    fn run_detection() {
        assert_eq!(decreasing_runs(&[1.0, -1.0, -1.0, 0.0, -1.0], 1e-9), vec![(1, 2), (4, 4)]);
        assert_eq!(decreasing_runs(&[-1.0, 0.0], 1e-9), vec![(0, 0)]);
        assert!(decreasing_runs(&[0.0, -1e-12, 1.0], 1e-9).is_empty());
    }

    #[test]
    fn analytic_verdicts() {
        let t = 5.0;
        assert_eq!(
            analytic_verdict(&ChannelModel::Dephasing(RateFunction::constant(1.0)), t).unwrap(),
            Verdict::Markovian
        );
        let pauli = ChannelModel::Pauli([
            RateFunction::constant(1.0),
            RateFunction::constant(1.0),
            RateFunction::constant(-1.5),
        ]);
        assert_eq!(analytic_verdict(&pauli, t).unwrap(), Verdict::NonMarkovian);
        let strong = ChannelModel::AmplitudeDamping(LorentzianBath::new(0.2, 2.0).unwrap());
        assert_eq!(analytic_verdict(&strong, 30.0).unwrap(), Verdict::NonMarkovian);
        let weak = ChannelModel::AmplitudeDamping(LorentzianBath::new(4.0, 1.0).unwrap());
        assert_eq!(analytic_verdict(&weak, 20.0).unwrap(), Verdict::Markovian);
        let generic = ChannelModel::Generic(Default::default());
        assert_eq!(analytic_verdict(&generic, t).unwrap(), Verdict::Unavailable);
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let ch = ChannelModel::AmplitudeDamping(LorentzianBath::new(0.2, 2.0).unwrap());
        let a = sample_trajectory_with(&ch, 10.0, 101, Execution::Sequential).unwrap();
        let b = sample_trajectory_with(&ch, 10.0, 101, Execution::Parallel).unwrap();
        assert_eq!(a.snapshots, b.snapshots);
    }

    #[test]
    fn finite_difference_of_quadratic() {
        let times: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let values: Vec<f64> = times.iter().map(|t| t * t).collect();
        let d = finite_difference(&times, &values);
        for (t, v) in times.iter().zip(&d).skip(1).take(9) {
            assert_abs_diff_eq!(*v, 2.0 * t, epsilon = 1e-12);
        }
    }
}
