use num_complex::Complex64 as C64;
use proptest::prelude::*;

use qloss::channels::{damped_bell_matrix, dephased_bell_matrix, ChannelModel, LorentzianBath, RateFunction};
use qloss::entropy::{mutual_information, quantum_loss, von_neumann_entropy};
use qloss::qmath::{hermitian_eigen, kron, partial_trace, ComplexMatrix, Subsystem};
use qloss::states::{purify, DensityMatrix};
use qloss::witness::{detect_intervals, finite_difference, measure, sample_trajectory, DEFAULT_THRESHOLD};

fn complex_matrix(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n * n).prop_map(move |v| {
        ComplexMatrix::from_vec(n, n, v.into_iter().map(|(re, im)| C64::new(re, im)).collect()).unwrap()
    })
}

/// Modified Gram–Schmidt on the columns; almost surely full rank.
fn orthonormalize(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.rows();
    let mut cols: Vec<Vec<C64>> = (0..n).map(|c| (0..n).map(|r| m[(r, c)]).collect()).collect();
    for k in 0..n {
        for j in 0..k {
            let (done, rest) = cols.split_at_mut(k);
            let proj: C64 = done[j].iter().zip(&rest[0]).map(|(u, v)| u.conj() * v).sum();
            for (v, u) in rest[0].iter_mut().zip(&done[j]) {
                *v -= proj * u;
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols[k].iter_mut().for_each(|z| *z /= norm);
    }
    let mut out = ComplexMatrix::zeros(n, n);
    for (c, col) in cols.iter().enumerate() {
        for (r, z) in col.iter().enumerate() {
            out[(r, c)] = *z;
        }
    }
    out
}

fn unitary(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    complex_matrix(n).prop_map(|m| orthonormalize(&m))
}

/// `A A† / Tr(A A†)`: full-rank mixed states of every purity.
fn density(n: usize) -> impl Strategy<Value = DensityMatrix> {
    complex_matrix(n).prop_map(|a| {
        let p = &a * &a.adjoint();
        let tr = p.trace().re;
        DensityMatrix::new(p.scale_real(1.0 / tr).hermitian_part()).unwrap()
    })
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Channels with non-Markovian windows that stay physical for every parameter.
fn wavy_channel() -> impl Strategy<Value = ChannelModel> {
    prop_oneof![
        (0.3..2.0f64, 0.5..2.0f64).prop_map(|(a, w)| ChannelModel::Dephasing(RateFunction::sinusoid(a, w))),
        (0.1..0.6f64, 1.0..3.0f64)
            .prop_map(|(l, g0)| ChannelModel::AmplitudeDamping(LorentzianBath::new(l, g0).unwrap())),
        (0.2..1.5f64, 0.5..3.0f64, 0.5..2.0f64).prop_map(|(c, a, w)| ChannelModel::Pauli([
            RateFunction::constant(c),
            RateFunction::constant(c),
            RateFunction::sinusoid(a, w),
        ])),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigen_recovers_prescribed_spectrum(u in unitary(4), spectrum in prop::collection::vec(-3.0..3.0f64, 4)) {
        let m = &(&u * &ComplexMatrix::diag(&spectrum)) * &u.adjoint();
        let eig = hermitian_eigen(&m.hermitian_part()).unwrap();
        for (a, b) in eig.eigenvalues.iter().zip(sorted_desc(spectrum)) {
            prop_assert!((a - b).abs() < 1e-11, "{a} vs {b}");
        }
        prop_assert!(eig.reconstruct().unwrap().max_abs_diff(&m) < 1e-11);
        let v = eig.eigenvectors.unwrap();
        prop_assert!((&v.adjoint() * &v).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn partial_trace_of_product(a in complex_matrix(2), b in complex_matrix(2)) {
        let ab = kron(&a, &b);
        let first = partial_trace(&ab, Subsystem::First).unwrap();
        let second = partial_trace(&ab, Subsystem::Second).unwrap();
        prop_assert!(first.max_abs_diff(&a.scale(b.trace())) < 1e-13);
        prop_assert!(second.max_abs_diff(&b.scale(a.trace())) < 1e-13);
    }

    #[test]
    fn purification_reproduces_state(rho in density(2)) {
        let psi = purify(&rho).unwrap();
        let joint = psi.projector();
        let back = joint.marginal(Subsystem::First).unwrap();
        prop_assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-12);
        let s = von_neumann_entropy(&rho).unwrap();
        let s_anc = von_neumann_entropy(&joint.marginal(Subsystem::Second).unwrap()).unwrap();
        prop_assert!((s - s_anc).abs() < 1e-10);
        prop_assert!(von_neumann_entropy(&joint).unwrap().abs() < 1e-10);
    }

    #[test]
    fn entropy_is_unitarily_invariant(rho in density(4), u in unitary(4)) {
        let rotated = &(&u * rho.matrix()) * &u.adjoint();
        let rotated = DensityMatrix::new(rotated.hermitian_part()).unwrap();
        let (a, b) = (von_neumann_entropy(&rho).unwrap(), von_neumann_entropy(&rotated).unwrap());
        prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        prop_assert!((-1e-12..=2.0 + 1e-12).contains(&a));
    }

    #[test]
    fn mutual_information_bounds(rho in density(4)) {
        let i = mutual_information(&rho).unwrap();
        let sa = von_neumann_entropy(&rho.marginal(Subsystem::First).unwrap()).unwrap();
        let sb = von_neumann_entropy(&rho.marginal(Subsystem::Second).unwrap()).unwrap();
        let sab = von_neumann_entropy(&rho).unwrap();
        prop_assert!(i >= -1e-9);
        prop_assert!(i <= 2.0 * sa.min(sb) + 1e-9);
        prop_assert!(sab >= (sa - sb).abs() - 1e-9);
    }

    #[test]
    fn closed_forms_match_eigen_path(c in 0.0..1.0f64, g in 0.0..1.0f64) {
        let h2 = |p: f64| {
            let t = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
            t(p) + t(1.0 - p)
        };
        let rho = DensityMatrix::new(dephased_bell_matrix(c)).unwrap();
        prop_assert!((quantum_loss(&rho, 1.0).unwrap() - h2((1.0 + c) / 2.0)).abs() < 1e-10);
        let rho = DensityMatrix::new(damped_bell_matrix(C64::new(g.sqrt(), 0.0))).unwrap();
        let expected = 1.0 - h2(g / 2.0) + h2((1.0 + g) / 2.0);
        prop_assert!((quantum_loss(&rho, 1.0).unwrap() - expected).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn backflow_means_environment_entropy_grows_slower(channel in wavy_channel()) {
        let traj = sample_trajectory(&channel, 15.0, 1501).unwrap();
        let s_env: Vec<f64> = traj.snapshots.iter().map(|s| s.s_exchange).collect();
        let s_sys: Vec<f64> = traj.snapshots.iter().map(|s| s.s_system).collect();
        let (d_env, d_sys) = (finite_difference(&traj.times, &s_env), finite_difference(&traj.times, &s_sys));
        for iv in detect_intervals(&traj, DEFAULT_THRESHOLD).unwrap() {
            for k in (0..traj.len()).filter(|&k| traj.times[k] >= iv.start && traj.times[k] <= iv.end) {
                prop_assert!(d_env[k] < d_sys[k] + 1e-9, "t = {}: {} vs {}", traj.times[k], d_env[k], d_sys[k]);
            }
        }
    }

    #[test]
    fn measure_is_nonpositive_and_zero_iff_no_intervals(channel in wavy_channel()) {
        let report = measure(&sample_trajectory(&channel, 15.0, 1501).unwrap()).unwrap();
        prop_assert!(report.measure <= 0.0);
        prop_assert_eq!(report.measure == 0.0, report.intervals.is_empty());
        prop_assert!((report.magnitude + report.measure).abs() == 0.0);
    }

    #[test]
    fn measure_survives_grid_refinement(channel in wavy_channel()) {
        let coarse = sample_trajectory(&channel, 15.0, 1001).unwrap();
        let fine = sample_trajectory(&channel, 15.0, 4001).unwrap();
        let (a, b) = (measure(&coarse).unwrap(), measure(&fine).unwrap());
        let steepest = fine.derivative.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        let tol = 2.0 * coarse.spacing() * 1e-3 * a.intervals.len().max(b.intervals.len()) as f64 * steepest;
        prop_assert!((a.measure - b.measure).abs() <= tol.max(1e-12), "{} vs {} (tol {tol:e})", a.measure, b.measure);
    }
}

#[test]
fn zero_rates_give_zero_measure() {
    let ch = ChannelModel::Pauli([RateFunction::zero(), RateFunction::zero(), RateFunction::zero()]);
    let report = measure(&sample_trajectory(&ch, 5.0, 501).unwrap()).unwrap();
    assert_eq!(report.measure, 0.0);
    assert!(report.measure.is_sign_positive());
    assert!(report.intervals.is_empty());
}
