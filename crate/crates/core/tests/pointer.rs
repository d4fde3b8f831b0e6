mod common;

use cheshire::pointer::*;
use cheshire::qcore::{HilbertLayout, LinearOperator, QuantumState};
use cheshire::rng;
use cheshire::scenario::{builtin_grin_swap, builtin_single_cat, single_cat_layout};
use cheshire::Error;
use common::*;
use num_complex::Complex64;

fn state(layout: &HilbertLayout, v: &[Complex64]) -> QuantumState {
    QuantumState::new(layout.clone(), v.to_vec()).unwrap()
}

fn gaussian(x: f64, sigma: f64) -> f64 {
    (-(x * x) / (4.0 * sigma * sigma)).exp()
}

/// Postselected pointer mean from the closed form
/// `φ(x) = Σ_k ⟨f|P_k|i⟩ G(x − g·λ_k)`, integrated on its own fine grid.
fn oracle_mean(spectrum: &[(f64, Mat)], pre: &[Complex64], post: &[Complex64], g: f64, sigma: f64) -> f64 {
    let coeffs: Vec<(f64, Complex64)> = spectrum
        .iter()
        .map(|(lambda, p)| (*lambda, dot(post, &matvec(p, pre))))
        .collect();
    let n = 20_001;
    let (lo, hi) = (-12.0 * sigma, 12.0 * sigma);
    let dx = (hi - lo) / (n - 1) as f64;
    let (mut m0, mut m1) = (0.0, 0.0);
    for j in 0..n {
        let x = lo + j as f64 * dx;
        let phi: Complex64 = coeffs.iter().map(|(l, c)| c * gaussian(x - g * l, sigma)).sum();
        let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
        m0 += w * phi.norm_sqr();
        m1 += w * x * phi.norm_sqr();
    }
    m1 / m0
}

/// Spectral projectors of `σ_z^R` on (path, pol): eigenvalues −1, 0, +1.
fn sigma_z_right_spectrum() -> Vec<(f64, Mat)> {
    let plus = [c(R2, 0.0), c(0.0, R2)];
    let minus = [c(R2, 0.0), c(0.0, -R2)];
    vec![
        (1.0, kron_mat(&proj2(1), &outer(&plus, &plus))),
        (-1.0, kron_mat(&proj2(1), &outer(&minus, &minus))),
        (0.0, kron_mat(&proj2(0), &identity(2))),
    ]
}

#[test]
fn gaussian_moments_on_grid() {
    let grid = PointerGrid::new(8.0, 512, 1.0).unwrap();
    let st = pointer_statistics(&grid.gaussian());
    assert!(st.mean.abs() < 1e-12);
    assert!((st.variance - 1.0).abs() < 0.01, "{}", st.variance);
    let grid = PointerGrid::new(16.0, 1024, 2.0).unwrap();
    let st = pointer_statistics(&grid.gaussian());
    assert!((st.variance - 4.0).abs() < 0.04, "{}", st.variance);
}

#[test]
fn pointer_mean_matches_closed_form() {
    let layout = single_cat_layout();
    let pre = single_cat_pre();
    let post = single_cat_post();
    let a = builtin_single_cat().observable("sigma_z^R").unwrap().operator.clone();
    for g in [0.01, 0.1, 0.5] {
        let run = pointer_run(&state(&layout, &pre), &state(&layout, &post), &a, g, &PointerGrid::default()).unwrap();
        let oracle = oracle_mean(&sigma_z_right_spectrum(), &pre, &post, g, 1.0);
        assert!((run.statistics.mean - oracle).abs() < 1e-9, "g={g}: {} vs {oracle}", run.statistics.mean);
    }
}

#[test]
fn projector_shift_is_half_for_balanced_input() {
    // Π_L on (|L⟩+|R⟩)/√2 without postselection: mean shift g/2
    let layout = HilbertLayout::single_path("path");
    let s = state(&layout, &[c(R2, 0.0), c(R2, 0.0)]);
    let a = LinearOperator::from_rows(layout, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
    let g = 0.2;
    let m = weak_couple(&attach_pointer(&s, &PointerGrid::default()).unwrap(), &a, g).unwrap();
    let density = m.pointer_marginal();
    let mean: f64 = PointerGrid::default().positions().zip(&density).map(|(x, p)| x * p).sum();
    assert!((mean - g / 2.0).abs() < 1e-6, "{mean}");
}

#[test]
fn weak_limit_estimates() {
    for s in [builtin_single_cat(), builtin_grin_swap()] {
        for o in &s.observables {
            let run = pointer_run(&s.preselection, &s.postselection, &o.operator, 0.01, &PointerGrid::default()).unwrap();
            let exact = cheshire::weakval::weak_value(&o.operator, &s.preselection, &s.postselection).unwrap();
            assert!((run.estimate_re() - exact.re).abs() <= 1e-3, "{} {}: {}", s.name, o.name, run.estimate_re());
            assert!((run.postselected.success_probability - dot(s.postselection.amplitudes(), s.preselection.amplitudes()).norm_sqr()).abs() < 1e-3);
        }
    }
}

#[test]
fn imaginary_part_from_momentum() {
    // post (|L⟩+|R⟩)|H⟩/√2 gives (Π_L)_w = (1+i)/2
    let layout = single_cat_layout();
    let pre = single_cat_pre();
    let post = kron(&[c(R2, 0.0), c(R2, 0.0)], &ket2(0));
    let pi_l = on_qubit(&proj2(0), 0, 2);
    let w = weak_value(&pi_l, &pre, &post);
    assert!((w - c(0.5, 0.5)).norm() < 1e-12);

    let a = builtin_single_cat().observable("Pi_L").unwrap().operator.clone();
    let grid = PointerGrid::new(8.0, 4096, 1.0).unwrap();
    let run = pointer_run(&state(&layout, &pre), &state(&layout, &post), &a, 0.01, &grid).unwrap();
    assert!((run.estimate_re() - w.re).abs() < 0.05 * w.re, "{}", run.estimate_re());
    assert!((run.estimate_im() - w.im).abs() < 0.05 * w.im, "{}", run.estimate_im());
}

#[test]
fn back_action_and_norm() {
    let s = builtin_grin_swap();
    let pre_oracle = grin_swap_pre();
    for o in &s.observables {
        for g in [0.01, 0.1, 0.3] {
            let m = weak_couple(&attach_pointer(&s.preselection, &PointerGrid::default()).unwrap(), &o.operator, g).unwrap();
            assert!((m.norm_sqr() - 1.0).abs() < 1e-6);
            let rho = rows(&m.system_marginal());
            let fidelity = dot(&pre_oracle, &matvec(&rho, &pre_oracle)).re;
            assert!(fidelity >= 1.0 - g * g - 1e-12, "{} g={g}: {fidelity}", o.name);
        }
    }
}

#[test]
fn sampled_readings_are_consistent() {
    let s = builtin_single_cat();
    let a = &s.observable("sigma_z^R").unwrap().operator;
    let run = pointer_run(&s.preselection, &s.postselection, a, 0.2, &PointerGrid::default()).unwrap();
    let target = run.estimate_re();
    let hits = (0..100u64)
        .filter(|&seed| {
            let xs = sample_readings(&run.postselected.wavefunction, 4000, seed);
            let e = estimate_weak_value(&xs, 0.2).unwrap();
            (e.estimate - target).abs() <= 4.0 * e.std_error
        })
        .count();
    assert!(hits >= 95, "{hits}/100");
}

#[test]
fn trials_are_deterministic_per_seed() {
    let s = builtin_grin_swap();
    let a = &s.observables[0].operator;
    let run = pointer_run(&s.preselection, &s.postselection, a, 0.05, &PointerGrid::default()).unwrap();
    let a1 = simulate_trials(&run.postselected, 5000, &mut rng::seeded(3));
    let a2 = simulate_trials(&run.postselected, 5000, &mut rng::seeded(3));
    let b = simulate_trials(&run.postselected, 5000, &mut rng::seeded(4));
    assert_eq!(a1, a2);
    assert_ne!(a1, b);
    let p: f64 = 0.0625;
    let sd = (p * (1.0 - p) / 5000.0).sqrt();
    assert!((a1.acceptance_rate() - p).abs() < 4.0 * sd);
}

#[test]
fn errors() {
    let s = builtin_single_cat();
    let a = &s.observables[0].operator;
    assert_eq!(
        pointer_run(&s.preselection, &s.postselection, a, 0.0, &PointerGrid::default()).unwrap_err(),
        Error::ZeroCoupling
    );
    let layout = single_cat_layout();
    let lh = QuantumState::basis(layout.clone(), &["L", "H"]).unwrap();
    let rv = QuantumState::basis(layout, &["R", "V"]).unwrap();
    assert!(matches!(
        pointer_run(&lh, &rv, a, 0.01, &PointerGrid::default()),
        Err(Error::PostselectionImpossible { .. })
    ));
}
