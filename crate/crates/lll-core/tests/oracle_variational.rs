//! Oracle tests for the constrained variational solvers: closed-form
//! objective values on the stationary catalog, analytic restricted-Hessian
//! spectra at the first two eigenmodes cross-checked by finite differences,
//! threshold localization, fixed-energy degree minimization against the
//! displaced-vortex family, and the physical rescaling identity verified by
//! plane quadrature.

use lll_core::catalog;
use lll_core::fock::{self, CoeffState};
use lll_core::quadrature::TensorGrid;
use lll_core::variational::{
    self, InitGuess, MinimizationProblem, ParityRestriction, PhysicalScaling, KAPPA_0,
};
use lll_core::CoreError;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PI: f64 = std::f64::consts::PI;

fn unit_random(len: usize, seed: u64) -> CoeffState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<Complex64> = (0..len)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    CoeffState::new(coeffs)
        .unwrap()
        .normalized_to_mass(1.0)
        .unwrap()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spectra have different lengths");
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn objective_matches_catalog_closed_forms() {
    // Flat profile: G_mu = 1 for every mu.
    let flat = CoeffState::basis(0, 64).unwrap();
    for &mu in &[0.1, 0.5, 2.0] {
        assert!((variational::g_mu(&flat, mu) - 1.0).abs() < 1e-10);
    }
    // Second mode: G_mu = 1/2 + mu.
    let second = CoeffState::basis(1, 64).unwrap();
    for &mu in &[0.1, 0.3, 1.0] {
        assert!((variational::g_mu(&second, mu) - (0.5 + mu)).abs() < 1e-10);
    }
    // Displaced vortex: G_mu = 1 + (mu - 1/2)/(1+b^2)^2.
    let mu = 0.3;
    for &b in &[0.5, 1.0, 2.0] {
        let wave = catalog::make_psi_b(b, 128).unwrap();
        let expected = 1.0 + (mu - 0.5) / (1.0 + b * b).powi(2);
        assert!(
            (variational::g_mu(&wave.state, mu) - expected).abs() < 1e-10,
            "displaced vortex objective off at b={b}"
        );
    }
    // Odd coherent profile: 8piH = 1/2 and P = x/tanh(x) at x = |alpha|^2.
    let chi = catalog::make_chi_alpha(Complex64::new(1.0, 0.0), 96).unwrap();
    let expected = 0.5 + 0.7 * (1.0 / 1.0f64.tanh());
    assert!((variational::g_mu(&chi.state, 0.7) - expected).abs() < 1e-9);
}

#[test]
fn flat_profile_spectrum_follows_the_mode_law() {
    let mu = 0.7;
    let len = 16;
    let got = variational::flat_profile_spectrum(mu, len).unwrap();
    let mut expected = Vec::new();
    for n in 1..len {
        let eig = 8.0 / 2f64.powi(n as i32) + 2.0 * mu * n as f64 - 4.0;
        expected.push(eig);
        expected.push(eig);
    }
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(got.len(), 2 * len - 2);
    assert!(sup_diff(&got, &expected) < 1e-12);

    // The minimum crosses zero exactly at mu = 1/2 (modes n = 2, 3).
    let min_at = |mu: f64| {
        variational::flat_profile_spectrum(mu, 24)
            .unwrap()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    };
    assert!(min_at(0.49) < 0.0);
    assert!(min_at(0.51) > 0.0);
    assert!(min_at(2.0) > 0.0);
}

#[test]
fn second_mode_spectrum_has_the_coupled_block_and_series() {
    let mu = 0.2;
    let len = 12;
    let got = variational::second_mode_spectrum(mu, len).unwrap();
    assert_eq!(got.len(), 2 * len - 2);

    // Coupled block on modes 0 and 2, diagonalized through the dense solver
    // as an independent arithmetic path.
    let block = [2.0 - 2.0 * mu, 2f64.sqrt(), 2f64.sqrt(), 1.0 + 2.0 * mu];
    let block_eigs = lll_core::linalg::symmetric_eigenvalues(&block, 2).unwrap();
    let mut expected = vec![
        block_eigs[0],
        block_eigs[0],
        block_eigs[1],
        block_eigs[1],
    ];
    for n in 3..len {
        let eig = (n as f64 + 1.0) / 2f64.powi(n as i32 - 2) - 2.0 + 2.0 * mu * (n as f64 - 1.0);
        expected.push(eig);
        expected.push(eig);
    }
    expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!(sup_diff(&got, &expected) < 1e-12);

    // Closed form of the block: 3/2 +- sqrt((1-4mu)^2/4 + 2).
    let lo = 1.5 - ((1.0 - 4.0 * mu).powi(2) / 4.0 + 2.0).sqrt();
    assert!((got[0] - lo).abs() < 1e-12);
    // The n = 3 series entry equals 4mu.
    assert!(got.iter().any(|e| (e - 0.8).abs() < 1e-12));

    // Sign change of the minimum at exactly 5/32 (series modes n = 5, 6)
    // and again at 1/2 (block determinant 2mu(1-2mu)).
    let min_at = |mu: f64| {
        variational::second_mode_spectrum(mu, 24)
            .unwrap()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    };
    assert!(min_at(KAPPA_0 - 1e-3) < 0.0);
    assert!(min_at(KAPPA_0 + 1e-3) > 0.0);
    assert!(min_at(0.49) > 0.0);
    assert!(min_at(0.51) < 0.0);
}

#[test]
fn finite_differences_confirm_the_analytic_spectra() {
    let flat = CoeffState::basis(0, 12).unwrap();
    let fd = variational::restricted_hessian_spectrum_fd(&flat, 0.7).unwrap();
    assert!(fd.stationary, "flat profile must register as stationary");
    let analytic = variational::flat_profile_spectrum(0.7, 12).unwrap();
    assert!(
        sup_diff(&fd.eigenvalues, &analytic) < 1e-5,
        "flat-profile spectra disagree: sup {}",
        sup_diff(&fd.eigenvalues, &analytic)
    );

    let second = CoeffState::basis(1, 12).unwrap();
    let fd = variational::restricted_hessian_spectrum_fd(&second, 0.2).unwrap();
    assert!(fd.stationary);
    let analytic = variational::second_mode_spectrum(0.2, 12).unwrap();
    assert!(sup_diff(&fd.eigenvalues, &analytic) < 1e-5);

    // The dispatcher picks the analytic route on exact eigenmodes.
    let auto = variational::restricted_hessian_spectrum(&flat, 0.7).unwrap();
    assert!(sup_diff(&auto.eigenvalues, &analytic_flat(0.7, 12)) < 1e-14);
}

fn analytic_flat(mu: f64, len: usize) -> Vec<f64> {
    variational::flat_profile_spectrum(mu, len).unwrap()
}

#[test]
fn third_mode_curve_exposes_negative_curvature() {
    // G_mu along eps e0 + sqrt(1-2eps^2) e2 - eps e4 drops below the
    // stationary value by ((4 sqrt 6 - 7)/16) eps^2 + O(eps^4).
    let mu = 0.3;
    let base = 3.0 / 8.0 + 2.0 * mu;
    let rate = (4.0 * 6f64.sqrt() - 7.0) / 16.0;
    let curve = |eps: f64| -> f64 {
        let mut c = vec![Complex64::new(0.0, 0.0); 8];
        c[0] = Complex64::new(eps, 0.0);
        c[2] = Complex64::new((1.0 - 2.0 * eps * eps).sqrt(), 0.0);
        c[4] = Complex64::new(-eps, 0.0);
        variational::g_mu(&CoeffState::new(c).unwrap(), mu)
    };
    let r = |eps: f64| (curve(eps) - base) / (eps * eps);
    assert!((r(1e-3) + rate).abs() < 1e-4);
    let richardson = (4.0 * r(5e-4) - r(1e-3)) / 3.0;
    assert!(
        (richardson + rate).abs() < 1e-6,
        "extrapolated curvature {richardson} vs {}",
        -rate
    );

    // The finite-difference restricted Hessian sees the same direction.
    let third = CoeffState::basis(2, 12).unwrap();
    let spectrum = variational::restricted_hessian_spectrum(&third, mu).unwrap();
    assert!(spectrum.stationary);
    let min = spectrum.eigenvalues[0];
    assert!(
        min < -0.17,
        "third mode should have negative curvature, min eig {min}"
    );
}

#[test]
fn descent_reaches_the_flat_profile_at_strong_coupling() {
    let mut problem = MinimizationProblem::gmu(2.0, 32);
    problem.init = InitGuess::Seeded(7);
    let result = variational::minimize(&problem).unwrap();
    assert!(result.converged, "descent did not converge");
    assert!(result.iterations > 0);
    assert!(
        (result.objective - 1.0).abs() < 1e-8,
        "objective {} should be 1",
        result.objective
    );
    assert!(result.minimizer.get(0).norm() > 1.0 - 1e-7);
    assert!((result.minimizer.mass() - 1.0).abs() < 1e-12);
    assert!(result.constraint_residuals[0] < 1e-12);
    assert!(result.multipliers.residual < 1e-6);
    assert_eq!(result.zero_count_in_trust_radius, 0);
    // Near the flat profile the lowest curvature is 8/2 + 2 mu - 4 = 4.
    assert!((result.hessian_spectrum[0] - 4.0).abs() < 1e-2);
}

#[test]
fn descent_near_the_second_mode_stays_there() {
    let mut c = vec![Complex64::new(0.0, 0.0); 32];
    c[1] = Complex64::new(1.0, 0.0);
    c[0] = Complex64::new(0.03, 0.01);
    c[3] = Complex64::new(0.02, -0.02);
    c[5] = Complex64::new(0.0, 0.01);
    let init = CoeffState::new(c).unwrap().normalized_to_mass(1.0).unwrap();

    let mu = 0.3;
    let mut problem = MinimizationProblem::gmu(mu, 32);
    problem.init = InitGuess::State(init);
    let result = variational::minimize(&problem).unwrap();
    assert!(result.converged);
    assert!(
        (result.objective - 0.8).abs() < 1e-8,
        "local objective {} should be 1/2 + mu",
        result.objective
    );
    assert!(result.minimizer.get(1).norm() > 1.0 - 1e-6);
    // Single-mode support pins the degenerate multiplier fit to mu = 0.
    assert_eq!(result.multipliers.mu, 0.0);
    assert!((result.multipliers.lambda - 1.0 / (4.0 * PI)).abs() < 1e-6);
    assert!(result.multipliers.residual < 1e-6);
    // Lowest restricted curvature: 3/2 - sqrt((1-4mu)^2/4 + 2).
    let lo = 1.5 - ((1.0 - 4.0 * mu).powi(2) / 4.0 + 2.0).sqrt();
    assert!((result.hessian_spectrum[0] - lo).abs() < 1e-3);
}

#[test]
fn multistarts_agree_at_unit_coupling() {
    let problem = MinimizationProblem::gmu(1.0, 32);
    let runs = variational::multistart_gmu(&problem, 6, 40).unwrap();
    assert_eq!(runs.len(), 6);
    for run in &runs {
        assert!(run.converged);
        assert!(
            (run.objective - 1.0).abs() < 1e-7,
            "a start missed the global value: {}",
            run.objective
        );
        assert!(run.minimizer.get(0).norm() > 1.0 - 1e-6);
    }
}

#[test]
fn parity_restriction_confines_support() {
    let mut problem = MinimizationProblem::gmu(0.3, 32);
    problem.parity = Some(ParityRestriction::MultiplesOf(2));
    problem.init = InitGuess::Seeded(3);
    let result = variational::minimize(&problem).unwrap();
    assert!(result.converged);
    for k in (1..32).step_by(2) {
        let v = result.minimizer.get(k);
        assert_eq!(v, Complex64::new(0.0, 0.0), "odd mode {k} leaked in");
    }
    // The even-restricted minimum sits below the third mode value 3/8 + 2mu
    // because that mode is itself unstable inside the even sector.
    assert!(result.objective < 0.975);

    let mut even = MinimizationProblem::gmu(0.3, 32);
    even.parity = Some(ParityRestriction::Even);
    even.init = InitGuess::Seeded(3);
    let same = variational::minimize(&even).unwrap();
    assert_eq!(same.minimizer.coeffs(), result.minimizer.coeffs());
}

#[test]
fn doubling_the_truncation_leaves_the_objective_stable() {
    let mut coarse = MinimizationProblem::gmu(0.25, 24);
    coarse.init = InitGuess::Seeded(11);
    let mut fine = MinimizationProblem::gmu(0.25, 48);
    fine.init = InitGuess::Seeded(11);
    let a = variational::minimize(&coarse).unwrap();
    let b = variational::minimize(&fine).unwrap();
    assert!(a.converged && b.converged);
    assert!(
        (a.objective - b.objective).abs() < 1e-6,
        "objectives drifted: {} vs {}",
        a.objective,
        b.objective
    );
}

#[test]
fn threshold_bisection_localizes_the_critical_couplings() {
    assert_eq!(KAPPA_0, 0.15625);
    assert!((variational::kappa_1() - (3f64.sqrt() - 1.0)).abs() < 1e-15);

    let report = variational::verify_thresholds(32, 5).unwrap();
    assert!(
        (report.flat_threshold - 0.5).abs() < 1e-6,
        "flat threshold {}",
        report.flat_threshold
    );
    assert!(
        (report.second_threshold - 0.15625).abs() < 1e-6,
        "second threshold {}",
        report.second_threshold
    );

    let row = |mu: f64| {
        report
            .sweep
            .iter()
            .find(|r| (r.mu - mu).abs() < 1e-12)
            .unwrap_or_else(|| panic!("sweep row at mu={mu} missing"))
    };
    assert!(row(0.45).min_eig_flat < 0.0);
    assert!(row(0.55).min_eig_flat > 0.0);
    assert!(row(0.15).min_eig_second < 0.0);
    assert!(row(0.2).min_eig_second > 0.0);
    // Beyond kappa_1 every start lands on the flat profile, objective 1.
    for &mu in &[0.75, 0.9, 1.0] {
        assert!(
            (row(mu).objective - 1.0).abs() < 1e-6,
            "objective at mu={mu} is {}",
            row(mu).objective
        );
    }
    // In the window (5/32, 1/2) the optimum sits at or below the second mode.
    assert!(row(0.3).objective <= 0.8 + 1e-6);
}

#[test]
fn weak_coupling_minimizer_leaves_the_eigenmode_orbits() {
    let mut problem = MinimizationProblem::gmu(0.1, 48);
    problem.init = InitGuess::Seeded(23);
    problem.gradient_tol = 1e-8;
    let result = variational::minimize(&problem).unwrap();
    assert!(result.converged);
    // Below the lower threshold neither eigenmode is a local minimum, so the
    // optimizer must leave both orbits.
    assert!(result.minimizer.get(0).norm() < 0.999);
    assert!(result.minimizer.get(1).norm() < 0.999);
    assert!(result.objective < 0.6, "objective {}", result.objective);
    // The certificate: either a genuinely mixed multiplier pair or several
    // zeros already inside the trusted disk.
    assert!(
        result.multipliers.mu.abs() > 1e-4 || result.zero_count_in_trust_radius >= 2,
        "weak-coupling certificate failed: mu_hat {} zeros {}",
        result.multipliers.mu,
        result.zero_count_in_trust_radius
    );
    assert!(result.multipliers.residual < 1e-5);
}

#[test]
fn fixed_energy_minimization_recovers_the_displaced_vortex() {
    // gamma = 0.6 selects the displaced vortex with (1+b^2)^2 = 1/(2(1-gamma)).
    let gamma = 0.6;
    let b = variational::psi_b_parameter_for(gamma).unwrap();
    let s_sq = (1.0 + b * b).powi(2);
    assert!((s_sq - 1.25).abs() < 1e-12);
    let quartic = (1.0 + 4.0 * b * b + 2.0 * b.powi(4)) / (2.0 * (1.0 + b * b).powi(2));
    assert!((quartic - gamma).abs() < 1e-12);

    let h0 = gamma / (8.0 * PI);
    let result = variational::minimize_p_fixed(h0, 1.0, 48).unwrap();
    assert!(result.converged);
    assert!(
        (result.objective - 0.8).abs() < 1e-6,
        "minimal degree {} should be 2(1-gamma)",
        result.objective
    );
    assert!(result.minimizer.magnetic().norm() < 1e-8);
    assert!(result.constraint_residuals[0] < 1e-10, "mass residual");
    assert!(result.constraint_residuals[1] < 1e-8 / (8.0 * PI), "energy residual");
    // Up to rotation and phase the minimizer is the catalog profile.
    let reference = catalog::make_psi_b(b, 48).unwrap();
    for k in 0..48 {
        let got = result.minimizer.get(k).norm();
        let want = reference.state.get(k).norm();
        assert!(
            (got - want).abs() < 1e-5,
            "mode {k} magnitude {got} vs catalog {want}"
        );
    }
    assert!((result.multipliers.mu + 1.0 / (8.0 * PI)).abs() < 1e-4);
    assert!(result.multipliers.residual < 1e-6);
    assert_eq!(result.zero_count_in_trust_radius, 1);

    // gamma = 1/2 degenerates to the second mode: P = 1, single zero at 0.
    let half = variational::minimize_p_fixed(0.5 / (8.0 * PI), 1.0, 32).unwrap();
    assert!(half.converged);
    assert!((half.objective - 1.0).abs() < 1e-6);
    assert!(half.minimizer.get(1).norm() > 1.0 - 1e-5);
    assert_eq!(half.zero_count_in_trust_radius, 1);
}

#[test]
fn fixed_energy_minimization_below_half_keeps_the_moment_zero() {
    let gamma = 0.3;
    let result = variational::minimize_p_fixed(gamma / (8.0 * PI), 1.0, 48).unwrap();
    assert!(result.converged);
    assert!(result.constraint_residuals[0] < 1e-10);
    assert!(result.constraint_residuals[1] < 1e-8 / (8.0 * PI));
    assert!(
        result.minimizer.magnetic().norm() < 1e-8,
        "magnetic moment {}",
        result.minimizer.magnetic().norm()
    );
    // Here no pure eigenmode fits the constraint, so the mixed multiplier
    // must be active.
    assert!(result.multipliers.mu.abs() > 1e-3);
    // Lowering the energy ratio below 1/2 forces the degree above the value
    // P = 1 attained at the ratio 1/2, and several zeros enter the disk.
    assert!(result.objective > 1.0 && result.objective < 4.0);
    assert!(result.zero_count_in_trust_radius >= 2);
    // Scaling by the stored mass keeps the requested physical constraints.
    assert!((result.minimizer.mass() - 1.0).abs() < 1e-10);
}

#[test]
fn physical_conversion_matches_the_quadrature_energy() {
    let scaling: PhysicalScaling = variational::convert_physical(0.2, 1.0, 0.96).unwrap();
    assert!((scaling.mu - PI / 6.0).abs() < 1e-14);
    assert!((scaling.energy_scale - 1.2 / PI).abs() < 1e-14);
    assert!((scaling.energy_offset - 0.2).abs() < 1e-15);
    assert!(!scaling.below_kappa0);
    assert!(!scaling.above_kappa1);

    // Choosing h so that mu lands exactly on the upper threshold.
    let kappa1 = variational::kappa_1();
    let h_star = (kappa1 * 1.0 * 0.96 / (4.0 * PI)).sqrt();
    let edge = variational::convert_physical(h_star, 1.0, 0.96).unwrap();
    assert!((edge.mu - kappa1).abs() < 1e-14);

    let small = variational::convert_physical(0.05, 1.0, 1.0).unwrap();
    assert!(small.below_kappa0 && !small.above_kappa1);
    let large = variational::convert_physical(0.5, 1.0, 1.0).unwrap();
    assert!(large.above_kappa1 && !large.below_kappa0);

    // Quadrature oracle for the affine energy relation. In microscopic
    // variables the energy integrand is |w|^2 |v|^2 + (na Omega^2/2) |v|^4
    // with v(w) = h^{-1/2} u(w/sqrt h); substituting back to the macroscopic
    // plane gives h * I2 + (na Omega^2 / (2h)) * I4 with I2 = ∫|z|^2|u|^2 and
    // I4 = ∫|u|^4.
    let (h, na, omega_sq) = (0.2, 1.0, 0.96);
    let grid = TensorGrid::new(9.0, 200);
    let energy_quad = |state: &CoeffState| -> f64 {
        let i2 = grid.integrate(|z| {
            let v = fock::evaluate(state, z).value.norm_sqr();
            z.norm_sqr() * v
        });
        let i4 = grid.integrate(|z| fock::evaluate(state, z).value.norm_sqr().powi(2));
        h * i2 + na * omega_sq / (2.0 * h) * i4
    };

    let gaussian = CoeffState::basis(0, 16).unwrap();
    let e_gauss = energy_quad(&gaussian);
    let predicted = scaling.energy_scale * variational::g_mu(&gaussian, scaling.mu)
        + scaling.energy_offset * gaussian.mass();
    assert!(
        (e_gauss - predicted).abs() < 1e-8,
        "gaussian energy {e_gauss} vs affine {predicted}"
    );
    assert!((e_gauss - (scaling.energy_scale + h)).abs() < 1e-8);

    let mut worst = 0.0f64;
    for seed in 0..20 {
        let state = unit_random(16, 900 + seed);
        let direct = energy_quad(&state);
        let affine = scaling.energy_scale * variational::g_mu(&state, scaling.mu)
            + scaling.energy_offset * state.mass();
        worst = worst.max((direct - affine).abs());
    }
    assert!(worst < 1e-8, "affine energy relation violated by {worst}");
}

#[test]
fn symmetry_null_directions_appear_in_the_spectrum() {
    // The displaced vortex is a stationary point of the mu = 1/2 objective;
    // its restricted spectrum carries at least two near-zero directions
    // (rotation and the flat family parameter).
    let wave = catalog::make_psi_b(0.8, 64).unwrap();
    let spectrum = variational::restricted_hessian_spectrum(&wave.state, 0.5).unwrap();
    assert!(spectrum.stationary, "displaced vortex must be stationary");
    let near_zero = spectrum
        .eigenvalues
        .iter()
        .filter(|e| e.abs() < 1e-6)
        .count();
    assert!(
        near_zero >= 2,
        "expected at least two null directions, found {near_zero}"
    );
    assert_eq!(spectrum.eigenvalues.len(), 2 * 64 - 2);

    // A generic state is flagged non-stationary but still gets a spectrum.
    let generic = unit_random(16, 4);
    let loose = variational::restricted_hessian_spectrum(&generic, 0.3).unwrap();
    assert!(!loose.stationary);
    assert_eq!(loose.eigenvalues.len(), 2 * 16 - 2);
    let mut sorted = loose.eigenvalues.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(sorted, loose.eigenvalues);
}

#[test]
fn minimize_validates_arguments() {
    assert!(variational::minimize(&MinimizationProblem::gmu(-0.1, 32)).is_err());
    assert!(variational::minimize(&MinimizationProblem::gmu(f64::NAN, 32)).is_err());
    assert!(variational::minimize(&MinimizationProblem::gmu(0.5, 3)).is_err());

    let mut capped = MinimizationProblem::gmu(0.5, 16);
    capped.max_iters = 0;
    assert!(variational::minimize(&capped).is_err());

    let mut loose = MinimizationProblem::gmu(0.5, 16);
    loose.gradient_tol = 0.0;
    assert!(variational::minimize(&loose).is_err());

    let mut mismatched = MinimizationProblem::gmu(0.5, 16);
    mismatched.init = InitGuess::State(CoeffState::basis(0, 8).unwrap());
    assert!(variational::minimize(&mismatched).is_err());

    let mut degenerate = MinimizationProblem::gmu(0.5, 16);
    degenerate.parity = Some(ParityRestriction::MultiplesOf(0));
    assert!(variational::minimize(&degenerate).is_err());

    // Infeasible energy levels for the fixed-energy problem.
    let too_high = variational::minimize_p_fixed(1.2 / (8.0 * PI), 1.0, 32);
    assert!(matches!(too_high, Err(CoreError::Infeasible(_))));
    let zero_energy = variational::minimize_p_fixed(0.0, 1.0, 32);
    assert!(matches!(zero_energy, Err(CoreError::Infeasible(_))));
    assert!(variational::minimize_p_fixed(0.01, 0.0, 32).is_err());
    assert!(variational::psi_b_parameter_for(0.4).is_err());
    assert!(variational::psi_b_parameter_for(1.0).is_err());

    assert!(variational::convert_physical(0.0, 1.0, 1.0).is_err());
    assert!(variational::convert_physical(1.0, 1.0, 1.0).is_err());
    assert!(variational::convert_physical(0.2, 0.0, 1.0).is_err());
    assert!(variational::convert_physical(0.2, 1.0, -1.0).is_err());
}
