//! Oracle tests for the stationary-wave catalog.
//!
//! Expected values come from independent routes: closed-form invariant lists,
//! quadrature projections of the explicit profiles, the displacement operator
//! (a separately tested construction path), exact small-k radicals, the
//! pairing identity λM + μP = 4H, and phase evolution under the integrator.

use lll_core::catalog::{
    self, certify, certify_windowed, fit_decay, fit_multipliers, make_chi_alpha,
    make_phi_n_alpha, make_psi_b, make_tempered_deg2, make_v_k, mode_eigenvalue,
    TemperedVariant,
};
use lll_core::dynamics::{run, IntegratorConfig, MultiplierSpec, RunConfig};
use lll_core::fock::{self, CoeffState, SymmetryAction};
use lll_core::nonlinear;
use lll_core::quadrature::TensorGrid;
use lll_core::special::ln_factorial;
use lll_core::{Complex64, CoreError};
use std::f64::consts::{E, PI};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Quadrature projections of an explicit profile onto modes `0..=kmax`.
fn project_profile(
    profile: impl Fn(Complex64) -> Complex64,
    kmax: usize,
    radius: f64,
    pts: usize,
) -> Vec<Complex64> {
    let grid = TensorGrid::new(radius, pts);
    (0..=kmax)
        .map(|k| fock::project_mode(&grid, &profile, k))
        .collect()
}

/// Coefficients of χ_α truncated at `len`, built directly from the series.
fn chi_series(alpha: f64, len: usize) -> CoeffState {
    let x = alpha * alpha;
    let mut coeffs = vec![c(0.0, 0.0); len];
    let mut j = 0;
    while 2 * j + 1 < len {
        let k = 2 * j + 1;
        let ln_mag =
            k as f64 * alpha.ln() - 0.5 * ln_factorial(k as u64) - 0.5 * (x.sinh()).ln();
        coeffs[k] = c(ln_mag.exp(), 0.0);
        j += 1;
    }
    CoeffState::new(coeffs).unwrap()
}

// ---------------------------------------------------------------- φ_n^α

#[test]
fn translated_modes_match_the_displacement_operator() {
    let alpha = c(0.4, -0.2);
    for n in [0usize, 1, 3] {
        let wave = make_phi_n_alpha(n, alpha, 64).unwrap();
        let base = CoeffState::basis(n, 64).unwrap();
        let via_displacement =
            fock::apply_symmetry(&base, &SymmetryAction::Translation(-alpha.conj())).unwrap();
        let mut worst = 0.0f64;
        for (a, b) in wave.state.coeffs().iter().zip(via_displacement.coeffs()) {
            worst = worst.max((a - b).norm());
        }
        assert!(worst < 1e-12, "n={n}: construction paths differ by {worst}");
    }
}

#[test]
fn coherent_member_has_the_dictionary_coefficients() {
    let wave = make_phi_n_alpha(0, c(1.0, 0.0), 64).unwrap();
    for (k, ck) in wave.state.coeffs().iter().enumerate().take(20) {
        let expect = (-0.5 - 0.5 * ln_factorial(k as u64)).exp();
        assert!((ck - c(expect, 0.0)).norm() < 1e-13, "mode {k}");
    }
    assert!((wave.lambda - 1.0 / (2.0 * PI)).abs() < 1e-16);
    assert_eq!(wave.mu, 0.0);
    assert!(wave.residual < 1e-10);

    let e0 = make_phi_n_alpha(0, c(0.0, 0.0), 16).unwrap();
    assert!((e0.state.get(0) - c(1.0, 0.0)).norm() < 1e-15);
    assert!((e0.lambda - 1.0 / (2.0 * PI)).abs() < 1e-16);
    let e1 = make_phi_n_alpha(1, c(0.0, 0.0), 16).unwrap();
    assert!((e1.state.get(1) - c(1.0, 0.0)).norm() < 1e-15);
    assert!((e1.lambda - 1.0 / (4.0 * PI)).abs() < 1e-16);
}

#[test]
fn translated_mode_invariants_match_closed_forms() {
    let alpha = c(0.5, 0.3);
    let wave = make_phi_n_alpha(3, alpha, 96).unwrap();
    let cons = fock::conserved(&wave.state);
    assert!((cons.mass - 1.0).abs() < 1e-12);
    assert!((cons.degree - (3.0 + alpha.norm_sqr())).abs() < 1e-10);
    assert!((cons.magnetic - alpha.conj()).norm() < 1e-10);
    // H = (2n)!/(8π 2^{2n} (n!)²) = 5/(128π) at n = 3.
    assert!((cons.energy - 5.0 / (128.0 * PI)).abs() < 1e-10);

    let inv = wave.invariants.as_ref().expect("normalizable member");
    assert!((inv.mass - 1.0).abs() < 1e-15);
    assert!((inv.degree - (3.0 + alpha.norm_sqr())).abs() < 1e-15);
    assert!((inv.magnetic - alpha.conj()).norm() < 1e-15);
    assert!((inv.energy - 5.0 / (128.0 * PI)).abs() < 1e-15);
}

#[test]
fn translated_mode_eigenvalues_follow_the_mode_ladder() {
    assert!((mode_eigenvalue(0) - 1.0 / (2.0 * PI)).abs() < 1e-16);
    assert!((mode_eigenvalue(1) - 1.0 / (4.0 * PI)).abs() < 1e-16);
    assert!((mode_eigenvalue(2) - 3.0 / (16.0 * PI)).abs() < 1e-16);
    assert!((mode_eigenvalue(3) - 5.0 / (32.0 * PI)).abs() < 1e-16);
    // Central-binomial asymptotics: ω_n · 2π √(πn) → 1.
    let n = 400.0;
    assert!((mode_eigenvalue(400) * 2.0 * PI * (PI * n).sqrt() - 1.0).abs() < 1e-3);
}

#[test]
fn translated_mode_requires_enough_modes() {
    assert!(matches!(
        make_phi_n_alpha(0, c(6.0, 0.0), 16),
        Err(CoreError::Truncation(_))
    ));
    assert!(matches!(
        make_phi_n_alpha(16, c(0.0, 0.0), 16),
        Err(CoreError::InvalidArgument(_))
    ));
}

// ---------------------------------------------------------------- ψ_b

#[test]
fn displaced_vortex_matches_quadrature_projection() {
    let b: f64 = 0.8;
    let beta = b / (1.0 + b * b);
    let gamma = -b * (2.0 + b * b) / (1.0 + b * b);
    let norm = (-0.5 * beta * beta).exp() / (PI * (1.0 + b * b)).sqrt();
    let profile = move |z: Complex64| {
        (z + gamma) * (beta * z - 0.5 * z.norm_sqr()).exp() * norm
    };
    let oracle = project_profile(profile, 16, 10.0, 120);
    let wave = make_psi_b(b, 48).unwrap();
    for (k, expect) in oracle.iter().enumerate() {
        let got = wave.state.get(k);
        assert!((got - expect).norm() < 1e-9, "mode {k}: {got} vs {expect}");
    }
}

#[test]
fn displaced_vortex_invariants() {
    for b in [0.0, 0.5, 1.0, 1.3] {
        let wave = make_psi_b(b, 96).unwrap();
        let cons = fock::conserved(&wave.state);
        let s = 1.0 + b * b;
        assert!((cons.mass - 1.0).abs() < 1e-12, "b={b}");
        assert!((cons.degree - 1.0 / (s * s)).abs() < 1e-12, "b={b}");
        assert!(cons.magnetic.norm() < 1e-12, "b={b}");
        assert!(
            (8.0 * PI * cons.energy - (1.0 - 0.5 / (s * s))).abs() < 1e-11,
            "b={b}"
        );
    }
    // Spot values at b = 1: P = 1/4 and H = 7/(64π).
    let unit = make_psi_b(1.0, 96).unwrap();
    let cons = fock::conserved(&unit.state);
    assert!((cons.degree - 0.25).abs() < 1e-12);
    assert!((cons.energy - 7.0 / (64.0 * PI)).abs() < 1e-12);
}

#[test]
fn displaced_vortex_multipliers_and_residual() {
    for b in [0.0, 0.7, 1.0] {
        let wave = make_psi_b(b, 96).unwrap();
        let s = 1.0 + b * b;
        let lambda = (4.0 * b.powi(4) + 8.0 * b * b + 3.0) / (8.0 * PI * s * s);
        let mu = -1.0 / (8.0 * PI);
        assert!((wave.lambda - lambda).abs() < 1e-15, "b={b}");
        assert!((wave.mu - mu).abs() < 1e-16, "b={b}");
        assert!(wave.residual < 1e-9, "b={b}: residual {}", wave.residual);
        assert!(certify(&wave.state, lambda, mu).unwrap() < 1e-9);

        // Pairing identity λM + μP = 4H ties the multipliers to the
        // invariants without any reference to the interaction code.
        let cons = fock::conserved(&wave.state);
        let lhs = lambda * cons.mass + mu * cons.degree;
        assert!((lhs - 4.0 * cons.energy).abs() < 1e-12, "b={b}");
    }
    // At b = 0 the wave is the first mode, so λ + μ must be its eigenvalue.
    let at_zero = make_psi_b(0.0, 96).unwrap();
    assert!((at_zero.lambda + at_zero.mu - 1.0 / (4.0 * PI)).abs() < 1e-15);
}

#[test]
fn displaced_vortex_rotates_under_the_flow() {
    let wave = make_psi_b(0.9, 64).unwrap();
    let t_end = 1.5;
    let cfg = RunConfig {
        integrator: IntegratorConfig::rk4(1e-3).unwrap(),
        t_end,
        record_stride: 1500,
        w_orders: vec![],
        manifold_stride: None,
        snapshot_stride: None,
        multipliers: MultiplierSpec::None,
    };
    let out = run(&wave.state, &cfg).unwrap();
    let mut worst = 0.0f64;
    for (k, initial) in wave.state.coeffs().iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -(wave.lambda + k as f64 * wave.mu) * t_end);
        worst = worst.max((out.final_state.get(k) - initial * phase).norm());
    }
    assert!(worst < 1e-8, "rotating-frame phase law violated by {worst}");
}

// ---------------------------------------------------------------- χ_α

#[test]
fn odd_coherent_series_and_mass() {
    let alpha = 1.1f64;
    let wave = make_chi_alpha(c(alpha, 0.0), 96).unwrap();
    let sinh_x = (alpha * alpha).sinh();
    // c_1 = α/√sinh(α²), c_3 = α³/√(3! sinh(α²)).
    assert!((wave.state.get(1) - c(alpha / sinh_x.sqrt(), 0.0)).norm() < 1e-14);
    assert!((wave.state.get(3) - c(alpha.powi(3) / (6.0 * sinh_x).sqrt(), 0.0)).norm() < 1e-14);
    for k in (0..96).step_by(2) {
        assert_eq!(wave.state.get(k), c(0.0, 0.0), "even mode {k} must vanish");
    }
    assert!((wave.state.mass() - 1.0).abs() < 1e-13);
    assert!(matches!(
        make_chi_alpha(c(0.0, 0.0), 64),
        Err(CoreError::InvalidArgument(_))
    ));
}

#[test]
fn odd_coherent_invariants_and_certification() {
    let wave = make_chi_alpha(c(1.0, 0.0), 96).unwrap();
    let cons = fock::conserved(&wave.state);
    assert!((cons.mass - 1.0).abs() < 1e-13);
    assert!((cons.degree - 1.0 / 1.0f64.tanh()).abs() < 1e-12, "P must be coth(1)");
    assert!(cons.magnetic.norm() < 1e-15);
    assert!((cons.energy - 1.0 / (16.0 * PI)).abs() < 1e-10);
    assert!((wave.lambda - 1.0 / (4.0 * PI)).abs() < 1e-16);
    assert_eq!(wave.mu, 0.0);
    assert!(wave.residual < 1e-9);
    assert!(make_chi_alpha(c(1.7, 0.0), 96).unwrap().residual < 1e-9);

    // Projection oracle on the explicit profile sinh(z)e^{−|z|²/2}/√(π sinh 1).
    let norm = 1.0 / (PI * 1.0f64.sinh()).sqrt();
    let profile = move |z: Complex64| z.sinh() * (-0.5 * z.norm_sqr()).exp() * norm;
    let oracle = project_profile(profile, 9, 10.0, 120);
    for (k, expect) in oracle.iter().enumerate() {
        assert!((wave.state.get(k) - expect).norm() < 1e-10, "mode {k}");
    }
}

#[test]
fn odd_coherent_truncation_residual_is_monotone() {
    // Hand-built truncations at a steep α: the residual tracks the discarded
    // tail, so it must fall as the cutoff grows, down to the rounding floor.
    let lambda = 1.0 / (4.0 * PI);
    let r24 = certify(&chi_series(2.2, 24), lambda, 0.0).unwrap();
    let r32 = certify(&chi_series(2.2, 32), lambda, 0.0).unwrap();
    let r40 = certify(&chi_series(2.2, 40), lambda, 0.0).unwrap();
    let r72 = certify(&chi_series(2.2, 72), lambda, 0.0).unwrap();
    assert!(r24 > r32 && r32 > r40 && r40 > r72, "{r24} {r32} {r40} {r72}");
    assert!(r72 < 1e-12);

    // Constructor-built members at a comfortable cutoff sit at the floor.
    let a = make_chi_alpha(c(1.9, 0.0), 48).unwrap().residual;
    let b = make_chi_alpha(c(1.9, 0.0), 96).unwrap().residual;
    assert!(b <= a + 1e-13);
}

// ---------------------------------------------------------------- v_k

#[test]
fn sine_lattice_mass_invariants_and_residual() {
    let alpha = PI.sqrt();
    let wave = make_v_k(c(alpha, 0.0), 1, 160).unwrap();
    let cons = fock::conserved(&wave.state);
    assert!((cons.mass - 1.0).abs() < 1e-10);
    assert!(cons.magnetic.norm() < 1e-12);
    assert!((cons.energy - 1.0 / (32.0 * PI)).abs() < 1e-9);
    // With |α|² = π the two scales coincide and P collapses to 2π coth π.
    let expect_p = 2.0 * PI / PI.tanh();
    assert!((cons.degree - expect_p).abs() < 1e-9, "{} vs {expect_p}", cons.degree);
    // The general closed form evaluated at x = y = π agrees.
    let (x, y) = (PI, PI);
    let general = ((x + y) * (x + y).sinh() + (x - y) * (y - x).sinh())
        / (2.0 * x.sinh() * y.sinh());
    assert!((general - expect_p).abs() < 1e-12);
    assert!((wave.lambda - 1.0 / (8.0 * PI)).abs() < 1e-16);
    assert_eq!(wave.mu, 0.0);
    assert!(wave.residual < 1e-8, "residual {}", wave.residual);

    let second = make_v_k(c((2.0 * PI).sqrt(), 0.0), 2, 192).unwrap();
    let cons2 = fock::conserved(&second.state);
    assert!((cons2.mass - 1.0).abs() < 1e-10);
    assert!((cons2.energy - 1.0 / (32.0 * PI)).abs() < 1e-9);
    assert!(second.residual < 1e-8);
}

#[test]
fn sine_lattice_matches_quadrature_projection() {
    let alpha = PI.sqrt();
    let wave = make_v_k(c(alpha, 0.0), 1, 128).unwrap();
    let norm = 1.0 / (PI * PI.sinh() * PI.sinh()).sqrt();
    let profile = move |z: Complex64| {
        (alpha * z).sinh() * (alpha * z).sin() * (-0.5 * z.norm_sqr()).exp() * norm
    };
    let oracle = project_profile(profile, 12, 12.0, 160);
    for k in [2usize, 4, 6, 8, 10, 12] {
        let got = wave.state.get(k);
        assert!((got - oracle[k]).norm() < 1e-9, "mode {k}: {got} vs {}", oracle[k]);
    }
    // Odd modes vanish identically: the profile is even.
    for k in (1..128).step_by(2) {
        assert_eq!(wave.state.get(k), c(0.0, 0.0), "odd mode {k}");
    }
}

#[test]
fn sine_lattice_rejects_degenerate_parameters() {
    assert!(matches!(
        make_v_k(c(1.0, 0.0), 0, 64),
        Err(CoreError::InvalidArgument(_))
    ));
    assert!(matches!(
        make_v_k(c(0.0, 0.0), 1, 64),
        Err(CoreError::InvalidArgument(_))
    ));
}

// ---------------------------------------------------------------- tempered

#[test]
fn line_soliton_dictionary_coefficients() {
    let wave = make_tempered_deg2(TemperedVariant::Gauss2, 0.0, 64).unwrap();
    assert!(!wave.normalizable);
    assert!(wave.invariants.is_none());
    assert!((wave.state.get(0) - c(PI.sqrt(), 0.0)).norm() < 1e-14);
    assert!((wave.state.get(2).re.powi(2) - PI / 2.0).abs() < 1e-13);
    assert!((wave.state.get(4).re.powi(2) - 3.0 * PI / 8.0).abs() < 1e-13);
    for k in (1..64).step_by(2) {
        assert_eq!(wave.state.get(k), c(0.0, 0.0), "odd mode {k}");
    }

    let zed = make_tempered_deg2(TemperedVariant::ZGauss2, 0.0, 64).unwrap();
    assert!((zed.state.get(1) - c(PI.sqrt(), 0.0)).norm() < 1e-14);
    assert!((zed.state.get(3).re.powi(2) - 3.0 * PI / 2.0).abs() < 1e-12);
    for k in (0..64).step_by(2) {
        assert_eq!(zed.state.get(k), c(0.0, 0.0), "even mode {k}");
    }
}

#[test]
fn line_soliton_pair_sequence_identity() {
    // For the degree-2 Gaussian the pair sequence reproduces the coefficients:
    // D_S = √π · c_S (derivable by splitting the binomial sum).
    let wave = make_tempered_deg2(TemperedVariant::Gauss2, 0.0, 256).unwrap();
    let pairs = nonlinear::pair_sequence(&wave.state);
    for s in [0usize, 2, 10, 40, 120, 200] {
        let expect = wave.state.get(s) * PI.sqrt();
        let got = pairs[s];
        assert!(
            (got - expect).norm() <= 1e-12 * expect.norm().max(1.0),
            "S={s}: {got} vs {expect}"
        );
    }
}

#[test]
fn line_soliton_certification_window() {
    let flat = make_tempered_deg2(TemperedVariant::Gauss2, 0.0, 256).unwrap();
    let lambda = 1.0 / 2.0f64.sqrt();
    assert!((flat.lambda - lambda).abs() < 1e-15);
    assert_eq!(flat.mu, 0.0);
    assert_eq!(flat.certification_window(), 64);
    assert!(flat.residual < 1e-6, "residual {}", flat.residual);
    assert!(certify_windowed(&flat.state, lambda, 0.0, 64).unwrap() < 1e-6);

    // Shifted along the soliton line: same multiplier.
    let shifted = make_tempered_deg2(TemperedVariant::Gauss2, 1.3, 256).unwrap();
    assert!((shifted.lambda - lambda).abs() < 1e-15);
    assert!(shifted.residual < 1e-6, "residual {}", shifted.residual);

    let zed = make_tempered_deg2(TemperedVariant::ZGauss2, 0.0, 256).unwrap();
    assert!((zed.lambda - 3.0 / (2.0 * 2.0f64.sqrt())).abs() < 1e-15);
    assert!((zed.mu - lambda).abs() < 1e-15);
    assert!(zed.residual < 1e-6, "residual {}", zed.residual);

    let off = make_tempered_deg2(TemperedVariant::ZGauss2, 0.9, 256).unwrap();
    assert!((off.lambda - (1.5 + 0.81) / 2.0f64.sqrt()).abs() < 1e-14);
    assert!(off.residual < 1e-6, "residual {}", off.residual);
}

#[test]
fn shifted_line_soliton_magnetic_moment_vanishes() {
    // The truncation is arranged so the magnetic moment cancels pair by pair.
    for len in [128usize, 129] {
        let wave = make_tempered_deg2(TemperedVariant::ZGauss2, 0.7, len).unwrap();
        let q = wave.state.magnetic();
        assert!(q.norm() < 1e-10, "len {len}: Q = {q}");
    }
}

#[test]
fn line_soliton_envelope_decays_like_quarter_power() {
    let wave = make_tempered_deg2(TemperedVariant::Gauss2, 0.0, 256).unwrap();
    let target = (2.0 * PI).powf(0.25);
    for k in (100..250).step_by(2) {
        let scaled = wave.state.get(k).norm() * (k as f64).powf(0.25);
        assert!((scaled - target).abs() < 0.01, "k={k}: {scaled} vs {target}");
    }
}

// ---------------------------------------------------------------- certify

#[test]
fn certify_matches_direct_formula_on_single_modes() {
    let e0 = CoeffState::basis(0, 8).unwrap();
    assert!(certify(&e0, 1.0 / (2.0 * PI), 0.0).unwrap() < 1e-14);
    let off = certify(&e0, 1.0, 0.0).unwrap();
    assert!((off - (1.0 - 1.0 / (2.0 * PI))).abs() < 1e-14);

    // The normalized residual is invariant under amplitude rescaling when the
    // multipliers scale quadratically.
    let t = 1.3f64;
    let scaled = CoeffState::new(vec![c(t, 0.0); 1]).unwrap();
    assert!(certify(&scaled, t * t / (2.0 * PI), 0.0).unwrap() < 1e-14);
}

#[test]
fn certify_rejects_zero_states_and_bad_windows() {
    let zero = CoeffState::new(vec![c(0.0, 0.0); 8]).unwrap();
    assert!(matches!(
        certify(&zero, 1.0, 0.0),
        Err(CoreError::InvalidArgument(_))
    ));
    let e0 = CoeffState::basis(0, 8).unwrap();
    assert!(certify_windowed(&e0, 1.0, 0.0, 0).is_err());
    assert!(certify_windowed(&e0, 1.0, 0.0, 9).is_err());
    assert!(certify(&e0, f64::NAN, 0.0).is_err());
}

#[test]
fn multiplier_fit_recovers_known_pairs() {
    let wave = make_psi_b(0.7, 96).unwrap();
    let fit = fit_multipliers(&wave.state).unwrap();
    assert!((fit.lambda - wave.lambda).abs() < 1e-10);
    assert!((fit.mu - wave.mu).abs() < 1e-10);
    assert!(fit.residual < 1e-9);

    // A pure-λ member must fit with μ̂ ≈ 0 even though μ is free.
    let chi = make_chi_alpha(c(1.0, 0.0), 96).unwrap();
    let chi_fit = fit_multipliers(&chi.state).unwrap();
    assert!((chi_fit.lambda - 1.0 / (4.0 * PI)).abs() < 1e-10);
    assert!(chi_fit.mu.abs() < 1e-9);

    // Generic data is far from stationary.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let coeffs: Vec<Complex64> = (0..24)
        .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let state = CoeffState::new(coeffs).unwrap().normalized_to_mass(1.0).unwrap();
    let generic = fit_multipliers(&state).unwrap();
    assert!(generic.residual > 0.01, "residual {}", generic.residual);

    // A single mode leaves μ undetermined; the fit pins it to zero.
    let e0 = CoeffState::basis(0, 8).unwrap();
    let lone = fit_multipliers(&e0).unwrap();
    assert!((lone.lambda - 1.0 / (2.0 * PI)).abs() < 1e-14);
    assert_eq!(lone.mu, 0.0);
}

#[test]
fn certification_is_symmetry_invariant() {
    let wave = make_psi_b(0.8, 96).unwrap();
    let base = certify(&wave.state, wave.lambda, wave.mu).unwrap();

    let phased =
        fock::apply_symmetry(&wave.state, &SymmetryAction::Phase(0.7)).unwrap();
    let rotated =
        fock::apply_symmetry(&wave.state, &SymmetryAction::Rotation(0.4)).unwrap();
    assert!((certify(&phased, wave.lambda, wave.mu).unwrap() - base).abs() < 1e-13);
    assert!((certify(&rotated, wave.lambda, wave.mu).unwrap() - base).abs() < 1e-13);

    // Translations close the μ = 0 coherent-mode family: a translate of one
    // member is another member (up to a global phase), with the same λ.
    let alpha = c(0.3, 0.1);
    let beta = c(0.2, -0.4);
    let start = make_phi_n_alpha(2, alpha, 72).unwrap();
    let moved =
        fock::apply_symmetry(&start.state, &SymmetryAction::Translation(beta)).unwrap();
    assert!(certify(&moved, mode_eigenvalue(2), 0.0).unwrap() < 1e-9);
    let landed = make_phi_n_alpha(2, alpha - beta.conj(), 72).unwrap();
    let inner: Complex64 = moved
        .coeffs()
        .iter()
        .zip(landed.state.coeffs())
        .map(|(a, b)| a.conj() * b)
        .sum();
    let correlation = inner.norm() / (moved.mass().sqrt() * landed.state.mass().sqrt());
    assert!(correlation > 1.0 - 1e-10, "correlation {correlation}");
}

// ---------------------------------------------------------------- decay fit

#[test]
fn decay_fit_separates_the_models() {
    // Coherent states decay like α^n/√(n!): superexponential with γ → 1/2.
    let coherent = make_phi_n_alpha(0, c(1.0, 0.0), 200).unwrap();
    let fit = fit_decay(&coherent.state).unwrap();
    assert!(fit.gamma_hat > 0.45 && fit.gamma_hat < 0.55, "γ̂ = {}", fit.gamma_hat);
    assert!(fit.eta_hat > 0.95 && fit.eta_hat < 1.05, "η̂ = {}", fit.eta_hat);
    assert!(fit.gamma_hat > catalog::gamma_zero());

    // Same behavior on the odd-mode family.
    let chi = make_chi_alpha(c(1.0, 0.0), 255).unwrap();
    let chi_fit = fit_decay(&chi.state).unwrap();
    assert!(chi_fit.gamma_hat > 0.45 && chi_fit.gamma_hat < 0.55);

    // A geometric sequence is fit exactly by the γ = 0 branch of the model.
    let geo = CoeffState::new((0..64).map(|n| c(0.5f64.powi(n), 0.0)).collect()).unwrap();
    let geo_fit = fit_decay(&geo).unwrap();
    assert!(geo_fit.gamma_hat.abs() < 1e-6, "γ̂ = {}", geo_fit.gamma_hat);
    assert!((geo_fit.r_hat - 0.5).abs() < 1e-6, "r̂ = {}", geo_fit.r_hat);
    assert!((geo_fit.eta_hat - 2.0).abs() < 1e-5);

    // The tempered envelope is a pure power law: γ̂ ≈ 0.
    let flat = make_tempered_deg2(TemperedVariant::Gauss2, 0.0, 256).unwrap();
    let flat_fit = fit_decay(&flat.state).unwrap();
    assert!(flat_fit.gamma_hat.abs() < 0.02, "γ̂ = {}", flat_fit.gamma_hat);
    assert!(flat_fit.eta_hat > 1.8 && flat_fit.eta_hat < 2.2);

    // The final 10% of modes is excluded, so corrupting it changes nothing.
    let mut corrupted = coherent.state.coeffs().to_vec();
    for slot in corrupted.iter_mut().skip(191) {
        *slot = c(1e-3, -2e-3);
    }
    let corrupted_fit = fit_decay(&CoeffState::new(corrupted).unwrap()).unwrap();
    assert!((corrupted_fit.gamma_hat - fit.gamma_hat).abs() < 1e-12);
    assert!((corrupted_fit.r_hat - fit.r_hat).abs() < 1e-12);

    // Too few resolvable modes is an error.
    let short = CoeffState::basis(3, 12).unwrap();
    assert!(matches!(fit_decay(&short), Err(CoreError::InsufficientData(_))));
}

#[test]
fn growth_exponent_references() {
    let g0 = catalog::gamma_zero();
    assert!((g0 - 2.0f64.ln() / (2.0 * 3.0f64.ln())).abs() < 1e-16);
    assert!((g0 - 0.3155).abs() < 5e-5);
    let e0 = catalog::eta_zero();
    assert!((e0 - 1.0 / (0.5 + g0)).abs() < 1e-15);
    assert!((e0 - 1.226).abs() < 5e-4);
    // Guard against accidental reuse of Euler's constant anywhere nearby.
    assert!((E - 2.718281828459045).abs() < 1e-15);
}

#[test]
fn catalog_distance_recognizes_members_and_flags_outsiders() {
    // A displaced third mode off the search grid is still recognized.
    let alpha = c(0.4 * 0.3f64.cos(), 0.4 * 0.3f64.sin());
    let member = make_phi_n_alpha(3, alpha, 64).unwrap().state;
    let hit = catalog::catalog_distance(&member).unwrap();
    assert_eq!(hit.family, "phi_n_alpha");
    assert!(hit.distance < 1e-3, "displaced mode not recognized: {}", hit.distance);

    // A rotated, re-phased vortex member lands on the vortex branch ...
    let psi = make_psi_b(1.3, 48).unwrap().state;
    let moved = fock::apply_symmetry(
        &fock::apply_symmetry(&psi, &SymmetryAction::Rotation(0.9)).unwrap(),
        &SymmetryAction::Phase(0.35),
    )
    .unwrap();
    let hit = catalog::catalog_distance(&moved).unwrap();
    assert_eq!(hit.family, "psi_b");
    assert!(hit.distance < 1e-4, "vortex member not recognized: {}", hit.distance);

    // ... and so does one whose parameter sits between the scan nodes.
    let between = make_psi_b(1.33, 48).unwrap().state;
    let hit = catalog::catalog_distance(&between).unwrap();
    assert!(hit.distance < 1e-3, "off-node vortex: {}", hit.distance);

    // The odd coherent superposition has infinitely many zeros: far from
    // every finite-zero orbit.
    let chi = make_chi_alpha(c(1.0, 0.0), 96).unwrap().state;
    let miss = catalog::catalog_distance(&chi).unwrap();
    assert!(miss.distance > 0.02, "odd superposition too close: {}", miss.distance);

    // A two-mode beat state is no displaced mode either.
    let mut mix = vec![c(0.0, 0.0); 32];
    mix[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    mix[5] = c(0.0, std::f64::consts::FRAC_1_SQRT_2);
    let mix = CoeffState::new(mix).unwrap();
    let miss = catalog::catalog_distance(&mix).unwrap();
    assert!(miss.distance > 1e-2, "beat state too close: {}", miss.distance);

    // Scale invariance: the distance is taken after unit normalization.
    let tripled = CoeffState::new(mix.coeffs().iter().map(|v| 3.0 * v).collect()).unwrap();
    let again = catalog::catalog_distance(&tripled).unwrap();
    assert!((again.distance - miss.distance).abs() < 1e-12);
}
