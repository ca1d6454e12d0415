//! Constrained variational solvers on the mass sphere.
//!
//! Two problems are covered. The first minimizes the combined functional
//! `G_μ = 8πH + μP` over unit-mass states, optionally restricted to a parity
//! subspace; its stationary landscape changes character at the couplings
//! `κ₀ = 5/32`, `1/2`, and `κ₁ = √3 − 1`, which this module localizes through
//! restricted-Hessian spectra. The second minimizes the degree `P` at fixed
//! energy and mass through a quadratic-penalty outer loop; for energy ratios
//! `γ = 8πH₀/M₀² ∈ [1/2, 1)` the minimizer is the displaced-vortex profile
//! with `(1+b²)² = 1/(2(1−γ))`.
//!
//! The descent engine is projected gradient on the sphere with a
//! Barzilai–Borwein step proposal, Armijo backtracking, retraction by
//! rescaling, and a phase gauge that keeps the largest coefficient on the
//! positive real axis. Restricted Hessians live on the sphere tangent space
//! modulo the phase direction; they are assembled analytically at the first
//! two eigenmodes and by symmetric finite differences elsewhere.

use crate::catalog::{self, MultiplierFit};
use crate::error::{CoreError, Result};
use crate::fock::{self, CoeffState};
use crate::linalg;
use crate::nonlinear;
use crate::par;
use crate::zeros;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PI: f64 = std::f64::consts::PI;

/// Lower coupling threshold `5/32`: below it the second mode stops being a
/// local minimizer of `G_μ` and minimizers spread over many modes.
pub const KAPPA_0: f64 = 0.15625;

/// Upper coupling threshold `√3 − 1`: at and above it the flat profile is the
/// unique global minimizer of `G_μ`.
pub fn kappa_1() -> f64 {
    3f64.sqrt() - 1.0
}

/// Support restriction to a sublattice of modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityRestriction {
    /// Even modes only (stride two).
    Even,
    /// Multiples of a fixed stride `k₀ ≥ 1`.
    MultiplesOf(usize),
}

/// Starting point of a minimization.
#[derive(Debug, Clone)]
pub enum InitGuess {
    /// Deterministic pseudo-random start drawn from this seed.
    Seeded(u64),
    /// Explicit start; it is renormalized onto the constraint sphere.
    State(CoeffState),
}

/// Which constrained problem to solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    /// Minimize `G_μ = 8πH + μP` at unit mass.
    Gmu { mu: f64 },
    /// Minimize `P` subject to `H = energy` and `M = mass`.
    PFixed { energy: f64, mass: f64 },
}

/// A fully specified minimization run.
#[derive(Debug, Clone)]
pub struct MinimizationProblem {
    pub kind: ProblemKind,
    /// Number of retained modes.
    pub len: usize,
    pub parity: Option<ParityRestriction>,
    pub init: InitGuess,
    /// Target norm of the projected gradient.
    pub gradient_tol: f64,
    /// Accepted violation of `|8πH − γ|` for the fixed-energy problem.
    pub constraint_tol: f64,
    /// Iteration budget (per penalty stage for the fixed-energy problem).
    pub max_iters: usize,
}

impl MinimizationProblem {
    /// Combined-functional problem with default tolerances and a fixed seed.
    pub fn gmu(mu: f64, len: usize) -> Self {
        MinimizationProblem {
            kind: ProblemKind::Gmu { mu },
            len,
            parity: None,
            init: InitGuess::Seeded(0xC0FFEE),
            gradient_tol: 1e-9,
            constraint_tol: 1e-8,
            max_iters: 50_000,
        }
    }

    /// Fixed-energy degree minimization with default tolerances.
    pub fn p_fixed(energy: f64, mass: f64, len: usize) -> Self {
        MinimizationProblem {
            kind: ProblemKind::PFixed { energy, mass },
            len,
            parity: None,
            init: InitGuess::Seeded(0xC0FFEE),
            gradient_tol: 1e-9,
            constraint_tol: 1e-8,
            max_iters: 12_000,
        }
    }
}

/// Outcome of a minimization run.
#[derive(Debug, Clone)]
pub struct MinimizationResult {
    pub minimizer: CoeffState,
    /// Final objective: `G_μ` or the physical degree `P`.
    pub objective: f64,
    /// Absolute violations of the imposed constraints (mass first).
    pub constraint_residuals: Vec<f64>,
    /// Least-squares stationarity multipliers of the minimizer.
    pub multipliers: MultiplierFit,
    /// Sorted restricted-Hessian eigenvalues at the minimizer.
    pub hessian_spectrum: Vec<f64>,
    /// Zeros (with multiplicity) inside the truncation's trusted disk.
    pub zero_count_in_trust_radius: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Restricted-Hessian spectrum together with a stationarity diagnostic.
#[derive(Debug, Clone)]
pub struct RestrictedSpectrum {
    /// Eigenvalues on the sphere tangent space modulo phase, ascending.
    pub eigenvalues: Vec<f64>,
    /// Norm of the gradient projected onto that tangent space.
    pub projected_gradient_norm: f64,
    /// Whether the projected gradient is negligible against the full one.
    pub stationary: bool,
}

/// The combined functional `G_μ(c) = 8πH(c) + μP(c)`.
pub fn g_mu(state: &CoeffState, mu: f64) -> f64 {
    8.0 * PI * nonlinear::hamiltonian(state) + mu * state.degree()
}

// ---------------------------------------------------------------------------
// Restricted Hessian spectra
// ---------------------------------------------------------------------------

/// Analytic restricted spectrum at the flat profile: `8/2ⁿ + 2μn − 4` for
/// `1 ≤ n < len`, each doubled for the real and imaginary perturbations.
pub fn flat_profile_spectrum(mu: f64, len: usize) -> Result<Vec<f64>> {
    if !mu.is_finite() {
        return Err(CoreError::arg("coupling must be finite"));
    }
    if len < 2 {
        return Err(CoreError::arg("need at least two modes for a spectrum"));
    }
    let mut eigs = Vec::with_capacity(2 * len - 2);
    for n in 1..len {
        let eig = 8.0 / 2f64.powi(n as i32) + 2.0 * mu * n as f64 - 4.0;
        eigs.push(eig);
        eigs.push(eig);
    }
    eigs.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(eigs)
}

/// Analytic restricted spectrum at the second mode: the coupled block on
/// modes 0 and 2 contributes `3/2 ± √((1−4μ)²/4 + 2)` (each doubled), and
/// every mode `n ≥ 3` contributes `(n+1)/2^{n−2} − 2 + 2μ(n−1)` (doubled).
pub fn second_mode_spectrum(mu: f64, len: usize) -> Result<Vec<f64>> {
    if !mu.is_finite() {
        return Err(CoreError::arg("coupling must be finite"));
    }
    if len < 4 {
        return Err(CoreError::arg("need at least four modes for this spectrum"));
    }
    let gap = ((1.0 - 4.0 * mu).powi(2) / 4.0 + 2.0).sqrt();
    let mut eigs = vec![1.5 - gap, 1.5 - gap, 1.5 + gap, 1.5 + gap];
    for n in 3..len {
        let eig =
            (n as f64 + 1.0) / 2f64.powi(n as i32 - 2) - 2.0 + 2.0 * mu * (n as f64 - 1.0);
        eigs.push(eig);
        eigs.push(eig);
    }
    eigs.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(eigs)
}

fn flatten(c: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * c.len());
    for v in c {
        out.push(v.re);
        out.push(v.im);
    }
    out
}

fn unflatten(r: &[f64]) -> Vec<Complex64> {
    r.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

fn re_dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

fn project_tangent(c: &[Complex64], g: &[Complex64], mass: f64) -> Vec<Complex64> {
    let alpha = re_dot(c, g) / mass;
    g.iter().zip(c).map(|(gv, cv)| gv - alpha * cv).collect()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn stationarity(point: &CoeffState, mu: f64) -> (f64, bool) {
    let g = nonlinear::grad_gmu(point, mu);
    let gt = project_tangent(point.coeffs(), &g, point.mass());
    let gt_norm = norm(&gt);
    let g_norm = norm(&g).max(1e-300);
    (gt_norm, gt_norm <= 1e-5 * g_norm)
}

/// Restricted Hessian of `G_μ` by symmetric finite differences of the
/// gradient, projected onto the tangent space of the mass sphere modulo the
/// phase direction, then diagonalized densely.
pub fn restricted_hessian_spectrum_fd(point: &CoeffState, mu: f64) -> Result<RestrictedSpectrum> {
    if !mu.is_finite() {
        return Err(CoreError::arg("coupling must be finite"));
    }
    let n = point.len();
    if n < 2 {
        return Err(CoreError::arg("need at least two modes for a spectrum"));
    }
    let mass = point.mass();
    if mass <= 0.0 {
        return Err(CoreError::InvalidState(
            "cannot linearize at the zero state".into(),
        ));
    }
    let dim = 2 * n;
    let c_real = flatten(point.coeffs());

    // Euclidean Hessian of G_mu by central differences of the gradient.
    let h = 1e-5;
    let grad_at = |r: &[f64]| -> Result<Vec<f64>> {
        let state = CoeffState::new(unflatten(r))?;
        Ok(flatten(&nonlinear::grad_gmu(&state, mu)))
    };
    let mut b = vec![0.0f64; dim * dim];
    let mut shifted = c_real.clone();
    for j in 0..dim {
        shifted[j] = c_real[j] + h;
        let plus = grad_at(&shifted)?;
        shifted[j] = c_real[j] - h;
        let minus = grad_at(&shifted)?;
        shifted[j] = c_real[j];
        for i in 0..dim {
            b[i * dim + j] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    for i in 0..dim {
        for j in (i + 1)..dim {
            let s = 0.5 * (b[i * dim + j] + b[j * dim + i]);
            b[i * dim + j] = s;
            b[j * dim + i] = s;
        }
    }

    // Second-order correction from the sphere constraint: subtract the
    // normal multiplier ⟨c, ∇G⟩/M along the identity.
    let g0 = flatten(&nonlinear::grad_gmu(point, mu));
    let lambda_tilde: f64 = c_real.iter().zip(&g0).map(|(x, y)| x * y).sum::<f64>() / mass;
    for i in 0..dim {
        b[i * dim + i] -= lambda_tilde;
    }

    // Orthonormal basis of the tangent space modulo phase: drop the radial
    // direction c and the phase direction ic.
    let inv = 1.0 / mass.sqrt();
    let u1: Vec<f64> = c_real.iter().map(|v| v * inv).collect();
    let mut u2 = vec![0.0f64; dim];
    for k in 0..n {
        u2[2 * k] = -u1[2 * k + 1];
        u2[2 * k + 1] = u1[2 * k];
    }
    let m = dim - 2;
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(m);
    for j in 0..dim {
        if q.len() == m {
            break;
        }
        let mut v = vec![0.0f64; dim];
        v[j] = 1.0;
        for basis in [&u1, &u2] {
            let proj: f64 = basis.iter().zip(&v).map(|(x, y)| x * y).sum();
            for (vi, bi) in v.iter_mut().zip(basis.iter()) {
                *vi -= proj * bi;
            }
        }
        for _ in 0..2 {
            for col in &q {
                let proj: f64 = col.iter().zip(&v).map(|(x, y)| x * y).sum();
                for (vi, ci) in v.iter_mut().zip(col.iter()) {
                    *vi -= proj * ci;
                }
            }
        }
        let nv: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nv > 1e-6 {
            for vi in v.iter_mut() {
                *vi /= nv;
            }
            q.push(v);
        }
    }
    if q.len() != m {
        return Err(CoreError::NoConvergence(
            "tangent basis construction degenerated".into(),
        ));
    }

    // S = Qᵀ (B − λ̃ I) Q.
    let mut w = vec![0.0f64; dim * m];
    for (jc, col) in q.iter().enumerate() {
        for i in 0..dim {
            let mut acc = 0.0;
            for k in 0..dim {
                acc += b[i * dim + k] * col[k];
            }
            w[i * m + jc] = acc;
        }
    }
    let mut s = vec![0.0f64; m * m];
    for (ir, row) in q.iter().enumerate() {
        for jc in 0..m {
            let mut acc = 0.0;
            for k in 0..dim {
                acc += row[k] * w[k * m + jc];
            }
            s[ir * m + jc] = acc;
        }
    }
    let eigenvalues = linalg::symmetric_eigenvalues(&s, m)?;
    let (projected_gradient_norm, stationary) = stationarity(point, mu);
    Ok(RestrictedSpectrum {
        eigenvalues,
        projected_gradient_norm,
        stationary,
    })
}

/// Restricted Hessian spectrum at a point: analytic at the first two
/// eigenmodes (detected up to phase at unit mass), finite differences
/// elsewhere. Non-stationary points are flagged but still diagonalized.
pub fn restricted_hessian_spectrum(point: &CoeffState, mu: f64) -> Result<RestrictedSpectrum> {
    if (point.mass() - 1.0).abs() <= 1e-12 {
        for (k, builder) in [
            (0usize, flat_profile_spectrum as fn(f64, usize) -> Result<Vec<f64>>),
            (1usize, second_mode_spectrum as fn(f64, usize) -> Result<Vec<f64>>),
        ] {
            if point.len() >= 4 && point.get(k).norm_sqr() >= 1.0 - 1e-24 {
                let eigenvalues = builder(mu, point.len())?;
                let (projected_gradient_norm, stationary) = stationarity(point, mu);
                return Ok(RestrictedSpectrum {
                    eigenvalues,
                    projected_gradient_norm,
                    stationary,
                });
            }
        }
    }
    restricted_hessian_spectrum_fd(point, mu)
}

// ---------------------------------------------------------------------------
// Sphere descent engine
// ---------------------------------------------------------------------------

fn build_mask(len: usize, parity: Option<ParityRestriction>) -> Result<Option<Vec<bool>>> {
    match parity {
        None => Ok(None),
        Some(ParityRestriction::Even) => {
            Ok(Some((0..len).map(|k| k % 2 == 0).collect()))
        }
        Some(ParityRestriction::MultiplesOf(k0)) => {
            if k0 == 0 {
                return Err(CoreError::arg("parity stride must be at least one"));
            }
            Ok(Some((0..len).map(|k| k % k0 == 0).collect()))
        }
    }
}

fn apply_mask(c: &mut [Complex64], mask: Option<&[bool]>) {
    if let Some(keep) = mask {
        for (v, &k) in c.iter_mut().zip(keep) {
            if !k {
                *v = Complex64::new(0.0, 0.0);
            }
        }
    }
}

fn seeded_start(len: usize, seed: u64, mask: Option<&[bool]>) -> Result<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c: Vec<Complex64> = (0..len)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    apply_mask(&mut c, mask);
    rescale_to_mass(&mut c, 1.0)?;
    Ok(c)
}

fn rescale_to_mass(c: &mut [Complex64], m0: f64) -> Result<()> {
    let m: f64 = c.iter().map(|v| v.norm_sqr()).sum();
    if m <= 1e-300 {
        return Err(CoreError::InvalidState(
            "iterate collapsed onto the constraint cone tip".into(),
        ));
    }
    let s = (m0 / m).sqrt();
    for v in c.iter_mut() {
        *v *= s;
    }
    Ok(())
}

/// Global phase that rotates the largest coefficient onto the positive real
/// axis; multiplying the state by it fixes the gauge.
fn gauge_phase(c: &[Complex64]) -> Complex64 {
    let mut best = 0usize;
    let mut best_norm = -1.0;
    for (k, v) in c.iter().enumerate() {
        let nv = v.norm_sqr();
        if nv > best_norm {
            best_norm = nv;
            best = k;
        }
    }
    let v = c[best];
    let r = v.norm();
    if r <= 1e-300 {
        Complex64::new(1.0, 0.0)
    } else {
        v.conj() / r
    }
}

struct DescentOutcome {
    coeffs: Vec<Complex64>,
    objective: f64,
    iterations: usize,
    converged: bool,
}

/// Projected gradient descent on the sphere of mass `m0` with BB step
/// proposals, Armijo backtracking, and per-iteration gauge fixing. Accepted
/// steps never increase the objective beyond a few ulps.
fn sphere_descent(
    init: Vec<Complex64>,
    m0: f64,
    mask: Option<&[bool]>,
    tol: f64,
    max_iters: usize,
    f: &dyn Fn(&CoeffState) -> f64,
    grad: &dyn Fn(&CoeffState) -> Vec<Complex64>,
) -> Result<DescentOutcome> {
    let mut c = init;
    apply_mask(&mut c, mask);
    rescale_to_mass(&mut c, m0)?;
    let rot = gauge_phase(&c);
    for v in c.iter_mut() {
        *v *= rot;
    }

    let state = CoeffState::new(c.clone())?;
    let mut fc = f(&state);
    let mut g = grad(&state);
    apply_mask(&mut g, mask);
    let mut gt = project_tangent(&c, &g, m0);
    let mut gt_norm = norm(&gt);
    let mut t = 1.0 / (1.0 + gt_norm);
    let mut iterations = 0usize;
    let mut converged = false;

    for _ in 0..max_iters {
        if gt_norm <= tol {
            converged = true;
            break;
        }
        iterations += 1;

        let gsq = gt_norm * gt_norm;
        let mut t_try = t.clamp(1e-12, 1e6);
        let mut accepted: Option<(Vec<Complex64>, f64)> = None;
        for _ in 0..60 {
            let mut trial: Vec<Complex64> = c
                .iter()
                .zip(&gt)
                .map(|(cv, gv)| cv - t_try * gv)
                .collect();
            apply_mask(&mut trial, mask);
            if rescale_to_mass(&mut trial, m0).is_err() {
                t_try *= 0.5;
                continue;
            }
            let trial_state = CoeffState::new(trial.clone())?;
            let f_new = f(&trial_state);
            let armijo = f_new <= fc - 1e-4 * t_try * gsq;
            // Near stationarity the guaranteed decrease sinks below the
            // floating-point resolution of f; accept flat steps there so the
            // gradient can keep contracting.
            let endgame =
                gt_norm <= 1e-6 && f_new <= fc + 8.0 * f64::EPSILON * (1.0 + fc.abs());
            if armijo || endgame {
                accepted = Some((trial, f_new));
                break;
            }
            t_try *= 0.5;
            if t_try < 1e-14 {
                break;
            }
        }
        let Some((mut c_new, f_new)) = accepted else {
            break;
        };

        let trial_state = CoeffState::new(c_new.clone())?;
        let mut g_new = grad(&trial_state);
        apply_mask(&mut g_new, mask);
        let mut gt_new = project_tangent(&c_new, &g_new, m0);

        // BB1 proposal from the raw (pre-gauge) displacement pair; the
        // scalars are invariant under the common phase applied afterwards.
        let mut ss = 0.0f64;
        let mut sy = 0.0f64;
        for k in 0..c.len() {
            let dc = c_new[k] - c[k];
            let dg = gt_new[k] - gt[k];
            ss += dc.norm_sqr();
            sy += dc.re * dg.re + dc.im * dg.im;
        }
        t = if sy > 1e-30 {
            (ss / sy).clamp(1e-10, 1e6)
        } else {
            (t_try * 2.0).clamp(1e-10, 1e6)
        };

        let rot = gauge_phase(&c_new);
        for v in c_new.iter_mut() {
            *v *= rot;
        }
        for v in gt_new.iter_mut() {
            *v *= rot;
        }

        c = c_new;
        fc = f_new;
        gt = gt_new;
        gt_norm = norm(&gt);
    }
    if gt_norm <= tol {
        converged = true;
    }
    Ok(DescentOutcome {
        coeffs: c,
        objective: fc,
        iterations,
        converged,
    })
}

// ---------------------------------------------------------------------------
// Problem drivers
// ---------------------------------------------------------------------------

fn validate_common(problem: &MinimizationProblem) -> Result<()> {
    if problem.len < 4 {
        return Err(CoreError::arg("need at least four modes"));
    }
    if !(problem.gradient_tol.is_finite() && problem.gradient_tol > 0.0) {
        return Err(CoreError::arg("gradient tolerance must be positive"));
    }
    if !(problem.constraint_tol.is_finite() && problem.constraint_tol > 0.0) {
        return Err(CoreError::arg("constraint tolerance must be positive"));
    }
    if problem.max_iters == 0 {
        return Err(CoreError::arg("iteration budget must be positive"));
    }
    Ok(())
}

fn initial_vector(
    problem: &MinimizationProblem,
    mask: Option<&[bool]>,
    seed_shift: u64,
) -> Result<Vec<Complex64>> {
    match &problem.init {
        InitGuess::Seeded(seed) => seeded_start(problem.len, seed.wrapping_add(seed_shift), mask),
        InitGuess::State(state) => {
            if state.len() != problem.len {
                return Err(CoreError::arg(format!(
                    "initial state has {} modes, problem expects {}",
                    state.len(),
                    problem.len
                )));
            }
            if let Some(keep) = mask {
                for (k, (v, &ok)) in state.coeffs().iter().zip(keep).enumerate() {
                    if !ok && v.norm_sqr() > 0.0 {
                        return Err(CoreError::arg(format!(
                            "initial state breaks the parity restriction at mode {k}"
                        )));
                    }
                }
            }
            let mut c = state.coeffs().to_vec();
            rescale_to_mass(&mut c, 1.0)?;
            Ok(c)
        }
    }
}

/// Solve a [`MinimizationProblem`]. See the module docs for the algorithms.
pub fn minimize(problem: &MinimizationProblem) -> Result<MinimizationResult> {
    validate_common(problem)?;
    let mask = build_mask(problem.len, problem.parity)?;
    match problem.kind {
        ProblemKind::Gmu { mu } => {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(CoreError::arg("the coupling must be positive and finite"));
            }
            let init = initial_vector(problem, mask.as_deref(), 0)?;
            let f = move |s: &CoeffState| g_mu(s, mu);
            let grad = move |s: &CoeffState| nonlinear::grad_gmu(s, mu);
            let run = sphere_descent(
                init,
                1.0,
                mask.as_deref(),
                problem.gradient_tol,
                problem.max_iters,
                &f,
                &grad,
            )?;
            let minimizer = CoeffState::new(run.coeffs)?;
            let residuals = vec![(minimizer.mass() - 1.0).abs()];
            assemble(minimizer, run.objective, mu, residuals, run.iterations, run.converged)
        }
        ProblemKind::PFixed { energy, mass } => {
            if !(mass.is_finite() && mass > 0.0) {
                return Err(CoreError::arg("the target mass must be positive"));
            }
            if !energy.is_finite() {
                return Err(CoreError::arg("the target energy must be finite"));
            }
            let gamma = 8.0 * PI * energy / (mass * mass);
            if !(gamma > 0.0 && gamma < 1.0) {
                return Err(CoreError::Infeasible(format!(
                    "energy ratio 8πH₀/M₀² = {gamma:.6} outside (0, 1)"
                )));
            }
            minimize_p_driver(problem, mask.as_deref(), gamma, energy, mass)
        }
    }
}

/// Convenience wrapper for the fixed-energy problem at default settings.
pub fn minimize_p_fixed(energy: f64, mass: f64, len: usize) -> Result<MinimizationResult> {
    minimize(&MinimizationProblem::p_fixed(energy, mass, len))
}

fn minimize_p_driver(
    problem: &MinimizationProblem,
    mask: Option<&[bool]>,
    gamma: f64,
    energy: f64,
    mass: f64,
) -> Result<MinimizationResult> {
    // The landscape is nonconvex; seeded runs restart a few times and keep
    // the feasible candidate with the smallest degree.
    let attempts: Vec<u64> = match &problem.init {
        InitGuess::Seeded(_) => vec![0, 1, 2],
        InitGuess::State(_) => vec![0],
    };
    let mut best: Option<(bool, f64, DescentOutcome)> = None;
    let mut total_iters = 0usize;
    let mut last_error: Option<CoreError> = None;
    for shift in attempts {
        let init = initial_vector(problem, mask, shift)?;
        let run = match p_fixed_attempt(problem, mask, gamma, init) {
            Ok(run) => run,
            Err(e) => {
                last_error = Some(e);
                continue;
            }
        };
        total_iters += run.iterations;
        let state = CoeffState::new(run.coeffs.clone())?;
        let violation = (8.0 * PI * nonlinear::hamiltonian(&state) - gamma).abs();
        let ok = run.converged && violation <= problem.constraint_tol;
        let degree = state.degree();
        let better = match &best {
            None => true,
            Some((best_ok, best_degree, _)) => match (ok, *best_ok) {
                (true, false) => true,
                (false, true) => false,
                _ => degree < *best_degree,
            },
        };
        if better {
            best = Some((ok, degree, run));
        }
    }
    let Some((_, _, run)) = best else {
        return Err(last_error.unwrap_or_else(|| {
            CoreError::NoConvergence("every fixed-energy start failed".into())
        }));
    };

    // Rescale the unit-mass solution onto the requested sphere.
    let scale = mass.sqrt();
    let coeffs: Vec<Complex64> = run.coeffs.iter().map(|v| v * scale).collect();
    let minimizer = CoeffState::new(coeffs)?;
    let residuals = vec![
        (minimizer.mass() - mass).abs(),
        (nonlinear::hamiltonian(&minimizer) - energy).abs(),
    ];
    let converged = run.converged
        && residuals[1] <= problem.constraint_tol * mass * mass / (8.0 * PI);
    let objective = minimizer.degree();

    // The stationarity equation of this problem matches the combined
    // functional with coupling μ' = −4π μ̂ read off the multiplier fit.
    let multipliers = catalog::fit_multipliers(&minimizer)?;
    let mu_equiv = -4.0 * PI * multipliers.mu;
    let spectrum = restricted_hessian_spectrum(&minimizer, mu_equiv)?;
    let zero_count = zeros::find_zeros(&minimizer, fock::trust_radius(minimizer.len(), 1e-12))?;
    Ok(MinimizationResult {
        minimizer,
        objective,
        constraint_residuals: residuals,
        multipliers,
        hessian_spectrum: spectrum.eigenvalues,
        zero_count_in_trust_radius: zero_count.total,
        iterations: total_iters,
        converged,
    })
}

/// One full fixed-energy solve: a short quadratic-penalty burn-in steers a
/// start toward the energy shell, an exact tangent-Newton projection lands on
/// it, and the KKT polish is a Barzilai–Borwein descent of the degree along
/// the intersection manifold `{M = 1, 8πH = γ}` with a feasibility-restoring
/// retraction after every step.
fn p_fixed_attempt(
    problem: &MinimizationProblem,
    mask: Option<&[bool]>,
    gamma: f64,
    init: Vec<Complex64>,
) -> Result<DescentOutcome> {
    let mut iterations = 0usize;
    let mut current = init;
    for rho in [1e3, 1e5] {
        let f = move |s: &CoeffState| {
            let gap = 8.0 * PI * nonlinear::hamiltonian(s) - gamma;
            s.degree() + rho * gap * gap
        };
        let grad = move |s: &CoeffState| {
            let image = nonlinear::nonlinear(s);
            let gap = 2.0 * PI * re_dot(s.coeffs(), &image) - gamma;
            s.coeffs()
                .iter()
                .enumerate()
                .zip(&image)
                .map(|((k, cv), tv)| 2.0 * k as f64 * cv + rho * 2.0 * gap * 8.0 * PI * tv)
                .collect()
        };
        let run = sphere_descent(
            current,
            1.0,
            mask,
            problem.gradient_tol.max(1e-6),
            problem.max_iters.min(4_000),
            &f,
            &grad,
        )?;
        iterations += run.iterations;
        current = run.coeffs;
    }
    let feasible = project_to_energy_shell(current, gamma, mask)?;
    let mut run = manifold_p_descent(
        feasible,
        gamma,
        mask,
        problem.gradient_tol,
        problem.max_iters,
    )?;
    run.iterations += iterations;
    Ok(run)
}

/// Scaled energy `8πH` together with the interaction image of a coefficient
/// vector (one pair-convolution pass).
fn energy_and_image(c: &[Complex64]) -> Result<(f64, Vec<Complex64>)> {
    let state = CoeffState::new(c.to_vec())?;
    let image = nonlinear::nonlinear(&state);
    Ok((2.0 * PI * re_dot(c, &image), image))
}

/// Move a unit-mass vector onto the shell `8πH = γ` by Newton steps along
/// the sphere-tangent part of the energy gradient, falling back to a
/// bisection blend toward a basis state when the local slope degenerates.
fn project_to_energy_shell(
    mut c: Vec<Complex64>,
    gamma: f64,
    mask: Option<&[bool]>,
) -> Result<Vec<Complex64>> {
    rescale_to_mass(&mut c, 1.0)?;
    for round in 0..2 {
        // Newton along the shell normal inside the sphere tangent space.
        for _ in 0..40 {
            let (e8, image) = energy_and_image(&c)?;
            let dev = e8 - gamma;
            if dev.abs() <= 1e-13 {
                return Ok(c);
            }
            let mut grad_e: Vec<Complex64> = image.iter().map(|t| 8.0 * PI * t).collect();
            apply_mask(&mut grad_e, mask);
            let et = project_tangent(&c, &grad_e, 1.0);
            let slope = re_dot(&grad_e, &et);
            if slope.abs() < 1e-10 {
                break;
            }
            let step = -dev / slope;
            for (cv, ev) in c.iter_mut().zip(&et) {
                *cv += step * ev;
            }
            apply_mask(&mut c, mask);
            rescale_to_mass(&mut c, 1.0)?;
        }
        if round == 1 {
            break;
        }
        // Blend toward a basis state whose shell value straddles the target:
        // the flat profile raises the energy toward 1, the highest retained
        // mode lowers it toward zero.
        let (e8, _) = energy_and_image(&c)?;
        let dev = e8 - gamma;
        if dev.abs() <= 1e-13 {
            return Ok(c);
        }
        let target_index = if dev < 0.0 {
            0
        } else {
            (0..c.len())
                .rev()
                .find(|&k| mask.map_or(true, |keep| keep[k]))
                .unwrap_or(0)
        };
        let blend_dev = |s: f64, c: &[Complex64]| -> Result<(Vec<Complex64>, f64)> {
            let mut v: Vec<Complex64> = c.iter().map(|cv| (1.0 - s) * cv).collect();
            v[target_index] += Complex64::new(s, 0.0);
            apply_mask(&mut v, mask);
            rescale_to_mass(&mut v, 1.0)?;
            let (e8, _) = energy_and_image(&v)?;
            Ok((v, e8 - gamma))
        };
        let (_, far_dev) = blend_dev(1.0, &c)?;
        if far_dev * dev >= 0.0 {
            return Err(CoreError::NoConvergence(
                "cannot reach the requested energy shell from this start".into(),
            ));
        }
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let (_, mid_dev) = blend_dev(mid, &c)?;
            if mid_dev * dev > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (blended, _) = blend_dev(0.5 * (lo + hi), &c)?;
        c = blended;
    }
    let (e8, _) = energy_and_image(&c)?;
    if (e8 - gamma).abs() <= 1e-11 {
        Ok(c)
    } else {
        Err(CoreError::NoConvergence(
            "energy-shell projection stalled".into(),
        ))
    }
}

/// Restore feasibility of a trial vector: exact mass rescale, then tangent
/// Newton onto the energy shell. Returns the corrected vector with its
/// interaction image, or `None` when the correction does not contract.
fn retract_feasible(
    mut c: Vec<Complex64>,
    gamma: f64,
    mask: Option<&[bool]>,
) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
    rescale_to_mass(&mut c, 1.0).ok()?;
    for _ in 0..8 {
        let (e8, image) = energy_and_image(&c).ok()?;
        let dev = e8 - gamma;
        if dev.abs() <= 1e-12 {
            return Some((c, image));
        }
        let mut grad_e: Vec<Complex64> = image.iter().map(|t| 8.0 * PI * t).collect();
        apply_mask(&mut grad_e, mask);
        let et = project_tangent(&c, &grad_e, 1.0);
        let slope = re_dot(&grad_e, &et);
        if slope.abs() < 1e-12 {
            return None;
        }
        let step = -dev / slope;
        for (cv, ev) in c.iter_mut().zip(&et) {
            *cv += step * ev;
        }
        apply_mask(&mut c, mask);
        rescale_to_mass(&mut c, 1.0).ok()?;
    }
    None
}

/// Degree gradient projected onto the tangent space of the intersection
/// manifold `{M = 1, 8πH = γ}` at a feasible point.
fn manifold_degree_gradient(
    c: &[Complex64],
    image: &[Complex64],
    mask: Option<&[bool]>,
) -> Vec<Complex64> {
    let mut gp: Vec<Complex64> = c
        .iter()
        .enumerate()
        .map(|(k, v)| 2.0 * k as f64 * v)
        .collect();
    apply_mask(&mut gp, mask);
    let mut ge: Vec<Complex64> = image.iter().map(|t| 8.0 * PI * t).collect();
    apply_mask(&mut ge, mask);
    let mut gt = project_tangent(c, &gp, 1.0);
    let et = project_tangent(c, &ge, 1.0);
    let ensq = re_dot(&et, &et);
    if ensq > 1e-20 {
        let coupling = re_dot(&gt, &et) / ensq;
        for (gv, ev) in gt.iter_mut().zip(&et) {
            *gv -= coupling * ev;
        }
    }
    gt
}

/// Barzilai–Borwein descent of the degree along the feasible manifold with
/// Armijo backtracking; every accepted iterate is feasible to `1e-12`.
fn manifold_p_descent(
    init: Vec<Complex64>,
    gamma: f64,
    mask: Option<&[bool]>,
    tol: f64,
    max_iters: usize,
) -> Result<DescentOutcome> {
    let mut c = init;
    let (_, image) = energy_and_image(&c)?;
    let mut fc = CoeffState::new(c.clone())?.degree();
    let mut gt = manifold_degree_gradient(&c, &image, mask);
    let mut gt_norm = norm(&gt);
    let mut t = 1.0 / (1.0 + gt_norm);
    let mut iterations = 0usize;
    let mut converged = false;

    for _ in 0..max_iters {
        if gt_norm <= tol {
            converged = true;
            break;
        }
        iterations += 1;
        let gsq = gt_norm * gt_norm;
        let mut t_try = t.clamp(1e-12, 1e6);
        let mut accepted: Option<(Vec<Complex64>, Vec<Complex64>, f64)> = None;
        for _ in 0..60 {
            let trial: Vec<Complex64> = c
                .iter()
                .zip(&gt)
                .map(|(cv, gv)| cv - t_try * gv)
                .collect();
            if let Some((feasible, trial_image)) = retract_feasible(trial, gamma, mask) {
                let f_new: f64 = feasible
                    .iter()
                    .enumerate()
                    .map(|(k, v)| k as f64 * v.norm_sqr())
                    .sum();
                let armijo = f_new <= fc - 1e-4 * t_try * gsq;
                let endgame =
                    gt_norm <= 1e-6 && f_new <= fc + 8.0 * f64::EPSILON * (1.0 + fc.abs());
                if armijo || endgame {
                    accepted = Some((feasible, trial_image, f_new));
                    break;
                }
            }
            t_try *= 0.5;
            if t_try < 1e-14 {
                break;
            }
        }
        let Some((c_new, image_new, f_new)) = accepted else {
            break;
        };
        let gt_new = manifold_degree_gradient(&c_new, &image_new, mask);
        let mut ss = 0.0f64;
        let mut sy = 0.0f64;
        for k in 0..c.len() {
            let dc = c_new[k] - c[k];
            let dg = gt_new[k] - gt[k];
            ss += dc.norm_sqr();
            sy += dc.re * dg.re + dc.im * dg.im;
        }
        t = if sy > 1e-30 {
            (ss / sy).clamp(1e-10, 1e6)
        } else {
            (t_try * 2.0).clamp(1e-10, 1e6)
        };
        c = c_new;
        fc = f_new;
        gt = gt_new;
        gt_norm = norm(&gt);
    }
    if gt_norm <= tol {
        converged = true;
    }
    let rot = gauge_phase(&c);
    for v in c.iter_mut() {
        *v *= rot;
    }
    Ok(DescentOutcome {
        coeffs: c,
        objective: fc,
        iterations,
        converged,
    })
}

fn assemble(
    minimizer: CoeffState,
    objective: f64,
    hessian_mu: f64,
    constraint_residuals: Vec<f64>,
    iterations: usize,
    converged: bool,
) -> Result<MinimizationResult> {
    let multipliers = catalog::fit_multipliers(&minimizer)?;
    let spectrum = restricted_hessian_spectrum(&minimizer, hessian_mu)?;
    let report = zeros::find_zeros(&minimizer, fock::trust_radius(minimizer.len(), 1e-12))?;
    Ok(MinimizationResult {
        minimizer,
        objective,
        constraint_residuals,
        multipliers,
        hessian_spectrum: spectrum.eigenvalues,
        zero_count_in_trust_radius: report.total,
        iterations,
        converged,
    })
}

/// Run `starts` independent seeded solves of a combined-functional problem
/// (in parallel when enabled) and return every result in seed order.
pub fn multistart_gmu(
    problem: &MinimizationProblem,
    starts: usize,
    base_seed: u64,
) -> Result<Vec<MinimizationResult>> {
    if !matches!(problem.kind, ProblemKind::Gmu { .. }) {
        return Err(CoreError::arg(
            "multistart applies to the combined-functional problem",
        ));
    }
    if starts == 0 {
        return Err(CoreError::arg("need at least one start"));
    }
    let problems: Vec<MinimizationProblem> = (0..starts)
        .map(|i| {
            let mut p = problem.clone();
            p.init = InitGuess::Seeded(base_seed.wrapping_add(i as u64));
            p
        })
        .collect();
    par::maybe_par_map(problems, |p| minimize(&p))
        .into_iter()
        .collect()
}

// ---------------------------------------------------------------------------
// Thresholds and the physical rescaling
// ---------------------------------------------------------------------------

/// One row of the coupling sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub mu: f64,
    /// Objective reached by a single seeded descent at this coupling.
    pub objective: f64,
    /// Minimal restricted eigenvalue at the flat profile.
    pub min_eig_flat: f64,
    /// Minimal restricted eigenvalue at the second mode.
    pub min_eig_second: f64,
}

/// Bisection report for the two spectral thresholds plus a coupling sweep.
#[derive(Debug, Clone)]
pub struct ThresholdReport {
    /// Coupling where the flat profile's lowest curvature changes sign (1/2).
    pub flat_threshold: f64,
    /// Coupling where the second mode's lowest curvature changes sign (5/32).
    pub second_threshold: f64,
    pub sweep: Vec<SweepRow>,
}

fn min_eig(spectrum: Result<Vec<f64>>) -> Result<f64> {
    Ok(spectrum?.into_iter().fold(f64::INFINITY, f64::min))
}

fn bisect_sign_change(
    f: &dyn Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
) -> Result<f64> {
    let flo = f(lo)?;
    let fhi = f(hi)?;
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(CoreError::NoConvergence(
            "bracket does not straddle a sign change".into(),
        ));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Localize the two curvature thresholds by bisection on the analytic
/// restricted spectra and sweep the coupling with single seeded descents.
pub fn verify_thresholds(len: usize, seed: u64) -> Result<ThresholdReport> {
    if len < 8 {
        return Err(CoreError::arg("need at least eight modes for thresholds"));
    }
    let flat = |mu: f64| min_eig(flat_profile_spectrum(mu, len));
    let second = |mu: f64| min_eig(second_mode_spectrum(mu, len));
    let flat_threshold = bisect_sign_change(&flat, 0.3, 0.7)?;
    let second_threshold = bisect_sign_change(&second, 0.08, 0.3)?;

    let mut sweep = Vec::new();
    for k in 1..=20 {
        let mu = 0.05 * k as f64;
        let mut problem = MinimizationProblem::gmu(mu, len.min(32));
        problem.init = InitGuess::Seeded(seed.wrapping_add(k as u64));
        problem.gradient_tol = 1e-8;
        problem.max_iters = 30_000;
        let run = minimize(&problem)?;
        sweep.push(SweepRow {
            mu,
            objective: run.objective,
            min_eig_flat: flat(mu)?,
            min_eig_second: second(mu)?,
        });
    }
    Ok(ThresholdReport {
        flat_threshold,
        second_threshold,
        sweep,
    })
}

/// Displaced-vortex parameter matching an energy ratio `γ ∈ [1/2, 1)`:
/// solves `(1 + 4b² + 2b⁴)/(2(1+b²)²) = γ`, i.e. `(1+b²)² = 1/(2(1−γ))`.
pub fn psi_b_parameter_for(gamma: f64) -> Result<f64> {
    if !(gamma.is_finite() && (0.5..1.0).contains(&gamma)) {
        return Err(CoreError::arg(format!(
            "energy ratio {gamma} outside the vortex window [1/2, 1)"
        )));
    }
    let s = 1.0 / (2.0 * (1.0 - gamma)).sqrt();
    Ok((s - 1.0).max(0.0).sqrt())
}

/// Dimensionless coupling and energy mapping derived from the physical
/// parameters of the rotating-gas model.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalScaling {
    /// Effective coupling `μ = 4πh²/(N_a Ω²)`.
    pub mu: f64,
    /// Multiplier of `G_μ` in the energy: `N_a Ω²/(4πh)`.
    pub energy_scale: f64,
    /// Additive offset `h` (per unit mass).
    pub energy_offset: f64,
    /// Whether `μ < κ₀` (spread-minimizer regime).
    pub below_kappa0: bool,
    /// Whether `μ > κ₁` (flat-profile regime).
    pub above_kappa1: bool,
}

/// Convert the physical parameters `(h, N_a, Ω²)` into the dimensionless
/// coupling and the affine energy relation
/// `E(v) = (N_a Ω²/(4πh))·G_μ(u) + h·M(u)` under `v(w) = h^{-1/2} u(w/√h)`.
pub fn convert_physical(h: f64, na: f64, omega_sq: f64) -> Result<PhysicalScaling> {
    if !(h.is_finite() && h > 0.0 && h < 1.0) {
        return Err(CoreError::arg("the semiclassical parameter must lie in (0, 1)"));
    }
    if !(na.is_finite() && na > 0.0) {
        return Err(CoreError::arg("the particle-interaction product must be positive"));
    }
    if !(omega_sq.is_finite() && omega_sq > 0.0) {
        return Err(CoreError::arg("the squared rotation rate must be positive"));
    }
    let mu = 4.0 * PI * h * h / (na * omega_sq);
    Ok(PhysicalScaling {
        mu,
        energy_scale: na * omega_sq / (4.0 * PI * h),
        energy_offset: h,
        below_kappa0: mu < KAPPA_0,
        above_kappa1: mu > kappa_1(),
    })
}
