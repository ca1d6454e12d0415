//! Linearized stability around the pure modes, nonlinear orbital-stability
//! experiments, and Newton continuation of the stationary branches that
//! bifurcate from the flat profile.
//!
//! Writing `c = e^{-iω_n t}(e_n + d)` and keeping first order in `d`, the
//! coefficient flow couples each mode `k ≤ 2n` to the conjugate of its
//! mirror `2n−k`:
//!
//! ```text
//!   i d_k' = (α_{n,k} − ω_n) d_k + β_{n,k} conj(d_{2n−k}),
//!   α_{n,k} = (n+k)!/(π n! k! 2^{n+k}),
//!   β_{n,k} = (2n)!/(π n! √(k!(2n−k)!) 2^{2n+1}),
//! ```
//!
//! while modes above `2n` evolve by pure phase (neutrally stable). The pair
//! `(d_k, conj(d_{2n−k}))` has eigenvalues `−i(a−d)/2 ± √Δ/2` with
//! `a = α_{n,k} − ω_n`, `d = α_{n,2n−k} − ω_n` and discriminant
//! `Δ_{n,k} = 4β² − (a+d)²`; a positive discriminant is an exponentially
//! growing pair. The tables are assembled in exact big-integer rational
//! arithmetic (everything is a rational multiple of `1/π` or `1/π²`), so
//! signs and the symmetry `Δ_{n,k} = Δ_{n,2n−k}` are exact: the phase pair
//! `k = n` has `Δ = 0` identically, `k = n−1` obeys `a·d = β²` forcing
//! `Δ = −(a−d)² ≤ 0`, and `k = n−2` is positive from `n = 2` on — e.g.
//! `Δ_{2,0} = 47/(4096π²)`. The flat profile's single self-coupled mode is
//! a defective (Jordan) pair with `Δ = 0`: linear-in-time growth at most,
//! and none of it visible to the phase-quotiented orbit distance.
//!
//! The self-coupling table is cross-checked in the test suite against a
//! finite-difference linearization of the nonlinear map itself; note that
//! `α_{n,n} = 2ω_n` (twice the mode frequency), which is what pins the
//! phase direction as exactly neutral and the magnetic-translation pair at
//! `n = 1` as marginally stable.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{make_psi_b, mode_eigenvalue};
use crate::dynamics::{step, IntegratorConfig};
use crate::error::{CoreError, Result};
use crate::fock::{max_rotation_overlap, CoeffState};
use crate::linalg::{lu_solve, ridge_least_squares};
use crate::nonlinear::nonlinear;
use crate::par::maybe_par_map;
use crate::special::ln_factorial;
use crate::Complex64;

// ---------------------------------------------------------------------------
// Exact rational tables
// ---------------------------------------------------------------------------

fn big_factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn pow2(e: u64) -> BigInt {
    BigInt::one() << e
}

/// `π·α_{n,k}` as an exact rational.
fn pi_alpha(n: u64, k: u64) -> BigRational {
    BigRational::new(
        big_factorial(n + k),
        big_factorial(n) * big_factorial(k) * pow2(n + k),
    )
}

/// `π·ω_n` as an exact rational.
fn pi_omega(n: u64) -> BigRational {
    BigRational::new(
        big_factorial(2 * n),
        big_factorial(n) * big_factorial(n) * pow2(2 * n + 1),
    )
}

/// `π²·β²_{n,k}` as an exact rational.
fn pi2_beta_sq(n: u64, k: u64) -> BigRational {
    let f2n = big_factorial(2 * n);
    BigRational::new(
        &f2n * &f2n,
        big_factorial(n)
            * big_factorial(n)
            * big_factorial(k)
            * big_factorial(2 * n - k)
            * pow2(4 * n + 2),
    )
}

/// `π²·Δ_{n,k}` as an exact rational.
fn pi2_delta(n: u64, k: u64) -> BigRational {
    let trace = pi_alpha(n, k) + pi_alpha(n, 2 * n - k)
        - BigRational::from_integer(BigInt::from(2)) * pi_omega(n);
    BigRational::from_integer(BigInt::from(4)) * pi2_beta_sq(n, k) - &trace * &trace
}

/// Round an exact rational to the nearest double, falling back to a
/// log-space evaluation when numerator or denominator overflow `f64`.
fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let numer = r.numer().to_f64();
    let denom = r.denom().to_f64();
    match (numer, denom) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() && b != 0.0 => a / b,
        _ => {
            let ln_big = |x: &BigInt| -> f64 {
                let bits = x.bits();
                if bits <= 52 {
                    x.abs().to_f64().unwrap().ln()
                } else {
                    let shift = bits - 52;
                    let top: BigInt = x.abs() >> shift;
                    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
                }
            };
            let sign = if r.numer().is_negative() { -1.0 } else { 1.0 };
            sign * (ln_big(r.numer()) - ln_big(r.denom())).exp()
        }
    }
}

/// Self-coupling coefficient `α_{n,k} = (n+k)!/(π n! k! 2^{n+k})` of the
/// linearized flow around the n-th mode (defined for every `k ≥ 0`).
pub fn coupling_alpha(n: usize, k: usize) -> f64 {
    rational_to_f64(&pi_alpha(n as u64, k as u64)) / PI
}

/// Conjugate-coupling coefficient
/// `β_{n,k} = (2n)!/(π n! √(k!(2n−k)!) 2^{2n+1})` of the pair `(k, 2n−k)`.
///
/// # Panics
/// Panics with an argument error if `k > 2n` (no conjugate partner).
pub fn coupling_beta(n: usize, k: usize) -> f64 {
    assert!(k <= 2 * n, "argument error: coupling_beta needs k <= 2n, got k={k}, n={n}");
    rational_to_f64(&pi2_beta_sq(n as u64, k as u64)).sqrt() / PI
}

/// Discriminant `Δ_{n,k} = 4β²_{n,k} − (α_{n,k} + α_{n,2n−k} − 2ω_n)²` of
/// the coupled pair; positive means the pair grows exponentially. Evaluated
/// through the exact rational `π²Δ`, so the sign and the mirror symmetry
/// `Δ_{n,k} = Δ_{n,2n−k}` are exact.
///
/// # Panics
/// Panics with an argument error if `k > 2n`.
pub fn discriminant(n: usize, k: usize) -> f64 {
    assert!(k <= 2 * n, "argument error: discriminant needs k <= 2n, got k={k}, n={n}");
    let (k, n) = (k as u64, n as u64);
    // Evaluate at the mirrored index with the smaller k so both members of a
    // pair share one rounding path bit-for-bit.
    let kk = k.min(2 * n - k);
    rational_to_f64(&pi2_delta(n, kk)) / (PI * PI)
}

// ---------------------------------------------------------------------------
// Linearization report
// ---------------------------------------------------------------------------

/// One row of the linearization table around the n-th mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRow {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    /// `√Δ/2` when `Δ > 0`, zero otherwise.
    pub growth_rate: f64,
}

/// Linearized-stability summary around the n-th mode: the coupled table for
/// `k ≤ min(2n, k_max)` plus the list of exponentially growing pairs. Every
/// mode above `neutral_above` is decoupled and evolves by pure phase.
#[derive(Debug, Clone)]
pub struct LinearizationReport {
    pub n: usize,
    pub omega_n: f64,
    pub rows: Vec<ModeRow>,
    pub unstable_modes: Vec<usize>,
    pub neutral_above: usize,
}

/// Tabulate the linearization around the n-th mode for `0 ≤ k ≤ min(2n, k_max)`.
///
/// Requires `k_max ≥ 2n` so the window covers every coupled pair. The
/// positivity pattern is enforced on the way out: `Δ_{n,n−2} > 0` for
/// `n ≥ 2` and no positive discriminant at all for `n ∈ {0, 1}`.
pub fn linearize_phi_n(n: usize, k_max: usize) -> Result<LinearizationReport> {
    if k_max < 2 * n {
        return Err(CoreError::arg(format!(
            "window k_max={k_max} must cover every coupled pair (need >= {})",
            2 * n
        )));
    }
    let top = (2 * n).min(k_max);
    let mut rows = Vec::with_capacity(top + 1);
    let mut unstable = Vec::new();
    for k in 0..=top {
        let delta_exact = pi2_delta(n as u64, (k as u64).min((2 * n - k) as u64));
        let delta = discriminant(n, k);
        let positive = delta_exact.is_positive();
        if positive {
            unstable.push(k);
        }
        rows.push(ModeRow {
            k,
            alpha: coupling_alpha(n, k),
            beta: coupling_beta(n, k),
            delta,
            growth_rate: if positive { delta.sqrt() / 2.0 } else { 0.0 },
        });
    }
    if n >= 2 && !unstable.contains(&(n - 2)) {
        return Err(CoreError::InvalidState(format!(
            "expected an exponentially growing pair at k = n-2 = {}",
            n - 2
        )));
    }
    if n <= 1 && !unstable.is_empty() {
        return Err(CoreError::InvalidState(format!(
            "mode n={n} should have no growing pair, found {unstable:?}"
        )));
    }
    Ok(LinearizationReport {
        n,
        omega_n: mode_eigenvalue(n),
        rows,
        unstable_modes: unstable,
        neutral_above: 2 * n,
    })
}

// ---------------------------------------------------------------------------
// Unstable eigendirections
// ---------------------------------------------------------------------------

/// Unit-mass perturbation along the fastest-growing eigenvector of the
/// linearization around the n-th mode, together with its growth rate.
#[derive(Debug, Clone)]
pub struct UnstableDirection {
    pub perturbation: CoeffState,
    /// Real part of the growing eigenvalue, `√Δ/2`.
    pub rate: f64,
    /// Index `k` of the coupled pair `(k, 2n−k)` the vector lives on.
    pub mode: usize,
}

/// Fastest-growing eigendirection of the linearization around the n-th
/// mode. Scans every pair for the largest discriminant (the scan always
/// lands on `k = n−2` for the modes covered here, but guards against a
/// larger discriminant elsewhere) and returns the eigenvector of
///
/// ```text
///   x' = −i(a x + β y),  y' = +i(d y + β x)
/// ```
///
/// for `(x, y) = (d_k, conj(d_{2n−k}))` at eigenvalue `σ = −i(a−d)/2 + √Δ/2`.
///
/// Errors for `n < 2` (no growing pair exists) and for arrays too short to
/// hold the pair.
pub fn unstable_direction(n: usize, len: usize) -> Result<UnstableDirection> {
    if n < 2 {
        return Err(CoreError::InvalidState(format!(
            "mode n={n} has no exponentially growing pair"
        )));
    }
    if len <= 2 * n {
        return Err(CoreError::arg(format!(
            "need len > 2n = {} to hold the coupled pair, got {len}",
            2 * n
        )));
    }
    let mut best_k = n - 2;
    let mut best = pi2_delta(n as u64, (n - 2) as u64);
    for k in 0..=n {
        let d = pi2_delta(n as u64, k as u64);
        if d > best {
            best = d;
            best_k = k;
        }
    }
    if !best.is_positive() {
        return Err(CoreError::InvalidState(format!(
            "no positive discriminant around mode n={n}"
        )));
    }
    let k = best_k;
    let m = 2 * n - k;
    let omega = mode_eigenvalue(n);
    let a = coupling_alpha(n, k) - omega;
    let d = coupling_alpha(n, m) - omega;
    let beta = coupling_beta(n, k);
    let rate = discriminant(n, k).sqrt() / 2.0;
    let sigma = Complex64::new(rate, -(a - d) / 2.0);
    // Row one of (L − σ)v = 0 with x = iβ gives y = −(ia + σ).
    let x = Complex64::new(0.0, beta);
    let y = -(Complex64::new(0.0, a) + sigma);
    let norm = (x.norm_sqr() + y.norm_sqr()).sqrt();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
    coeffs[k] = x / norm;
    coeffs[m] = (y / norm).conj();
    Ok(UnstableDirection {
        perturbation: CoeffState::new(coeffs)?,
        rate,
        mode: k,
    })
}

// ---------------------------------------------------------------------------
// Orbit distances
// ---------------------------------------------------------------------------

/// Distance from `u` to the phase orbit `{e^{iθ} v}`: the minimum over θ is
/// analytic, `√(M_u + M_v − 2|⟨u, v⟩|)`.
pub fn orbit_distance_phase(u: &CoeffState, reference: &CoeffState) -> f64 {
    let overlap: Complex64 = u
        .coeffs()
        .iter()
        .zip(reference.coeffs())
        .map(|(a, b)| a * b.conj())
        .sum();
    (u.mass() + reference.mass() - 2.0 * overlap.norm()).max(0.0).sqrt()
}

/// Distance from `u` to the phase-and-rotation orbit `{e^{iθ} R_φ v}`;
/// phase is quotiented analytically, rotation by golden-section search.
pub fn orbit_distance_phase_rotation(u: &CoeffState, reference: &CoeffState) -> f64 {
    let overlap = max_rotation_overlap(u, reference);
    (u.mass() + reference.mass() - 2.0 * overlap).max(0.0).sqrt()
}

// ---------------------------------------------------------------------------
// Nonlinear orbital-stability experiments
// ---------------------------------------------------------------------------

/// Which orbit the experiment perturbs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExperimentTarget {
    /// The n-th pure mode.
    Mode(usize),
    /// The displaced-vortex member with parameter `b ≥ 0`.
    PsiB(f64),
}

/// Settings for one orbital-stability experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub target: ExperimentTarget,
    /// Perturbation size, in `(0, 1e-3]`.
    pub eps: f64,
    pub t_final: f64,
    pub len: usize,
    pub dt: f64,
    /// Seeds the random tangent perturbation used for the stable targets.
    pub seed: u64,
    /// Record the orbit distance every this many steps.
    pub sample_stride: usize,
}

impl ExperimentConfig {
    /// Experiment with the default resolution: RK4 at `dt = 5e-3`, sampling
    /// every 0.1 time units, truncation 16+ modes for pure modes and 48 for
    /// the displaced vortex.
    pub fn new(target: ExperimentTarget, eps: f64, t_final: f64) -> Result<Self> {
        let cfg = ExperimentConfig {
            target,
            eps,
            t_final,
            len: match target {
                ExperimentTarget::Mode(n) => (4 * n + 8).max(16),
                ExperimentTarget::PsiB(_) => 48,
            },
            dt: 5e-3,
            seed: 0x5EED_5EED,
            sample_stride: 20,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= 1e-3) {
            return Err(CoreError::arg(format!(
                "perturbation size {} outside (0, 1e-3]",
                self.eps
            )));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(CoreError::arg("experiment horizon must be positive"));
        }
        if !(self.dt.is_finite() && self.dt > 0.0 && self.dt <= 0.1) {
            return Err(CoreError::arg(format!("step size {} outside (0, 0.1]", self.dt)));
        }
        if self.sample_stride == 0 {
            return Err(CoreError::arg("sample stride must be at least 1"));
        }
        match self.target {
            ExperimentTarget::Mode(n) => {
                if self.len < (2 * n + 2).max(8) {
                    return Err(CoreError::arg(format!(
                        "need at least {} modes around mode {n}, got {}",
                        (2 * n + 2).max(8),
                        self.len
                    )));
                }
            }
            ExperimentTarget::PsiB(b) => {
                if !(b.is_finite() && b >= 0.0) {
                    return Err(CoreError::arg(format!("vortex parameter {b} must be >= 0")));
                }
                if self.len < 16 {
                    return Err(CoreError::arg("need at least 16 modes for the vortex"));
                }
            }
        }
        Ok(())
    }
}

/// Distance trace of one perturbed orbit.
#[derive(Debug, Clone)]
pub struct GrowthReport {
    pub target: ExperimentTarget,
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub initial_distance: f64,
    pub max_distance: f64,
    /// `max_distance / √eps` — the constant of the stability bound.
    pub bound_constant: f64,
    /// Least-squares slope of `ln distance` over the middle of the run;
    /// present only when the run was seeded along a growing eigendirection.
    pub fitted_rate: Option<f64>,
    /// `√Δ/2` of the seeded pair, when one exists.
    pub predicted_rate: Option<f64>,
}

/// Integrate a perturbed orbit and trace its distance to the target orbit.
///
/// Targets with a growing pair (`Mode(n)`, `n ≥ 2`) are seeded along the
/// fastest eigendirection and the report carries a fitted exponential rate
/// to compare against `√Δ/2`; the stable targets are seeded with a random
/// tangent draw and the report's `bound_constant` measures the excursion
/// against the `C√eps` stability bound.
pub fn nonlinear_instability_experiment(cfg: &ExperimentConfig) -> Result<GrowthReport> {
    cfg.validate()?;
    let len = cfg.len;
    let (reference, seeded): (CoeffState, Option<UnstableDirection>) = match cfg.target {
        ExperimentTarget::Mode(n) => {
            let reference = CoeffState::basis(n, len)?;
            if n >= 2 {
                (reference, Some(unstable_direction(n, len)?))
            } else {
                (reference, None)
            }
        }
        ExperimentTarget::PsiB(b) => (make_psi_b(b, len)?.state, None),
    };
    let perturbation = match &seeded {
        Some(dir) => dir.perturbation.clone(),
        None => random_tangent(&reference, cfg.seed)?,
    };

    let mut c: Vec<Complex64> = reference
        .coeffs()
        .iter()
        .zip(perturbation.coeffs())
        .map(|(r, p)| r + cfg.eps * p)
        .collect();
    let mut state = CoeffState::new(std::mem::take(&mut c))?;

    let distance = |s: &CoeffState| -> f64 {
        match cfg.target {
            ExperimentTarget::Mode(_) => orbit_distance_phase(s, &reference),
            ExperimentTarget::PsiB(_) => orbit_distance_phase_rotation(s, &reference),
        }
    };

    let integrator = IntegratorConfig::rk4(cfg.dt)?;
    let multipliers = vec![0.0; len];
    let steps = (cfg.t_final / cfg.dt).ceil() as usize;
    let mut times = Vec::with_capacity(steps / cfg.sample_stride + 2);
    let mut distances = Vec::with_capacity(times.capacity());
    times.push(0.0);
    distances.push(distance(&state));
    for i in 1..=steps {
        state = step(&state, &integrator, &multipliers)?;
        if i % cfg.sample_stride == 0 || i == steps {
            times.push(i as f64 * cfg.dt);
            distances.push(distance(&state));
        }
    }

    let initial_distance = distances[0];
    let max_distance = distances.iter().cloned().fold(0.0, f64::max);
    let fitted_rate = seeded.as_ref().map(|_| {
        let t_end = *times.last().unwrap();
        let window: Vec<(f64, f64)> = times
            .iter()
            .zip(&distances)
            .filter(|(t, d)| **t >= 0.05 * t_end && **t <= 0.95 * t_end && **d > 0.0)
            .map(|(t, d)| (*t, d.ln()))
            .collect();
        ls_slope(&window)
    });
    Ok(GrowthReport {
        target: cfg.target,
        times,
        distances,
        initial_distance,
        max_distance,
        bound_constant: max_distance / cfg.eps.sqrt(),
        fitted_rate,
        predicted_rate: seeded.map(|dir| dir.rate),
    })
}

/// Run a batch of experiments, in parallel when the `parallel` feature is
/// on; outputs are identical either way and keep the input order.
pub fn run_experiments(cfgs: &[ExperimentConfig]) -> Vec<Result<GrowthReport>> {
    maybe_par_map(cfgs.to_vec(), |cfg| nonlinear_instability_experiment(&cfg))
}

/// Seeded unit-norm draw tangent to the mass sphere at `reference`.
fn random_tangent(reference: &CoeffState, seed: u64) -> Result<CoeffState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = reference.len();
    let mut p: Vec<Complex64> = (0..len)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let mass = reference.mass();
    let inner: Complex64 = reference
        .coeffs()
        .iter()
        .zip(&p)
        .map(|(r, q)| q * r.conj())
        .sum();
    let along = inner.re / mass;
    for (q, r) in p.iter_mut().zip(reference.coeffs()) {
        *q -= along * r;
    }
    let norm: f64 = p.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-14 {
        return Err(CoreError::InvalidState("degenerate tangent draw".into()));
    }
    for q in &mut p {
        *q /= norm;
    }
    CoeffState::new(p)
}

/// Least-squares slope of `y` against `t`.
fn ls_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for &(t, y) in points {
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    let denom = n * stt - st * st;
    if denom.abs() < 1e-300 {
        return 0.0;
    }
    (n * sty - st * sy) / denom
}

// ---------------------------------------------------------------------------
// Branch continuation
// ---------------------------------------------------------------------------

/// One converged point of a bifurcated stationary branch: a real state
/// supported on the lattice `k₀ℤ` solving `4u + bΛu = 8πT(u)` with the
/// amplitude of the seeded mode pinned to `s`.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub s: f64,
    pub state: CoeffState,
    /// Multiplier of the identity; fixed to 4 along these branches.
    pub a: f64,
    /// Multiplier of the degree operator, found by Newton.
    pub b: f64,
    /// `‖8πT(u) + bΛu − 4u‖₂` measured in a doubled array.
    pub residual: f64,
    /// Fitted prefactor of the coefficient envelope `|c_k| ≤ K εᵏ/√(k!)`.
    pub envelope_k: f64,
    /// Fitted base of the envelope; shrinks to 0 toward the branch root.
    pub envelope_eps: f64,
}

/// Coupling at which the k₀-th diagonal of the linearized stationary
/// equation at the flat profile crosses zero: `b(k₀) = (4 − 8/2^{k₀})/k₀`.
/// This is the branch's multiplier in the `s → 0⁺` limit.
pub fn bifurcation_coupling(k0: usize) -> f64 {
    assert!(k0 >= 1, "argument error: lattice stride must be at least 1");
    (4.0 - 8.0 / (1u64 << k0) as f64) / k0 as f64
}

/// Continue the stationary branch rooted at the flat profile along the
/// lattice `k₀ℤ`, stepping the seeded amplitude `s` from `ds` to `s_max`.
///
/// On the real lattice subspace the problem `F(w, b) = 8πT(φ₀+w) +
/// bΛ(φ₀+w) − 4(φ₀+w) = 0` with the constraint `w_{k₀} = s` is square in
/// the remaining lattice amplitudes and `b`; each step solves it by Newton
/// iteration with a central finite-difference Jacobian, warm-started from
/// the previous point. Newton divergence truncates the branch at the last
/// converged point (an error if the first point already fails).
///
/// Requires `k₀ ≥ 2` (the `k₀ = 1` direction is a magnetic translation,
/// not a bifurcation), `0 < ds ≤ s_max`, and room for at least 16 lattice
/// modes.
pub fn continue_branch(k0: usize, s_max: f64, ds: f64, len: usize) -> Result<Vec<BranchPoint>> {
    if k0 < 2 {
        return Err(CoreError::arg("lattice stride must be at least 2"));
    }
    if !(ds.is_finite() && ds > 0.0) {
        return Err(CoreError::arg("step in s must be positive"));
    }
    if !(s_max.is_finite() && s_max >= ds) {
        return Err(CoreError::arg("s_max must be at least one step"));
    }
    let lattice: Vec<usize> = (0..len).step_by(k0).collect();
    let m = lattice.len();
    if m < 16 {
        return Err(CoreError::arg(format!(
            "need room for 16 lattice modes (len >= {}), got {len}",
            15 * k0 + 1
        )));
    }
    // Unknowns: lattice amplitudes except the pinned one, then b.
    let free: Vec<usize> = lattice.iter().cloned().filter(|&j| j != k0).collect();

    let assemble = |x: &[f64], s: f64| -> Vec<f64> {
        let mut c = vec![0.0; len];
        for (i, &j) in free.iter().enumerate() {
            c[j] = x[i];
        }
        c[0] += 1.0;
        c[k0] = s;
        c
    };
    let residual_on_lattice = |x: &[f64], s: f64| -> Vec<f64> {
        let b = x[m - 1];
        let c = assemble(x, s);
        let state = CoeffState::new(c.iter().map(|&v| Complex64::new(v, 0.0)).collect())
            .expect("real branch coefficients are finite");
        let image = nonlinear(&state);
        lattice
            .iter()
            .map(|&j| {
                8.0 * PI * image[j].re + (b * j as f64 - 4.0) * c[j]
            })
            .collect()
    };

    let mut points = Vec::new();
    let mut x = vec![0.0; m];
    x[m - 1] = bifurcation_coupling(k0);
    let steps = (s_max / ds + 1e-9).floor() as usize;
    for step_idx in 0..steps {
        let s = ds * (step_idx + 1) as f64;
        let mut converged = false;
        for _ in 0..30 {
            let f = residual_on_lattice(&x, s);
            let worst = f.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if !worst.is_finite() || worst > 1e3 {
                break;
            }
            if worst < 1e-12 {
                converged = true;
                break;
            }
            // Central finite-difference Jacobian, column by column.
            let mut jac = vec![0.0; m * m];
            for j in 0..m {
                let h = 1e-7 * (1.0 + x[j].abs());
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fp = residual_on_lattice(&xp, s);
                let fm = residual_on_lattice(&xm, s);
                for i in 0..m {
                    jac[i * m + j] = (fp[i] - fm[i]) / (2.0 * h);
                }
            }
            let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
            match lu_solve(&jac, m, &rhs) {
                Ok(delta) => {
                    for (xi, di) in x.iter_mut().zip(&delta) {
                        *xi += di;
                    }
                }
                Err(_) => break,
            }
        }
        if !converged {
            if points.is_empty() {
                return Err(CoreError::NoConvergence(format!(
                    "branch Newton failed at the first step s={s}"
                )));
            }
            break;
        }
        points.push(branch_point(&assemble(&x, s), x[m - 1], s, k0, len)?);
    }
    Ok(points)
}

/// Package a converged branch solution: measure the residual in a doubled
/// array and fit the coefficient envelope over the populated lattice modes.
fn branch_point(c: &[f64], b: f64, s: f64, k0: usize, len: usize) -> Result<BranchPoint> {
    let mut wide = vec![Complex64::new(0.0, 0.0); 2 * len];
    for (j, &v) in c.iter().enumerate() {
        wide[j] = Complex64::new(v, 0.0);
    }
    let wide_state = CoeffState::new(wide)?;
    let image = nonlinear(&wide_state);
    let mut res_sq = 0.0;
    for (j, t) in image.iter().enumerate() {
        let cj = if j < len { c[j] } else { 0.0 };
        let r = 8.0 * PI * t - Complex64::new((4.0 - b * j as f64) * cj, 0.0);
        res_sq += r.norm_sqr();
    }

    let peak = c.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for j in (0..len).step_by(k0) {
        if c[j].abs() > 1e-14 * peak {
            rows.push(vec![j as f64, 1.0]);
            rhs.push(c[j].abs().ln() + 0.5 * ln_factorial(j as u64));
        }
    }
    let fit = ridge_least_squares(&rows, &rhs, 0.0)?;
    let state = CoeffState::new(c.iter().map(|&v| Complex64::new(v, 0.0)).collect())?;
    Ok(BranchPoint {
        s,
        state,
        a: 4.0,
        b,
        residual: res_sq.sqrt(),
        envelope_k: fit[1].exp(),
        envelope_eps: fit[0].exp(),
    })
}
