//! Time integration of the coefficient flow `i dc/dt = T(c) - m ∘ c`
//! (`m` an optional real diagonal multiplier), with dense conservation
//! traces, weighted-norm monitors, divergence sentinels, and the
//! invariant-manifold residual.

use crate::error::{CoreError, Result};
use crate::fock::{CoeffState, ConservedSet};
use crate::nonlinear::NonlinearWorkspace;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

const PI: f64 = std::f64::consts::PI;

/// Which one-step scheme to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Classical explicit Runge–Kutta 4.
    Rk4,
    /// Implicit midpoint via fixed-point iteration; conserves the quadratic
    /// invariants (M, P, Q) to solver tolerance at any stable step size.
    ImplicitMidpoint,
}

/// Step-size and solver parameters. `dt` must lie in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Integrator,
    pub dt: f64,
    pub midpoint_tol: f64,
    pub midpoint_max_iter: usize,
}

impl IntegratorConfig {
    fn validated(method: Integrator, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0 && dt <= 1.0) {
            return Err(CoreError::arg(format!("step size {dt} outside (0, 1]")));
        }
        Ok(IntegratorConfig {
            method,
            dt,
            midpoint_tol: 1e-13,
            midpoint_max_iter: 60,
        })
    }

    pub fn rk4(dt: f64) -> Result<Self> {
        Self::validated(Integrator::Rk4, dt)
    }

    pub fn midpoint(dt: f64) -> Result<Self> {
        Self::validated(Integrator::ImplicitMidpoint, dt)
    }
}

/// The diagonal multiplier entering `i dc/dt = T(c) - m ∘ c`.
#[derive(Debug, Clone, PartialEq)]
pub enum MultiplierSpec {
    /// No multiplier (plain flow).
    None,
    /// Caller-supplied values, one per mode.
    Explicit(Vec<f64>),
    /// Seeded uniform draws `m_j ~ U[-1/2, 1/2] / (j+1)^decay`.
    RandomClass { decay: u32, seed: u64 },
}

impl MultiplierSpec {
    /// Concrete multiplier vector for a state with `len` modes.
    pub fn realize(&self, len: usize) -> Result<Vec<f64>> {
        match self {
            MultiplierSpec::None => Ok(vec![0.0; len]),
            MultiplierSpec::Explicit(m) => {
                if m.len() != len {
                    return Err(CoreError::arg(format!(
                        "multiplier length {} does not match state length {len}",
                        m.len()
                    )));
                }
                Ok(m.clone())
            }
            MultiplierSpec::RandomClass { decay, seed } => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..len)
                    .map(|j| {
                        let raw = rng.gen::<f64>() - 0.5;
                        raw / ((j as f64 + 1.0).powi(*decay as i32))
                    })
                    .collect())
            }
        }
    }
}

/// Full run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub integrator: IntegratorConfig,
    pub t_end: f64,
    /// Record a trace row every this many steps (plus the final step).
    pub record_stride: usize,
    /// Orders `s` for which to trace the weighted norms `W_s`.
    pub w_orders: Vec<f64>,
    /// Sample the invariant-manifold residual every this many steps.
    pub manifold_stride: Option<usize>,
    /// Keep a coefficient snapshot every this many steps.
    pub snapshot_stride: Option<usize>,
    pub multipliers: MultiplierSpec,
}

/// One recorded trace row.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub t: f64,
    pub conserved: ConservedSet,
    /// `W_s(t)` for each requested order, in the order requested.
    pub w: Vec<f64>,
    pub manifold_residual: Option<f64>,
}

/// Maximum relative drift of each conserved quantity over the recorded rows
/// (`degree` and `magnetic` are measured relative to `max(|initial|, M)`).
#[derive(Debug, Clone, Copy)]
pub struct DriftReport {
    pub mass: f64,
    pub degree: f64,
    pub magnetic: f64,
    pub energy: f64,
}

/// Envelope fit of one weighted-norm trace: `envelope_c` is the max of
/// `W^{1/2}/(1+t)` over the first half of the run, `late_ratio` the max of
/// `W^{1/2}/(envelope_c (1+t))` over the second half, and `exponent` the
/// least-squares slope of `ln W^{1/2}` against `ln (1+t)`.
#[derive(Debug, Clone, Copy)]
pub struct WGrowthFit {
    pub order: f64,
    pub envelope_c: f64,
    pub late_ratio: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub max_rel_drift: DriftReport,
    pub w_growth: Vec<WGrowthFit>,
}

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub rows: Vec<TraceRow>,
    pub snapshots: Vec<(f64, CoeffState)>,
    pub final_state: CoeffState,
    pub final_time: f64,
    pub summary: RunSummary,
}

/// `F(c) = -i (T(c) - m ∘ c)` into `out`.
fn vector_field(
    ws: &mut NonlinearWorkspace,
    c: &[Complex64],
    m: &[f64],
    out: &mut Vec<Complex64>,
) {
    ws.apply_slice(c, out);
    for (k, v) in out.iter_mut().enumerate() {
        *v = Complex64::new(0.0, -1.0) * (*v - m[k] * c[k]);
    }
}

fn axpy(y: &mut [Complex64], a: f64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

struct Stepper {
    ws: NonlinearWorkspace,
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Stepper {
    fn new(len: usize) -> Self {
        Stepper {
            ws: NonlinearWorkspace::new(len),
            k1: Vec::new(),
            k2: Vec::new(),
            k3: Vec::new(),
            k4: Vec::new(),
            tmp: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    /// Advance `c` in place by `dt`.
    fn advance(&mut self, cfg: &IntegratorConfig, dt: f64, c: &mut [Complex64], m: &[f64]) -> Result<()> {
        match cfg.method {
            Integrator::Rk4 => {
                vector_field(&mut self.ws, c, m, &mut self.k1);
                self.tmp.copy_from_slice(c);
                axpy(&mut self.tmp, 0.5 * dt, &self.k1);
                vector_field(&mut self.ws, &self.tmp, m, &mut self.k2);
                self.tmp.copy_from_slice(c);
                axpy(&mut self.tmp, 0.5 * dt, &self.k2);
                vector_field(&mut self.ws, &self.tmp, m, &mut self.k3);
                self.tmp.copy_from_slice(c);
                axpy(&mut self.tmp, dt, &self.k3);
                vector_field(&mut self.ws, &self.tmp, m, &mut self.k4);
                for k in 0..c.len() {
                    c[k] += dt / 6.0
                        * (self.k1[k] + 2.0 * self.k2[k] + 2.0 * self.k3[k] + self.k4[k]);
                }
                Ok(())
            }
            Integrator::ImplicitMidpoint => {
                // Fixed point for the midpoint value y = c + (dt/2) F(y).
                self.tmp.copy_from_slice(c); // iterate in tmp
                let mut converged = false;
                for _ in 0..cfg.midpoint_max_iter {
                    vector_field(&mut self.ws, &self.tmp, m, &mut self.k1);
                    let mut delta = 0.0f64;
                    for k in 0..c.len() {
                        let next = c[k] + 0.5 * dt * self.k1[k];
                        delta = delta.max((next - self.tmp[k]).norm());
                        self.tmp[k] = next;
                    }
                    if delta < cfg.midpoint_tol {
                        converged = true;
                        break;
                    }
                }
                if !converged {
                    return Err(CoreError::NoConvergence(
                        "implicit midpoint fixed point stalled; reduce dt".into(),
                    ));
                }
                // c' = 2 y - c preserves the quadratic invariants exactly.
                for k in 0..c.len() {
                    c[k] = 2.0 * self.tmp[k] - c[k];
                }
                Ok(())
            }
        }
    }
}

/// One integrator step (convenience wrapper; loops should use [`run`]).
pub fn step(state: &CoeffState, cfg: &IntegratorConfig, multipliers: &[f64]) -> Result<CoeffState> {
    if multipliers.len() != state.len() {
        return Err(CoreError::arg(
            "multiplier length does not match state length",
        ));
    }
    let mut stepper = Stepper::new(state.len());
    let mut c = state.coeffs().to_vec();
    stepper.advance(cfg, cfg.dt, &mut c, multipliers)?;
    CoeffState::new(c)
}

fn conserved_with(ws: &mut NonlinearWorkspace, c: &[Complex64]) -> ConservedSet {
    let mut mass = 0.0;
    let mut degree = 0.0;
    let mut magnetic = Complex64::new(0.0, 0.0);
    for (n, v) in c.iter().enumerate() {
        let m = v.norm_sqr();
        mass += m;
        degree += n as f64 * m;
        if n + 1 < c.len() {
            magnetic += ((n + 1) as f64).sqrt() * v * c[n + 1].conj();
        }
    }
    ConservedSet {
        mass,
        degree,
        magnetic,
        energy: ws.energy_slice(c),
    }
}

fn weighted_norm_sq_slice(c: &[Complex64], s: f64) -> f64 {
    c.iter()
        .enumerate()
        .map(|(n, v)| (2.0 * (n as f64 + 1.0)).powf(s) * v.norm_sqr())
        .sum()
}

/// Integrate the flow and collect traces. Any non-finite coefficient aborts
/// with [`CoreError::Diverged`], carrying the last finite snapshot.
pub fn run(initial: &CoeffState, cfg: &RunConfig) -> Result<SimulationRun> {
    if !(cfg.t_end.is_finite() && cfg.t_end > 0.0) {
        return Err(CoreError::arg(format!("t_end must be positive, got {}", cfg.t_end)));
    }
    if cfg.record_stride == 0 {
        return Err(CoreError::arg("record_stride must be at least 1"));
    }
    let n = initial.len();
    let m = cfg.multipliers.realize(n)?;
    let dt = cfg.integrator.dt;
    let n_steps = ((cfg.t_end - 1e-12) / dt).ceil().max(1.0) as usize;

    let mut stepper = Stepper::new(n);
    let mut c = initial.coeffs().to_vec();
    let mut rows: Vec<TraceRow> = Vec::new();
    let mut snapshots: Vec<(f64, CoeffState)> = Vec::new();
    let mut manifold_alpha: Option<Complex64> = None;

    let record = |step_idx: usize,
                      t: f64,
                      c: &[Complex64],
                      stepper: &mut Stepper,
                      manifold_alpha: &mut Option<Complex64>,
                      rows: &mut Vec<TraceRow>,
                      snapshots: &mut Vec<(f64, CoeffState)>| {
        let manifold_residual = match cfg.manifold_stride {
            Some(stride) if step_idx % stride == 0 => {
                let state = CoeffState { c: c.to_vec() };
                let fit = match *manifold_alpha {
                    Some(a0) => manifold_residual_warm(&state, a0),
                    None => manifold_residual(&state, 2.0),
                };
                *manifold_alpha = Some(fit.alpha);
                Some(fit.residual)
            }
            _ => None,
        };
        if step_idx % cfg.record_stride == 0 || manifold_residual.is_some() {
            rows.push(TraceRow {
                t,
                conserved: conserved_with(&mut stepper.ws, c),
                w: cfg.w_orders.iter().map(|&s| weighted_norm_sq_slice(c, s)).collect(),
                manifold_residual,
            });
        }
        if let Some(stride) = cfg.snapshot_stride {
            if step_idx % stride == 0 {
                snapshots.push((t, CoeffState { c: c.to_vec() }));
            }
        }
    };

    record(0, 0.0, &c, &mut stepper, &mut manifold_alpha, &mut rows, &mut snapshots);

    let mut t = 0.0f64;
    for i in 0..n_steps {
        let dt_i = dt.min(cfg.t_end - t).max(0.0);
        if dt_i <= 0.0 {
            break;
        }
        let prev = c.clone();
        stepper.advance(&cfg.integrator, dt_i, &mut c, &m)?;
        let t_next = if i + 1 == n_steps { cfg.t_end } else { (i as f64 + 1.0) * dt };
        if c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(CoreError::Diverged {
                t: t_next,
                last_good_t: t,
                last_good: Box::new(CoeffState { c: prev }),
            });
        }
        t = t_next;
        let is_final = i + 1 == n_steps;
        if is_final {
            // Always record the endpoint.
            let manifold_residual = match cfg.manifold_stride {
                Some(_) => {
                    let state = CoeffState { c: c.clone() };
                    let fit = match manifold_alpha {
                        Some(a0) => manifold_residual_warm(&state, a0),
                        None => manifold_residual(&state, 2.0),
                    };
                    manifold_alpha = Some(fit.alpha);
                    Some(fit.residual)
                }
                None => None,
            };
            rows.push(TraceRow {
                t,
                conserved: conserved_with(&mut stepper.ws, &c),
                w: cfg.w_orders.iter().map(|&s| weighted_norm_sq_slice(&c, s)).collect(),
                manifold_residual,
            });
            if cfg.snapshot_stride.is_some() {
                snapshots.push((t, CoeffState { c: c.clone() }));
            }
        } else {
            record(i + 1, t, &c, &mut stepper, &mut manifold_alpha, &mut rows, &mut snapshots);
        }
    }

    let summary = summarize(&rows, n_steps, &cfg.w_orders);
    Ok(SimulationRun {
        rows,
        snapshots,
        final_state: CoeffState { c },
        final_time: t,
        summary,
    })
}

fn summarize(rows: &[TraceRow], steps: usize, w_orders: &[f64]) -> RunSummary {
    let first = &rows[0];
    let scale_m = first.conserved.mass.max(1e-300);
    let scale_deg = first.conserved.degree.abs().max(first.conserved.mass);
    let scale_mag = first.conserved.magnetic.norm().max(first.conserved.mass);
    let scale_e = first.conserved.energy.abs().max(1e-300);
    let mut drift = DriftReport {
        mass: 0.0,
        degree: 0.0,
        magnetic: 0.0,
        energy: 0.0,
    };
    for row in rows {
        drift.mass = drift.mass.max((row.conserved.mass - first.conserved.mass).abs() / scale_m);
        drift.degree = drift
            .degree
            .max((row.conserved.degree - first.conserved.degree).abs() / scale_deg);
        drift.magnetic = drift
            .magnetic
            .max((row.conserved.magnetic - first.conserved.magnetic).norm() / scale_mag);
        drift.energy = drift
            .energy
            .max((row.conserved.energy - first.conserved.energy).abs() / scale_e);
    }

    let t_end = rows.last().map(|r| r.t).unwrap_or(0.0);
    let w_growth = (0..first.w.len())
        .map(|idx| {
            let mut envelope_c = 0.0f64;
            for row in rows.iter().filter(|r| r.t <= 0.5 * t_end) {
                envelope_c = envelope_c.max(row.w[idx].sqrt() / (1.0 + row.t));
            }
            let mut late_ratio = 0.0f64;
            for row in rows.iter().filter(|r| r.t > 0.5 * t_end) {
                late_ratio = late_ratio.max(row.w[idx].sqrt() / (envelope_c * (1.0 + row.t)));
            }
            // Least-squares slope of ln W^{1/2} against ln(1+t).
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.w[idx] > 0.0)
                .map(|r| ((1.0 + r.t).ln(), 0.5 * r.w[idx].ln()))
                .collect();
            let exponent = if pts.len() >= 2 {
                let n = pts.len() as f64;
                let sx: f64 = pts.iter().map(|p| p.0).sum();
                let sy: f64 = pts.iter().map(|p| p.1).sum();
                let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
                let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
                let denom = n * sxx - sx * sx;
                if denom.abs() > 1e-300 {
                    (n * sxy - sx * sy) / denom
                } else {
                    0.0
                }
            } else {
                0.0
            };
            WGrowthFit {
                order: w_orders[idx],
                envelope_c,
                late_ratio,
                exponent,
            }
        })
        .collect();

    RunSummary {
        steps,
        max_rel_drift: drift,
        w_growth,
    }
}

// ------------------------------------------------------------- manifold fit

/// A member of the flow-invariant family `u = (λ z + μ) e^{α z - |z|²/2}`,
/// truncated to `len` modes (coefficients
/// `c_k = √(π k!) (λ α^{k-1}/(k-1)! + μ α^k/k!)`).
pub fn manifold_member(
    lambda: Complex64,
    mu: Complex64,
    alpha: Complex64,
    len: usize,
) -> Result<CoeffState> {
    if len < 2 {
        return Err(CoreError::arg("a manifold member needs at least two modes"));
    }
    for (name, v) in [("lambda", lambda), ("mu", mu), ("alpha", alpha)] {
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(CoreError::arg(format!("{name} must be finite")));
        }
    }
    let sqrt_pi = PI.sqrt();
    let mut u1 = vec![Complex64::new(0.0, 0.0); len];
    let mut u2 = vec![Complex64::new(0.0, 0.0); len];
    u2[0] = Complex64::new(sqrt_pi, 0.0);
    u1[1] = Complex64::new(sqrt_pi, 0.0);
    for k in 1..len {
        u2[k] = u2[k - 1] * alpha / (k as f64).sqrt();
        if k >= 2 {
            u1[k] = u1[k - 1] * alpha * ((k as f64).sqrt() / (k as f64 - 1.0));
        }
    }
    CoeffState::new((0..len).map(|k| lambda * u1[k] + mu * u2[k]).collect())
}

/// Fit of a state to the flow-invariant family
/// `u = (λ z + μ) e^{α z - |z|²/2}` (coefficients
/// `c_k = √(π k!) (λ α^{k-1}/(k-1)! + μ α^k/k!)`).
#[derive(Debug, Clone, Copy)]
pub struct ManifoldFit {
    /// Relative l² distance to the best family member.
    pub residual: f64,
    pub lambda: Complex64,
    pub mu: Complex64,
    pub alpha: Complex64,
}

/// Squared residual and optimal linear coefficients at fixed `α` (the family
/// is linear in `(λ, μ)`, so this is an exact 2×2 Hermitian solve).
fn residual_at(c: &[Complex64], alpha: Complex64) -> (f64, Complex64, Complex64) {
    let len = c.len();
    let sqrt_pi = PI.sqrt();
    // u1 = coefficients of z e^{αz}, u2 = coefficients of e^{αz}.
    let mut u1 = vec![Complex64::new(0.0, 0.0); len];
    let mut u2 = vec![Complex64::new(0.0, 0.0); len];
    u2[0] = Complex64::new(sqrt_pi, 0.0);
    if len > 1 {
        u1[1] = Complex64::new(sqrt_pi, 0.0);
    }
    for k in 1..len {
        u2[k] = u2[k - 1] * alpha / (k as f64).sqrt();
        if k >= 2 {
            u1[k] = u1[k - 1] * alpha * ((k as f64).sqrt() / (k as f64 - 1.0));
        }
    }
    let inner = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    };
    let g11 = inner(&u1, &u1).re;
    let g22 = inner(&u2, &u2).re;
    let g12 = inner(&u1, &u2);
    let b1 = inner(&u1, c);
    let b2 = inner(&u2, c);
    let norm_sq: f64 = c.iter().map(|v| v.norm_sqr()).sum();
    let det = g11 * g22 - g12.norm_sqr();
    let (x1, x2) = if det > 1e-14 * g11 * g22 {
        (
            (g22 * b1 - g12 * b2) / det,
            (g11 * b2 - g12.conj() * b1) / det,
        )
    } else {
        // Degenerate direction; fall back to the coherent column alone.
        (Complex64::new(0.0, 0.0), b2 / g22)
    };
    let explained = (x1.conj() * b1 + x2.conj() * b2).re;
    let rho2 = (norm_sq - explained).max(0.0);
    (rho2, x1, x2)
}

fn refine(c: &[Complex64], start: Complex64, mut h: f64) -> ManifoldFit {
    let norm: f64 = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let mut center = start;
    let (mut best, mut l, mut m) = residual_at(c, center);
    while h > 1e-9 {
        let mut moved = false;
        for dir in [
            Complex64::new(h, 0.0),
            Complex64::new(-h, 0.0),
            Complex64::new(0.0, h),
            Complex64::new(0.0, -h),
        ] {
            let cand = center + dir;
            let (r, lc, mc) = residual_at(c, cand);
            if r < best {
                best = r;
                l = lc;
                m = mc;
                center = cand;
                moved = true;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    ManifoldFit {
        residual: best.sqrt() / norm.max(1e-300),
        lambda: l,
        mu: m,
        alpha: center,
    }
}

/// Global fit: coarse grid over `|Re α|, |Im α| ≤ search_radius` followed by
/// shrinking-stencil refinement. Deterministic.
pub fn manifold_residual(state: &CoeffState, search_radius: f64) -> ManifoldFit {
    assert!(search_radius > 0.0, "argument error: search radius");
    let c = state.coeffs();
    let steps = 40usize;
    let mut best_alpha = Complex64::new(0.0, 0.0);
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        for j in 0..=steps {
            let alpha = Complex64::new(
                -search_radius + 2.0 * search_radius * i as f64 / steps as f64,
                -search_radius + 2.0 * search_radius * j as f64 / steps as f64,
            );
            let (r, _, _) = residual_at(c, alpha);
            if r < best {
                best = r;
                best_alpha = alpha;
            }
        }
    }
    refine(c, best_alpha, 2.0 * search_radius / steps as f64)
}

/// Warm-started fit: refine only, from a previous `α`.
pub fn manifold_residual_warm(state: &CoeffState, alpha0: Complex64) -> ManifoldFit {
    refine(state.coeffs(), alpha0, 0.05)
}
