//! Coefficient-space states on the Fock–Bargmann basis
//! `φ_n(z) = z^n e^{-|z|²/2} / √(π n!)`, together with point evaluation,
//! conserved quantities, trust radii, and the magnetic symmetry actions.

use crate::error::{CoreError, Result};
use crate::quadrature::TensorGrid;
use crate::special::ln_factorial;
use num_complex::Complex64;

const PI: f64 = std::f64::consts::PI;

/// A finite coefficient vector `(c_0, ..., c_{N-1})` representing
/// `u = Σ c_n φ_n`. Construction enforces: nonempty and all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffState {
    pub(crate) c: Vec<Complex64>,
}

impl CoeffState {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(CoreError::InvalidState("empty coefficient vector".into()));
        }
        if let Some(k) = coeffs.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(CoreError::InvalidState(format!(
                "non-finite coefficient at mode {k}"
            )));
        }
        Ok(CoeffState { c: coeffs })
    }

    /// The unit basis vector `e_k` with `len` stored modes.
    pub fn basis(k: usize, len: usize) -> Result<Self> {
        if k >= len {
            return Err(CoreError::arg(format!("basis index {k} outside length {len}")));
        }
        let mut c = vec![Complex64::new(0.0, 0.0); len];
        c[k] = Complex64::new(1.0, 0.0);
        Ok(CoeffState { c })
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one mode
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.c
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.c
    }

    /// Coefficient of mode `k`, zero beyond the stored range.
    pub fn get(&self, k: usize) -> Complex64 {
        self.c.get(k).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Mass `M = Σ |c_n|²`.
    pub fn mass(&self) -> f64 {
        self.c.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Degree / angular momentum `P = Σ n |c_n|²`.
    pub fn degree(&self) -> f64 {
        self.c
            .iter()
            .enumerate()
            .map(|(n, v)| n as f64 * v.norm_sqr())
            .sum()
    }

    /// Magnetic moment `Q = Σ √(n+1) c_n conj(c_{n+1})`.
    pub fn magnetic(&self) -> Complex64 {
        let mut q = Complex64::new(0.0, 0.0);
        for n in 0..self.c.len().saturating_sub(1) {
            q += ((n + 1) as f64).sqrt() * self.c[n] * self.c[n + 1].conj();
        }
        q
    }

    /// Weighted norm `Σ (2(n+1))^s |c_n|²` (the `ℍ^s` norm squared).
    pub fn weighted_norm_sq(&self, s: f64) -> f64 {
        self.c
            .iter()
            .enumerate()
            .map(|(n, v)| (2.0 * (n as f64 + 1.0)).powf(s) * v.norm_sqr())
            .sum()
    }

    /// Rescale so the mass equals `m0`. Errors on the zero state.
    pub fn normalized_to_mass(&self, m0: f64) -> Result<Self> {
        if !(m0.is_finite() && m0 > 0.0) {
            return Err(CoreError::arg(format!("target mass must be positive, got {m0}")));
        }
        let m = self.mass();
        if m <= 0.0 {
            return Err(CoreError::InvalidState(
                "cannot normalize the zero state".into(),
            ));
        }
        let s = (m0 / m).sqrt();
        Ok(CoeffState {
            c: self.c.iter().map(|v| v * s).collect(),
        })
    }

    /// Zero-padded or truncated copy with exactly `len` modes.
    /// Truncation is only allowed when the dropped tail carries no mass.
    pub fn resized(&self, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(CoreError::arg("cannot resize to zero modes"));
        }
        if len < self.c.len() {
            let tail: f64 = self.c[len..].iter().map(|v| v.norm_sqr()).sum();
            if tail > 1e-24 * self.mass().max(1e-300) {
                return Err(CoreError::Truncation(format!(
                    "resize to {len} would drop relative tail mass {:e}",
                    tail / self.mass()
                )));
            }
        }
        let mut c = self.c.clone();
        c.resize(len, Complex64::new(0.0, 0.0));
        Ok(CoeffState { c })
    }
}

/// The four conserved quantities of the coefficient flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedSet {
    /// `M = Σ |c_n|²`
    pub mass: f64,
    /// `P = Σ n |c_n|²`
    pub degree: f64,
    /// `Q = Σ √(n+1) c_n conj(c_{n+1})`
    pub magnetic: Complex64,
    /// `H` (quartic energy), computed through the scaled pair convolution.
    pub energy: f64,
}

/// All four conserved quantities of a state.
pub fn conserved(state: &CoeffState) -> ConservedSet {
    ConservedSet {
        mass: state.mass(),
        degree: state.degree(),
        magnetic: state.magnetic(),
        energy: crate::nonlinear::hamiltonian(state),
    }
}

/// Values `φ_0(z), ..., φ_{len-1}(z)` by the stable mode recurrence
/// `φ_{n+1} = φ_n · z/√(n+1)`.
pub fn basis_values(z: Complex64, len: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(len);
    let mut b = Complex64::new((-0.5 * z.norm_sqr()).exp() / PI.sqrt(), 0.0);
    for n in 0..len {
        out.push(b);
        b *= z / ((n + 1) as f64).sqrt();
    }
    out
}

/// A point evaluation plus the truncation flag.
#[derive(Debug, Clone, Copy)]
pub struct EvalPoint {
    pub value: Complex64,
    /// True when `|z|` exceeds the trust radius of the stored mode count, so
    /// the omitted tail may be non-negligible at this point.
    pub beyond_trust: bool,
}

/// Evaluate `u(z) = Σ c_n φ_n(z)`.
pub fn evaluate(state: &CoeffState, z: Complex64) -> EvalPoint {
    let mut value = Complex64::new(0.0, 0.0);
    let mut b = Complex64::new((-0.5 * z.norm_sqr()).exp() / PI.sqrt(), 0.0);
    for (n, &cn) in state.c.iter().enumerate() {
        value += cn * b;
        b *= z / ((n + 1) as f64).sqrt();
    }
    EvalPoint {
        value,
        beyond_trust: z.norm() > trust_radius(state.len(), 1e-12),
    }
}

/// Largest radius `R` (on the rising branch, `R < √N`) at which the first
/// omitted mode still stays below `tol` in magnitude:
/// `max_{|z|=R} |φ_N(z)| = R^N e^{-R²/2} / √(π N!) = tol`.
///
/// Monotone: increasing in `N`, increasing in `tol`.
pub fn trust_radius(len: usize, tol: f64) -> f64 {
    assert!(len >= 1 && len <= 1_000_000, "argument error: mode count {len}");
    assert!(
        (1e-300..=0.05).contains(&tol),
        "argument error: trust tolerance {tol} outside [1e-300, 0.05]"
    );
    let n = len as f64;
    let offset = 0.5 * (ln_factorial(len as u64) + PI.ln()) + tol.ln();
    // g(R) = N ln R - R²/2 - offset is increasing on (0, √N); find its root.
    let g = |r: f64| n * r.ln() - 0.5 * r * r - offset;
    let mut lo = 1e-12;
    let mut hi = n.sqrt();
    debug_assert!(g(hi) > 0.0, "peak of the omitted mode is above tol");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// The magnetic symmetry group of the flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SymmetryAction {
    /// Global phase `u ↦ e^{iγ} u`.
    Phase(f64),
    /// Rotation `c_n ↦ e^{inφ} c_n` (i.e. `u(z) ↦ u(e^{-iφ} z)` up to gauge).
    Rotation(f64),
    /// Magnetic translation `R_α`; acts on coefficients as the displacement
    /// matrix with parameter `-conj(α)`.
    Translation(Complex64),
}

/// Apply a symmetry action. Translations check that the truncated tail keeps
/// relative mass loss below 1e-8 and report a truncation error otherwise.
pub fn apply_symmetry(state: &CoeffState, action: &SymmetryAction) -> Result<CoeffState> {
    match *action {
        SymmetryAction::Phase(g) => {
            let rot = Complex64::from_polar(1.0, g);
            Ok(CoeffState {
                c: state.c.iter().map(|v| v * rot).collect(),
            })
        }
        SymmetryAction::Rotation(phi) => Ok(CoeffState {
            c: state
                .c
                .iter()
                .enumerate()
                .map(|(n, v)| v * Complex64::from_polar(1.0, phi * n as f64))
                .collect(),
        }),
        SymmetryAction::Translation(alpha) => displace(state, -alpha.conj()),
    }
}

/// Apply the displacement matrix `⟨m|D(g)|n⟩` to the coefficient column.
///
/// Entries (`x = |g|²`):
///   `⟨n+d|D(g)|n⟩ = √(n!/(n+d)!) g^d e^{-x/2} L_n^{(d)}(x)`,
///   `⟨n|D(g)|n+d⟩ = √(n!/(n+d)!) (-conj(g))^d e^{-x/2} L_n^{(d)}(x)`,
/// generated diagonal-by-diagonal with the Laguerre three-term recurrence.
fn displace(state: &CoeffState, g: Complex64) -> Result<CoeffState> {
    let n = state.len();
    if g.norm() == 0.0 {
        return Ok(state.clone());
    }
    let x = g.norm_sqr();
    let phase_lower = g / g.norm(); // direction of g
    let phase_upper = -g.conj() / g.norm();
    let mut out = vec![Complex64::new(0.0, 0.0); n];

    for d in 0..n {
        // Scalar prefactor magnitude exp(d ln|g| - x/2 + (ln j! - ln (j+d)!)/2)
        // is folded in per row below; phases are d-th powers of unit numbers.
        let ph_low = phase_lower.powu(d as u32);
        let ph_up = phase_upper.powu(d as u32);
        let d_ln_mag = d as f64 * g.norm().ln() - 0.5 * x;

        // Laguerre recurrence L_j^{(d)}(x) along j.
        let mut l_prev = 1.0f64;
        let mut l_cur = 1.0 + d as f64 - x;
        for j in 0..n - d {
            let l_j = if j == 0 { l_prev } else { l_cur };
            if j >= 1 {
                let jf = j as f64;
                let next = ((2.0 * jf + 1.0 + d as f64 - x) * l_cur - (jf + d as f64) * l_prev)
                    / (jf + 1.0);
                l_prev = l_cur;
                l_cur = next;
            }
            let mag = (d_ln_mag
                + 0.5 * (ln_factorial(j as u64) - ln_factorial((j + d) as u64)))
            .exp();
            let lower = ph_low * (mag * l_j);
            out[j + d] += lower * state.c[j];
            if d > 0 {
                let upper = ph_up * (mag * l_j);
                out[j] += upper * state.c[j + d];
            }
        }
    }

    let before = state.mass();
    let after: f64 = out.iter().map(|v| v.norm_sqr()).sum();
    if before > 0.0 && (before - after) / before > 1e-8 {
        return Err(CoreError::Truncation(format!(
            "translation loses relative mass {:e}; increase the mode count",
            (before - after) / before
        )));
    }
    CoeffState::new(out)
}

/// Largest overlap `max_φ |⟨u, R_φ v⟩|` over the rotation group, where the
/// rotation acts diagonally as `v_k ↦ e^{ikφ} v_k`. Scanned on a dense grid
/// and refined by golden-section search around the best node; the trig
/// polynomial `Σ u_k conj(v_k) e^{-ikφ}` is smooth, so the refinement
/// localizes the maximizer to ~1e-10.
pub fn max_rotation_overlap(u: &CoeffState, v: &CoeffState) -> f64 {
    let terms: Vec<Complex64> = u
        .c
        .iter()
        .zip(v.c.iter())
        .map(|(a, b)| a * b.conj())
        .collect();
    let overlap = |phi: f64| -> f64 {
        let step = Complex64::from_polar(1.0, -phi);
        let mut rot = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for t in &terms {
            sum += t * rot;
            rot *= step;
        }
        sum.norm()
    };

    let grid = 256usize;
    let h = 2.0 * PI / grid as f64;
    let mut best_phi = 0.0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..grid {
        let phi = i as f64 * h;
        let g = overlap(phi);
        if g > best {
            best = g;
            best_phi = phi;
        }
    }
    // Golden-section maximization on the bracketing interval.
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best_phi - h, best_phi + h);
    let mut x1 = hi - gr * (hi - lo);
    let mut x2 = lo + gr * (hi - lo);
    let (mut f1, mut f2) = (overlap(x1), overlap(x2));
    for _ in 0..48 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = overlap(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = overlap(x1);
        }
    }
    best.max(f1).max(f2)
}

/// Inner product `⟨u, φ_k⟩ = ∫ u(z) conj(φ_k(z)) dL(z)` by quadrature.
pub fn project_mode(
    grid: &TensorGrid,
    u: impl Fn(Complex64) -> Complex64,
    k: usize,
) -> Complex64 {
    let norm = (-0.5 * (PI.ln() + ln_factorial(k as u64))).exp();
    grid.integrate_complex(|z| {
        let phi_k = z.powu(k as u32) * (-0.5 * z.norm_sqr()).exp() * norm;
        u(z) * phi_k.conj()
    })
}

/// Result of the coefficient-dictionary cross-check.
#[derive(Debug, Clone)]
pub struct DictionaryReport {
    /// (row label, max relative deviation over the checked modes)
    pub rows: Vec<(String, f64)>,
    /// Maximum over rows.
    pub worst: f64,
}

/// Cross-check closed-form coefficient columns against plane-integral
/// projections for: a coherent column, three basis modes, and the two
/// degree-2 Gaussian rows (even and odd).
pub fn bargmann_dictionary_check(kmax: usize, grid_pts: usize) -> DictionaryReport {
    assert!(kmax >= 4 && kmax <= 24, "argument error: dictionary depth");
    let grid = TensorGrid::new(12.0, grid_pts);
    fn small_fact(n: usize) -> f64 {
        (2..=n as u64).map(|k| k as f64).product::<f64>().max(1.0)
    }

    let mut rows: Vec<(String, f64)> = Vec::new();

    // Row 1: coherent column, alpha = 0.3 + 0.2i.
    {
        let alpha = Complex64::new(0.3, 0.2);
        let u = |z: Complex64| {
            (alpha * z - 0.5 * alpha.norm_sqr() - 0.5 * z.norm_sqr()).exp() / PI.sqrt()
        };
        let expect: Vec<Complex64> = (0..=kmax)
            .map(|k| {
                alpha.powu(k as u32) * (-0.5 * alpha.norm_sqr()).exp() / small_fact(k).sqrt()
            })
            .collect();
        rows.push(("coherent(0.3+0.2i)".into(), row_deviation(&grid, u, &expect)));
    }

    // Rows 2-4: pure basis modes.
    for n in [0usize, 3, 7] {
        let norm = 1.0 / (PI * small_fact(n)).sqrt();
        let u = move |z: Complex64| z.powu(n as u32) * (-0.5 * z.norm_sqr()).exp() * norm;
        let expect: Vec<Complex64> = (0..=kmax)
            .map(|k| Complex64::new(if k == n { 1.0 } else { 0.0 }, 0.0))
            .collect();
        rows.push((format!("basis mode {n}"), row_deviation(&grid, u, &expect)));
    }

    // Row 5: even degree-2 Gaussian, analytic part e^{z²/2}.
    {
        let u = |z: Complex64| (0.5 * z * z - 0.5 * z.norm_sqr()).exp();
        let expect: Vec<Complex64> = (0..=kmax)
            .map(|k| {
                if k % 2 == 0 {
                    let half = k / 2;
                    Complex64::new(
                        (PI * small_fact(k)).sqrt() / (2f64.powi(half as i32) * small_fact(half)),
                        0.0,
                    )
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        rows.push(("even degree-2 gaussian".into(), row_deviation(&grid, u, &expect)));
    }

    // Row 6: odd degree-2 Gaussian, analytic part z e^{z²/2}.
    {
        let u = |z: Complex64| z * (0.5 * z * z - 0.5 * z.norm_sqr()).exp();
        let expect: Vec<Complex64> = (0..=kmax)
            .map(|k| {
                if k % 2 == 1 {
                    let half = (k - 1) / 2;
                    Complex64::new(
                        (PI * small_fact(k)).sqrt() / (2f64.powi(half as i32) * small_fact(half)),
                        0.0,
                    )
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        rows.push(("odd degree-2 gaussian".into(), row_deviation(&grid, u, &expect)));
    }

    let worst = rows.iter().map(|(_, d)| *d).fold(0.0f64, f64::max);
    DictionaryReport { rows, worst }
}

fn row_deviation(
    grid: &TensorGrid,
    u: impl Fn(Complex64) -> Complex64 + Copy,
    expect: &[Complex64],
) -> f64 {
    let scale = expect.iter().map(|v| v.norm()).fold(0.0f64, f64::max).max(1e-300);
    let mut worst = 0.0f64;
    for (k, &ek) in expect.iter().enumerate() {
        let got = project_mode(grid, u, k);
        worst = worst.max((got - ek).norm() / scale);
    }
    worst
}
