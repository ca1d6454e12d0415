//! The cubic interaction `T(c)` of the coefficient flow, the quartic
//! Hamiltonian, and the constrained-energy gradient — all through the
//! *scaled* pair convolution, which keeps every intermediate O(1):
//!
//! ```text
//! w(S,m)  = sqrt( S! / (2^S m! (S-m)!) )            (≤ 1)
//! D_S     = Σ_m w(S,m) c_m c_{S-m}                  (S = 0..2N-2)
//! T(c)_k  = (1/2π) Σ_{S≥k} w(S,k) D_S conj(c_{S-k})
//! 8π H    = Σ_S |D_S|²
//! ```
//!
//! The raw convolution `Σ sqrt((m+n)!/(m! n!)) c_m c_n` overflows f64 near
//! mode 150; the scaled form is exact at any mode count.

use crate::fock::CoeffState;
use crate::special::log_sqrt_binomial;
use num_complex::Complex64;

const INV_TWO_PI: f64 = 1.0 / (2.0 * std::f64::consts::PI);

/// Reusable buffers plus the cached weight table for a fixed mode count.
/// Rebuilding the table costs O(N²) exp calls, so integrators should hold
/// one workspace for the whole run.
#[derive(Debug, Clone)]
pub struct NonlinearWorkspace {
    len: usize,
    /// Flat table of w(S,k) over the in-range k for each S, ragged rows.
    weights: Vec<f64>,
    /// Row offsets into `weights`; row S covers k in [kmin(S), kmax(S)].
    offsets: Vec<usize>,
    /// Scratch for the pair convolution.
    dtilde: Vec<Complex64>,
}

#[inline]
fn kmin(s: usize, n: usize) -> usize {
    s.saturating_sub(n - 1)
}

#[inline]
fn kmax(s: usize, n: usize) -> usize {
    s.min(n - 1)
}

impl NonlinearWorkspace {
    pub fn new(len: usize) -> Self {
        let mut ws = NonlinearWorkspace {
            len: 0,
            weights: Vec::new(),
            offsets: Vec::new(),
            dtilde: Vec::new(),
        };
        ws.ensure(len);
        ws
    }

    /// (Re)build the weight table if the mode count changed.
    pub fn ensure(&mut self, len: usize) {
        assert!(len >= 1, "argument error: empty workspace");
        if self.len == len {
            return;
        }
        let smax = 2 * len - 2;
        let mut offsets = Vec::with_capacity(smax + 2);
        let mut weights = Vec::new();
        for s in 0..=smax {
            offsets.push(weights.len());
            for k in kmin(s, len)..=kmax(s, len) {
                weights.push(log_sqrt_binomial(s as u64, k as u64).exp());
            }
        }
        offsets.push(weights.len());
        self.len = len;
        self.weights = weights;
        self.offsets = offsets;
        self.dtilde = vec![Complex64::new(0.0, 0.0); smax + 1];
    }

    #[inline]
    fn w(&self, s: usize, k: usize) -> f64 {
        self.weights[self.offsets[s] + (k - kmin(s, self.len))]
    }

    /// Scaled pair convolution `D_S = Σ w(S,m) c_m c_{S-m}` into the scratch.
    fn pair_convolution(&mut self, c: &[Complex64]) {
        let n = self.len;
        for s in 0..=2 * n - 2 {
            let base = self.offsets[s];
            let k0 = kmin(s, n);
            let mut acc = Complex64::new(0.0, 0.0);
            for k in k0..=kmax(s, n) {
                acc += self.weights[base + (k - k0)] * c[k] * c[s - k];
            }
            self.dtilde[s] = acc;
        }
    }

    /// One mode of the interaction given a ready pair convolution.
    #[inline]
    fn mode(&self, c: &[Complex64], k: usize) -> Complex64 {
        let n = self.len;
        let mut acc = Complex64::new(0.0, 0.0);
        for s in k..=(k + n - 1).min(2 * n - 2) {
            acc += self.w(s, k) * self.dtilde[s] * c[s - k].conj();
        }
        acc * INV_TWO_PI
    }

    /// Full interaction `T(c)` into `out` (resized as needed).
    pub fn apply(&mut self, state: &CoeffState, out: &mut Vec<Complex64>) {
        self.apply_slice(state.coeffs(), out);
    }

    /// Slice-level variant of [`apply`](Self::apply) for integrator loops.
    pub(crate) fn apply_slice(&mut self, c: &[Complex64], out: &mut Vec<Complex64>) {
        let n = c.len();
        self.ensure(n);
        self.pair_convolution(c);
        out.clear();
        out.extend((0..n).map(|k| self.mode(c, k)));
    }

    /// Hamiltonian via `8π H = Σ_S |D_S|²` (shares the pair convolution).
    pub fn energy(&mut self, state: &CoeffState) -> f64 {
        self.energy_slice(state.coeffs())
    }

    /// Slice-level variant of [`energy`](Self::energy).
    pub(crate) fn energy_slice(&mut self, c: &[Complex64]) -> f64 {
        self.ensure(c.len());
        self.pair_convolution(c);
        let sum: f64 = self.dtilde.iter().map(|d| d.norm_sqr()).sum();
        sum / (8.0 * std::f64::consts::PI)
    }
}

/// The scaled pair sequence `D_S = Σ_m w(S,m) c_m c_{S−m}`, `S ≤ 2N−2`.
///
/// Its squared ℓ² norm equals `8π H`; several closed-form waves satisfy exact
/// identities mode-by-mode in this sequence, which makes it worth exposing.
pub fn pair_sequence(state: &CoeffState) -> Vec<Complex64> {
    let mut ws = NonlinearWorkspace::new(state.len());
    ws.pair_convolution(state.coeffs());
    ws.dtilde.clone()
}

/// The interaction `T(c)` (one-shot; integrators should use a workspace).
pub fn nonlinear(state: &CoeffState) -> Vec<Complex64> {
    let mut ws = NonlinearWorkspace::new(state.len());
    let mut out = Vec::new();
    ws.apply(state, &mut out);
    out
}

/// Quartic energy `H(c)`; equals `(1/4)∫|u|⁴` by the plane-integral identity.
pub fn hamiltonian(state: &CoeffState) -> f64 {
    NonlinearWorkspace::new(state.len()).energy(state)
}

/// Rayon-parallel interaction, bitwise identical to [`nonlinear`]: rows of
/// both passes are independent and each keeps its sequential summation order.
#[cfg(feature = "parallel")]
pub fn nonlinear_par(state: &CoeffState) -> Vec<Complex64> {
    use rayon::prelude::*;
    let n = state.len();
    let mut ws = NonlinearWorkspace::new(n);
    let c = state.coeffs();
    let dtilde: Vec<Complex64> = (0..=2 * n - 2)
        .into_par_iter()
        .map(|s| {
            let k0 = kmin(s, n);
            let mut acc = Complex64::new(0.0, 0.0);
            for k in k0..=kmax(s, n) {
                acc += ws.w(s, k) * c[k] * c[s - k];
            }
            acc
        })
        .collect();
    ws.dtilde = dtilde;
    (0..n).into_par_iter().map(|k| ws.mode(c, k)).collect()
}

/// Real gradient (`∂/∂x + i ∂/∂y` per mode) of `G_μ = 8πH + μP` :
/// `grad_k = 8π T(c)_k + 2 μ k c_k`.
pub fn grad_gmu(state: &CoeffState, mu: f64) -> Vec<Complex64> {
    let mut g = nonlinear(state);
    finish_grad(state, mu, &mut g);
    g
}

/// Workspace variant of [`grad_gmu`] for hot loops.
pub fn grad_gmu_with(
    ws: &mut NonlinearWorkspace,
    state: &CoeffState,
    mu: f64,
    out: &mut Vec<Complex64>,
) {
    ws.apply(state, out);
    finish_grad(state, mu, out);
}

fn finish_grad(state: &CoeffState, mu: f64, g: &mut [Complex64]) {
    for (k, v) in g.iter_mut().enumerate() {
        *v = 8.0 * std::f64::consts::PI * *v + 2.0 * mu * k as f64 * state.coeffs()[k];
    }
}
