//! Tensor-product Gauss–Legendre quadrature on centered squares `[-R,R]²`,
//! used to cross-check coefficient-space identities against plane integrals.

use num_complex::Complex64;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence. Nodes ascend.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "argument error: need at least a 2-point rule");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-type initial guess for the i-th root (descending order).
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Legendre polynomial `P_n(x)` and its derivative via the three-term
/// recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0f64;
    let mut p = x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Product Gauss–Legendre grid on `[-r, r]²` with `pts` points per axis.
#[derive(Debug, Clone)]
pub struct TensorGrid {
    /// Half-width of the square.
    pub r: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl TensorGrid {
    pub fn new(r: f64, pts: usize) -> Self {
        assert!(r.is_finite() && r > 0.0, "argument error: grid half-width");
        let (base_nodes, base_weights) = gauss_legendre_unit(pts);
        let nodes = base_nodes.iter().map(|x| x * r).collect();
        let weights = base_weights.iter().map(|w| w * r).collect();
        TensorGrid { r, nodes, weights }
    }

    pub fn points_per_axis(&self) -> usize {
        self.nodes.len()
    }

    /// ∫∫ f(x + iy) dx dy over the square, for real-valued integrands.
    pub fn integrate(&self, f: impl Fn(Complex64) -> f64) -> f64 {
        let mut total = 0.0;
        for (ix, &x) in self.nodes.iter().enumerate() {
            let mut row = 0.0;
            for (iy, &y) in self.nodes.iter().enumerate() {
                row += self.weights[iy] * f(Complex64::new(x, y));
            }
            total += self.weights[ix] * row;
        }
        total
    }

    /// Same as [`integrate`](Self::integrate) for complex integrands.
    pub fn integrate_complex(&self, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (ix, &x) in self.nodes.iter().enumerate() {
            let mut row = Complex64::new(0.0, 0.0);
            for (iy, &y) in self.nodes.iter().enumerate() {
                row += self.weights[iy] * f(Complex64::new(x, y));
            }
            total += self.weights[ix] * row;
        }
        total
    }
}
