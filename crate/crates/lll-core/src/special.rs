//! Scalar special functions underpinning the spectral kernel: log-factorials,
//! scaled binomial weights, associated Laguerre polynomials, and stable
//! logarithmic helpers.
//!
//! The scaled weight `w(S,m) = sqrt(S! / (2^S m! (S-m)!))` is O(1) even when
//! every factorial in it overflows, and the whole nonlinear kernel is built
//! from it. Because `ln w` is a small difference of huge logs, the factorial
//! table is kept in double-double precision and combined with compensated
//! arithmetic; the returned weight logs are accurate to a few ulps of the
//! *result*, not of the inputs.

use std::sync::OnceLock;

/// Factorials up to this index come from the compensated table; larger ones
/// use the Stirling series (which is far past its accuracy crossover there).
const TABLE_LEN: usize = 1024;

// --- double-double helpers (enough for sums/differences and f64 products) ---

#[derive(Clone, Copy, Debug, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo: err }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    let e = a.mul_add(b, -p);
    Dd { hi: p, lo: e }
}

impl Dd {
    #[inline]
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    fn add(self, other: Dd) -> Dd {
        let s = two_sum(self.hi, other.hi);
        let lo = s.lo + self.lo + other.lo;
        let t = two_sum(s.hi, lo);
        Dd { hi: t.hi, lo: t.lo }
    }

    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// ln 2 split to double-double precision.
const LN2_HI: f64 = 0.693_147_180_559_945_3;
const LN2_LO: f64 = 2.319_046_813_846_299_6e-17;

fn factorial_table() -> &'static Vec<Dd> {
    static TABLE: OnceLock<Vec<Dd>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(TABLE_LEN);
        let mut acc = Dd::from(0.0);
        t.push(acc); // 0! = 1
        for k in 1..TABLE_LEN as u64 {
            acc = acc.add(Dd::from((k as f64).ln()));
            t.push(acc);
        }
        t
    })
}

fn ln_factorial_dd(n: u64) -> Dd {
    if (n as usize) < TABLE_LEN {
        factorial_table()[n as usize]
    } else {
        Dd::from(stirling_ln_gamma(n as f64 + 1.0))
    }
}

/// Stirling series for ln Γ(x), accurate to well under 1e-15 relative for
/// x ≥ 1024 (the table covers everything smaller).
fn stirling_ln_gamma(x: f64) -> f64 {
    const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 + inv2 * (-1.0 / 360.0 + inv2 * (1.0 / 1260.0 + inv2 * (-1.0 / 1680.0))));
    (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + series
}

/// Natural log of `n!`. Exact-table path below 1024, Stirling series above;
/// both are accurate to a few ulps of the result up to `n = 1e6` and beyond.
pub fn ln_factorial(n: u64) -> f64 {
    ln_factorial_dd(n).value()
}

/// `ln sqrt( S! / (2^S m! (S-m)!) )`, the log of the scaled interaction
/// weight. Always ≤ 0 up to rounding, finite for any `S` (tested at 1e6).
///
/// # Panics
/// Panics with an argument error if `m > S`.
pub fn log_sqrt_binomial(s: u64, m: u64) -> f64 {
    assert!(m <= s, "argument error: log_sqrt_binomial needs m <= S, got m={m}, S={s}");
    // ln w = (lf(S) - lf(m) - lf(S-m) - S ln2) / 2, combined in double-double
    // because the result is O(1) while the pieces are O(S ln S).
    let mut acc = ln_factorial_dd(s);
    acc = acc.add(ln_factorial_dd(m).neg());
    acc = acc.add(ln_factorial_dd(s - m).neg());
    let s_f = s as f64;
    let ln2s = two_prod(s_f, LN2_HI);
    let ln2s_lo = s_f.mul_add(LN2_LO, ln2s.lo);
    acc = acc.add(Dd { hi: -ln2s.hi, lo: -ln2s_lo });
    0.5 * acc.value()
}

/// Entropy-type envelope for the scaled weights:
/// `psi(k/S)^S * <S>^{1/4} / (<k>^{1/4} <S-k>^{1/4})` with
/// `psi(x) = sqrt(1/(2 x^x (1-x)^{1-x}))` and `<x> = 1 + x`.
/// `exp(log_sqrt_binomial(S,k))` is bounded by a small constant times this.
pub fn binomial_envelope(s: u64, k: u64) -> f64 {
    assert!(k <= s, "argument error: binomial_envelope needs k <= S");
    fn x_ln_x(x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            x * x.ln()
        }
    }
    let (sf, kf) = (s as f64, k as f64);
    let ln_psi = if s == 0 {
        0.0
    } else {
        let x = kf / sf;
        -0.5 * (std::f64::consts::LN_2 + x_ln_x(x) + x_ln_x(1.0 - x))
    };
    let bracket = ((1.0 + sf) / ((1.0 + kf) * (1.0 + sf - kf))).powf(0.25);
    (sf * ln_psi).exp() * bracket
}

/// Associated Laguerre polynomial `L_n^{(a)}(x)` by the stable three-term
/// recurrence `(k+1) L_{k+1} = (2k+1+a-x) L_k - (k+a) L_{k-1}`.
pub fn laguerre_assoc(n: usize, a: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0_f64;
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `ln sinh x` for `x > 0`, stable for both tiny and huge arguments
/// (never forms `sinh x` itself): `x - ln 2 + ln(1 - e^{-2x})`.
pub fn ln_sinh(x: f64) -> f64 {
    assert!(x > 0.0, "argument error: ln_sinh needs x > 0");
    if x < 1e-3 {
        // sinh x = x(1 + x^2/6 + x^4/120 + ...)
        x.ln() + (x * x / 6.0 * (1.0 + x * x / 20.0)).ln_1p()
    } else {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    }
}
