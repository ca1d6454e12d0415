//! Zeros of truncated Bargmann profiles.
//!
//! A coefficient state `c` describes `u(z) = e^{-|z|²/2} p(z) / √π` with the
//! entire part `p(z) = Σ_k (c_k / √(k!)) z^k`, so zeros of `u` are roots of
//! the polynomial `p`. This module locates them with the Aberth–Ehrlich
//! simultaneous iteration (initial points on the coefficient-hull circles),
//! polishes with Newton steps, clusters nearby roots into multiplicities,
//! and validates every reported root against a scale-aware residual. Reported
//! roots are restricted to the disk where the truncation is trusted.
//!
//! Two counting diagnostics accompany the finder: a Jensen-formula upper
//! bound that certifies direct counts without locating roots, and a log-log
//! growth-exponent fit over count shells.

use crate::error::{CoreError, Result};
use crate::fock::{self, CoeffState};
use crate::special::ln_factorial;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Leading coefficients at or below this relative size are exact zeros of the
/// profile (an origin root of that multiplicity).
const EXACT_ZERO_CUTOFF: f64 = 1e-250;
/// Static relative cutoff under which trailing coefficients are dropped.
const TAIL_CUTOFF: f64 = 1e-280;
/// Radius-aware trailing cutoff: drop modes whose term at the working radius
/// sits this far (in nats) below the dominant term.
const TAIL_LOG_MARGIN: f64 = 414.0;
/// Roots closer than this are merged into one cluster (a multiple root).
const CLUSTER_TOL: f64 = 1e-6;
/// Largest scale-relative residual accepted for a reported root.
const RESIDUAL_TOL: f64 = 1e-9;
/// Fraction of the mode trust radius inside which roots are reported.
const TRUST_FRACTION: f64 = 0.75;
/// Tolerance fed to the mode trust-radius estimate.
const TRUST_TOL: f64 = 1e-12;
/// Quadrature points for the Jensen circle average.
const JENSEN_POINTS: usize = 256;

const MAX_SWEEPS: usize = 160;
const NEWTON_STEPS: usize = 10;

/// One located root with its merged multiplicity.
#[derive(Debug, Clone, Copy)]
pub struct RootCluster {
    pub location: Complex64,
    pub multiplicity: usize,
    /// Scale-relative residual `|p(z*)| / Σ_k |p_k| |z*|^k`.
    pub residual: f64,
}

/// Zeros of a state inside the trusted disk.
#[derive(Debug, Clone)]
pub struct ZeroReport {
    /// Clusters sorted by modulus, then by argument.
    pub roots: Vec<RootCluster>,
    /// Total zero count with multiplicity.
    pub total: usize,
    /// Radius actually searched: the request capped by the trust radius.
    pub effective_radius: f64,
    /// Cumulative counts on the ladder `effective_radius · j/8`.
    pub counts: Vec<(f64, usize)>,
    /// Candidates inside the disk discarded by the residual validation.
    pub dropped: usize,
}

/// Jensen-formula counting certificate on the disk `|z| < R/2`.
#[derive(Debug, Clone, Copy)]
pub struct JensenReport {
    pub radius: f64,
    /// Zeros located directly in `|z| ≤ R/2`, with multiplicity.
    pub direct: usize,
    /// Upper bound on that count from the circle average at `|z| = R`.
    pub bound: f64,
    /// Exact origin multiplicity (factored out before the bound).
    pub origin_multiplicity: usize,
    /// `ln |q(0)|` of the origin-factored polynomial.
    pub center_log_abs: f64,
    /// Trapezoid average of `ln |p|` over the circle `|z| = R`.
    pub circle_average: f64,
    /// Whether `direct ≤ bound + 1` (one unit of quadrature slack).
    pub passed: bool,
}

/// Entire-part polynomial after scale trims: `p(z) = z^m0 · q(z)`, `q(0) ≠ 0`.
struct TrimmedPoly {
    origin_multiplicity: usize,
    q: Vec<Complex64>,
    /// `ln |q_k|`, `-∞` where a coefficient vanishes.
    lq: Vec<f64>,
}

fn trim(state: &CoeffState, radius: f64) -> Result<TrimmedPoly> {
    let mut p = Vec::with_capacity(state.len());
    for (k, &ck) in state.coeffs().iter().enumerate() {
        let pk = ck * (-0.5 * ln_factorial(k as u64)).exp();
        if !pk.re.is_finite() || !pk.im.is_finite() {
            return Err(CoreError::NonFinite(format!("coefficient {k} is not finite")));
        }
        p.push(pk);
    }
    let maxp = p.iter().map(|pk| pk.norm()).fold(0.0f64, f64::max);
    if maxp == 0.0 {
        return Err(CoreError::arg("zero state has no zero set"));
    }
    let origin_multiplicity = p
        .iter()
        .take_while(|pk| pk.norm() <= EXACT_ZERO_CUTOFF * maxp)
        .count();

    // Keep a trailing mode when it is either statically significant or its
    // term at the working radius reaches the dominant term's magnitude range.
    let ln_r = radius.max(1.0).ln();
    let ln_maxterm = p
        .iter()
        .enumerate()
        .map(|(k, pk)| pk.norm().ln() + k as f64 * ln_r)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut end = origin_multiplicity;
    for (k, pk) in p.iter().enumerate().skip(origin_multiplicity) {
        let mag = pk.norm();
        if mag > TAIL_CUTOFF * maxp || mag.ln() + k as f64 * ln_r > ln_maxterm - TAIL_LOG_MARGIN {
            end = k;
        }
    }
    let q: Vec<Complex64> = p[origin_multiplicity..=end].to_vec();
    let lq = q.iter().map(|pk| pk.norm().ln()).collect();
    Ok(TrimmedPoly { origin_multiplicity, q, lq })
}

/// Scaled evaluation of `q` at `z`: returns `(v, d, m, s)` with
/// `q(z) = v·e^m`, `z·q'(z) = d·e^m`, and `Σ_k |q_k||z|^k = s·e^m`.
fn eval_scaled(q: &[Complex64], lq: &[f64], z: Complex64) -> (Complex64, Complex64, f64, f64) {
    let r = z.norm();
    if r < 1e-150 {
        // Near the origin plain Horner is exact and overflow-free.
        let mut v = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        let mut s = 0.0;
        for (k, &qk) in q.iter().enumerate().rev() {
            v = v * z + qk;
            d = d * z + qk * k as f64;
            s = s * r + qk.norm();
        }
        return (v, d, 0.0, s);
    }
    let ln_r = r.ln();
    let m = lq
        .iter()
        .enumerate()
        .map(|(k, &l)| l + k as f64 * ln_r)
        .fold(f64::NEG_INFINITY, f64::max);
    let phase = z / r;
    let mut w = Complex64::new(1.0, 0.0);
    let mut v = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    let mut s = 0.0;
    for (k, &qk) in q.iter().enumerate() {
        let le = lq[k] + k as f64 * ln_r - m;
        if le > -745.0 {
            // qk/|qk| carries the coefficient phase; the magnitude moves into
            // the exponent so no intermediate can overflow.
            let term = qk * ((le - lq[k]).exp());
            let tw = term * w;
            v += tw;
            d += tw * k as f64;
            s += tw.norm();
        }
        w *= phase;
    }
    (v, d, m, s)
}

/// `ln |q(z)|`, floored away from `-∞` (safe side for upper bounds).
fn log_abs(q: &[Complex64], lq: &[f64], z: Complex64) -> f64 {
    let (v, _, m, _) = eval_scaled(q, lq, z);
    m + v.norm().max(1e-300).ln()
}

/// Bini-style initial points: the upper convex hull of `(k, ln|q_k|)` splits
/// the degree into segments, each contributing points on the circle whose
/// radius is the segment's coefficient-ratio estimate of the root moduli.
fn initial_points(lq: &[f64]) -> Vec<Complex64> {
    let pts: Vec<(usize, f64)> = lq
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_finite())
        .map(|(k, &l)| (k, l))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &(x, y) in &pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            let cross = (x2 - x1) as f64 * (y - y1) - (y2 - y1) * (x - x1) as f64;
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    let degree = lq.len() - 1;
    let mut out = Vec::with_capacity(degree);
    for seg in hull.windows(2) {
        let (k0, l0) = seg[0];
        let (k1, l1) = seg[1];
        let n = k1 - k0;
        let radius = ((l0 - l1) / n as f64).exp();
        for i in 0..n {
            let angle = 2.0 * PI * (i as f64 + 0.5) / n as f64 + 0.377 + 0.25 * k0 as f64;
            out.push(Complex64::from_polar(radius, angle));
        }
    }
    debug_assert_eq!(out.len(), degree);
    out
}

/// All roots of the trimmed factor `q` (the full complex plane; callers
/// filter by radius). Returns polished points, unconverged far points kept.
fn aberth_roots(t: &TrimmedPoly) -> Vec<Complex64> {
    let degree = t.q.len() - 1;
    if degree == 0 {
        return Vec::new();
    }
    let mut z = initial_points(&t.lq);
    let mut done = vec![false; degree];
    for _ in 0..MAX_SWEEPS {
        let mut moved = false;
        for j in 0..degree {
            if done[j] {
                continue;
            }
            let (v, d, _, s) = eval_scaled(&t.q, &t.lq, z[j]);
            if v.norm() <= 1e-16 * s {
                done[j] = true;
                continue;
            }
            let newton = if d.norm() == 0.0 {
                // Stationary point of q: nudge off it deterministically.
                let nudge = Complex64::new(1e-6, 1e-6) * (1.0 + z[j].norm());
                z[j] += nudge;
                moved = true;
                continue;
            } else {
                z[j] * v / d
            };
            let mut repel = Complex64::new(0.0, 0.0);
            for (i, &zi) in z.iter().enumerate() {
                if i != j {
                    let diff = z[j] - zi;
                    if diff.norm() > 1e-300 {
                        repel += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * repel;
            let step = if denom.norm() > 1e-12 { newton / denom } else { newton };
            z[j] -= step;
            if step.norm() > 1e-13 * (1.0 + z[j].norm()) {
                moved = true;
            } else {
                done[j] = true;
            }
        }
        if !moved {
            break;
        }
    }
    z
}

fn newton_polish(t: &TrimmedPoly, mut z: Complex64) -> Complex64 {
    for _ in 0..NEWTON_STEPS {
        let (v, d, _, _) = eval_scaled(&t.q, &t.lq, z);
        if d.norm() == 0.0 {
            break;
        }
        let step = z * v / d;
        z -= step;
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Locate, polish, cluster, and validate the roots of `t` in `|z| ≤ radius`.
/// Returns the kept clusters (origin first) and the dropped multiplicity.
fn roots_in_disk(t: &TrimmedPoly, radius: f64) -> (Vec<RootCluster>, usize) {
    let mut clusters: Vec<RootCluster> = Vec::new();
    if t.origin_multiplicity > 0 {
        clusters.push(RootCluster {
            location: Complex64::new(0.0, 0.0),
            multiplicity: t.origin_multiplicity,
            residual: 0.0,
        });
    }
    let mut inside: Vec<Complex64> = aberth_roots(t)
        .into_iter()
        .filter(|z| z.norm() <= radius * (1.0 + 1e-9))
        .map(|z| newton_polish(t, z))
        .filter(|z| z.norm() <= radius)
        .collect();
    inside.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .expect("finite root coordinates")
    });

    let mut groups: Vec<(Complex64, usize)> = Vec::new();
    for z in inside {
        match groups
            .iter_mut()
            .find(|(mean, _)| (z - *mean).norm() <= CLUSTER_TOL)
        {
            Some((mean, count)) => {
                *mean = (*mean * *count as f64 + z) / (*count as f64 + 1.0);
                *count += 1;
            }
            None => groups.push((z, 1)),
        }
    }

    let mut dropped = 0;
    for (mean, count) in groups {
        let (v, _, _, s) = eval_scaled(&t.q, &t.lq, mean);
        let residual = v.norm() / s;
        if residual <= RESIDUAL_TOL {
            clusters.push(RootCluster { location: mean, multiplicity: count, residual });
        } else {
            dropped += count;
        }
    }
    clusters.sort_by(|a, b| {
        let ka = (a.location.norm(), a.location.arg());
        let kb = (b.location.norm(), b.location.arg());
        ka.partial_cmp(&kb).expect("finite root coordinates")
    });
    (clusters, dropped)
}

/// Zero count of `report` in the closed disk of radius `r`.
pub fn count_within(report: &ZeroReport, r: f64) -> usize {
    report
        .roots
        .iter()
        .filter(|c| c.location.norm() <= r * (1.0 + 1e-12))
        .map(|c| c.multiplicity)
        .sum()
}

/// Find the zeros of `state` in `|z| ≤ radius`, capped to the trusted disk.
pub fn find_zeros(state: &CoeffState, radius: f64) -> Result<ZeroReport> {
    find_zeros_within(state, radius, TRUST_FRACTION)
}

/// [`find_zeros`] with a caller-chosen trust fraction: the search disk is
/// `radius` capped at `fraction` times the truncation's trust radius. The
/// default fraction keeps a safety margin for root polishing; pass `1.0` to
/// sweep the whole trusted disk (roots near its edge are still validated
/// against the usual residual gate).
pub fn find_zeros_within(state: &CoeffState, radius: f64, fraction: f64) -> Result<ZeroReport> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(CoreError::arg(format!("search radius {radius} must be positive")));
    }
    if !(fraction.is_finite() && fraction > 0.0 && fraction <= 1.0) {
        return Err(CoreError::arg(format!(
            "trust fraction {fraction} must lie in (0, 1]"
        )));
    }
    let trust = fock::trust_radius(state.len(), TRUST_TOL);
    let effective_radius = radius.min(fraction * trust);
    let t = trim(state, effective_radius)?;
    let (roots, dropped) = roots_in_disk(&t, effective_radius);
    let total = roots.iter().map(|c| c.multiplicity).sum();
    let report = ZeroReport {
        roots,
        total,
        effective_radius,
        counts: Vec::new(),
        dropped,
    };
    let counts = (1..=8)
        .map(|j| {
            let r = effective_radius * j as f64 / 8.0;
            (r, count_within(&report, r))
        })
        .collect();
    Ok(ZeroReport { counts, ..report })
}

/// Jensen counting certificate: bound the zero count of the profile in
/// `|z| ≤ R/2` by the circle average of `ln |p|` at `|z| = R`, and check it
/// against the directly located count.
pub fn jensen_count_check(state: &CoeffState, radius: f64) -> Result<JensenReport> {
    if !radius.is_finite() || radius <= 0.0 {
        return Err(CoreError::arg(format!("Jensen radius {radius} must be positive")));
    }
    let trust = fock::trust_radius(state.len(), TRUST_TOL);
    if 0.5 * radius > trust {
        return Err(CoreError::arg(format!(
            "counting disk radius {} exceeds the trusted radius {trust:.3}",
            0.5 * radius
        )));
    }
    let t = trim(state, radius)?;
    let max_lq = t.lq.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let center_log_abs = t.lq[0];
    if center_log_abs < max_lq + (1e-100f64).ln() {
        return Err(CoreError::ZeroFinder(format!(
            "centered value e^{center_log_abs:.1} is negligible at this scale; \
             the origin-centered bound is meaningless"
        )));
    }
    let circle_average = (0..JENSEN_POINTS)
        .map(|j| {
            let theta = 2.0 * PI * (j as f64 + 0.5) / JENSEN_POINTS as f64;
            log_abs(&t.q, &t.lq, Complex64::from_polar(radius, theta))
        })
        .sum::<f64>()
        / JENSEN_POINTS as f64;
    let bound =
        t.origin_multiplicity as f64 + (circle_average - center_log_abs) / std::f64::consts::LN_2;

    let (roots, _) = roots_in_disk(&t, 0.5 * radius);
    let direct = roots.iter().map(|c| c.multiplicity).sum::<usize>();
    Ok(JensenReport {
        radius,
        direct,
        bound,
        origin_multiplicity: t.origin_multiplicity,
        center_log_abs,
        circle_average,
        passed: direct as f64 <= bound + 1.0,
    })
}

/// Least-squares slope of `ln N(R)` against `ln R` over shells with `N ≥ 1`.
pub fn growth_fit(counts: &[(f64, usize)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .filter(|&&(r, n)| r.is_finite() && r > 0.0 && n >= 1)
        .map(|&(r, n)| (r.ln(), (n as f64).ln()))
        .collect();
    if pts.len() < 4 {
        return Err(CoreError::InsufficientData(format!(
            "growth fit needs at least 4 populated shells, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(CoreError::arg("growth fit needs at least two distinct radii"));
    }
    Ok(sxy / sxx)
}

/// Synthetic diagnostic profile with planar zero growth: the normalized state
/// whose entire part is `z · Π (1 - z/ω)` over the square-lattice points
/// `ω = spacing·(m + in)`, `0 < |ω| ≤ inclusion_radius`.
pub fn lattice_product_state(
    spacing: f64,
    inclusion_radius: f64,
    len: usize,
) -> Result<CoeffState> {
    if !spacing.is_finite() || spacing <= 0.0 {
        return Err(CoreError::arg(format!("lattice spacing {spacing} must be positive")));
    }
    if !inclusion_radius.is_finite() || inclusion_radius < spacing {
        return Err(CoreError::arg(format!(
            "inclusion radius {inclusion_radius} must reach the first lattice shell"
        )));
    }
    let reach = (inclusion_radius / spacing).floor() as i64;
    let mut poly = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
    for m in -reach..=reach {
        for n in -reach..=reach {
            if m == 0 && n == 0 {
                continue;
            }
            let omega = Complex64::new(m as f64, n as f64) * spacing;
            if omega.norm() > inclusion_radius {
                continue;
            }
            let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
            let scale = -omega.inv();
            for (i, &pi) in poly.iter().enumerate() {
                next[i] += pi;
                next[i + 1] += pi * scale;
            }
            poly = next;
        }
    }
    if poly.len() > len {
        return Err(CoreError::Truncation(format!(
            "product degree {} does not fit below {len} modes",
            poly.len() - 1
        )));
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
    for (k, &pk) in poly.iter().enumerate() {
        coeffs[k] = pk * (0.5 * ln_factorial(k as u64)).exp();
    }
    CoeffState::new(coeffs)?.normalized_to_mass(1.0)
}
