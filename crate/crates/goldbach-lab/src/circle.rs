//! Circle-method machinery: exponential sums over primes, the kernel
//! integrals that model them on the major arcs, the main-term window
//! integral, major/minor arc dissection of the unit circle, the discrete
//! orthogonality identity that recovers exact representation counts, and
//! the grid probe for the L1 norm of the prime exponential sum.
//!
//! Numerical ground rules, applied uniformly:
//! - every phase is reduced mod 1 before exponentiation, and grid phases
//!   use exact integer arithmetic with a shared twiddle table, so no
//!   large-argument trig cancellation can occur;
//! - oscillatory quadrature uses composite Gauss-Legendre panels sized to
//!   at least 8 panels per oscillation period, with a doubling refinement
//!   until the change is below the caller's tolerance;
//! - all reductions are fixed-order pairwise sums, so results are
//!   byte-identical for any worker count.

use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::primes::{log_integral, PrimeSieve};
use crate::util::{gcd, mul_mod1, pairwise_sum_complex, pairwise_sum_f64, reduce_mod1, unit_phase};

/// Hard ceiling on quadrature panel counts; exceeding it means the
/// refinement loop is not converging and we fail loudly instead.
const MAX_PANELS: usize = 1 << 22;

/// Arc-geometry parameters derived from N and the window exponent c.
#[derive(Debug, Clone, Copy)]
pub struct ArcParams {
    pub n: u64,
    /// r = ln N, the abbreviation every bound below is written in.
    pub log_n: f64,
    /// The exponent c in tau = N * r^(-c).
    pub tau_exponent: f64,
    /// Window parameter tau: major arcs have halfwidth 1/tau.
    pub tau: f64,
    /// Major arcs sit at rationals a/q with q < this bound (= r^2).
    pub q_major_bound: f64,
}

impl ArcParams {
    pub fn new(n: u64, c: f64) -> Result<ArcParams> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::domain(format!("N must be even and >= 4, got {n}")));
        }
        if !(c >= 2.0) {
            return Err(Error::domain(format!(
                "window exponent must be at least 2, got {c}"
            )));
        }
        let log_n = (n as f64).ln();
        Ok(ArcParams {
            n,
            log_n,
            tau_exponent: c,
            tau: n as f64 * log_n.powf(-c),
            q_major_bound: log_n * log_n,
        })
    }

    /// Largest admissible major-arc denominator: the biggest integer
    /// strictly below r^2.
    pub fn major_denominator_bound(&self) -> u64 {
        let f = self.q_major_bound.floor();
        let q = if f == self.q_major_bound { f - 1.0 } else { f };
        if q < 1.0 {
            0
        } else {
            q as u64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcClass {
    Major,
    Minor,
}

/// One major arc: the window of halfwidth 1/tau around the reduced
/// rational a/q.
#[derive(Debug, Clone, Copy)]
pub struct ArcLabel {
    pub a: u64,
    pub q: u64,
    pub class: ArcClass,
    pub center: f64,
    pub halfwidth: f64,
}

/// A maximal subinterval of [0,1) not covered by any major arc.
#[derive(Debug, Clone, Copy)]
pub struct GapInterval {
    pub start: f64,
    pub end: f64,
}

/// The full dissection: every major arc, sorted by center, plus the
/// complementary minor-arc gaps.
#[derive(Debug, Clone)]
pub struct Dissection {
    pub major: Vec<ArcLabel>,
    pub minor_gaps: Vec<GapInterval>,
}

impl Dissection {
    /// Total measure of the major arcs; they are pairwise disjoint, so
    /// this is count * 2/tau.
    pub fn major_measure(&self) -> f64 {
        self.major
            .first()
            .map_or(0.0, |arc| self.major.len() as f64 * 2.0 * arc.halfwidth)
    }
}

/// One evaluation of the prime exponential sum.
#[derive(Debug, Clone, Copy)]
pub struct ExpSumSample {
    pub n: u64,
    /// The frequency, reduced to [0, 1).
    pub alpha: f64,
    pub value: Complex64,
}

/// S(alpha) = sum over odd primes 3 <= p <= N of e^(2 pi i alpha p),
/// by direct summation with exactly computed phases.
///
/// Frequencies above 1/2 are evaluated as conjugates of their mirror
/// below 1/2, which makes the reflection symmetry S(1 - alpha) =
/// conj(S(alpha)) hold bit-for-bit whenever 1 - alpha is representable.
pub fn exp_sum_primes(sieve: &PrimeSieve, n: u64, alpha: f64) -> Result<ExpSumSample> {
    if !alpha.is_finite() {
        return Err(Error::domain(format!("frequency must be finite, got {alpha}")));
    }
    if n > sieve.limit() {
        return Err(Error::domain(format!(
            "N={n} exceeds sieve limit {}",
            sieve.limit()
        )));
    }
    let reduced = reduce_mod1(alpha);
    let (eval, conjugate) = if reduced > 0.5 {
        (1.0 - reduced, true)
    } else {
        (reduced, false)
    };
    let terms: Vec<Complex64> = sieve
        .primes()
        .iter()
        .skip(1)
        .take_while(|&&p| p <= n)
        .map(|&p| unit_phase(mul_mod1(eval, p)))
        .collect();
    let sum = pairwise_sum_complex(&terms);
    Ok(ExpSumSample {
        n,
        alpha: reduced,
        value: if conjugate { sum.conj() } else { sum },
    })
}

/// Shared twiddle table e^(2 pi i k / m) for k in 0..m.
fn twiddle_table(m: usize) -> Vec<Complex64> {
    (0..m).map(|k| unit_phase(k as f64 / m as f64)).collect()
}

/// S(m/M) for every m in 0..M, via integer-exact phase indices into one
/// twiddle table. Rows are independent, so parallel evaluation cannot
/// change any value.
pub fn exp_sum_grid(sieve: &PrimeSieve, n: u64, grid_m: u64) -> Result<Vec<Complex64>> {
    if grid_m < 1 {
        return Err(Error::domain("grid size must be at least 1"));
    }
    if n > sieve.limit() {
        return Err(Error::domain(format!(
            "N={n} exceeds sieve limit {}",
            sieve.limit()
        )));
    }
    let m = grid_m as usize;
    let table = twiddle_table(m);
    let odd_primes: Vec<u64> = sieve
        .primes()
        .iter()
        .skip(1)
        .take_while(|&&p| p <= n)
        .copied()
        .collect();
    let values: Vec<Complex64> = (0..grid_m)
        .into_par_iter()
        .map(|row| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &p in &odd_primes {
                acc += table[((row * p) % grid_m) as usize];
            }
            acc
        })
        .collect();
    Ok(values)
}

/// Ordered representation count recovered from the discrete Fourier
/// coefficient (1/M) sum_m S(m/M)^2 e^(-2 pi i m N / M). Exact for
/// M >= 2N because aliased sums p1 + p2 = N + kM fall outside [6, 2N].
pub fn rep_count_by_orthogonality(sieve: &PrimeSieve, n: u64, grid_m: u64) -> Result<u64> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::domain(format!("N must be even and >= 4, got {n}")));
    }
    if grid_m < 2 * n {
        return Err(Error::domain(format!(
            "grid M={grid_m} is below the alias-safety bound 2N={}",
            2 * n
        )));
    }
    let m = grid_m as usize;
    let grid = exp_sum_grid(sieve, n, grid_m)?;
    let table = twiddle_table(m);
    let terms: Vec<Complex64> = (0..grid_m)
        .map(|row| {
            // e^(-2 pi i row N / M) read off the table at the negated index
            let idx = (grid_m - (row * n) % grid_m) % grid_m;
            grid[row as usize] * grid[row as usize] * table[idx as usize]
        })
        .collect();
    let coeff = pairwise_sum_complex(&terms) / grid_m as f64;
    let nearest = coeff.re.round();
    let residue = (coeff.re - nearest).abs().max(coeff.im.abs());
    if residue > 1e-3 {
        return Err(Error::numerical(format!(
            "orthogonality coefficient {coeff} is {residue:.3e} from an integer"
        )));
    }
    Ok(nearest.max(0.0) as u64)
}

/// Riemann estimate of the L1 norm integral of |S(alpha)| over [0,1) on a
/// uniform grid. The grid must oversample the sum's oscillation (>= 4N).
pub fn exp_sum_abs_integral(sieve: &PrimeSieve, n: u64, grid_m: u64) -> Result<f64> {
    if grid_m < 4 * n {
        return Err(Error::domain(format!(
            "grid {grid_m} is below the oversampling bound 4N={}",
            4 * n
        )));
    }
    let grid = exp_sum_grid(sieve, n, grid_m)?;
    let magnitudes: Vec<f64> = grid.iter().map(|v| v.norm()).collect();
    Ok(pairwise_sum_f64(&magnitudes) / grid_m as f64)
}

/// Integral of e^(2 pi i z x) / ln N over x in [2, N]: the constant-
/// denominator kernel, in closed form.
pub fn const_kernel_integral(n: u64, z: f64) -> Result<Complex64> {
    if n < 3 {
        return Err(Error::domain(format!("N must be at least 3, got {n}")));
    }
    let r = (n as f64).ln();
    if z == 0.0 {
        return Ok(Complex64::new((n as f64 - 2.0) / r, 0.0));
    }
    let top = unit_phase(reduce_mod1(z * n as f64)) - unit_phase(reduce_mod1(2.0 * z));
    let denom = Complex64::new(0.0, std::f64::consts::TAU * z * r);
    Ok(top / denom)
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton
/// iteration on the Legendre recurrence from Chebyshev initial guesses.
fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let n = order as f64;
    for i in 0..order {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        for _ in 0..64 {
            let (p, dp) = legendre_with_derivative(order, x);
            let step = p / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(order, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Legendre polynomial P_n(x) and its derivative via the three-term
/// recurrence.
fn legendre_with_derivative(order: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = x;
    for k in 2..=order {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * cur - (kf - 1.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    let dp = order as f64 * (x * cur - prev) / (x * x - 1.0);
    (cur, dp)
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static GL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    GL.get_or_init(|| gauss_legendre(8))
}

/// Panel mesh for the log-kernel integral over [2, N]. Widths grow
/// geometrically away from x = 2 (the derivatives of 1/ln x blow up
/// factorially there, so uniform panels would waste the whole mesh on
/// that one endpoint) and are capped at 1/(8|z|) so every oscillation
/// period keeps at least eight panels. `splits` halves each base panel
/// that many times for refinement.
fn log_kernel_mesh(n: u64, z: f64, splits: u32) -> Result<Vec<(f64, f64)>> {
    const HEAD_WIDTH: f64 = 0.25;
    const HEAD_GROWTH: f64 = 1.25;
    let b = n as f64;
    let cap = 1.0 / (8.0 * z.abs());
    let mut mesh: Vec<(f64, f64)> = Vec::new();
    let sub = 1usize << splits;
    let mut x = 2.0;
    let mut w = HEAD_WIDTH;
    while x < b {
        let width = w.min(cap).min(b - x);
        let step = width / sub as f64;
        for i in 0..sub {
            let lo = x + i as f64 * step;
            let hi = if i + 1 == sub { x + width } else { lo + step };
            mesh.push((lo, hi));
        }
        if mesh.len() > MAX_PANELS {
            return Err(Error::numerical(format!(
                "oscillation at z={z:.3e} needs more than {MAX_PANELS} panels"
            )));
        }
        x += width;
        w *= HEAD_GROWTH;
    }
    Ok(mesh)
}

/// One composite Gauss-Legendre pass over a fixed panel mesh.
fn log_kernel_pass(z: f64, mesh: &[(f64, f64)]) -> Complex64 {
    let (nodes, weights) = gl8();
    let per_panel: Vec<Complex64> = mesh
        .par_iter()
        .map(|&(lo, hi)| {
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let mut acc = Complex64::new(0.0, 0.0);
            for (&x, &w) in nodes.iter().zip(weights.iter()) {
                let t = mid + half * x;
                acc += w * unit_phase(reduce_mod1(z * t)) / t.ln();
            }
            acc * half
        })
        .collect();
    pairwise_sum_complex(&per_panel)
}

/// Integral of e^(2 pi i z x) / ln x over [2, N]: composite Gauss-Legendre
/// on a graded mesh with panel width at most 1/(8|z|) (8+ panels per
/// oscillation period), then mesh halving until successive passes agree
/// within tol/2.
pub fn log_kernel_integral(n: u64, z: f64, tol: f64) -> Result<Complex64> {
    if n < 3 {
        return Err(Error::domain(format!("N must be at least 3, got {n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    if z == 0.0 {
        return Ok(Complex64::new(log_integral(n as f64, tol)?, 0.0));
    }
    let mut prev = log_kernel_pass(z, &log_kernel_mesh(n, z, 0)?);
    for splits in 1..=22u32 {
        let cur = log_kernel_pass(z, &log_kernel_mesh(n, z, splits)?);
        if (cur - prev).norm() <= 0.5 * tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::numerical(format!(
        "kernel integral did not reach tolerance {tol:.3e} at z={z:.3e} within {MAX_PANELS} panels"
    )))
}

/// The piecewise comparison envelope for the log-kernel integral:
/// N/r inside |z| <= 1/N, then 1/(|z| r) beyond.
pub fn kernel_envelope(params: &ArcParams, z: f64) -> f64 {
    let n = params.n as f64;
    if z.abs() <= 1.0 / n {
        n / params.log_n
    } else {
        1.0 / (z.abs() * params.log_n)
    }
}

/// The stated minor-arc envelope N r^(eps-1) q^(-1/2) max(1, delta)^(1/2),
/// with delta = |z| N.
pub fn minor_arc_envelope(params: &ArcParams, q: u64, delta: f64, eps: f64) -> Result<f64> {
    if q < 1 {
        return Err(Error::domain("denominator q must be at least 1"));
    }
    if !(delta >= 0.0) {
        return Err(Error::domain(format!("delta must be nonnegative, got {delta}")));
    }
    let base = params.n as f64 * params.log_n.powf(eps - 1.0) / (q as f64).sqrt();
    Ok(if delta <= 1.0 { base } else { base * delta.sqrt() })
}

/// One composite pass for the main-term window integral at a fixed panel
/// count over z in [-1/tau, 1/tau].
fn main_term_pass(n: u64, halfwidth: f64, panels: usize, tol_inner: f64) -> Result<Complex64> {
    let (nodes, weights) = gl8();
    let h = 2.0 * halfwidth / panels as f64;
    let per_panel: Vec<Result<Complex64>> = (0..panels)
        .into_par_iter()
        .map(|i| {
            let mid = -halfwidth + (i as f64 + 0.5) * h;
            let mut acc = Complex64::new(0.0, 0.0);
            for (&x, &w) in nodes.iter().zip(weights.iter()) {
                let z = mid + 0.5 * h * x;
                let j = log_kernel_integral(n, z, tol_inner)?;
                let phase = unit_phase(reduce_mod1(z * n as f64)).conj();
                acc += w * j * j * phase;
            }
            Ok(acc * (0.5 * h))
        })
        .collect();
    let vals = per_panel.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum_complex(&vals))
}

/// The main-term integral: integral over z in [-1/tau, 1/tau] of
/// J(z)^2 e^(-2 pi i z N) dz with tau = N r^(-c). The exact value is real,
/// so the imaginary part of the result is a quadrature-quality
/// diagnostic. Panels track the e^(-2 pi i z N) oscillation (period 1/N)
/// at 8+ panels per period and are doubled until agreement within tol.
pub fn main_term_integral(n: u64, c: f64, tol: f64) -> Result<Complex64> {
    if n < 100 {
        return Err(Error::domain(format!("N must be at least 100, got {n}")));
    }
    if !(c >= 2.0) {
        return Err(Error::domain(format!(
            "window exponent must be at least 2, got {c}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let nf = n as f64;
    let r = nf.ln();
    let tau = nf * r.powf(-c);
    let halfwidth = 1.0 / tau;
    // Error budget: the inner kernel tolerance enters the outer integral
    // with weight 2 |J| <= 2 Li(N) over a window of length 2/tau.
    let li = log_integral(nf, tol.min(1e-6))?;
    let tol_inner = tol / (32.0 * li * 2.0 * halfwidth);
    let mut panels = ((2.0 * halfwidth) * 8.0 * nf).ceil().max(16.0) as usize;
    if panels > MAX_PANELS {
        return Err(Error::numerical(format!(
            "window needs {panels} panels, over the {MAX_PANELS} cap"
        )));
    }
    let mut prev = main_term_pass(n, halfwidth, panels, tol_inner)?;
    while panels <= MAX_PANELS / 2 {
        panels *= 2;
        let cur = main_term_pass(n, halfwidth, panels, tol_inner)?;
        if (cur - prev).norm() <= tol {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::numerical(format!(
        "window integral did not reach tolerance {tol:.3e} within {MAX_PANELS} panels"
    )))
}

/// All reduced rationals a/q with q below the major bound, sorted by
/// value using exact integer cross-multiplication.
fn major_centers(q_max: u64) -> Vec<(u64, u64)> {
    let mut centers = Vec::new();
    centers.push((0u64, 1u64));
    for q in 2..=q_max {
        for a in 1..q {
            if gcd(a, q) == 1 {
                centers.push((a, q));
            }
        }
    }
    centers.sort_unstable_by(|&(a1, q1), &(a2, q2)| {
        (a1 as u128 * q2 as u128).cmp(&(a2 as u128 * q1 as u128))
    });
    centers
}

/// Dissect [0,1) into major arcs (halfwidth 1/tau around every reduced
/// a/q with q < r^2) and the complementary minor gaps. Overlapping major
/// arcs are an explicit error naming the colliding pair: the construction
/// is only valid once N is large enough.
pub fn dissect_arcs(params: &ArcParams) -> Result<Dissection> {
    if params.q_major_bound < 1.0 {
        return Err(Error::domain(format!(
            "major denominator bound {} is below 1",
            params.q_major_bound
        )));
    }
    let q_max = params.major_denominator_bound();
    if q_max == 0 {
        return Err(Error::domain(
            "no admissible major-arc denominators below r^2",
        ));
    }
    let centers = major_centers(q_max);
    let halfwidth = 1.0 / params.tau;
    // Consecutive rational centers a1/q1 < a2/q2 collide when their gap
    // k/(q1 q2), k = a2 q1 - a1 q2, is under the full arc width 2/tau.
    // The wraparound pair compares the last center against 0/1 shifted
    // by one full turn.
    let mut check = centers.clone();
    check.push((centers[0].0 + centers[0].1, centers[0].1));
    for pair in check.windows(2) {
        let (a1, q1) = pair[0];
        let (a2, q2) = pair[1];
        let k = (a2 as u128 * q1 as u128 - a1 as u128 * q2 as u128) as f64;
        if k * params.tau < 2.0 * q1 as f64 * q2 as f64 {
            return Err(Error::ArcOverlap {
                a1,
                q1,
                a2: a2 % q2.max(1),
                q2,
                width: 2.0 * halfwidth,
            });
        }
    }
    let major: Vec<ArcLabel> = centers
        .iter()
        .map(|&(a, q)| ArcLabel {
            a,
            q,
            class: ArcClass::Major,
            center: a as f64 / q as f64,
            halfwidth,
        })
        .collect();
    let mut minor_gaps = Vec::with_capacity(major.len());
    for w in major.windows(2) {
        let start = w[0].center + halfwidth;
        let end = w[1].center - halfwidth;
        if end > start {
            minor_gaps.push(GapInterval { start, end });
        }
    }
    if let Some(last) = major.last() {
        let start = last.center + halfwidth;
        let end = 1.0 - halfwidth;
        if end > start {
            minor_gaps.push(GapInterval { start, end });
        }
    }
    Ok(Dissection { major, minor_gaps })
}

/// Best rational approximation a/q to alpha (reduced mod 1) with q at
/// most q_bound: the last continued-fraction convergent that fits, or
/// the deepest admissible semiconvergent of the following step when that
/// lands closer. Convergents alone can lose badly (0.0101 with bound 84
/// has convergents 0/1 and 1/99 only, yet 1/84 is five times closer).
pub fn best_rational_approx(alpha: f64, q_bound: u64) -> (u64, u64) {
    let x = reduce_mod1(alpha);
    let (mut a_prev, mut q_prev) = (1u64, 0u64);
    let (mut a_cur, mut q_cur) = (0u64, 1u64); // convergent 0/1
    let mut semi: Option<(u64, u64)> = None;
    let mut frac = x;
    for _ in 0..64 {
        if frac.abs() < 1e-18 {
            break;
        }
        frac = 1.0 / frac;
        let digit = frac.floor();
        if digit >= u64::MAX as f64 {
            break;
        }
        let d = digit as u64;
        let a_next = match d.checked_mul(a_cur).and_then(|v| v.checked_add(a_prev)) {
            Some(v) => v,
            None => break,
        };
        let q_next = match d.checked_mul(q_cur).and_then(|v| v.checked_add(q_prev)) {
            Some(v) => v,
            None => break,
        };
        if q_next > q_bound {
            // Deepest mediant (a_prev + t a_cur) / (q_prev + t q_cur)
            // still within the bound; distance to x improves with t, so
            // only the largest t can compete with the last convergent.
            let t = (q_bound - q_prev) / q_cur;
            if t >= 1 {
                semi = Some((a_prev + t * a_cur, q_prev + t * q_cur));
            }
            break;
        }
        a_prev = a_cur;
        q_prev = q_cur;
        a_cur = a_next;
        q_cur = q_next;
        frac -= digit;
    }
    if let Some((a_s, q_s)) = semi {
        let d_semi = (x - a_s as f64 / q_s as f64).abs();
        let d_conv = (x - a_cur as f64 / q_cur as f64).abs();
        if d_semi < d_conv {
            return (a_s, q_s);
        }
    }
    (a_cur, q_cur)
}

/// Pointwise arc classification: Major when some reduced a/q with
/// q < r^2 lies within 1/tau of alpha. Works even at N too small for the
/// full dissection to be disjoint.
pub fn classify_alpha(params: &ArcParams, alpha: f64) -> (ArcClass, u64, u64) {
    let x = reduce_mod1(alpha);
    let q_max = params.major_denominator_bound().max(1);
    let (a, q) = best_rational_approx(x, q_max);
    let dist = (x - a as f64 / q as f64).abs();
    // The convergent 1/1 is the 0/1 arc seen across the wraparound seam.
    let (a, q) = if a == q { (0, 1) } else { (a, q) };
    if dist <= 1.0 / params.tau {
        (ArcClass::Major, a, q)
    } else {
        (ArcClass::Minor, a, q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goldbach::count_one;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sieve() -> &'static PrimeSieve {
        static S: OnceLock<PrimeSieve> = OnceLock::new();
        S.get_or_init(|| PrimeSieve::build(1_000_000).unwrap())
    }

    #[test]
    fn exp_sum_trivial_frequencies() {
        let s = sieve();
        let at0 = exp_sum_primes(s, 10, 0.0).unwrap();
        assert_eq!(at0.value, Complex64::new(3.0, 0.0));
        let at_half = exp_sum_primes(s, 10, 0.5).unwrap();
        assert!((at_half.value - Complex64::new(-3.0, 0.0)).norm() < 1e-12);
        let at_third = exp_sum_primes(s, 10, 1.0 / 3.0).unwrap();
        assert!(at_third.value.norm() < 1e-12);
    }

    #[test]
    fn exp_sum_domain_checks() {
        let s = sieve();
        assert!(exp_sum_primes(s, 2_000_000, 0.0).is_err());
        assert!(exp_sum_primes(s, 100, f64::NAN).is_err());
        assert!(exp_sum_primes(s, 100, f64::INFINITY).is_err());
        // Reduction mod 1: shifting by integers changes nothing.
        let a = exp_sum_primes(s, 1000, 0.3125).unwrap();
        let b = exp_sum_primes(s, 1000, 7.3125).unwrap();
        assert_eq!(a.value, b.value);
        assert_eq!(b.alpha, 0.3125);
    }

    #[test]
    fn exp_sum_triangle_inequality() {
        let s = sieve();
        let n = 10_000;
        let bound = exp_sum_primes(s, n, 0.0).unwrap().value.re;
        assert_eq!(bound, (s.prime_count(n).unwrap() - 1) as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(0x7141);
        for _ in 0..50 {
            let alpha: f64 = rng.gen();
            let v = exp_sum_primes(s, n, alpha).unwrap().value.norm();
            assert!(v <= bound + 1e-9, "|S({alpha})| = {v} > {bound}");
        }
    }

    #[test]
    fn exp_sum_reflection_symmetry() {
        let s = sieve();
        let mut rng = ChaCha8Rng::seed_from_u64(0xF1E1D);
        for n in [1000u64, 10_000] {
            for _ in 0..40 {
                // Frequencies on a dyadic grid so that 1 - alpha is
                // exactly representable; the symmetry is then bit-exact.
                let alpha = rng.gen_range(1..(1u64 << 30)) as f64 / (1u64 << 30) as f64;
                let direct = exp_sum_primes(s, n, alpha).unwrap().value;
                let mirrored = exp_sum_primes(s, n, 1.0 - alpha).unwrap().value;
                assert!(
                    (mirrored - direct.conj()).norm() < 1e-12,
                    "N={n} alpha={alpha}"
                );
            }
        }
    }

    #[test]
    fn grid_matches_single_evaluations() {
        let s = sieve();
        let n = 500;
        let m = 64;
        let grid = exp_sum_grid(s, n, m).unwrap();
        for row in 0..m {
            let single = exp_sum_primes(s, n, row as f64 / m as f64).unwrap().value;
            assert!(
                (grid[row as usize] - single).norm() < 1e-9,
                "row {row}: grid {} vs single {}",
                grid[row as usize],
                single
            );
        }
    }

    #[test]
    fn orthogonality_recovers_exact_counts() {
        let s = sieve();
        assert_eq!(rep_count_by_orthogonality(s, 10, 32).unwrap(), 3);
        assert_eq!(rep_count_by_orthogonality(s, 6, 16).unwrap(), 1);
        let expected = count_one(s, 1000).unwrap().ordered;
        assert_eq!(rep_count_by_orthogonality(s, 1000, 2048).unwrap(), expected);
        // Non-power-of-two grids are fine too.
        assert_eq!(
            rep_count_by_orthogonality(s, 100, 214).unwrap(),
            count_one(s, 100).unwrap().ordered
        );
        assert!(rep_count_by_orthogonality(s, 100, 199).is_err());
    }

    #[test]
    fn const_kernel_closed_form_and_bound() {
        let n = 10_000u64;
        let r = (n as f64).ln();
        let at0 = const_kernel_integral(n, 0.0).unwrap();
        assert_eq!(at0, Complex64::new((n as f64 - 2.0) / r, 0.0));
        for z in [1e-6, 1e-4, 1e-2, -1e-3] {
            let v = const_kernel_integral(n, z).unwrap();
            assert!(
                v.norm() <= 1.0 / (std::f64::consts::PI * z.abs() * r) + 1e-12,
                "z={z}"
            );
        }
        assert!(const_kernel_integral(2, 0.1).is_err());
    }

    #[test]
    fn const_kernel_matches_riemann_sum() {
        let n = 10_000u64;
        let r = (n as f64).ln();
        for &z in &[1e-6, -1e-6, 1e-4, -1e-4, 1e-2, -1e-2] {
            let closed = const_kernel_integral(n, z).unwrap();
            let steps = 1 << 21;
            let h = (n as f64 - 2.0) / steps as f64;
            let terms: Vec<Complex64> = (0..steps)
                .map(|i| {
                    let x = 2.0 + (i as f64 + 0.5) * h;
                    unit_phase(reduce_mod1(z * x)) / r * h
                })
                .collect();
            let riemann = pairwise_sum_complex(&terms);
            let rel = (closed - riemann).norm() / closed.norm();
            assert!(rel < 1e-6, "z={z}: rel err {rel}");
        }
    }

    #[test]
    fn gauss_legendre_nodes_integrate_polynomials_exactly() {
        let (nodes, weights) = gl8();
        assert_eq!(nodes.len(), 8);
        let wsum: f64 = weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        // GL-8 is exact through degree 15.
        for k in 0..=15usize {
            let got: f64 = nodes
                .iter()
                .zip(weights)
                .map(|(x, w)| w * x.powi(k as i32))
                .sum();
            let want = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((got - want).abs() < 1e-13, "degree {k}: {got} vs {want}");
        }
        // Symmetry of the rule.
        for i in 0..4 {
            assert!((nodes[i] + nodes[7 - i]).abs() < 1e-14);
            assert!((weights[i] - weights[7 - i]).abs() < 1e-14);
        }
    }

    #[test]
    fn log_kernel_at_zero_is_li() {
        let li = log_integral(10_000.0, 1e-9).unwrap();
        let j0 = log_kernel_integral(10_000, 0.0, 1e-9).unwrap();
        assert_eq!(j0, Complex64::new(li, 0.0));
        assert!(log_kernel_integral(10_000, 0.1, 0.0).is_err());
        assert!(log_kernel_integral(2, 0.1, 1e-6).is_err());
    }

    #[test]
    fn log_kernel_bounded_by_li_and_conjugate_symmetric() {
        let n = 10_000u64;
        let tol = 1e-8;
        let li = log_integral(n as f64, 1e-10).unwrap();
        for &z in &[1e-5, 1e-4, 1e-3, 1e-2] {
            let plus = log_kernel_integral(n, z, tol).unwrap();
            let minus = log_kernel_integral(n, -z, tol).unwrap();
            assert!(plus.norm() <= li + tol, "z={z}");
            assert!(
                (minus - plus.conj()).norm() <= 2.0 * tol,
                "conjugate symmetry at z={z}"
            );
        }
    }

    #[test]
    fn log_kernel_refinement_is_stable() {
        // Recompute with the panel count doubled once more by tightening
        // the tolerance; both must agree within the looser 2 tol.
        let n = 10_000u64;
        let z = 1.0 / n as f64;
        let tol = 1e-8;
        let coarse = log_kernel_integral(n, z, tol).unwrap();
        let fine = log_kernel_integral(n, z, tol * 1e-3).unwrap();
        assert!((coarse - fine).norm() <= 2.0 * tol);
    }

    #[test]
    fn envelope_branches_and_continuity() {
        let params = ArcParams::new(10_000, 2.0).unwrap();
        let n = 10_000.0f64;
        let r = n.ln();
        assert_eq!(kernel_envelope(&params, 0.0), n / r);
        assert!((kernel_envelope(&params, 2.0 / n) - n / (2.0 * r)).abs() < 1e-12);
        let inner = kernel_envelope(&params, 1.0 / n);
        let outer = kernel_envelope(&params, 1.0 / n + 1e-12);
        assert!((inner - outer).abs() < 1e-3);
    }

    #[test]
    fn minor_envelope_branches_agree_at_one() {
        let params = ArcParams::new(10_000, 2.0).unwrap();
        let low = minor_arc_envelope(&params, 7, 1.0, 0.1).unwrap();
        let high = minor_arc_envelope(&params, 7, 1.0 + 1e-15, 0.1).unwrap();
        assert!((low - high).abs() < 1e-9 * low);
        let plug = minor_arc_envelope(&params, 1, 0.0, 0.0).unwrap();
        let n = 10_000.0f64;
        assert!((plug - n / n.ln()).abs() < 1e-9);
        assert!(minor_arc_envelope(&params, 0, 0.5, 0.0).is_err());
        assert!(minor_arc_envelope(&params, 1, -0.5, 0.0).is_err());
    }

    #[test]
    fn main_term_window_sanity_at_small_n() {
        // Small-N smoke test: the exact value is real, so Im is pure
        // quadrature noise; Re should be within the coarse asymptotic
        // neighborhood of N/r^2.
        let n = 400u64;
        let tol = 1e-4;
        let val = main_term_integral(n, 2.0, tol).unwrap();
        assert!(val.im.abs() < 10.0 * tol, "Im = {}", val.im);
        let r = (n as f64).ln();
        let ratio = val.re * r * r / n as f64;
        assert!((ratio - 1.0).abs() < 0.6, "ratio = {ratio}");
        assert!(main_term_integral(50, 2.0, tol).is_err());
        assert!(main_term_integral(400, 1.5, tol).is_err());
        assert!(main_term_integral(400, 2.0, -1.0).is_err());
    }

    #[test]
    fn arc_params_and_denominator_bound() {
        // ln N = 10 at N around e^10, so q runs up to 99.
        let params = ArcParams::new(22026, 7.0).unwrap();
        assert!((params.log_n - 10.0).abs() < 1e-4);
        assert_eq!(params.major_denominator_bound(), 99);
        assert!(ArcParams::new(22026, 1.0).is_err());
        assert!(ArcParams::new(21, 7.0).is_err());
        assert!(ArcParams::new(2, 7.0).is_err());
    }

    /// Totient by plain trial division, used as the arc-count oracle.
    fn phi_direct(q: u64) -> u64 {
        (1..=q).filter(|&a| gcd(a, q) == 1).count() as u64
    }

    #[test]
    fn dissection_counts_and_disjointness() {
        let params = ArcParams::new(1_000_000_000, 2.0).unwrap();
        let d = dissect_arcs(&params).unwrap();
        let q_max = params.major_denominator_bound();
        let expected: u64 = (1..=q_max).map(phi_direct).sum();
        assert_eq!(d.major.len() as u64, expected);
        assert!(d.major_measure() < 1.0);
        // Sorted, reduced, and pairwise disjoint.
        for w in d.major.windows(2) {
            assert!(w[0].center < w[1].center);
            assert!(w[0].center + w[0].halfwidth < w[1].center - w[1].halfwidth);
        }
        for arc in &d.major {
            assert_eq!(gcd(arc.a.max(1), arc.q), 1);
            assert!(arc.a < arc.q || (arc.a == 0 && arc.q == 1));
        }
        // Gaps interleave the arcs and stay inside (0, 1).
        for gap in &d.minor_gaps {
            assert!(gap.start < gap.end);
            assert!(gap.start > 0.0 && gap.end < 1.0);
        }
    }

    #[test]
    fn dissection_overlap_is_an_explicit_error() {
        // At this scale the arcs are far wider than the Farey spacing.
        let params = ArcParams::new(1_000_000, 7.0).unwrap();
        match dissect_arcs(&params) {
            Err(Error::ArcOverlap { q1, q2, .. }) => {
                assert!(q1 >= 1 && q2 >= 1);
            }
            other => panic!("expected overlap error, got {other:?}"),
        }
    }

    #[test]
    fn huge_n_dissection_has_small_measure() {
        let params = ArcParams::new(1_800_000_000_000_000_000, 7.0).unwrap();
        let d = dissect_arcs(&params).unwrap();
        let measure = d.major_measure();
        assert!(measure < 1.0, "measure = {measure}");
        // Major plus minor measures tile the circle.
        let minor: f64 = d.minor_gaps.iter().map(|g| g.end - g.start).sum();
        assert!((measure + minor - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rational_approximation_finds_convergents() {
        assert_eq!(best_rational_approx(0.3, 10), (3, 10));
        assert_eq!(best_rational_approx(1.0 / 3.0, 50), (1, 3));
        // pi - 3 has the famous convergent 1/7.
        let x = std::f64::consts::PI - 3.0;
        assert_eq!(best_rational_approx(x, 10), (1, 7));
        assert_eq!(best_rational_approx(x, 200), (16, 113));
        assert_eq!(best_rational_approx(0.0, 10), (0, 1));
        // Semiconvergents matter: the convergents of 0.0101 jump straight
        // from 0/1 to 1/99, but 1/84 is admissible and far closer.
        assert_eq!(best_rational_approx(0.0101, 84), (1, 84));
        // Exhaustive cross-check at small bounds: never farther than the
        // true closest admissible fraction.
        for k in 0..200u64 {
            let x = (k as f64 * 0.017_320_508) % 1.0;
            for bound in [1u64, 2, 5, 12, 30] {
                let (a, q) = best_rational_approx(x, bound);
                assert!(q >= 1 && q <= bound && a <= q);
                let got = (x - a as f64 / q as f64).abs();
                let mut best = f64::INFINITY;
                for qq in 1..=bound {
                    for aa in 0..=qq {
                        best = best.min((x - aa as f64 / qq as f64).abs());
                    }
                }
                assert!(
                    got <= best + 1e-15,
                    "x={x} bound={bound}: got {a}/{q} at {got:.3e}, best {best:.3e}"
                );
            }
        }
    }

    #[test]
    fn pointwise_classification() {
        let params = ArcParams::new(1_000_000_000, 2.0).unwrap();
        // Dead on a low-denominator rational: major.
        let (class, a, q) = classify_alpha(&params, 0.5);
        assert_eq!(class, ArcClass::Major);
        assert_eq!((a, q), (1, 2));
        // Golden-ratio-like points are as far from rationals as possible.
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        let (class, _, q) = classify_alpha(&params, phi);
        assert_eq!(class, ArcClass::Minor);
        assert!(q >= 1);
        // Near zero: the wraparound seam belongs to the 0/1 arc.
        let (class, a, q) = classify_alpha(&params, 1.0 - 1e-12);
        assert_eq!(class, ArcClass::Major);
        assert_eq!((a, q), (0, 1));
    }

    #[test]
    fn abs_integral_probe_grid_checks() {
        let s = sieve();
        assert!(exp_sum_abs_integral(s, 100, 399).is_err());
        let est = exp_sum_abs_integral(s, 100, 1024).unwrap();
        assert!(est > 0.0);
        // Grid-doubling stability at the scales the front end reports.
        let g1 = exp_sum_abs_integral(s, 100, 4096).unwrap();
        let g2 = exp_sum_abs_integral(s, 100, 8192).unwrap();
        assert!(
            (g2 - g1).abs() / g1 < 0.01,
            "unstable: {g1} vs {g2}"
        );
    }
}
