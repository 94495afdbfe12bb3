//! Small numeric helpers shared across modules: integer gcd/isqrt, exact
//! phase reduction, and order-fixed pairwise summation for reproducible
//! parallel reductions.

use num_complex::Complex64;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Floor of the square root, exact for all u64.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    // The float estimate can be off by one in either direction.
    while r.checked_mul(r).map_or(true, |rr| rr > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).map_or(false, |rr| rr <= n) {
        r += 1;
    }
    r
}

/// e^{2*pi*i*t}.
pub fn unit_phase(t: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * t).sin_cos();
    Complex64::new(c, s)
}

/// (alpha * k) mod 1 without losing the fractional part to the large
/// integer component. alpha is split Veltkamp-style so both partial
/// products are exact whenever k < 2^26; beyond that the phase degrades
/// gracefully (absolute error ~ 2^-25 per doubling of k).
pub fn mul_mod1(alpha: f64, k: u64) -> f64 {
    const SPLIT: f64 = 134_217_729.0; // 2^27 + 1
    let c = SPLIT * alpha;
    let hi = c - (c - alpha);
    let lo = alpha - hi;
    let k = k as f64;
    let t = (hi * k).fract() + (lo * k).fract();
    t.fract()
}

/// Reduce alpha into [0, 1).
pub fn reduce_mod1(alpha: f64) -> f64 {
    let t = alpha.rem_euclid(1.0);
    // rem_euclid can return exactly 1.0 for tiny negative inputs.
    if t >= 1.0 {
        0.0
    } else {
        t
    }
}

/// Next power of two at or above n.
pub fn next_pow2(n: u64) -> u64 {
    n.next_power_of_two()
}

/// Pairwise (cascade) sum in a fixed order: the result depends only on the
/// slice contents, never on how the values were produced.
pub fn pairwise_sum_f64(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum_f64(&v[..mid]) + pairwise_sum_f64(&v[mid..])
}

/// Complex counterpart of [`pairwise_sum_f64`].
pub fn pairwise_sum_complex(v: &[Complex64]) -> Complex64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum_complex(&v[..mid]) + pairwise_sum_complex(&v[mid..])
}
