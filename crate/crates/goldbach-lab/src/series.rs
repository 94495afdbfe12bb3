//! The singular series in all the forms this laboratory compares: a
//! modulus-indexed sum of multiplicative coefficients, the matching Euler
//! product, two closed-form products, and the classical twin-prime-constant
//! form used as the external reference. All variants are truncated with
//! the truncation recorded, so convergence is inspectable rather than
//! assumed.
//!
//! The coefficient G(q) = mu(q) c_q(N) / phi(q)^2 carries a sign ambiguity
//! at q = 2: taken literally it cancels the even-N main term, while the
//! square of the major-arc approximation forces mu(q)^2. Both modes are
//! first-class here ([`MuMode`]); nothing downstream hard-codes one.

use std::fmt;

use crate::error::{Error, Result};
use crate::primes::{euler_phi, mobius, Factorization, PrimeSieve};
use crate::util::{gcd, pairwise_sum_f64};

/// Above this many product factors, accumulation moves to log space.
const LOG_SPACE_FACTOR_LIMIT: usize = 10_000;

/// Interpretation of the Mobius factor in the series coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuMode {
    /// mu(q) once: the coefficient exactly as the closed sum is usually
    /// displayed. Collapses to 0 at p = 2 for even N.
    AsWritten,
    /// mu(q)^2: the coefficient the squared major-arc term actually
    /// produces; recovers the classical series.
    Squared,
}

impl fmt::Display for MuMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MuMode::AsWritten => write!(f, "MU_AS_WRITTEN"),
            MuMode::Squared => write!(f, "MU_SQUARED"),
        }
    }
}

/// Which formula produced a singular-series value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesVariant {
    /// 3 * prod_{p <= P, p not | N}(1 + 1/p^2) * prod_{p | N}(1 - 2/(p^2+1)).
    PaperClosed,
    /// prod_{p | N} p/(p-1).
    PaperDivisor,
    /// Truncated sum over moduli q of the series coefficient.
    SumOverQ(MuMode),
    /// Truncated Euler product prod_{p <= P}(1 + G(p)).
    ProductOverP(MuMode),
    /// 2 C2(P) * prod_{p | N, p > 2} (p-1)/(p-2).
    HardyLittlewood,
}

impl fmt::Display for SeriesVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeriesVariant::PaperClosed => write!(f, "PAPER_CLOSED"),
            SeriesVariant::PaperDivisor => write!(f, "PAPER_DIVISOR"),
            SeriesVariant::SumOverQ(m) => write!(f, "SUM_OVER_Q_{m}"),
            SeriesVariant::ProductOverP(m) => write!(f, "PRODUCT_OVER_P_{m}"),
            SeriesVariant::HardyLittlewood => write!(f, "HARDY_LITTLEWOOD"),
        }
    }
}

/// One truncated singular-series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularSeriesValue {
    pub n: u64,
    pub variant: SeriesVariant,
    pub value: f64,
    /// Prime bound P or modulus bound Q the evaluation stopped at; for the
    /// divisor product (which is finite), the largest prime divisor used.
    pub truncation: u64,
    /// Magnitude of the last included term (sums) or of the last factor's
    /// offset from 1 (products): a cheap convergence indicator.
    pub tail_note: f64,
}

/// Exact Ramanujan sum c_q(N) via the multiplicative closed form
/// mu(q/g) phi(q) / phi(q/g) with g = gcd(q, N). phi(q/g) divides phi(q)
/// for q/g | q, so the division is exact in integers.
pub fn ramanujan_sum(sieve: &PrimeSieve, q: u64, n: u64) -> Result<i64> {
    if q < 1 {
        return Err(Error::domain("modulus q must be at least 1"));
    }
    let g = gcd(q, n);
    let d = q / g;
    let fd = sieve.factorize(d)?;
    let mu_d = mobius(&fd);
    if mu_d == 0 {
        return Ok(0);
    }
    let phi_q = euler_phi(&sieve.factorize(q)?);
    let phi_d = euler_phi(&fd);
    Ok(mu_d * (phi_q / phi_d) as i64)
}

/// The series coefficient at modulus q: c_q(N)/phi(q)^2 weighted by mu(q)
/// or mu(q)^2 according to mode. Exactly 0 when q is not squarefree.
pub fn series_coefficient(sieve: &PrimeSieve, q: u64, n: u64, mode: MuMode) -> Result<f64> {
    if q < 1 {
        return Err(Error::domain("modulus q must be at least 1"));
    }
    let fq = sieve.factorize(q)?;
    let mu = mobius(&fq);
    if mu == 0 {
        return Ok(0.0);
    }
    let weight = match mode {
        MuMode::AsWritten => mu as f64,
        MuMode::Squared => 1.0,
    };
    let c = ramanujan_sum(sieve, q, n)? as f64;
    let phi = euler_phi(&fq) as f64;
    Ok(weight * c / (phi * phi))
}

/// Truncated modulus sum: sum_{q <= q_max} of the series coefficient, in
/// ascending q. tail_note records the last nonzero term's magnitude.
pub fn series_by_modulus_sum(
    sieve: &PrimeSieve,
    n: u64,
    q_max: u64,
    mode: MuMode,
) -> Result<SingularSeriesValue> {
    if q_max < 1 {
        return Err(Error::domain("modulus bound must be at least 1"));
    }
    let mut acc = 0.0;
    let mut last_nonzero = 1.0; // q = 1 always contributes exactly 1
    for q in 1..=q_max {
        let term = series_coefficient(sieve, q, n, mode)?;
        if term != 0.0 {
            last_nonzero = term.abs();
        }
        acc += term;
    }
    Ok(SingularSeriesValue {
        n,
        variant: SeriesVariant::SumOverQ(mode),
        value: acc,
        truncation: q_max,
        tail_note: last_nonzero,
    })
}

/// Shared product accumulator: multiplies factors in the given (ascending)
/// order, switching to summed logarithms past [`LOG_SPACE_FACTOR_LIMIT`]
/// factors to keep long near-unit products from drifting. An exact zero
/// factor makes the value 0.
fn accumulate_product(factors: &[f64]) -> f64 {
    if factors.iter().any(|&f| f == 0.0) {
        return 0.0;
    }
    if factors.len() <= LOG_SPACE_FACTOR_LIMIT {
        return factors.iter().product();
    }
    let sign = if factors.iter().filter(|&&f| f < 0.0).count() % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    let logs: Vec<f64> = factors.iter().map(|f| f.abs().ln()).collect();
    sign * pairwise_sum_f64(&logs).exp()
}

fn primes_to<'a>(sieve: &'a PrimeSieve, bound: u64, what: &str) -> Result<&'a [u64]> {
    if bound > sieve.limit() {
        return Err(Error::domain(format!(
            "{what} truncation {bound} exceeds sieve limit {}",
            sieve.limit()
        )));
    }
    let end = sieve.primes().partition_point(|&p| p <= bound);
    Ok(&sieve.primes()[..end])
}

/// Truncated Euler product: prod over primes p <= p_max of
/// (1 + coefficient(p)). A factor of exactly 0 (the even-N collapse at
/// p = 2 in as-written mode) zeroes the value; that is a reported result,
/// not an error.
pub fn series_by_prime_product(
    sieve: &PrimeSieve,
    n: u64,
    p_max: u64,
    mode: MuMode,
) -> Result<SingularSeriesValue> {
    if p_max < 2 {
        return Err(Error::domain("prime bound must be at least 2"));
    }
    let primes = primes_to(sieve, p_max, "prime product")?;
    let mut factors = Vec::with_capacity(primes.len());
    let mut tail = 0.0;
    for &p in primes {
        let coeff = series_coefficient(sieve, p, n, mode)?;
        factors.push(1.0 + coeff);
        tail = coeff.abs();
    }
    Ok(SingularSeriesValue {
        n,
        variant: SeriesVariant::ProductOverP(mode),
        value: accumulate_product(&factors),
        truncation: p_max,
        tail_note: tail,
    })
}

/// The closed product 3 * prod_{p <= p_max, p not dividing N}(1 + 1/p^2)
/// * prod_{p | N}(1 - 2/(p^2 + 1)). The first product is truncated at
/// p_max; the second is finite and always taken in full.
pub fn series_closed_product(
    sieve: &PrimeSieve,
    n: u64,
    p_max: u64,
) -> Result<SingularSeriesValue> {
    if p_max < 2 {
        return Err(Error::domain("prime bound must be at least 2"));
    }
    if n < 2 || n % 2 != 0 {
        return Err(Error::domain(format!("N must be even and >= 2, got {n}")));
    }
    let primes = primes_to(sieve, p_max, "closed product")?;
    let divisors: Vec<u64> = sieve.factorize(n)?.distinct_primes().collect();
    let mut factors = Vec::with_capacity(primes.len() + divisors.len() + 1);
    factors.push(3.0);
    let mut tail = 0.0;
    for &p in primes {
        if n % p == 0 {
            continue;
        }
        let x = 1.0 / (p as f64 * p as f64);
        factors.push(1.0 + x);
        tail = x;
    }
    for &p in &divisors {
        factors.push(1.0 - 2.0 / (p as f64 * p as f64 + 1.0));
    }
    Ok(SingularSeriesValue {
        n,
        variant: SeriesVariant::PaperClosed,
        value: accumulate_product(&factors),
        truncation: p_max,
        tail_note: tail,
    })
}

/// The divisor product prod_{p | N} p/(p - 1): finite, exact up to
/// floating division, always > 1 for even N.
pub fn series_divisor_product(f: &Factorization) -> Result<SingularSeriesValue> {
    let n = f.n();
    if n < 2 || n % 2 != 0 {
        return Err(Error::domain(format!("N must be even and >= 2, got {n}")));
    }
    let mut value = 1.0;
    let mut largest = 2;
    let mut tail = 1.0;
    for p in f.distinct_primes() {
        value *= p as f64 / (p - 1) as f64;
        largest = p;
        tail = 1.0 / (p - 1) as f64;
    }
    Ok(SingularSeriesValue {
        n,
        variant: SeriesVariant::PaperDivisor,
        value,
        truncation: largest,
        tail_note: tail,
    })
}

/// Twin-prime constant truncated at p_max:
/// C2(P) = prod_{2 < p <= P} (1 - 1/(p-1)^2).
pub fn twin_prime_constant(sieve: &PrimeSieve, p_max: u64) -> Result<f64> {
    let primes = primes_to(sieve, p_max, "twin-prime constant")?;
    let factors: Vec<f64> = primes
        .iter()
        .skip(1)
        .map(|&p| {
            let d = (p - 1) as f64;
            1.0 - 1.0 / (d * d)
        })
        .collect();
    Ok(accumulate_product(&factors))
}

/// Finish the classical series from a precomputed twin-prime constant.
/// Callers evaluating many N can price C2(P) once and reuse it here.
pub fn hardy_littlewood_from_c2(c2: f64, f: &Factorization) -> f64 {
    let mut value = 2.0 * c2;
    for p in f.distinct_primes().filter(|&p| p > 2) {
        value *= (p - 1) as f64 / (p - 2) as f64;
    }
    value
}

/// The classical reference series 2 C2(P) prod_{p | N, p > 2}(p-1)/(p-2),
/// used to normalize the predictions everything else is judged by.
pub fn series_hardy_littlewood(
    sieve: &PrimeSieve,
    f: &Factorization,
    p_max: u64,
) -> Result<SingularSeriesValue> {
    let n = f.n();
    if n < 2 || n % 2 != 0 {
        return Err(Error::domain(format!("N must be even and >= 2, got {n}")));
    }
    if p_max < 3 {
        return Err(Error::domain("prime bound must be at least 3"));
    }
    let c2 = twin_prime_constant(sieve, p_max)?;
    let value = hardy_littlewood_from_c2(c2, f);
    let last = *primes_to(sieve, p_max, "twin-prime constant")?
        .last()
        .unwrap();
    let d = (last - 1) as f64;
    Ok(SingularSeriesValue {
        n,
        variant: SeriesVariant::HardyLittlewood,
        value,
        truncation: p_max,
        tail_note: 1.0 / (d * d),
    })
}

/// Evaluate any variant with the caller's truncation bounds (prime bound
/// for products, modulus bound for the sum).
pub fn evaluate(
    sieve: &PrimeSieve,
    n: u64,
    variant: SeriesVariant,
    trunc_p: u64,
    trunc_q: u64,
) -> Result<SingularSeriesValue> {
    match variant {
        SeriesVariant::PaperClosed => series_closed_product(sieve, n, trunc_p),
        SeriesVariant::PaperDivisor => series_divisor_product(&sieve.factorize(n)?),
        SeriesVariant::SumOverQ(mode) => series_by_modulus_sum(sieve, n, trunc_q, mode),
        SeriesVariant::ProductOverP(mode) => series_by_prime_product(sieve, n, trunc_p, mode),
        SeriesVariant::HardyLittlewood => {
            series_hardy_littlewood(sieve, &sieve.factorize(n)?, trunc_p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::unit_phase;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn sieve() -> &'static PrimeSieve {
        static S: OnceLock<PrimeSieve> = OnceLock::new();
        S.get_or_init(|| PrimeSieve::build(1_000_000).unwrap())
    }

    /// Independent oracle: c_q(N) by direct complex summation over the
    /// residues coprime to q.
    fn ramanujan_direct(q: u64, n: u64) -> f64 {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for a in 1..=q {
            if gcd(a, q) == 1 {
                acc += unit_phase((a as f64 * (n % q) as f64) / q as f64);
            }
        }
        assert!(acc.im.abs() < 1e-9, "c_{q}({n}) not real: {acc}");
        acc.re
    }

    #[test]
    fn ramanujan_examples() {
        let s = sieve();
        for n in [0u64, 1, 6, 10, 97] {
            assert_eq!(ramanujan_sum(s, 1, n).unwrap(), 1);
        }
        assert_eq!(ramanujan_sum(s, 3, 6).unwrap(), 2);
        assert_eq!(ramanujan_sum(s, 4, 6).unwrap(), -2);
        assert!(ramanujan_sum(s, 0, 6).is_err());
    }

    #[test]
    fn ramanujan_matches_direct_summation() {
        let s = sieve();
        for q in 1..=120u64 {
            for n in 0..=120u64 {
                let exact = ramanujan_sum(s, q, n).unwrap();
                let direct = ramanujan_direct(q, n);
                assert!(
                    (exact as f64 - direct).abs() < 1e-9,
                    "c_{q}({n}): closed {exact} direct {direct}"
                );
            }
        }
    }

    #[test]
    fn coefficient_examples() {
        let s = sieve();
        for mode in [MuMode::AsWritten, MuMode::Squared] {
            assert_eq!(series_coefficient(s, 1, 6, mode).unwrap(), 1.0);
            assert_eq!(series_coefficient(s, 4, 6, mode).unwrap(), 0.0);
        }
        assert_eq!(
            series_coefficient(s, 2, 6, MuMode::AsWritten).unwrap(),
            -1.0
        );
        assert_eq!(series_coefficient(s, 2, 6, MuMode::Squared).unwrap(), 1.0);
        assert!(series_coefficient(s, 0, 6, MuMode::Squared).is_err());
    }

    #[test]
    fn coefficient_vanishes_exactly_on_square_factors() {
        let s = sieve();
        for q in [4u64, 8, 9, 12, 18, 25, 49, 50, 100, 121] {
            for mode in [MuMode::AsWritten, MuMode::Squared] {
                assert_eq!(series_coefficient(s, q, 30, mode).unwrap(), 0.0, "q={q}");
            }
        }
    }

    #[test]
    fn coefficient_is_multiplicative_on_coprime_squarefree_pairs() {
        let s = sieve();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5E41E5);
        let mut done = 0;
        while done < 50 {
            let q1 = rng.gen_range(1..=1000u64);
            let q2 = rng.gen_range(1..=1000u64);
            if gcd(q1, q2) != 1 {
                continue;
            }
            let f1 = s.factorize(q1).unwrap();
            let f2 = s.factorize(q2).unwrap();
            if !f1.is_squarefree() || !f2.is_squarefree() {
                continue;
            }
            for mode in [MuMode::AsWritten, MuMode::Squared] {
                let lhs = series_coefficient(s, q1 * q2, 1234, mode).unwrap();
                let rhs = series_coefficient(s, q1, 1234, mode).unwrap()
                    * series_coefficient(s, q2, 1234, mode).unwrap();
                assert!((lhs - rhs).abs() < 1e-9, "q1={q1} q2={q2} {mode}");
            }
            done += 1;
        }
    }

    #[test]
    fn modulus_sum_examples() {
        let s = sieve();
        let one = series_by_modulus_sum(s, 6, 1, MuMode::AsWritten).unwrap();
        assert_eq!(one.value, 1.0);
        assert_eq!(one.tail_note, 1.0);
        let two_mu = series_by_modulus_sum(s, 6, 2, MuMode::AsWritten).unwrap();
        assert_eq!(two_mu.value, 0.0);
        let two_mu2 = series_by_modulus_sum(s, 6, 2, MuMode::Squared).unwrap();
        assert_eq!(two_mu2.value, 2.0);
        assert_eq!(two_mu2.tail_note, 1.0);
        assert!(series_by_modulus_sum(s, 6, 0, MuMode::Squared).is_err());
    }

    #[test]
    fn prime_product_examples() {
        let s = sieve();
        let p2_mu = series_by_prime_product(s, 6, 2, MuMode::AsWritten).unwrap();
        assert_eq!(p2_mu.value, 0.0);
        let p2_mu2 = series_by_prime_product(s, 6, 2, MuMode::Squared).unwrap();
        assert_eq!(p2_mu2.value, 2.0);
        // c_2(15) = -1, so even the squared mode's factor collapses at an
        // odd N: this is why only even N have representations.
        let odd = series_by_prime_product(s, 15, 2, MuMode::Squared).unwrap();
        assert_eq!(odd.value, 0.0);
        assert!(series_by_prime_product(s, 6, 1, MuMode::Squared).is_err());
    }

    #[test]
    fn sum_and_product_agree_in_squared_mode() {
        let s = sieve();
        for n in [6u64, 30, 100, 1024, 9240, 9998] {
            let sum = series_by_modulus_sum(s, n, 100_000, MuMode::Squared).unwrap();
            let prod = series_by_prime_product(s, n, 100_000, MuMode::Squared).unwrap();
            assert!(
                (sum.value - prod.value).abs() < 1e-3,
                "N={n}: sum {} vs product {}",
                sum.value,
                prod.value
            );
        }
    }

    /// Independent oracle for the closed product: assemble it factor by
    /// factor from the formula text, no shared code with the implementation.
    fn closed_product_direct(s: &PrimeSieve, n: u64, p_max: u64) -> f64 {
        let mut v = 3.0;
        for &p in s.primes() {
            if p > p_max {
                break;
            }
            if n % p != 0 {
                v *= 1.0 + 1.0 / (p * p) as f64;
            }
        }
        let mut m = n;
        let mut div_primes = Vec::new();
        for d in 2..=m {
            if d * d > m {
                break;
            }
            if m % d == 0 {
                div_primes.push(d);
                while m % d == 0 {
                    m /= d;
                }
            }
        }
        if m > 1 {
            div_primes.push(m);
        }
        for p in div_primes {
            v *= 1.0 - 2.0 / ((p * p) as f64 + 1.0);
        }
        v
    }

    #[test]
    fn closed_product_matches_direct_assembly() {
        let s = sieve();
        for (n, p_max) in [(8u64, 1000u64), (6, 1000), (30, 5000), (9240, 1000)] {
            let got = series_closed_product(s, n, p_max).unwrap().value;
            let want = closed_product_direct(s, n, p_max);
            assert!(
                (got - want).abs() < 1e-12 * want.abs(),
                "N={n} P={p_max}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn closed_product_power_of_two_structure() {
        let s = sieve();
        // Only prime divisor 2: value = 1.8 * prod_{2<p<=P}(1 + 1/p^2).
        let got = series_closed_product(s, 8, 10_000).unwrap().value;
        let mut tail = 1.0;
        for &p in s.primes().iter().skip(1) {
            if p > 10_000 {
                break;
            }
            tail *= 1.0 + 1.0 / (p * p) as f64;
        }
        assert!((got - 1.8 * tail).abs() < 1e-12);
    }

    #[test]
    fn divisor_product_examples() {
        let s = sieve();
        for k in [2u64, 4, 8, 64, 1024] {
            let v = series_divisor_product(&s.factorize(k).unwrap()).unwrap();
            assert_eq!(v.value, 2.0, "N={k}");
        }
        assert_eq!(
            series_divisor_product(&s.factorize(6).unwrap()).unwrap().value,
            3.0
        );
        assert_eq!(
            series_divisor_product(&s.factorize(30).unwrap())
                .unwrap()
                .value,
            3.75
        );
        assert!(series_divisor_product(&s.factorize(15).unwrap()).is_err());
        // Always above 1 for even N: every factor p/(p-1) > 1.
        for n in (2..2000u64).step_by(2) {
            let v = series_divisor_product(&s.factorize(n).unwrap()).unwrap();
            assert!(v.value > 1.0, "N={n}");
        }
    }

    #[test]
    fn twin_prime_constant_frozen_value() {
        let s = sieve();
        let c2 = twin_prime_constant(s, 1_000_000).unwrap();
        assert!(
            (c2 - 0.6601618).abs() < 1e-6,
            "C2(10^6) = {c2}, expected about 0.6601618"
        );
        // Convergence under doubling of the truncation.
        let c_small = twin_prime_constant(s, 50_000).unwrap();
        let c_mid = twin_prime_constant(s, 100_000).unwrap();
        assert!((c_mid - c2).abs() < (c_small - c2).abs());
    }

    #[test]
    fn hardy_littlewood_structure() {
        let s = sieve();
        let c2 = twin_prime_constant(s, 100_000).unwrap();
        let pow2 = series_hardy_littlewood(s, &s.factorize(16).unwrap(), 100_000).unwrap();
        assert!((pow2.value - 2.0 * c2).abs() < 1e-12);
        let six = series_hardy_littlewood(s, &s.factorize(6).unwrap(), 100_000).unwrap();
        assert!((six.value - 4.0 * c2).abs() < 1e-12);
        assert!(series_hardy_littlewood(s, &s.factorize(6).unwrap(), 2).is_err());
        assert!(series_hardy_littlewood(s, &s.factorize(7).unwrap(), 100).is_err());
    }

    #[test]
    fn variant_tags_are_stable() {
        assert_eq!(SeriesVariant::PaperClosed.to_string(), "PAPER_CLOSED");
        assert_eq!(SeriesVariant::PaperDivisor.to_string(), "PAPER_DIVISOR");
        assert_eq!(
            SeriesVariant::SumOverQ(MuMode::AsWritten).to_string(),
            "SUM_OVER_Q_MU_AS_WRITTEN"
        );
        assert_eq!(
            SeriesVariant::ProductOverP(MuMode::Squared).to_string(),
            "PRODUCT_OVER_P_MU_SQUARED"
        );
        assert_eq!(
            SeriesVariant::HardyLittlewood.to_string(),
            "HARDY_LITTLEWOOD"
        );
    }

    #[test]
    fn evaluate_dispatches_truncations() {
        let s = sieve();
        let v = evaluate(s, 6, SeriesVariant::SumOverQ(MuMode::Squared), 2, 7).unwrap();
        assert_eq!(v.truncation, 7);
        let w = evaluate(s, 6, SeriesVariant::ProductOverP(MuMode::Squared), 11, 7).unwrap();
        assert_eq!(w.truncation, 11);
    }
}
