//! Prime infrastructure: a segmented, bit-packed sieve with full-range
//! primality queries, trial-division factorization against the sieved
//! primes, the arithmetic functions mu and phi, and the offset logarithmic
//! integral used as the smooth comparator for prime counts.
//!
//! The sieve stores one bit per odd integer (2 is special-cased), so a
//! table to `limit` costs `limit/16` bytes plus the prime list. Segments
//! are sieved independently, which keeps the working set at sqrt(limit)
//! and lets segments be processed in parallel without any effect on the
//! result.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::util::isqrt;

const CACHE_MAGIC: &[u8; 4] = b"GBSV";
const CACHE_VERSION: u8 = 0x01;
/// Words per sieving segment; 8 KiB of bitmap = 2^19 odd integers.
const SEG_WORDS: usize = 1 << 10;
/// Primality is re-derived on this prefix when loading a cache file.
const SPOT_CHECK_BOUND: u64 = 10_000;

/// Bit-packed primality over the odd integers in [1, limit] plus the
/// ascending list of all primes <= limit.
///
/// Invariants: bit k of the bitmap corresponds to the integer 2k+1; the
/// prime list starts with 2 and agrees with the bitmap everywhere.
pub struct PrimeSieve {
    limit: u64,
    words: Vec<u64>,
    primes: Vec<u64>,
}

impl PrimeSieve {
    /// Sieve all primes up to and including `limit`.
    pub fn build(limit: u64) -> Result<PrimeSieve> {
        if limit < 2 {
            return Err(Error::domain(format!(
                "sieve limit must be at least 2, got {limit}"
            )));
        }
        let words = sieve_odd_bitmap(limit);
        let primes = collect_primes(limit, &words);
        Ok(PrimeSieve {
            limit,
            words,
            primes,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// All primes <= limit in ascending order.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Primality of n. Panics if n > limit; queries must stay inside the
    /// sieved range.
    pub fn is_prime(&self, n: u64) -> bool {
        assert!(
            n <= self.limit,
            "primality query {n} beyond sieve limit {}",
            self.limit
        );
        if n < 2 {
            return false;
        }
        if n == 2 {
            return true;
        }
        if n % 2 == 0 {
            return false;
        }
        let k = ((n - 1) / 2) as usize;
        self.words[k / 64] >> (k % 64) & 1 == 1
    }

    /// pi(x): the number of primes <= x.
    pub fn prime_count(&self, x: u64) -> Result<u64> {
        if x < 2 || x > self.limit {
            return Err(Error::domain(format!(
                "prime_count argument {x} outside [2, {}]",
                self.limit
            )));
        }
        Ok(self.primes.partition_point(|&p| p <= x) as u64)
    }

    /// pi(N; q, l): primes p <= N with p = l (mod q). gcd(q, l) > 1 is
    /// permitted; the count is then 0 or 1.
    pub fn prime_count_ap(&self, n: u64, q: u64, l: u64) -> Result<u64> {
        if q < 1 {
            return Err(Error::domain("modulus q must be at least 1"));
        }
        if l >= q {
            return Err(Error::domain(format!(
                "residue l={l} must satisfy 0 <= l < q={q}"
            )));
        }
        if n > self.limit {
            return Err(Error::domain(format!(
                "progression count bound {n} beyond sieve limit {}",
                self.limit
            )));
        }
        let end = self.primes.partition_point(|&p| p <= n);
        Ok(self.primes[..end].iter().filter(|&&p| p % q == l).count() as u64)
    }

    /// Factor n by trial division over the sieved primes. Valid for
    /// 1 <= n <= limit^2: any cofactor surviving division by all primes
    /// <= sqrt(n) is itself prime.
    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        if n == 0 {
            return Err(Error::domain("cannot factorize 0"));
        }
        let max_n = self.limit.checked_mul(self.limit).unwrap_or(u64::MAX);
        if n > max_n {
            return Err(Error::domain(format!(
                "factorize argument {n} exceeds sieve limit squared {max_n}"
            )));
        }
        let mut rem = n;
        let mut factors = Vec::new();
        for &p in &self.primes {
            if p * p > rem {
                break;
            }
            if rem % p == 0 {
                let mut e = 0u32;
                while rem % p == 0 {
                    rem /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
        }
        if rem > 1 {
            factors.push((rem, 1));
        }
        Ok(Factorization { n, factors })
    }

    /// Serialize the sieve to `path`: magic, format version, limit as
    /// little-endian u64, then the odd-integer bitmap (LSB-first bits,
    /// little-endian byte order).
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let nbytes = odd_bit_count(self.limit).div_ceil(8);
        let mut out = Vec::with_capacity(13 + nbytes);
        out.extend_from_slice(CACHE_MAGIC);
        out.push(CACHE_VERSION);
        out.extend_from_slice(&self.limit.to_le_bytes());
        let mut written = 0usize;
        for w in &self.words {
            let bytes = w.to_le_bytes();
            let take = (nbytes - written).min(8);
            out.extend_from_slice(&bytes[..take]);
            written += take;
            if written == nbytes {
                break;
            }
        }
        fs::write(path, out)?;
        Ok(())
    }

    /// Load a sieve previously written by [`write_cache`]. The header is
    /// validated and the primality bits on the first 10^4 integers are
    /// checked against a freshly computed sieve before the file is trusted.
    pub fn read_cache(path: &Path) -> Result<PrimeSieve> {
        let data = fs::read(path)?;
        if data.len() < 13 {
            return Err(Error::cache(format!(
                "file too short ({} bytes) for header",
                data.len()
            )));
        }
        if &data[0..4] != CACHE_MAGIC {
            return Err(Error::cache("bad magic"));
        }
        if data[4] != CACHE_VERSION {
            return Err(Error::cache(format!(
                "unsupported format version {}",
                data[4]
            )));
        }
        let limit = u64::from_le_bytes(data[5..13].try_into().unwrap());
        if limit < 2 {
            return Err(Error::cache(format!("stored limit {limit} invalid")));
        }
        let nbits = odd_bit_count(limit);
        let nbytes = nbits.div_ceil(8);
        let body = &data[13..];
        if body.len() != nbytes {
            return Err(Error::cache(format!(
                "bitmap is {} bytes, limit {} requires {}",
                body.len(),
                limit,
                nbytes
            )));
        }
        let nwords = nbits.div_ceil(64);
        let mut words = vec![0u64; nwords];
        for (i, chunk) in body.chunks(8).enumerate() {
            let mut b = [0u8; 8];
            b[..chunk.len()].copy_from_slice(chunk);
            words[i] = u64::from_le_bytes(b);
        }
        if let Some(tail) = mask_tail(&mut words, nbits) {
            if tail != 0 {
                return Err(Error::cache("nonzero padding bits past limit"));
            }
        }
        // Spot check: recompute primality on the first 10^4 integers and
        // compare the prime count derived from the loaded bitmap.
        let check_to = limit.min(SPOT_CHECK_BOUND);
        let fresh = sieve_odd_bitmap(check_to);
        let fresh_count = 1 + count_bits_to(&fresh, check_to);
        let loaded_count = 1 + count_bits_to(&words, check_to);
        if fresh_count != loaded_count {
            return Err(Error::cache(format!(
                "spot check failed: pi({check_to}) from file is {loaded_count}, \
                 recomputed {fresh_count}"
            )));
        }
        let primes = collect_primes(limit, &words);
        Ok(PrimeSieve {
            limit,
            words,
            primes,
        })
    }
}

/// Number of bitmap bits for odd integers in [1, limit].
fn odd_bit_count(limit: u64) -> usize {
    ((limit + 1) / 2) as usize
}

/// Zero any bits past nbits in the last word; returns what was there.
fn mask_tail(words: &mut [u64], nbits: usize) -> Option<u64> {
    let used = nbits % 64;
    if used == 0 || words.is_empty() {
        return None;
    }
    let last = words.len() - 1;
    let keep = (1u64 << used) - 1;
    let tail = words[last] & !keep;
    words[last] &= keep;
    Some(tail)
}

/// Count set bits for odd integers <= bound.
fn count_bits_to(words: &[u64], bound: u64) -> u64 {
    if bound < 3 {
        return 0;
    }
    let last_k = ((bound - 1) / 2) as usize; // highest odd index in range
    let full = (last_k + 1) / 64;
    let mut count: u64 = words[..full].iter().map(|w| w.count_ones() as u64).sum();
    let rem = (last_k + 1) % 64;
    if rem > 0 {
        count += (words[full] & ((1u64 << rem) - 1)).count_ones() as u64;
    }
    count
}

/// Odd-only primality bitmap for [1, limit]; bit k is the integer 2k+1.
fn sieve_odd_bitmap(limit: u64) -> Vec<u64> {
    let nbits = odd_bit_count(limit);
    let nwords = nbits.div_ceil(64);
    let mut words = vec![u64::MAX; nwords];
    let base = base_odd_primes(isqrt(limit));
    words
        .par_chunks_mut(SEG_WORDS)
        .enumerate()
        .for_each(|(ci, chunk)| {
            let k0 = (ci * SEG_WORDS * 64) as u64;
            let k_end = k0 + (chunk.len() * 64) as u64;
            let lo = 2 * k0 + 1;
            let hi = 2 * (k_end - 1) + 1;
            for &p in &base {
                if p * p > hi {
                    break;
                }
                // First odd multiple of p in [lo, hi], at least p^2.
                let mut m = p * p;
                if m < lo {
                    m = lo.div_ceil(p) * p;
                    if m % 2 == 0 {
                        m += p;
                    }
                }
                while m <= hi {
                    let k = ((m - 1) / 2 - k0) as usize;
                    chunk[k / 64] &= !(1u64 << (k % 64));
                    m += 2 * p;
                }
            }
        });
    words[0] &= !1; // 1 is not prime
    mask_tail(&mut words, nbits);
    words
}

/// Plain odd sieve used for the base primes up to sqrt(limit).
fn base_odd_primes(bound: u64) -> Vec<u64> {
    if bound < 3 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut comp = vec![false; n + 1];
    let mut primes = Vec::new();
    let mut p = 3u64;
    while p <= bound {
        if !comp[p as usize] {
            primes.push(p);
            let mut m = p * p;
            while m <= bound {
                comp[m as usize] = true;
                m += 2 * p;
            }
        }
        p += 2;
    }
    primes
}

fn collect_primes(limit: u64, words: &[u64]) -> Vec<u64> {
    let estimate = if limit >= 17 {
        let x = limit as f64;
        (1.2 * x / x.ln()) as usize + 16
    } else {
        16
    };
    let mut primes = Vec::with_capacity(estimate);
    primes.push(2);
    for (wi, &word) in words.iter().enumerate() {
        let mut w = word;
        while w != 0 {
            let b = w.trailing_zeros() as usize;
            let k = wi * 64 + b;
            primes.push(2 * k as u64 + 1);
            w &= w - 1;
        }
    }
    primes
}

/// Prime factorization n = prod p_i^{e_i} with the p_i strictly ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn n(&self) -> u64 {
        self.n
    }

    /// (prime, exponent) pairs in ascending prime order; empty for n = 1.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn distinct_primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }
}

/// Mobius function of a factored integer: 0 on a squared factor, else
/// (-1)^(number of prime factors).
pub fn mobius(f: &Factorization) -> i64 {
    if !f.is_squarefree() {
        return 0;
    }
    if f.factors().len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Euler totient of a factored integer, exactly in integers.
pub fn euler_phi(f: &Factorization) -> u64 {
    let mut phi = 1u64;
    for &(p, e) in f.factors() {
        phi *= p.pow(e - 1) * (p - 1);
    }
    phi
}

/// Offset logarithmic integral: the integral of dt/ln t from 2 to x,
/// by adaptive Simpson bisection with absolute error target `tol`.
/// Strictly increasing in x for points separated by more than ~2 tol.
pub fn log_integral(x: f64, tol: f64) -> Result<f64> {
    if !(x >= 2.0) {
        return Err(Error::domain(format!(
            "log_integral requires x >= 2, got {x}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!(
            "log_integral requires tol > 0, got {tol}"
        )));
    }
    if x == 2.0 {
        return Ok(0.0);
    }
    let f = |t: f64| 1.0 / t.ln();
    let a = 2.0;
    let m = 0.5 * (a + x);
    let (fa, fm, fb) = (f(a), f(m), f(x));
    let whole = (x - a) / 6.0 * (fa + 4.0 * fm + fb);
    Ok(adaptive_simpson(&f, a, x, fa, fm, fb, whole, tol, 52))
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
