//! Prime-field arithmetic: primality, inverses, primitive roots, discrete
//! logarithms and the additive character `e(x/q) = exp(2πi x/q)`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    // These twelve bases are a proven witness set below 3.3e24.
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors of `n`, ascending, by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Modular inverse of `x` modulo `q` in `[1, q-1]`.
pub fn inv(x: u64, q: u64) -> Result<u64> {
    if q < 2 {
        return Err(Error::Domain(format!("modulus {q} has no units to invert")));
    }
    let x = x % q;
    if x == 0 {
        return Err(Error::Domain(format!("0 is not invertible modulo {q}")));
    }
    let (mut r0, mut r1) = (q as i128, x as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (t0, t1) = (t1, t0 - k * t1);
    }
    if r0 != 1 {
        return Err(Error::Domain(format!("{x} is not a unit modulo {q}")));
    }
    Ok(t0.rem_euclid(q as i128) as u64)
}

/// Inverts every entry with a single modular inversion (prefix-product trick).
pub fn batch_inv(xs: &[u64], q: u64) -> Result<Vec<u64>> {
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    let mut prefix = Vec::with_capacity(xs.len());
    let mut acc = 1u64;
    for (i, &x) in xs.iter().enumerate() {
        let r = x % q;
        if r == 0 {
            return Err(Error::Domain(format!(
                "entry {i} ({x}) is 0 modulo {q} and has no inverse"
            )));
        }
        acc = mul_mod(acc, r, q);
        prefix.push(acc);
    }
    let mut running = inv(acc, q)?;
    let mut out = vec![0u64; xs.len()];
    for i in (0..xs.len()).rev() {
        let before = if i == 0 { 1 } else { prefix[i - 1] };
        out[i] = mul_mod(running, before, q);
        running = mul_mod(running, xs[i] % q, q);
    }
    Ok(out)
}

/// `e(x/q) = exp(2πi x/q)`.
///
/// The residue is reduced to the symmetric range `(-q/2, q/2]` before the
/// angle is formed, so `additive_char(-x, q)` is the exact conjugate of
/// `additive_char(x, q)` except at the self-conjugate point `x ≡ q/2`.
pub fn additive_char(x: i64, q: u64) -> Complex64 {
    assert!(q >= 1, "additive character needs q >= 1");
    let r = (x as i128).rem_euclid(q as i128);
    let sym = if 2 * r > q as i128 { r - q as i128 } else { r };
    let theta = TAU * (sym as f64) / (q as f64);
    let (s, c) = theta.sin_cos();
    Complex64::new(c, s)
}

/// Table of `e(r/q)` for `r = 0..q`.
pub fn char_table(q: u64) -> Vec<Complex64> {
    (0..q).map(|r| additive_char(r as i64, q)).collect()
}

/// Smallest generator of `(Z/q)^*`.
pub fn primitive_root(q: u64) -> Result<u64> {
    if !is_prime(q) {
        return Err(Error::Domain(format!("{q} is not prime")));
    }
    if q == 2 {
        return Ok(1);
    }
    let factors = prime_factors(q - 1);
    (2..q)
        .find(|&g| factors.iter().all(|&p| pow_mod(g, (q - 1) / p, q) != 1))
        .ok_or_else(|| Error::Numerics(format!("no primitive root found for {q}")))
}

/// Cyclic convolution `c[t] = Σ_k a[k] b[(t-k) mod L]` for arbitrary `L`,
/// computed with chirp-z transforms.
pub fn cyclic_convolve(a: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
    if a.len() != b.len() {
        return Err(Error::Usage(format!(
            "cyclic convolution needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Usage("cyclic convolution of empty arrays".into()));
    }
    let plan = fft::Dft::new(a.len());
    let fa = plan.forward(a);
    let fb = plan.forward(b);
    let prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    Ok(plan.inverse(&prod))
}

/// Direct `O(L²)` cyclic convolution.
pub fn cyclic_convolve_direct(a: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
    if a.len() != b.len() {
        return Err(Error::Usage(format!(
            "cyclic convolution needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let l = a.len();
    Ok((0..l)
        .map(|t| {
            (0..l)
                .map(|k| a[k] * b[(t + l - k) % l])
                .sum::<Complex64>()
        })
        .collect())
}

/// Context for computations in `F_q`: modulus, smallest primitive root and
/// the power/discrete-log tables for `(Z/q)^*`.
#[derive(Debug, Clone)]
pub struct FieldCtx {
    q: u64,
    g: u64,
    /// `pow[k] = g^k mod q` for `k in 0..q-1`.
    pow: Vec<u32>,
    /// `dlog[x-1] = k` with `g^k ≡ x`.
    dlog: Vec<u32>,
    inv_cache: Option<Vec<u32>>,
}

/// Largest modulus for which the `O(q)` tables are built.
pub const MAX_TABLE_MODULUS: u64 = 1 << 31;

impl FieldCtx {
    pub fn new(q: u64) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::Domain(format!("{q} is not prime")));
        }
        if q > MAX_TABLE_MODULUS {
            return Err(Error::Resource(format!(
                "modulus {q} exceeds table limit {MAX_TABLE_MODULUS}"
            )));
        }
        let g = primitive_root(q)?;
        let order = (q - 1) as usize;
        let mut pow = Vec::with_capacity(order);
        let mut dlog = vec![u32::MAX; order];
        let mut x = 1u64;
        for k in 0..order {
            pow.push(x as u32);
            dlog[(x - 1) as usize] = k as u32;
            x = x * g % q;
        }
        debug_assert_eq!(x, 1);
        Ok(FieldCtx {
            q,
            g,
            pow,
            dlog,
            inv_cache: None,
        })
    }

    /// Adds a table of inverses (`x^{-1} = g^{-dlog x}`).
    pub fn with_inverses(mut self) -> Self {
        let order = (self.q - 1) as usize;
        let table = (1..self.q)
            .map(|x| {
                let k = self.dlog[(x - 1) as usize] as usize;
                self.pow[(order - k) % order]
            })
            .collect();
        self.inv_cache = Some(table);
        self
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn generator(&self) -> u64 {
        self.g
    }

    /// Group order `q - 1`.
    pub fn order(&self) -> usize {
        (self.q - 1) as usize
    }

    /// `g^k mod q`.
    pub fn pow_g(&self, k: usize) -> u64 {
        self.pow[k % self.order()] as u64
    }

    /// Discrete logarithm base `g` of a unit residue.
    pub fn dlog(&self, x: u64) -> Result<u64> {
        let r = x % self.q;
        if r == 0 {
            return Err(Error::Domain(format!("log of 0 modulo {}", self.q)));
        }
        Ok(self.dlog[(r - 1) as usize] as u64)
    }

    pub fn inv(&self, x: u64) -> Result<u64> {
        let r = x % self.q;
        if r == 0 {
            return Err(Error::Domain(format!("0 is not invertible modulo {}", self.q)));
        }
        match &self.inv_cache {
            Some(t) => Ok(t[(r - 1) as usize] as u64),
            None => inv(r, self.q),
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a % self.q, b % self.q, self.q)
    }

    pub fn char(&self, x: i64) -> Complex64 {
        additive_char(x, self.q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn primality_small_cases() {
        assert!(is_prime(2));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(is_prime(10007));
        for n in 0..5000u64 {
            assert_eq!(is_prime(n), trial_division(n), "n = {n}");
        }
        // Strong pseudoprimes to several small bases.
        assert!(!is_prime(3_215_031_751));
        assert!(!is_prime(3_825_123_056_546_413_051));
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inv(3, 7).unwrap(), 5);
        assert_eq!(inv(1, 10007).unwrap(), 1);
        assert!(matches!(inv(0, 7), Err(Error::Domain(_))));
    }

    #[test]
    fn batch_inverse_examples() {
        assert_eq!(batch_inv(&[1, 2, 3], 7).unwrap(), vec![1, 4, 5]);
        assert!(batch_inv(&[], 7).unwrap().is_empty());
        let err = batch_inv(&[1, 2, 14, 3], 7).unwrap_err();
        assert!(matches!(&err, Error::Domain(m) if m.contains("entry 2")));
    }

    #[test]
    fn batch_inverse_matches_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &q in &[10007u64, 65537, 1_000_003] {
            let xs: Vec<u64> = (0..100_000).map(|_| rng.random_range(1..q)).collect();
            let fast = batch_inv(&xs, q).unwrap();
            for (x, y) in xs.iter().zip(&fast) {
                assert_eq!(*y, inv(*x, q).unwrap());
            }
        }
    }

    #[test]
    fn character_examples() {
        let one = additive_char(0, 13);
        assert_eq!(one, Complex64::new(1.0, 0.0));
        let i = additive_char(1, 4);
        assert!((i - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        for x in -30i64..30 {
            let a = additive_char(x, 11);
            assert!((a - additive_char(x + 11, 11)).norm() < 1e-15);
            assert_eq!(additive_char(-x, 11), a.conj());
            assert!((a.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn primitive_root_examples() {
        assert_eq!(primitive_root(2).unwrap(), 1);
        assert_eq!(primitive_root(5).unwrap(), 2);
        assert_eq!(primitive_root(7).unwrap(), 3);
        assert!(primitive_root(9).is_err());
    }

    #[test]
    fn primitive_roots_generate_up_to_2000() {
        for q in (3..2000u64).filter(|&q| is_prime(q)) {
            let g = primitive_root(q).unwrap();
            assert_eq!(pow_mod(g, q - 1, q), 1);
            for p in prime_factors(q - 1) {
                assert_ne!(pow_mod(g, (q - 1) / p, q), 1, "q = {q}, p = {p}");
            }
            // Smallest: no smaller candidate has full order.
            for h in 2..g {
                assert!(prime_factors(q - 1)
                    .iter()
                    .any(|&p| pow_mod(h, (q - 1) / p, q) == 1));
            }
        }
    }

    #[test]
    fn field_ctx_tables() {
        let ctx = FieldCtx::new(1009).unwrap().with_inverses();
        assert_eq!(ctx.dlog(1).unwrap(), 0);
        let mut seen = vec![false; 1009];
        for k in 0..ctx.order() {
            let x = ctx.pow_g(k);
            assert!(!seen[x as usize]);
            seen[x as usize] = true;
        }
        for x in 1..1009 {
            assert_eq!(pow_mod(ctx.generator(), ctx.dlog(x).unwrap(), 1009), x);
            assert_eq!(ctx.mul(x, ctx.inv(x).unwrap()), 1);
        }
        assert!(FieldCtx::new(1001).is_err());
    }

    #[test]
    fn convolution_examples() {
        let b: Vec<Complex64> = (0..7).map(|k| Complex64::new(k as f64, -(k as f64))).collect();
        let mut delta = vec![Complex64::new(0.0, 0.0); 7];
        delta[0] = Complex64::new(1.0, 0.0);
        let c = cyclic_convolve(&delta, &b).unwrap();
        for (x, y) in c.iter().zip(&b) {
            assert!((x - y).norm() < 1e-12);
        }
        let one = Complex64::new(1.0, 0.0);
        let c = cyclic_convolve(&[one, one], &[one, -one]).unwrap();
        assert!(c.iter().all(|z| z.norm() < 1e-12));
        assert!(matches!(
            cyclic_convolve(&[one], &[one, one]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn convolution_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &l in &[1usize, 2, 3, 17, 96, 1000, 1008] {
            let a: Vec<Complex64> = (0..l)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let b: Vec<Complex64> = (0..l)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let fast = cyclic_convolve(&a, &b).unwrap();
            let slow = cyclic_convolve_direct(&a, &b).unwrap();
            let scale: f64 = a.iter().map(|z| z.norm()).sum::<f64>()
                * b.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for (x, y) in fast.iter().zip(&slow) {
                assert!((x - y).norm() <= 1e-9 * scale, "L = {l}");
            }
        }
    }
}
