//! Sieve tables, sums of `Kl₂(p;q)` over primes in progressions,
//! Heath-Brown's identity and dyadic partitions of unity.

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use crate::bump::Bump;
use crate::error::{Error, Result};
use crate::kloosterman::Spectrum;

/// `Λ`, `μ` and the prime indicator on `[0, limit]`, from a linear sieve.
#[derive(Debug, Clone)]
pub struct SieveTables {
    limit: u64,
    is_prime: Vec<bool>,
    mangoldt: Vec<f64>,
    moebius: Vec<i8>,
}

impl SieveTables {
    pub fn new(limit: u64) -> Result<Self> {
        if limit > 200_000_000 {
            return Err(Error::Resource(format!("sieve limit {limit} exceeds 2e8")));
        }
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        let mut moebius = vec![0i8; n + 1];
        let mut mangoldt = vec![0.0f64; n + 1];
        if n >= 1 {
            moebius[1] = 1;
        }
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
                moebius[i] = -1;
            }
            let si = spf[i];
            for &p in &primes {
                let ip = i * p as usize;
                if p > si || ip > n {
                    break;
                }
                spf[ip] = p;
                moebius[ip] = if p == si { 0 } else { -moebius[i] };
            }
        }
        let mut is_prime = vec![false; n + 1];
        for &p in &primes {
            is_prime[p as usize] = true;
            let lp = (p as f64).ln();
            let mut pk = p as u64;
            while pk <= limit {
                mangoldt[pk as usize] = lp;
                pk *= p as u64;
            }
        }
        Ok(SieveTables {
            limit,
            is_prime,
            mangoldt,
            moebius,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn is_prime(&self, n: u64) -> bool {
        self.is_prime[n as usize]
    }

    pub fn mangoldt(&self, n: u64) -> f64 {
        self.mangoldt[n as usize]
    }

    pub fn moebius(&self, n: u64) -> i8 {
        self.moebius[n as usize]
    }

    fn check(&self, x: f64) -> Result<u64> {
        if !(x.is_finite()) || x > self.limit as f64 {
            return Err(Error::Usage(format!("X = {x} exceeds the sieve limit {}", self.limit)));
        }
        Ok(x.max(0.0).floor() as u64)
    }
}

/// `ψ(X;v,u) = Σ_{n ≤ X, n ≡ u (v)} Λ(n)`.
pub fn psi_ap(x: f64, v: u64, u: u64, t: &SieveTables) -> Result<f64> {
    let top = t.check(x)?;
    if v == 0 {
        return Err(Error::Usage("modulus v must be positive".into()));
    }
    let r = u % v;
    let first = if r == 0 { v } else { r };
    Ok((first..=top).step_by(v as usize).map(|n| t.mangoldt[n as usize]).sum())
}

/// `max_{(u,v)=1} |ψ(X;v,u) - ψ(X)/φ(v)|`.
pub fn e_max(x: f64, v: u64, t: &SieveTables) -> Result<f64> {
    let total = psi_ap(x, 1, 0, t)?;
    let units: Vec<u64> = (0..v).filter(|u| u.gcd(&v) == 1).collect();
    let phi = units.len() as f64;
    units
        .iter()
        .map(|&u| Ok((psi_ap(x, v, u, t)? - total / phi).abs()))
        .try_fold(0.0f64, |m, r: Result<f64>| Ok(m.max(r?)))
}

/// `q^{11/192+ε} X^{15/16}`.
pub fn envelope_main(q: f64, x: f64, eps: f64) -> f64 {
    q.powf(11.0 / 192.0 + eps) * x.powf(15.0 / 16.0)
}

/// `q^{1/6+ε} X^{7/9}`.
pub fn envelope_bfkpm(q: f64, x: f64, eps: f64) -> f64 {
    q.powf(1.0 / 6.0 + eps) * x.powf(7.0 / 9.0)
}

/// `(qQ)^ε (Q² X^{13/18} q^{1/6} + Q^{1/2} X^{2/3} q^{1/4} + Q² q^{11/64} X^{13/16})`.
pub fn envelope_smoothed(q: f64, x: f64, big_q: f64, eps: f64) -> f64 {
    (q * big_q).powf(eps)
        * (big_q * big_q * x.powf(13.0 / 18.0) * q.powf(1.0 / 6.0)
            + big_q.sqrt() * x.powf(2.0 / 3.0) * q.powf(0.25)
            + big_q * big_q * q.powf(11.0 / 64.0) * x.powf(13.0 / 16.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct PrimeSumReport {
    pub q: u64,
    pub x: f64,
    pub u: u64,
    pub v: u64,
    pub sum: Complex64,
    /// Primes counted (`p ≤ X`, `p ≡ u (v)`, `p ≠ q`).
    pub count: u64,
    pub trivial_bound: f64,
    pub envelope_main: f64,
    pub envelope_bfkpm: f64,
    pub ratio_trivial: f64,
    pub ratio_main: f64,
    pub ratio_bfkpm: f64,
    pub in_theorem_range: bool,
    pub notes: Vec<String>,
}

fn range_notes(q: u64, x: f64, v: u64) -> Vec<String> {
    let mut notes = Vec::new();
    if !(1.0 <= x && x <= q as f64) {
        notes.push(format!("X = {x} outside 1 <= X <= q"));
    }
    if (v as f64) > (q as f64).powf(0.01) {
        notes.push(format!("v = {v} exceeds q^(1/100); outside theorem range"));
    }
    notes
}

fn check_progression(u: u64, v: u64) -> Result<()> {
    if v == 0 {
        return Err(Error::Usage("modulus v must be positive".into()));
    }
    if u.gcd(&v) != 1 {
        return Err(Error::Usage(format!("progression needs gcd(u, v) = 1, got u = {u}, v = {v}")));
    }
    Ok(())
}

/// `Σ_{p ≤ X, p ≡ u (v), p ≠ q} Kl₂(p;q)`.
pub fn prime_ap_kloosterman_sum(
    x: f64,
    u: u64,
    v: u64,
    kl: &Spectrum,
    t: &SieveTables,
    eps: f64,
) -> Result<PrimeSumReport> {
    check_progression(u, v)?;
    let top = t.check(x)?;
    let q = kl.q();
    let mut sum = 0.0f64;
    let mut count = 0u64;
    let r = u % v;
    let first = if r == 0 { v } else { r };
    for p in (first..=top).step_by(v as usize) {
        if !t.is_prime[p as usize] || p == q {
            continue;
        }
        sum += kl.values()[(p % q - 1) as usize].re;
        count += 1;
    }
    let qf = q as f64;
    let em = envelope_main(qf, x, eps);
    let eb = envelope_bfkpm(qf, x, eps);
    let trivial = 2.0 * count as f64;
    let notes = range_notes(q, x, v);
    Ok(PrimeSumReport {
        q,
        x,
        u,
        v,
        sum: Complex64::new(sum, 0.0),
        count,
        trivial_bound: trivial,
        envelope_main: em,
        envelope_bfkpm: eb,
        ratio_trivial: if trivial > 0.0 { sum.abs() / trivial } else { 0.0 },
        ratio_main: sum.abs() / em,
        ratio_bfkpm: sum.abs() / eb,
        in_theorem_range: notes.is_empty(),
        notes,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothedSumReport {
    pub q: u64,
    pub x: f64,
    pub u: u64,
    pub v: u64,
    pub big_q: f64,
    pub sum: Complex64,
    pub envelope: f64,
    pub ratio: f64,
    pub notes: Vec<String>,
}

/// `Σ_{n ≡ u (v), q ∤ n} Λ(n) Kl₂(n;q) W(n/X)`.
#[allow(clippy::too_many_arguments)]
pub fn smoothed_prime_sum(
    w: &Bump,
    x: f64,
    u: u64,
    v: u64,
    kl: &Spectrum,
    t: &SieveTables,
    big_q: f64,
    eps: f64,
) -> Result<SmoothedSumReport> {
    check_progression(u, v)?;
    let (lo, hi) = w.support();
    let top = t.check(hi * x).map_err(|_| {
        Error::Usage(format!(
            "weight support reaches {} which exceeds the sieve limit {}",
            hi * x,
            t.limit
        ))
    })?;
    let bottom = (lo * x).max(1.0).ceil() as u64;
    let q = kl.q();
    let r = u % v;
    let mut sum = 0.0f64;
    for n in bottom..=top {
        if n % v != r || n % q == 0 {
            continue;
        }
        let lam = t.mangoldt[n as usize];
        if lam == 0.0 {
            continue;
        }
        let wn = w.eval(n as f64 / x);
        if wn != 0.0 {
            sum += lam * wn * kl.values()[(n % q - 1) as usize].re;
        }
    }
    let env = envelope_smoothed(q as f64, x, big_q, eps);
    Ok(SmoothedSumReport {
        q,
        x,
        u,
        v,
        big_q,
        sum: Complex64::new(sum, 0.0),
        envelope: env,
        ratio: sum.abs() / env,
        notes: range_notes(q, x, v),
    })
}

/// One family of terms `(-1)^{j-1} C(J,j) · μ_{≤z}^{*j} * 1^{*(j-1)} * log`.
#[derive(Debug, Clone, Serialize)]
pub struct HbComponent {
    pub j: u32,
    pub coefficient: i64,
    /// Möbius-weighted variables, each `≤ z`.
    pub mobius_vars: u32,
    /// Smooth variables with weight 1.
    pub smooth_vars: u32,
}

/// Heath-Brown's identity of order `J`, valid for `n ≤ X`.
#[derive(Debug, Clone, Serialize)]
pub struct HeathBrown {
    pub x: f64,
    pub j: u32,
    /// `⌊X^{1/J}⌋`.
    pub z: u64,
    pub components: Vec<HbComponent>,
}

/// `⌊x^{1/j}⌋` for real `x ≥ 1`, exact at integer boundaries.
fn int_root(x: f64, j: u32) -> u64 {
    let pow = |r: u64| (r as f64).powi(j as i32);
    let mut r = x.powf(1.0 / j as f64).floor() as u64;
    while r > 1 && pow(r) > x {
        r -= 1;
    }
    while pow(r + 1) <= x {
        r += 1;
    }
    r.max(1)
}

pub fn binomial(n: u32, k: u32) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

impl HeathBrown {
    pub fn decompose(x: f64, j: u32) -> Result<Self> {
        if j < 2 {
            return Err(Error::Usage(format!("Heath-Brown identity needs J >= 2, got {j}")));
        }
        if !(x >= 1.0) || !x.is_finite() {
            return Err(Error::Usage(format!("X must be >= 1, got {x}")));
        }
        let components = (1..=j)
            .map(|i| HbComponent {
                j: i,
                coefficient: if i % 2 == 1 { binomial(j, i) } else { -binomial(j, i) },
                mobius_vars: i,
                smooth_vars: i - 1,
            })
            .collect();
        Ok(HeathBrown {
            x,
            j,
            z: int_root(x, j),
            components,
        })
    }

    /// Integer weights `k_d` with `Σ_{d | n} k_d log d` equal to the identity's value at `n`.
    pub fn log_weights(&self, n: u64) -> Result<Vec<(u64, i64)>> {
        if n == 0 || n as f64 > self.x {
            return Err(Error::Usage(format!("n = {n} outside [1, X = {}]", self.x)));
        }
        let divs = divisors(n);
        let idx = |d: u64| divs.binary_search(&d).expect("divisor");
        // Functions on the divisor lattice of n.
        let conv = |f: &[i64], g: &[i64]| -> Vec<i64> {
            let mut h = vec![0i64; divs.len()];
            for (a, &da) in divs.iter().enumerate() {
                if f[a] == 0 {
                    continue;
                }
                for (b, &db) in divs.iter().enumerate() {
                    if g[b] == 0 || n % (da * db) != 0 {
                        continue;
                    }
                    h[idx(da * db)] += f[a] * g[b];
                }
            }
            h
        };
        let mu_z: Vec<i64> = divs
            .iter()
            .map(|&d| if d <= self.z { crate::bilinear::mobius(d) as i64 } else { 0 })
            .collect();
        let ones = vec![1i64; divs.len()];
        let mut delta = vec![0i64; divs.len()];
        delta[0] = 1;
        let mut mu_pow = delta.clone();
        let mut one_pow = delta;
        let mut total = vec![0i64; divs.len()];
        for c in &self.components {
            mu_pow = conv(&mu_pow, &mu_z);
            if c.j > 1 {
                one_pow = conv(&one_pow, &ones);
            }
            let g = conv(&mu_pow, &one_pow);
            for (t, v) in total.iter_mut().zip(&g) {
                *t += c.coefficient * v;
            }
        }
        // The log factor d = n / e carries weight total(e).
        Ok(divs
            .iter()
            .zip(&total)
            .filter(|(_, &k)| k != 0)
            .map(|(&e, &k)| (n / e, k))
            .collect())
    }

    /// Value of the decomposition at `n`; equals `Λ(n)` for `1 ≤ n ≤ X`.
    pub fn reconstruct(&self, n: u64) -> Result<f64> {
        Ok(self
            .log_weights(n)?
            .into_iter()
            .map(|(d, k)| k as f64 * (d as f64).ln())
            .sum())
    }
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// One piece of a dyadic partition: a bump rising at `2^k` and falling at `2^{k+1}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DyadicPiece {
    pub k: i32,
    pub bump: Bump,
}

/// Smooth pieces `k = -1, …, K-1` summing to 1 on `[1, X]`; transitions at
/// `2^k` have relative half-width `0.05/Q`.
pub fn dyadic_partition(x: f64, big_q: f64) -> Result<Vec<DyadicPiece>> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::Usage(format!("X must be >= 1, got {x}")));
    }
    if !(big_q >= 1.0) {
        return Err(Error::Usage(format!("Q must be >= 1, got {big_q}")));
    }
    let h = 0.05 / big_q;
    let mut k_top = 0i32;
    while (1.0 - h) * 2f64.powi(k_top) < x {
        k_top += 1;
    }
    (-1..k_top)
        .map(|k| {
            let a = 2f64.powi(k);
            let b = 2f64.powi(k + 1);
            Ok(DyadicPiece {
                k,
                bump: Bump::new(a * (1.0 - h), a * (1.0 + h), b * (1.0 - h), b * (1.0 + h))?,
            })
        })
        .collect()
}
