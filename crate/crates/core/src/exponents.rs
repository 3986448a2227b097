//! Exact exponent bookkeeping for the prime-sum estimate.
//!
//! Every size is a power of `q`: `Q = q^κ`, `v = q^θ`, `X = q^x`, and the
//! factors of a Heath-Brown product are `q^{μ_i}`, `q^{ν_j}`. All arithmetic
//! here is exact over the rationals.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational; serialized as `"p/q"` (or `"p"` when integral).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Rat(BigRational::new(n.into(), d.into()))
    }

    pub fn int(n: i64) -> Self {
        Rat(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn recip(&self) -> Self {
        Rat(self.0.recip())
    }

    pub fn max_of(a: Rat, b: Rat) -> Rat {
        if a >= b {
            a
        } else {
            b
        }
    }

    pub fn min_of(a: Rat, b: Rat) -> Rat {
        if a <= b {
            a
        } else {
            b
        }
    }

    /// `self · u` as an integer, if exact.
    fn units(&self, u: i64) -> Result<i64> {
        let v = &self.0 * BigRational::from_integer(u.into());
        if !v.is_integer() {
            return Err(Error::Numerics(format!("{self} is not a multiple of 1/{u}")));
        }
        v.to_integer()
            .to_i64()
            .ok_or_else(|| Error::Range(format!("{self} overflows at scale {u}")))
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Rat {
    type Err = Error;

    /// Accepts `p/q`, integers and finite decimals such as `0.01`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Usage(format!("cannot parse rational {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            return Ok(Rat(BigRational::new(n, d)));
        }
        if let Some((ip, fp)) = s.split_once('.') {
            if fp.is_empty() || !fp.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let neg = ip.starts_with('-');
            let ip = if ip.is_empty() || ip == "-" { "0" } else { ip };
            let whole: BigInt = ip.parse().map_err(|_| bad())?;
            let frac: BigInt = fp.parse().map_err(|_| bad())?;
            let scale = num_traits::pow(BigInt::from(10), fp.len());
            let frac = BigRational::new(frac, scale);
            let mag = BigRational::from_integer(whole.abs()) + frac;
            return Ok(Rat(if neg { -mag } else { mag }));
        }
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Rat(BigRational::from_integer(n)))
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! rat_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $m(self, o: &Rat) -> Rat {
                Rat((&self.0).$m(&o.0))
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, o: Rat) -> Rat {
                Rat(self.0.$m(o.0))
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $m(self, o: &Rat) -> Rat {
                Rat(self.0.$m(&o.0))
            }
        }
        impl $tr<Rat> for &Rat {
            type Output = Rat;
            fn $m(self, o: Rat) -> Rat {
                Rat((&self.0).$m(o.0))
            }
        }
    };
}

rat_binop!(Add, add);
rat_binop!(Sub, sub);
rat_binop!(Mul, mul);
rat_binop!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

fn r(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

/// One factorization shape `X = Π M_i Π N_j` in exponent form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentPoint {
    pub x: Rat,
    pub kappa: Rat,
    pub theta: Rat,
    pub eps: Rat,
    pub mu: Vec<Rat>,
    pub nu: Vec<Rat>,
}

impl ExponentPoint {
    pub fn j(&self) -> usize {
        self.mu.len()
    }

    pub fn components(&self) -> impl Iterator<Item = &Rat> {
        self.mu.iter().chain(&self.nu)
    }

    /// `Σμ + Σν = x ≤ 1`, `μ_i ≤ x/J`, `ν` non-increasing, all non-negative.
    pub fn validate(&self) -> Result<()> {
        let j = self.mu.len();
        if j == 0 || self.nu.len() != j {
            return Err(Error::Domain(format!(
                "need J >= 1 with |mu| = |nu|, got {} and {}",
                self.mu.len(),
                self.nu.len()
            )));
        }
        if self.x > Rat::int(1) || self.x.is_negative() {
            return Err(Error::Domain(format!("x = {} outside [0, 1]", self.x)));
        }
        if self.components().any(Rat::is_negative) {
            return Err(Error::Domain("negative component".into()));
        }
        let sum = self.components().fold(Rat::zero(), |a, b| a + b);
        if sum != self.x {
            return Err(Error::Domain(format!("components sum to {sum}, expected x = {}", self.x)));
        }
        let cap = &self.x / Rat::int(j as i64);
        if let Some(m) = self.mu.iter().find(|m| **m > cap) {
            return Err(Error::Domain(format!("mu = {m} exceeds x/J = {cap}")));
        }
        if self.nu.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Domain("nu must be non-increasing".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaRange {
    pub lo: Rat,
    pub hi: Rat,
    pub feasible: bool,
}

/// `max(4κ + θ + 4ε, 5x/12 + ε) ≤ β ≤ 5x/6`.
pub fn beta_range(x: &Rat, kappa: &Rat, theta: &Rat, eps: &Rat) -> BetaRange {
    let a = Rat::int(4) * kappa + theta + Rat::int(4) * eps;
    let b = r(5, 12) * x + eps;
    let lo = Rat::max_of(a, b);
    let hi = r(5, 6) * x;
    let feasible = lo <= hi;
    BetaRange { lo, hi, feasible }
}

/// The balancing choice `β = 1/3 + 5x/18`.
pub fn beta_choice(x: &Rat) -> Rat {
    r(1, 3) + r(5, 18) * x
}

/// Sufficient condition `x ≥ 6θ/5 + 24(κ+ε)/5` for `beta_range` to be non-empty.
pub fn beta_sufficient(x: &Rat, kappa: &Rat, theta: &Rat, eps: &Rat) -> bool {
    *x >= r(6, 5) * theta + r(24, 5) * (kappa + eps)
}

fn eta_term(x: &Rat, sigma: &Rat) -> Rat {
    Rat::min_of(sigma / Rat::int(2), (x - sigma) / Rat::int(2) - r(1, 4))
}

fn subsums_rat(parts: &[Rat]) -> Vec<Rat> {
    let mut set = vec![Rat::zero()];
    for p in parts {
        let shifted: Vec<Rat> = set.iter().map(|s| s + p).collect();
        set.extend(shifted);
        set.sort();
        set.dedup();
    }
    set
}

/// `η = max_σ min(σ/2, (x-σ)/2 - 1/4) - κ/2` over all subsums `σ` of the
/// components, by meet-in-the-middle on the two halves.
pub fn eta(point: &ExponentPoint) -> Rat {
    let comps: Vec<Rat> = point.components().cloned().collect();
    let (a, b) = comps.split_at(comps.len() / 2);
    let (sa, sb) = (subsums_rat(a), subsums_rat(b));
    // The objective is unimodal in σ with peak at x/2 - 1/4, so only the
    // nearest subsums on either side matter.
    let peak = &point.x / Rat::int(2) - r(1, 4);
    let mut best: Option<Rat> = None;
    for s in &sa {
        let t = &peak - s;
        let i = sb.partition_point(|v| *v <= t);
        for k in [i.checked_sub(1), Some(i)].into_iter().flatten() {
            if let Some(v) = sb.get(k) {
                let val = eta_term(&point.x, &(s + v));
                if best.as_ref().is_none_or(|b| val > *b) {
                    best = Some(val);
                }
            }
        }
    }
    best.expect("at least the empty subsum") - &point.kappa / Rat::int(2)
}

/// `η` by enumerating all `2^{2J}` index subsets.
pub fn eta_exhaustive(point: &ExponentPoint) -> Rat {
    let comps: Vec<Rat> = point.components().cloned().collect();
    assert!(comps.len() <= 24, "exhaustive enumeration limited to 24 components");
    let mut best: Option<Rat> = None;
    for mask in 0u32..(1 << comps.len()) {
        let sigma = comps
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .fold(Rat::zero(), |a, (_, c)| a + c);
        let val = eta_term(&point.x, &sigma);
        if best.as_ref().is_none_or(|b| val > *b) {
            best = Some(val);
        }
    }
    best.unwrap() - &point.kappa / Rat::int(2)
}

/// `𝒥_x = [x/6 - ε, x/3 + ε]`.
pub fn jx_interval(x: &Rat, eps: &Rat) -> (Rat, Rat) {
    (r(1, 6) * x - eps, r(1, 3) * x + eps)
}

/// Whether some subsum of the components falls in `𝒥_x`.
pub fn has_subsum_in_jx(point: &ExponentPoint) -> bool {
    let (lo, hi) = jx_interval(&point.x, &point.eps);
    let comps: Vec<Rat> = point.components().cloned().collect();
    let (a, b) = comps.split_at(comps.len() / 2);
    let (sa, sb) = (subsums_rat(a), subsums_rat(b));
    sa.iter().any(|s| {
        let t = &lo - s;
        let i = sb.partition_point(|v| *v < t);
        sb.get(i).is_some_and(|v| s + v <= hi)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodExponents {
    pub m1: Option<Rat>,
    pub m2: Rat,
    pub m3: Option<Rat>,
}

impl MethodExponents {
    pub fn best(&self) -> Rat {
        [self.m1.clone(), Some(self.m2.clone()), self.m3.clone()]
            .into_iter()
            .flatten()
            .min()
            .unwrap()
    }
}

fn m1_value(x: &Rat, kappa: &Rat, beta: &Rat) -> Rat {
    Rat::int(2) * kappa + x + r(1, 2) - beta
}

fn m3_value(x: &Rat, kappa: &Rat, beta: &Rat) -> Rat {
    Rat::int(2) * kappa + Rat::max_of(r(7, 12) * x + beta / Rat::int(2), r(11, 64) + r(13, 16) * x)
}

/// The three method exponents at `point`, `None` where a method does not apply.
pub fn method_exponents(point: &ExponentPoint, beta: &Rat) -> MethodExponents {
    let (x, kappa) = (&point.x, &point.kappa);
    let nu1 = point.nu.first().cloned().unwrap_or_default();
    let nu2 = point.nu.get(1).cloned().unwrap_or_default();
    let m1 = (nu1 >= *beta).then(|| m1_value(x, kappa, beta));
    let m2 = x - eta(point);
    let lower = r(5, 6) * x - beta + &point.eps;
    let m3 = (lower <= nu2 && nu2 <= nu1 && nu1 <= *beta).then(|| m3_value(x, kappa, beta));
    MethodExponents { m1, m2, m3 }
}

/// `max(2κ + 13x/18 + 1/6, κ/2 + 2x/3 + 1/4, 2κ + 11/64 + 13x/16)`.
pub fn target_exponent(x: &Rat, kappa: &Rat) -> Rat {
    let a = Rat::int(2) * kappa + r(13, 18) * x + r(1, 6);
    let b = kappa / Rat::int(2) + r(2, 3) * x + r(1, 4);
    let c = Rat::int(2) * kappa + r(11, 64) + r(13, 16) * x;
    Rat::max_of(Rat::max_of(a, b), c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingConfig {
    /// Grid step `1/resolution` for `(ν₁, ν₂)`.
    pub resolution: u32,
    pub random_samples: u32,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            resolution: 2520,
            random_samples: 100_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseHistogram {
    /// `ν₁ ≥ β`.
    pub a: u64,
    /// A subsum lies in `𝒥_x`.
    pub b: u64,
    /// Neither; two large `ν` carry the mass.
    pub c: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyReport {
    pub x: Rat,
    pub kappa: Rat,
    pub theta: Rat,
    pub eps: Rat,
    pub j: u32,
    pub beta: Rat,
    pub target: Rat,
    pub sampling: SamplingConfig,
    pub grid_points: u64,
    pub random_points: u64,
    pub cases: CaseHistogram,
    /// `min (target + ε - best applicable exponent)` over all points.
    pub worst_margin: Rat,
    pub worst_point: ExponentPoint,
    pub violations: u64,
    /// Case-C points where the derived structure (`μ_i < x/6 - ε`, at most two
    /// `ν_j > x/3 + ε`, `5x/6 - β + ε ≤ ν₂ ≤ ν₁ ≤ β`) fails.
    pub chain_failures: u64,
    pub first_violation: Option<ExponentPoint>,
}

/// Integer form of the certification problem: every exponent is an integer
/// multiple of `1/unit`, and components are even multiples so that halves
/// stay integral.
struct Scaled {
    unit: i64,
    x: i64,
    kappa_half: i64,
    quarter: i64,
    beta: i64,
    jx_lo: i64,
    jx_hi: i64,
    third_hi: i64,
    c_lower: i64,
    m1: i64,
    m3: i64,
    bound: i64,
    mu_cap: i64,
}

impl Scaled {
    fn new(x: &Rat, kappa: &Rat, theta: &Rat, eps: &Rat, j: u32, resolution: u32) -> Result<Self> {
        let beta = beta_choice(x);
        let mut l = BigInt::from(resolution);
        for v in [x, kappa, theta, eps, &beta] {
            l = l.lcm(v.denom());
        }
        for d in [4, 6, 12, 16, 18, 64] {
            l = l.lcm(&BigInt::from(d));
        }
        let unit = (l * 2u32)
            .to_i64()
            .filter(|u| *u < 1 << 40)
            .ok_or_else(|| Error::Range("common denominator too large for the integer path".into()))?;
        let (jx_lo, jx_hi) = jx_interval(x, eps);
        let target = target_exponent(x, kappa);
        // Largest even unit count not exceeding x/J.
        let cap = (x * Rat::int(unit) / Rat::int(j as i64)).0.floor().to_integer();
        let cap = cap.to_i64().expect("bounded by unit");
        let mu_cap = cap - cap % 2;
        Ok(Scaled {
            unit,
            x: x.units(unit)?,
            kappa_half: (kappa / Rat::int(2)).units(unit)?,
            quarter: r(1, 4).units(unit)?,
            beta: beta.units(unit)?,
            jx_lo: jx_lo.units(unit)?,
            jx_hi: jx_hi.units(unit)?,
            third_hi: (r(1, 3) * x + eps).units(unit)?,
            c_lower: (r(5, 6) * x - &beta + eps).units(unit)?,
            m1: m1_value(x, kappa, &beta).units(unit)?,
            m3: m3_value(x, kappa, &beta).units(unit)?,
            bound: (target + eps).units(unit)?,
            mu_cap,
        })
    }

    fn rat(&self, v: i64) -> Rat {
        Rat::new(v, self.unit)
    }
}

/// Sorted distinct subsums of `parts`.
fn subsums_int(parts: &[i64], buf: &mut Vec<i64>) {
    buf.clear();
    buf.push(0);
    let mut next = Vec::with_capacity(64);
    for &p in parts {
        if p == 0 {
            continue;
        }
        next.clear();
        let (mut i, mut k) = (0, 0);
        let n = buf.len();
        while i < n || k < n {
            let v = match (buf.get(i).filter(|_| i < n), buf.get(k).map(|b| b + p)) {
                (Some(&a), Some(b)) if a <= b => {
                    i += 1;
                    a
                }
                (_, Some(b)) => {
                    k += 1;
                    b
                }
                (Some(&a), None) => {
                    i += 1;
                    a
                }
                (None, None) => unreachable!(),
            };
            if next.last() != Some(&v) {
                next.push(v);
            }
        }
        std::mem::swap(buf, &mut next);
    }
}

/// Largest `a + b ≤ t` with `a ∈ sa`, `b ∈ sb` (both sorted ascending).
fn pred(sa: &[i64], sb: &[i64], t: i64) -> Option<i64> {
    let mut best = None;
    let mut k = sb.len();
    for &a in sa {
        while k > 0 && a + sb[k - 1] > t {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        let v = a + sb[k - 1];
        if best.is_none_or(|b| v > b) {
            best = Some(v);
        }
    }
    best
}

/// Smallest `a + b ≥ t`.
fn succ(sa: &[i64], sb: &[i64], t: i64) -> Option<i64> {
    let mut best = None;
    let mut k = 0;
    for &a in sa.iter().rev() {
        while k < sb.len() && a + sb[k] < t {
            k += 1;
        }
        if k == sb.len() {
            break;
        }
        let v = a + sb[k];
        if best.is_none_or(|b| v < b) {
            best = Some(v);
        }
    }
    best
}

#[derive(Debug, Clone, Copy)]
struct PointEval {
    case: u8,
    best: i64,
    chain_ok: bool,
}

struct Workspace {
    sa: Vec<i64>,
    sb: Vec<i64>,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            sa: Vec::new(),
            sb: Vec::new(),
        }
    }

    /// `mu` and `nu` are in units of `1/s.unit`, all even.
    fn eval(&mut self, s: &Scaled, mu: &[i64], nu: &[i64]) -> PointEval {
        let comps: Vec<i64> = mu.iter().chain(nu).copied().collect();
        let (a, b) = comps.split_at(comps.len() / 2);
        subsums_int(a, &mut self.sa);
        subsums_int(b, &mut self.sb);
        let (sa, sb) = (&self.sa, &self.sb);
        let f = |sigma: i64| (sigma / 2).min((s.x - sigma) / 2 - s.quarter);
        // f peaks at σ = x/2 - 1/4.
        let lo_peak = (s.x - 2 * s.quarter).div_euclid(2);
        let mut eta = i64::MIN;
        if let Some(v) = pred(sa, sb, lo_peak) {
            eta = eta.max(f(v));
        }
        if let Some(v) = succ(sa, sb, lo_peak + 1) {
            eta = eta.max(f(v));
        }
        let eta = eta - s.kappa_half;
        let m2 = s.x - eta;

        let nu1 = nu.first().copied().unwrap_or(0);
        let nu2 = nu.get(1).copied().unwrap_or(0);
        let in_jx = succ(sa, sb, s.jx_lo).is_some_and(|v| v <= s.jx_hi);
        let a_applies = nu1 >= s.beta;
        let c_applies = s.c_lower <= nu2 && nu2 <= nu1 && nu1 <= s.beta;
        let mut best = m2;
        if a_applies {
            best = best.min(s.m1);
        }
        if c_applies {
            best = best.min(s.m3);
        }
        let (case, chain_ok) = if a_applies {
            (0, true)
        } else if in_jx {
            (1, true)
        } else {
            let mu_small = mu.iter().all(|m| *m < s.jx_lo);
            let large = nu.iter().filter(|n| **n > s.third_hi).count();
            (2, mu_small && large <= 2 && c_applies)
        };
        PointEval { case, best, chain_ok }
    }
}

/// Distributes `total` (even) over slots with even caps, as evenly as the caps
/// allow. Returns `None` if the caps cannot hold it.
fn water_fill(total: i64, caps: &[i64]) -> Option<Vec<i64>> {
    let mut order: Vec<usize> = (0..caps.len()).collect();
    order.sort_by_key(|&i| caps[i]);
    let mut out = vec![0; caps.len()];
    let mut left = total / 2;
    for (k, &i) in order.iter().enumerate() {
        let slots = (caps.len() - k) as i64;
        let give = (caps[i] / 2).min((left + slots - 1) / slots);
        out[i] = 2 * give;
        left -= give;
    }
    (left == 0).then_some(out)
}

fn greedy_fill(total: i64, caps: &[i64]) -> Option<Vec<i64>> {
    let mut left = total;
    let out = caps
        .iter()
        .map(|&c| {
            let g = c.min(left);
            left -= g;
            g
        })
        .collect();
    (left == 0).then_some(out)
}

fn structured_point(s: &Scaled, j: usize, nu1: i64, nu2: i64, greedy: bool) -> Option<(Vec<i64>, Vec<i64>)> {
    let rest = s.x - nu1 - nu2;
    let mut caps = vec![s.mu_cap; j];
    caps.extend(std::iter::repeat_n(nu2, j.saturating_sub(2)));
    let fill = if greedy {
        greedy_fill(rest, &caps)?
    } else {
        water_fill(rest, &caps)?
    };
    let mu = fill[..j].to_vec();
    let mut nu = vec![nu1, nu2];
    nu.extend_from_slice(&fill[j..]);
    nu.truncate(j);
    nu.sort_unstable_by(|a, b| b.cmp(a));
    Some((mu, nu))
}

fn random_point(s: &Scaled, j: usize, rng: &mut ChaCha8Rng) -> (Vec<i64>, Vec<i64>) {
    let half_cap = s.mu_cap / 2;
    let c = rng.random_range(0..=half_cap);
    let mu: Vec<i64> = (0..j).map(|_| 2 * rng.random_range(0..=c)).collect();
    let used: i64 = mu.iter().sum();
    let rest = (s.x - used) / 2;
    let k = rng.random_range(1..=j);
    let mut cuts: Vec<i64> = (0..k - 1).map(|_| rng.random_range(0..=rest)).collect();
    cuts.push(0);
    cuts.push(rest);
    cuts.sort_unstable();
    let mut nu: Vec<i64> = cuts.windows(2).map(|w| 2 * (w[1] - w[0])).collect();
    nu.resize(j, 0);
    nu.sort_unstable_by(|a, b| b.cmp(a));
    (mu, nu)
}

#[derive(Clone)]
struct Tally {
    cases: CaseHistogram,
    worst: (i64, Vec<i64>, Vec<i64>),
    violations: u64,
    chain_failures: u64,
    first_violation: Option<(Vec<i64>, Vec<i64>)>,
    points: u64,
}

impl Tally {
    fn new() -> Self {
        Tally {
            cases: CaseHistogram::default(),
            worst: (i64::MAX, Vec::new(), Vec::new()),
            violations: 0,
            chain_failures: 0,
            first_violation: None,
            points: 0,
        }
    }

    fn record(&mut self, s: &Scaled, e: PointEval, mu: &[i64], nu: &[i64]) {
        self.points += 1;
        match e.case {
            0 => self.cases.a += 1,
            1 => self.cases.b += 1,
            _ => self.cases.c += 1,
        }
        if !e.chain_ok {
            self.chain_failures += 1;
        }
        let margin = s.bound - e.best;
        if margin < self.worst.0 {
            self.worst = (margin, mu.to_vec(), nu.to_vec());
        }
        if margin < 0 {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some((mu.to_vec(), nu.to_vec()));
            }
        }
    }

    fn merge(mut self, o: Tally) -> Tally {
        self.cases.a += o.cases.a;
        self.cases.b += o.cases.b;
        self.cases.c += o.cases.c;
        self.points += o.points;
        self.violations += o.violations;
        self.chain_failures += o.chain_failures;
        if o.worst.0 < self.worst.0 {
            self.worst = o.worst;
        }
        if self.first_violation.is_none() {
            self.first_violation = o.first_violation;
        }
        self
    }
}

/// Checks, over a structured grid in `(ν₁, ν₂)` and seeded random points, that
/// the best applicable method exponent never exceeds `target + ε`.
pub fn certify_total(
    x: &Rat,
    kappa: &Rat,
    theta: &Rat,
    eps: &Rat,
    j: u32,
    sampling: &SamplingConfig,
) -> Result<CertifyReport> {
    if *x <= r(3, 4) || *x > Rat::int(1) {
        return Err(Error::Range(format!("certification needs 3/4 < x <= 1, got x = {x}")));
    }
    if j < 2 {
        return Err(Error::Usage(format!("J must be at least 2, got {j}")));
    }
    if sampling.resolution == 0 {
        return Err(Error::Usage("resolution must be positive".into()));
    }
    if kappa.is_negative() || theta.is_negative() || eps.is_negative() {
        return Err(Error::Domain("kappa, theta, eps must be non-negative".into()));
    }
    let beta = beta_choice(x);
    let range = beta_range(x, kappa, theta, eps);
    if !(range.lo <= beta && beta <= range.hi) {
        return Err(Error::Range(format!(
            "beta = {beta} outside feasible range [{}, {}]",
            range.lo, range.hi
        )));
    }
    let s = Scaled::new(x, kappa, theta, eps, j, sampling.resolution)?;
    let ju = j as usize;
    let step = s.unit / sampling.resolution as i64;
    let rows = s.x / step;

    let grid = (0..=rows)
        .into_par_iter()
        .map(|i| {
            let mut ws = Workspace::new();
            let mut t = Tally::new();
            let nu1 = i * step;
            for k in 0..=i.min(rows - i) {
                let nu2 = k * step;
                for greedy in [false, true] {
                    if let Some((mu, nu)) = structured_point(&s, ju, nu1, nu2, greedy) {
                        let e = ws.eval(&s, &mu, &nu);
                        t.record(&s, e, &mu, &nu);
                    }
                }
            }
            t
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::new(), Tally::merge);
    let grid_points = grid.points;

    let chunk = 4096u32;
    let chunks = sampling.random_samples.div_ceil(chunk);
    let random = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
            rng.set_stream(c as u64);
            let mut ws = Workspace::new();
            let mut t = Tally::new();
            let n = chunk.min(sampling.random_samples - c * chunk);
            for _ in 0..n {
                let (mu, nu) = random_point(&s, ju, &mut rng);
                let e = ws.eval(&s, &mu, &nu);
                t.record(&s, e, &mu, &nu);
            }
            t
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::new(), Tally::merge);
    let random_points = random.points;
    let total = grid.merge(random);

    let to_point = |mu: &[i64], nu: &[i64]| ExponentPoint {
        x: x.clone(),
        kappa: kappa.clone(),
        theta: theta.clone(),
        eps: eps.clone(),
        mu: mu.iter().map(|v| s.rat(*v)).collect(),
        nu: nu.iter().map(|v| s.rat(*v)).collect(),
    };
    Ok(CertifyReport {
        x: x.clone(),
        kappa: kappa.clone(),
        theta: theta.clone(),
        eps: eps.clone(),
        j,
        beta,
        target: target_exponent(x, kappa),
        sampling: *sampling,
        grid_points,
        random_points,
        cases: total.cases,
        worst_margin: s.rat(total.worst.0),
        worst_point: to_point(&total.worst.1, &total.worst.2),
        violations: total.violations,
        chain_failures: total.chain_failures,
        first_violation: total.first_violation.map(|(m, n)| to_point(&m, &n)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub x: Rat,
    pub kappa_star: Rat,
    pub exponent: Rat,
    /// `5/96 + 61x/72` and `85/384 + 67x/96`.
    pub secondary: [Rat; 2],
    pub dominated: bool,
    /// `Q = q^{κ*} ≥ 40` holds iff `q ≥ 40^{threshold_power}`.
    pub threshold_power: Option<Rat>,
    /// `40^{threshold_power}` in decimal, when the power is an integer.
    pub q_threshold: Option<String>,
}

/// The final choice `Q = q^{-11/192} X^{1/16}` and the resulting exponent.
pub fn balance_final(x: &Rat) -> Result<BalanceReport> {
    if *x < r(11, 12) || *x > Rat::int(1) {
        return Err(Error::Range(format!("balancing needs 11/12 <= x <= 1, got x = {x}")));
    }
    let kappa_star = r(-11, 192) + x / Rat::int(16);
    let exponent = r(11, 192) + r(15, 16) * x;
    let s1 = r(5, 96) + r(61, 72) * x;
    let s2 = r(85, 384) + r(67, 96) * x;
    let dominated = s1 <= exponent && s2 <= exponent;
    let threshold_power = (!kappa_star.is_negative() && !kappa_star.0.is_zero()).then(|| kappa_star.recip());
    let q_threshold = threshold_power
        .as_ref()
        .filter(|p| p.is_integer())
        .and_then(|p| p.numer().to_usize())
        .map(|p| num_traits::pow(BigInt::from(40), p).to_string());
    Ok(BalanceReport {
        x: x.clone(),
        kappa_star,
        exponent,
        secondary: [s1, s2],
        dominated,
        threshold_power,
        q_threshold,
    })
}

/// `x` below which `q^{11/192} X^{15/16}` beats `q^{1/6} X^{7/9}`.
pub fn crossover() -> Rat {
    // 11/192 + 15x/16 = 1/6 + 7x/9
    (r(1, 6) - r(11, 192)) / (r(15, 16) - r(7, 9))
}

/// Exponent comparison of the two bounds at `X = q^x`.
pub fn main_beats_bfkpm(x: &Rat) -> bool {
    r(11, 192) + r(15, 16) * x < r(1, 6) + r(7, 9) * x
}
