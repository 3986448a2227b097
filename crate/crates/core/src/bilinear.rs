//! Bilinear forms `Σ α_m β_n Kl₂(amn;q) W(mn/X)` and the envelopes they are
//! compared against.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bump::{Bump, BumpSpec};
use crate::error::{Error, Result};
use crate::ffarith::{self, mul_mod};
use crate::kloosterman::{NaiveKl, Spectrum};
use crate::oscint::{weight_for, Weight2d, WeightParams, Which};
use crate::transforms::kl2_at_zero;

/// Largest lattice handled by [`oscillatory_form`].
pub const MAX_LATTICE_POINTS: usize = 1_000_000;

/// Inclusive integer window `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: u64,
    pub hi: u64,
}

impl Window {
    /// Integers in `[M, 2M]`.
    pub fn dyadic(len: f64) -> Result<Self> {
        Window::from_reals(len, 2.0 * len)
    }

    /// Integers in `[0.95M, 1.05M]`.
    pub fn narrow(len: f64) -> Result<Self> {
        Window::from_reals(0.95 * len, 1.05 * len)
    }

    fn from_reals(a: f64, b: f64) -> Result<Self> {
        let lo = a.ceil().max(1.0) as u64;
        let hi = b.floor() as u64;
        if !(a.is_finite() && b.is_finite()) || hi < lo {
            return Err(Error::Usage(format!("window [{a}, {b}] contains no positive integer")));
        }
        Ok(Window { lo, hi })
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }
}

/// Generated coefficient families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Family {
    RandomSign,
    RandomUnit,
    AllOnes,
    /// `μ(n)`.
    Mobius,
    /// `(n/ℓ) · W(n/lo)`, a Legendre symbol mod the odd prime `ℓ` times a smooth bump on the window.
    CharacterTwisted { modulus: u64 },
}

impl Family {
    pub fn generate(&self, w: Window, rng: &mut ChaCha8Rng) -> Result<Vec<Complex64>> {
        let one = Complex64::new(1.0, 0.0);
        Ok(match *self {
            Family::RandomSign => (0..w.len())
                .map(|_| if rng.random::<bool>() { one } else { -one })
                .collect(),
            Family::RandomUnit => (0..w.len())
                .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
                .collect(),
            Family::AllOnes => vec![one; w.len()],
            Family::Mobius => (w.lo..=w.hi).map(|n| one * mobius(n) as f64).collect(),
            Family::CharacterTwisted { modulus } => {
                if modulus < 3 || !ffarith::is_prime(modulus) {
                    return Err(Error::Usage(format!(
                        "character modulus must be an odd prime, got {modulus}"
                    )));
                }
                let span = (w.hi - w.lo) as f64 + 2.0;
                let start = w.lo as f64 - 1.0;
                let bump = Bump::new(0.0, 0.15, 0.85, 1.0)?;
                (w.lo..=w.hi)
                    .map(|n| one * legendre(n, modulus) as f64 * bump.eval((n as f64 - start) / span))
                    .collect()
            }
        })
    }
}

/// `μ(n)` by trial factorization.
pub fn mobius(n: u64) -> i8 {
    if n == 0 {
        return 0;
    }
    let f = ffarith::prime_factors(n);
    let mut r = n;
    for &p in &f {
        r /= p;
        if r % p == 0 {
            return 0;
        }
    }
    if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Legendre symbol `(n/p)` for an odd prime `p`.
pub fn legendre(n: u64, p: u64) -> i8 {
    match ffarith::pow_mod(n % p, (p - 1) / 2, p) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// Optional smoothing `W(mn/X)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Smoothing {
    pub bump: BumpSpec,
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilinearSpec {
    pub q: u64,
    pub a: u64,
    pub m_window: Window,
    pub n_window: Window,
    /// `alpha[i]` is `α_{m_window.lo + i}`.
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
    pub smoothing: Option<Smoothing>,
    pub seed: u64,
}

impl BilinearSpec {
    pub fn new(
        q: u64,
        a: u64,
        m_window: Window,
        alpha: Vec<Complex64>,
        n_window: Window,
        beta: Vec<Complex64>,
    ) -> Result<Self> {
        if alpha.len() != m_window.len() || beta.len() != n_window.len() {
            return Err(Error::Usage("coefficient lengths must match their windows".into()));
        }
        Ok(BilinearSpec {
            q,
            a,
            m_window,
            n_window,
            alpha,
            beta,
            smoothing: None,
            seed: 0,
        })
    }

    /// Coefficients on `[M, 2M]` and `[N, 2N]` drawn from the given families.
    pub fn generate(
        q: u64,
        a: u64,
        m_len: f64,
        n_len: f64,
        fa: Family,
        fb: Family,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mw = Window::dyadic(m_len)?;
        let nw = Window::dyadic(n_len)?;
        let alpha = fa.generate(mw, &mut rng)?;
        let beta = fb.generate(nw, &mut rng)?;
        let mut s = BilinearSpec::new(q, a, mw, alpha, nw, beta)?;
        s.seed = seed;
        Ok(s)
    }

    pub fn with_smoothing(mut self, smoothing: Smoothing) -> Self {
        self.smoothing = Some(smoothing);
        self
    }

    /// Swaps the roles of `(α, M)` and `(β, N)`; the form itself is unchanged.
    pub fn transpose(&self) -> Self {
        BilinearSpec {
            m_window: self.n_window,
            n_window: self.m_window,
            alpha: self.beta.clone(),
            beta: self.alpha.clone(),
            ..self.clone()
        }
    }

    pub fn norm2_alpha(&self) -> f64 {
        self.alpha.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm2_beta(&self) -> f64 {
        self.beta.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm1_alpha(&self) -> f64 {
        self.alpha.iter().map(|z| z.norm()).sum()
    }

    pub fn norm1_beta(&self) -> f64 {
        self.beta.iter().map(|z| z.norm()).sum()
    }

    fn check(&self) -> Result<()> {
        if self.a % self.q == 0 {
            return Err(Error::Domain(format!("shift a = {} is divisible by q = {}", self.a, self.q)));
        }
        if self.m_window.is_empty() || self.n_window.is_empty() {
            return Err(Error::Usage("empty coefficient window".into()));
        }
        Ok(())
    }

    fn smoothing_fn(&self) -> Result<Option<(Bump, f64)>> {
        self.smoothing
            .map(|s| Ok((Bump::from_spec(&s.bump)?, s.x)))
            .transpose()
    }
}

/// `Kl₂(r;q)` for any residue, with the `r ≡ 0` value of the defining sum.
#[inline]
fn kl2_residue(spec: &Spectrum, r: u64) -> f64 {
    if r == 0 {
        kl2_at_zero(spec.q())
    } else {
        spec.values()[(r - 1) as usize].re
    }
}

/// Exact `Σ α_m β_n Kl₂(amn;q) W(mn/X)` from a precomputed `Kl₂` spectrum.
pub fn eval_form(spec: &BilinearSpec, kl: &Spectrum) -> Result<Complex64> {
    spec.check()?;
    if kl.q() != spec.q || kl.m() != 2 {
        return Err(Error::Usage("eval_form needs the Kl_2 spectrum of the same modulus".into()));
    }
    let q = spec.q;
    let a = spec.a % q;
    let smooth = spec.smoothing_fn()?;
    let rows: Vec<Complex64> = (0..spec.alpha.len())
        .into_par_iter()
        .map(|i| {
            let alpha = spec.alpha[i];
            if alpha == Complex64::new(0.0, 0.0) {
                return Complex64::new(0.0, 0.0);
            }
            let m = spec.m_window.lo + i as u64;
            let am = mul_mod(a, m % q, q);
            let mut r = mul_mod(am, spec.n_window.lo % q, q);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, b) in spec.beta.iter().enumerate() {
                let mut k = kl2_residue(kl, r);
                if let Some((w, x)) = &smooth {
                    let n = spec.n_window.lo + j as u64;
                    k *= w.eval((m as f64) * (n as f64) / x);
                }
                acc += b * k;
                r += am;
                if r >= q {
                    r -= q;
                }
            }
            alpha * acc
        })
        .collect();
    Ok(rows.into_iter().sum())
}

/// The same form with every `Kl₂` value evaluated by direct enumeration.
pub fn eval_form_naive(spec: &BilinearSpec) -> Result<Complex64> {
    spec.check()?;
    let q = spec.q;
    let naive = NaiveKl::new(q)?;
    let smooth = spec.smoothing_fn()?;
    let mut total = Complex64::new(0.0, 0.0);
    for (i, alpha) in spec.alpha.iter().enumerate() {
        let m = spec.m_window.lo + i as u64;
        for (j, beta) in spec.beta.iter().enumerate() {
            let n = spec.n_window.lo + j as u64;
            let r = (spec.a as u128 * m as u128 * n as u128 % q as u128) as u64;
            let k = if r == 0 {
                // Σ_{x≠0} e(x/q) / √q
                (1..q).map(|x| ffarith::additive_char(x as i64, q)).sum::<Complex64>() / (q as f64).sqrt()
            } else {
                naive.eval(2, r)?
            };
            let w = match &smooth {
                Some((b, x)) => b.eval(m as f64 * n as f64 / x),
                None => 1.0,
            };
            total += alpha * beta * k * w;
        }
    }
    Ok(total)
}

/// `‖α‖₂‖β‖₂ (MN)^{1/2} (1/M + Q q^{1/2+ε}/N)^{1/2}`.
pub fn bound_fkm(m_len: f64, n_len: f64, big_q: f64, q: f64, eps: f64, norm_a: f64, norm_b: f64) -> Result<f64> {
    if !(1.0 <= m_len && m_len <= q && 1.0 <= n_len && n_len <= q) {
        return Err(Error::Usage(format!(
            "FKM envelope needs 1 <= M, N <= q, got M = {m_len}, N = {n_len}, q = {q}"
        )));
    }
    if big_q < 1.0 {
        return Err(Error::Usage(format!("Q must be >= 1, got {big_q}")));
    }
    Ok(norm_a * norm_b * (m_len * n_len).sqrt() * (1.0 / m_len + big_q * q.powf(0.5 + eps) / n_len).sqrt())
}

/// `q^ε ‖α‖₂‖β‖₂ (MN)^{1/2} (M^{-1/2} + (MN)^{-3/16} q^{11/64})`; with
/// `smooth_q = Some(Q)` the prefactor `q^ε` becomes `(q^ε Q)²`.
pub fn bound_kms(
    m_len: f64,
    n_len: f64,
    q: f64,
    eps: f64,
    norm_a: f64,
    norm_b: f64,
    smooth_q: Option<f64>,
) -> Result<f64> {
    let q4 = q.powf(0.25);
    let mn = m_len * n_len;
    if !(1.0 <= m_len) {
        return Err(Error::Range(format!("KMS range violated: 1 <= M fails (M = {m_len})")));
    }
    if !(m_len <= q4 * n_len) {
        return Err(Error::Range(format!(
            "KMS range violated: M <= q^(1/4) N fails (M = {m_len}, N = {n_len}, q = {q})"
        )));
    }
    if !(q4 < mn) {
        return Err(Error::Range(format!(
            "KMS range violated: q^(1/4) < MN fails (MN = {mn}, q = {q})"
        )));
    }
    if !(mn < q.powf(1.25)) {
        return Err(Error::Range(format!(
            "KMS range violated: MN < q^(5/4) fails (MN = {mn}, q = {q})"
        )));
    }
    let pre = match smooth_q {
        None => q.powf(eps),
        Some(bq) => (q.powf(eps) * bq).powi(2),
    };
    Ok(pre * norm_a * norm_b * mn.sqrt() * (m_len.powf(-0.5) + mn.powf(-3.0 / 16.0) * q.powf(11.0 / 64.0)))
}

/// `(q^ε Q)² M q^{1/2} (1 + Q⁴/(cM²N))`, the same for `G_T` and `H_{T,U}`.
pub fn bound_oscillatory(t: &WeightParams, _which: Which) -> Result<f64> {
    if !(t.in_t2() && t.q.fract() == 0.0 && ffarith::is_prime(t.q as u64)) {
        return Err(Error::Range(format!(
            "oscillatory envelope needs T in T2 with q prime: c={}, q={}, M={}, N={}, Q={} (cN = {}, MN = {})",
            t.c,
            t.q,
            t.m_len,
            t.n_len,
            t.big_q,
            t.c * t.n_len,
            t.m_len * t.n_len
        )));
    }
    let q4 = t.big_q.powi(4);
    Ok(t.sharpness().powi(2) * t.m_len * t.q.sqrt() * (1.0 + q4 / (t.c * t.m_len * t.m_len * t.n_len)))
}

#[derive(Debug, Clone, Serialize)]
pub struct OscFormReport {
    pub params: WeightParams,
    pub which: Which,
    pub a: u64,
    pub value: Complex64,
    pub bound: f64,
    pub ratio: f64,
    pub lattice_points: usize,
}

/// Exact lattice sum `Σ F(m,n) Kl₂(amn;q)` for a weight `F` on a box that avoids `q | mn` or not.
pub fn weighted_lattice_sum<W: Weight2d + ?Sized>(f: &W, a: u64, kl: &Spectrum) -> Result<(Complex64, usize)> {
    let q = kl.q();
    if a % q == 0 {
        return Err(Error::Domain(format!("shift a = {a} is divisible by q = {q}")));
    }
    let lat = f.support().lattice();
    let count = ((lat.m_hi - lat.m_lo + 1).max(0) as u128) * ((lat.n_hi - lat.n_lo + 1).max(0) as u128);
    if count > MAX_LATTICE_POINTS as u128 {
        return Err(Error::Resource(format!(
            "weight support holds {count} lattice points (limit {MAX_LATTICE_POINTS})"
        )));
    }
    if count == 0 {
        return Ok((Complex64::new(0.0, 0.0), 0));
    }
    let rows: Vec<Complex64> = (lat.m_lo..=lat.m_hi)
        .into_par_iter()
        .map(|m| {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in lat.n_lo..=lat.n_hi {
                let w = f.eval(m as f64, n as f64);
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let r = ((a as i128 * m as i128 * n as i128).rem_euclid(q as i128)) as u64;
                acc += w * kl2_residue(kl, r);
            }
            acc
        })
        .collect();
    Ok((rows.into_iter().sum(), count as usize))
}

/// `Σ G_T(m,n) Kl₂(amn;q)` (or `H_{T,U}`) compared with [`bound_oscillatory`].
pub fn oscillatory_form(t: &WeightParams, a: u64, which: Which, kl: &Spectrum) -> Result<OscFormReport> {
    let bound = bound_oscillatory(t, which)?;
    if kl.q() as f64 != t.q || kl.m() != 2 {
        return Err(Error::Usage("oscillatory_form needs the Kl_2 spectrum of modulus q".into()));
    }
    let f = weight_for(t, which)?;
    let (value, lattice_points) = weighted_lattice_sum(&f, a, kl)?;
    Ok(OscFormReport {
        params: *t,
        which,
        a,
        value,
        bound,
        ratio: value.norm() / bound,
        lattice_points,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScatterConfig {
    pub q: u64,
    pub a: u64,
    pub m_len: f64,
    pub n_len: f64,
    pub alpha: Family,
    pub beta: Family,
    pub eps: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScatterRow {
    pub trial: usize,
    /// `‖α‖₂‖β‖₂ √(MN)`.
    pub norm_product: f64,
    pub abs_form: f64,
    /// `2‖α‖₁‖β‖₁`.
    pub trivial: f64,
    pub bound_fkm: f64,
    /// `None` outside the KMS range.
    pub bound_kms: Option<f64>,
}

/// One form per trial with coefficients drawn from a single seeded stream.
pub fn cancellation_scatter(cfg: &ScatterConfig, kl: &Spectrum) -> Result<Vec<ScatterRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mw = Window::dyadic(cfg.m_len)?;
    let nw = Window::dyadic(cfg.n_len)?;
    let q = cfg.q as f64;
    let mut out = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials {
        let alpha = cfg.alpha.generate(mw, &mut rng)?;
        let beta = cfg.beta.generate(nw, &mut rng)?;
        let mut spec = BilinearSpec::new(cfg.q, cfg.a, mw, alpha, nw, beta)?;
        spec.seed = cfg.seed;
        let form = eval_form(&spec, kl)?;
        let (na, nb) = (spec.norm2_alpha(), spec.norm2_beta());
        out.push(ScatterRow {
            trial,
            norm_product: na * nb * (cfg.m_len * cfg.n_len).sqrt(),
            abs_form: form.norm(),
            trivial: 2.0 * spec.norm1_alpha() * spec.norm1_beta(),
            bound_fkm: bound_fkm(cfg.m_len, cfg.n_len, 1.0, q, cfg.eps, na, nb)?,
            bound_kms: bound_kms(cfg.m_len, cfg.n_len, q, cfg.eps, na, nb, None).ok(),
        });
    }
    Ok(out)
}

pub fn write_scatter_csv<W: std::io::Write>(rows: &[ScatterRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "trial,norm_product,abs_form,bound_fkm,bound_kms")?;
    for r in rows {
        let kms = r.bound_kms.map(|b| format!("{b:.16e}")).unwrap_or_default();
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e},{}",
            r.trial, r.norm_product, r.abs_form, r.bound_fkm, kms
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffarith::FieldCtx;
    use crate::kloosterman::kl_spectrum;
    use crate::oscint::OscWeight;

    fn spectrum(q: u64) -> Spectrum {
        kl_spectrum(2, &FieldCtx::new(q).unwrap()).unwrap()
    }

    #[test]
    fn single_term() {
        let q = 101;
        let kl = spectrum(q);
        let mw = Window { lo: 7, hi: 9 };
        let nw = Window { lo: 20, hi: 21 };
        let z = Complex64::new(0.0, 0.0);
        let alpha = vec![z, Complex64::new(2.0, 1.0), z];
        let beta = vec![Complex64::new(-1.5, 0.0), z];
        let spec = BilinearSpec::new(q, 5, mw, alpha, nw, beta).unwrap();
        let want = Complex64::new(2.0, 1.0) * -1.5 * kl.get(5 * 8 * 20).unwrap().re;
        assert!((eval_form(&spec, &kl).unwrap() - want).norm() < 1e-12);
    }

    #[test]
    fn matches_naive_oracle() {
        let q = 101;
        let kl = spectrum(q);
        let spec = BilinearSpec::generate(q, 3, 32.0, 32.0, Family::RandomSign, Family::RandomUnit, 5).unwrap();
        let fast = eval_form(&spec, &kl).unwrap();
        let slow = eval_form_naive(&spec).unwrap();
        assert!((fast - slow).norm() < 1e-8, "{fast} vs {slow}");
        let smoothed = spec.clone().with_smoothing(Smoothing {
            bump: BumpSpec::fixed(2.0),
            x: 32.0 * 32.0 * 2.0,
        });
        assert!((eval_form(&smoothed, &kl).unwrap() - eval_form_naive(&smoothed).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn zero_beta_and_bad_shift() {
        let q = 101;
        let kl = spectrum(q);
        let mut spec = BilinearSpec::generate(q, 3, 10.0, 10.0, Family::AllOnes, Family::AllOnes, 0).unwrap();
        spec.beta.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
        assert_eq!(eval_form(&spec, &kl).unwrap(), Complex64::new(0.0, 0.0));
        spec.a = 202;
        assert!(matches!(eval_form(&spec, &kl), Err(Error::Domain(_))));
    }

    #[test]
    fn shift_enters_mod_q_and_transpose() {
        let q = 211;
        let kl = spectrum(q);
        let spec = BilinearSpec::generate(q, 7, 12.0, 30.0, Family::Mobius, Family::RandomSign, 2).unwrap();
        let mut shifted = spec.clone();
        shifted.a = 7 + 3 * q;
        assert_eq!(eval_form(&spec, &kl).unwrap(), eval_form(&shifted, &kl).unwrap());
        let t = eval_form(&spec.transpose(), &kl).unwrap();
        assert!((t - eval_form(&spec, &kl).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn fkm_envelope_examples() {
        let q: f64 = 10007.0;
        let r = q.sqrt();
        let b = bound_fkm(r, r, 1.0, q, 0.01, 1.0, 1.0).unwrap();
        let want = r * (1.0 / r + q.powf(0.01)).sqrt();
        assert!((b - want).abs() < 1e-12 * want);
        assert!(bound_fkm(64.0, 1024.0, 1.0, q, 0.01, 1.0, 1.0).unwrap() > 0.0);
        assert!(matches!(bound_fkm(0.5, 10.0, 1.0, q, 0.01, 1.0, 1.0), Err(Error::Usage(_))));
    }

    #[test]
    fn kms_envelope_examples() {
        let q: f64 = 10007.0;
        let r = q.sqrt();
        let b = bound_kms(r, r, q, 0.0, 1.0, 1.0, None).unwrap();
        let want = r * (q.powf(-0.25) + q.powf(-1.0 / 64.0));
        assert!((b - want).abs() < 1e-10 * want);
        let err = bound_kms(1.0, 2.0, q, 0.01, 1.0, 1.0, None).unwrap_err();
        assert!(matches!(&err, Error::Range(s) if s.contains("q^(1/4) < MN")));
        assert!(bound_kms(100.0, 100.0, q, 0.01, 1.0, 1.0, None).unwrap() > 0.0);
        let s = bound_kms(100.0, 100.0, q, 0.01, 1.0, 1.0, Some(3.0)).unwrap();
        let u = bound_kms(100.0, 100.0, q, 0.01, 1.0, 1.0, None).unwrap();
        assert!((s / u - q.powf(0.01) * 9.0).abs() < 1e-9);
    }

    #[test]
    fn oscillatory_envelope_examples() {
        let q = 10007.0;
        let n = 100.0;
        let t = WeightParams::new(12.0 / n, q, n, n, 1.0, 0.01);
        let b = bound_oscillatory(&t, Which::G).unwrap();
        assert!(b > 0.0 && b <= 2.0 * t.sharpness().powi(2) * n * q.sqrt());
        let mut t2 = t;
        t2.c *= 2.0;
        let second = |t: &WeightParams| bound_oscillatory(t, Which::G).unwrap() / (t.sharpness().powi(2) * t.m_len * q.sqrt()) - 1.0;
        assert!((second(&t2) - second(&t) / 2.0).abs() < 1e-12);
        let bad = WeightParams::new(1.0, q, 200.0, 100.0, 1.0, 0.01);
        assert!(matches!(bound_oscillatory(&bad, Which::G), Err(Error::Range(_))));
    }

    #[test]
    fn oscillatory_form_conjugation() {
        let q = 101u64;
        let kl = spectrum(q);
        let t = WeightParams::new(12.0 / 10.0, q as f64, 10.0, 10.0, 1.0, 0.01);
        let rep = oscillatory_form(&t, 3, Which::G, &kl).unwrap();
        assert!(rep.ratio <= 10.0);
        let w = Bump::from_spec(&BumpSpec::fixed(t.sharpness())).unwrap();
        let flipped = OscWeight::new(-t.c, t.m_len, t.n_len, w, w, None);
        let (v, _) = weighted_lattice_sum(&flipped, 3, &kl).unwrap();
        assert!((v - rep.value.conj()).norm() < 1e-12);
    }

    #[test]
    fn scatter_is_deterministic_and_below_trivial() {
        let q = 1009;
        let kl = spectrum(q);
        let cfg = ScatterConfig {
            q,
            a: 1,
            m_len: 20.0,
            n_len: 25.0,
            alpha: Family::RandomUnit,
            beta: Family::RandomUnit,
            eps: 0.01,
            trials: 20,
            seed: 11,
        };
        let a = cancellation_scatter(&cfg, &kl).unwrap();
        let b = cancellation_scatter(&cfg, &kl).unwrap();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_scatter_csv(&a, &mut x).unwrap();
        write_scatter_csv(&b, &mut y).unwrap();
        assert_eq!(x, y);
        assert!(a.iter().all(|r| r.abs_form <= r.trivial));
    }

    #[test]
    fn arithmetic_helpers() {
        assert_eq!((1..=10).map(mobius).collect::<Vec<_>>(), vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
        assert_eq!(legendre(2, 7), 1);
        assert_eq!(legendre(3, 7), -1);
        assert_eq!(legendre(14, 7), 0);
    }
}
