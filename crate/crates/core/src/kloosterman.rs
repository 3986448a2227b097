//! Normalized hyper-Kloosterman sums
//!
//! `Kl_m(n;q) = q^{-(m-1)/2} Σ_{x_1⋯x_m = n} e((x_1+⋯+x_m)/q)`
//!
//! evaluated pointwise by enumeration and for every unit `n` at once by a
//! convolution power over the cyclic group `(Z/q)^*`.

use std::io::{self, BufRead, Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ffarith::{self, FieldCtx};
use crate::fft::Dft;

/// Pointwise evaluator with cached character and inverse tables.
#[derive(Debug, Clone)]
pub struct NaiveKl {
    q: u64,
    chars: Vec<Complex64>,
    inverses: Vec<u32>,
}

impl NaiveKl {
    pub fn new(q: u64) -> Result<Self> {
        if !ffarith::is_prime(q) {
            return Err(Error::Domain(format!("{q} is not prime")));
        }
        let units: Vec<u64> = (1..q).collect();
        let inverses = ffarith::batch_inv(&units, q)?
            .into_iter()
            .map(|x| x as u32)
            .collect();
        Ok(NaiveKl {
            q,
            chars: ffarith::char_table(q),
            inverses,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Direct enumeration over the first `m - 1` variables; the last one is
    /// solved by division. Cost `O(q^{m-1})`.
    pub fn eval(&self, m: u32, n: u64) -> Result<Complex64> {
        if m == 0 {
            return Err(Error::Usage("Kloosterman sums need m >= 1".into()));
        }
        let q = self.q;
        let n = n % q;
        if n == 0 {
            return Err(Error::Domain(format!(
                "Kl_m(n;q) needs (n,q) = 1, got n ≡ 0 mod {q}"
            )));
        }
        let mut total = Complex64::new(0.0, 0.0);
        self.accumulate(m - 1, 1, 0, n, &mut total);
        Ok(total / (q as f64).powf((m as f64 - 1.0) / 2.0))
    }

    fn accumulate(&self, free: u32, prod: u64, sum: u64, n: u64, total: &mut Complex64) {
        let q = self.q;
        if free == 0 {
            let last = n * self.inverses[(prod - 1) as usize] as u64 % q;
            *total += self.chars[((sum + last) % q) as usize];
            return;
        }
        for x in 1..q {
            self.accumulate(free - 1, prod * x % q, (sum + x) % q, n, total);
        }
    }
}

/// `Kl_m(n;q)` by direct enumeration.
pub fn kl_point(m: u32, n: u64, q: u64) -> Result<Complex64> {
    NaiveKl::new(q)?.eval(m, n)
}

/// `Kl_m(n;q)` for every unit `n`; `values[n-1] = Kl_m(n;q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    q: u64,
    m: u32,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn from_values(q: u64, m: u32, values: Vec<Complex64>) -> Result<Self> {
        if q < 2 || values.len() as u64 != q - 1 {
            return Err(Error::Usage(format!(
                "spectrum for q = {q} needs {} values, got {}",
                q.saturating_sub(1),
                values.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerics("spectrum contains non-finite entries".into()));
        }
        Ok(Spectrum { q, m, values })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `Kl_m(n;q)` for any integer `n` coprime to `q`.
    pub fn get(&self, n: u64) -> Result<Complex64> {
        let r = n % self.q;
        if r == 0 {
            return Err(Error::Domain(format!(
                "Kl_m(n;q) needs (n,q) = 1, got n ≡ 0 mod {}",
                self.q
            )));
        }
        Ok(self.values[(r - 1) as usize])
    }

    pub fn first_moment(&self) -> Complex64 {
        self.values.iter().sum()
    }

    /// `Σ_n Kl_2(n;q)^2`, which equals `q - 1 - 1/q`.
    pub fn second_moment(&self) -> Result<f64> {
        if self.m != 2 {
            return Err(Error::Usage(format!(
                "second moment is defined for m = 2, spectrum has m = {}",
                self.m
            )));
        }
        Ok(self.values.iter().map(|z| z.re * z.re).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// CSV with header `n,re,im`, doubles printed with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "n,re,im")?;
        for (i, z) in self.values.iter().enumerate() {
            writeln!(w, "{},{:.16e},{:.16e}", i + 1, z.re, z.im)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, q: u64, m: u32) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Usage(e.to_string()))?;
            if lineno == 0 {
                if line.trim() != "n,re,im" {
                    return Err(Error::Usage(format!("bad spectrum CSV header {line:?}")));
                }
                continue;
            }
            let mut cols = line.split(',');
            let bad = || Error::Usage(format!("bad spectrum CSV line {}", lineno + 1));
            let n: u64 = cols.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let re: f64 = cols.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let im: f64 = cols.next().and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            if n != values.len() as u64 + 1 {
                return Err(bad());
            }
            values.push(Complex64::new(re, im));
        }
        Spectrum::from_values(q, m, values)
    }

    /// Little-endian dump: `q: u64`, `m: u64`, then `2(q-1)` doubles
    /// `re_1, im_1, re_2, im_2, …`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&self.q.to_le_bytes())?;
        w.write_all(&(self.m as u64).to_le_bytes())?;
        for z in &self.values {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let io_err = |e: io::Error| Error::Usage(format!("spectrum binary: {e}"));
        let mut word = [0u8; 8];
        r.read_exact(&mut word).map_err(io_err)?;
        let q = u64::from_le_bytes(word);
        r.read_exact(&mut word).map_err(io_err)?;
        let m = u64::from_le_bytes(word);
        if q < 2 || m == 0 || m > u32::MAX as u64 {
            return Err(Error::Usage(format!("spectrum binary: bad header q={q} m={m}")));
        }
        let mut values = Vec::with_capacity((q - 1) as usize);
        for _ in 1..q {
            r.read_exact(&mut word).map_err(io_err)?;
            let re = f64::from_le_bytes(word);
            r.read_exact(&mut word).map_err(io_err)?;
            let im = f64::from_le_bytes(word);
            values.push(Complex64::new(re, im));
        }
        Spectrum::from_values(q, m as u32, values)
    }
}

/// All values `Kl_m(n;q)`, `n = 1..q-1`, in `O(m q log q)`.
///
/// Writing `x_i = g^{k_i}` turns the constraint `x_1⋯x_m = n` into
/// `k_1+⋯+k_m ≡ log_g n (mod q-1)`, so the unnormalized sum is the `m`-fold
/// cyclic self-convolution of `a(k) = e(g^k/q)`, taken through one DFT.
pub fn kl_spectrum(m: u32, ctx: &FieldCtx) -> Result<Spectrum> {
    if m == 0 {
        return Err(Error::Usage("Kloosterman sums need m >= 1".into()));
    }
    let q = ctx.q();
    let order = ctx.order();
    let a: Vec<Complex64> = (0..order).map(|k| ctx.char(ctx.pow_g(k) as i64)).collect();
    let conv = if m == 1 {
        a
    } else {
        let plan = Dft::new(order);
        let power: Vec<Complex64> = plan
            .forward(&a)
            .into_iter()
            .map(|z| z.powu(m))
            .collect();
        plan.inverse(&power)
    };
    let norm = (q as f64).powf((m as f64 - 1.0) / 2.0);
    let mut values = vec![Complex64::new(0.0, 0.0); order];
    for (t, z) in conv.into_iter().enumerate() {
        values[(ctx.pow_g(t) - 1) as usize] = z / norm;
    }
    Spectrum::from_values(q, m, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn degree_one_is_the_character() {
        for n in 1..13 {
            let z = kl_point(1, n, 13).unwrap();
            assert!((z - ffarith::additive_char(n as i64, 13)).norm() < 1e-14);
        }
    }

    #[test]
    fn kl2_of_one_mod_five() {
        // x ∈ {1,2,3,4} with inverses {1,3,2,4}: phases 2/5, 5/5, 5/5, 8/5.
        let expected = (2.0 + 2.0 * (4.0 * PI / 5.0).cos()) / 5f64.sqrt();
        let z = kl_point(2, 1, 5).unwrap();
        assert!((z.re - expected).abs() < 1e-14);
        assert!((expected - 0.170_820_393_249_936_9).abs() < 1e-12);
        assert!(z.im.abs() < 1e-14);
    }

    #[test]
    fn undefined_at_multiples_of_q() {
        assert!(matches!(kl_point(2, 0, 7), Err(Error::Domain(_))));
        assert!(matches!(kl_point(2, 14, 7), Err(Error::Domain(_))));
        assert!(kl_point(2, 1, 9).is_err());
        let s = kl_spectrum(2, &FieldCtx::new(7).unwrap()).unwrap();
        assert!(s.get(21).is_err());
    }

    #[test]
    fn spectrum_matches_pointwise_small() {
        for q in [3u64, 5, 7, 11, 101] {
            let ctx = FieldCtx::new(q).unwrap();
            let naive = NaiveKl::new(q).unwrap();
            for m in 1..=3 {
                let s = kl_spectrum(m, &ctx).unwrap();
                for n in 1..q {
                    let d = (s.get(n).unwrap() - naive.eval(m, n).unwrap()).norm();
                    assert!(d < 1e-10, "q={q} m={m} n={n} diff={d}");
                }
            }
        }
    }

    #[test]
    fn first_moment_by_orthogonality() {
        for q in [5u64, 7, 31, 97] {
            let ctx = FieldCtx::new(q).unwrap();
            for m in 1..=4u32 {
                let s = kl_spectrum(m, &ctx).unwrap();
                let expected = (-1f64).powi(m as i32) / (q as f64).powf((m as f64 - 1.0) / 2.0);
                let direct: Complex64 = (1..q).map(|n| kl_point(m.min(3), n, q).unwrap()).sum();
                if m <= 3 {
                    assert!((direct.re - expected).abs() < 1e-10);
                }
                assert!((s.first_moment() - Complex64::new(expected, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn second_moment_small_primes() {
        // Brute-force double sum over (x, y) gives q - 1 - 1/q.
        for q in [5u64, 7] {
            let naive = NaiveKl::new(q).unwrap();
            let brute: f64 = (1..q).map(|n| naive.eval(2, n).unwrap().norm_sqr()).sum();
            let s = kl_spectrum(2, &FieldCtx::new(q).unwrap()).unwrap();
            let expected = q as f64 - 1.0 - 1.0 / q as f64;
            assert!((brute - expected).abs() < 1e-12);
            assert!((s.second_moment().unwrap() - expected).abs() < 1e-12);
        }
        assert!((3.8 - (5.0 - 1.0 - 0.2f64)).abs() < 1e-15);
        let s3 = kl_spectrum(3, &FieldCtx::new(7).unwrap()).unwrap();
        assert!(matches!(s3.second_moment(), Err(Error::Usage(_))));
    }

    #[test]
    fn csv_and_binary_round_trip() {
        let s = kl_spectrum(2, &FieldCtx::new(101).unwrap()).unwrap();
        let mut bin = Vec::new();
        s.write_binary(&mut bin).unwrap();
        assert_eq!(bin.len(), 16 + 16 * 100);
        assert_eq!(Spectrum::read_binary(bin.as_slice()).unwrap(), s);
        let mut csv = Vec::new();
        s.write_csv(&mut csv).unwrap();
        let back = Spectrum::read_csv(csv.as_slice(), 101, 2).unwrap();
        assert_eq!(back, s);
    }
}
