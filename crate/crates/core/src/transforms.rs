//! Normalized Fourier and Voronoi transforms of `q`-periodic functions, and a
//! numerical check of the tempered Voronoi summation identity
//!
//! `Σ K(mn) G(m,n) = K̂(0)/√q · Σ G(m,n) + 1/q · Σ Ǩ(mn) Ĝ(m/q, n/q)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ffarith::{self, additive_char};
use crate::fft::Dft;
use crate::kloosterman::Spectrum;
use crate::oscint::{Weight2d, WeightBox};

/// Below this modulus transforms are computed by direct summation.
pub const DIRECT_TRANSFORM_LIMIT: u64 = 2048;

/// A function on `Z/qZ`, stored by residue `0..q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFn {
    q: u64,
    values: Vec<Complex64>,
}

/// `Kl_2(0;q)` read off the defining sum with `n = 0`: `q^{-1/2} Σ_{x≠0} e(x/q) = -q^{-1/2}`.
pub fn kl2_at_zero(q: u64) -> f64 {
    -1.0 / (q as f64).sqrt()
}

impl PeriodicFn {
    pub fn new(q: u64, values: Vec<Complex64>) -> Result<Self> {
        if q < 2 || values.len() as u64 != q {
            return Err(Error::Usage(format!(
                "periodic function mod {q} needs {q} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerics("non-finite periodic function value".into()));
        }
        Ok(PeriodicFn { q, values })
    }

    pub fn from_fn(q: u64, f: impl Fn(u64) -> Complex64) -> Result<Self> {
        PeriodicFn::new(q, (0..q).map(f).collect())
    }

    pub fn zero(q: u64) -> Result<Self> {
        PeriodicFn::from_fn(q, |_| Complex64::new(0.0, 0.0))
    }

    /// `K(n) = Kl_2(an;q)`. The residue `n ≡ 0` carries [`kl2_at_zero`],
    /// the value the defining sum takes there; with it `K̂(0) = 0` exactly.
    pub fn shifted_kloosterman(a: u64, spectrum: &Spectrum) -> Result<Self> {
        if spectrum.m() != 2 {
            return Err(Error::Usage("shifted Kloosterman kernel needs an m = 2 spectrum".into()));
        }
        let q = spectrum.q();
        if a % q == 0 {
            return Err(Error::Domain(format!("shift a must be coprime to q = {q}")));
        }
        let a = a % q;
        PeriodicFn::from_fn(q, |n| {
            if n == 0 {
                Complex64::new(kl2_at_zero(q), 0.0)
            } else {
                spectrum.values()[(ffarith::mul_mod(a, n, q) - 1) as usize]
            }
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value at any integer, reduced mod `q`.
    pub fn at(&self, n: i64) -> Complex64 {
        self.values[(n as i128).rem_euclid(self.q as i128) as usize]
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// `K̂(h) = q^{-1/2} Σ_{n mod q} K(n) e(hn/q)`.
pub fn fourier_hat(k: &PeriodicFn) -> PeriodicFn {
    if k.q < DIRECT_TRANSFORM_LIMIT {
        fourier_hat_direct(k)
    } else {
        fourier_hat_fast(k)
    }
}

pub fn fourier_hat_direct(k: &PeriodicFn) -> PeriodicFn {
    let q = k.q;
    let chars = ffarith::char_table(q);
    let scale = 1.0 / (q as f64).sqrt();
    let values = (0..q)
        .map(|h| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = 0u64;
            for v in &k.values {
                acc += v * chars[idx as usize];
                idx += h;
                if idx >= q {
                    idx -= q;
                }
            }
            acc * scale
        })
        .collect();
    PeriodicFn { q, values }
}

pub fn fourier_hat_fast(k: &PeriodicFn) -> PeriodicFn {
    let scale = 1.0 / (k.q as f64).sqrt();
    let values = Dft::new(k.q as usize)
        .backward_unnormalized(&k.values)
        .into_iter()
        .map(|z| z * scale)
        .collect();
    PeriodicFn { q: k.q, values }
}

/// `Ǩ(n) = q^{-1/2} Σ_{(h,q)=1} K̂(h) e(h̄n/q)`, computed as the Fourier
/// transform of `k ↦ K̂(k̄)` (zero at `k = 0`).
pub fn voronoi_check_kernel(k: &PeriodicFn) -> PeriodicFn {
    let q = k.q;
    let hat = fourier_hat(k);
    let units: Vec<u64> = (1..q).collect();
    let inverses = ffarith::batch_inv(&units, q).expect("prime modulus");
    let mut twisted = vec![Complex64::new(0.0, 0.0); q as usize];
    for (kk, hbar) in units.iter().zip(&inverses) {
        twisted[*kk as usize] = hat.values[*hbar as usize];
    }
    fourier_hat(&PeriodicFn { q, values: twisted })
}

/// Literal double sum for `Ǩ`, `O(q²)`.
pub fn voronoi_check_kernel_direct(k: &PeriodicFn) -> PeriodicFn {
    let q = k.q;
    let hat = fourier_hat_direct(k);
    let chars = ffarith::char_table(q);
    let units: Vec<u64> = (1..q).collect();
    let inverses = ffarith::batch_inv(&units, q).expect("prime modulus");
    let scale = 1.0 / (q as f64).sqrt();
    let values = (0..q)
        .map(|n| {
            units
                .iter()
                .zip(&inverses)
                .map(|(&h, &hbar)| hat.values[h as usize] * chars[ffarith::mul_mod(hbar, n, q) as usize])
                .sum::<Complex64>()
                * scale
        })
        .collect();
    PeriodicFn { q, values }
}

/// Closed form of `K̂(h)` for `K(n) = Kl_2(an;q)`: `0` if `q | h`, else `e(-a h̄/q)`.
pub fn shifted_kl_hat_closed(a: u64, q: u64, h: u64) -> Result<Complex64> {
    if h % q == 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let hbar = ffarith::inv(h, q)?;
    Ok(additive_char(-(ffarith::mul_mod(a % q, hbar, q) as i64), q))
}

/// Closed form of `Ǩ(n)` for `K(n) = Kl_2(an;q)`: `(q-1)/√q` on `n ≡ a`, else `-1/√q`.
pub fn shifted_kl_check_closed(a: u64, q: u64, n: u64) -> f64 {
    let s = (q as f64).sqrt();
    if n % q == a % q {
        (q as f64 - 1.0) / s
    } else {
        -1.0 / s
    }
}

/// Configuration of the dual-side evaluation in [`tempered_voronoi_residual`].
///
/// `Ĝ(r/q, s/q)` is computed for every integer pair in
/// `[-P/2, P/2)²`, `P = samples_per_unit · q`, by the trapezoidal rule on a
/// grid of spacing `1/samples_per_unit` (spectrally accurate for smooth
/// compactly supported weights) evaluated with two passes of DFTs.
/// The dual lattice sum is then truncated to `|r| ≤ trunc_m`, `|s| ≤ trunc_n`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VoronoiConfig {
    pub samples_per_unit: usize,
    pub trunc_m: i64,
    pub trunc_n: i64,
}

impl VoronoiConfig {
    /// Truncation at the full sampled band.
    pub fn full_band(q: u64, samples_per_unit: usize) -> Self {
        let half = (samples_per_unit as i64 * q as i64) / 2 - 1;
        VoronoiConfig {
            samples_per_unit,
            trunc_m: half,
            trunc_n: half,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VoronoiReport {
    pub q: u64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    /// `K̂(0)/√q · Σ G(m,n)`.
    pub zero_term: Complex64,
    /// `1/q · Σ Ǩ(mn) Ĝ(m/q, n/q)` over the truncated lattice.
    pub dual_term: Complex64,
    /// Number of primal lattice points in the weight's support.
    pub lattice_points: usize,
    /// Largest `|Ĝ|` on the truncation boundary (tail indicator).
    pub boundary_max_abs: f64,
    /// Largest `|Ĝ|` over the truncated lattice.
    pub peak_abs: f64,
    pub config: VoronoiConfig,
}

/// Evaluates both sides of the tempered Voronoi identity for `K` and a
/// compactly supported weight `G`.
///
/// The primal side is the exact finite lattice sum. The weight's support may
/// not contain lattice points with `q | mn` (the identity is only checked away
/// from `mn ≡ 0`).
pub fn tempered_voronoi_residual<W: Weight2d + ?Sized>(
    k: &PeriodicFn,
    g: &W,
    config: &VoronoiConfig,
) -> Result<VoronoiReport> {
    let q = k.q;
    let bx = g.support();
    let lattice = bx.lattice();
    let q_i = q as i64;

    let mut lhs = Complex64::new(0.0, 0.0);
    let mut g_sum = Complex64::new(0.0, 0.0);
    let mut points = 0usize;
    for m in lattice.m_lo..=lattice.m_hi {
        for n in lattice.n_lo..=lattice.n_hi {
            let w = g.eval(m as f64, n as f64);
            if w == Complex64::new(0.0, 0.0) {
                continue;
            }
            if m.rem_euclid(q_i) == 0 || n.rem_euclid(q_i) == 0 {
                return Err(Error::Domain(format!(
                    "weight support meets q | mn at ({m}, {n}); restrict the box away from multiples of q = {q}"
                )));
            }
            points += 1;
            lhs += k.at(m * n) * w;
            g_sum += w;
        }
    }

    let hat = fourier_hat(k);
    let check = voronoi_check_kernel(k);
    let zero_term = hat.values[0] / (q as f64).sqrt() * g_sum;

    let grid = DualGrid::compute(g, q, config.samples_per_unit)?;
    let tm = config.trunc_m.min(grid.half - 1);
    let tn = config.trunc_n.min(grid.half - 1);
    let mut dual = Complex64::new(0.0, 0.0);
    let mut boundary = 0.0f64;
    let mut peak = 0.0f64;
    for r in -tm..=tm {
        let mut row = Complex64::new(0.0, 0.0);
        for s in -tn..=tn {
            let gh = grid.get(r, s);
            let a = gh.norm();
            peak = peak.max(a);
            if r.abs() == tm || s.abs() == tn {
                boundary = boundary.max(a);
            }
            row += check.at(r * s) * gh;
        }
        dual += row;
    }
    dual /= q as f64;
    let rhs = zero_term + dual;
    let residual = (lhs - rhs).norm() / lhs.norm().max(1.0);
    Ok(VoronoiReport {
        q,
        lhs,
        rhs,
        residual,
        zero_term,
        dual_term: dual,
        lattice_points: points,
        boundary_max_abs: boundary,
        peak_abs: peak,
        config: *config,
    })
}

/// `Ĝ(r/q, s/q)` on the full band `r, s ∈ [-P/2, P/2)`.
pub struct DualGrid {
    len: usize,
    half: i64,
    /// Row-major `[r_index][s_index]`, index `i ↔ r = i` (wrapped).
    data: Vec<Complex64>,
}

impl DualGrid {
    pub fn compute<W: Weight2d + ?Sized>(g: &W, q: u64, samples_per_unit: usize) -> Result<Self> {
        if samples_per_unit == 0 {
            return Err(Error::Usage("samples_per_unit must be positive".into()));
        }
        let len = samples_per_unit
            .checked_mul(q as usize)
            .ok_or_else(|| Error::Resource("dual grid too large".into()))?;
        if len > 1 << 14 {
            return Err(Error::Resource(format!(
                "dual grid side {len} exceeds 16384; lower samples_per_unit or q"
            )));
        }
        let step = 1.0 / samples_per_unit as f64;
        let bx: WeightBox = g.support();
        let u0 = (bx.x_lo / step).floor() as i64;
        let u1 = (bx.x_hi / step).ceil() as i64;
        let v0 = (bx.y_lo / step).floor() as i64;
        let v1 = (bx.y_hi / step).ceil() as i64;
        let nu = (u1 - u0 + 1) as usize;
        let nv = (v1 - v0 + 1) as usize;
        if nu > len || nv > len {
            return Err(Error::Usage(format!(
                "weight support wider than q = {q}; dual sampling would alias"
            )));
        }
        let plan = Dft::new(len);
        // Pass 1: for each sampled u, transform in v. Column t ↔ frequency s.
        let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(nu);
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for iu in 0..nu {
            let u = (u0 + iu as i64) as f64 * step;
            buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for iv in 0..nv {
                buf[iv] = g.eval(u, (v0 + iv as i64) as f64 * step);
            }
            let mut f = plan.forward(&buf);
            // Shift from offset v0: e(-s v0 step / q) with step·len = q.
            for (t, z) in f.iter_mut().enumerate() {
                *z *= ffarith::additive_char(-((t as i64 * v0).rem_euclid(len as i64)), len as u64);
            }
            rows.push(f);
        }
        // Pass 2: for each frequency s, transform in u.
        let mut data = vec![Complex64::new(0.0, 0.0); len * len];
        for t in 0..len {
            buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for (iu, row) in rows.iter().enumerate() {
                buf[iu] = row[t];
            }
            let f = plan.forward(&buf);
            for (r, z) in f.into_iter().enumerate() {
                let phase = ffarith::additive_char(-((r as i64 * u0).rem_euclid(len as i64)), len as u64);
                data[r * len + t] = z * phase * step * step;
            }
        }
        Ok(DualGrid {
            len,
            half: (len / 2) as i64,
            data,
        })
    }

    /// `Ĝ(r/q, s/q)` for `|r|, |s| < P/2`.
    pub fn get(&self, r: i64, s: i64) -> Complex64 {
        let l = self.len as i64;
        let i = r.rem_euclid(l) as usize;
        let j = s.rem_euclid(l) as usize;
        self.data[i * self.len + j]
    }

    pub fn half_band(&self) -> i64 {
        self.half
    }
}
