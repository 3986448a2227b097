//! Oscillatory weights `G_T(x,y) = W₁(x/M) W₂(y/N) e(cxy)` and
//! `H_{T,U} = G_T · W₃(xy/U)`, their two-dimensional Fourier transforms
//! `F̂(s,t) = ∬ F(u,v) e(-su - tv) du dv`, the non-stationary decay table and
//! the stationary-phase main term `(1/c)·𝒲(m,n)·e(-mn/(cq²))`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bump::{Bump, BumpSpec};
use crate::error::{Error, Result};
use crate::quad::{GaussLegendre, QuadConfig, QuadResult};

/// `e(θ) = exp(2πiθ)` for real `θ`, reduced mod 1 first.
#[inline]
pub fn e(theta: f64) -> Complex64 {
    let f = theta - theta.round();
    let (s, c) = (2.0 * PI * f).sin_cos();
    Complex64::new(c, s)
}

/// Axis-aligned rectangle containing a weight's support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightBox {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

/// Integer points `[m_lo, m_hi] × [n_lo, n_hi]` of a [`WeightBox`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LatticeBox {
    pub m_lo: i64,
    pub m_hi: i64,
    pub n_lo: i64,
    pub n_hi: i64,
}

impl WeightBox {
    pub fn lattice(&self) -> LatticeBox {
        LatticeBox {
            m_lo: self.x_lo.ceil() as i64,
            m_hi: self.x_hi.floor() as i64,
            n_lo: self.y_lo.ceil() as i64,
            n_hi: self.y_hi.floor() as i64,
        }
    }

    pub fn area(&self) -> f64 {
        (self.x_hi - self.x_lo).max(0.0) * (self.y_hi - self.y_lo).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.x_hi <= self.x_lo || self.y_hi <= self.y_lo
    }
}

/// A compactly supported weight on `R²` with a bilinear phase `e(c·xy)`.
pub trait Weight2d: Sync {
    fn eval(&self, x: f64, y: f64) -> Complex64;

    fn support(&self) -> WeightBox;

    /// The coefficient `c` of the phase `e(cxy)` (0 if there is none).
    fn chirp(&self) -> f64;

    /// Narrowest amplitude feature along `x` and `y`.
    fn feature_scale(&self) -> (f64, f64);

    /// `out[i·ys.len() + j] = eval(xs[i], ys[j])`.
    fn eval_grid(&self, xs: &[f64], ys: &[f64], out: &mut [Complex64]) {
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in ys.iter().enumerate() {
                out[i * ys.len() + j] = self.eval(x, y);
            }
        }
    }
}

/// The tuple `T = (c, q, M, N, Q)` with optional `U` and the run's `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    pub c: f64,
    pub q: f64,
    pub m_len: f64,
    pub n_len: f64,
    pub big_q: f64,
    #[serde(default)]
    pub u: Option<f64>,
    pub eps: f64,
}

impl WeightParams {
    pub fn new(c: f64, q: f64, m_len: f64, n_len: f64, big_q: f64, eps: f64) -> Self {
        WeightParams {
            c,
            q,
            m_len,
            n_len,
            big_q,
            u: None,
            eps,
        }
    }

    pub fn with_u(mut self, u: f64) -> Self {
        self.u = Some(u);
        self
    }

    /// `q^ε Q`, the derivative scale of the bumps.
    pub fn sharpness(&self) -> f64 {
        self.q.powf(self.eps) * self.big_q
    }

    /// `cMN / (q^ε Q)²`.
    pub fn oscillation_ratio(&self) -> f64 {
        self.c * self.m_len * self.n_len / self.sharpness().powi(2)
    }

    pub fn in_t1(&self) -> bool {
        self.c > 0.0
            && self.q >= 1.0
            && self.m_len >= 0.5
            && self.n_len >= 0.5
            && self.big_q >= 1.0
            && self.eps > 0.0
            && self.oscillation_ratio() >= 1.0
    }

    pub fn in_t2(&self) -> bool {
        self.in_t1()
            && self.m_len <= self.n_len
            && self.n_len <= self.q
            && self.m_len * self.n_len <= self.q
            && self.c * self.n_len >= 6.0
    }

    pub fn check_t1(&self) -> Result<()> {
        let all_finite = [self.c, self.q, self.m_len, self.n_len, self.big_q, self.eps]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite || !self.in_t1() {
            return Err(Error::Domain(format!(
                "weight parameters outside T1: c={}, q={}, M={}, N={}, Q={}, eps={} (cMN/(q^eps Q)^2 = {})",
                self.c,
                self.q,
                self.m_len,
                self.n_len,
                self.big_q,
                self.eps,
                self.oscillation_ratio()
            )));
        }
        Ok(())
    }

    /// `cqM` and `cqN`, the centre of the stationary box in `(n, m)`.
    pub fn cqm(&self) -> f64 {
        self.c * self.q * self.m_len
    }

    pub fn cqn(&self) -> f64 {
        self.c * self.q * self.n_len
    }
}

/// `G_T` or `H_{T,U}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    G,
    H,
}

/// `W₁(x/M) W₂(y/N) [W₃(xy/U)] e(cxy)`.
#[derive(Debug, Clone)]
pub struct OscWeight {
    w1: Bump,
    w2: Bump,
    w3: Option<(Bump, f64)>,
    c: f64,
    m_len: f64,
    n_len: f64,
    vanishes: bool,
}

impl OscWeight {
    /// Assembles a weight without checking `T₁` membership (used for `c = 0` plumbing).
    pub fn new(c: f64, m_len: f64, n_len: f64, w1: Bump, w2: Bump, w3: Option<(Bump, f64)>) -> Self {
        let vanishes = match w3 {
            Some((b, u)) => {
                // xy/U ranges over the box image; W₃ vanishes outside its support.
                let (lo, hi) = b.support();
                let (x_lo, x_hi) = (w1.support().0 * m_len, w1.support().1 * m_len);
                let (y_lo, y_hi) = (w2.support().0 * n_len, w2.support().1 * n_len);
                x_hi * y_hi / u <= lo || x_lo * y_lo / u >= hi
            }
            None => false,
        };
        OscWeight {
            w1,
            w2,
            w3,
            c,
            m_len,
            n_len,
            vanishes,
        }
    }

    /// True when the weight is identically zero.
    pub fn vanishes(&self) -> bool {
        self.vanishes
    }

    /// Real amplitude `W₁(x/M) W₂(y/N) [W₃(xy/U)]`.
    pub fn amplitude(&self, x: f64, y: f64) -> f64 {
        if self.vanishes {
            return 0.0;
        }
        let mut a = self.w1.eval(x / self.m_len) * self.w2.eval(y / self.n_len);
        if let Some((w3, u)) = &self.w3 {
            if a != 0.0 {
                a *= w3.eval(x * y / u);
            }
        }
        a
    }
}

impl Weight2d for OscWeight {
    fn eval(&self, x: f64, y: f64) -> Complex64 {
        let a = self.amplitude(x, y);
        if a == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        e(self.c * x * y) * a
    }

    fn support(&self) -> WeightBox {
        let (a, b) = self.w1.support();
        let (c, d) = self.w2.support();
        WeightBox {
            x_lo: a * self.m_len,
            x_hi: b * self.m_len,
            y_lo: c * self.n_len,
            y_hi: d * self.n_len,
        }
    }

    fn chirp(&self) -> f64 {
        self.c
    }

    fn feature_scale(&self) -> (f64, f64) {
        let mut fx = self.w1.transition_width() * self.m_len;
        let mut fy = self.w2.transition_width() * self.n_len;
        if let Some((w3, u)) = &self.w3 {
            let bx = self.support();
            fx = fx.min(w3.transition_width() * u / bx.y_hi);
            fy = fy.min(w3.transition_width() * u / bx.x_hi);
        }
        (fx, fy)
    }

    fn eval_grid(&self, xs: &[f64], ys: &[f64], out: &mut [Complex64]) {
        let zero = Complex64::new(0.0, 0.0);
        if self.vanishes {
            out[..xs.len() * ys.len()].iter_mut().for_each(|z| *z = zero);
            return;
        }
        let col: Vec<f64> = ys.iter().map(|&y| self.w2.eval(y / self.n_len)).collect();
        for (i, &x) in xs.iter().enumerate() {
            let row = &mut out[i * ys.len()..(i + 1) * ys.len()];
            let a1 = self.w1.eval(x / self.m_len);
            if a1 == 0.0 {
                row.iter_mut().for_each(|z| *z = zero);
                continue;
            }
            for ((z, &y), &a2) in row.iter_mut().zip(ys).zip(&col) {
                let mut a = a1 * a2;
                if a != 0.0 {
                    if let Some((w3, u)) = &self.w3 {
                        a *= w3.eval(x * y / u);
                    }
                }
                *z = if a == 0.0 { zero } else { e(self.c * x * y) * a };
            }
        }
    }
}

/// `G_T(x,y) = W₁(x/M) W₂(y/N) e(cxy)` with fixed-support bumps of sharpness `q^ε Q`.
pub fn g_weight(t: &WeightParams) -> Result<OscWeight> {
    t.check_t1()?;
    let w = Bump::from_spec(&BumpSpec::fixed(t.sharpness()))?;
    Ok(OscWeight::new(t.c, t.m_len, t.n_len, w, w, None))
}

/// `H_{T,U} = G_T · W₃(xy/U)`; identically zero unless `MN/8 < U < 8MN`.
pub fn h_weight(t: &WeightParams) -> Result<OscWeight> {
    t.check_t1()?;
    let u = t
        .u
        .ok_or_else(|| Error::Usage("h_weight needs U in the weight parameters".into()))?;
    if !(u >= 1.0) || !u.is_finite() {
        return Err(Error::Usage(format!("U must be >= 1, got {u}")));
    }
    let w = Bump::from_spec(&BumpSpec::fixed(t.sharpness()))?;
    let mn = t.m_len * t.n_len;
    let mut weight = OscWeight::new(t.c, t.m_len, t.n_len, w, w, Some((w, u)));
    if !(mn / 8.0 < u && u < 8.0 * mn) {
        weight.vanishes = true;
    }
    Ok(weight)
}

pub fn weight_for(t: &WeightParams, which: Which) -> Result<OscWeight> {
    match which {
        Which::G => g_weight(t),
        Which::H => h_weight(t),
    }
}

/// Panel layout of one axis: `panels` equal panels with `rule` nodes each.
fn axis_nodes(rule: &GaussLegendre, lo: f64, hi: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (nodes, weights) = rule.nodes_weights();
    let h = (hi - lo) / panels as f64;
    let mut xs = Vec::with_capacity(panels * nodes.len());
    let mut ws = Vec::with_capacity(panels * nodes.len());
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        for (x, w) in nodes.iter().zip(weights) {
            xs.push(mid + 0.5 * h * x);
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}

fn tensor_rule<W: Weight2d + ?Sized>(
    f: &W,
    rule: &GaussLegendre,
    bx: &WeightBox,
    s: f64,
    t: f64,
    pu: usize,
    pv: usize,
) -> Complex64 {
    let (us, wu) = axis_nodes(rule, bx.x_lo, bx.x_hi, pu);
    let (vs, wv) = axis_nodes(rule, bx.y_lo, bx.y_hi, pv);
    let col: Vec<Complex64> = vs.iter().zip(&wv).map(|(&v, &w)| e(-t * v) * w).collect();
    const CHUNK: usize = 32;
    let mut buf = vec![Complex64::new(0.0, 0.0); CHUNK * vs.len()];
    let mut total = Complex64::new(0.0, 0.0);
    for (ci, xs) in us.chunks(CHUNK).enumerate() {
        let out = &mut buf[..xs.len() * vs.len()];
        f.eval_grid(xs, &vs, out);
        for (k, &x) in xs.iter().enumerate() {
            let row = &out[k * vs.len()..(k + 1) * vs.len()];
            let inner: Complex64 = row.iter().zip(&col).map(|(a, b)| a * b).sum();
            total += inner * e(-s * x) * wu[ci * CHUNK + k];
        }
    }
    total
}

/// `F̂(s,t) = ∬ F(u,v) e(-su - tv) du dv` by tensor-product panel
/// Gauss–Legendre quadrature. Panel counts start from the exact phase
/// gradient of `cuv - su - tv` over the support and the amplitude feature
/// scale, then double on both axes until successive estimates agree to
/// `cfg.tol_per_area · area`.
pub fn fourier2d<W: Weight2d + ?Sized>(f: &W, s: f64, t: f64, cfg: &QuadConfig) -> Result<QuadResult> {
    let bx = f.support();
    if bx.is_empty() {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            panels: 0,
        });
    }
    let c = f.chirp();
    let freq_u = (c * bx.y_lo - s).abs().max((c * bx.y_hi - s).abs());
    let freq_v = (c * bx.x_lo - t).abs().max((c * bx.x_hi - t).abs());
    let (feat_u, feat_v) = f.feature_scale();
    let start = |freq: f64, feat: f64, width: f64| -> usize {
        let by_freq = (cfg.panels_per_period * freq * width).ceil();
        let by_feat = if feat > 0.0 {
            (cfg.panels_per_feature * width / feat).ceil()
        } else {
            1.0
        };
        by_freq.max(by_feat).max(1.0) as usize
    };
    let mut pu = start(freq_u, feat_u, bx.x_hi - bx.x_lo);
    let mut pv = start(freq_v, feat_v, bx.y_hi - bx.y_lo);
    let tol = cfg.tol_per_area * bx.area();
    let rule = GaussLegendre::new(cfg.order);
    if 2 * pu.max(pv) > cfg.max_panels {
        return Err(Error::Numerics(format!(
            "fourier2d at ({s}, {t}) needs {pu}x{pv} panels (budget {})",
            cfg.max_panels
        )));
    }
    let mut coarse = tensor_rule(f, &rule, &bx, s, t, pu, pv);
    loop {
        let fine = tensor_rule(f, &rule, &bx, s, t, 2 * pu, 2 * pv);
        let err = (fine - coarse).norm();
        if err <= tol {
            return Ok(QuadResult {
                value: fine,
                error: err,
                panels: 4 * pu * pv,
            });
        }
        pu *= 2;
        pv *= 2;
        if 2 * pu.max(pv) > cfg.max_panels {
            return Err(Error::Numerics(format!(
                "fourier2d at ({s}, {t}) did not reach tolerance {tol:e}: estimate {fine}, difference {err:e} with {pu}x{pv} panels"
            )));
        }
        coarse = fine;
    }
}

/// The cases of the non-stationary decay table, in printed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `|n| ≥ 1.1cqM` and `|m| ≥ 1.1cqN`.
    BothLarge,
    /// `|n| ≥ 1.1cqM` and `|m| ≤ 1.1cqN`.
    LargeN,
    /// `|n| ≤ 1.1cqM` and `|m| ≥ 1.1cqN`.
    LargeM,
    /// `n` or `m` below the stationary window.
    Transitional,
    /// Open box `(0.9cqN, 1.1cqN) × (0.9cqM, 1.1cqM)`.
    Stationary,
}

impl Region {
    pub const NONSTATIONARY: [Region; 4] = [Region::BothLarge, Region::LargeN, Region::LargeM, Region::Transitional];

    pub fn name(&self) -> &'static str {
        match self {
            Region::BothLarge => "both_large",
            Region::LargeN => "large_n",
            Region::LargeM => "large_m",
            Region::Transitional => "transitional",
            Region::Stationary => "stationary",
        }
    }
}

/// First-match classification of `(m, n)`.
pub fn classify(t: &WeightParams, m: i64, n: i64) -> Region {
    let (m, n) = (m as f64, n as f64);
    let (cqm, cqn) = (t.cqm(), t.cqn());
    let big_n = n.abs() >= 1.1 * cqm;
    let big_m = m.abs() >= 1.1 * cqn;
    if big_n && big_m {
        Region::BothLarge
    } else if big_n && m.abs() <= 1.1 * cqn {
        Region::LargeN
    } else if n.abs() <= 1.1 * cqm && big_m {
        Region::LargeM
    } else if (-1.1 * cqm <= n && n <= 0.9 * cqm && m.abs() <= 1.1 * cqn)
        || (n.abs() <= 1.1 * cqm && -1.1 * cqn <= m && m <= 0.9 * cqn)
    {
        Region::Transitional
    } else {
        Region::Stationary
    }
}

/// The decay bound of `region` at `(m, n)` with implied constant 1.
pub fn region_bound(t: &WeightParams, region: Region, m: i64, n: i64) -> Option<f64> {
    let eps = t.eps;
    let x = t.sharpness();
    let qx = t.q * x;
    let mn = t.m_len * t.n_len;
    let (m, n) = (m.unsigned_abs() as f64, n.unsigned_abs() as f64);
    match region {
        Region::BothLarge => Some(qx.powf(2.0 + eps) / (m * n).powf(1.0 + eps)),
        Region::LargeN => Some(mn * (qx / (n * t.n_len)).powf(2.0 + eps)),
        Region::LargeM => Some(mn * (qx / (m * t.m_len)).powf(2.0 + eps)),
        Region::Transitional => Some(x * x / (t.c * t.c * mn)),
        Region::Stationary => None,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayRow {
    pub m: i64,
    pub n: i64,
    pub value: Complex64,
    pub bound: f64,
    pub ratio: f64,
    pub region: Region,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionFit {
    pub region: Region,
    pub points: usize,
    /// `max |F̂| / bound` over the region's rows.
    pub fitted: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub params: WeightParams,
    pub which: Which,
    pub rows: Vec<DecayRow>,
    /// Pairs skipped because they lie in the stationary box.
    pub excluded: Vec<(i64, i64)>,
    pub fits: Vec<RegionFit>,
}

impl DecayReport {
    pub fn max_fitted(&self) -> f64 {
        self.fits.iter().map(|f| f.fitted).fold(0.0, f64::max)
    }
}

/// `|F̂(m/q, n/q)|` against the region bounds on the given pairs.
pub fn nonstationary_report(
    t: &WeightParams,
    grid: &[(i64, i64)],
    which: Which,
    cfg: &QuadConfig,
) -> Result<DecayReport> {
    let f = weight_for(t, which)?;
    let mut excluded = Vec::new();
    let mut work = Vec::new();
    for &(m, n) in grid {
        match classify(t, m, n) {
            Region::Stationary => excluded.push((m, n)),
            r => work.push((m, n, r)),
        }
    }
    let rows = work
        .par_iter()
        .map(|&(m, n, region)| {
            let v = fourier2d(&f, m as f64 / t.q, n as f64 / t.q, cfg)?.value;
            let bound = region_bound(t, region, m, n).expect("non-stationary region");
            Ok(DecayRow {
                m,
                n,
                value: v,
                bound,
                ratio: v.norm() / bound,
                region,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fits = Region::NONSTATIONARY
        .iter()
        .filter_map(|&region| {
            let sel: Vec<&DecayRow> = rows.iter().filter(|r| r.region == region).collect();
            if sel.is_empty() {
                return None;
            }
            Some(RegionFit {
                region,
                points: sel.len(),
                fitted: sel.iter().map(|r| r.ratio).fold(0.0, f64::max),
            })
        })
        .collect();
    Ok(DecayReport {
        params: *t,
        which,
        rows,
        excluded,
        fits,
    })
}

/// A deterministic probe grid for the decay table: for each region, pairs
/// hugging its boundary with the stationary window plus pairs further out.
pub fn decay_probe_grid(t: &WeightParams, per_region: usize) -> Vec<(i64, i64)> {
    let (cqm, cqn) = (t.cqm(), t.cqn());
    let k = per_region.max(2);
    let frac = |i: usize| i as f64 / (k - 1) as f64;
    let mut pts = Vec::new();
    // Both large: radial sweep out from the corner (1.1cqN, 1.1cqM).
    for i in 0..k {
        let g = 1.0 + 3.0 * frac(i);
        let sm = if i % 2 == 0 { 1.0 } else { -1.0 };
        let sn = if i % 3 == 0 { 1.0 } else { -1.0 };
        pts.push(((sm * 1.1 * cqn * g).ceil() as i64, (sn * 1.1 * cqm * (1.0 + 2.0 * frac(k - 1 - i))).ceil() as i64));
    }
    // Large n with m across its whole range.
    for i in 0..k {
        let m = (-1.1 + 2.2 * frac(i)) * cqn;
        let n = 1.1 * cqm * (1.0 + 2.0 * frac(i % 3));
        let sn = if i % 2 == 0 { 1.0 } else { -1.0 };
        pts.push((m.trunc() as i64, (sn * n).ceil() as i64));
    }
    // Large m with n across its whole range.
    for i in 0..k {
        let n = (-1.1 + 2.2 * frac(i)) * cqm;
        let m = 1.1 * cqn * (1.0 + 2.0 * frac(i % 3));
        let sm = if i % 2 == 0 { 1.0 } else { -1.0 };
        pts.push(((sm * m).ceil() as i64, n.trunc() as i64));
    }
    // Transitional: both arms, including m = 0 and n = 0 and the 0.9 edges.
    for i in 0..k {
        let a = -1.1 + 2.0 * frac(i);
        let b = -1.1 + 2.2 * frac((i * 7) % k);
        if i % 2 == 0 {
            pts.push(((b * cqn).trunc() as i64, (a * cqm).floor() as i64));
        } else {
            pts.push(((a * cqn).floor() as i64, (b * cqm).trunc() as i64));
        }
    }
    pts.push((0, (0.9 * cqm).floor() as i64));
    pts.push(((0.9 * cqn).floor() as i64, 0));
    pts.push(((cqn).round() as i64, (0.9 * cqm).floor() as i64));
    pts.push(((0.9 * cqn).floor() as i64, (cqm).round() as i64));
    pts
}

/// Critical points `ṽ = √(muN/n)` and `ũ = mn/(q²c²N)`.
pub fn critical_points(t: &WeightParams, u: f64, m: i64, n: i64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Domain("critical point undefined at n = 0".into()));
    }
    if m <= 0 || n < 0 || !(u > 0.0) {
        return Err(Error::Domain(format!(
            "critical points need m, n, u > 0, got m={m}, n={n}, u={u}"
        )));
    }
    let (mf, nf) = (m as f64, n as f64);
    let v_tilde = (mf * u * t.n_len / nf).sqrt();
    let u_tilde = mf * nf / (t.q * t.q * t.c * t.c * t.n_len);
    if stationary_contains(t, m, n) && (0.85 * t.m_len..=1.15 * t.m_len).contains(&u) {
        let ok_v = (0.5 * t.n_len..=2.0 * t.n_len).contains(&v_tilde);
        let ok_u = (0.5 * t.m_len..=2.0 * t.m_len).contains(&u_tilde);
        if !(ok_v && ok_u) {
            return Err(Error::Numerics(format!(
                "critical points ({v_tilde}, {u_tilde}) left their expected windows"
            )));
        }
    }
    Ok((v_tilde, u_tilde))
}

/// `(m, n) ∈ [0.9cqN, 1.1cqN] × [0.9cqM, 1.1cqM]`.
pub fn stationary_contains(t: &WeightParams, m: i64, n: i64) -> bool {
    let (m, n) = (m as f64, n as f64);
    (0.9 * t.cqn()..=1.1 * t.cqn()).contains(&m) && (0.9 * t.cqm()..=1.1 * t.cqm()).contains(&n)
}

/// Integer bounds `(m_lo, m_hi, n_lo, n_hi)` of the stationary box.
pub fn stationary_box(t: &WeightParams) -> (i64, i64, i64, i64) {
    (
        (0.9 * t.cqn()).ceil() as i64,
        (1.1 * t.cqn()).floor() as i64,
        (0.9 * t.cqm()).ceil() as i64,
        (1.1 * t.cqm()).floor() as i64,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct StationaryRow {
    pub m: i64,
    pub n: i64,
    /// `F̂(m/q, n/q)`.
    pub raw: Complex64,
    /// `F̂(m/q, n/q) · e(mn/(cq²))`.
    pub corrected: Complex64,
    /// `(1/c) · A(n/(cq), m/(cq))`, `A` the amplitude at the stationary point.
    pub leading: f64,
    /// `|R - leading|`.
    pub residual: f64,
}

fn stationary_row(t: &WeightParams, f: &OscWeight, m: i64, n: i64, cfg: &QuadConfig) -> Result<StationaryRow> {
    let raw = fourier2d(f, m as f64 / t.q, n as f64 / t.q, cfg)?.value;
    let corrected = raw * e(main_phase(t, m, n));
    let leading = f.amplitude(n as f64 / (t.c * t.q), m as f64 / (t.c * t.q)) / t.c;
    Ok(StationaryRow {
        m,
        n,
        raw,
        corrected,
        leading,
        residual: (corrected - leading).norm(),
    })
}

/// `mn/(cq²)` reduced mod 1 in exact integer arithmetic where possible.
fn main_phase(t: &WeightParams, m: i64, n: i64) -> f64 {
    let mn = m as i128 * n as i128;
    let q = t.q;
    if q.fract() == 0.0 && q < 1e9 {
        // mn/(cq²) = (mn mod q²)/(cq²) + floor(mn/q²)/c.
        let q2 = (q as i128) * (q as i128);
        let (hi, lo) = (mn.div_euclid(q2), mn.rem_euclid(q2));
        let a = lo as f64 / (t.c * q * q);
        let b = (hi as f64 / t.c).fract();
        (a + b).fract()
    } else {
        mn as f64 / (t.c * q * q)
    }
}

/// Phase-corrected transforms `R(m,n) = F̂(m/q,n/q)·e(mn/(cq²))` on box points.
pub fn stationary_extract(
    t: &WeightParams,
    grid: &[(i64, i64)],
    which: Which,
    cfg: &QuadConfig,
) -> Result<Vec<StationaryRow>> {
    if let Some(&(m, n)) = grid.iter().find(|&&(m, n)| !stationary_contains(t, m, n)) {
        return Err(Error::Domain(format!("({m}, {n}) lies outside the stationary box")));
    }
    let f = weight_for(t, which)?;
    grid.par_iter().map(|&(m, n)| stationary_row(t, &f, m, n, cfg)).collect()
}

/// `side × side` evenly spaced points of the stationary box.
pub fn stationary_grid(t: &WeightParams, side: usize) -> Vec<(i64, i64)> {
    let (m_lo, m_hi, n_lo, n_hi) = stationary_box(t);
    let pick = |lo: i64, hi: i64, i: usize| -> i64 {
        if side <= 1 {
            (lo + hi) / 2
        } else {
            lo + ((hi - lo) as f64 * i as f64 / (side - 1) as f64).round() as i64
        }
    };
    let mut pts = Vec::with_capacity(side * side);
    for i in 0..side {
        for j in 0..side {
            pts.push((pick(m_lo, m_hi, i), pick(n_lo, n_hi, j)));
        }
    }
    pts
}

/// Layout of the stationary-phase checks.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StationaryLayout {
    /// Points per side of the box grid.
    pub side: usize,
    /// Rows for the phase-capture test.
    pub rows: usize,
    /// Points per phase-capture row.
    pub row_len: usize,
}

impl Default for StationaryLayout {
    fn default() -> Self {
        StationaryLayout {
            side: 7,
            rows: 3,
            row_len: 12,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StationaryChecks {
    pub params: WeightParams,
    pub which: Which,
    pub rows: Vec<StationaryRow>,
    /// `max |R|·c`.
    pub magnitude_constant: f64,
    /// `max |R(m+1,n) - R(m,n)| / max(|R(m,n)|, 1/(10c))` over the box grid (both unit steps).
    pub slow_variation: f64,
    /// Smallest total unwrapped rotation of `arg F̂` along a capture row.
    pub raw_rotation: f64,
    /// Largest neighbour drift of `arg R` along the capture rows (where `|R|` is not negligible).
    pub corrected_drift: f64,
    /// `max |F̂ - leading term|` over the box grid.
    pub residual_envelope: f64,
}

impl StationaryChecks {
    pub fn slow_variation_ok(&self) -> bool {
        self.slow_variation <= 0.1
    }

    pub fn phase_capture_ok(&self) -> bool {
        self.raw_rotation >= PI && self.corrected_drift <= 0.3
    }
}

/// Runs the magnitude, slow-variation, phase-capture and residual checks.
pub fn stationary_checks(
    t: &WeightParams,
    which: Which,
    layout: &StationaryLayout,
    cfg: &QuadConfig,
) -> Result<StationaryChecks> {
    let f = weight_for(t, which)?;
    let grid = stationary_grid(t, layout.side);
    let rows: Vec<StationaryRow> = grid
        .par_iter()
        .map(|&(m, n)| stationary_row(t, &f, m, n, cfg))
        .collect::<Result<_>>()?;
    let floor = 1.0 / (10.0 * t.c);
    let (m_lo, m_hi, n_lo, n_hi) = stationary_box(t);
    let steps: Vec<f64> = rows
        .par_iter()
        .filter(|r| r.m < m_hi && r.n < n_hi)
        .map(|r| {
            let a = stationary_row(t, &f, r.m + 1, r.n, cfg)?;
            let b = stationary_row(t, &f, r.m, r.n + 1, cfg)?;
            let scale = r.corrected.norm().max(floor);
            Ok((a.corrected - r.corrected).norm().max((b.corrected - r.corrected).norm()) / scale)
        })
        .collect::<Result<_>>()?;
    let slow_variation = steps.into_iter().fold(0.0, f64::max);

    // Capture rows sit near the centre where the amplitude is large; the
    // stride makes the raw phase advance about one radian per step.
    let stride = ((t.q / (2.0 * PI * t.m_len)).round() as i64).max(1);
    let mut raw_rotation = f64::INFINITY;
    let mut corrected_drift = 0.0f64;
    for k in 0..layout.rows.max(1) {
        let n = (t.cqm() * (0.98 + 0.04 * k as f64 / layout.rows.max(2) as f64 - 0.0)).round() as i64;
        let start = (t.cqn() * 0.99).round() as i64;
        let pts: Vec<(i64, i64)> = (0..layout.row_len as i64)
            .map(|j| (start + j * stride, n))
            .filter(|&(m, n)| m >= m_lo && m <= m_hi && n >= n_lo && n <= n_hi)
            .collect();
        let row: Vec<StationaryRow> = pts
            .par_iter()
            .map(|&(m, n)| stationary_row(t, &f, m, n, cfg))
            .collect::<Result<_>>()?;
        let mut rot = 0.0;
        for w in row.windows(2) {
            rot += wrap(w[1].raw.arg() - w[0].raw.arg()).abs();
            if w[0].corrected.norm() > floor && w[1].corrected.norm() > floor {
                corrected_drift = corrected_drift.max(wrap(w[1].corrected.arg() - w[0].corrected.arg()).abs());
            }
        }
        raw_rotation = raw_rotation.min(rot);
    }
    let magnitude_constant = rows.iter().map(|r| r.corrected.norm() * t.c).fold(0.0, f64::max);
    let residual_envelope = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(StationaryChecks {
        params: *t,
        which,
        rows,
        magnitude_constant,
        slow_variation,
        raw_rotation: if raw_rotation.is_finite() { raw_rotation } else { 0.0 },
        corrected_drift,
        residual_envelope,
    })
}

/// Angle difference wrapped to `(-π, π]`.
fn wrap(d: f64) -> f64 {
    let mut d = d % (2.0 * PI);
    if d > PI {
        d -= 2.0 * PI;
    } else if d <= -PI {
        d += 2.0 * PI;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn t_small() -> WeightParams {
        WeightParams::new(12.0 / 10.0, 101.0, 10.0, 10.0, 1.0, 0.01)
    }

    #[test]
    fn g_weight_values() {
        let t = t_small();
        let g = g_weight(&t).unwrap();
        let w = Bump::from_spec(&BumpSpec::fixed(t.sharpness())).unwrap();
        let want = e(t.c * 100.0) * w.eval(1.0) * w.eval(1.0);
        assert!((g.eval(10.0, 10.0) - want).norm() < 1e-14);
        assert_eq!(g.eval(5.0, 10.0), Complex64::new(0.0, 0.0));
        let (x, y) = (9.8, 10.3);
        assert!((g.eval(x, y).norm() - w.eval(x / 10.0) * w.eval(y / 10.0)).abs() < 1e-14);
    }

    #[test]
    fn h_weight_support_rule() {
        let t = t_small();
        let h = h_weight(&t.with_u(100.0)).unwrap();
        assert!(h.eval(10.0, 10.0).norm() > 0.0);
        let z = h_weight(&t.with_u(10000.0)).unwrap();
        assert!(z.vanishes());
        assert_eq!(z.eval(10.0, 10.0), Complex64::new(0.0, 0.0));
        let g = g_weight(&t).unwrap();
        let w3 = Bump::from_spec(&BumpSpec::fixed(t.sharpness())).unwrap();
        for (x, y) in [(9.7, 10.1), (10.2, 9.9), (10.0, 10.0)] {
            let ratio = h.eval(x, y) / g.eval(x, y);
            assert!((ratio - w3.eval(x * y / 100.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn t1_t2_membership() {
        let t = t_small();
        assert!(t.in_t1() && t.in_t2());
        let bad = WeightParams::new(1e-4, 101.0, 10.0, 10.0, 1.0, 0.01);
        assert!(!bad.in_t1());
        assert!(matches!(g_weight(&bad), Err(Error::Domain(_))));
        assert!(!WeightParams::new(0.5, 101.0, 10.0, 10.0, 1.0, 0.01).in_t2());
    }

    #[test]
    fn separable_c_zero_oracle() {
        let w1 = Bump::new(0.9, 0.95, 1.05, 1.1).unwrap();
        let w2 = Bump::from_spec(&BumpSpec::fixed(3.0)).unwrap();
        let f = OscWeight::new(0.0, 7.0, 11.0, w1, w2, None);
        let cfg = QuadConfig::default();
        let rule = GaussLegendre::new(16);
        let one = |w: Bump, scale: f64| {
            let (a, b) = w.support();
            quad::integrate(
                &rule,
                |x| Complex64::new(w.eval(x / scale), 0.0),
                a * scale,
                b * scale,
                0.0,
                w.transition_width() * scale,
                1e-13,
                &cfg,
            )
            .unwrap()
            .value
        };
        let want = one(w1, 7.0) * one(w2, 11.0);
        let got = fourier2d(&f, 0.0, 0.0, &cfg).unwrap();
        assert!((got.value - want).norm() < 1e-9, "{} vs {}", got.value, want);
    }

    struct Combo<'a> {
        a: Complex64,
        f1: &'a OscWeight,
        b: Complex64,
        f2: &'a OscWeight,
    }

    impl Weight2d for Combo<'_> {
        fn eval(&self, x: f64, y: f64) -> Complex64 {
            self.a * self.f1.eval(x, y) + self.b * self.f2.eval(x, y)
        }
        fn support(&self) -> WeightBox {
            let (p, q) = (self.f1.support(), self.f2.support());
            WeightBox {
                x_lo: p.x_lo.min(q.x_lo),
                x_hi: p.x_hi.max(q.x_hi),
                y_lo: p.y_lo.min(q.y_lo),
                y_hi: p.y_hi.max(q.y_hi),
            }
        }
        fn chirp(&self) -> f64 {
            self.f1.chirp()
        }
        fn feature_scale(&self) -> (f64, f64) {
            let (a, b) = self.f1.feature_scale();
            let (c, d) = self.f2.feature_scale();
            (a.min(c), b.min(d))
        }
    }

    #[test]
    fn linearity() {
        let t = t_small();
        let g = g_weight(&t).unwrap();
        let h = h_weight(&t.with_u(100.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfg = QuadConfig::default();
        for _ in 0..3 {
            let a = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let b = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let (s, tt) = (rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
            let combo = Combo { a, f1: &g, b, f2: &h };
            let lhs = fourier2d(&combo, s, tt, &cfg).unwrap().value;
            let rhs = a * fourier2d(&g, s, tt, &cfg).unwrap().value + b * fourier2d(&h, s, tt, &cfg).unwrap().value;
            assert!((lhs - rhs).norm() < 1e-8);
        }
    }

    #[test]
    fn classification_first_match() {
        let t = t_small();
        let (cqm, cqn) = (t.cqm(), t.cqn());
        assert_eq!(classify(&t, (2.0 * cqn) as i64, (2.0 * cqm) as i64), Region::BothLarge);
        assert_eq!(classify(&t, 0, (2.0 * cqm) as i64), Region::LargeN);
        assert_eq!(classify(&t, -(2.0 * cqn) as i64, 0), Region::LargeM);
        assert_eq!(classify(&t, 0, 0), Region::Transitional);
        assert_eq!(classify(&t, cqn as i64, cqm as i64), Region::Stationary);
        let b = region_bound(&t, Region::Transitional, 0, 5).unwrap();
        let x = t.sharpness();
        assert!((b - x * x / (t.c * t.c * 100.0)).abs() < 1e-15);
    }

    #[test]
    fn critical_points_at_centre() {
        let t = WeightParams::new(3.0, 10007.0, 20.0, 20.0, 1.0, 0.01);
        let (m, n) = (t.cqn().round() as i64, t.cqm().round() as i64);
        let (v, u) = critical_points(&t, t.m_len, m, n).unwrap();
        assert!((v - t.n_len).abs() < 1e-9 && (u - t.m_len).abs() < 1e-9);
        let u0 = 0.97 * t.m_len;
        let (v, _) = critical_points(&t, u0, m + 17, n - 5).unwrap();
        let phi_v = (n - 5) as f64 / t.q - (m + 17) as f64 * u0 * t.n_len / (v * v * t.q);
        assert!(phi_v.abs() < 1e-12);
        assert!(matches!(critical_points(&t, u0, m, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn stationary_main_term_small() {
        let t = WeightParams::new(3.0, 1009.0, 12.0, 12.0, 1.0, 0.01);
        let layout = StationaryLayout {
            side: 3,
            rows: 1,
            row_len: 8,
        };
        let chk = stationary_checks(&t, Which::G, &layout, &QuadConfig::default()).unwrap();
        assert!(chk.magnitude_constant <= 10.0);
        assert!(chk.slow_variation_ok(), "{}", chk.slow_variation);
        assert!(chk.phase_capture_ok(), "{} {}", chk.raw_rotation, chk.corrected_drift);
        let centre = chk.rows[4].clone();
        assert!(centre.residual < 0.2 * centre.leading, "{centre:?}");
    }
}
