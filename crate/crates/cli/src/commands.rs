//! Subcommand arguments and their experiments.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use klap::bilinear::{cancellation_scatter, oscillatory_form, Family, ScatterConfig};
use klap::exponents::{
    balance_final, beta_choice, beta_range, certify_total, crossover, main_beats_bfkpm, Rat, SamplingConfig,
};
use klap::ffarith::is_prime;
use klap::oscint::{decay_probe_grid, nonstationary_report, stationary_checks, weight_for, StationaryLayout};
use klap::primes::{prime_ap_kloosterman_sum, smoothed_prime_sum, HeathBrown, SieveTables};
use klap::quad::QuadConfig;
use klap::transforms::{
    fourier_hat, kl2_at_zero, shifted_kl_check_closed, shifted_kl_hat_closed, tempered_voronoi_residual,
    voronoi_check_kernel, VoronoiConfig,
};
use klap::bump::{Bump, BumpSpec};
use klap::{kl_spectrum, Complex64, Error, FieldCtx, PeriodicFn, Spectrum, WeightParams, Which};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::Table;

/// What a command hands back to the driver.
pub struct Outcome {
    pub result: Value,
    pub table: Option<Table>,
    /// Extra binary artifact and its path.
    pub blob: Option<(PathBuf, Vec<u8>)>,
    pub passed: bool,
    pub summary: String,
}

type Res<T> = std::result::Result<T, Error>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn prime_modulus(q: u64) -> Res<u64> {
    if q < 3 || !is_prime(q) {
        return Err(Error::Usage(format!("--q must be an odd prime, got {q}")));
    }
    Ok(q)
}

fn spectrum2(q: u64) -> Res<Spectrum> {
    kl_spectrum(2, &FieldCtx::new(q)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WhichArg {
    G,
    H,
}

impl From<WhichArg> for Which {
    fn from(w: WhichArg) -> Self {
        match w {
            WhichArg::G => Which::G,
            WhichArg::H => Which::H,
        }
    }
}

/// The oscillatory weight tuple shared by several commands.
#[derive(Debug, Clone, Args, Serialize)]
pub struct WeightArgs {
    #[arg(long)]
    pub q: u64,
    /// Frequency `c` of `e(cxy)`.
    #[arg(long, allow_hyphen_values = true)]
    pub c: f64,
    #[arg(long = "M")]
    pub m_len: f64,
    #[arg(long = "N")]
    pub n_len: f64,
    #[arg(long = "Q", default_value_t = 1.0)]
    pub big_q: f64,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// `U` for the `H` weight; defaults to `MN`.
    #[arg(long = "U")]
    pub u: Option<f64>,
    #[arg(long, value_enum, default_value_t = WhichArg::G)]
    pub which: WhichArg,
}

impl WeightArgs {
    fn params(&self) -> Res<WeightParams> {
        prime_modulus(self.q)?;
        let t = WeightParams::new(self.c, self.q as f64, self.m_len, self.n_len, self.big_q, self.eps);
        let t = t.with_u(self.u.unwrap_or(self.m_len * self.n_len));
        t.check_t1()?;
        Ok(t)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub q: u64,
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    /// Binary dump of all values (see the README for the layout).
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Moment checks are relative to this tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

pub fn spectrum(a: &SpectrumArgs) -> Res<Outcome> {
    let q = prime_modulus(a.q)?;
    if a.m < 2 {
        return Err(Error::Usage(format!("--m must be >= 2, got {}", a.m)));
    }
    let s = kl_spectrum(a.m, &FieldCtx::new(q)?)?;
    let qf = q as f64;
    let first = s.first_moment();
    let sign = if a.m % 2 == 0 { 1.0 } else { -1.0 };
    let expected_first = sign * qf.powf(-(a.m as f64 - 1.0) / 2.0);
    let first_ok = (first.re - expected_first).abs() <= a.tol * expected_first.abs().max(1.0) && first.im.abs() <= a.tol;
    let (second, expected_second, second_ok) = if a.m == 2 {
        let v = s.second_moment()?;
        let e = qf - 1.0 - 1.0 / qf;
        (Some(v), Some(e), (v - e).abs() <= a.tol * e)
    } else {
        (None, None, true)
    };
    let weil = if a.m == 2 { s.max_abs() <= 2.0 + 1e-9 } else { s.max_abs() <= a.m as f64 + 1e-9 };
    let mut t = Table::new(&[
        "q",
        "m",
        "first_moment_re",
        "first_moment_im",
        "expected_first",
        "second_moment",
        "expected_second",
        "max_abs",
        "max_abs_imag",
        "moments_ok",
    ]);
    t.push(vec![
        q.into(),
        (a.m as u64).into(),
        first.re.into(),
        first.im.into(),
        expected_first.into(),
        second.into(),
        expected_second.into(),
        s.max_abs().into(),
        s.max_abs_imag().into(),
        (first_ok && second_ok).into(),
    ]);
    let blob = match &a.out {
        Some(p) => {
            let mut buf = Vec::with_capacity(16 + 16 * s.values().len());
            s.write_binary(&mut buf).expect("in-memory write");
            Some((p.clone(), buf))
        }
        None => None,
    };
    let passed = first_ok && second_ok && weil;
    Ok(Outcome {
        result: json!({
            "q": q,
            "m": a.m,
            "first_moment": first,
            "expected_first_moment": expected_first,
            "second_moment": second,
            "expected_second_moment": expected_second,
            "max_abs": s.max_abs(),
            "max_abs_imag": s.max_abs_imag(),
            "first_moment_ok": first_ok,
            "second_moment_ok": second_ok,
            "weil_bound_ok": weil,
        }),
        table: Some(t),
        blob,
        passed,
        summary: format!("spectrum q={q} m={}: moments {}", a.m, if passed { "ok" } else { "FAILED" }),
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TransformCheckArgs {
    #[arg(long)]
    pub q: u64,
    /// Single shift; all `a` in `[1, q-1]` when omitted.
    #[arg(long)]
    pub a: Option<u64>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

pub fn transform_check(a: &TransformCheckArgs) -> Res<Outcome> {
    let q = prime_modulus(a.q)?;
    let s = spectrum2(q)?;
    let shifts: Vec<u64> = match a.a {
        Some(x) if x % q == 0 => return Err(Error::Usage(format!("--a must be coprime to q, got {x}"))),
        Some(x) => vec![x % q],
        None => (1..q).collect(),
    };
    let mut t = Table::new(&["a", "max_err_hat", "max_err_check"]);
    let (mut worst_hat, mut worst_check) = (0.0f64, 0.0f64);
    for &sh in &shifts {
        let k = PeriodicFn::shifted_kloosterman(sh, &s)?;
        let hat = fourier_hat(&k);
        let check = voronoi_check_kernel(&k);
        let mut eh = 0.0f64;
        let mut ec = 0.0f64;
        for h in 0..q {
            eh = eh.max((hat.values()[h as usize] - shifted_kl_hat_closed(sh, q, h)?).norm());
            ec = ec.max((check.values()[h as usize] - Complex64::new(shifted_kl_check_closed(sh, q, h), 0.0)).norm());
        }
        worst_hat = worst_hat.max(eh);
        worst_check = worst_check.max(ec);
        t.push(vec![sh.into(), eh.into(), ec.into()]);
    }
    let passed = worst_hat <= a.tol && worst_check <= a.tol;
    Ok(Outcome {
        result: json!({
            "q": q,
            "shifts": shifts.len(),
            "max_err_hat": worst_hat,
            "max_err_check": worst_check,
            "kl_at_zero": kl2_at_zero(q),
        }),
        table: Some(t),
        blob: None,
        passed,
        summary: format!("transform-check q={q}: hat {worst_hat:.3e}, check {worst_check:.3e}"),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelArg {
    /// `Kl₂(an;q)`.
    ShiftedKl,
    /// Seeded random complex values.
    Random,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VoronoiArgs {
    #[command(flatten)]
    pub weight: WeightArgs,
    #[arg(long, value_enum, default_value_t = KernelArg::ShiftedKl)]
    pub kernel: KernelArg,
    #[arg(long, default_value_t = 1)]
    pub a: u64,
    /// Trapezoid samples per unit length for `Ĝ`.
    #[arg(long, default_value_t = 16)]
    pub spu: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

pub fn voronoi_check(a: &VoronoiArgs, seed: u64) -> Res<Outcome> {
    let t = a.weight.params()?;
    let q = a.weight.q;
    let k = match a.kernel {
        KernelArg::ShiftedKl => {
            if a.a % q == 0 {
                return Err(Error::Usage(format!("--a must be coprime to q, got {}", a.a)));
            }
            PeriodicFn::shifted_kloosterman(a.a % q, &spectrum2(q)?)?
        }
        KernelArg::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let vals = (0..q)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            PeriodicFn::new(q, vals)?
        }
    };
    let g = weight_for(&t, a.weight.which.into())?;
    let rep = tempered_voronoi_residual(&k, &g, &VoronoiConfig::full_band(q, a.spu))?;
    let rel = rep.residual / rep.lhs.norm().max(1.0);
    let passed = rel <= a.tol;
    Ok(Outcome {
        result: json!({ "report": to_value(&rep), "relative_residual": rel }),
        table: None,
        blob: None,
        passed,
        summary: format!("voronoi-check q={q}: relative residual {rel:.3e} over {} points", rep.lattice_points),
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OscintArgs {
    #[command(flatten)]
    pub weight: WeightArgs,
    /// Probe pairs per decay region.
    #[arg(long, default_value_t = 8)]
    pub per_region: usize,
    /// Largest acceptable fitted constant.
    #[arg(long, default_value_t = 10.0)]
    pub max_constant: f64,
}

pub fn oscint_report(a: &OscintArgs) -> Res<Outcome> {
    let t = a.weight.params()?;
    let grid = decay_probe_grid(&t, a.per_region);
    let rep = nonstationary_report(&t, &grid, a.weight.which.into(), &QuadConfig::default())?;
    let mut table = Table::new(&["m", "n", "re", "im", "bound", "ratio", "region"]);
    for r in &rep.rows {
        table.push(vec![
            r.m.into(),
            r.n.into(),
            r.value.re.into(),
            r.value.im.into(),
            r.bound.into(),
            r.ratio.into(),
            r.region.name().into(),
        ]);
    }
    let worst = rep.max_fitted();
    Ok(Outcome {
        result: to_value(&rep),
        table: Some(table),
        blob: None,
        passed: worst <= a.max_constant,
        summary: format!("oscint-report: max fitted constant {worst:.3} over {} pairs", rep.rows.len()),
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StationaryArgs {
    #[command(flatten)]
    pub weight: WeightArgs,
    #[arg(long, default_value_t = 7)]
    pub side: usize,
    #[arg(long, default_value_t = 3)]
    pub rows: usize,
    #[arg(long, default_value_t = 12)]
    pub row_len: usize,
}

pub fn stationary_report(a: &StationaryArgs) -> Res<Outcome> {
    let t = a.weight.params()?;
    if !t.in_t2() {
        return Err(Error::Usage("stationary-report needs the parameters in T2".into()));
    }
    let layout = StationaryLayout {
        side: a.side,
        rows: a.rows,
        row_len: a.row_len,
    };
    let rep = stationary_checks(&t, a.weight.which.into(), &layout, &QuadConfig::default())?;
    let mut table = Table::new(&["m", "n", "raw_re", "raw_im", "corrected_re", "corrected_im", "leading", "residual"]);
    for r in &rep.rows {
        table.push(vec![
            r.m.into(),
            r.n.into(),
            r.raw.re.into(),
            r.raw.im.into(),
            r.corrected.re.into(),
            r.corrected.im.into(),
            r.leading.into(),
            r.residual.into(),
        ]);
    }
    let passed = rep.slow_variation_ok() && rep.phase_capture_ok();
    Ok(Outcome {
        summary: format!(
            "stationary-report: slow variation {:.3}, rotation {:.2} rad, drift {:.3} rad, residual {:.3e}",
            rep.slow_variation, rep.raw_rotation, rep.corrected_drift, rep.residual_envelope
        ),
        result: json!({
            "checks": to_value(&rep),
            "slow_variation_ok": rep.slow_variation_ok(),
            "phase_capture_ok": rep.phase_capture_ok(),
        }),
        table: Some(table),
        blob: None,
        passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyArg {
    RandomSign,
    RandomUnit,
    AllOnes,
    Mobius,
    Character,
}

impl FamilyArg {
    fn family(self, modulus: u64) -> Family {
        match self {
            FamilyArg::RandomSign => Family::RandomSign,
            FamilyArg::RandomUnit => Family::RandomUnit,
            FamilyArg::AllOnes => Family::AllOnes,
            FamilyArg::Mobius => Family::Mobius,
            FamilyArg::Character => Family::CharacterTwisted { modulus },
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BilinearArgs {
    #[arg(long)]
    pub q: u64,
    #[arg(long, default_value_t = 1)]
    pub a: u64,
    #[arg(long = "M")]
    pub m_len: f64,
    #[arg(long = "N")]
    pub n_len: f64,
    #[arg(long, value_enum, default_value_t = FamilyArg::RandomUnit)]
    pub alpha: FamilyArg,
    #[arg(long, value_enum, default_value_t = FamilyArg::RandomUnit)]
    pub beta: FamilyArg,
    /// Odd prime for the character-twisted family.
    #[arg(long, default_value_t = 3)]
    pub char_modulus: u64,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    #[arg(long, default_value_t = 16)]
    pub trials: usize,
    /// Also evaluate `Σ G_T(m,n) Kl₂(amn;q)` with this frequency `c` (needs T in T2).
    #[arg(long)]
    pub osc_c: Option<f64>,
    #[arg(long = "Q", default_value_t = 1.0)]
    pub big_q: f64,
    #[arg(long, default_value_t = 10.0)]
    pub max_constant: f64,
}

pub fn bilinear_sweep(a: &BilinearArgs, seed: u64) -> Res<Outcome> {
    let q = prime_modulus(a.q)?;
    if a.a % q == 0 {
        return Err(Error::Usage(format!("--a must be coprime to q, got {}", a.a)));
    }
    let kl = spectrum2(q)?;
    let cfg = ScatterConfig {
        q,
        a: a.a,
        m_len: a.m_len,
        n_len: a.n_len,
        alpha: a.alpha.family(a.char_modulus),
        beta: a.beta.family(a.char_modulus),
        eps: a.eps,
        trials: a.trials,
        seed,
    };
    let rows = cancellation_scatter(&cfg, &kl)?;
    let fkm = rows.iter().map(|r| r.abs_form / r.bound_fkm).fold(0.0, f64::max);
    let kms = rows
        .iter()
        .filter_map(|r| r.bound_kms.map(|b| r.abs_form / b))
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    let osc = match a.osc_c {
        Some(c) => {
            let t = WeightParams::new(c, q as f64, a.m_len, a.n_len, a.big_q, a.eps);
            Some(oscillatory_form(&t, a.a, Which::G, &kl)?)
        }
        None => None,
    };
    let mut table = Table::new(&["trial", "norm_product", "abs_form", "bound_fkm", "bound_kms"]);
    for r in &rows {
        table.push(vec![
            r.trial.into(),
            r.norm_product.into(),
            r.abs_form.into(),
            r.bound_fkm.into(),
            r.bound_kms.into(),
        ]);
    }
    let worst = [Some(fkm), kms, osc.as_ref().map(|o| o.ratio)]
        .into_iter()
        .flatten()
        .fold(0.0, f64::max);
    Ok(Outcome {
        result: json!({
            "scatter": to_value(&rows),
            "fitted_fkm": fkm,
            "fitted_kms": kms,
            "oscillatory": osc.as_ref().map(to_value),
        }),
        table: Some(table),
        blob: None,
        passed: worst <= a.max_constant,
        summary: format!("bilinear-sweep q={q}: fitted constant {worst:.3} over {} trials", rows.len()),
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PrimeSumArgs {
    /// Prime modulus, or a comma-separated list for a sweep.
    #[arg(long, value_delimiter = ',', required = true)]
    pub q: Vec<u64>,
    /// Length `X`; defaults to `q`.
    #[arg(long = "X")]
    pub x: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub u: u64,
    #[arg(long, default_value_t = 1)]
    pub v: u64,
    #[arg(long, default_value_t = 0.01)]
    pub eps: f64,
    /// Rows `X·i/points` per modulus in the CSV table.
    #[arg(long, default_value_t = 1)]
    pub points: u64,
    /// Also compute the smoothed sum with a fixed-support weight of sharpness `Q`.
    #[arg(long = "smooth", alias = "smooth-Q")]
    pub smooth_q: Option<f64>,
    /// Sieve limit; defaults to the largest `n` needed.
    #[arg(long)]
    pub sieve_limit: Option<u64>,
}

pub fn prime_sum(a: &PrimeSumArgs) -> Res<Outcome> {
    let qs = a.q.iter().map(|&q| prime_modulus(q)).collect::<Res<Vec<u64>>>()?;
    if a.x == Some(0) || a.points == 0 {
        return Err(Error::Usage("--X and --points must be positive".into()));
    }
    let lengths: Vec<u64> = qs.iter().map(|&q| a.x.unwrap_or(q)).collect();
    let stretch = |x: u64| if a.smooth_q.is_some() { (x as f64 * 1.06).ceil() as u64 } else { x };
    let need = lengths.iter().map(|&x| stretch(x)).max().unwrap_or(1);
    let limit = a.sieve_limit.unwrap_or(need);
    if limit < need {
        return Err(Error::Usage(format!("--sieve-limit {limit} is below the required {need}")));
    }
    let tables = SieveTables::new(limit)?;
    let smooth = match a.smooth_q {
        Some(bq) => Some((bq, Bump::from_spec(&BumpSpec::fixed(bq.max(1.0)))?)),
        None => None,
    };
    let mut table = Table::new(&["q", "x", "sum", "count", "trivial_bound", "envelope_main", "envelope_bfkpm"]);
    let mut runs = Vec::with_capacity(qs.len());
    let mut passed = true;
    let mut summary = Vec::new();
    for (&q, &x) in qs.iter().zip(&lengths) {
        let kl = spectrum2(q)?;
        let main = prime_ap_kloosterman_sum(x as f64, a.u, a.v, &kl, &tables, a.eps)?;
        for i in 1..=a.points {
            let xi = (x * i / a.points).max(1);
            let r = prime_ap_kloosterman_sum(xi as f64, a.u, a.v, &kl, &tables, a.eps)?;
            table.push(vec![
                q.into(),
                xi.into(),
                r.sum.re.into(),
                r.count.into(),
                r.trivial_bound.into(),
                r.envelope_main.into(),
                r.envelope_bfkpm.into(),
            ]);
        }
        let smoothed = match &smooth {
            Some((bq, w)) => Some(smoothed_prime_sum(w, x as f64, a.u, a.v, &kl, &tables, *bq, a.eps)?),
            None => None,
        };
        passed &= main.sum.norm() <= main.trivial_bound;
        summary.push(format!("q={q} X={x}: S = {:.6} over {} primes", main.sum.re, main.count));
        runs.push(json!({
            "q": q,
            "x": x,
            "u": a.u,
            "v": a.v,
            "sum_re": main.sum.re,
            "sum_im": main.sum.im,
            "abs": main.sum.norm(),
            "count": main.count,
            "trivial_bound": main.trivial_bound,
            "envelope_main": main.envelope_main,
            "envelope_bfkpm": main.envelope_bfkpm,
            "ratios": {
                "trivial": main.ratio_trivial,
                "main": main.ratio_main,
                "bfkpm": main.ratio_bfkpm,
            },
            "in_theorem_range": main.in_theorem_range,
            "notes": main.notes,
            "smoothed": smoothed.as_ref().map(to_value),
        }));
    }
    Ok(Outcome {
        summary: format!("prime-sum {}", summary.join("; ")),
        result: json!({ "runs": runs }),
        table: Some(table),
        blob: None,
        passed,
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HbArgs {
    /// Identity length `X`; checks every `n ≤ X`.
    #[arg(long = "X", default_value_t = 10_000)]
    pub x: u64,
    #[arg(long = "J", default_value_t = 3)]
    pub j: u32,
    /// Check this many seeded random `n ≤ X` instead of all of them.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

pub fn hb_check(a: &HbArgs, seed: u64) -> Res<Outcome> {
    if a.x < 1 {
        return Err(Error::Usage("--X must be positive".into()));
    }
    let hb = HeathBrown::decompose(a.x as f64, a.j)?;
    let tables = SieveTables::new(a.x)?;
    let ns: Vec<u64> = match a.samples {
        Some(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..k).map(|_| rng.random_range(1..=a.x)).collect()
        }
        None => (1..=a.x).collect(),
    };
    let mut table = Table::new(&["n", "mangoldt", "reconstructed", "error"]);
    let mut worst = 0.0f64;
    for &n in &ns {
        let got = hb.reconstruct(n)?;
        let want = tables.mangoldt(n);
        let err = (got - want).abs();
        worst = worst.max(err);
        table.push(vec![n.into(), want.into(), got.into(), err.into()]);
    }
    Ok(Outcome {
        result: json!({ "identity": to_value(&hb), "checked": ns.len(), "max_error": worst }),
        table: Some(table),
        blob: None,
        passed: worst <= a.tol,
        summary: format!("hb-check X={} J={}: max error {worst:.3e} over {} n", a.x, a.j, ns.len()),
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExponentArgs {
    /// `X = q^x`, as `p/q` or a decimal.
    #[arg(long, default_value = "1")]
    pub x: Rat,
    /// `Q = q^κ`; defaults to the balancing choice when `11/12 ≤ x ≤ 1`, else 0.
    #[arg(long)]
    pub kappa: Option<Rat>,
    /// `v = q^θ`.
    #[arg(long, default_value = "0")]
    pub theta: Rat,
    #[arg(long, default_value = "1/100")]
    pub eps: Rat,
    #[arg(long = "J", default_value_t = 10)]
    pub j: u32,
    /// Grid step is `1/resolution`.
    #[arg(long, default_value_t = 2520)]
    pub resolution: u32,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u32,
}

pub fn exponent_certify(a: &ExponentArgs, seed: u64) -> Res<Outcome> {
    let balance = balance_final(&a.x).ok();
    let kappa = match (&a.kappa, &balance) {
        (Some(k), _) => k.clone(),
        (None, Some(b)) => b.kappa_star.clone(),
        (None, None) => Rat::zero(),
    };
    let sampling = SamplingConfig {
        resolution: a.resolution,
        random_samples: a.samples,
        seed,
    };
    let rep = certify_total(&a.x, &kappa, &a.theta, &a.eps, a.j, &sampling)?;
    let passed = rep.violations == 0 && rep.chain_failures == 0;
    Ok(Outcome {
        summary: format!(
            "exponent-certify x={} kappa={kappa}: {} points, cases A/B/C = {}/{}/{}, violations {}, worst margin {}",
            a.x,
            rep.grid_points + rep.random_points,
            rep.cases.a,
            rep.cases.b,
            rep.cases.c,
            rep.violations,
            rep.worst_margin
        ),
        result: json!({
            "certify": to_value(&rep),
            "beta": beta_choice(&a.x),
            "beta_range": to_value(&beta_range(&a.x, &kappa, &a.theta, &a.eps)),
            "balance": balance.as_ref().map(to_value),
            "crossover": crossover(),
            "main_beats_bfkpm": main_beats_bfkpm(&a.x),
        }),
        table: None,
        blob: None,
        passed,
    })
}
