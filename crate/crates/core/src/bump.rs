//! Smooth compactly supported bumps with exact derivatives.
//!
//! A bump is described by four breakpoints `a < b ≤ c < d`: it vanishes
//! outside `(a, d)`, equals 1 on `[b, c]`, and rises/falls through the
//! `C^∞` smoothstep `S(t) = ψ(t) / (ψ(t) + ψ(1-t))`, `ψ(t) = exp(-1/t)`.
//! Derivatives come from truncated Taylor arithmetic, not finite differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest derivative order tracked by [`Jet`].
pub const JET_ORDER: usize = 6;

/// Truncated Taylor series `Σ_k c_k h^k`, `c_k = f^{(k)}(x)/k!`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet(pub [f64; JET_ORDER + 1]);

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; JET_ORDER + 1];
        c[0] = v;
        Jet(c)
    }

    /// The identity function at `x` composed with an affine map `x ↦ (x - x0)·scale`.
    pub fn affine(x: f64, x0: f64, scale: f64) -> Self {
        let mut c = [0.0; JET_ORDER + 1];
        c[0] = (x - x0) * scale;
        c[1] = scale;
        Jet(c)
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    /// `f^{(k)}(x)`.
    pub fn derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.0[k] * fact
    }

    fn add(self, o: Jet) -> Jet {
        let mut c = self.0;
        c.iter_mut().zip(o.0).for_each(|(a, b)| *a += b);
        Jet(c)
    }

    fn neg(self) -> Jet {
        Jet(self.0.map(|a| -a))
    }

    pub fn mul(self, o: Jet) -> Jet {
        let mut c = [0.0; JET_ORDER + 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate().take(JET_ORDER + 1 - i) {
                c[i + j] += a * b;
            }
        }
        Jet(c)
    }

    fn recip(self) -> Jet {
        let f = self.0;
        let mut h = [0.0; JET_ORDER + 1];
        h[0] = 1.0 / f[0];
        for k in 1..=JET_ORDER {
            let s: f64 = (1..=k).map(|i| f[i] * h[k - i]).sum();
            h[k] = -s * h[0];
        }
        Jet(h)
    }

    fn exp(self) -> Jet {
        let f = self.0;
        let mut g = [0.0; JET_ORDER + 1];
        g[0] = f[0].exp();
        for k in 1..=JET_ORDER {
            let s: f64 = (1..=k).map(|i| i as f64 * f[i] * g[k - i]).sum();
            g[k] = s / k as f64;
        }
        Jet(g)
    }
}

/// `ψ(t) = exp(-1/t)` for `t > 0`, zero (with all derivatives) otherwise.
fn psi(t: Jet) -> Jet {
    if t.value() <= 0.0 {
        Jet::constant(0.0)
    } else {
        t.recip().neg().exp()
    }
}

/// Smoothstep: 0 for `t ≤ 0`, 1 for `t ≥ 1`.
fn smoothstep(t: Jet) -> Jet {
    let v = t.value();
    if v <= 0.0 {
        return Jet::constant(0.0);
    }
    if v >= 1.0 {
        return Jet::constant(1.0);
    }
    let p = psi(t);
    let r = psi(Jet::constant(1.0).add(t.neg()));
    p.mul(p.add(r).recip())
}

fn smoothstep_value(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let p = (-1.0 / t).exp();
        let r = (-1.0 / (1.0 - t)).exp();
        p / (p + r)
    }
}

/// Shape family of a [`BumpSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpKind {
    /// Support `[center - halfwidth, center + halfwidth]`; each transition has
    /// width `halfwidth / sharpness`.
    FixedSupport,
    /// Plateau `[center - halfwidth, center + halfwidth]` with transitions of
    /// width `Δ = 1 / sharpness` on either side.
    Transition,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub center: f64,
    pub halfwidth: f64,
    pub sharpness: f64,
    pub kind: BumpKind,
}

impl BumpSpec {
    /// Weight supported in `[0.95, 1.05]` with derivatives `≪ sharpness^j`.
    pub fn fixed(sharpness: f64) -> Self {
        BumpSpec {
            center: 1.0,
            halfwidth: 0.05,
            sharpness,
            kind: BumpKind::FixedSupport,
        }
    }

    /// Cutoff equal to 1 on `[0.975, 1.025]`, supported in `[0.975 - Δ, 1.025 + Δ]`.
    pub fn cutoff(delta: f64) -> Self {
        BumpSpec {
            center: 1.0,
            halfwidth: 0.025,
            sharpness: 1.0 / delta,
            kind: BumpKind::Transition,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl Bump {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if !(a < b && b <= c && c < d) || ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::Usage(format!(
                "bump breakpoints must satisfy a < b <= c < d, got ({a}, {b}, {c}, {d})"
            )));
        }
        Ok(Bump { a, b, c, d })
    }

    pub fn from_spec(spec: &BumpSpec) -> Result<Self> {
        if spec.halfwidth <= 0.0 || !spec.halfwidth.is_finite() {
            return Err(Error::Usage(format!(
                "bump halfwidth must be positive, got {}",
                spec.halfwidth
            )));
        }
        if !(spec.sharpness >= 1.0) || !spec.sharpness.is_finite() {
            return Err(Error::Usage(format!(
                "bump sharpness must be >= 1, got {}",
                spec.sharpness
            )));
        }
        let (lo, hi) = (spec.center - spec.halfwidth, spec.center + spec.halfwidth);
        match spec.kind {
            BumpKind::FixedSupport => {
                let tau = spec.halfwidth / spec.sharpness;
                Bump::new(lo, lo + tau, hi - tau, hi)
            }
            BumpKind::Transition => {
                let delta = 1.0 / spec.sharpness;
                Bump::new(lo - delta, lo, hi, hi + delta)
            }
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.d)
    }

    pub fn plateau(&self) -> (f64, f64) {
        (self.b, self.c)
    }

    /// Narrowest of the two transitions.
    pub fn transition_width(&self) -> f64 {
        (self.b - self.a).min(self.d - self.c)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.d {
            return 0.0;
        }
        let rise = smoothstep_value((x - self.a) / (self.b - self.a));
        let fall = smoothstep_value((self.d - x) / (self.d - self.c));
        rise * fall
    }

    /// Taylor jet at `x` (derivatives up to [`JET_ORDER`]).
    pub fn jet(&self, x: f64) -> Jet {
        if x <= self.a || x >= self.d {
            return Jet::constant(0.0);
        }
        let rise = smoothstep(Jet::affine(x, self.a, 1.0 / (self.b - self.a)));
        let fall = smoothstep(Jet::affine(x, self.d, -1.0 / (self.d - self.c)));
        rise.mul(fall)
    }

    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        assert!(order <= JET_ORDER);
        self.jet(x).derivative(order)
    }

    /// `sup_x |W^{(j)}(x)|` for `j = 0..=max_order`, sampled on `samples` points.
    pub fn derivative_profile(&self, max_order: usize, samples: usize) -> Vec<f64> {
        let mut sup = vec![0.0f64; max_order + 1];
        for i in 0..=samples {
            let x = self.a + (self.d - self.a) * i as f64 / samples as f64;
            let j = self.jet(x);
            for (k, s) in sup.iter_mut().enumerate() {
                *s = s.max(j.derivative(k).abs());
            }
        }
        sup
    }
}

/// Central finite-difference estimate of `f^{(order)}(x)` with step `h`.
pub fn finite_difference(f: impl Fn(f64) -> f64, x: f64, order: usize, h: f64) -> f64 {
    // Binomial stencil on the points x + (k - order/2)·h.
    let mut acc = 0.0;
    let mut binom = 1.0;
    for k in 0..=order {
        let sign = if (order - k) % 2 == 0 { 1.0 } else { -1.0 };
        let offset = k as f64 - order as f64 / 2.0;
        acc += sign * binom * f(x + offset * h);
        binom = binom * (order - k) as f64 / (k + 1) as f64;
    }
    acc / h.powi(order as i32)
}
