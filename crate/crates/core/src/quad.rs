//! Panel Gauss–Legendre quadrature for oscillatory complex integrands.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes_weights(&self) -> (&[f64], &[f64]) {
        (&self.nodes, &self.weights)
    }

    /// Composite rule over `panels` equal panels of `[a, b]`.
    pub fn panels<F: FnMut(f64) -> Complex64>(&self, mut f: F, a: f64, b: f64, panels: usize) -> Complex64 {
        let h = (b - a) / panels as f64;
        let mut total = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            let mut acc = Complex64::new(0.0, 0.0);
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc += f(mid + 0.5 * h * x) * *w;
            }
            total += acc * (0.5 * h);
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Panels per local oscillation period (a panel spans at most `1/panels_per_period` of it).
    pub panels_per_period: f64,
    /// Panels per narrowest amplitude feature (bump transition).
    pub panels_per_feature: f64,
    /// Absolute tolerance relative to the integration area.
    pub tol_per_area: f64,
    /// Panel budget per one-dimensional integral.
    pub max_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            order: 16,
            panels_per_period: 1.0,
            panels_per_feature: 2.0,
            tol_per_area: 1e-9,
            max_panels: 1 << 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub panels: usize,
}

/// Adaptive panel quadrature: starts from enough panels to resolve the
/// oscillation (`freq` cycles per unit) and amplitude features of width
/// `feature`, then doubles until two successive estimates agree to `tol`.
#[allow(clippy::too_many_arguments)]
pub fn integrate<F: FnMut(f64) -> Complex64>(
    rule: &GaussLegendre,
    mut f: F,
    a: f64,
    b: f64,
    freq: f64,
    feature: f64,
    tol: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    if b <= a {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            panels: 0,
        });
    }
    let width = b - a;
    let by_freq = (cfg.panels_per_period * freq.abs() * width).ceil();
    let by_feature = if feature > 0.0 {
        (cfg.panels_per_feature * width / feature).ceil()
    } else {
        1.0
    };
    let mut panels = by_freq.max(by_feature).max(1.0) as usize;
    if panels > cfg.max_panels {
        return Err(Error::Numerics(format!(
            "quadrature needs {panels} panels on [{a}, {b}] (budget {})",
            cfg.max_panels
        )));
    }
    let mut coarse = rule.panels(&mut f, a, b, panels);
    loop {
        let fine = rule.panels(&mut f, a, b, 2 * panels);
        let err = (fine - coarse).norm();
        if err <= tol {
            return Ok(QuadResult {
                value: fine,
                error: err,
                panels: 2 * panels,
            });
        }
        panels *= 2;
        if 2 * panels > cfg.max_panels {
            return Err(Error::Numerics(format!(
                "quadrature on [{a}, {b}] did not reach tolerance {tol:e}: last estimate {fine}, difference {err:e} with {panels} panels"
            )));
        }
        coarse = fine;
    }
}
