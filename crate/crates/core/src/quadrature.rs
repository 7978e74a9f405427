//! Composite tensor Gauss-Legendre evaluation of
//! `int e^{i lambda P(x)} prod_j f_j(v_j . x) eta(x) dx`, and decay fits.

use std::f64::consts::FRAC_PI_2;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::MultiPoly;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError {
    #[error("{got} factor specs given for {expected} projections")]
    FactorCount { expected: usize, got: usize },
    #[error("projection f{index} has {got} components, expected {expected}")]
    Dimension {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("invalid factor spec f{index}: {message}")]
    BadFactor { index: usize, message: String },
    #[error("invalid cutoff: {0}")]
    BadCutoff(String),
    #[error("invalid quadrature config: {0}")]
    BadConfig(String),
    #[error("no convergence at lambda = {lambda} after {refinements} refinements (last iterates {previous} and {last})")]
    NonConvergence {
        lambda: f64,
        refinements: usize,
        previous: Complex64,
        last: Complex64,
    },
    #[error("lambda = {lambda} needs {points} points, above the cap {cap}")]
    PointCap { lambda: f64, points: u128, cap: u64 },
    #[error("invalid lambda grid: {0}")]
    BadGrid(String),
}

/// One factor function `f_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FactorSpec {
    /// `exp(-((s - center) / width)^2)`.
    Gaussian { center: f64, width: f64 },
    /// `sum_k cos[k] cos(k s) + sum_k sin[k] sin(k s)`.
    TrigPoly {
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    ConstantOne,
}

impl FactorSpec {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            FactorSpec::Gaussian { center, width } => {
                let u = (s - center) / width;
                (-u * u).exp()
            }
            FactorSpec::TrigPoly { cos, sin } => {
                let c: f64 = cos
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a * (k as f64 * s).cos())
                    .sum();
                let d: f64 = sin
                    .iter()
                    .enumerate()
                    .map(|(k, b)| b * (k as f64 * s).sin())
                    .sum();
                c + d
            }
            FactorSpec::ConstantOne => 1.0,
        }
    }

    fn validate(&self) -> Result<(), String> {
        match self {
            FactorSpec::Gaussian { center, width } => {
                if !(width.is_finite() && *width > 0.0) || !center.is_finite() {
                    return Err("gaussian needs a finite center and width > 0".into());
                }
            }
            FactorSpec::TrigPoly { cos, sin } => {
                if cos.iter().chain(sin).any(|c| !c.is_finite()) {
                    return Err("trig-poly coefficients must be finite".into());
                }
            }
            FactorSpec::ConstantOne => {}
        }
        Ok(())
    }
}

/// The smooth bump `exp(1 - 1/(1 - t^2))` on `|t| < 1`, zero outside.
pub fn bump(t: f64) -> f64 {
    let s = 1.0 - t * t;
    if s <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / s).exp()
    }
}

/// Cutoff `eta(x) = prod_i bump(x_i / r_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CutoffSpec {
    BumpProduct { radii: Vec<f64> },
}

impl CutoffSpec {
    pub fn unit_bump(dim: usize) -> Self {
        CutoffSpec::BumpProduct {
            radii: vec![1.0; dim],
        }
    }

    pub fn radii(&self) -> &[f64] {
        match self {
            CutoffSpec::BumpProduct { radii } => radii,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.radii()
            .iter()
            .zip(x)
            .map(|(r, xi)| bump(xi / r))
            .product()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    /// Gauss-Legendre nodes per panel.
    pub order: usize,
    pub min_panels: usize,
    pub rel_tol: f64,
    /// Absolute floor added to the convergence test, for values near zero.
    pub abs_tol: f64,
    pub max_refinements: usize,
    pub max_points: u64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            order: 6,
            min_panels: 4,
            rel_tol: 1e-4,
            abs_tol: 1e-14,
            max_refinements: 8,
            max_points: 1 << 27,
        }
    }
}

/// Phase compiled to `(coefficient, exponents)` pairs for fast evaluation.
#[derive(Debug, Clone)]
struct CompiledPhase {
    terms: Vec<(f64, Vec<u32>)>,
}

impl CompiledPhase {
    fn new(p: &MultiPoly) -> Self {
        CompiledPhase {
            terms: p.terms().map(|(e, c)| (c.to_f64(), e.clone())).collect(),
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| {
                e.iter()
                    .zip(x)
                    .fold(*c, |acc, (&k, xi)| acc * xi.powi(k as i32))
            })
            .sum()
    }

    /// Upper bound for `|dP/dx_i|` on the box `|x_k| <= r_k`.
    fn gradient_bound(&self, i: usize, radii: &[f64]) -> f64 {
        self.terms
            .iter()
            .filter(|(_, e)| e[i] > 0)
            .map(|(c, e)| {
                e.iter()
                    .zip(radii)
                    .enumerate()
                    .fold(c.abs() * e[i] as f64, |acc, (k, (&p, r))| {
                        let p = if k == i { p - 1 } else { p };
                        acc * r.powi(p as i32)
                    })
            })
            .sum()
    }
}

/// A concrete integral: phase, projections in floating point, factor
/// functions and cutoff.
#[derive(Debug, Clone)]
pub struct OscillatoryIntegral {
    phase: MultiPoly,
    compiled: CompiledPhase,
    projections: Vec<Vec<f64>>,
    factors: Vec<FactorSpec>,
    cutoff: CutoffSpec,
}

impl OscillatoryIntegral {
    pub fn new(
        phase: MultiPoly,
        projections: Vec<Vec<f64>>,
        factors: Vec<FactorSpec>,
        cutoff: CutoffSpec,
    ) -> Result<Self, QuadError> {
        let dim = phase.vars().len();
        if factors.len() != projections.len() {
            return Err(QuadError::FactorCount {
                expected: projections.len(),
                got: factors.len(),
            });
        }
        for (j, v) in projections.iter().enumerate() {
            if v.len() != dim {
                return Err(QuadError::Dimension {
                    index: j + 1,
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        for (j, f) in factors.iter().enumerate() {
            f.validate()
                .map_err(|message| QuadError::BadFactor { index: j + 1, message })?;
        }
        let radii = cutoff.radii();
        if radii.len() != dim || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(QuadError::BadCutoff(format!(
                "need {dim} positive radii, got {radii:?}"
            )));
        }
        Ok(OscillatoryIntegral {
            compiled: CompiledPhase::new(&phase),
            phase,
            projections,
            factors,
            cutoff,
        })
    }

    pub fn phase(&self) -> &MultiPoly {
        &self.phase
    }

    pub fn dim(&self) -> usize {
        self.phase.vars().len()
    }

    /// Replaces factor `j`.
    pub fn with_factor(&self, j: usize, f: FactorSpec) -> Result<Self, QuadError> {
        let mut factors = self.factors.clone();
        factors[j] = f;
        OscillatoryIntegral::new(
            self.phase.clone(),
            self.projections.clone(),
            factors,
            self.cutoff.clone(),
        )
    }

    fn amplitude(&self, x: &[f64]) -> f64 {
        self.factors
            .iter()
            .zip(&self.projections)
            .map(|(f, v)| f.eval(v.iter().zip(x).map(|(a, b)| a * b).sum()))
            .product()
    }

    /// Panels per axis from the phase-variation rule.
    fn base_panels(&self, lambda: f64, cfg: &QuadConfig) -> Vec<usize> {
        let radii = self.cutoff.radii();
        (0..self.dim())
            .map(|i| {
                let g = self.compiled.gradient_bound(i, radii);
                let need = (lambda.abs() * g * 2.0 * radii[i] / FRAC_PI_2).ceil() as usize;
                need.max(cfg.min_panels)
            })
            .collect()
    }

    /// Tensor rule with `panels[i]` panels on axis `i`.
    fn tensor_sum(&self, lambda: f64, panels: &[usize], rule: &[(f64, f64)]) -> Complex64 {
        let radii = self.cutoff.radii();
        let dim = self.dim();
        // nodes and weights per axis, cutoff folded into the weights
        let axes: Vec<Vec<(f64, f64)>> = (0..dim)
            .map(|i| {
                let r = radii[i];
                let h = 2.0 * r / panels[i] as f64;
                (0..panels[i])
                    .flat_map(|p| {
                        let a = -r + p as f64 * h;
                        rule.iter().map(move |&(t, w)| {
                            let x = a + 0.5 * h * (t + 1.0);
                            (x, 0.5 * h * w * bump(x / r))
                        })
                    })
                    .filter(|&(_, w)| w != 0.0)
                    .collect()
            })
            .collect();
        let outer = &axes[0];
        let chunk = rule.len();
        let partials: Vec<Complex64> = outer
            .par_chunks(chunk)
            .map(|slab| {
                let mut x = vec![0.0; dim];
                let mut acc = Complex64::new(0.0, 0.0);
                let mut idx = vec![0usize; dim];
                for &(x0, w0) in slab {
                    x[0] = x0;
                    if dim == 1 {
                        acc += self.point(lambda, &x) * w0;
                        continue;
                    }
                    idx[1..].iter_mut().for_each(|k| *k = 0);
                    loop {
                        let mut w = w0;
                        for i in 1..dim {
                            let (xi, wi) = axes[i][idx[i]];
                            x[i] = xi;
                            w *= wi;
                        }
                        acc += self.point(lambda, &x) * w;
                        // odometer over axes 1..dim, last fastest
                        let mut i = dim - 1;
                        loop {
                            idx[i] += 1;
                            if idx[i] < axes[i].len() {
                                break;
                            }
                            idx[i] = 0;
                            i -= 1;
                            if i == 0 {
                                break;
                            }
                        }
                        if i == 0 {
                            break;
                        }
                    }
                }
                acc
            })
            .collect();
        pairwise_sum(&partials)
    }

    fn point(&self, lambda: f64, x: &[f64]) -> Complex64 {
        let theta = lambda * self.compiled.eval(x);
        let (s, c) = theta.sin_cos();
        Complex64::new(c, s) * self.amplitude(x)
    }

    /// Doubles panel counts from the phase-variation rule until two
    /// successive values agree to `cfg.rel_tol`.
    pub fn evaluate(&self, lambda: f64, cfg: &QuadConfig) -> Result<Complex64, QuadError> {
        if cfg.order < 2 || cfg.min_panels == 0 || !(cfg.rel_tol > 0.0) {
            return Err(QuadError::BadConfig(format!("{cfg:?}")));
        }
        if self.axes_empty() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let rule: Vec<(f64, f64)> = GaussLegendre::new(cfg.order)
            .map_err(|e| QuadError::BadConfig(e.to_string()))?
            .into_node_weight_pairs();
        let mut panels = self.base_panels(lambda, cfg);
        let points = |panels: &[usize]| -> u128 {
            panels
                .iter()
                .map(|&p| (p * cfg.order) as u128)
                .product()
        };
        let check_cap = |panels: &[usize]| {
            let n = points(panels);
            if n > cfg.max_points as u128 {
                Err(QuadError::PointCap {
                    lambda,
                    points: n,
                    cap: cfg.max_points,
                })
            } else {
                Ok(())
            }
        };
        check_cap(&panels)?;
        let mut previous = self.tensor_sum(lambda, &panels, &rule);
        for _ in 0..cfg.max_refinements {
            panels.iter_mut().for_each(|p| *p *= 2);
            check_cap(&panels)?;
            let value = self.tensor_sum(lambda, &panels, &rule);
            if (value - previous).norm() <= cfg.rel_tol * value.norm() + cfg.abs_tol {
                return Ok(value);
            }
            previous = value;
        }
        let last = self.tensor_sum(lambda, &panels, &rule);
        Err(QuadError::NonConvergence {
            lambda,
            refinements: cfg.max_refinements,
            previous,
            last,
        })
    }

    fn axes_empty(&self) -> bool {
        self.dim() == 0
    }
}

/// Fixed-shape pairwise summation.
fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// `n` geometric steps from `min` to `max` inclusive.
pub fn geometric_grid(min: f64, max: f64, n: usize) -> Result<Vec<f64>, QuadError> {
    if !(min > 0.0 && max > min && n >= 2) {
        return Err(QuadError::BadGrid(format!(
            "need 0 < min < max and at least 2 steps, got {min}, {max}, {n}"
        )));
    }
    let ratio = (max / min).powf(1.0 / (n - 1) as f64);
    Ok((0..n)
        .map(|k| if k + 1 == n { max } else { min * ratio.powi(k as i32) })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub lambda: f64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub samples: Vec<Sample>,
    /// Maximum over each window of three consecutive magnitudes, placed at
    /// the window's middle lambda (so it has two fewer entries).
    pub envelope: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// `max(0, -slope)`.
    pub epsilon: f64,
    /// Coefficient of determination of the log-log line.
    pub r_squared: f64,
}

impl DecayFit {
    pub fn lambdas(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.lambda).collect()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.abs).collect()
    }
}

fn check_grid(grid: &[f64]) -> Result<(), QuadError> {
    if grid.len() < 6 {
        return Err(QuadError::BadGrid(format!(
            "need at least 6 points, got {}",
            grid.len()
        )));
    }
    if grid[0] < 1.0 {
        return Err(QuadError::BadGrid(format!("min lambda {} < 1", grid[0])));
    }
    let ratio = grid[1] / grid[0];
    if ratio < std::f64::consts::SQRT_2 * (1.0 - 1e-9) {
        return Err(QuadError::BadGrid(format!("ratio {ratio} < sqrt(2)")));
    }
    for w in grid.windows(2) {
        if ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-6 {
            return Err(QuadError::BadGrid("grid is not geometric".into()));
        }
    }
    Ok(())
}

/// Fits `log env = intercept + slope log lambda` to magnitudes on `grid`.
/// Needs at least three samples.
pub fn fit_envelope(grid: &[f64], values: &[Complex64]) -> DecayFit {
    assert!(grid.len() == values.len() && grid.len() >= 3);
    let mags: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let envelope: Vec<f64> = mags
        .windows(3)
        .map(|w| w.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let xs: Vec<f64> = grid[1..grid.len() - 1].iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = envelope.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if ss_tot <= f64::EPSILON * ys.len() as f64 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    DecayFit {
        samples: grid
            .iter()
            .zip(values)
            .map(|(&lambda, v)| Sample {
                lambda,
                re: v.re,
                im: v.im,
                abs: v.norm(),
            })
            .collect(),
        envelope,
        slope,
        intercept,
        epsilon: (-slope).max(0.0),
        r_squared,
    }
}

/// Evaluates on a geometric grid and fits the envelope decay exponent.
pub fn decay_exponent(
    integral: &OscillatoryIntegral,
    grid: &[f64],
    cfg: &QuadConfig,
) -> Result<DecayFit, QuadError> {
    check_grid(grid)?;
    let values = grid
        .iter()
        .map(|&l| integral.evaluate(l, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(fit_envelope(grid, &values))
}
