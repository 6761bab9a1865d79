//! Outgoing Green kernels on a finite window and cutoff-resolvent norms.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QnmError, Result};
use crate::linalg::{singular_values, CMat};
use crate::solver::jost::{jost_solution, wronskian_from_factored, JostSettings};
use crate::solver::{ModeOperator, OperatorKind};
use crate::spacetime::Side;

/// Uniform grid on the cutoff window `[a, b]` with trapezoid weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowGrid {
    pub a: f64,
    pub b: f64,
    pub points: usize,
}

impl WindowGrid {
    pub fn new(a: f64, b: f64, points: usize) -> Result<Self> {
        if !(a < b) || points < 3 {
            return Err(QnmError::InvalidInput(format!(
                "window [{a}, {b}] with {points} points"
            )));
        }
        Ok(Self { a, b, points })
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.points - 1) as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points).map(|i| self.a + i as f64 * h).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.points)
            .map(|i| if i == 0 || i + 1 == self.points { 0.5 * h } else { h })
            .collect()
    }
}

/// Outgoing resolvent kernel sampled on a window: `(D - lambda)^{-1}` for
/// Dirac kinds (a `2m x 2m` block matrix, component-major) and
/// `(P - lambda^2)^{-1}` for Schrodinger kinds (`m x m`, with its
/// `x`-derivative).
#[derive(Debug, Clone)]
pub struct GreenKernel {
    pub lambda: Complex64,
    pub kind: OperatorKind,
    pub grid: WindowGrid,
    pub kernel: CMat,
    pub derivative: Option<CMat>,
    pub wronskian: Complex64,
}

/// Relative size of `W` below which the kernel is refused.
pub const NEAR_RESONANCE: f64 = 1e-10;

pub fn green_kernel(
    op: &ModeOperator,
    jost: &JostSettings,
    lambda: Complex64,
    grid: &WindowGrid,
) -> Result<GreenKernel> {
    let xs = grid.nodes();
    let right = jost_solution(op, jost, lambda, Side::Plus, &xs)?;
    let left = jost_solution(op, jost, lambda, Side::Minus, &xs)?;
    let mid = xs.len() / 2;
    let w = wronskian_from_factored(op, lambda, right.factored[mid], left.factored[mid]);
    if !(w.norm() > NEAR_RESONANCE) {
        return Err(QnmError::NearResonance {
            lambda,
            wronskian_abs: w.norm(),
        });
    }
    let m = xs.len();
    let fp = &right.values;
    let fm = &left.values;
    let i = Complex64::i();
    if op.kind().is_dirac() {
        // Columns of the kernel act on (g1, g2); rows give (u, v).
        let mut k = CMat::zeros(2 * m, 2 * m);
        for r in 0..m {
            for c in 0..m {
                let outer =
                    |f: &[Complex64; 2], g: &[Complex64; 2]| [[f[0] * g[1], f[0] * g[0]], [f[1] * g[1], f[1] * g[0]]];
                let block = if r > c {
                    outer(&fp[r], &fm[c])
                } else if r < c {
                    outer(&fm[r], &fp[c])
                } else {
                    let a = outer(&fp[r], &fm[c]);
                    let b = outer(&fm[r], &fp[c]);
                    [
                        [0.5 * (a[0][0] + b[0][0]), 0.5 * (a[0][1] + b[0][1])],
                        [0.5 * (a[1][0] + b[1][0]), 0.5 * (a[1][1] + b[1][1])],
                    ]
                };
                for (p, row) in block.iter().enumerate() {
                    for (q, val) in row.iter().enumerate() {
                        k[(p * m + r, q * m + c)] = i / w * val;
                    }
                }
            }
        }
        Ok(GreenKernel {
            lambda,
            kind: op.kind(),
            grid: *grid,
            kernel: k,
            derivative: None,
            wronskian: w,
        })
    } else {
        let kernel = CMat::from_fn(m, m, |r, c| {
            let (big, small) = if r >= c {
                (fp[r][0], fm[c][0])
            } else {
                (fm[r][0], fp[c][0])
            };
            -big * small / w
        });
        let derivative = CMat::from_fn(m, m, |r, c| {
            if r > c {
                -fp[r][1] * fm[c][0] / w
            } else if r < c {
                -fm[r][1] * fp[c][0] / w
            } else {
                -0.5 * (fp[r][1] * fm[c][0] + fm[r][1] * fp[c][0]) / w
            }
        });
        Ok(GreenKernel {
            lambda,
            kind: op.kind(),
            grid: *grid,
            kernel,
            derivative: Some(derivative),
            wronskian: w,
        })
    }
}

/// `diag(sqrt(w)) A diag(sqrt(w))` with the trapezoid weights repeated per
/// component block, so that spectral norms approximate `L^2` operator norms.
fn weighted(matrix: &CMat, grid: &WindowGrid) -> CMat {
    let m = grid.points;
    let scale: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    CMat::from_fn(matrix.nrows(), matrix.ncols(), |r, c| {
        matrix[(r, c)] * scale[r % m] * scale[c % m]
    })
}

/// `L^2 -> L^2` norm of `chi G chi`, `chi` the indicator of the window.
pub fn cutoff_norm(kernel: &GreenKernel) -> Result<f64> {
    let a = weighted(&kernel.kernel, &kernel.grid);
    Ok(singular_values(&a)?[0])
}

/// `L^2 -> H^1` norm of `chi G chi` on the window (Schrodinger kernels).
pub fn cutoff_norm_h1(kernel: &GreenKernel) -> Result<f64> {
    let d = kernel
        .derivative
        .as_ref()
        .ok_or_else(|| QnmError::InvalidInput("H^1 norm needs a Schrodinger kernel".into()))?;
    let g = weighted(&kernel.kernel, &kernel.grid);
    let gd = weighted(d, &kernel.grid);
    let m = g.nrows();
    let stacked = CMat::from_fn(2 * m, g.ncols(), |r, c| if r < m { g[(r, c)] } else { gd[(r - m, c)] });
    Ok(singular_values(&stacked)?[0])
}

/// `<lambda> = sqrt(1 + |lambda|^2)`.
pub fn japanese(lambda: Complex64) -> f64 {
    (1.0 + lambda.norm_sqr()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeSample {
    pub lambda: Complex64,
    pub dirac_norm: f64,
    pub schrodinger_norm: f64,
    pub schrodinger_h1: [f64; 2],
    /// `<lambda> |chi (D - lambda)^{-1} chi|`.
    pub dirac_weighted: f64,
    /// `<lambda>^2 |chi (P - lambda^2)^{-1} chi|`.
    pub schrodinger_weighted: f64,
    /// `|chi (D - lambda)^{-1} chi| / (<lambda> (sum of H^1 norms))`.
    pub chain_ratio: f64,
    /// Bound on `chain_ratio` from `|(D + lambda) u| <= sqrt(1 + (|q| + |lambda|)^2) |u|_{H^1}`.
    pub chain_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneScan {
    pub two_l: u32,
    pub samples: Vec<ProbeSample>,
    pub sup_dirac: f64,
    pub sup_schrodinger: f64,
}

/// Probes the Dirac kind of `op` (with its Schrodinger partners) at each
/// `lambda`, in parallel.
pub fn probe_points(
    op: &ModeOperator,
    jost: &JostSettings,
    grid: &WindowGrid,
    lambdas: &[Complex64],
) -> Result<Vec<ProbeSample>> {
    let dirac = op.with_kind(if op.kind().is_dirac() {
        op.kind()
    } else {
        OperatorKind::DiracMinus
    });
    let alpha_max = grid
        .nodes()
        .iter()
        .map(|&x| dirac.real_coefficient(x).abs())
        .fold(0.0, f64::max);
    lambdas
        .par_iter()
        .map(|&lambda| {
            let kd = green_kernel(&dirac, jost, lambda, grid)?;
            let dn = cutoff_norm(&kd)?;
            let mut s_norm: f64 = 0.0;
            let mut h1 = [0.0; 2];
            for (slot, kind) in [OperatorKind::SchrodingerMinus, OperatorKind::SchrodingerPlus]
                .into_iter()
                .enumerate()
            {
                let ks = green_kernel(&dirac.with_kind(kind), jost, lambda, grid)?;
                s_norm = s_norm.max(cutoff_norm(&ks)?);
                h1[slot] = cutoff_norm_h1(&ks)?;
            }
            let jl = japanese(lambda);
            Ok(ProbeSample {
                lambda,
                dirac_norm: dn,
                schrodinger_norm: s_norm,
                schrodinger_h1: h1,
                dirac_weighted: jl * dn,
                schrodinger_weighted: jl * jl * s_norm,
                chain_ratio: dn / (jl * (h1[0] + h1[1])),
                chain_bound: (1.0 + (alpha_max + lambda.norm()).powi(2)).sqrt() / jl,
            })
        })
        .collect()
}

/// Real sample points `[lo, hi]` for zone scans.
pub fn real_grid(lo: f64, hi: f64, count: usize) -> Vec<Complex64> {
    if count == 1 {
        return vec![Complex64::new(lo, 0.0)];
    }
    (0..count)
        .map(|i| Complex64::new(lo + (hi - lo) * i as f64 / (count - 1) as f64, 0.0))
        .collect()
}

/// Suprema of the weighted norms over `lambdas` for one angular mode.
pub fn zone_scan(op: &ModeOperator, jost: &JostSettings, grid: &WindowGrid, lambdas: &[Complex64]) -> Result<ZoneScan> {
    let two_l = op
        .mode()
        .map(|m| m.two_l())
        .ok_or_else(|| QnmError::InvalidInput("zone scan needs an angular mode".into()))?;
    let samples = probe_points(op, jost, grid, lambdas)?;
    let sup_dirac = samples.iter().fold(0.0_f64, |m, s| m.max(s.dirac_weighted));
    let sup_schrodinger = samples.iter().fold(0.0_f64, |m, s| m.max(s.schrodinger_weighted));
    Ok(ZoneScan {
        two_l,
        samples,
        sup_dirac,
        sup_schrodinger,
    })
}
