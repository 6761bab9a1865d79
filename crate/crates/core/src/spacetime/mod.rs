//! De Sitter-Reissner-Nordstrom exterior geometry.
//!
//! The metric function is `F(r) = 1 - 2M/r + Q^2/r^2 - (Lambda/3) r^2`. The
//! exterior is the interval between the event horizon `r_minus` and the
//! cosmological horizon `r_plus`, mapped onto the whole line by the tortoise
//! coordinate `x` with `dx/dr = 1/F`.

mod continuation;
mod laurent;
mod profile;
mod tortoise;

pub use continuation::{complex_radius, ComplexPoint};
pub use laurent::Laurent;
pub use profile::{AsymptoticData, LocalData, PotentialProfile};
pub use tortoise::{ExteriorPoint, Side, TortoiseMap};

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QnmError, Result};

/// Mass, charge and cosmological constant in geometric units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlackHoleParams {
    pub mass: f64,
    pub charge: f64,
    pub lambda: f64,
}

impl BlackHoleParams {
    /// Validates the scalar admissibility conditions. Root structure is
    /// checked by [`find_horizons`].
    pub fn new(mass: f64, charge: f64, lambda: f64) -> Result<Self> {
        let p = Self { mass, charge, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { mass, charge, lambda } = *self;
        if !(mass.is_finite() && charge.is_finite() && lambda.is_finite()) {
            return Err(QnmError::Inadmissible("non-finite parameter".into()));
        }
        if mass <= 0.0 {
            return Err(QnmError::Inadmissible(format!("mass {mass} must be positive")));
        }
        if lambda <= 0.0 {
            return Err(QnmError::Inadmissible(format!(
                "cosmological constant {lambda} must be positive"
            )));
        }
        if charge * charge >= 9.0 * mass * mass / 8.0 {
            return Err(QnmError::Inadmissible(format!(
                "Q^2 = {} must be below 9M^2/8 = {}",
                charge * charge,
                9.0 * mass * mass / 8.0
            )));
        }
        Ok(())
    }

    /// Geometric rescaling `M -> sM, Q -> sQ, Lambda -> Lambda/s^2`.
    pub fn rescaled(&self, s: f64) -> Self {
        Self {
            mass: self.mass * s,
            charge: self.charge * s,
            lambda: self.lambda / (s * s),
        }
    }

    /// Coefficients of `r^2 F(r)` in increasing powers of `r`.
    pub fn quartic(&self) -> [f64; 5] {
        [
            self.charge * self.charge,
            -2.0 * self.mass,
            1.0,
            0.0,
            -self.lambda / 3.0,
        ]
    }

    /// `F` as a Laurent polynomial in `r`.
    pub fn metric_laurent(&self) -> Laurent {
        let q = self.quartic();
        Laurent::new(-2, q.to_vec())
    }
}

/// `F(r)` for real `r`.
pub fn metric_function(params: &BlackHoleParams, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(QnmError::Domain("metric function evaluated at r = 0".into()));
    }
    let BlackHoleParams { mass, charge, lambda } = *params;
    Ok(1.0 - 2.0 * mass / r + charge * charge / (r * r) - lambda / 3.0 * r * r)
}

/// `F(r)` continued to complex `r`.
pub fn metric_function_complex(params: &BlackHoleParams, r: Complex64) -> Result<Complex64> {
    if r == Complex64::new(0.0, 0.0) {
        return Err(QnmError::Domain("metric function evaluated at r = 0".into()));
    }
    let BlackHoleParams { mass, charge, lambda } = *params;
    let inv = r.inv();
    Ok(1.0 - 2.0 * mass * inv + charge * charge * inv * inv - lambda / 3.0 * r * r)
}

/// `F'(r)` for real `r`.
pub fn metric_derivative(params: &BlackHoleParams, r: f64) -> f64 {
    let BlackHoleParams { mass, charge, lambda } = *params;
    2.0 * mass / (r * r) - 2.0 * charge * charge / (r * r * r) - 2.0 * lambda / 3.0 * r
}

/// `F'(r)` for complex `r`.
pub fn metric_derivative_complex(params: &BlackHoleParams, r: Complex64) -> Complex64 {
    let BlackHoleParams { mass, charge, lambda } = *params;
    let inv = r.inv();
    2.0 * mass * inv * inv - 2.0 * charge * charge * inv * inv * inv - 2.0 * lambda / 3.0 * r
}

/// Index of each root in [`HorizonData::roots`].
pub const NEGATIVE: usize = 0;
pub const INNER: usize = 1;
pub const EVENT: usize = 2;
pub const COSMOLOGICAL: usize = 3;

/// The four real zeros of `r^2 F(r)` in increasing order
/// `r_n < 0 <= r_c < r_minus < r_plus` and the surface gravities `F'(r_i)/2`.
///
/// When `Q = 0` the inner root sits exactly at `r = 0`; its surface gravity is
/// infinite and its tortoise weight vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonData {
    pub roots: [f64; 4],
    pub kappas: [f64; 4],
    /// Partial-fraction weights `1/(2 kappa_i) = 1/F'(r_i)`.
    pub weights: [f64; 4],
    /// `|r^2 F(r_i)|` relative to the magnitude of its terms.
    pub residuals: [f64; 4],
}

impl HorizonData {
    pub fn r_minus(&self) -> f64 {
        self.roots[EVENT]
    }
    pub fn r_plus(&self) -> f64 {
        self.roots[COSMOLOGICAL]
    }
    pub fn kappa_minus(&self) -> f64 {
        self.kappas[EVENT]
    }
    pub fn kappa_plus(&self) -> f64 {
        self.kappas[COSMOLOGICAL]
    }
    /// `min(kappa_minus, |kappa_plus|)`.
    pub fn kappa_min(&self) -> f64 {
        self.kappa_minus().min(self.kappa_plus().abs())
    }
}

fn quartic_eval(c: &[f64; 5], r: f64) -> (f64, f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    let mut scale = 0.0;
    for k in (0..5).rev() {
        dp = dp * r + p;
        p = p * r + c[k];
    }
    for (k, ck) in c.iter().enumerate() {
        scale += ck.abs() * r.abs().powi(k as i32);
    }
    (p, dp, scale)
}

/// Finds the horizons from the companion matrix of `r^2 F(r)` and polishes
/// every root with one Newton step.
pub fn find_horizons(params: &BlackHoleParams) -> Result<HorizonData> {
    params.validate()?;
    let c = params.quartic();
    let lead = c[4];
    let companion = Mat::<f64>::from_fn(4, 4, |i, j| {
        if j == 3 {
            -c[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = companion
        .eigenvalues()
        .map_err(|e| QnmError::LinearAlgebra(format!("{e:?}")))?;
    let scale = eig.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut roots = [0.0; 4];
    for (slot, z) in roots.iter_mut().zip(&eig) {
        if z.im.abs() > 1e-7 * scale {
            return Err(QnmError::Inadmissible(format!("r^2 F has a complex root {z}")));
        }
        *slot = z.re;
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    if params.charge == 0.0 {
        let (idx, _) = roots
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("four roots");
        roots[idx] = 0.0;
    }
    for r in roots.iter_mut() {
        if *r == 0.0 {
            continue;
        }
        let (p, dp, _) = quartic_eval(&c, *r);
        if dp != 0.0 {
            *r -= p / dp;
        }
    }
    let ordered = roots[NEGATIVE] < 0.0
        && roots[INNER] >= 0.0
        && roots[INNER] < roots[EVENT]
        && roots[EVENT] < roots[COSMOLOGICAL];
    let min_gap = roots.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if !ordered || min_gap < 1e-8 * scale {
        return Err(QnmError::Inadmissible(format!(
            "roots {roots:?} are not four distinct reals in the required order"
        )));
    }
    let mut weights = [0.0; 4];
    let mut kappas = [0.0; 4];
    let mut residuals = [0.0; 4];
    for i in 0..4 {
        let prod: f64 = (0..4).filter(|&j| j != i).map(|j| roots[i] - roots[j]).product();
        // F'(r_i) = lead * prod / r_i^2 at a simple root of r^2 F.
        let fprime = lead * prod / (roots[i] * roots[i]);
        weights[i] = roots[i] * roots[i] / (lead * prod);
        kappas[i] = fprime / 2.0;
        let (p, _, sc) = quartic_eval(&c, roots[i]);
        residuals[i] = if sc > 0.0 { p.abs() / sc } else { 0.0 };
    }
    if !(kappas[EVENT] > 0.0 && kappas[COSMOLOGICAL] < 0.0) {
        return Err(QnmError::Inadmissible(format!(
            "surface gravities {kappas:?} have the wrong signs"
        )));
    }
    Ok(HorizonData {
        roots,
        kappas,
        weights,
        residuals,
    })
}
