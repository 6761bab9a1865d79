//! Complex-scaled eigenproblem.
//!
//! The operator is discretised on `x(t) = t + i tan(theta) S(t)`, where `S`
//! vanishes (to exponential accuracy) on `|t| < R0` and grows like
//! `|t| - R0` beyond, so the tails follow rays at angle `theta`. Resonances in
//! the sector `-theta < arg lambda < 0` become eigenvalues; the rotated
//! continuum sits near `arg lambda = -theta`. Chebyshev collocation on
//! `[-X, X]` with a Kosloff-Tal-Ezer node map.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::ModeOperator;
use super::resonance::{Method, Resonance, ResonanceList};
use super::zeros::Rect;
use crate::barrier::barrier_data;
use crate::error::{QnmError, Result};
use crate::linalg::{eigenpair, eigenvalues, CMat};
use crate::ode::{integrate, Scheme, Tolerance};
use crate::spacetime::{ComplexPoint, LocalData, Side};

/// Largest admitted rotation.
pub const MAX_THETA: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    /// Half-width of the undeformed segment.
    pub r0: f64,
    pub theta: f64,
    /// Truncation half-length in the contour parameter.
    pub x_max: f64,
    /// Polynomial degree; there are `n + 1` nodes.
    pub n: usize,
    /// Width of the smooth switch-on of the rotation.
    pub ramp_width: f64,
}

impl ContourSpec {
    pub fn new(r0: f64, theta: f64, x_max: f64, n: usize) -> Result<Self> {
        let spec = Self {
            r0,
            theta,
            x_max,
            n,
            ramp_width: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta.abs() < MAX_THETA) {
            return Err(QnmError::InvalidInput(format!(
                "rotation {} outside (-{MAX_THETA}, {MAX_THETA})",
                self.theta
            )));
        }
        if !(self.r0 > 0.0 && self.ramp_width > 0.0 && self.x_max > self.r0 + 2.0 * self.ramp_width) {
            return Err(QnmError::InvalidInput(format!(
                "contour needs 0 < R0 and X > R0 + 2 w (R0 = {}, X = {}, w = {})",
                self.r0, self.x_max, self.ramp_width
            )));
        }
        if self.n < 16 {
            return Err(QnmError::InvalidInput(format!(
                "{} collocation intervals are too few",
                self.n
            )));
        }
        Ok(())
    }

    /// `x(t)`, `x'(t)`, `x''(t)`.
    pub fn point(&self, t: f64) -> [Complex64; 3] {
        let w = self.ramp_width;
        let tan = self.theta.tan();
        let soft = |u: f64| {
            let z = 2.0 * (u - self.r0) / w;
            0.5 * w * if z > 30.0 { z } else { z.exp().ln_1p() }
        };
        let logistic = |u: f64| 1.0 / (1.0 + (-2.0 * (u - self.r0) / w).exp());
        let curve = |u: f64| {
            let s = logistic(u);
            2.0 / w * s * (1.0 - s)
        };
        let i = Complex64::i();
        let s = soft(t) - soft(-t);
        let ds = logistic(t) + logistic(-t);
        let dds = curve(t) - curve(-t);
        [t + i * tan * s, 1.0 + i * tan * ds, i * tan * dds]
    }

    /// Ascending nodes `t_j` and the Jacobian `dt/dxi`.
    pub fn nodes(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.n;
        let beta = 1.0 / (f64::EPSILON.ln().abs() / n as f64).cosh();
        let asb = beta.asin();
        let xi: Vec<f64> = (0..=n).map(|j| -(PI * j as f64 / n as f64).cos()).collect();
        let t = xi.iter().map(|&s| self.x_max * (beta * s).asin() / asb).collect();
        let jac = xi
            .iter()
            .map(|&s| self.x_max * beta / (asb * (1.0 - beta * beta * s * s).sqrt()))
            .collect();
        (xi, t, jac)
    }
}

/// Chebyshev differentiation matrix on ascending Gauss-Lobatto nodes.
pub fn cheb_matrix(xi: &[f64]) -> Vec<Vec<f64>> {
    let n = xi.len() - 1;
    let weight = |j: usize| {
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        if j == 0 || j == n {
            0.5 * sign
        } else {
            sign
        }
    };
    let mut d = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        let mut row_sum = 0.0;
        for j in 0..=n {
            if i != j {
                let v = weight(j) / weight(i) / (xi[i] - xi[j]);
                d[i][j] = v;
                row_sum += v;
            }
        }
        d[i][i] = -row_sum;
    }
    d
}

/// Coefficients along the contour.
struct Samples {
    jac: Vec<f64>,
    dx: Vec<Complex64>,
    local: Vec<LocalData>,
}

fn sample(op: &ModeOperator, spec: &ContourSpec) -> Result<Samples> {
    let profile = op.profile();
    let (_, t, jac) = spec.nodes();
    let points: Vec<[Complex64; 3]> = t.iter().map(|&s| spec.point(s)).collect();
    let split = profile.map().barrier_x().clamp(-spec.r0, spec.r0);
    let tol = Tolerance::new(1e-12, 1e-14);
    let mut local = vec![None; t.len()];
    for side in [Side::Minus, Side::Plus] {
        let r_h = profile.map().horizon_radius(side);
        let anchor = ComplexPoint::real(profile, split);
        let start = if anchor.side == side {
            anchor.log_gap
        } else {
            let r = profile.map().radius_from_tortoise(split);
            Complex64::new((r - r_h).abs().ln(), 0.0)
        };
        let idx: Vec<usize> = match side {
            Side::Minus => (0..t.len()).rev().filter(|&j| t[j] < split).collect(),
            Side::Plus => (0..t.len()).filter(|&j| t[j] >= split).collect(),
        };
        let outs: Vec<f64> = idx.iter().map(|&j| t[j]).collect();
        let end = match side {
            Side::Minus => -spec.x_max,
            Side::Plus => spec.x_max,
        };
        let traj = integrate::<1, QnmError, _>(
            Scheme::Dopri5,
            |s, y| Ok([profile.gap_rate(side, y[0])? * spec.point(s)[1]]),
            split,
            [start],
            end,
            &outs,
            &tol,
        )?;
        for (&j, y) in idx.iter().zip(&traj.outputs) {
            local[j] = Some(profile.local_data(side, y[0])?);
        }
    }
    Ok(Samples {
        dx: points.iter().map(|p| p[1]).collect(),
        local: local.into_iter().map(|l| l.expect("every node sampled")).collect(),
        jac,
    })
}

/// Discretised operator: `2n x 2n` for Dirac kinds (bag condition `u = v`
/// at both ends), `(n-1) x (n-1)` for Schrodinger kinds (Dirichlet). The
/// Schrodinger matrix has eigenvalues `lambda^2`.
pub fn scaled_matrix(op: &ModeOperator, spec: &ContourSpec) -> Result<CMat> {
    spec.validate()?;
    let s = sample(op, spec)?;
    let (xi, _, _) = spec.nodes();
    let d = cheb_matrix(&xi);
    let n = spec.n;
    let i = Complex64::i();
    // d/dx at node k applied to node j.
    let dx_op = |k: usize, j: usize| d[k][j] / (s.jac[k] * s.dx[k]);
    if op.kind().is_dirac() {
        let col_u = |j: usize| if j == 0 { n } else { j - 1 };
        let col_v = |j: usize| if j == n { n - 1 } else { n + j };
        let mut a = CMat::zeros(2 * n, 2 * n);
        for k in 1..=n {
            let row = k - 1;
            for j in 0..=n {
                a[(row, col_u(j))] += -i * dx_op(k, j);
            }
            a[(row, col_v(k))] += op.coupling(&s.local[k]);
        }
        for k in 0..n {
            let row = n + k;
            for j in 0..=n {
                a[(row, col_v(j))] += i * dx_op(k, j);
            }
            a[(row, col_u(k))] += op.coupling(&s.local[k]);
        }
        Ok(a)
    } else {
        let m = n + 1;
        let first: Vec<Vec<Complex64>> = (0..m).map(|k| (0..m).map(|j| dx_op(k, j)).collect()).collect();
        let mut a = CMat::zeros(n - 1, n - 1);
        for k in 1..n {
            let v = op.potential(&s.local[k]);
            for j in 1..n {
                let mut second = Complex64::new(0.0, 0.0);
                for (p, row) in first.iter().enumerate().take(m) {
                    second += first[k][p] * row[j];
                }
                a[(k - 1, j - 1)] = -second;
            }
            a[(k - 1, k - 1)] += v;
        }
        Ok(a)
    }
}

/// Eigenvalues as `(lambda, raw)` pairs: `raw` is the matrix eigenvalue and
/// `lambda` its square root with the sign of `theta` for Schrodinger kinds.
fn spectrum_pairs(op: &ModeOperator, spec: &ContourSpec) -> Result<(CMat, Vec<(Complex64, Complex64)>)> {
    let a = scaled_matrix(op, spec)?;
    let sign = if spec.theta < 0.0 { -1.0 } else { 1.0 };
    let mut out: Vec<(Complex64, Complex64)> = eigenvalues(&a)?
        .into_iter()
        .map(|e| (if op.kind().is_dirac() { e } else { sign * e.sqrt() }, e))
        .collect();
    out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    Ok((a, out))
}

/// All eigenvalues of the discretised operator in the `lambda` plane, sorted
/// by real part.
pub fn scaled_spectrum(op: &ModeOperator, spec: &ContourSpec) -> Result<Vec<Complex64>> {
    Ok(spectrum_pairs(op, spec)?.1.into_iter().map(|p| p.0).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaledSettings {
    pub theta: f64,
    pub r0: f64,
    /// Smallest polynomial degree used.
    pub min_points: usize,
    /// Nodes per local wavelength at the largest `|lambda|` in the window.
    pub points_per_wave: f64,
    /// Decay exponent of the outgoing wave at the truncation point.
    pub decay_target: f64,
    /// Agreement required between degrees `n` and `5n/4`.
    pub agreement: f64,
    /// Unstable eigenvalues below `arg lambda = -continuum_fraction * theta`
    /// are attributed to the rotated continuum.
    pub continuum_fraction: f64,
    /// Largest admitted truncation half-length.
    pub max_extent: f64,
}

impl Default for ScaledSettings {
    fn default() -> Self {
        Self {
            theta: 0.25,
            r0: 10.0,
            min_points: 400,
            points_per_wave: 8.0,
            decay_target: 12.0,
            agreement: 1e-6,
            continuum_fraction: 0.5,
            max_extent: 2000.0,
        }
    }
}

impl ScaledSettings {
    /// Contour adapted to `window`. Windows left of the imaginary axis rotate
    /// the contour the other way.
    pub fn contour_for(&self, window: &Rect) -> Result<ContourSpec> {
        let theta = if window.re_min + window.re_max < 0.0 {
            -self.theta.abs()
        } else {
            self.theta.abs()
        };
        let center = Complex64::new(0.5 * (window.re_min + window.re_max).abs(), 0.5 * window.im_min);
        let rate = (center * Complex64::from_polar(1.0, theta.abs())).im / theta.cos();
        let x_max = if theta == 0.0 || rate <= 0.0 {
            self.r0 + 4.0 * self.decay_target
        } else {
            self.r0 + self.decay_target / rate
        };
        if x_max > self.max_extent {
            return Err(QnmError::InvalidInput(format!(
                "window needs truncation at {x_max:.1} beyond the admitted {}",
                self.max_extent
            )));
        }
        let top = window.re_min.abs().max(window.re_max.abs()).hypot(window.im_min);
        let length = 2.0 * x_max / theta.cos();
        let waves = top * length / (2.0 * PI);
        let n = ((self.points_per_wave * waves).ceil() as usize).max(self.min_points);
        ContourSpec::new(self.r0, theta, x_max, n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaledReport {
    pub list: ResonanceList,
    pub window: Rect,
    pub contour: ContourSpec,
    /// Unstable eigenvalues attributed to the rotated continuum.
    pub continuum: Vec<Complex64>,
}

/// Default window `Re in [0.2, 1.5] n z0`, `Im in (-depth, 0)` with depth
/// `min(2.5 gamma, 3 eps_strip)`, `gamma = omega / z0` the damping unit and
/// `eps_strip = 0.8 kappa_min`.
pub fn default_window(op: &ModeOperator) -> Result<Rect> {
    let data = barrier_data(op.profile())?;
    let nz = op.n() * data.z0;
    let strip = 0.8 * op.profile().map().horizons().kappa_min();
    let depth = (2.5 * data.damping_unit()).min(3.0 * strip);
    Rect::new(0.2 * nz, 1.5 * nz, -depth, 0.0)
}

/// Angle between `z` and the nearer real semi-axis.
fn below_axis_angle(z: Complex64) -> f64 {
    let a = z.arg().abs();
    a.min(PI - a)
}

/// Resonances of `op` in `window` from two collocation degrees.
pub fn scaled_resonances(op: &ModeOperator, settings: &ScaledSettings, window: Rect) -> Result<ScaledReport> {
    let contour = settings.contour_for(&window)?;
    let fine = ContourSpec {
        n: contour.n * 5 / 4,
        ..contour
    };
    let (_, coarse) = spectrum_pairs(op, &contour)?;
    let (matrix, fine_pairs) = spectrum_pairs(op, &fine)?;
    let open = |z: Complex64| window.contains(z) && z.im < 0.0 && z.im > window.im_min;
    let mut accepted = Vec::new();
    let mut continuum = Vec::new();
    let mut unstable = Vec::new();
    for &(z, raw) in fine_pairs.iter().filter(|(z, _)| open(*z)) {
        if z.im.abs() <= settings.agreement * z.norm().max(1.0) {
            continue;
        }
        if below_axis_angle(z) > settings.continuum_fraction * settings.theta.abs() {
            continuum.push(z);
            continue;
        }
        let nearest = coarse.iter().map(|(c, _)| (c - z).norm()).fold(f64::INFINITY, f64::min);
        if nearest <= settings.agreement {
            let (_, backward) = eigenpair(&matrix, raw)?;
            accepted.push(Resonance {
                lambda: z,
                kind: op.kind(),
                two_l: op.mode().map(|m| m.two_l()),
                method: Method::Scaled,
                residual: backward,
                matched: None,
                flagged_multiple: false,
            });
        } else {
            unstable.push(z);
        }
    }
    if !unstable.is_empty() {
        return Err(QnmError::UnresolvedWindow(unstable));
    }
    Ok(ScaledReport {
        list: ResonanceList::new(accepted),
        window,
        contour,
        continuum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheb_differentiates_polynomials() {
        let xi: Vec<f64> = (0..=12).map(|j| -(PI * j as f64 / 12.0).cos()).collect();
        let d = cheb_matrix(&xi);
        for i in 0..=12 {
            let exact = 3.0 * xi[i] * xi[i] - 1.0;
            let approx: f64 = (0..=12).map(|j| d[i][j] * (xi[j].powi(3) - xi[j])).sum();
            assert!((approx - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn contour_is_real_inside_and_rotated_outside() {
        let c = ContourSpec::new(10.0, 0.3, 60.0, 64).unwrap();
        let p = c.point(3.0);
        assert!(p[0].im.abs() < 1e-6 && (p[1] - 1.0).norm() < 1e-6);
        let far = c.point(40.0);
        assert!((far[1] - Complex64::new(1.0, 0.3f64.tan())).norm() < 1e-12);
        let back = c.point(-40.0);
        assert!((back[0].im + far[0].im).abs() < 1e-12);
        let h = 1e-5;
        let fd = (c.point(10.3 + h)[1] - c.point(10.3 - h)[1]) / (2.0 * h);
        assert!((fd - c.point(10.3)[2]).norm() < 1e-8);
    }

    #[test]
    fn node_map_spans_interval() {
        let c = ContourSpec::new(10.0, 0.3, 60.0, 64).unwrap();
        let (xi, t, jac) = c.nodes();
        assert_eq!(t.len(), 65);
        assert!((t[0] + 60.0).abs() < 1e-12 && (t[64] - 60.0).abs() < 1e-12);
        let h = 1e-7;
        let beta = 1.0 / (f64::EPSILON.ln().abs() / 64.0).cosh();
        let map = |s: f64| 60.0 * (beta * s).asin() / beta.asin();
        let fd = (map(xi[20] + h) - map(xi[20] - h)) / (2.0 * h);
        assert!((fd - jac[20]).abs() < 1e-6 * jac[20]);
    }

    #[test]
    fn rejects_bad_contours() {
        assert!(ContourSpec::new(10.0, 1.4, 60.0, 64).is_err());
        assert!(ContourSpec::new(10.0, 0.2, 11.0, 64).is_err());
        assert!(ContourSpec::new(10.0, 0.2, 60.0, 8).is_err());
    }
}
