//! Argument-principle zero counting and Newton refinement for analytic
//! functions given as fallible closures.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QnmError, Result};

/// Closed axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let all_finite = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !all_finite || re_min >= re_max || im_min >= im_max {
            return Err(QnmError::InvalidInput(format!(
                "degenerate rectangle [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    pub fn around(center: Complex64, half_re: f64, half_im: f64) -> Result<Self> {
        Self::new(
            center.re - half_re,
            center.re + half_re,
            center.im - half_im,
            center.im + half_im,
        )
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Mirror image under `z -> -conj z`.
    pub fn mirrored(&self) -> Self {
        Self {
            re_min: -self.re_max,
            re_max: -self.re_min,
            ..*self
        }
    }

    /// Rectangle scaled about its centre.
    pub fn scaled(&self, factor: f64) -> Self {
        let c = self.center();
        let hw = 0.5 * self.width() * factor;
        let hh = 0.5 * self.height() * factor;
        Self {
            re_min: c.re - hw,
            re_max: c.re + hw,
            im_min: c.im - hh,
            im_max: c.im + hh,
        }
    }

    /// Splits into `nx * ny` cells, row-major from the lower left.
    pub fn split(&self, nx: usize, ny: usize) -> Vec<Rect> {
        let dx = self.width() / nx as f64;
        let dy = self.height() / ny as f64;
        let mut cells = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                cells.push(Rect {
                    re_min: self.re_min + i as f64 * dx,
                    re_max: if i + 1 == nx {
                        self.re_max
                    } else {
                        self.re_min + (i + 1) as f64 * dx
                    },
                    im_min: self.im_min + j as f64 * dy,
                    im_max: if j + 1 == ny {
                        self.im_max
                    } else {
                        self.im_min + (j + 1) as f64 * dy
                    },
                });
            }
        }
        cells
    }

    /// Counter-clockwise corners starting at the lower left.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountSettings {
    /// Initial samples per edge.
    pub samples_per_edge: usize,
    /// Largest argument increment accepted between neighbouring samples.
    pub max_arg_step: f64,
    /// Segments shorter than this signal a zero on the contour.
    pub min_segment: f64,
    pub max_nudges: u32,
    /// Outward growth per nudge, as a fraction of the rectangle size.
    pub nudge_fraction: f64,
}

impl Default for CountSettings {
    fn default() -> Self {
        Self {
            samples_per_edge: 12,
            max_arg_step: PI / 4.0,
            min_segment: 1e-6,
            max_nudges: 5,
            nudge_fraction: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCount {
    pub count: i64,
    /// Rectangle actually used after nudging.
    pub rect: Rect,
    pub nudges: u32,
    pub evaluations: usize,
}

enum EdgeFailure {
    NearZero,
    Eval(QnmError),
}

impl From<QnmError> for EdgeFailure {
    fn from(e: QnmError) -> Self {
        EdgeFailure::Eval(e)
    }
}

fn segment_winding<F>(
    f: &F,
    a: Complex64,
    b: Complex64,
    fa: Complex64,
    fb: Complex64,
    settings: &CountSettings,
    evals: &AtomicUsize,
) -> std::result::Result<f64, EdgeFailure>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let ratio = fb / fa;
    let step = ratio.arg();
    let modulus = ratio.norm();
    if step.abs() <= settings.max_arg_step && (0.1..=10.0).contains(&modulus) {
        return Ok(step);
    }
    if (b - a).norm() < settings.min_segment {
        return Err(EdgeFailure::NearZero);
    }
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    evals.fetch_add(1, Ordering::Relaxed);
    if fm == Complex64::new(0.0, 0.0) || !fm.is_finite() {
        return Err(EdgeFailure::NearZero);
    }
    Ok(segment_winding(f, a, m, fa, fm, settings, evals)? + segment_winding(f, m, b, fm, fb, settings, evals)?)
}

fn winding_once<F>(
    f: &F,
    rect: &Rect,
    settings: &CountSettings,
    evals: &AtomicUsize,
) -> std::result::Result<f64, EdgeFailure>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let corners = rect.corners();
    let m = settings.samples_per_edge.max(1);
    let points: Vec<Complex64> = (0..4)
        .flat_map(|e| {
            let a = corners[e];
            let b = corners[(e + 1) % 4];
            (0..m).map(move |j| a + (b - a) * (j as f64 / m as f64))
        })
        .collect();
    let values: Vec<Complex64> = points.par_iter().map(|&z| f(z)).collect::<Result<Vec<_>>>()?;
    evals.fetch_add(values.len(), Ordering::Relaxed);
    if values.iter().any(|v| *v == Complex64::new(0.0, 0.0) || !v.is_finite()) {
        return Err(EdgeFailure::NearZero);
    }
    let total = points.len();
    let pieces: Vec<std::result::Result<f64, EdgeFailure>> = (0..total)
        .into_par_iter()
        .map(|k| {
            let next = (k + 1) % total;
            segment_winding(f, points[k], points[next], values[k], values[next], settings, evals)
        })
        .collect();
    let mut sum = 0.0;
    for p in pieces {
        sum += p?;
    }
    Ok(sum)
}

/// Number of zeros of `f` inside `rect`, counted with multiplicity. If a zero
/// sits on or very near the contour the rectangle is grown slightly and the
/// count repeated.
pub fn count_zeros<F>(f: &F, rect: Rect, settings: &CountSettings) -> Result<ZeroCount>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let evals = AtomicUsize::new(0);
    let mut current = rect;
    for nudges in 0..=settings.max_nudges {
        match winding_once(f, &current, settings, &evals) {
            Ok(total) => {
                let turns = total / (2.0 * PI);
                let count = turns.round();
                if (turns - count).abs() < 0.05 {
                    return Ok(ZeroCount {
                        count: count as i64,
                        rect: current,
                        nudges,
                        evaluations: evals.load(Ordering::Relaxed),
                    });
                }
            }
            Err(EdgeFailure::NearZero) => {}
            Err(EdgeFailure::Eval(e)) => return Err(e),
        }
        let gx = settings.nudge_fraction * current.width();
        let gy = settings.nudge_fraction * current.height();
        current = Rect {
            re_min: current.re_min - gx,
            re_max: current.re_max + gx * 1.3,
            im_min: current.im_min - gy * 1.1,
            im_max: current.im_max + gy * 0.7,
        };
    }
    Err(QnmError::ZeroOnBoundary {
        nudges: settings.max_nudges as usize,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RefineSettings {
    /// Central-difference step relative to `|lambda|`.
    pub rel_step: f64,
    /// Stop once `|step| < tol |lambda|`.
    pub tol: f64,
    pub max_iter: usize,
    /// Iterates farther than this from the seed count as divergence.
    pub trust_radius: f64,
    /// Circle radius used for the multiplicity check.
    pub multiplicity_radius: f64,
    /// `|W'| rho / max |W|` below this flags a multiple zero.
    pub multiplicity_ratio: f64,
}

impl Default for RefineSettings {
    fn default() -> Self {
        Self {
            rel_step: 1e-6,
            tol: 1e-10,
            max_iter: 50,
            trust_radius: 0.1,
            multiplicity_radius: 1e-2,
            multiplicity_ratio: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refined {
    pub lambda: Complex64,
    /// `|f(lambda)|`.
    pub residual: f64,
    pub derivative: Complex64,
    pub iterations: usize,
    /// Winding number of `f` on the multiplicity circle.
    pub order: u32,
    pub flagged_multiple: bool,
}

fn derivative<F>(f: &F, z: Complex64, rel_step: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let h = rel_step * z.norm().max(1e-3);
    Ok((f(z + h)? - f(z - h)?) / (2.0 * h))
}

/// Newton iteration on `f` from `seed`.
pub fn refine<F>(f: &F, seed: Complex64, settings: &RefineSettings) -> Result<Refined>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let diverged = || QnmError::NoZeroNearSeed { seed };
    let mut z = seed;
    let mut value = f(z).map_err(|_| diverged())?;
    let mut iterations = 0;
    let mut converged = value == Complex64::new(0.0, 0.0);
    while !converged && iterations < settings.max_iter {
        iterations += 1;
        let d = derivative(f, z, settings.rel_step).map_err(|_| diverged())?;
        let step = value / d;
        if !step.is_finite() {
            return Err(diverged());
        }
        z -= step;
        if (z - seed).norm() > settings.trust_radius {
            return Err(diverged());
        }
        value = f(z).map_err(|_| diverged())?;
        converged = step.norm() < settings.tol * z.norm().max(1e-3) || value == Complex64::new(0.0, 0.0);
    }
    if !converged {
        return Err(diverged());
    }
    let d = derivative(f, z, settings.rel_step).map_err(|_| diverged())?;
    let rho = settings.multiplicity_radius;
    let samples: Vec<Complex64> = (0..16)
        .map(|j| f(z + Complex64::from_polar(rho, j as f64 * PI / 8.0)))
        .collect::<Result<Vec<_>>>()
        .unwrap_or_default();
    let scale = samples.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let order = if samples.is_empty() {
        1
    } else {
        let turns: f64 = (0..16).map(|j| (samples[(j + 1) % 16] / samples[j]).arg()).sum::<f64>() / (2.0 * PI);
        turns.round().max(1.0) as u32
    };
    let flagged_multiple = order > 1 || (scale > 0.0 && d.norm() * rho < settings.multiplicity_ratio * scale);
    Ok(Refined {
        lambda: z,
        residual: value.norm(),
        derivative: d,
        iterations,
        order,
        flagged_multiple,
    })
}
