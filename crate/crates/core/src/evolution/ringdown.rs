//! Matrix-pencil fits of damped exponentials `sum a_j exp(-i lambda_j t)` and
//! residuals of truncated resonance expansions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::WindowSeries;
use crate::error::{QnmError, Result};
use crate::linalg::{eigenvalues, least_squares, svd, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitMode {
    pub lambda: Complex64,
    /// Amplitude at the start of the fit window.
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingdownFit {
    /// Sorted by `|Im lambda|`.
    pub modes: Vec<FitMode>,
    pub t0: f64,
    pub t1: f64,
    /// `|y - model| / |y|` over the window.
    pub residual: f64,
    /// Model order requested by the singular-value gap.
    pub requested_order: usize,
    /// Set when the order had to be lowered to obtain a usable pencil.
    pub reduced: bool,
}

impl RingdownFit {
    /// Mode with the largest modulus at the end of the window.
    pub fn dominant(&self) -> Option<&FitMode> {
        let span = self.t1 - self.t0;
        self.modes.iter().max_by(|a, b| {
            let size = |m: &FitMode| m.amplitude.norm() * (m.lambda.im * span).exp();
            size(a).total_cmp(&size(b))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSettings {
    pub max_order: usize,
    /// Singular-value ratio that separates signal from noise.
    pub gap: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        Self { max_order: 8, gap: 1e3 }
    }
}

fn window_indices(times: &[f64], t0: f64, t1: f64) -> Result<(usize, usize, f64)> {
    let idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= t0 && times[i] <= t1).collect();
    let (Some(&lo), Some(&hi)) = (idx.first(), idx.last()) else {
        return Err(QnmError::InvalidInput(format!("no samples in [{t0}, {t1}]")));
    };
    if hi - lo + 1 < 4 {
        return Err(QnmError::InvalidInput(format!(
            "only {} samples in [{t0}, {t1}]",
            hi - lo + 1
        )));
    }
    let dt = (times[hi] - times[lo]) / (hi - lo) as f64;
    if (lo..hi).any(|i| ((times[i + 1] - times[i]) / dt - 1.0).abs() > 1e-6) {
        return Err(QnmError::InvalidInput("fit samples are not uniformly spaced".into()));
    }
    Ok((lo, hi, dt))
}

fn vandermonde(nodes: &[Complex64], len: usize) -> CMat {
    CMat::from_fn(len, nodes.len(), |k, j| nodes[j].powi(k as i32))
}

/// Fits `values` on `[t0, t1]` with at most `settings.max_order` modes.
pub fn ringdown_fit(
    times: &[f64],
    values: &[Complex64],
    t0: f64,
    t1: f64,
    settings: &FitSettings,
) -> Result<RingdownFit> {
    if times.len() != values.len() {
        return Err(QnmError::InvalidInput("times and values differ in length".into()));
    }
    let (lo, hi, dt) = window_indices(times, t0, t1)?;
    let y = &values[lo..=hi];
    let n = y.len();
    let pencil = n / 2;
    let hankel = CMat::from_fn(n - pencil, pencil + 1, |r, c| y[r + c]);
    let (_, s, v) = svd(&hankel)?;
    let cap = settings.max_order.min(pencil).min(s.len() - 1).max(1);
    let floor = s[0] * 1e-13;
    let mut requested = (1..=cap)
        .find(|&m| s[m] < floor || s[m - 1] / s[m] > settings.gap)
        .unwrap_or(cap);
    let order0 = requested;
    let scale = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    loop {
        let attempt = (|| -> Result<(Vec<Complex64>, Vec<Complex64>)> {
            let w = CMat::from_fn(pencil + 1, requested, |r, c| v[(r, c)].conj());
            let w1 = CMat::from_fn(pencil, requested, |r, c| w[(r, c)]);
            let cols: Vec<Vec<Complex64>> = (0..requested)
                .map(|c| least_squares(&w1, &(1..=pencil).map(|r| w[(r, c)]).collect::<Vec<_>>()))
                .collect::<Result<_>>()?;
            let x = CMat::from_fn(requested, requested, |r, c| cols[c][r]);
            let nodes = eigenvalues(&x)?;
            if nodes.iter().any(|z| !(z.is_finite() && z.norm() > 0.0)) {
                return Err(QnmError::LinearAlgebra("degenerate pencil".into()));
            }
            let amps = least_squares(&vandermonde(&nodes, n), y)?;
            Ok((nodes, amps))
        })();
        match attempt {
            Ok((nodes, amps)) => {
                let model = vandermonde(&nodes, n);
                let resid: f64 = (0..n)
                    .map(|k| {
                        let fit: Complex64 = (0..nodes.len()).map(|j| model[(k, j)] * amps[j]).sum();
                        (y[k] - fit).norm_sqr()
                    })
                    .sum::<f64>()
                    .sqrt();
                let mut modes: Vec<FitMode> = nodes
                    .iter()
                    .zip(&amps)
                    .map(|(z, a)| FitMode {
                        lambda: Complex64::i() * z.ln() / dt,
                        amplitude: *a,
                    })
                    .collect();
                modes.sort_by(|a, b| {
                    a.lambda
                        .im
                        .abs()
                        .total_cmp(&b.lambda.im.abs())
                        .then(a.lambda.re.total_cmp(&b.lambda.re))
                });
                return Ok(RingdownFit {
                    modes,
                    t0: times[lo],
                    t1: times[hi],
                    residual: if scale > 0.0 { resid / scale } else { 0.0 },
                    requested_order: order0,
                    reduced: requested < order0,
                });
            }
            Err(e) if requested <= 1 => return Err(e),
            Err(_) => requested -= 1,
        }
    }
}

/// Least-squares slope of `ln values` against `times` on `[t0, t1]`.
pub fn log_slope(times: &[f64], values: &[f64], t0: f64, t1: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, v)| **t >= t0 && **t <= t1 && **v > 0.0)
        .map(|(t, v)| (*t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(QnmError::InvalidInput(format!(
            "fewer than two positive samples in [{t0}, {t1}]"
        )));
    }
    let k = pts.len() as f64;
    let (mt, my) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t / k, b + y / k));
    let (num, den) = pts.iter().fold((0.0, 0.0), |(n, d), (t, y)| {
        (n + (t - mt) * (y - my), d + (t - mt) * (t - mt))
    });
    Ok(num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionResidual {
    /// Frequencies with `Im lambda > -mu` that were subtracted.
    pub used: Vec<Complex64>,
    pub times: Vec<f64>,
    /// `|chi psi(t) - sum_j exp(-i lambda_j t) phi_j| / |u|` at each time.
    pub residual: Vec<f64>,
    pub slope: f64,
}

/// Fits amplitude vectors `phi_j` for every frequency in `resonances` to the
/// window samples by relative least squares over `[t0, t1]`, subtracts the terms with
/// `Im lambda > -mu`, and reports the decay of what is left. `data_norm` is
/// `|u|`.
pub fn expansion_residual(
    series: &WindowSeries,
    resonances: &[Complex64],
    mu: f64,
    t0: f64,
    t1: f64,
    data_norm: f64,
) -> Result<ExpansionResidual> {
    let (lo, hi, _) = window_indices(&series.times, t0, t1)?;
    let ts = &series.times[lo..=hi];
    let rows = &series.fields[lo..=hi];
    let width = 2 * series.weights.len();
    if rows.iter().any(|r| r.len() != width) {
        return Err(QnmError::InvalidInput(
            "field samples do not match the window points".into(),
        ));
    }
    if ts.len() < resonances.len() {
        return Err(QnmError::InvalidInput(format!(
            "{} samples cannot fit {} modes",
            ts.len(),
            resonances.len()
        )));
    }
    let keep: Vec<bool> = resonances.iter().map(|z| z.im > -mu).collect();
    let basis = CMat::from_fn(ts.len(), resonances.len(), |k, j| {
        (-Complex64::i() * resonances[j] * (ts[k] - ts[0])).exp()
    });
    // Rows are scaled by the window norm so that late times, where the
    // expansion is accurate, weigh as much as early ones.
    let scale: Vec<f64> = rows
        .iter()
        .map(|r| series.norm_of(r))
        .map(|n| if n > 0.0 { 1.0 / n } else { 1.0 })
        .collect();
    let scaled_basis = CMat::from_fn(ts.len(), resonances.len(), |k, j| basis[(k, j)] * scale[k]);
    let mut resid = vec![0.0; ts.len()];
    for p in 0..width {
        let column: Vec<Complex64> = rows.iter().map(|r| r[p]).collect();
        let amps = if keep.iter().any(|&k| k) {
            let target: Vec<Complex64> = column.iter().zip(&scale).map(|(z, s)| z * s).collect();
            least_squares(&scaled_basis, &target)?
        } else {
            vec![Complex64::new(0.0, 0.0); resonances.len()]
        };
        for k in 0..ts.len() {
            let fit: Complex64 = (0..resonances.len())
                .filter(|&j| keep[j])
                .map(|j| basis[(k, j)] * amps[j])
                .sum();
            resid[k] += series.weights[p / 2] * (column[k] - fit).norm_sqr();
        }
    }
    let residual: Vec<f64> = resid.into_iter().map(|r| r.sqrt() / data_norm).collect();
    let slope = log_slope(ts, &residual, t0, t1)?;
    Ok(ExpansionResidual {
        used: resonances
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(z, _)| *z)
            .collect(),
        times: ts.to_vec(),
        residual,
        slope,
    })
}
