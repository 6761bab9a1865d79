//! Time-domain evolution of one angular mode, `i d_t psi = D psi` with
//! `D = sigma3 D_x + q sigma1`, by Strang splitting: half a pointwise
//! rotation `exp(-i dt/2 q sigma1)`, a characteristic shift (`u` right, `v`
//! left), and another half rotation.

mod ringdown;

pub use ringdown::{expansion_residual, log_slope, ringdown_fit, ExpansionResidual, FitMode, FitSettings, RingdownFit};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QnmError, Result};
use crate::solver::ModeOperator;

/// Coupling size allowed at the ends of an evolution grid.
pub const BOUNDARY_COUPLING: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, points: usize) -> Result<Self> {
        if !(x_min < x_max) || points < 2 {
            return Err(QnmError::InvalidInput(format!(
                "grid [{x_min}, {x_max}] with {points} points"
            )));
        }
        Ok(Self { x_min, x_max, points })
    }

    /// Grid of spacing close to `dx` whose ends lie where `|q| < BOUNDARY_COUPLING`,
    /// extended by `margin` on both sides.
    pub fn covering(op: &ModeOperator, dx: f64, margin: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(QnmError::InvalidInput(format!("dx = {dx} must be positive")));
        }
        let quiet = |x: f64| op.real_coefficient(x).abs() < BOUNDARY_COUPLING;
        let centre = op.profile().map().barrier_x();
        let mut lo = centre - 1.0;
        while !quiet(lo) {
            lo -= 1.0;
        }
        let mut hi = centre + 1.0;
        while !quiet(hi) {
            hi += 1.0;
        }
        let (lo, hi) = (lo - margin, hi + margin);
        let points = ((hi - lo) / dx).ceil() as usize + 1;
        Self::new(lo, lo + (points - 1) as f64 * dx, points)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.x(i)).collect()
    }

    /// Errors unless the coupling is negligible at both ends.
    pub fn check_boundaries(&self, op: &ModeOperator) -> Result<()> {
        for x in [self.x_min, self.x_max] {
            let q = op.real_coefficient(x).abs();
            if !(q < BOUNDARY_COUPLING) {
                return Err(QnmError::InvalidInput(format!(
                    "coupling {q:e} at grid end x = {x} exceeds {BOUNDARY_COUPLING:e}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
}

impl SpinorField {
    pub fn zeros(points: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            u: vec![z; points],
            v: vec![z; points],
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// `sqrt(dx sum |u|^2 + |v|^2)`, which the exact-shift scheme conserves.
    pub fn norm(&self, dx: f64) -> f64 {
        (dx * self.u.iter().chain(&self.v).map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.u
            .iter()
            .zip(&self.v)
            .position(|(a, b)| !(a.is_finite() && b.is_finite()))
    }
}

/// Cosine-squared bump of half-width `width` at `center`, with components
/// in the ratio `mix`, normalised to unit norm.
pub fn init_bump(grid: &Grid1D, center: f64, width: f64, mix: [Complex64; 2]) -> Result<SpinorField> {
    if !(width > 0.0) || center - width < grid.x_min || center + width > grid.x_max {
        return Err(QnmError::InvalidInput(format!(
            "bump support [{}, {}] not inside the grid [{}, {}]",
            center - width,
            center + width,
            grid.x_min,
            grid.x_max
        )));
    }
    if mix[0].norm() + mix[1].norm() == 0.0 {
        return Err(QnmError::InvalidInput("bump component mix is zero".into()));
    }
    let mut field = SpinorField::zeros(grid.points);
    for i in 0..grid.points {
        let s = (grid.x(i) - center) / width;
        if s.abs() < 1.0 {
            let b = (0.5 * std::f64::consts::PI * s).cos().powi(2);
            field.u[i] = mix[0] * b;
            field.v[i] = mix[1] * b;
        }
    }
    let norm = field.norm(grid.dx());
    if !(norm > 0.0) {
        return Err(QnmError::InvalidInput(format!(
            "bump of width {width} covers no grid point"
        )));
    }
    for z in field.u.iter_mut().chain(field.v.iter_mut()) {
        *z /= norm;
    }
    Ok(field)
}

/// Precomputed splitting step for a fixed grid, coupling and `dt`.
#[derive(Debug, Clone)]
pub struct Stepper {
    dx: f64,
    dt: f64,
    half_cos: Vec<f64>,
    half_sin: Vec<f64>,
}

impl Stepper {
    /// `coupling[i]` is `q(x_i)`; `|dt| <= dx`.
    pub fn new(grid: &Grid1D, coupling: &[f64], dt: f64) -> Result<Self> {
        let dx = grid.dx();
        if !(dt.abs() <= dx * (1.0 + 1e-12)) || dt == 0.0 {
            return Err(QnmError::Cfl { dt, dx });
        }
        if coupling.len() != grid.points {
            return Err(QnmError::InvalidInput(format!(
                "{} coupling values for {} grid points",
                coupling.len(),
                grid.points
            )));
        }
        Ok(Self {
            dx,
            dt,
            half_cos: coupling.iter().map(|q| (0.5 * dt * q).cos()).collect(),
            half_sin: coupling.iter().map(|q| (0.5 * dt * q).sin()).collect(),
        })
    }

    pub fn for_operator(op: &ModeOperator, grid: &Grid1D, dt: f64) -> Result<Self> {
        if !op.kind().is_dirac() {
            return Err(QnmError::InvalidInput(format!(
                "evolution needs a Dirac kind, got {}",
                op.kind()
            )));
        }
        let q: Vec<f64> = grid.nodes().iter().map(|&x| op.real_coefficient(x)).collect();
        Self::new(grid, &q, dt)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn rotate(&self, field: &mut SpinorField) {
        let i = Complex64::i();
        for k in 0..field.len() {
            let (c, s) = (self.half_cos[k], self.half_sin[k]);
            let (u, v) = (field.u[k], field.v[k]);
            field.u[k] = c * u - i * s * v;
            field.v[k] = c * v - i * s * u;
        }
    }

    pub fn step(&self, field: &mut SpinorField) {
        self.rotate(field);
        shift(&mut field.u, self.dt / self.dx);
        shift(&mut field.v, -self.dt / self.dx);
        self.rotate(field);
    }
}

/// `a(x) <- a(x - p dx)` with zero inflow: an index shift when `|p| = 1`,
/// cubic interpolation otherwise.
fn shift(a: &mut [Complex64], p: f64) {
    let zero = Complex64::new(0.0, 0.0);
    let n = a.len();
    if (p.abs() - 1.0).abs() < 1e-12 {
        if p > 0.0 {
            a.copy_within(0..n - 1, 1);
            a[0] = zero;
        } else {
            a.copy_within(1..n, 0);
            a[n - 1] = zero;
        }
        return;
    }
    let old = a.to_vec();
    let at = |j: isize| {
        if j >= 0 && (j as usize) < n {
            old[j as usize]
        } else {
            zero
        }
    };
    // Departure point x_i - p dx lies between j and j + 1 at fraction s.
    let base = (-p).floor();
    let s = -p - base;
    let w = [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ];
    for (i, slot) in a.iter_mut().enumerate() {
        let j = i as isize + base as isize;
        *slot = w[0] * at(j - 1) + w[1] * at(j) + w[2] * at(j + 1) + w[3] * at(j + 2);
    }
}

/// Cutoff `chi` on the grid: the indicator of `[a, b]` with a two-cell
/// cosine taper inside each end.
pub fn cutoff_weights(grid: &Grid1D, window: (f64, f64)) -> Vec<f64> {
    let (a, b) = window;
    let dx = grid.dx();
    grid.nodes()
        .iter()
        .map(|&x| {
            if x < a || x > b {
                return 0.0;
            }
            let depth = ((x - a).min(b - x) / dx).round();
            if depth >= 2.0 {
                1.0
            } else {
                0.5 * (1.0 - (std::f64::consts::PI * (depth + 1.0) / 3.0).cos())
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTrace {
    pub times: Vec<f64>,
    pub global_norm: Vec<f64>,
    pub local_norm: Vec<f64>,
    pub window: (f64, f64),
    /// Earliest time at which data can reach a grid end.
    pub outflow_time: f64,
}

impl EnergyTrace {
    /// Largest relative change of the global norm before `outflow_time`.
    pub fn norm_drift(&self) -> f64 {
        let Some(&n0) = self.global_norm.first() else {
            return 0.0;
        };
        self.times
            .iter()
            .zip(&self.global_norm)
            .filter(|(t, _)| **t < self.outflow_time)
            .fold(0.0, |m, (_, n)| m.max((n / n0 - 1.0).abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub dx: f64,
    pub field: SpinorField,
}

const SNAPSHOT_MAGIC: &[u8; 8] = b"QNMSNAP1";

impl Snapshot {
    /// 32-byte header (magic, `N` as u64, `dx`, `t`) followed by `N` points of
    /// `(u, v)`, each complex value as `(re, im)`, all little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.field.len();
        let mut out = Vec::with_capacity(32 + 32 * n);
        out.extend_from_slice(SNAPSHOT_MAGIC);
        out.extend_from_slice(&(n as u64).to_le_bytes());
        out.extend_from_slice(&self.dx.to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        for (u, v) in self.field.u.iter().zip(&self.field.v) {
            for x in [u.re, u.im, v.re, v.im] {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |why: &str| QnmError::InvalidInput(format!("snapshot: {why}"));
        if bytes.len() < 32 || &bytes[..8] != SNAPSHOT_MAGIC {
            return Err(bad("missing header"));
        }
        let word = |k: usize| -> [u8; 8] { bytes[k..k + 8].try_into().expect("8-byte slice") };
        let n = u64::from_le_bytes(word(8)) as usize;
        let dx = f64::from_le_bytes(word(16));
        let t = f64::from_le_bytes(word(24));
        if bytes.len() != 32 + 32 * n {
            return Err(bad(&format!(
                "expected {} bytes for {n} points, found {}",
                32 + 32 * n,
                bytes.len()
            )));
        }
        let mut field = SpinorField::zeros(n);
        for i in 0..n {
            let f = |j: usize| f64::from_le_bytes(word(32 + 32 * i + 8 * j));
            field.u[i] = Complex64::new(f(0), f(1));
            field.v[i] = Complex64::new(f(2), f(3));
        }
        Ok(Self { t, dx, field })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSettings {
    /// Time step as a fraction of `dx`; 1 gives the exact shift.
    pub courant: f64,
    /// Steps between trace samples.
    pub output_every: usize,
    /// Steps between snapshots, 0 for none.
    pub snapshot_every: usize,
    /// Point where the field is recorded for ringdown fits.
    pub observer: f64,
}

impl Default for EvolveSettings {
    fn default() -> Self {
        Self {
            courant: 1.0,
            output_every: 10,
            snapshot_every: 0,
            observer: 0.0,
        }
    }
}

/// Field samples on the window points at the trace times.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSeries {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    /// Quadrature weight times `chi^2` at each window point.
    pub weights: Vec<f64>,
    /// `(u, v)` interleaved per window point, one row per time.
    pub fields: Vec<Vec<Complex64>>,
}

impl WindowSeries {
    /// `sqrt(sum_i w_i |psi_i|^2)` for one row of samples.
    pub fn norm_of(&self, row: &[Complex64]) -> f64 {
        row.chunks(2)
            .zip(&self.weights)
            .map(|(p, w)| w * (p[0].norm_sqr() + p[1].norm_sqr()))
            .sum::<f64>()
            .sqrt()
    }

    /// Richardson extrapolation `(4 fine - coarse) / 3` of a second-order
    /// scheme, on the coarse window points and the shared times.
    pub fn richardson(coarse: &Self, fine: &Self) -> Result<Self> {
        let tol = 1e-9;
        let find = |xs: &[f64], x: f64| xs.iter().position(|y| (y - x).abs() < tol);
        let points: Vec<usize> = coarse
            .x
            .iter()
            .map(|&x| find(&fine.x, x))
            .collect::<Option<_>>()
            .ok_or_else(|| QnmError::InvalidInput("window points of the two runs are not nested".into()))?;
        let mut out = Self {
            times: Vec::new(),
            x: coarse.x.clone(),
            weights: coarse.weights.clone(),
            fields: Vec::new(),
        };
        for (k, &t) in coarse.times.iter().enumerate() {
            let Some(j) = find(&fine.times, t) else { continue };
            let row = points
                .iter()
                .enumerate()
                .flat_map(|(c, &f)| {
                    (0..2).map(move |s| (4.0 * fine.fields[j][2 * f + s] - coarse.fields[k][2 * c + s]) / 3.0)
                })
                .collect();
            out.times.push(t);
            out.fields.push(row);
        }
        if out.times.is_empty() {
            return Err(QnmError::InvalidInput("the two runs share no output times".into()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionRun {
    pub trace: EnergyTrace,
    /// `(u, v)` at the observer at each trace time.
    pub observed: Vec<[Complex64; 2]>,
    pub window: WindowSeries,
    pub snapshots: Vec<Snapshot>,
    pub field: SpinorField,
}

/// Evolves `field` to time `t_end` on `grid`, recording norms inside `window`.
pub fn evolve(
    op: &ModeOperator,
    grid: &Grid1D,
    mut field: SpinorField,
    t_end: f64,
    window: (f64, f64),
    settings: &EvolveSettings,
) -> Result<EvolutionRun> {
    if field.len() != grid.points {
        return Err(QnmError::InvalidInput(format!(
            "field has {} points, grid {}",
            field.len(),
            grid.points
        )));
    }
    if !(window.0 < window.1) || window.0 < grid.x_min || window.1 > grid.x_max {
        return Err(QnmError::InvalidInput(format!(
            "window [{}, {}] not inside the grid",
            window.0, window.1
        )));
    }
    if !(grid.x_min..=grid.x_max).contains(&settings.observer) {
        return Err(QnmError::InvalidInput(format!(
            "observer {} outside the grid",
            settings.observer
        )));
    }
    if settings.output_every == 0 {
        return Err(QnmError::InvalidInput("output_every must be positive".into()));
    }
    grid.check_boundaries(op)?;
    let dx = grid.dx();
    let stepper = Stepper::for_operator(op, grid, settings.courant * dx)?;
    let dt = stepper.dt();
    let steps = (t_end / dt).round() as usize;

    let chi = cutoff_weights(grid, window);
    let inside: Vec<usize> = (0..grid.points).filter(|&i| chi[i] > 0.0).collect();
    let observer = ((settings.observer - grid.x_min) / dx).round() as usize;
    let support: Vec<usize> = (0..grid.points)
        .filter(|&i| field.u[i].norm() + field.v[i].norm() > 0.0)
        .collect();
    let outflow_time = match (support.first(), support.last()) {
        (Some(&lo), Some(&hi)) => (grid.x(lo) - grid.x_min).min(grid.x_max - grid.x(hi)),
        _ => f64::INFINITY,
    };

    let mut trace = EnergyTrace {
        times: Vec::new(),
        global_norm: Vec::new(),
        local_norm: Vec::new(),
        window,
        outflow_time,
    };
    let mut observed = Vec::new();
    let mut series = WindowSeries {
        times: Vec::new(),
        x: inside.iter().map(|&i| grid.x(i)).collect(),
        weights: inside.iter().map(|&i| dx * chi[i] * chi[i]).collect(),
        fields: Vec::new(),
    };
    let mut snapshots = Vec::new();
    let mut record = |field: &SpinorField, step: usize| -> Result<()> {
        let t = step as f64 * dt;
        if let Some(cell) = field.first_non_finite() {
            return Err(QnmError::NonFinite { t, cell });
        }
        let local: f64 = inside
            .iter()
            .map(|&i| chi[i] * chi[i] * (field.u[i].norm_sqr() + field.v[i].norm_sqr()))
            .sum();
        trace.times.push(t);
        trace.global_norm.push(field.norm(dx));
        trace.local_norm.push((dx * local).sqrt());
        observed.push([field.u[observer], field.v[observer]]);
        series.times.push(t);
        series
            .fields
            .push(inside.iter().flat_map(|&i| [field.u[i], field.v[i]]).collect());
        Ok(())
    };

    for step in 0..=steps {
        if step > 0 {
            stepper.step(&mut field);
        }
        if step % settings.output_every == 0 {
            record(&field, step)?;
        }
        if settings.snapshot_every > 0 && step % settings.snapshot_every == 0 {
            snapshots.push(Snapshot {
                t: step as f64 * dt,
                dx,
                field: field.clone(),
            });
        }
    }
    Ok(EvolutionRun {
        trace,
        observed,
        window: series,
        snapshots,
        field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::barrier::AngularMode;
    use crate::solver::OperatorKind;
    use crate::spacetime::{BlackHoleParams, PotentialProfile};
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dirac(n_two_l: u32) -> ModeOperator {
        let p = Arc::new(PotentialProfile::new(BlackHoleParams::new(1.0, 0.5, 0.05).unwrap()).unwrap());
        ModeOperator::new(OperatorKind::DiracMinus, AngularMode::new(n_two_l).unwrap(), p)
    }

    #[test]
    fn bump_is_normalised_and_compact() {
        let g = Grid1D::new(-10.0, 10.0, 2001).unwrap();
        for width in [2.0, 0.5, 0.05] {
            let f = init_bump(&g, 1.0, width, [c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
            assert!((f.norm(g.dx()) - 1.0).abs() < 1e-12);
            for i in 0..g.points {
                if (g.x(i) - 1.0).abs() >= width {
                    assert_eq!(f.u[i], c(0.0, 0.0));
                    assert_eq!(f.v[i], c(0.0, 0.0));
                }
            }
        }
        assert!(init_bump(&g, 9.5, 1.0, [c(1.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn free_transport_is_exact() {
        let g = Grid1D::new(-20.0, 20.0, 4001).unwrap();
        let f0 = init_bump(&g, 0.0, 2.0, [c(1.0, 0.0), c(0.5, 0.5)]).unwrap();
        let bump = |x: f64| {
            let s = x / 2.0;
            if s.abs() < 1.0 {
                (0.5 * std::f64::consts::PI * s).cos().powi(2)
            } else {
                0.0
            }
        };
        let scale = f0.u[2000].norm();
        // The exact shift is exact; cubic interpolation loses accuracy at the
        // kinks of the bump's second derivative.
        for (courant, tol) in [(1.0, 1e-12), (0.5, 2e-4)] {
            let s = Stepper::new(&g, &vec![0.0; g.points], courant * g.dx()).unwrap();
            let mut f = f0.clone();
            let steps = (5.0 / s.dt()).round() as usize;
            for _ in 0..steps {
                s.step(&mut f);
            }
            let t = steps as f64 * s.dt();
            let mut err: f64 = 0.0;
            for i in 0..g.points {
                let x = g.x(i);
                err = err.max((f.u[i] - scale * bump(x - t)).norm());
                err = err.max((f.v[i] - c(0.5, 0.5) * scale * bump(x + t)).norm());
            }
            assert!(err < tol, "courant {courant}: {err}");
        }
    }

    #[test]
    fn step_then_reverse_is_identity() {
        let op = dirac(19);
        let g = Grid1D::new(-30.0, 30.0, 1201).unwrap();
        let f0 = init_bump(&g, 0.5, 3.0, [c(1.0, 0.2), c(-0.3, 1.0)]).unwrap();
        let fwd = Stepper::for_operator(&op, &g, g.dx()).unwrap();
        let back = Stepper::for_operator(&op, &g, -g.dx()).unwrap();
        let mut f = f0.clone();
        for _ in 0..50 {
            fwd.step(&mut f);
        }
        for _ in 0..50 {
            back.step(&mut f);
        }
        let err =
            f.u.iter()
                .zip(&f0.u)
                .chain(f.v.iter().zip(&f0.v))
                .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let g = Grid1D::new(-1.0, 1.0, 21).unwrap();
        let err = Stepper::new(&g, &[0.0; 21], 0.2).unwrap_err();
        assert!(matches!(err, QnmError::Cfl { .. }));
    }

    #[test]
    fn constant_coupling_reproduces_dispersion_relation() {
        // One-step amplification of exp(i xi x) spinors: eigenvalues exp(-+ i lambda dt)
        // with lambda^2 = xi^2 + q^2 up to O(dt^2).
        let dx = 1e-3;
        let g = Grid1D::new(0.0, 2.0, 2001).unwrap();
        let (xi, q) = (1.3, 0.8);
        let s = Stepper::new(&g, &vec![q; g.points], dx).unwrap();
        let probe = 1000;
        let mut cols = [[c(0.0, 0.0); 2]; 2];
        for (j, col) in cols.iter_mut().enumerate() {
            let mut f = SpinorField::zeros(g.points);
            for i in 0..g.points {
                let w = (Complex64::i() * xi * g.x(i)).exp();
                if j == 0 {
                    f.u[i] = w;
                } else {
                    f.v[i] = w;
                }
            }
            s.step(&mut f);
            let w = (Complex64::i() * xi * g.x(probe)).exp();
            *col = [f.u[probe] / w, f.v[probe] / w];
        }
        let tr = cols[0][0] + cols[1][1];
        let det = cols[0][0] * cols[1][1] - cols[1][0] * cols[0][1];
        let disc = (tr * tr - 4.0 * det).sqrt();
        let exact = (xi * xi + q * q).sqrt();
        for mu in [(tr + disc) / 2.0, (tr - disc) / 2.0] {
            let lambda = (Complex64::i() * mu.ln() / dx).re.abs();
            assert!((lambda - exact).abs() < 1e-6, "{lambda} vs {exact}");
        }
    }

    #[test]
    fn splitting_is_second_order() {
        let op = dirac(19);
        let t = 4.0;
        let run = |points: usize| {
            let g = Grid1D::new(-20.0, 20.0, points).unwrap();
            let s = Stepper::for_operator(&op, &g, g.dx()).unwrap();
            let mut f = init_bump(&g, 0.0, 3.0, [c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
            for _ in 0..(t / g.dx()).round() as usize {
                s.step(&mut f);
            }
            (g, f)
        };
        let (gr, reference) = run(6401);
        let error = |points: usize| {
            let (g, f) = run(points);
            let stride = (gr.points - 1) / (g.points - 1);
            (0..g.points)
                .map(|i| (f.u[i] - reference.u[i * stride]).norm() + (f.v[i] - reference.v[i * stride]).norm())
                .fold(0.0f64, f64::max)
        };
        let (e1, e2) = (error(401), error(801));
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "{e1} {e2} {ratio}");
    }

    #[test]
    fn evolution_conserves_norm_before_outflow() {
        let op = dirac(19);
        let g = Grid1D::covering(&op, 0.05, 5.0).unwrap();
        g.check_boundaries(&op).unwrap();
        let f = init_bump(&g, 0.0, 2.0, [c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let run = evolve(&op, &g, f, 60.0, (-5.0, 5.0), &EvolveSettings::default()).unwrap();
        assert!(run.trace.outflow_time > 60.0);
        assert!(run.trace.norm_drift() < 1e-12, "{}", run.trace.norm_drift());
        assert!(run.trace.local_norm.last().unwrap() < &run.trace.local_norm[0]);
    }

    #[test]
    fn snapshot_round_trip() {
        let mut field = SpinorField::zeros(3);
        field.u[1] = c(1.0, -2.0);
        field.v[2] = c(0.25, 3.5);
        let snap = Snapshot { t: 1.5, dx: 0.1, field };
        let bytes = snap.to_bytes();
        assert_eq!(&bytes[..8], b"QNMSNAP1");
        assert_eq!(bytes.len(), 32 + 3 * 32);
        assert_eq!(Snapshot::from_bytes(&bytes).unwrap(), snap);
        assert!(Snapshot::from_bytes(&bytes[..40]).is_err());
    }
}
