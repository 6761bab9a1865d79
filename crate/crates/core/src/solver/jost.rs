//! Jost solutions and their Wronskian.
//!
//! `f_+ ~ e^{i lambda x}` at `+inf` and `f_- ~ e^{-i lambda x}` at `-inf` are
//! integrated in factored form (`f_+ = e^{i lambda x} g`, `f_- = e^{-i lambda x} h`)
//! inward from the tails. Beyond `|x| = R0` the path leaves the real axis along
//! a ray rotated by `theta` towards the side where `e^{+-i lambda x}` decays,
//! which continues the solutions well below the real axis. The tail is started
//! from a two-term Born expansion where the coupling has dropped below
//! `tail_coupling`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::ModeOperator;
use crate::error::{QnmError, Result};
use crate::ode::{integrate, OdeError, Scheme, Tolerance};
use crate::spacetime::{ComplexPoint, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JostSettings {
    /// Half-width of the real segment kept undeformed.
    pub r0: f64,
    /// Rotation of the tail rays.
    pub theta: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Coupling `n |alpha|` at which the tail expansion is used.
    pub tail_coupling: f64,
    /// Longest admitted tail ray.
    pub max_tail: f64,
    /// Fraction of the convergence strip `|kappa| cos(theta) / 2` admitted
    /// below the rotated real axis.
    pub strip_safety: f64,
}

impl Default for JostSettings {
    fn default() -> Self {
        Self {
            r0: 10.0,
            theta: 0.5,
            rtol: 1e-12,
            atol: 1e-14,
            tail_coupling: 1e-6,
            max_tail: 5000.0,
            strip_safety: 0.8,
        }
    }
}

/// Tail ray for one side: `x = +-R0 + t direction`, `0 <= t <= length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub direction: Complex64,
    pub length: f64,
}

impl JostSettings {
    pub fn tolerance(&self) -> Tolerance {
        Tolerance::new(self.rtol, self.atol)
    }

    /// Signed rotation used for `lambda`: at least `theta`, opened further
    /// (up to `MAX_ROTATION`) for points deeper than `theta` below the axis.
    pub fn rotation(&self, lambda: Complex64) -> f64 {
        if lambda.re == 0.0 {
            return 0.0;
        }
        let depth = (-lambda.im).atan2(lambda.re.abs());
        let theta = self.theta.max((depth + ROTATION_MARGIN).min(MAX_ROTATION));
        theta.copysign(lambda.re)
    }

    /// Decay rate `Im(lambda e^{i theta})` of the free solutions along the rays.
    pub fn ray_rate(&self, lambda: Complex64) -> f64 {
        (lambda * Complex64::from_polar(1.0, self.rotation(lambda))).im
    }

    /// Lowest admitted ray rate at `lambda`.
    pub fn rate_floor(&self, op: &ModeOperator, lambda: Complex64) -> f64 {
        let cos = self.rotation(lambda).cos();
        let asym = op.profile().asymptotics();
        let kappa = asym.rate(Side::Minus).abs().min(asym.rate(Side::Plus).abs());
        -0.5 * self.strip_safety * kappa * cos
    }

    /// Whether `lambda` lies in the region where the continued Jost
    /// solutions are computed reliably.
    pub fn admits(&self, op: &ModeOperator, lambda: Complex64) -> bool {
        lambda.re.is_finite() && lambda.im.is_finite() && self.ray_rate(lambda) > self.rate_floor(op, lambda)
    }

    pub fn ray(&self, op: &ModeOperator, lambda: Complex64, side: Side) -> Result<Ray> {
        if !self.admits(op, lambda) {
            return Err(QnmError::OutsideValidity {
                lambda,
                reason: format!(
                    "ray rate {:.3e} below the admitted floor for rotation {}",
                    self.ray_rate(lambda),
                    self.theta
                ),
            });
        }
        let theta = self.rotation(lambda);
        let outward = -side.sign();
        let direction = Complex64::from_polar(outward, theta);
        let anchor = outward * self.r0;
        let kappa = op.profile().asymptotics().rate(side).abs();
        let coupling = op.n().abs() * op.profile().alpha(anchor);
        let length = if coupling > self.tail_coupling {
            (coupling / self.tail_coupling).ln() / (kappa * theta.cos())
        } else {
            0.0
        };
        if length > self.max_tail {
            return Err(QnmError::OutsideValidity {
                lambda,
                reason: format!("tail length {length} exceeds {}", self.max_tail),
            });
        }
        Ok(Ray { direction, length })
    }
}

/// Jost solution sampled at real points.
#[derive(Debug, Clone, PartialEq)]
pub struct JostSolution {
    pub lambda: Complex64,
    pub side: Side,
    pub xs: Vec<f64>,
    /// Factored state: `(g1, g2)` for Dirac kinds, `(g, g')` for Schrodinger kinds.
    pub factored: Vec<[Complex64; 2]>,
    /// `(u, v)` for Dirac kinds, `(f, f')` for Schrodinger kinds.
    pub values: Vec<[Complex64; 2]>,
}

type State = [Complex64; 3];

const ROTATION_MARGIN: f64 = 0.2;
const MAX_ROTATION: f64 = 1.4;

fn rhs(op: &ModeOperator, lambda: Complex64, side: Side, dxdt: Complex64, y: &State) -> Result<State> {
    let local = op.profile().local_data(side, y[2])?;
    let i = Complex64::i();
    let (a, b) = if op.kind().is_dirac() {
        let q = op.coupling(&local);
        match side {
            Side::Plus => (-i * q * y[1], -2.0 * i * lambda * y[1] + i * q * y[0]),
            Side::Minus => (2.0 * i * lambda * y[0] - i * q * y[1], i * q * y[0]),
        }
    } else {
        let v = op.potential(&local);
        match side {
            Side::Plus => (y[1], -2.0 * i * lambda * y[1] + v * y[0]),
            Side::Minus => (y[1], 2.0 * i * lambda * y[1] + v * y[0]),
        }
    };
    Ok([a * dxdt, b * dxdt, local.gap_rate * dxdt])
}

fn tail_state(op: &ModeOperator, lambda: Complex64, side: Side, log_gap: Complex64) -> Result<State> {
    let local = op.profile().local_data(side, log_gap)?;
    let kappa = op.profile().asymptotics().rate(side);
    let i = Complex64::i();
    // Outgoing phase `e^{+-i lambda x}` enters the exponents as `+-2 i lambda`.
    let phase = match side {
        Side::Plus => 2.0 * i * lambda,
        Side::Minus => -2.0 * i * lambda,
    };
    let state = if op.kind().is_dirac() {
        let q = op.coupling(&local);
        let lead = q * q / (2.0 * kappa * (kappa + phase));
        match side {
            Side::Plus => [1.0 + lead, i * q / (kappa + phase), log_gap],
            Side::Minus => [-i * q / (kappa + phase), 1.0 + lead, log_gap],
        }
    } else {
        let v1 = op.kind().sign() * op.n() * local.alpha_prime;
        let v2 = op.n() * op.n() * local.alpha * local.alpha;
        let a1 = v1 / (kappa * (kappa + phase));
        let a2 = (v2 + v1 * a1) / (2.0 * kappa * (2.0 * kappa + phase));
        [1.0 + a1 + a2, kappa * a1 + 2.0 * kappa * a2, log_gap]
    };
    Ok(state)
}

fn propagation_error(e: QnmError, x_of: impl Fn(f64) -> Complex64) -> QnmError {
    match e {
        QnmError::Ode(source) => {
            let t = match source {
                OdeError::StepBudget { t, .. } | OdeError::StepUnderflow { t } | OdeError::NonFinite { t } => t,
            };
            QnmError::Propagation { x: x_of(t), source }
        }
        other => other,
    }
}

/// Integrates the Jost solution on `side` and samples it at `xs`, which must
/// lie in `[-R0, R0]`.
pub fn jost_solution(
    op: &ModeOperator,
    settings: &JostSettings,
    lambda: Complex64,
    side: Side,
    xs: &[f64],
) -> Result<JostSolution> {
    let r0 = settings.r0;
    if let Some(bad) = xs.iter().find(|x| !(x.abs() <= r0)) {
        return Err(QnmError::InvalidInput(format!(
            "sample point {bad} outside the undeformed segment [-{r0}, {r0}]"
        )));
    }
    let ray = settings.ray(op, lambda, side)?;
    let tol = settings.tolerance();
    let profile = op.profile();
    let outward = -side.sign();
    let anchor_x = outward * r0;
    let anchor = ComplexPoint::real(profile, anchor_x);
    if anchor.side != side {
        return Err(QnmError::InvalidInput(format!(
            "R0 = {r0} does not clear the barrier at x = {}",
            profile.map().barrier_x()
        )));
    }

    let mut y: State = if ray.length > 0.0 {
        let far_x = anchor.x + ray.direction * ray.length;
        let far = anchor.continue_to(profile, far_x)?;
        let start = tail_state(op, lambda, side, far.log_gap)?;
        let dir = ray.direction;
        let traj = integrate::<3, QnmError, _>(
            Scheme::Dop853,
            |_, y| rhs(op, lambda, side, dir, y),
            ray.length,
            start,
            0.0,
            &[],
            &tol,
        )
        .map_err(|e| propagation_error(e, |t| anchor.x + dir * t))?;
        traj.end
    } else {
        tail_state(op, lambda, side, anchor.log_gap)?
    };
    // The ray ends on the real axis, where the gap variable is real.
    y[2].im = 0.0;

    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| (xs[b] * outward).total_cmp(&(xs[a] * outward)));
    let sorted: Vec<f64> = order.iter().map(|&k| xs[k]).collect();
    let stop = sorted.last().copied().unwrap_or(anchor_x);
    let traj = integrate::<3, QnmError, _>(
        Scheme::Dop853,
        |_, y| rhs(op, lambda, side, Complex64::new(1.0, 0.0), y),
        anchor_x,
        y,
        stop,
        &sorted,
        &tol,
    )
    .map_err(|e| propagation_error(e, |t| Complex64::new(t, 0.0)))?;

    let i = Complex64::i();
    let mut factored = vec![[Complex64::new(0.0, 0.0); 2]; xs.len()];
    let mut values = factored.clone();
    for (slot, state) in order.iter().zip(&traj.outputs) {
        let x = xs[*slot];
        let (phase, shift) = match side {
            Side::Plus => ((i * lambda * x).exp(), i * lambda),
            Side::Minus => ((-i * lambda * x).exp(), -i * lambda),
        };
        factored[*slot] = [state[0], state[1]];
        values[*slot] = if op.kind().is_dirac() {
            [phase * state[0], phase * state[1]]
        } else {
            [phase * state[0], phase * (state[1] + shift * state[0])]
        };
    }
    Ok(JostSolution {
        lambda,
        side,
        xs: xs.to_vec(),
        factored,
        values,
    })
}

/// Wronskian of the factored Jost pair at one point.
pub fn wronskian_from_factored(
    op: &ModeOperator,
    lambda: Complex64,
    right: [Complex64; 2],
    left: [Complex64; 2],
) -> Complex64 {
    if op.kind().is_dirac() {
        right[0] * left[1] - right[1] * left[0]
    } else {
        right[0] * left[1] - right[1] * left[0] - 2.0 * Complex64::i() * lambda * right[0] * left[0]
    }
}

/// `W(lambda)` evaluated at `x`.
pub fn wronskian_at(op: &ModeOperator, settings: &JostSettings, lambda: Complex64, x: f64) -> Result<Complex64> {
    let right = jost_solution(op, settings, lambda, Side::Plus, &[x])?;
    let left = jost_solution(op, settings, lambda, Side::Minus, &[x])?;
    Ok(wronskian_from_factored(op, lambda, right.factored[0], left.factored[0]))
}

/// `W(lambda)`: `det[f_+, f_-]` for Dirac kinds and `f_+ f_-' - f_+' f_-` for
/// Schrodinger kinds, evaluated at the barrier.
pub fn wronskian(op: &ModeOperator, settings: &JostSettings, lambda: Complex64) -> Result<Complex64> {
    let x = op.profile().map().barrier_x().clamp(-settings.r0, settings.r0);
    wronskian_at(op, settings, lambda, x)
}
