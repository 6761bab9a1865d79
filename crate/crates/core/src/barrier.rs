//! Barrier-top data at the potential maximum and the pseudopole lattice
//! `(l + 1/2) (z0 + f1/(l + 1/2) + f2/(l + 1/2)^2)` built from it.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QnmError, Result};
use crate::spacetime::PotentialProfile;

/// Angular momentum `l = two_l / 2` with `two_l` odd, stored exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AngularMode {
    two_l: u32,
}

impl AngularMode {
    pub fn new(two_l: u32) -> Result<Self> {
        if two_l.is_multiple_of(2) {
            return Err(QnmError::InvalidInput(format!(
                "two_l = {two_l} must be odd (l is a positive half-integer)"
            )));
        }
        Ok(Self { two_l })
    }

    /// Mode with `l + 1/2 = n`.
    pub fn from_n(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(QnmError::InvalidInput("n = l + 1/2 must be positive".into()));
        }
        Self::new(2 * n - 1)
    }

    pub fn two_l(self) -> u32 {
        self.two_l
    }

    /// `n = l + 1/2`, an integer.
    pub fn n(self) -> u32 {
        self.two_l.div_ceil(2)
    }

    pub fn n_f64(self) -> f64 {
        self.n() as f64
    }

    /// Multiplicity `2l - 1` attached to each lattice point.
    pub fn stated_multiplicity(self) -> u32 {
        self.two_l.saturating_sub(1)
    }

    /// Degeneracy `2l + 1` of the spinor harmonics of degree `l`.
    pub fn harmonic_degeneracy(self) -> u32 {
        self.two_l + 1
    }
}

impl fmt::Display for AngularMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2", self.two_l)
    }
}

/// Potential data at the barrier maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierData {
    pub r0: f64,
    pub x0: f64,
    /// `V0` and its first four tortoise derivatives at `x0`.
    pub derivatives: [f64; 5],
    /// `z0 = sqrt(V0(x0)) = alpha(x0)`.
    pub z0: f64,
    /// `omega = sqrt(|V0''(x0)|/2)`.
    pub omega: f64,
    /// Closed-form `V0(x0)` and `V0''(x0)`.
    pub closed_form: [f64; 2],
}

impl BarrierData {
    pub fn v0(&self) -> f64 {
        self.derivatives[0]
    }

    /// Unit of damping on the lattice, `omega / z0`.
    pub fn damping_unit(&self) -> f64 {
        self.omega / self.z0
    }

    /// Largest relative disagreement between closed forms and chain rule.
    pub fn closed_form_mismatch(&self) -> f64 {
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        rel(self.closed_form[0], self.derivatives[0]).max(rel(self.closed_form[1], self.derivatives[2]))
    }
}

pub fn barrier_data(profile: &PotentialProfile) -> Result<BarrierData> {
    let map = profile.map();
    let r0 = map.barrier_radius();
    let point = map.point_from_radius(r0)?;
    let mut derivatives = [0.0; 5];
    for (k, d) in derivatives.iter_mut().enumerate() {
        *d = profile.derivative_at(&point, k)?;
    }
    let p = profile.params();
    let q2 = p.charge * p.charge;
    let v0_closed = (p.mass * r0 - q2 - p.lambda / 3.0 * r0.powi(4)) / r0.powi(4);
    let v0pp_closed = -2.0 * (3.0 * p.mass / r0 - 4.0 * q2 / (r0 * r0)) * v0_closed * v0_closed;
    if !(derivatives[0] > 0.0 && derivatives[2] < 0.0) {
        return Err(QnmError::Inadmissible(
            "potential maximum is not a non-degenerate positive maximum".into(),
        ));
    }
    Ok(BarrierData {
        r0,
        x0: point.x,
        derivatives,
        z0: derivatives[0].sqrt(),
        omega: (0.5 * derivatives[2].abs()).sqrt(),
        closed_form: [v0_closed, v0pp_closed],
    })
}

/// Which expression is used for the second-order lattice coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondOrderClosure {
    /// `f2 = -(i omega/(2 z0)) N [-omega N/(4 i z0^2) + b02 N/(2i) + b12]`
    /// with the closed-form `b02`, `b12` taken literally.
    Literal,
    /// Second-order barrier-top quantisation of `lambda^2`, including the
    /// anharmonic terms and the `alpha'` shift, followed by the square root.
    BarrierTop,
}

impl fmt::Display for SecondOrderClosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SecondOrderClosure::Literal => "literal",
            SecondOrderClosure::BarrierTop => "barrier-top",
        })
    }
}

impl std::str::FromStr for SecondOrderClosure {
    type Err = QnmError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(Self::Literal),
            "barrier-top" => Ok(Self::BarrierTop),
            other => Err(QnmError::InvalidInput(format!(
                "unknown closure '{other}' (expected literal or barrier-top)"
            ))),
        }
    }
}

/// Lattice coefficients; `N = 2k + 1` is the argument of `f1`, `f2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudopoleCoeffs {
    pub z0: f64,
    pub omega: f64,
    pub b02: f64,
    pub b12: f64,
    pub v3: f64,
    pub v4: f64,
    pub closure: SecondOrderClosure,
}

impl PseudopoleCoeffs {
    pub fn new(data: &BarrierData, closure: SecondOrderClosure) -> Self {
        let w = data.omega;
        let z0 = data.z0;
        let v3 = data.derivatives[3];
        let v4 = data.derivatives[4];
        let b02 = 15.0 / (4.0 * 144.0) * v3 * v3 / w.powi(5) + v4 / (32.0 * w.powi(3));
        let b12 = 1.0 / (8.0 * z0.powi(3)) - 3.0 / (8.0 * z0 * w * w) * v3;
        Self {
            z0,
            omega: w,
            b02,
            b12,
            v3,
            v4,
            closure,
        }
    }

    pub fn with_closure(self, closure: SecondOrderClosure) -> Self {
        Self { closure, ..self }
    }

    pub fn f1(&self, big_n: f64) -> Complex64 {
        Complex64::new(0.0, -self.omega / (2.0 * self.z0) * big_n)
    }

    pub fn f2(&self, big_n: f64) -> Complex64 {
        let (w, z0) = (self.omega, self.z0);
        let i = Complex64::i();
        match self.closure {
            SecondOrderClosure::Literal => {
                let bracket = -w * big_n / (4.0 * i * z0 * z0) + self.b02 * big_n / (2.0 * i) + self.b12;
                -i * w / (2.0 * z0) * big_n * bracket
            }
            SecondOrderClosure::BarrierTop => {
                let n2 = big_n * big_n;
                let e2 = -self.v4 / (64.0 * w * w) * (n2 + 1.0)
                    - self.v3 * self.v3 / (1152.0 * w.powi(4)) * (15.0 * n2 + 7.0)
                    + w * w / (4.0 * z0 * z0);
                Complex64::new(e2 / (2.0 * z0) + w * w * n2 / (8.0 * z0.powi(3)), 0.0)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pseudopole {
    pub k: u32,
    pub mode: AngularMode,
    pub order: u8,
    pub value: Complex64,
    pub mirror: bool,
    pub multiplicity: u32,
}

impl Pseudopole {
    pub fn mirrored(&self) -> Self {
        Self {
            value: -self.value.conj(),
            mirror: !self.mirror,
            ..*self
        }
    }
}

pub fn pseudopole(coeffs: &PseudopoleCoeffs, k: u32, mode: AngularMode, order: u8) -> Result<Pseudopole> {
    if order > 2 {
        return Err(QnmError::InvalidInput(format!("truncation order {order} exceeds 2")));
    }
    let n = mode.n_f64();
    let big_n = (2 * k + 1) as f64;
    let mut value = Complex64::new(n * coeffs.z0, 0.0);
    if order >= 1 {
        value += coeffs.f1(big_n);
    }
    if order >= 2 {
        value += coeffs.f2(big_n) / n;
    }
    Ok(Pseudopole {
        k,
        mode,
        order,
        value,
        mirror: false,
        multiplicity: mode.stated_multiplicity(),
    })
}

/// All pseudopoles of the given ranges together with their mirror images,
/// sorted by real part.
pub fn lattice(coeffs: &PseudopoleCoeffs, modes: &[AngularMode], ks: &[u32], order: u8) -> Result<Vec<Pseudopole>> {
    let mut out = Vec::with_capacity(2 * modes.len() * ks.len());
    for &mode in modes {
        for &k in ks {
            let p = pseudopole(coeffs, k, mode, order)?;
            out.push(p);
            out.push(p.mirrored());
        }
    }
    out.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
            .then(a.mode.cmp(&b.mode))
            .then(a.k.cmp(&b.k))
    });
    Ok(out)
}
