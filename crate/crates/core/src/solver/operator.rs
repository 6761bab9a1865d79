use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::barrier::AngularMode;
use crate::error::{QnmError, Result};
use crate::spacetime::{LocalData, PotentialProfile};

/// The four per-mode operators.
///
/// `DiracMinus` is `sigma3 D_x - n alpha sigma1` and `DiracPlus` the same with
/// `+ n alpha`; `SchrodingerMinus` and `SchrodingerPlus` are
/// `-d^2/dx^2 + n^2 alpha^2 -+ n alpha'`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    DiracMinus,
    DiracPlus,
    SchrodingerMinus,
    SchrodingerPlus,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 4] = [
        OperatorKind::DiracMinus,
        OperatorKind::DiracPlus,
        OperatorKind::SchrodingerMinus,
        OperatorKind::SchrodingerPlus,
    ];

    pub fn is_dirac(self) -> bool {
        matches!(self, OperatorKind::DiracMinus | OperatorKind::DiracPlus)
    }

    /// Sign `c` of the coupling `c n alpha` (Dirac) or of the `c n alpha'`
    /// term (Schrodinger).
    pub fn sign(self) -> f64 {
        match self {
            OperatorKind::DiracMinus | OperatorKind::SchrodingerMinus => -1.0,
            OperatorKind::DiracPlus | OperatorKind::SchrodingerPlus => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::DiracMinus => "dirac-minus",
            OperatorKind::DiracPlus => "dirac-plus",
            OperatorKind::SchrodingerMinus => "schrodinger-minus",
            OperatorKind::SchrodingerPlus => "schrodinger-plus",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for OperatorKind {
    type Err = QnmError;
    fn from_str(s: &str) -> Result<Self> {
        OperatorKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            QnmError::InvalidInput(format!(
                "unknown operator kind '{s}' (expected dirac-minus, dirac-plus, schrodinger-minus or schrodinger-plus)"
            ))
        })
    }
}

/// One angular mode of one operator kind over a shared potential profile.
#[derive(Debug, Clone)]
pub struct ModeOperator {
    kind: OperatorKind,
    n: f64,
    mode: Option<AngularMode>,
    profile: Arc<PotentialProfile>,
}

impl ModeOperator {
    pub fn new(kind: OperatorKind, mode: AngularMode, profile: Arc<PotentialProfile>) -> Self {
        Self {
            kind,
            n: mode.n_f64(),
            mode: Some(mode),
            profile,
        }
    }

    /// Operator with an arbitrary coupling strength `n`, e.g. `n = 0` for the
    /// free system.
    pub fn with_coupling(kind: OperatorKind, n: f64, profile: Arc<PotentialProfile>) -> Self {
        Self {
            kind,
            n,
            mode: None,
            profile,
        }
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn mode(&self) -> Option<AngularMode> {
        self.mode
    }

    pub fn profile(&self) -> &PotentialProfile {
        &self.profile
    }

    pub fn profile_arc(&self) -> &Arc<PotentialProfile> {
        &self.profile
    }

    pub fn with_kind(&self, kind: OperatorKind) -> Self {
        Self { kind, ..self.clone() }
    }

    /// Dirac coupling `q = c n alpha`.
    pub fn coupling(&self, local: &LocalData) -> Complex64 {
        self.kind.sign() * self.n * local.alpha
    }

    /// Schrodinger potential `n^2 alpha^2 + c n alpha'`.
    pub fn potential(&self, local: &LocalData) -> Complex64 {
        self.n * self.n * local.alpha * local.alpha + self.kind.sign() * self.n * local.alpha_prime
    }

    /// Coupling or potential on the real line, for grids.
    pub fn real_coefficient(&self, x: f64) -> f64 {
        let p = self.profile.map().point(x);
        let a = self.profile.alpha_at(&p);
        if self.kind.is_dirac() {
            self.kind.sign() * self.n * a
        } else {
            self.n * self.n * a * a + self.kind.sign() * self.n * self.profile.alpha_prime_at(&p)
        }
    }
}
