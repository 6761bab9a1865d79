use num_complex::Complex64;

use super::{PotentialProfile, Side};
use crate::error::{QnmError, Result};
use crate::ode::{integrate, Scheme, Tolerance};

/// A point of the complexified tortoise line, represented by its gap
/// variable `s` relative to the horizon on `side` (`r = r_h + sigma e^s`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPoint {
    pub x: Complex64,
    pub side: Side,
    pub log_gap: Complex64,
}

impl ComplexPoint {
    /// Real exterior point as a starting anchor.
    pub fn real(profile: &PotentialProfile, x: f64) -> Self {
        let p = profile.map().point(x);
        Self {
            x: Complex64::new(x, 0.0),
            side: p.side,
            log_gap: Complex64::new(p.log_gap, 0.0),
        }
    }

    pub fn radius(&self, profile: &PotentialProfile) -> Complex64 {
        profile.radius_from_gap(self.side, self.log_gap)
    }

    /// Flows the gap variable along the straight segment to `w`.
    pub fn continue_to(&self, profile: &PotentialProfile, w: Complex64) -> Result<Self> {
        let dir = w - self.x;
        if dir.norm() == 0.0 {
            return Ok(*self);
        }
        let side = self.side;
        let tol = Tolerance::new(1e-12, 1e-14);
        let traj = integrate::<1, QnmError, _>(
            Scheme::Dopri5,
            |_, y| Ok([profile.gap_rate(side, y[0])? * dir]),
            0.0,
            [self.log_gap],
            1.0,
            &[],
            &tol,
        )?;
        Ok(Self {
            x: w,
            side,
            log_gap: traj.end[0],
        })
    }
}

/// Continues the radius from the real anchor `anchor_x` to the complex
/// tortoise point `w` along the straight segment between them.
pub fn complex_radius(profile: &PotentialProfile, anchor_x: f64, w: Complex64) -> Result<ComplexPoint> {
    ComplexPoint::real(profile, anchor_x).continue_to(profile, w)
}
