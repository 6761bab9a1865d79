use num_complex::Complex64;

use super::{metric_derivative, metric_derivative_complex, BlackHoleParams, ExteriorPoint, Laurent, Side, TortoiseMap};
use crate::error::{QnmError, Result};

/// Limits `alpha(x) e^{-kappa x} -> alpha_pm` at the two ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticData {
    pub alpha_minus: f64,
    pub kappa_minus: f64,
    pub alpha_plus: f64,
    pub kappa_plus: f64,
}

impl AsymptoticData {
    pub fn amplitude(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.alpha_minus,
            Side::Plus => self.alpha_plus,
        }
    }

    pub fn rate(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.kappa_minus,
            Side::Plus => self.kappa_plus,
        }
    }
}

/// Potential data at one point of a complex contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalData {
    pub alpha: Complex64,
    pub alpha_prime: Complex64,
    /// `ds/dx` of the gap variable.
    pub gap_rate: Complex64,
}

/// `alpha(x) = sqrt(F)/r`, `V0 = alpha^2` and derivatives in the tortoise
/// coordinate, on the real line and continued into the complex plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialProfile {
    map: TortoiseMap,
    /// `d/dr` of the Laurent form of `d^(k-1) V0 / dx^(k-1)` for `k = 1..=4`;
    /// the `k`-th derivative is `F` times entry `k - 1`.
    chain: Vec<Laurent>,
    asymptotics: AsymptoticData,
}

/// Smallest admitted distance from a complex radius to a singular point of
/// the radial flow, relative to the exterior width.
const PINCH_FRACTION: f64 = 1e-4;

impl PotentialProfile {
    pub fn new(params: BlackHoleParams) -> Result<Self> {
        Ok(Self::from_map(TortoiseMap::new(params)?))
    }

    pub fn from_map(map: TortoiseMap) -> Self {
        let f = map.params().metric_laurent();
        let mut level = f.shift(-2);
        let mut chain = Vec::with_capacity(4);
        for _ in 0..4 {
            let d = level.derivative();
            level = f.mul(&d);
            chain.push(d);
        }
        let asym = |side: Side| {
            let kappa = map.kappa(side);
            let rh = map.horizon_radius(side);
            (
                (2.0 * kappa.abs()).sqrt() / rh * (-kappa * map.horizon_constant(side)).exp(),
                kappa,
            )
        };
        let (alpha_minus, kappa_minus) = asym(Side::Minus);
        let (alpha_plus, kappa_plus) = asym(Side::Plus);
        Self {
            map,
            chain,
            asymptotics: AsymptoticData {
                alpha_minus,
                kappa_minus,
                alpha_plus,
                kappa_plus,
            },
        }
    }

    pub fn map(&self) -> &TortoiseMap {
        &self.map
    }

    pub fn params(&self) -> &BlackHoleParams {
        self.map.params()
    }

    pub fn asymptotics(&self) -> AsymptoticData {
        self.asymptotics
    }

    /// Laurent form in `r` of `d^k V0/dx^k`.
    pub fn derivative_laurent(&self, order: usize) -> Result<Laurent> {
        let f = self.params().metric_laurent();
        match order {
            0 => Ok(f.shift(-2)),
            1..=4 => Ok(f.mul(&self.chain[order - 1])),
            _ => Err(QnmError::InvalidInput(format!("derivative order {order} exceeds 4"))),
        }
    }

    pub fn alpha_at(&self, p: &ExteriorPoint) -> f64 {
        (0.5 * p.log_gap).exp() * self.map.gap_factor(p.side, p.r).sqrt() / p.r
    }

    pub fn alpha_prime_at(&self, p: &ExteriorPoint) -> f64 {
        let f = self.map.metric_at(p);
        self.alpha_at(p) * (0.5 * metric_derivative(self.params(), p.r) - f / p.r)
    }

    pub fn alpha(&self, x: f64) -> f64 {
        self.alpha_at(&self.map.point(x))
    }

    pub fn alpha_prime(&self, x: f64) -> f64 {
        self.alpha_prime_at(&self.map.point(x))
    }

    /// `d^k V0/dx^k` at an exterior point by the exact chain rule.
    pub fn derivative_at(&self, p: &ExteriorPoint, order: usize) -> Result<f64> {
        match order {
            0 => Ok(self.alpha_at(p).powi(2)),
            1..=4 => Ok(self.map.metric_at(p) * self.chain[order - 1].eval(p.r)),
            _ => Err(QnmError::InvalidInput(format!("derivative order {order} exceeds 4"))),
        }
    }

    pub fn potential_derivatives(&self, x: f64, order: usize) -> Result<f64> {
        self.derivative_at(&self.map.point(x), order)
    }

    /// Complex radius `r_h + sigma e^s` for a gap variable on `side`.
    pub fn radius_from_gap(&self, side: Side, s: Complex64) -> Complex64 {
        self.map.horizon_radius(side) + side.sign() * s.exp()
    }

    fn check_pinch(&self, side: Side, r: Complex64) -> Result<()> {
        let h = self.map.horizons();
        let width = h.r_plus() - h.r_minus();
        let own = side.root_index();
        let too_close = (0..4)
            .filter(|&j| j != own)
            .any(|j| (r - h.roots[j]).norm() < PINCH_FRACTION * width)
            || r.norm() < PINCH_FRACTION * width;
        if too_close || !(r.re.is_finite() && r.im.is_finite()) {
            return Err(QnmError::ContourPinch { r });
        }
        Ok(())
    }

    /// Rate `ds/dx = sigma G(r)` of the gap variable along the tortoise coordinate.
    pub fn gap_rate(&self, side: Side, s: Complex64) -> Result<Complex64> {
        let r = self.radius_from_gap(side, s);
        self.check_pinch(side, r)?;
        Ok(side.sign() * self.map.gap_factor_complex(side, r))
    }

    /// `alpha`, `alpha'` and the gap rate at a complex gap variable, sharing
    /// one radius evaluation.
    pub fn local_data(&self, side: Side, s: Complex64) -> Result<LocalData> {
        let r = self.radius_from_gap(side, s);
        self.check_pinch(side, r)?;
        let g = self.map.gap_factor_complex(side, r);
        if g.re <= 0.0 {
            return Err(QnmError::ContourPinch { r });
        }
        let alpha = (0.5 * s).exp() * g.sqrt() / r;
        let f = s.exp() * g;
        let fp = metric_derivative_complex(self.params(), r);
        Ok(LocalData {
            alpha,
            alpha_prime: alpha * (0.5 * fp - f / r),
            gap_rate: side.sign() * g,
        })
    }

    /// `(alpha, alpha')` continued to a complex gap variable.
    pub fn alpha_complex(&self, side: Side, s: Complex64) -> Result<(Complex64, Complex64)> {
        let r = self.radius_from_gap(side, s);
        self.check_pinch(side, r)?;
        let g = self.map.gap_factor_complex(side, r);
        if g.re <= 0.0 {
            return Err(QnmError::ContourPinch { r });
        }
        let alpha = (0.5 * s).exp() * g.sqrt() / r;
        let f = s.exp() * g;
        let fp = metric_derivative_complex(self.params(), r);
        Ok((alpha, alpha * (0.5 * fp - f / r)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::metric_function;

    fn profile() -> PotentialProfile {
        PotentialProfile::new(BlackHoleParams::new(1.0, 0.5, 0.05).unwrap()).unwrap()
    }

    #[test]
    fn barrier_values() {
        let p = profile();
        let r0 = p.map().barrier_radius();
        let closed = (r0 - 0.25 - 0.05 / 3.0 * r0.powi(4)) / r0.powi(4);
        let v0 = p.potential_derivatives(0.0, 0).unwrap();
        assert!((v0 - closed).abs() < 1e-14);
        assert!(p.potential_derivatives(0.0, 1).unwrap().abs() < 1e-12);
        assert!(p.potential_derivatives(0.0, 2).unwrap() < 0.0);
        assert!(p.potential_derivatives(0.0, 5).is_err());
    }

    #[test]
    fn chain_rule_against_differences() {
        let p = profile();
        for x in [-4.0, -0.7, 0.0, 1.3, 6.0] {
            for order in 1..=4 {
                let h = 1e-3;
                let f = |y: f64| p.potential_derivatives(y, order - 1).unwrap();
                let fd = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
                let exact = p.potential_derivatives(x, order).unwrap();
                let scale = p.potential_derivatives(0.0, order).unwrap().abs().max(1e-4);
                assert!(
                    (fd - exact).abs() < 1e-8 * scale.max(1.0),
                    "x={x} k={order}: {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn alpha_prime_matches_difference() {
        let p = profile();
        for x in [-10.0, -1.0, 2.0, 15.0] {
            let h = 1e-4;
            let fd = (p.alpha(x + h) - p.alpha(x - h)) / (2.0 * h);
            assert!((fd - p.alpha_prime(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn complex_alpha_on_real_axis() {
        let p = profile();
        for x in [-6.0, -0.5, 3.0, 11.0] {
            let pt = p.map().point(x);
            let (a, ap) = p.alpha_complex(pt.side, Complex64::new(pt.log_gap, 0.0)).unwrap();
            assert!((a.re - p.alpha(x)).abs() < 1e-15 && a.im == 0.0);
            assert!((ap.re - p.alpha_prime(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn asymptotic_amplitudes() {
        let p = profile();
        let a = p.asymptotics();
        let xp = 300.0;
        let ratio = p.alpha(xp) * (-a.kappa_plus * xp).exp();
        assert!((ratio / a.alpha_plus - 1.0).abs() < 1e-8);
        let xm = -150.0;
        let ratio = p.alpha(xm) * (-a.kappa_minus * xm).exp();
        assert!((ratio / a.alpha_minus - 1.0).abs() < 1e-8);
        let _ = metric_function(p.params(), 3.0).unwrap();
    }
}
