use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{find_horizons, BlackHoleParams, HorizonData, COSMOLOGICAL, EVENT};
use crate::error::{QnmError, Result};

/// Which horizon a point is measured from. `Minus` is the event horizon
/// (`x -> -inf`), `Plus` the cosmological horizon (`x -> +inf`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    /// Orientation `sigma` with gap `delta = sigma (r - r_h) > 0` on the exterior.
    pub fn sign(self) -> f64 {
        match self {
            Side::Minus => 1.0,
            Side::Plus => -1.0,
        }
    }

    pub fn root_index(self) -> usize {
        match self {
            Side::Minus => EVENT,
            Side::Plus => COSMOLOGICAL,
        }
    }
}

/// A real exterior point carried with its logarithmic distance to the nearer
/// horizon, so that `F` and `alpha` keep full relative precision even when
/// `r` itself has rounded onto the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExteriorPoint {
    pub x: f64,
    pub r: f64,
    pub side: Side,
    /// `ln |r - r_h|` for the horizon on `side`.
    pub log_gap: f64,
}

/// Tortoise coordinate `x(r) = sum_i ln|r - r_i| / (2 kappa_i) + C` on the
/// exterior, normalised so that the barrier maximum sits at `x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TortoiseMap {
    params: BlackHoleParams,
    horizons: HorizonData,
    barrier_radius: f64,
    offset: f64,
}

impl TortoiseMap {
    pub fn new(params: BlackHoleParams) -> Result<Self> {
        let horizons = find_horizons(&params)?;
        let m = params.mass;
        let q2 = params.charge * params.charge;
        let barrier_radius = 1.5 * m + (2.25 * m * m - 2.0 * q2).sqrt();
        if !(barrier_radius > horizons.r_minus() && barrier_radius < horizons.r_plus()) {
            return Err(QnmError::Inadmissible(format!(
                "barrier radius {barrier_radius} outside the exterior"
            )));
        }
        let mut map = Self {
            params,
            horizons,
            barrier_radius,
            offset: 0.0,
        };
        map.offset = -map.raw_tortoise(barrier_radius);
        Ok(map)
    }

    /// Same map with the additive constant shifted by `c`.
    pub fn with_shift(&self, c: f64) -> Self {
        Self {
            offset: self.offset + c,
            ..self.clone()
        }
    }

    pub fn params(&self) -> &BlackHoleParams {
        &self.params
    }

    pub fn horizons(&self) -> &HorizonData {
        &self.horizons
    }

    /// Radius of the potential maximum.
    pub fn barrier_radius(&self) -> f64 {
        self.barrier_radius
    }

    /// Position of the potential maximum in the tortoise coordinate.
    pub fn barrier_x(&self) -> f64 {
        self.raw_tortoise(self.barrier_radius) + self.offset
    }

    /// Points left of the barrier are measured from the event horizon.
    pub fn side_of(&self, x: f64) -> Side {
        if x < self.barrier_x() {
            Side::Minus
        } else {
            Side::Plus
        }
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn horizon_radius(&self, side: Side) -> f64 {
        self.horizons.roots[side.root_index()]
    }

    pub fn kappa(&self, side: Side) -> f64 {
        self.horizons.kappas[side.root_index()]
    }

    fn raw_tortoise(&self, r: f64) -> f64 {
        let h = &self.horizons;
        (0..4)
            .filter(|&i| h.weights[i] != 0.0)
            .map(|i| h.weights[i] * (r - h.roots[i]).abs().ln())
            .sum()
    }

    fn log_sum_excluding(&self, skip: usize, r: f64) -> f64 {
        let h = &self.horizons;
        (0..4)
            .filter(|&i| i != skip && h.weights[i] != 0.0)
            .map(|i| h.weights[i] * (r - h.roots[i]).abs().ln())
            .sum()
    }

    /// `x(r)` for `r_minus < r < r_plus`.
    pub fn tortoise(&self, r: f64) -> Result<f64> {
        if !(r > self.horizons.r_minus() && r < self.horizons.r_plus()) {
            return Err(QnmError::Domain(format!(
                "r = {r} outside the exterior ({}, {})",
                self.horizons.r_minus(),
                self.horizons.r_plus()
            )));
        }
        Ok(self.raw_tortoise(r) + self.offset)
    }

    /// `x` at `r = r_h + sigma e^s`, accurate for arbitrarily small gaps.
    pub fn tortoise_from_gap(&self, side: Side, log_gap: f64) -> f64 {
        let idx = side.root_index();
        let r = self.horizon_radius(side) + side.sign() * log_gap.exp();
        self.horizons.weights[idx] * log_gap + self.log_sum_excluding(idx, r) + self.offset
    }

    /// Constant `c_h` in the near-horizon expansion `x ~ s/(2 kappa_h) + c_h`.
    pub fn horizon_constant(&self, side: Side) -> f64 {
        let idx = side.root_index();
        self.log_sum_excluding(idx, self.horizon_radius(side)) + self.offset
    }

    /// Positive factor `G` with `F(r) = |r - r_h| G(r)` on the exterior.
    pub fn gap_factor(&self, side: Side, r: f64) -> f64 {
        let idx = side.root_index();
        let h = &self.horizons;
        let prod: f64 = (0..4).filter(|&j| j != idx).map(|j| r - h.roots[j]).product();
        -side.sign() * self.params.lambda / 3.0 * prod / (r * r)
    }

    /// Holomorphic continuation of [`Self::gap_factor`].
    pub fn gap_factor_complex(&self, side: Side, r: Complex64) -> Complex64 {
        let idx = side.root_index();
        let h = &self.horizons;
        let mut prod = Complex64::new(1.0, 0.0);
        for j in 0..4 {
            if j != idx {
                prod *= r - h.roots[j];
            }
        }
        -side.sign() * self.params.lambda / 3.0 * prod / (r * r)
    }

    /// Exterior point for a real radius.
    pub fn point_from_radius(&self, r: f64) -> Result<ExteriorPoint> {
        let x = self.tortoise(r)?;
        let side = self.side_of(x);
        let log_gap = (r - self.horizon_radius(side)).abs().ln();
        Ok(ExteriorPoint { x, r, side, log_gap })
    }

    /// Inverse of the tortoise map by safeguarded Newton iteration in the
    /// logarithmic gap variable.
    pub fn point(&self, x: f64) -> ExteriorPoint {
        let side = self.side_of(x);
        let rh = self.horizon_radius(side);
        let sigma = side.sign();
        let idx = side.root_index();
        let weight = self.horizons.weights[idx];
        // g(s) is increasing with g'(s) = 1/G and g >= 0 at the barrier.
        let g = |s: f64| sigma * (self.tortoise_from_gap(side, s) - x);
        let mut hi = (self.barrier_radius - rh).abs().ln();
        let guess = ((x - self.horizon_constant(side)) / weight).min(hi);
        let mut lo = guess.min(hi) - 1.0;
        let mut step = 1.0;
        while g(lo) > 0.0 {
            step *= 2.0;
            lo -= step;
        }
        let mut s = guess.clamp(lo, hi);
        for _ in 0..200 {
            let val = g(s);
            if val == 0.0 {
                break;
            }
            if val > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let r = rh + sigma * s.exp();
            let mut next = s - val * self.gap_factor(side, r);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - s).abs() <= 4.0 * f64::EPSILON * s.abs().max(1.0);
            s = next;
            if done || hi - lo <= 4.0 * f64::EPSILON * s.abs().max(1.0) {
                break;
            }
        }
        ExteriorPoint {
            x,
            r: rh + sigma * s.exp(),
            side,
            log_gap: s,
        }
    }

    pub fn radius_from_tortoise(&self, x: f64) -> f64 {
        self.point(x).r
    }

    /// `F` at an exterior point, as `e^s G(r)`.
    pub fn metric_at(&self, p: &ExteriorPoint) -> f64 {
        p.log_gap.exp() * self.gap_factor(p.side, p.r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::metric_function;

    fn map() -> TortoiseMap {
        TortoiseMap::new(BlackHoleParams::new(1.0, 0.5, 0.05).unwrap()).unwrap()
    }

    #[test]
    fn normalised_at_barrier() {
        let m = map();
        assert!(m.tortoise(m.barrier_radius()).unwrap().abs() < 1e-14);
        assert!((m.barrier_radius() - (1.5 + 1.75f64.sqrt())).abs() < 1e-15);
        assert!((m.radius_from_tortoise(0.0) - m.barrier_radius()).abs() < 1e-13);
    }

    #[test]
    fn derivative_is_inverse_metric() {
        let m = map();
        let h = m.horizons();
        for k in 1..20 {
            let r = h.r_minus() + (h.r_plus() - h.r_minus()) * k as f64 / 20.0;
            let e = 1e-6 * r;
            let d = (m.tortoise(r + e).unwrap() - m.tortoise(r - e).unwrap()) / (2.0 * e);
            let f = metric_function(m.params(), r).unwrap();
            assert!((d * f - 1.0).abs() < 1e-9, "r = {r}: {}", d * f);
        }
    }

    #[test]
    fn outside_exterior_is_domain_error() {
        let m = map();
        assert!(m.tortoise(1.0).is_err());
        assert!(m.tortoise(7.0).is_err());
    }

    #[test]
    fn deep_inversion_reaches_horizons() {
        let m = map();
        let kbar = m.horizons().kappa_min();
        let plus = m.point(50.0 / kbar);
        assert!(plus.log_gap < -50.0);
        let minus = m.point(-50.0 / kbar);
        assert!(minus.log_gap < -50.0);
        assert!((m.tortoise_from_gap(plus.side, plus.log_gap) - 50.0 / kbar).abs() < 1e-10 * 50.0 / kbar);
    }

    #[test]
    fn metric_from_gap_matches_direct() {
        let m = map();
        for x in [-12.0, -3.0, 0.5, 7.0, 25.0] {
            let p = m.point(x);
            let f = metric_function(m.params(), p.r).unwrap();
            assert!((m.metric_at(&p) - f).abs() < 1e-12 * f.abs().max(1e-3));
        }
    }

    #[test]
    fn shift_covariance() {
        let m = map();
        let s = m.with_shift(1.25);
        for r in [2.5, 3.0, 4.0, 6.0] {
            assert!((s.tortoise(r).unwrap() - m.tortoise(r).unwrap() - 1.25).abs() < 1e-13);
        }
        let p = s.point(3.0);
        assert!((p.r - m.radius_from_tortoise(3.0 - 1.25)).abs() < 1e-12);
    }
}
