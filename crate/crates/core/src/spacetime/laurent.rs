use num_complex::Complex64;

/// Finite Laurent polynomial `sum_k c_k r^(min_pow + k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    min_pow: i32,
    coeffs: Vec<f64>,
}

impl Laurent {
    pub fn new(min_pow: i32, coeffs: Vec<f64>) -> Self {
        let mut p = Self { min_pow, coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Self {
            min_pow: 0,
            coeffs: Vec::new(),
        }
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0.0) {
            self.coeffs.pop();
        }
        let lead_zeros = self.coeffs.iter().take_while(|c| **c == 0.0).count();
        if lead_zeros == self.coeffs.len() {
            self.coeffs.clear();
            self.min_pow = 0;
        } else if lead_zeros > 0 {
            self.coeffs.drain(..lead_zeros);
            self.min_pow += lead_zeros as i32;
        }
    }

    /// Coefficient of `r^power`.
    pub fn coeff(&self, power: i32) -> f64 {
        let idx = power - self.min_pow;
        if idx < 0 {
            0.0
        } else {
            self.coeffs.get(idx as usize).copied().unwrap_or(0.0)
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(k, c)| (self.min_pow + k as i32, *c))
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self.terms().map(|(p, c)| c * p as f64).collect::<Vec<_>>();
        Self::new(self.min_pow - 1, coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::new(self.min_pow + other.min_pow, coeffs)
    }

    pub fn shift(&self, by: i32) -> Self {
        Self::new(self.min_pow + by, self.coeffs.clone())
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.terms().map(|(p, c)| c * r.powi(p)).sum()
    }

    pub fn eval_complex(&self, r: Complex64) -> Complex64 {
        self.terms().map(|(p, c)| c * r.powi(p)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_and_product() {
        // (r^-1 + 2 r) * (3 r^2) = 3 r + 6 r^3
        let a = Laurent::new(-1, vec![1.0, 0.0, 2.0]);
        let b = Laurent::new(2, vec![3.0]);
        let p = a.mul(&b);
        assert_eq!(p.coeff(1), 3.0);
        assert_eq!(p.coeff(3), 6.0);
        let d = a.derivative();
        assert_eq!(d.coeff(-2), -1.0);
        assert_eq!(d.coeff(0), 2.0);
        assert_eq!(d.coeff(-1), 0.0);
        assert!((a.eval(2.0) - 4.5).abs() < 1e-15);
    }

    #[test]
    fn zero_handling() {
        let z = Laurent::new(3, vec![0.0, 0.0]);
        assert_eq!(z, Laurent::zero());
        assert_eq!(Laurent::new(0, vec![5.0]).derivative(), Laurent::zero());
    }
}
