//! Natural cubic spline interpolation.

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct NaturalCubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots; zero at both ends.
    m: Vec<f64>,
}

impl NaturalCubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<NaturalCubicSpline> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::Pulse(format!("spline needs >= 2 matching knots, got {} and {}", n, y.len())));
        }
        if !x.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Pulse("spline knots must be strictly increasing".into()));
        }
        let mut m = vec![0.0; n];
        if n > 2 {
            // tridiagonal system for interior second derivatives (Thomas algorithm)
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            let mut sub = vec![0.0; k];
            let mut sup = vec![0.0; k];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                diag[i - 1] = 2.0 * (h0 + h1);
                sub[i - 1] = h0;
                sup[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            for i in 1..k {
                let w = sub[i] / diag[i - 1];
                diag[i] -= w * sup[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - sup[i] * m[i + 2]) / diag[i];
            }
        }
        Ok(NaturalCubicSpline { x, y, m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn second_derivatives(&self) -> &[f64] {
        &self.m
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        }
    }

    /// Evaluates the spline; outside the knot range the end cubic is extended.
    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h - (3.0 * a * a - 1.0) * h * self.m[i] / 6.0
            + (3.0 * b * b - 1.0) * h * self.m[i + 1] / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_knots() {
        let x = vec![0.0, 0.5, 1.3, 2.0, 3.1];
        let y = vec![1.0, -0.2, 0.7, 0.3, 2.0];
        let s = NaturalCubicSpline::new(x.clone(), y.clone()).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi) - yi).abs() < 1e-14);
        }
        assert_eq!(s.second_derivatives()[0], 0.0);
        assert_eq!(s.second_derivatives()[4], 0.0);
    }

    #[test]
    fn reproduces_straight_lines() {
        let x: Vec<f64> = (0..7).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let s = NaturalCubicSpline::new(x, y).unwrap();
        for t in [0.05, 0.77, 1.5, 1.79] {
            assert!((s.eval(t) - (2.0 * t - 1.0)).abs() < 1e-13);
            assert!((s.derivative(t) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn continuous_first_derivative() {
        let x = vec![0.0, 1.0, 2.5, 3.0, 4.0];
        let y = vec![0.0, 1.0, 0.0, 2.0, 1.0];
        let s = NaturalCubicSpline::new(x, y).unwrap();
        let eps = 1e-7;
        for k in [1.0, 2.5, 3.0] {
            assert!((s.derivative(k - eps) - s.derivative(k + eps)).abs() < 1e-5);
        }
    }

    #[test]
    fn hand_solved_four_knots() {
        let s = NaturalCubicSpline::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        // second derivatives solve [[4,1],[1,4]] m = [-12, 12] → m = [-4, 4]
        assert!((s.second_derivatives()[1] + 4.0).abs() < 1e-14);
        assert!((s.second_derivatives()[2] - 4.0).abs() < 1e-14);
        let b: f64 = 0.75;
        let expect = b + (b * b * b - b) * -4.0 / 6.0;
        assert!((s.eval(0.75) - expect).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(NaturalCubicSpline::new(vec![0.0], vec![1.0]).is_err());
        assert!(NaturalCubicSpline::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }
}
