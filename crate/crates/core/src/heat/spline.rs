//! Cubic spline through tabulated points.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub(crate) fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::Validation(format!(
                "table needs at least two points and matching lengths ({} r, {} p)",
                n,
                y.len()
            )));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Validation("table abscissae must increase strictly".into()));
        }
        // Interior equations h0 m_{i-1} + 2(h0 + h1) m_i + h1 m_{i+1} = rhs_i.
        // With four or more knots the end curvatures are extrapolated linearly
        // from their neighbours, otherwise they are zero.
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut lower = vec![0.0; k];
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                lower[i - 1] = h0;
                diag[i - 1] = 2.0 * (h0 + h1);
                upper[i - 1] = h1;
                rhs[i - 1] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            let extrapolate = n >= 4;
            if extrapolate {
                let (h0, h1) = (x[1] - x[0], x[2] - x[1]);
                diag[0] += h0 + h0 * h0 / h1;
                upper[0] -= h0 * h0 / h1;
                let (h0, h1) = (x[n - 2] - x[n - 3], x[n - 1] - x[n - 2]);
                diag[k - 1] += h1 + h1 * h1 / h0;
                lower[k - 1] -= h1 * h1 / h0;
            }
            for j in 1..k {
                let f = lower[j] / diag[j - 1];
                diag[j] -= f * upper[j - 1];
                rhs[j] -= f * rhs[j - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for j in (0..k - 1).rev() {
                m[j + 1] = (rhs[j] - upper[j] * m[j + 2]) / diag[j];
            }
            if extrapolate {
                m[0] = m[1] - (m[2] - m[1]) * (x[1] - x[0]) / (x[2] - x[1]);
                m[n - 1] = m[n - 2] + (m[n - 2] - m[n - 3]) * (x[n - 1] - x[n - 2]) / (x[n - 2] - x[n - 3]);
            }
        }
        Ok(CubicSpline { x: x.to_vec(), y: y.to_vec(), m })
    }

    pub(crate) fn last(&self) -> (f64, f64) {
        (*self.x.last().unwrap(), *self.y.last().unwrap())
    }

    /// Value inside the table; clamps below the first knot.
    pub(crate) fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = self.x.partition_point(|&v| v <= t) - 1;
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_interior() {
        let x: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let s = CubicSpline::new(&x, &y).unwrap();
        for t in [0.5, 1.234, 5.0, 9.3] {
            assert!((s.eval(t) - f64::sin(t)).abs() < 1e-5);
        }
        assert_eq!(s.eval(0.0), 0.0);
    }

    #[test]
    fn linear_data_is_exact() {
        let s = CubicSpline::new(&[0.0, 1.0, 3.0], &[1.0, 3.0, 7.0]).unwrap();
        assert!((s.eval(2.0) - 5.0).abs() < 1e-14);
        assert!(CubicSpline::new(&[0.0, 0.0], &[1.0, 1.0]).is_err());
    }
}
