//! Monotone cubic (Fritsch-Carlson) interpolation for tabulated profiles.
//! Shape preservation matters here: an interpolated w(x) that overshoots
//! between knots would manufacture spurious turning points.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Domain("interpolation needs at least two matched samples".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("interpolation abscissae must be strictly increasing".into()));
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Domain("interpolation samples must be finite".into()));
        }
        let n = xs.len();
        let mut deltas = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            deltas.push((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]));
        }
        let mut ds = vec![0.0; n];
        ds[0] = deltas[0];
        ds[n - 1] = deltas[n - 2];
        for i in 1..n - 1 {
            ds[i] = if deltas[i - 1] * deltas[i] <= 0.0 {
                0.0
            } else {
                0.5 * (deltas[i - 1] + deltas[i])
            };
        }
        // Fritsch-Carlson limiter keeps each segment monotone.
        for i in 0..n - 1 {
            if deltas[i] == 0.0 {
                ds[i] = 0.0;
                ds[i + 1] = 0.0;
                continue;
            }
            let a = ds[i] / deltas[i];
            let b = ds[i + 1] / deltas[i];
            let r = a * a + b * b;
            if r > 9.0 {
                let t = 3.0 / r.sqrt();
                ds[i] = t * a * deltas[i];
                ds[i + 1] = t * b * deltas[i];
            }
        }
        Ok(MonotoneCubic { xs, ys, ds })
    }

    pub fn lower(&self) -> f64 {
        self.xs[0]
    }

    pub fn upper(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        (&self.xs, &self.ys)
    }

    fn segment(&self, x: f64) -> Result<usize> {
        if !(x >= self.lower() && x <= self.upper()) {
            return Err(Error::Domain(format!(
                "interpolation point {x} outside [{}, {}]",
                self.lower(),
                self.upper()
            )));
        }
        let i = match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(k) => k,
            Err(k) => k - 1,
        };
        Ok(i.min(self.xs.len() - 2))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let i = self.segment(x)?;
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        Ok((2.0 * s3 - 3.0 * s2 + 1.0) * self.ys[i]
            + (s3 - 2.0 * s2 + s) * h * self.ds[i]
            + (-2.0 * s3 + 3.0 * s2) * self.ys[i + 1]
            + (s3 - s2) * h * self.ds[i + 1])
    }

    pub fn deriv(&self, x: f64) -> Result<f64> {
        let i = self.segment(x)?;
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let s2 = s * s;
        Ok(((6.0 * s2 - 6.0 * s) * (self.ys[i] - self.ys[i + 1]) / h)
            + (3.0 * s2 - 4.0 * s + 1.0) * self.ds[i]
            + (3.0 * s2 - 2.0 * s) * self.ds[i + 1])
    }

    pub fn second_deriv(&self, x: f64) -> Result<f64> {
        let i = self.segment(x)?;
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        Ok(((12.0 * s - 6.0) * (self.ys[i] - self.ys[i + 1]) / (h * h))
            + ((6.0 * s - 4.0) * self.ds[i] + (6.0 * s - 2.0) * self.ds[i + 1]) / h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_knots_exactly() {
        let xs = vec![0.0, 1.0, 2.5, 4.0];
        let ys = vec![1.0, 2.0, 2.2, 5.0];
        let c = MonotoneCubic::new(xs.clone(), ys.clone()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((c.eval(*x).unwrap() - y).abs() < 1e-14);
        }
    }

    #[test]
    fn preserves_monotone_data() {
        let xs: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + x + 0.3 * x.sin()).collect();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        let mut prev = c.eval(0.0).unwrap();
        for i in 1..800 {
            let x = 9.75 * i as f64 / 800.0;
            let y = c.eval(x).unwrap();
            assert!(y >= prev - 1e-12, "overshoot at {x}");
            prev = y;
        }
    }

    #[test]
    fn derivative_is_consistent_with_values() {
        let xs: Vec<f64> = (0..30).map(|i| 0.5 + i as f64 * 0.37).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        for i in 1..100 {
            let x = 0.6 + i as f64 * 0.1;
            let h = 1e-6;
            let fd = (c.eval(x + h).unwrap() - c.eval(x - h).unwrap()) / (2.0 * h);
            assert!((c.deriv(x).unwrap() - fd).abs() < 1e-7, "at {x}");
        }
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(MonotoneCubic::new(vec![0.0], vec![1.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(MonotoneCubic::new(vec![1.0, 0.5], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn evaluation_outside_range_errors() {
        let c = MonotoneCubic::new(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        assert!(c.eval(-0.1).is_err());
        assert!(c.eval(1.1).is_err());
    }
}
