use std::ops::{Neg, Sub};

use crate::{Error, Result};

/// First-order forward differences, an `(N-1)×N` map with row `i` sending
/// `x` to `x[i+1] - x[i]`. Non-circular.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DifferenceOperator {
    n: usize,
}

impl DifferenceOperator {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooShort { got: n, min: 2 });
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn apply<T>(&self, x: &[T]) -> Result<Vec<T>>
    where
        T: Copy + Sub<Output = T>,
    {
        if x.len() != self.n {
            return Err(Error::dim(format!("difference of length {} applied to {}", self.n, x.len())));
        }
        Ok(x.windows(2).map(|w| w[1] - w[0]).collect())
    }

    /// `D^T y` for `y` of length `N-1`.
    pub fn adjoint<T>(&self, y: &[T]) -> Result<Vec<T>>
    where
        T: Copy + Sub<Output = T> + Neg<Output = T>,
    {
        let m = self.n - 1;
        if y.len() != m {
            return Err(Error::dim(format!("difference adjoint expects {m}, got {}", y.len())));
        }
        let mut out = Vec::with_capacity(self.n);
        out.push(-y[0]);
        for i in 1..m {
            out.push(y[i - 1] - y[i]);
        }
        out.push(y[m - 1]);
        Ok(out)
    }

    /// `D^T D x`: the second-difference Laplacian with reflecting ends.
    pub fn gram(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::dim(format!("difference of length {} applied to {}", self.n, x.len())));
        }
        let mut out = vec![0.0; self.n];
        self.gram_accumulate(x, 1.0, &mut out);
        Ok(out)
    }

    /// `out += scale * D^T D x` without allocating.
    pub fn gram_accumulate(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        let n = self.n;
        out[0] += scale * (x[0] - x[1]);
        for i in 1..n - 1 {
            out[i] += scale * (2.0 * x[i] - x[i - 1] - x[i + 1]);
        }
        out[n - 1] += scale * (x[n - 1] - x[n - 2]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_examples() {
        let d = DifferenceOperator::new(4).unwrap();
        assert_eq!(d.apply(&[1.0, 1.0, 1.0, 1.0]).unwrap(), vec![0.0; 3]);
        assert_eq!(d.apply(&[0.0, 1.0, 3.0, 6.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_short() {
        assert!(matches!(DifferenceOperator::new(1), Err(Error::TooShort { got: 1, min: 2 })));
        let d = DifferenceOperator::new(3).unwrap();
        assert!(d.apply(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn gram_matches_adjoint_of_apply() {
        let d = DifferenceOperator::new(9).unwrap();
        let x: Vec<f64> = (0..9).map(|i| ((i * i) % 7) as f64 * 0.3 - 1.0).collect();
        let two_pass = d.adjoint(&d.apply(&x).unwrap()).unwrap();
        let gram = d.gram(&x).unwrap();
        for (a, b) in two_pass.iter().zip(&gram) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn two_samples() {
        let d = DifferenceOperator::new(2).unwrap();
        assert_eq!(d.gram(&[1.0, 4.0]).unwrap(), vec![-3.0, 3.0]);
    }
}
