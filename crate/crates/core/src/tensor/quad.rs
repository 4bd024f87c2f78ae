use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// A real (0,4)-tensor on `R^n`, components `T(i,j,k,l)` in row-major order.
///
/// Norms are the plain Frobenius norm over all `n^4` components.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadTensor {
    n: usize,
    data: Vec<f64>,
}

impl QuadTensor {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n * n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        data.push(f(i, j, k, l));
                    }
                }
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.offset(i, j, k, l)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn norm_squared(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// Largest violation of the first Bianchi identity
    /// `T(x,y,z,w) + T(y,z,x,w) + T(z,x,y,w) = 0` over basis quadruples.
    pub fn bianchi_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let s = self.get(i, j, k, l) + self.get(j, k, i, l) + self.get(k, i, j, l);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest violation of `T(i,j,k,l) = -T(j,i,k,l) = -T(i,j,l,k) = T(k,l,i,j)`.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let t = self.get(i, j, k, l);
                        worst = worst
                            .max((t + self.get(j, i, k, l)).abs())
                            .max((t + self.get(i, j, l, k)).abs())
                            .max((t - self.get(k, l, i, j)).abs());
                    }
                }
            }
        }
        worst
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension(format!("tensors of dimension {} and {}", self.n, other.n)));
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.n, other.n, "tensor dimension mismatch");
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect() }
    }
}

impl Add for &QuadTensor {
    type Output = QuadTensor;
    fn add(self, rhs: &QuadTensor) -> QuadTensor {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &QuadTensor {
    type Output = QuadTensor;
    fn sub(self, rhs: &QuadTensor) -> QuadTensor {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &QuadTensor {
    type Output = QuadTensor;
    fn mul(self, rhs: f64) -> QuadTensor {
        QuadTensor { n: self.n, data: self.data.iter().map(|v| v * rhs).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_row_major() {
        let t = QuadTensor::from_fn(3, |i, j, k, l| (1000 * i + 100 * j + 10 * k + l) as f64);
        assert_eq!(t.get(2, 1, 0, 2), 2102.0);
        assert_eq!(t.as_slice().len(), 81);
    }

    #[test]
    fn arithmetic_and_norms() {
        let a = QuadTensor::from_fn(2, |i, j, k, l| (i + j + k + l) as f64);
        let b = &a * 2.0;
        assert_eq!((&b - &a), a);
        assert_eq!((&a + &a), b);
        assert_eq!(a.dot(&a).unwrap(), a.norm_squared());
        assert!(a.dot(&QuadTensor::zeros(3)).is_err());
    }
}
