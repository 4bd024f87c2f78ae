//! Betti numbers of sphere products via Künneth. All catalog manifolds have
//! torsion-free homology, so the numbers do not depend on the coefficient field.

use crate::error::{Error, Result};
use crate::geometry::CatalogImmersion;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoincarePolynomial {
    coeffs: Vec<u64>,
}

impl PoincarePolynomial {
    /// `1 + t^m`.
    pub fn sphere(m: usize) -> Self {
        let mut coeffs = vec![0; m + 1];
        coeffs[0] += 1;
        coeffs[m] += 1;
        Self { coeffs }
    }

    pub fn product(&self, other: &Self) -> Self {
        let mut coeffs = vec![0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self { coeffs }
    }

    pub fn of_spheres(dims: &[usize]) -> Self {
        dims.iter().fold(Self { coeffs: vec![1] }, |acc, &d| acc.product(&Self::sphere(d)))
    }

    /// `beta_0 .. beta_n`.
    pub fn coefficients(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn betti(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn total(&self) -> u64 {
        self.coeffs.iter().sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.coeffs.iter().enumerate().map(|(i, &b)| if i % 2 == 0 { b as i64 } else { -(b as i64) }).sum()
    }

    pub fn is_poincare_dual(&self) -> bool {
        self.coeffs.iter().eq(self.coeffs.iter().rev())
    }
}

pub fn poincare(imm: &CatalogImmersion) -> PoincarePolynomial {
    let dims: Vec<usize> = imm.factors().into_iter().map(|(d, _)| d).collect();
    PoincarePolynomial::of_spheres(&dims)
}

/// `sum_{i=p}^{n-p} beta_i`; `p = 0` gives the full sum.
pub fn betti_window_sum(poly: &PoincarePolynomial, p: usize, n: usize) -> Result<u64> {
    if 2 * p > n {
        return Err(Error::Codimension { n, p });
    }
    Ok((p..=n - p).map(|i| poly.betti(i)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kunneth_products() {
        assert_eq!(PoincarePolynomial::of_spheres(&[2, 2]).coefficients(), &[1, 0, 2, 0, 1]);
        assert_eq!(PoincarePolynomial::of_spheres(&[4]).coefficients(), &[1, 0, 0, 0, 1]);
        let p23 = PoincarePolynomial::of_spheres(&[2, 3]);
        assert_eq!(p23.coefficients(), &[1, 0, 1, 1, 0, 1]);
        assert_eq!(p23.euler_characteristic(), 0);
        assert!(p23.is_poincare_dual());
    }

    #[test]
    fn windows() {
        let p = PoincarePolynomial::of_spheres(&[2, 2]);
        assert_eq!(betti_window_sum(&p, 2, 4).unwrap(), 2);
        assert_eq!(betti_window_sum(&p, 0, 4).unwrap(), 4);
        assert_eq!(betti_window_sum(&PoincarePolynomial::sphere(4), 2, 4).unwrap(), 0);
        assert!(betti_window_sum(&p, 3, 4).is_err());
        assert_eq!(p.euler_characteristic(), 4);
    }
}
