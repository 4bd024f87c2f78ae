use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A symmetric `W`-valued bilinear form on `V = R^n`, `W = R^p`.
///
/// Stored as the `p` symmetric `n x n` matrices `B_a = beta#(xi_a)` for the
/// standard orthonormal basis `xi_1..xi_p` of `W`, so that
/// `beta(x, y) = (x^T B_1 y, ..., x^T B_p y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm {
    n: usize,
    components: Vec<DMatrix<f64>>,
}

/// Returns `(m + m^T) / 2`, which is symmetric to exact storage equality.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("{what} is {}x{}", m.nrows(), m.ncols())));
    }
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if m[(i, j)] != m[(j, i)] {
                return Err(Error::NotSymmetric(format!("{what} entry ({i},{j})")));
            }
        }
    }
    Ok(())
}

impl BilinearForm {
    pub fn new(components: Vec<DMatrix<f64>>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::Dimension("a form needs at least one component (p >= 1)".into()));
        };
        let n = first.nrows();
        if n < 2 {
            return Err(Error::Dimension(format!("n = {n}, need n >= 2")));
        }
        for (a, c) in components.iter().enumerate() {
            if c.nrows() != n || c.ncols() != n {
                return Err(Error::Dimension(format!(
                    "component {a} is {}x{}, expected {n}x{n}",
                    c.nrows(),
                    c.ncols()
                )));
            }
            check_symmetric(c, &format!("component {a}"))?;
        }
        Ok(Self { n, components })
    }

    /// Builds a form from arbitrary square matrices, symmetrizing each.
    pub fn from_symmetrized(components: Vec<DMatrix<f64>>) -> Result<Self> {
        Self::new(components.iter().map(symmetrize).collect())
    }

    pub fn zeros(n: usize, p: usize) -> Self {
        Self { n, components: vec![DMatrix::zeros(n, n); p] }
    }

    /// The form `phi(x, y) xi` for a real symmetric form `phi` and `xi` in `W`.
    pub fn from_scalar(phi: &DMatrix<f64>, xi: &DVector<f64>) -> Result<Self> {
        Self::new(xi.iter().map(|&c| phi * c).collect())
    }

    /// `c <x, y> xi`.
    pub fn umbilic(n: usize, c: f64, xi: &DVector<f64>) -> Self {
        Self {
            n,
            components: xi.iter().map(|&x| DMatrix::identity(n, n) * (c * x)).collect(),
        }
    }

    /// The diagonal form with `beta(e_i, e_i) = values[i]` and vanishing
    /// off-diagonal entries.
    pub fn from_diagonal(values: &[DVector<f64>]) -> Result<Self> {
        let n = values.len();
        let p = values.first().map(|v| v.len()).unwrap_or(0);
        if values.iter().any(|v| v.len() != p) {
            return Err(Error::Dimension("diagonal values differ in length".into()));
        }
        let components = (0..p)
            .map(|a| DMatrix::from_diagonal(&DVector::from_iterator(n, values.iter().map(|v| v[a]))))
            .collect();
        Self::new(components)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[DMatrix<f64>] {
        &self.components
    }

    pub fn component(&self, a: usize) -> &DMatrix<f64> {
        &self.components[a]
    }

    /// `beta(e_i, e_j)` as a `W`-vector.
    pub fn entry(&self, i: usize, j: usize) -> DVector<f64> {
        DVector::from_iterator(self.p(), self.components.iter().map(|c| c[(i, j)]))
    }

    pub fn eval(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.p(), self.components.iter().map(|c| x.dot(&(c * y))))
    }

    pub fn norm_squared(&self) -> f64 {
        self.components.iter().map(|c| c.norm_squared()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { n: self.n, components: self.components.iter().map(|c| c * t).collect() }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.p() != other.p() {
            return Err(Error::Dimension(format!(
                "forms have shapes (n={}, p={}) and (n={}, p={})",
                self.n,
                self.p(),
                other.n,
                other.p()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let components = self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect();
        Ok(Self { n: self.n, components })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    /// Expresses the form in the orthonormal basis given by the columns of `q`:
    /// `B_a -> q^T B_a q`.
    pub fn change_basis(&self, q: &DMatrix<f64>) -> Result<Self> {
        if q.nrows() != self.n || q.ncols() != self.n {
            return Err(Error::Dimension("basis matrix must be n x n".into()));
        }
        Self::from_symmetrized(self.components.iter().map(|c| q.transpose() * c * q).collect())
    }

    /// Number of free parameters `p * n (n + 1) / 2`.
    pub fn parameter_count(n: usize, p: usize) -> usize {
        p * n * (n + 1) / 2
    }

    /// Packs the upper triangles of all components, component-major.
    pub fn to_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(Self::parameter_count(self.n, self.p()));
        for c in &self.components {
            for i in 0..self.n {
                for j in i..self.n {
                    out.push(c[(i, j)]);
                }
            }
        }
        out
    }

    pub fn from_params(n: usize, p: usize, params: &[f64]) -> Result<Self> {
        if params.len() != Self::parameter_count(n, p) {
            return Err(Error::Dimension(format!(
                "expected {} parameters, got {}",
                Self::parameter_count(n, p),
                params.len()
            )));
        }
        let mut it = params.iter();
        let mut components = Vec::with_capacity(p);
        for _ in 0..p {
            let mut c = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = *it.next().expect("length checked");
                    c[(i, j)] = v;
                    c[(j, i)] = v;
                }
            }
            components.push(c);
        }
        Self::new(components)
    }
}

/// A selfadjoint endomorphism of `V`, such as `beta#(u)` or a shape operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricOperator {
    matrix: DMatrix<f64>,
}

impl SymmetricOperator {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&matrix, "operator")?;
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    /// `q^T S q`, symmetrized.
    pub fn conjugate(&self, q: &DMatrix<f64>) -> Result<Self> {
        Self::new(symmetrize(&(q.transpose() * &self.matrix * q)))
    }
}

/// A linear subspace of `R^n` held by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<DVector<f64>>,
}

impl Subspace {
    pub fn new(ambient: usize, basis: Vec<DVector<f64>>) -> Result<Self> {
        for (i, b) in basis.iter().enumerate() {
            if b.len() != ambient {
                return Err(Error::Dimension(format!("basis vector {i} has length {}", b.len())));
            }
            for (j, c) in basis.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                if (b.dot(c) - target).abs() > 1e-12 {
                    return Err(Error::Normalization(b.dot(c)));
                }
            }
        }
        Ok(Self { ambient, basis })
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[DVector<f64>] {
        &self.basis
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(self.ambient, self.ambient);
        for b in &self.basis {
            p += b * b.transpose();
        }
        p
    }

    /// Distance from `v` to the subspace.
    pub fn distance(&self, v: &DVector<f64>) -> f64 {
        (v - self.projector() * v).norm()
    }
}
