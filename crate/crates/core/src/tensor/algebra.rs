//! Kulkarni–Nomizu products and the curvature quantities built from them.

use nalgebra::{DMatrix, DVector};

use super::form::{BilinearForm, Subspace, SymmetricOperator};
use super::quad::QuadTensor;
use crate::error::{Error, Result};

/// Tolerance on `|u| - 1` accepted by [`sharp`].
pub const UNIT_TOLERANCE: f64 = 1e-10;

/// Kulkarni–Nomizu product of two real symmetric forms:
/// `(phi . psi)(x1,x2,x3,x4) = phi13 psi24 + phi24 psi13 - phi14 psi23 - phi23 psi14`.
pub fn kn_scalar(phi: &DMatrix<f64>, psi: &DMatrix<f64>) -> Result<QuadTensor> {
    let n = phi.nrows();
    if !phi.is_square() || psi.nrows() != n || psi.ncols() != n {
        return Err(Error::Dimension(format!(
            "kn_scalar of {}x{} and {}x{}",
            phi.nrows(),
            phi.ncols(),
            psi.nrows(),
            psi.ncols()
        )));
    }
    Ok(QuadTensor::from_fn(n, |i, j, k, l| {
        phi[(i, k)] * psi[(j, l)] + phi[(j, l)] * psi[(i, k)] - phi[(i, l)] * psi[(j, k)] - phi[(j, k)] * psi[(i, l)]
    }))
}

/// `g . g` for the Euclidean metric on `R^n`.
pub fn metric_kn(n: usize) -> QuadTensor {
    let g = DMatrix::<f64>::identity(n, n);
    kn_scalar(&g, &g).expect("identity is square")
}

/// Kulkarni–Nomizu product of `W`-valued forms, pairing values through the
/// inner product of `W`.
pub fn kn_vector(beta: &BilinearForm, gamma: &BilinearForm) -> Result<QuadTensor> {
    let n = beta.n();
    if gamma.n() != n || gamma.p() != beta.p() {
        return Err(Error::Dimension(format!(
            "kn_vector of (n={}, p={}) and (n={}, p={})",
            n,
            beta.p(),
            gamma.n(),
            gamma.p()
        )));
    }
    // pairs[(a, b)] = <beta(e_a), gamma(e_b)> for flattened index pairs a, b.
    let nn = n * n;
    let mut pairs = DMatrix::<f64>::zeros(nn, nn);
    for (b, c) in beta.components().iter().zip(gamma.components()) {
        let vb = DVector::from_iterator(nn, (0..nn).map(|a| b[(a / n, a % n)]));
        let vc = DVector::from_iterator(nn, (0..nn).map(|a| c[(a / n, a % n)]));
        pairs.ger(1.0, &vb, &vc, 1.0);
    }
    let at = |r: usize, s: usize, t: usize, u: usize| pairs[(r * n + s, t * n + u)];
    Ok(QuadTensor::from_fn(n, |i, j, k, l| at(i, k, j, l) + at(j, l, i, k) - at(i, l, j, k) - at(j, k, i, l)))
}

/// `true` iff `|beta . beta| <= tol * max(1, |beta|^2)`.
pub fn is_flat(beta: &BilinearForm, tol: f64) -> bool {
    let kn = kn_vector(beta, beta).expect("a form always matches itself");
    kn.norm() <= tol * beta.norm_squared().max(1.0)
}

/// Kernel of the stacked `pn x n` matrix `[B_1; ...; B_p]`, treating
/// singular values at or below `tol * sigma_max` as zero.
pub fn nullity_space(beta: &BilinearForm, tol: f64) -> Subspace {
    kernel_of_stack(beta.components(), beta.n(), |sigma_max| tol * sigma_max)
}

/// Kernel of the stacked blocks; `cutoff` maps the largest singular value to
/// the threshold at or below which a singular value counts as zero.
pub(crate) fn kernel_of_stack(blocks: &[DMatrix<f64>], n: usize, cutoff: impl Fn(f64) -> f64) -> Subspace {
    let rows = blocks.len() * n;
    let mut stack = DMatrix::<f64>::zeros(rows.max(n), n);
    for (a, b) in blocks.iter().enumerate() {
        stack.view_mut((a * n, 0), (n, n)).copy_from(b);
    }
    let svd = stack.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = cutoff(sigma_max);
    let mut basis: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(r, _)| v_t.row(r).transpose().into_owned())
        .collect();
    orthonormalize(&mut basis);
    Subspace::new(n, basis).expect("right singular vectors are orthonormal")
}

/// Modified Gram–Schmidt in place; drops numerically dependent vectors.
pub(crate) fn orthonormalize(vectors: &mut Vec<DVector<f64>>) {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors.drain(..) {
        let mut w = v;
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let norm = w.norm();
        if norm > 1e-8 {
            out.push(w / norm);
        }
    }
    *vectors = out;
}

/// `sum_a u_a B_a` for any `u` in `W` (no normalization check).
pub fn contract(beta: &BilinearForm, u: &DVector<f64>) -> Result<DMatrix<f64>> {
    if u.len() != beta.p() {
        return Err(Error::Dimension(format!("direction has length {}, p = {}", u.len(), beta.p())));
    }
    let n = beta.n();
    let mut m = DMatrix::zeros(n, n);
    for (c, &w) in beta.components().iter().zip(u.iter()) {
        m += c * w;
    }
    Ok(m)
}

/// `beta#(u)`: the selfadjoint operator with `<beta#(u) x, y> = <beta(x, y), u>`.
pub fn sharp(beta: &BilinearForm, u: &DVector<f64>) -> Result<SymmetricOperator> {
    let norm = u.norm();
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::Normalization(norm));
    }
    SymmetricOperator::new(contract(beta, u)?)
}

/// Number of eigenvalues below `-tol * max(1, |S|)`; eigenvalues within that
/// band of zero count as zero.
pub fn index_of(op: &SymmetricOperator, tol: f64) -> usize {
    index_of_eigenvalues(&op.eigenvalues(), tol * op.norm().max(1.0))
}

pub(crate) fn index_of_eigenvalues(eigenvalues: &[f64], threshold: f64) -> usize {
    eigenvalues.iter().filter(|&&l| l < -threshold).count()
}

/// Algebraic scalar curvature `sum_{i,j} <beta_ii, beta_jj> - |beta_ij|^2`,
/// which equals `(1/2) sum_{i,j} (beta . beta)(e_i, e_j, e_i, e_j)`.
pub fn sc(beta: &BilinearForm) -> f64 {
    beta.components().iter().map(|c| c.trace().powi(2) - c.norm_squared()).sum()
}

/// Gauss equation `R = -(1/2) alpha . alpha`.
pub fn gauss_curvature(alpha: &BilinearForm) -> QuadTensor {
    &kn_vector(alpha, alpha).expect("a form always matches itself") * -0.5
}

/// `R1 = -(1/2) g . g`, i.e. `R1(i,j,k,l) = -(d_ik d_jl - d_il d_jk)`.
pub fn r1_tensor(n: usize) -> Result<QuadTensor> {
    if n < 2 {
        return Err(Error::Dimension(format!("r1_tensor needs n >= 2, got {n}")));
    }
    Ok(&metric_kn(n) * -0.5)
}

/// `scal(R) = sum_{i,j} R(e_i, e_j, e_j, e_i)`, so the unit sphere has `+n(n-1)`.
pub fn scal(r: &QuadTensor) -> f64 {
    let n = r.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += r.get(i, j, j, i);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn xi(p: usize, a: usize) -> DVector<f64> {
        let mut v = DVector::zeros(p);
        v[a] = 1.0;
        v
    }

    fn rank_one(n: usize, i: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        m[(i, i)] = 1.0;
        m
    }

    #[test]
    fn kn_scalar_of_metric_in_dimension_two() {
        let t = metric_kn(2);
        assert_eq!(t.get(0, 1, 0, 1), 2.0);
        assert_eq!(t.get(0, 1, 1, 0), -2.0);
        for k in 0..2 {
            for l in 0..2 {
                assert_eq!(t.get(0, 0, k, l), 0.0);
            }
        }
    }

    #[test]
    fn kn_scalar_with_zero_and_mismatch() {
        let phi = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, 3.0, 1.0, 0.0, 1.0, -1.0]);
        assert_eq!(kn_scalar(&phi, &DMatrix::zeros(3, 3)).unwrap().norm(), 0.0);
        assert!(matches!(kn_scalar(&phi, &DMatrix::zeros(2, 2)), Err(Error::Dimension(_))));
    }

    #[test]
    fn metric_kn_norm_matches_component_count() {
        // Brute-force count: 2 n (n-1) nonzero entries of magnitude 2.
        for n in 2..=6 {
            let t = metric_kn(n);
            let mut count = 0;
            for v in t.as_slice() {
                if *v != 0.0 {
                    assert_eq!(v.abs(), 2.0);
                    count += 1;
                }
            }
            assert_eq!(count, 2 * n * (n - 1));
            assert_eq!(t.norm_squared(), (8 * n * (n - 1)) as f64);
        }
        assert_eq!(metric_kn(4).norm_squared(), 96.0);
    }

    #[test]
    fn kn_vector_reduces_to_scalar_case() {
        let beta = BilinearForm::umbilic(4, 1.0, &xi(2, 0));
        assert_eq!(kn_vector(&beta, &beta).unwrap(), metric_kn(4));
    }

    #[test]
    fn rank_one_forms_are_flat() {
        let beta = BilinearForm::new(vec![rank_one(4, 0), DMatrix::zeros(4, 4)]).unwrap();
        assert_eq!(kn_vector(&beta, &beta).unwrap().norm(), 0.0);
        assert!(is_flat(&beta, 1e-12));
        assert!(!is_flat(&BilinearForm::umbilic(4, 1.0, &xi(2, 0)), 1e-10));
    }

    #[test]
    fn diagonal_orthogonal_values_are_flat() {
        let v = vec![
            DVector::from_vec(vec![1.0, 1.0]),
            DVector::from_vec(vec![2.0, -2.0]),
            DVector::zeros(2),
            DVector::zeros(2),
        ];
        let beta = BilinearForm::from_diagonal(&v).unwrap();
        assert!(is_flat(&beta, 1e-12));
        assert_eq!(sc(&beta), 0.0);
        assert_eq!(nullity_space(&beta, 1e-10).dim(), 2);
    }

    #[test]
    fn nullity_of_rank_one_and_umbilic() {
        let beta = BilinearForm::new(vec![rank_one(4, 0), DMatrix::zeros(4, 4)]).unwrap();
        let null = nullity_space(&beta, 1e-10);
        assert_eq!(null.dim(), 3);
        for b in null.basis() {
            assert_abs_diff_eq!(b[0], 0.0, epsilon = 1e-14);
        }
        assert_eq!(nullity_space(&BilinearForm::umbilic(4, 1.0, &xi(2, 0)), 1e-10).dim(), 0);
        assert_eq!(nullity_space(&BilinearForm::zeros(3, 2), 1e-10).dim(), 3);
    }

    #[test]
    fn sharp_picks_components_and_checks_norm() {
        let b1 = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]);
        let b2 = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 5.0]);
        let beta = BilinearForm::new(vec![b1.clone(), b2.clone()]).unwrap();
        let single = BilinearForm::new(vec![b1.clone()]).unwrap();
        assert_eq!(sharp(&single, &xi(1, 0)).unwrap().matrix(), &b1);
        let th: f64 = 0.3;
        let u = DVector::from_vec(vec![th.cos(), th.sin()]);
        let s = sharp(&beta, &u).unwrap();
        assert!((s.matrix() - (&b1 * th.cos() + &b2 * th.sin())).norm() < 1e-15);
        assert_eq!(sharp(&beta, &(-&u)).unwrap().matrix(), &(-s.matrix()));
        assert!(matches!(sharp(&beta, &(&u * 2.0)), Err(Error::Normalization(_))));
    }

    #[test]
    fn index_counts_negative_eigenvalues() {
        let d = SymmetricOperator::new(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, -1.0, 2.0]))).unwrap();
        assert_eq!(index_of(&d, 1e-12), 2);
        assert_eq!(index_of(&SymmetricOperator::new(DMatrix::zeros(3, 3)).unwrap(), 1e-12), 0);
        let tiny = SymmetricOperator::new(DMatrix::from_diagonal(&DVector::from_vec(vec![-1e-14, 1.0]))).unwrap();
        assert_eq!(index_of(&tiny, 1e-12), 0);
    }

    #[test]
    fn sc_closed_forms() {
        let beta = BilinearForm::umbilic(4, 1.0, &xi(2, 0));
        assert_eq!(sc(&beta), 12.0);
        for n in 2..=7 {
            for l in 0..=n {
                let diag: Vec<f64> = (0..n).map(|i| if i < l { 1.0 } else { -1.0 }).collect();
                let phi = DMatrix::from_diagonal(&DVector::from_vec(diag));
                let b = BilinearForm::from_scalar(&phi, &xi(1, 0)).unwrap();
                let expected = ((n as i64 - 2 * l as i64).pow(2) - n as i64) as f64;
                assert_eq!(sc(&b), expected);
                // brute force through the tensor definition
                let kn = kn_vector(&b, &b).unwrap();
                let mut half = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        half += kn.get(i, j, i, j);
                    }
                }
                assert_abs_diff_eq!(0.5 * half, expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn gauss_curvature_of_unit_sphere_data() {
        let alpha = BilinearForm::umbilic(4, 1.0, &xi(2, 0));
        let r = gauss_curvature(&alpha);
        assert_eq!(r.get(0, 1, 1, 0), 1.0);
        assert_eq!(scal(&r), 12.0);
        assert_eq!(r, r1_tensor(4).unwrap());
        assert_eq!(gauss_curvature(&BilinearForm::zeros(3, 2)).norm(), 0.0);
    }

    #[test]
    fn r1_tensor_values() {
        assert_eq!(r1_tensor(2).unwrap().get(0, 1, 0, 1), -1.0);
        for n in 2..=6 {
            let r1 = r1_tensor(n).unwrap();
            let nn = (n * (n - 1)) as f64;
            // all n^4 components: 2 n (n-1) entries of magnitude one
            assert_eq!(r1.norm_squared(), 2.0 * nn);
            assert_eq!(scal(&r1), nn);
        }
        assert!(r1_tensor(1).is_err());
        assert_eq!(scal(&QuadTensor::zeros(3)), 0.0);
    }
}
