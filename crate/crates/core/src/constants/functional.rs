use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_region, SphereRule};
use crate::tensor::{index_of_eigenvalues, kn_vector, metric_kn, sc, BilinearForm};

/// Relative eigenvalue threshold used for index counting inside regions.
pub const REGION_TOLERANCE: f64 = 1e-9;

/// Which normalization the ratio uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// `phi_k` with fixed `k`; the region is `Omega` for `k > 0`, the sphere otherwise.
    FixedK { k: f64 },
    /// `phi_scal`; the region is `Omega` for `sc > 0`, the sphere otherwise.
    ScalNormalized,
}

impl Mode {
    /// `true` when the ratio is invariant under `beta -> t beta`.
    pub fn is_scale_invariant(&self) -> bool {
        match self {
            Mode::FixedK { k } => *k == 0.0,
            Mode::ScalNormalized => true,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Mode::FixedK { k } => format!("fixed-k({k})"),
            Mode::ScalNormalized => "scal-normalized".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    OmegaSet,
    FullSphere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub n: usize,
    pub p: usize,
    /// Inclusive index window, present for `OmegaSet`.
    pub window: Option<(usize, usize)>,
}

/// A region of the fiber sphere `S^{p-1}` attached to a form.
#[derive(Debug, Clone)]
pub struct Region {
    spec: RegionSpec,
    beta: BilinearForm,
    tol: f64,
}

pub(crate) fn sharp_spectrum(beta: &BilinearForm, u: &[f64]) -> Vec<f64> {
    let n = beta.n();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (c, &w) in beta.components().iter().zip(u) {
        m += c * w;
    }
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

fn frobenius(ev: &[f64]) -> f64 {
    ev.iter().map(|l| l * l).sum::<f64>().sqrt()
}

impl Region {
    pub fn spec(&self) -> RegionSpec {
        self.spec
    }

    pub(crate) fn admits(&self, eigenvalues: &[f64]) -> bool {
        match self.spec.window {
            None => true,
            Some((lo, hi)) => {
                let idx = index_of_eigenvalues(eigenvalues, self.tol * frobenius(eigenvalues).max(1.0));
                (lo..=hi).contains(&idx)
            }
        }
    }

    pub fn contains(&self, u: &[f64]) -> bool {
        match self.spec.kind {
            RegionKind::FullSphere => true,
            RegionKind::OmegaSet => self.admits(&sharp_spectrum(&self.beta, u)),
        }
    }
}

/// `|beta . beta - k g . g|^2`.
pub fn phi_k(beta: &BilinearForm, k: f64) -> f64 {
    let bb = kn_vector(beta, beta).expect("a form always matches itself");
    (&bb - &(&metric_kn(beta.n()) * k)).norm_squared()
}

/// `phi_k` at `k = sc / (n (n - 1))`, the projection residual of `beta . beta`
/// off the line spanned by `g . g`.
pub fn phi_scal(beta: &BilinearForm) -> f64 {
    let n = beta.n() as f64;
    phi_k(beta, sc(beta) / (n * (n - 1.0)))
}

fn omega_spec(n: usize, p: usize) -> Result<RegionSpec> {
    if p < 2 || 2 * p > n {
        return Err(Error::Codimension { n, p });
    }
    Ok(RegionSpec { kind: RegionKind::OmegaSet, n, p, window: Some((p, n - p)) })
}

/// Selects the region for `mode`. `Omega(beta)` is the set of unit `u` with
/// `p <= index(beta#(u)) <= n - p`.
pub fn region_of(beta: &BilinearForm, mode: Mode, tol: f64) -> Result<Region> {
    let (n, p) = (beta.n(), beta.p());
    let use_omega = match mode {
        Mode::FixedK { k } => k > 0.0,
        Mode::ScalNormalized => sc(beta) > 0.0,
    };
    let spec = if use_omega {
        omega_spec(n, p)?
    } else {
        RegionSpec { kind: RegionKind::FullSphere, n, p, window: None }
    };
    Ok(Region { spec, beta: beta.clone(), tol })
}

/// The `Omega` region regardless of mode.
pub(crate) fn omega_region(beta: &BilinearForm, tol: f64) -> Result<Region> {
    Ok(Region { spec: omega_spec(beta.n(), beta.p())?, beta: beta.clone(), tol })
}

/// `int_region |det beta#(u)| dS_u` over the fiber rule.
pub fn psi(beta: &BilinearForm, region: &Region, rule: &SphereRule) -> Result<f64> {
    if rule.dim() + 1 != beta.p() {
        return Err(Error::Dimension(format!("rule on S^{} for p = {}", rule.dim(), beta.p())));
    }
    Ok(integrate_region(
        rule,
        |u| {
            let ev = sharp_spectrum(beta, u);
            if region.admits(&ev) {
                ev.iter().product::<f64>().abs()
            } else {
                0.0
            }
        },
        |_| true,
    ))
}

/// `phi / psi^{4/n}` on the region selected by `mode`, subject to
/// `|sc| >= delta^2 |beta|^2`.
pub fn omega_ratio(beta: &BilinearForm, mode: Mode, delta: f64, rule: &SphereRule) -> Result<f64> {
    let bound = delta * delta * beta.norm_squared();
    let s = sc(beta);
    if s.abs() < bound * (1.0 - 1e-12) {
        return Err(Error::Constraint { sc: s, bound });
    }
    let region = region_of(beta, mode, REGION_TOLERANCE)?;
    let psi_value = psi(beta, &region, rule)?;
    if !(psi_value > 0.0) {
        return Err(Error::DegenerateRegion);
    }
    let phi = match mode {
        Mode::FixedK { k } => phi_k(beta, k),
        Mode::ScalNormalized => phi_scal(beta),
    };
    Ok(phi / psi_value.powf(4.0 / beta.n() as f64))
}

pub(crate) fn unit(p: usize, a: usize) -> DVector<f64> {
    let mut v = DVector::zeros(p);
    v[a] = 1.0;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::circle_rule;
    use std::f64::consts::PI;

    fn s2xs2() -> BilinearForm {
        let b1 = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -1.0, 0.0, 0.0]));
        let b2 = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 0.0, -1.0, -1.0]));
        BilinearForm::new(vec![b1, b2]).unwrap()
    }

    #[test]
    fn phi_values() {
        let g = BilinearForm::umbilic(4, 1.0, &unit(2, 0));
        assert!(phi_k(&g, 1.0) < 1e-24);
        assert!((phi_k(&BilinearForm::zeros(4, 2), 1.0) - 96.0).abs() < 1e-12);
        assert!(phi_scal(&g.scaled(2.7)) < 1e-20);
        assert!((phi_scal(&s2xs2()) - 64.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn product_form_region_and_ratio() {
        let beta = s2xs2();
        let region = region_of(&beta, Mode::ScalNormalized, REGION_TOLERANCE).unwrap();
        assert_eq!(region.spec().kind, RegionKind::OmegaSet);
        let a = 0.3_f64;
        assert!(region.contains(&[a.cos(), -a.sin()]));
        assert!(!region.contains(&[a.cos(), a.sin()]));
        let rule = circle_rule(256).unwrap();
        let v = psi(&beta, &region, &rule).unwrap();
        assert!((v - PI / 8.0).abs() < 1e-6);
        let r = omega_ratio(&beta, Mode::ScalNormalized, 0.5, &rule).unwrap();
        assert!((r - 512.0 / (3.0 * PI)).abs() < 1e-5);
    }

    #[test]
    fn region_selection_and_errors() {
        let g = BilinearForm::umbilic(4, 1.0, &unit(2, 0));
        let rule = circle_rule(64).unwrap();
        let full = region_of(&g, Mode::FixedK { k: -1.0 }, REGION_TOLERANCE).unwrap();
        assert_eq!(full.spec().kind, RegionKind::FullSphere);
        let om = region_of(&g, Mode::ScalNormalized, REGION_TOLERANCE).unwrap();
        assert_eq!(psi(&g, &om, &rule).unwrap(), 0.0);
        assert!(matches!(omega_ratio(&g, Mode::ScalNormalized, 0.5, &rule), Err(Error::DegenerateRegion)));
        let wide = BilinearForm::umbilic(4, 1.0, &unit(3, 0));
        assert!(matches!(region_of(&wide, Mode::FixedK { k: 1.0 }, 1e-9), Err(Error::Codimension { .. })));
        let mut e = DMatrix::zeros(4, 4);
        e[(0, 1)] = 1.0;
        e[(1, 0)] = 1.0;
        let off = BilinearForm::from_scalar(&e, &unit(2, 0)).unwrap();
        assert!(matches!(omega_ratio(&off, Mode::ScalNormalized, 1.1, &rule), Err(Error::Constraint { .. })));
    }
}
