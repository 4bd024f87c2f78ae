//! Height functions `h_u(x) = <f(x), u>` on catalog immersions: analytic
//! critical points, Morse counts, and the integral identities relating them
//! to the total curvature of the unit normal bundle.

use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{unit_normal_bundle_integral, CatalogImmersion, CatalogKind, CurvatureRules};
use crate::quadrature::sphere_rule;
use crate::reduce::pairwise_sum;
use crate::report::{Provenance, VerificationReport};
use crate::tensor::{index_of_eigenvalues, UNIT_TOLERANCE};
use crate::topology::poincare;

/// Factor projections shorter than this make a direction non-generic.
pub const GENERICITY_TOLERANCE: f64 = 1e-9;
const PERTURBATION: f64 = 1e-7;
const RELATIVE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    /// Factor coordinates, as used by the manifold rules.
    pub point: Vec<f64>,
    pub index: usize,
    pub height: f64,
    /// Eigenvalues of the Hessian of `h_u` in an orthonormal frame.
    pub hessian: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorseProfile {
    pub direction: Vec<f64>,
    pub critical_points: Vec<CriticalPoint>,
    /// `mu_0 .. mu_n`.
    pub counts: Vec<usize>,
    /// Whether `direction` was nudged off a non-generic input.
    pub perturbed: bool,
}

impl MorseProfile {
    pub fn alternating_sum(&self) -> i64 {
        self.counts.iter().enumerate().map(|(i, &c)| if i % 2 == 0 { c as i64 } else { -(c as i64) }).sum()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Critical points of `h_u`. On a sphere factor of radius `r` the height
/// `<x_a, u_a>` is critical at `x_a = +-r u_a/|u_a|` with Hessian
/// `-+|u_a|/r`, so the maximum contributes index `n_a`.
pub fn height_critical_points(imm: &CatalogImmersion, u: &[f64]) -> Result<MorseProfile> {
    if u.len() != imm.ambient_dim() {
        return Err(Error::Dimension(format!("direction has length {}, ambient dim {}", u.len(), imm.ambient_dim())));
    }
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::Normalization(norm));
    }
    let factors = imm.factors();
    let mut blocks = Vec::with_capacity(factors.len());
    let mut offset = 0;
    for &(d, r) in &factors {
        let ua = &u[offset..offset + d + 1];
        let len = ua.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len < GENERICITY_TOLERANCE {
            return Err(Error::Genericity(format!("projection onto a sphere factor has length {len:e}")));
        }
        blocks.push((d, r, ua, len));
        offset += d + 1;
    }

    let mut critical_points = Vec::with_capacity(1 << blocks.len());
    let mut counts = vec![0usize; imm.n() + 1];
    for mask in 0..(1usize << blocks.len()) {
        let mut point = Vec::with_capacity(imm.point_len());
        let (mut index, mut height, mut hessian) = (0, 0.0, Vec::with_capacity(imm.n()));
        for (a, &(d, r, ua, len)) in blocks.iter().enumerate() {
            let s = if mask & (1 << a) != 0 { 1.0 } else { -1.0 };
            point.extend(ua.iter().map(|v| s * r * v / len));
            height += s * r * len;
            hessian.extend(std::iter::repeat_n(-s * len / r, d));
            if s > 0.0 {
                index += d;
            }
        }
        counts[index] += 1;
        critical_points.push(CriticalPoint { point, index, height, hessian });
    }
    Ok(MorseProfile { direction: u.to_vec(), critical_points, counts, perturbed: false })
}

fn fixed_direction(dim: usize, attempt: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + attempt);
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

/// [`height_critical_points`], nudging non-generic directions by `1e-7`
/// along fixed pseudo-random directions until they become generic.
pub fn generic_profile(imm: &CatalogImmersion, u: &[f64]) -> Result<MorseProfile> {
    let mut attempt = 0;
    let mut current = u.to_vec();
    loop {
        match height_critical_points(imm, &current) {
            Ok(mut profile) => {
                profile.perturbed = attempt > 0;
                return Ok(profile);
            }
            Err(Error::Genericity(msg)) if attempt < 16 => {
                let w = fixed_direction(u.len(), attempt);
                let moved: Vec<f64> = current.iter().zip(&w).map(|(a, b)| a + PERTURBATION * b).collect();
                current = normalized(&moved);
                attempt += 1;
                if attempt == 16 {
                    return Err(Error::Genericity(msg));
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// `count` unit directions in `R^{n+p}` from a seeded stream.
pub fn sample_directions(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| normalized(&(0..dim).map(|_| rng.sample(StandardNormal)).collect::<Vec<f64>>()))
        .collect()
}

/// Index of the Hessian of `h_u` at `cp`, assembled by central differences
/// along geodesics of each sphere factor.
pub fn numerical_hessian_index(imm: &CatalogImmersion, u: &[f64], cp: &CriticalPoint) -> Result<(usize, Vec<f64>)> {
    let frame = imm.tangent_frame(&cp.point)?;
    let factors = imm.factors();
    let r_min = factors.iter().map(|f| f.1).fold(f64::INFINITY, f64::min);
    let step = 1e-3 * r_min;
    let ud = DVector::from_column_slice(u);
    let height = |v: &DVector<f64>| -> f64 {
        // exponential map factor by factor
        let mut y = Vec::with_capacity(cp.point.len());
        let mut offset = 0;
        for &(d, r) in &factors {
            let x = &cp.point[offset..offset + d + 1];
            let va = v.rows(offset, d + 1);
            let len = va.norm();
            if len == 0.0 {
                y.extend_from_slice(x);
            } else {
                let (c, s) = ((len / r).cos(), r * (len / r).sin() / len);
                y.extend(x.iter().zip(va.iter()).map(|(xi, vi)| c * xi + s * vi));
            }
            offset += d + 1;
        }
        imm.embed(&y).expect("same layout").dot(&ud)
    };
    let n = frame.len();
    let mut h = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let (a, b) = (&frame[i] * step, &frame[j] * step);
            let v = (height(&(&a + &b)) - height(&(&a - &b)) - height(&(&b - &a)) + height(&(-&a - &b)))
                / (4.0 * step * step);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    let scale = ev.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    Ok((index_of_eigenvalues(&ev, 1e-10 * scale.max(1.0)), ev))
}

/// `int_{S^{n+p-1}} mu(u) dS_u`, for one index or for the total count.
pub fn direction_integral(imm: &CatalogImmersion, rules: &CurvatureRules, index: Option<usize>) -> Result<f64> {
    let rule = sphere_rule(imm.ambient_dim() - 1, rules.direction_level)?;
    let terms: Vec<f64> = rule
        .nodes()
        .zip(rule.weights())
        .map(|(u, w)| {
            generic_profile(imm, u).map(|p| {
                let c = match index {
                    Some(i) => p.counts.get(i).copied().unwrap_or(0),
                    None => p.total(),
                };
                w * c as f64
            })
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&terms))
}

/// Both sides of an integral identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentitySides {
    /// Unit normal bundle integral of `|det A_xi|`.
    pub lhs: f64,
    /// Direction-sphere integral of Morse counts.
    pub rhs: f64,
}

impl IdentitySides {
    pub fn relative_discrepancy(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.lhs.abs().max(self.rhs.abs()).max(f64::MIN_POSITIVE)
    }
}

/// `int_{UN_f} |det A_xi| dSigma = sum_i int mu_i(u) dS_u`.
pub fn chern_lashof(imm: &CatalogImmersion, rules: &CurvatureRules) -> Result<IdentitySides> {
    Ok(IdentitySides { lhs: unit_normal_bundle_integral(imm, rules, None)?, rhs: direction_integral(imm, rules, None)? })
}

/// The index-`i` slice of [`chern_lashof`].
pub fn shiohama_xu(imm: &CatalogImmersion, i: usize, rules: &CurvatureRules) -> Result<IdentitySides> {
    if i > imm.n() {
        return Err(Error::Dimension(format!("index {i} exceeds n = {}", imm.n())));
    }
    Ok(IdentitySides { lhs: unit_normal_bundle_integral(imm, rules, Some(i))?, rhs: direction_integral(imm, rules, Some(i))? })
}

fn describe(imm: &CatalogImmersion, report: &mut VerificationReport, rules: &CurvatureRules) {
    match imm.kind() {
        CatalogKind::ProductOfSpheres { n1, r1, n2, r2 } => {
            report.input("manifold", format!("S^{n1}({r1}) x S^{n2}({r2})"));
        }
        CatalogKind::SphereInCodim { n, r, p } => {
            report.input("manifold", format!("S^{n}({r}) in codimension {p}"));
        }
    }
    report
        .input("manifold_level", rules.manifold_level)
        .input("fiber_nodes", rules.fiber_nodes)
        .input("fiber_level", rules.fiber_level)
        .input("direction_level", rules.direction_level);
}

fn identity_report(suite: &str, imm: &CatalogImmersion, rules: &CurvatureRules, sides: IdentitySides) -> VerificationReport {
    let mut report = VerificationReport::new(suite);
    describe(imm, &mut report, rules);
    report
        .quantity("lhs", sides.lhs, Some(RELATIVE_TOLERANCE), Provenance::Quadrature)
        .quantity("rhs", sides.rhs, Some(RELATIVE_TOLERANCE), Provenance::Quadrature)
        .quantity("relative_discrepancy", sides.relative_discrepancy(), None, Provenance::Quadrature);
    report
}

pub fn chern_lashof_check(imm: &CatalogImmersion, rules: &CurvatureRules) -> Result<VerificationReport> {
    let clock = Instant::now();
    let sides = chern_lashof(imm, rules)?;
    let mut report = identity_report("chern-lashof", imm, rules, sides);
    report.check_relative("lhs_equals_rhs", sides.lhs, sides.rhs, RELATIVE_TOLERANCE);
    report.wall_time = clock.elapsed().as_secs_f64();
    Ok(report)
}

/// Relative agreement when the sides are of order one, absolute `1e-3`
/// when both vanish.
pub fn shiohama_xu_check(imm: &CatalogImmersion, i: usize, rules: &CurvatureRules) -> Result<VerificationReport> {
    let clock = Instant::now();
    let sides = shiohama_xu(imm, i, rules)?;
    let mut report = identity_report("shiohama-xu", imm, rules, sides);
    report.input("index", i);
    if sides.lhs.abs().max(sides.rhs.abs()) < RELATIVE_TOLERANCE {
        report.check_absolute("both_sides_vanish", sides.lhs, sides.rhs, RELATIVE_TOLERANCE);
    } else {
        report.check_relative("lhs_equals_rhs", sides.lhs, sides.rhs, RELATIVE_TOLERANCE);
    }
    report.wall_time = clock.elapsed().as_secs_f64();
    Ok(report)
}

/// `mu_i(u) >= beta_i` and `sum (-1)^i mu_i(u) = chi` over `count` seeded
/// directions.
pub fn morse_inequality_check(imm: &CatalogImmersion, count: usize, seed: u64) -> Result<VerificationReport> {
    let clock = Instant::now();
    let poly = poincare(imm);
    let chi = poly.euler_characteristic();
    let mut report = VerificationReport::new("morse");
    describe(imm, &mut report, &CurvatureRules::default());
    report.input("directions", count).input("seed", seed);
    let (mut weak_ok, mut euler_ok, mut perturbed) = (true, true, 0usize);
    let mut first_counts = None;
    for u in sample_directions(imm.ambient_dim(), count, seed) {
        let profile = generic_profile(imm, &u)?;
        perturbed += profile.perturbed as usize;
        weak_ok &= (0..=imm.n()).all(|i| profile.counts[i] as u64 >= poly.betti(i));
        euler_ok &= profile.alternating_sum() == chi;
        first_counts.get_or_insert_with(|| profile.counts.clone());
    }
    report
        .quantity("euler_characteristic", chi as f64, None, Provenance::Exact)
        .quantity("betti_total", poly.total() as f64, None, Provenance::Exact)
        .quantity("perturbed_directions", perturbed as f64, None, Provenance::Exact);
    if let Some(c) = first_counts {
        report.input("first_direction_counts", format!("{c:?}"));
    }
    report.check("weak_morse_inequalities", weak_ok, "mu_i(u) >= beta_i at every sampled direction");
    report.check("alternating_sum_is_euler", euler_ok, format!("sum (-1)^i mu_i(u) = {chi} at every sampled direction"));
    report.wall_time = clock.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_counts() {
        let imm = CatalogImmersion::product_of_spheres(2, 1.0, 2, 1.0).unwrap();
        for u in sample_directions(6, 8, 3) {
            let p = height_critical_points(&imm, &u).unwrap();
            assert_eq!(p.counts, vec![1, 0, 2, 0, 1]);
            assert_eq!(p.alternating_sum(), 4);
            for cp in &p.critical_points {
                let (idx, ev) = numerical_hessian_index(&imm, &u, cp).unwrap();
                assert_eq!(idx, cp.index);
                assert!(ev.iter().all(|l| l.abs() > 1e-10));
            }
        }
    }

    #[test]
    fn sphere_counts_and_genericity() {
        let imm = CatalogImmersion::sphere_in_codim(4, 1.0, 2).unwrap();
        let mut u = vec![0.0; 6];
        u[5] = 1.0;
        assert!(matches!(height_critical_points(&imm, &u), Err(Error::Genericity(_))));
        let p = generic_profile(&imm, &u).unwrap();
        assert!(p.perturbed);
        assert_eq!(p.counts, vec![1, 0, 0, 0, 1]);
    }

    #[test]
    fn inequality_report_passes() {
        let imm = CatalogImmersion::product_of_spheres(2, 1.0, 2, 1.0).unwrap();
        let r = morse_inequality_check(&imm, 64, 11).unwrap();
        assert!(!r.failed());
    }
}
