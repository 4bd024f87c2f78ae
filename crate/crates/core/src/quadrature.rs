//! Positive-weight product quadrature on round spheres, products of spheres
//! and unit normal bundles.
//!
//! `S^d` is parametrized by hyperspherical angles `theta_1..theta_{d-1}` and an
//! azimuth `phi`. In `t_j = cos theta_j` the volume element of polar angle `j`
//! is `(1 - t^2)^{(d-j-1)/2} dt`, so each polar factor uses Gauss–Gegenbauer
//! nodes (Gauss–Legendre for the last one) and the azimuth uses the equispaced
//! trapezoid rule. All weights are strictly positive.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::reduce::{pairwise_sum, par_map_sum};

/// Volume of the unit sphere `S^d`, `2 pi^{(d+1)/2} / Gamma((d+1)/2)`.
pub fn sphere_volume(d: usize) -> f64 {
    match d {
        0 => 2.0,
        1 => 2.0 * std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI / (d as f64 - 1.0) * sphere_volume(d - 2),
    }
}

/// `int_0^pi sin^k(theta) d theta`.
fn wallis(k: usize) -> f64 {
    match k {
        0 => std::f64::consts::PI,
        1 => 2.0,
        _ => (k as f64 - 1.0) / k as f64 * wallis(k - 2),
    }
}

/// Gauss rule for the weight `(1 - t^2)^{(k-1)/2}` on `[-1, 1]` (Golub–Welsch).
/// `k = 1` is Gauss–Legendre.
fn gegenbauer_rule(points: usize, k: usize) -> (Vec<f64>, Vec<f64>) {
    let a = (k as f64 - 1.0) / 2.0;
    let mut jacobi = DMatrix::<f64>::zeros(points, points);
    for i in 1..points {
        let kk = i as f64;
        let b = kk * (kk + 2.0 * a) / (4.0 * (kk + a).powi(2) - 1.0);
        jacobi[(i, i - 1)] = b.sqrt();
        jacobi[(i - 1, i)] = b.sqrt();
    }
    let eig = jacobi.symmetric_eigen();
    let mu0 = wallis(k);
    let mut pairs: Vec<(f64, f64)> = (0..points)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs.into_iter().unzip()
}

/// Nodes and weights on the unit sphere `S^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    d: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereRule {
    pub fn dim(&self) -> usize {
        self.d
    }

    /// Ambient dimension `d + 1` of each node.
    pub fn stride(&self) -> usize {
        self.d + 1
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let s = self.stride();
        &self.nodes[i * s..(i + 1) * s]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.stride())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// The two-point rule on `S^0 = {-1, +1}`.
    pub fn zero_sphere() -> Self {
        Self { d: 0, nodes: vec![-1.0, 1.0], weights: vec![1.0, 1.0] }
    }
}

/// `n` equispaced nodes at half-step offsets `theta_k = 2 pi (k + 1/2) / n`,
/// weights `2 pi / n`. Exact for trigonometric polynomials of degree `< n`.
pub fn circle_rule(n: usize) -> Result<SphereRule> {
    if n < 4 {
        return Err(Error::Resolution(format!("circle rule needs N >= 4, got {n}")));
    }
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let mut nodes = Vec::with_capacity(2 * n);
    for k in 0..n {
        let th = step * (k as f64 + 0.5);
        nodes.push(th.cos());
        nodes.push(th.sin());
    }
    Ok(SphereRule { d: 1, nodes, weights: vec![step; n] })
}

/// Polar Gauss points per angle at a given refinement level.
pub fn polar_points(level: usize) -> usize {
    level + 2
}

/// Tensorized rule on `S^d`; `level >= 1` sets `level + 2` Gauss points per
/// polar angle and `2 (level + 2)` azimuth points.
pub fn sphere_rule(d: usize, level: usize) -> Result<SphereRule> {
    if d == 0 {
        return Ok(SphereRule::zero_sphere());
    }
    if level == 0 {
        return Err(Error::Resolution("sphere rule needs level >= 1".into()));
    }
    let m = polar_points(level);
    let circle = circle_rule(2 * m)?;
    if d == 1 {
        return Ok(circle);
    }
    // polar angle j = 1..d-1 carries sin^{d-j}
    let polar: Vec<(Vec<f64>, Vec<f64>)> = (1..d).map(|j| gegenbauer_rule(m, d - j)).collect();

    let count = m.pow((d - 1) as u32) * circle.len();
    let mut nodes = Vec::with_capacity(count * (d + 1));
    let mut weights = Vec::with_capacity(count);
    let mut idx = vec![0usize; d - 1];
    loop {
        let mut w = 1.0;
        let mut x = Vec::with_capacity(d + 1);
        let mut sin_prod = 1.0;
        for (j, &i) in idx.iter().enumerate() {
            let t = polar[j].0[i];
            w *= polar[j].1[i];
            x.push(sin_prod * t);
            sin_prod *= (1.0 - t * t).max(0.0).sqrt();
        }
        for (c, &wc) in circle.nodes().zip(circle.weights()) {
            nodes.extend_from_slice(&x);
            nodes.push(sin_prod * c[0]);
            nodes.push(sin_prod * c[1]);
            weights.push(w * wc);
        }
        // odometer over polar indices, last index fastest
        let mut pos = d - 1;
        loop {
            if pos == 0 {
                return Ok(SphereRule { d, nodes, weights });
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < m {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Rule on a fiber sphere `S^{p-1}` of a rank-`p` normal bundle: the exact
/// circle rule with `circle_nodes` points when `p = 2`, the tensorized rule
/// at `level` otherwise.
pub fn fiber_rule(p: usize, circle_nodes: usize, level: usize) -> Result<SphereRule> {
    match p {
        0 => Err(Error::Dimension("fiber needs p >= 1".into())),
        1 => Ok(SphereRule::zero_sphere()),
        2 => circle_rule(circle_nodes),
        _ => sphere_rule(p - 1, level),
    }
}

/// Product quadrature on `S^{d_1}(r_1) x ... x S^{d_k}(r_k)`.
///
/// Combined nodes are the concatenated factor points (each of norm `r_i`),
/// ordered lexicographically with the last factor fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductRule {
    factor_dims: Vec<usize>,
    radii: Vec<f64>,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl ProductRule {
    pub fn new(factors: &[(SphereRule, f64)]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Dimension("product rule needs at least one factor".into()));
        }
        if let Some((_, r)) = factors.iter().find(|(_, r)| !(*r > 0.0)) {
            return Err(Error::Condition(format!("sphere radius must be positive, got {r}")));
        }
        let mut points: Vec<Vec<f64>> = vec![Vec::new()];
        let mut weights = vec![1.0];
        for (rule, r) in factors {
            let scale = r.powi(rule.dim() as i32);
            let mut next_points = Vec::with_capacity(points.len() * rule.len());
            let mut next_weights = Vec::with_capacity(points.len() * rule.len());
            for (p, w) in points.iter().zip(&weights) {
                for (node, wn) in rule.nodes().zip(rule.weights()) {
                    let mut q = p.clone();
                    q.extend(node.iter().map(|c| c * r));
                    next_points.push(q);
                    next_weights.push(w * wn * scale);
                }
            }
            points = next_points;
            weights = next_weights;
        }
        Ok(Self {
            factor_dims: factors.iter().map(|(s, _)| s.dim()).collect(),
            radii: factors.iter().map(|(_, r)| *r).collect(),
            points: points.concat(),
            weights,
        })
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn stride(&self) -> usize {
        self.factor_dims.iter().map(|d| d + 1).sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let s = self.stride();
        &self.points[i * s..(i + 1) * s]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }
}

/// `sum_{indicator(node)} w * f(node)`, reduced pairwise in node order.
pub fn integrate_region<F, I>(rule: &SphereRule, f: F, indicator: I) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
    I: Fn(&[f64]) -> bool + Sync + Send,
{
    par_map_sum(rule.len(), |i| {
        let u = rule.node(i);
        if indicator(u) {
            rule.weights()[i] * f(u)
        } else {
            0.0
        }
    })
}

/// Iterated sum `sum_x w_x sum_xi w_xi [indicator] f(x, xi)` over a manifold
/// rule and a fiber rule, i.e. the measure `dM ^ dV` on the unit normal bundle.
pub fn integrate_unit_normal_bundle<F, I>(manifold: &ProductRule, fiber: &SphereRule, f: F, indicator: I) -> f64
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync + Send,
    I: Fn(&[f64], &[f64]) -> bool + Sync + Send,
{
    integrate_bundle_prepared(
        manifold,
        fiber,
        |x| x.to_vec(),
        |x, xi| if indicator(x, xi) { f(x, xi) } else { 0.0 },
    )
}

/// Like [`integrate_unit_normal_bundle`], with per-point data built once by
/// `prepare` and shared by every fiber node over that point.
pub fn integrate_bundle_prepared<T, P, F>(manifold: &ProductRule, fiber: &SphereRule, prepare: P, f: F) -> f64
where
    P: Fn(&[f64]) -> T + Sync + Send,
    F: Fn(&T, &[f64]) -> f64 + Sync + Send,
{
    par_map_sum(manifold.len(), |i| {
        let data = prepare(manifold.point(i));
        let inner: Vec<f64> = fiber.nodes().zip(fiber.weights()).map(|(xi, w)| w * f(&data, xi)).collect();
        manifold.weights()[i] * pairwise_sum(&inner)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
        assert!((sphere_volume(5) - PI.powi(3)).abs() < 1e-13);
    }

    #[test]
    fn circle_rule_basics() {
        assert!(matches!(circle_rule(3), Err(Error::Resolution(_))));
        let r = circle_rule(8).unwrap();
        assert!((r.total_weight() - 2.0 * PI).abs() < 1e-14);
        let c2 = integrate_region(&r, |u| u[0] * u[0], |_| true);
        assert!((c2 - PI).abs() < 1e-12);
        for n in 6..12 {
            let r = circle_rule(n).unwrap();
            let c4 = integrate_region(&r, |u| u[0].powi(4), |_| true);
            assert!((c4 - 0.75 * PI).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn sphere_rule_reduces_to_circle() {
        assert_eq!(sphere_rule(1, 3).unwrap(), circle_rule(10).unwrap());
    }

    #[test]
    fn second_moment_on_two_sphere() {
        let r = sphere_rule(2, 3).unwrap();
        let m = integrate_region(&r, |u| u[0] * u[0], |_| true);
        assert!((m - 4.0 * PI / 3.0).abs() < 1e-8);
    }

    #[test]
    fn five_sphere_volume_and_node_norms() {
        let r = sphere_rule(5, 3).unwrap();
        assert!((r.total_weight() / PI.powi(3) - 1.0).abs() < 1e-8);
        for u in r.nodes() {
            let norm: f64 = u.iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        assert!(r.weights().iter().all(|&w| w > 0.0));
    }

    #[test]
    fn gegenbauer_weights_sum_to_moment() {
        for k in 1..6 {
            let (t, w) = gegenbauer_rule(5, k);
            assert!((w.iter().sum::<f64>() - wallis(k)).abs() < 1e-13);
            assert!(t.iter().all(|x| x.abs() < 1.0));
        }
    }

    #[test]
    fn region_indicators_partition_exactly() {
        let r = circle_rule(64).unwrap();
        let f = |u: &[f64]| 1.0 + u[0] * u[1].powi(3);
        let ind = |u: &[f64]| u[0] * u[1] < 0.0;
        let a = integrate_region(&r, f, ind);
        let b = integrate_region(&r, f, |u| !ind(u));
        // same nodes, same order: the two halves add up to the unrestricted sum
        // up to one rounding of the final addition
        let full = integrate_region(&r, f, |_| true);
        assert!((a + b - full).abs() <= 4.0 * f64::EPSILON * full.abs());
    }

    #[test]
    fn quadrant_integrals() {
        let r = circle_rule(256).unwrap();
        let half = integrate_region(&r, |_| 1.0, |u| u[0] * u[1] < 0.0);
        assert!((half - PI).abs() <= 2.0 * PI / 256.0);
        let q = integrate_region(&r, |u| (u[0] * u[1]).powi(2), |u| u[0] * u[1] < 0.0);
        assert!((q - PI / 8.0).abs() < 1e-6);
    }

    #[test]
    fn product_and_bundle_volumes() {
        let s2 = sphere_rule(2, 3).unwrap();
        let m = ProductRule::new(&[(s2.clone(), 1.0), (s2, 1.0)]).unwrap();
        assert!((m.total_weight() / (16.0 * PI * PI) - 1.0).abs() < 1e-8);
        let fib = circle_rule(256).unwrap();
        let vol = integrate_unit_normal_bundle(&m, &fib, |_, _| 1.0, |_, _| true);
        assert!((vol / (32.0 * PI.powi(3)) - 1.0).abs() < 1e-6);
        assert_eq!(integrate_unit_normal_bundle(&m, &fib, |_, _| 0.0, |_, _| true), 0.0);
    }

    #[test]
    fn scaled_factor_weights() {
        let s2 = sphere_rule(2, 2).unwrap();
        let m = ProductRule::new(&[(s2.clone(), 2.0), (s2, 0.5)]).unwrap();
        assert!((m.total_weight() / (16.0 * PI * PI) - 1.0).abs() < 1e-10);
        let p = m.point(7);
        let n1: f64 = p[..3].iter().map(|c| c * c).sum::<f64>().sqrt();
        assert!((n1 - 2.0).abs() < 1e-12);
        assert!(ProductRule::new(&[(circle_rule(8).unwrap(), 0.0)]).is_err());
    }
}
