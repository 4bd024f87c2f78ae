//! Unit-norm diagonal forms `gamma_m` whose scalar curvature tends to zero
//! while `phi_scal / psi^{4/n}` collapses.
//!
//! With `eta = 1/m`, `a_j = s_j / m`, `b_a = t_a / m` and
//! `theta_{j a} = kappa_m Theta_{j a}`, the diagonal values are
//!
//! ```text
//! gamma(e_1, e_1) = g1 xi_1 + eta^{(n-2)/n} sum_a b_a xi_a
//! gamma(e_j, e_j) = eta^{2(n-1)/n} a_j xi_1 + eta sum_a theta_{j a} xi_a   (j >= 2)
//! ```
//!
//! where `kappa_m` and `g1` are fixed by `|gamma_m| = 1`:
//! `eta^{2(n-2)/n} sum a^2 + kappa^2 sum Theta^2 = 1` and
//! `g1^2 = 1 - eta^2 - eta^{2(n-2)/n} sum b^2`.

use nalgebra::DVector;

use super::functional::{omega_region, phi_scal, psi, sharp_spectrum, REGION_TOLERANCE};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_region, SphereRule};
use crate::tensor::{index_of_eigenvalues, sc, BilinearForm};

/// Sign and shape data for the sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ExamplePattern {
    pub n: usize,
    pub p: usize,
    /// `s_j`, `j = 2..n` (length `n - 1`).
    pub s: Vec<f64>,
    /// `t_a`, `a = 2..p` (length `p - 1`).
    pub t: Vec<f64>,
    /// `Theta[j][a]`, `(n - 1) x (p - 1)`.
    pub theta: Vec<Vec<f64>>,
    /// Fixed open cone `{u_1 u_2 > 0, |u_1| <= c |u_2|, sum_{a>=3} u_a^2 <= (c u_2)^2}`
    /// that sits inside every `Omega(gamma_m)`.
    pub cone: f64,
}

impl ExamplePattern {
    /// First `p` entries of `s` and of each `Theta` column negative, the rest
    /// positive; all `t_a = 1`. For `n = 4, p = 2`: `s = (-1, -1, 3)`,
    /// `Theta = (-1, -1, 0.1)`, which makes `sc(gamma_m) > 0`.
    pub fn default_for(n: usize, p: usize) -> Self {
        let s = (0..n.saturating_sub(1)).map(|j| if j < p { -1.0 } else { 3.0 }).collect();
        let theta = (0..n.saturating_sub(1))
            .map(|j| vec![if j < p { -1.0 } else { 0.1 }; p.saturating_sub(1)])
            .collect();
        Self { n, p, s, t: vec![1.0; p.saturating_sub(1)], theta, cone: 0.4 }
    }

    fn check_shape(&self) -> Result<()> {
        let (n, p) = (self.n, self.p);
        if p < 2 || 2 * p > n {
            return Err(Error::Pattern(format!("need 2 <= p <= n/2, got n = {n}, p = {p}")));
        }
        if self.s.len() != n - 1 || self.t.len() != p - 1 || self.theta.len() != n - 1 {
            return Err(Error::Pattern("pattern lengths do not match (n, p)".into()));
        }
        if self.theta.iter().any(|row| row.len() != p - 1) {
            return Err(Error::Pattern("Theta rows must have p - 1 entries".into()));
        }
        Ok(())
    }

    fn in_cone(&self, u: &[f64]) -> bool {
        let tail: f64 = u[2..].iter().map(|v| v * v).sum();
        u[0] * u[1] > 0.0 && u[0].abs() <= self.cone * u[1].abs() && tail <= (self.cone * u[1]).powi(2)
    }
}

/// One row of the degenerating sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRecord {
    pub m: usize,
    pub gamma_norm: f64,
    pub sc_value: f64,
    pub rho: f64,
    pub sigma: f64,
    /// `phi_scal / psi_{Omega(gamma_m)}^{4/n}`.
    pub ratio: f64,
    pub phi_scal: f64,
    /// `psi` over `Omega(gamma_m)`.
    pub psi_omega: f64,
    /// `psi` over the fixed cone.
    pub psi_cone: f64,
    /// `|phi_scal - eta^{4(n-1)/n} rho| / phi_scal`.
    pub rho_residual: f64,
    /// `|psi_cone - eta^{n-1} sigma| / psi_cone`.
    pub sigma_residual: f64,
    /// Whether every cone node of the rule lies in `Omega(gamma_m)`.
    pub cone_inside_omega: bool,
}

struct Params {
    eta: f64,
    g1: f64,
    a: Vec<f64>,
    b: Vec<f64>,
    /// `theta[j][a]`
    theta: Vec<Vec<f64>>,
}

fn params(m: usize, pattern: &ExamplePattern) -> Result<Params> {
    pattern.check_shape()?;
    if m < 1 {
        return Err(Error::Pattern("m must be at least 1".into()));
    }
    let n = pattern.n as f64;
    let eta = 1.0 / m as f64;
    let a: Vec<f64> = pattern.s.iter().map(|s| s * eta).collect();
    let b: Vec<f64> = pattern.t.iter().map(|t| t * eta).collect();
    let sum_a2: f64 = a.iter().map(|v| v * v).sum();
    let sum_b2: f64 = b.iter().map(|v| v * v).sum();
    let sum_theta2: f64 = pattern.theta.iter().flatten().map(|v| v * v).sum();
    let kappa2 = (1.0 - eta.powf(2.0 * (n - 2.0) / n) * sum_a2) / sum_theta2;
    if !(kappa2 > 0.0) || !sum_theta2.is_finite() {
        return Err(Error::Pattern(format!("no theta scale satisfies the norm constraint at m = {m}")));
    }
    let g1_sq = 1.0 - eta * eta - eta.powf(2.0 * (n - 2.0) / n) * sum_b2;
    if !(g1_sq > 0.0) {
        return Err(Error::Pattern(format!("gamma^(1) squared is {g1_sq} at m = {m}")));
    }
    let kappa = kappa2.sqrt();
    let theta = pattern.theta.iter().map(|row| row.iter().map(|v| v * kappa).collect()).collect();
    let prm = Params { eta, g1: g1_sq.sqrt(), a, b, theta };

    // both index windows
    let (p, nn) = (pattern.p, pattern.n);
    let window = |vals: Vec<f64>| {
        let idx = index_of_eigenvalues(&vals, 0.0);
        (p..=nn - p).contains(&idx)
    };
    let e1 = eta.powf(2.0 * (n - 1.0) / n);
    let mut first = vec![prm.g1];
    first.extend(prm.a.iter().map(|v| e1 * v));
    if !window(first) {
        return Err(Error::Pattern(format!("first index window fails at m = {m}")));
    }
    let e2 = eta.powf(2.0 / n);
    for al in 0..p - 1 {
        let mut col = vec![prm.b[al]];
        col.extend(prm.theta.iter().map(|row| e2 * row[al]));
        if !window(col) {
            return Err(Error::Pattern(format!("index window for xi_{} fails at m = {m}", al + 2)));
        }
    }
    Ok(prm)
}

fn diagonal_values(prm: &Params, n: usize, p: usize) -> Vec<DVector<f64>> {
    let nf = n as f64;
    let e_b = prm.eta.powf((nf - 2.0) / nf);
    let e_a = prm.eta.powf(2.0 * (nf - 1.0) / nf);
    let mut v1 = DVector::zeros(p);
    v1[0] = prm.g1;
    for (al, b) in prm.b.iter().enumerate() {
        v1[al + 1] = e_b * b;
    }
    let mut out = vec![v1];
    for (j, a) in prm.a.iter().enumerate() {
        let mut v = DVector::zeros(p);
        v[0] = e_a * a;
        for al in 0..p - 1 {
            v[al + 1] = prm.eta * prm.theta[j][al];
        }
        out.push(v);
    }
    out
}

/// `phi_scal / eta^{4(n-1)/n}` from the scalar coefficients alone.
fn rho(prm: &Params, n: usize) -> f64 {
    let nf = n as f64;
    let e_a = prm.eta.powf(2.0 * (nf - 1.0) / nf);
    let e_t = prm.eta.powf(2.0 / nf);
    let m = prm.a.len();
    let c1: Vec<f64> = (0..m)
        .map(|j| prm.g1 * prm.a[j] + prm.b.iter().zip(&prm.theta[j]).map(|(b, t)| b * t).sum::<f64>())
        .collect();
    let cij = |i: usize, j: usize| {
        e_a * prm.a[i] * prm.a[j] + e_t * prm.theta[i].iter().zip(&prm.theta[j]).map(|(x, y)| x * y).sum::<f64>()
    };
    let mut off = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                off += cij(i, j);
            }
        }
    }
    let mean = (2.0 * c1.iter().sum::<f64>() + off) / (nf * (nf - 1.0));
    let mut r = 16.0 * c1.iter().map(|c| (c - mean).powi(2)).sum::<f64>();
    for i in 0..m {
        for j in 0..m {
            if i != j {
                r += 8.0 * (cij(i, j) - mean).powi(2);
            }
        }
    }
    r
}

/// `gamma_m` and its record.
pub fn example_sequence(m: usize, pattern: &ExamplePattern, rule: &SphereRule) -> Result<(BilinearForm, SequenceRecord)> {
    let prm = params(m, pattern)?;
    let (n, p) = (pattern.n, pattern.p);
    if rule.dim() + 1 != p {
        return Err(Error::Dimension(format!("rule on S^{} for p = {p}", rule.dim())));
    }
    let gamma = BilinearForm::from_diagonal(&diagonal_values(&prm, n, p))?;
    let nf = n as f64;

    let phi = phi_scal(&gamma);
    let rho_m = rho(&prm, n);
    let rho_pred = prm.eta.powf(4.0 * (nf - 1.0) / nf) * rho_m;

    let omega = omega_region(&gamma, REGION_TOLERANCE)?;
    let psi_omega = psi(&gamma, &omega, rule)?;
    let psi_cone = integrate_region(
        rule,
        |u| sharp_spectrum(&gamma, u).iter().product::<f64>().abs(),
        |u| pattern.in_cone(u),
    );
    let e_b = prm.eta.powf((nf - 2.0) / nf);
    let sigma = integrate_region(
        rule,
        |u| {
            let lead = u[0] * prm.g1 + e_b * prm.b.iter().zip(&u[1..]).map(|(b, v)| b * v).sum::<f64>();
            let rest: f64 = (0..n - 1)
                .map(|j| e_b * prm.a[j] * u[0] + prm.theta[j].iter().zip(&u[1..]).map(|(t, v)| t * v).sum::<f64>())
                .product();
            (lead * rest).abs()
        },
        |u| pattern.in_cone(u),
    );
    let sigma_pred = prm.eta.powi(n as i32 - 1) * sigma;
    let cone_inside_omega = rule.nodes().filter(|u| pattern.in_cone(u)).all(|u| omega.contains(u));

    let record = SequenceRecord {
        m,
        gamma_norm: gamma.norm(),
        sc_value: sc(&gamma),
        rho: rho_m,
        sigma,
        ratio: if psi_omega > 0.0 { phi / psi_omega.powf(4.0 / nf) } else { f64::INFINITY },
        phi_scal: phi,
        psi_omega,
        psi_cone,
        rho_residual: (phi - rho_pred).abs() / phi.abs().max(f64::MIN_POSITIVE),
        sigma_residual: (psi_cone - sigma_pred).abs() / psi_cone.abs().max(f64::MIN_POSITIVE),
        cone_inside_omega,
    };
    Ok((gamma, record))
}

/// `beta_m = sqrt(n (n-1) k / sc(gamma_m)) gamma_m`, which has
/// `sc(beta_m) = n (n-1) k` so that `phi_k(beta_m) = phi_scal(beta_m)`.
pub fn example_beta_sequence(m: usize, k: f64, pattern: &ExamplePattern) -> Result<BilinearForm> {
    let prm = params(m, pattern)?;
    let gamma = BilinearForm::from_diagonal(&diagonal_values(&prm, pattern.n, pattern.p))?;
    let s = sc(&gamma);
    if !(k * s > 0.0) {
        return Err(Error::Sign(format!("k * sc(gamma_m) = {} must be positive", k * s)));
    }
    let nf = pattern.n as f64;
    Ok(gamma.scaled((nf * (nf - 1.0) * k / s).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{omega_ratio, Mode};
    use crate::quadrature::circle_rule;

    #[test]
    fn unit_norm_and_identities() {
        let pat = ExamplePattern::default_for(4, 2);
        let rule = circle_rule(512).unwrap();
        for m in [8, 16, 32, 64] {
            let (_, r) = example_sequence(m, &pat, &rule).unwrap();
            assert!((r.gamma_norm - 1.0).abs() < 1e-12, "m={m}");
            assert!(r.sc_value > 0.0, "m={m} sc={}", r.sc_value);
            assert!(r.rho_residual < 1e-10, "m={m} {}", r.rho_residual);
            assert!(r.sigma_residual < 1e-10, "m={m} {}", r.sigma_residual);
            assert!(r.cone_inside_omega, "m={m}");
        }
    }

    #[test]
    fn invalid_patterns() {
        let rule = circle_rule(64).unwrap();
        let pat = ExamplePattern::default_for(4, 2);
        assert!(matches!(example_sequence(1, &pat, &rule), Err(Error::Pattern(_))));
        assert!(matches!(example_sequence(0, &pat, &rule), Err(Error::Pattern(_))));
        let mut bad = pat.clone();
        bad.s = vec![1.0, 1.0, 1.0];
        assert!(matches!(example_sequence(8, &bad, &rule), Err(Error::Pattern(_))));
        assert!(matches!(example_beta_sequence(8, -1.0, &pat), Err(Error::Sign(_))));
    }

    #[test]
    fn ratio_transfer() {
        let pat = ExamplePattern::default_for(4, 2);
        let rule = circle_rule(512).unwrap();
        let (gamma, rec) = example_sequence(8, &pat, &rule).unwrap();
        let beta = example_beta_sequence(8, 1.0, &pat).unwrap();
        let lhs = omega_ratio(&beta, Mode::FixedK { k: 1.0 }, 0.0, &rule).unwrap();
        assert!((lhs - rec.ratio).abs() < 1e-8 * rec.ratio);
        assert!((sc(&beta) - 12.0).abs() < 1e-10);
        assert!(sc(&gamma) > 0.0);
    }
}
