//! Explicit upper bounds from the split forms `phi_l xi`, where
//! `phi_l(x, y) = sum_{i <= l} x_i y_i - sum_{i > l} x_i y_i`.

use nalgebra::{DMatrix, DVector};

use super::functional::unit;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_region, SphereRule};
use crate::tensor::BilinearForm;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemarkBound {
    pub n: usize,
    pub p: usize,
    pub l: usize,
    pub delta: f64,
    /// `(n - 2l)^2 - n`, the scalar curvature of `phi_l xi`.
    pub s: f64,
    /// `int_{S^{p-1}} |<u, xi>|^n dS_u`.
    pub moment: f64,
    pub value: f64,
}

/// `phi_l xi_1` in `R^n x R^n -> R^p`.
pub fn remark_candidate(n: usize, p: usize, l: usize) -> Result<BilinearForm> {
    if l > n {
        return Err(Error::Condition(format!("l = {l} exceeds n = {n}")));
    }
    let diag = DVector::from_iterator(n, (0..n).map(|i| if i < l { 1.0 } else { -1.0 }));
    BilinearForm::from_scalar(&DMatrix::from_diagonal(&diag), &unit(p, 0))
}

/// `int |u_1|^n` over the fiber rule.
pub fn abs_moment(n: usize, rule: &SphereRule) -> f64 {
    integrate_region(rule, |u| u[0].abs().powi(n as i32), |_| true)
}

/// `int_{S^1} |cos t|^n dt = 4 int_0^{pi/2} cos^n`.
pub fn abs_moment_circle(n: usize) -> f64 {
    fn quarter(n: usize) -> f64 {
        match n {
            0 => std::f64::consts::FRAC_PI_2,
            1 => 1.0,
            _ => (n as f64 - 1.0) / n as f64 * quarter(n - 2),
        }
    }
    4.0 * quarter(n)
}

/// Scale-normalized ratio of `phi_l xi` evaluated in closed form:
/// `8 (n^2 (n-1)^2 - s^2) / (n (n-1) moment^{4/n})`. Valid whenever the
/// selected region is the whole fiber sphere up to a null set.
pub fn remark_direct_closed_form(n: usize, l: usize, moment: f64) -> f64 {
    let nf = n as f64;
    let s = (nf - 2.0 * l as f64).powi(2) - nf;
    let q = nf * (nf - 1.0);
    8.0 * (q * q - s * s) / (q * moment.powf(4.0 / nf))
}

/// `2^{4/n} (8 n^2 (n-1)^2 - s^2) / (4 n (n-1) I^{4/n})` with the moment `I`
/// taken from `rule`, under the condition `delta^2 <= s / n`, `s > 0`.
pub fn remark_bound(n: usize, p: usize, delta: f64, l: usize, rule: &SphereRule) -> Result<RemarkBound> {
    if rule.dim() + 1 != p {
        return Err(Error::Dimension(format!("rule on S^{} for p = {p}", rule.dim())));
    }
    let nf = n as f64;
    let s = (nf - 2.0 * l as f64).powi(2) - nf;
    if l > n || s <= 0.0 || delta * delta > s / nf * (1.0 + 1e-12) {
        return Err(Error::Condition(format!(
            "need (n-2l)^2 > n and delta^2 <= ((n-2l)^2-n)/n; n = {n}, l = {l}, delta^2 = {}",
            delta * delta
        )));
    }
    let moment = abs_moment(n, rule);
    let q = nf * (nf - 1.0);
    let value = 2f64.powf(4.0 / nf) * (8.0 * q * q - s * s) / (4.0 * q * moment.powf(4.0 / nf));
    Ok(RemarkBound { n, p, l, delta, s, moment, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{omega_ratio, Mode};
    use crate::quadrature::circle_rule;
    use crate::tensor::sc;
    use std::f64::consts::PI;

    #[test]
    fn moments() {
        let rule = circle_rule(64).unwrap();
        assert!((abs_moment(4, &rule) - 3.0 * PI / 4.0).abs() < 1e-10);
        assert!((abs_moment_circle(4) - 3.0 * PI / 4.0).abs() < 1e-14);
        assert!((abs_moment_circle(10) - abs_moment(10, &rule)).abs() < 1e-10);
        assert!((abs_moment_circle(3) - 8.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn condition_is_enforced() {
        let rule = circle_rule(64).unwrap();
        assert!(matches!(remark_bound(4, 2, 0.1, 2, &rule), Err(Error::Condition(_))));
        assert!(matches!(remark_bound(10, 2, 1.7, 2, &rule), Err(Error::Condition(_))));
        let b = remark_bound(10, 2, 2.6f64.sqrt(), 2, &rule).unwrap();
        assert_eq!(b.s, 26.0);
        assert!(b.value > 0.0);
    }

    #[test]
    fn candidate_matches_its_closed_form() {
        let rule = circle_rule(512).unwrap();
        for (n, l) in [(4, 2), (10, 2), (6, 3), (7, 2)] {
            let beta = remark_candidate(n, 2, l).unwrap();
            let s = (n as f64 - 2.0 * l as f64).powi(2) - n as f64;
            assert!((sc(&beta) - s).abs() < 1e-12);
            let direct = omega_ratio(&beta, Mode::ScalNormalized, 0.0, &rule).unwrap();
            let closed = remark_direct_closed_form(n, l, abs_moment_circle(n));
            assert!((direct - closed).abs() < 1e-9 * closed, "n={n} l={l}: {direct} vs {closed}");
        }
    }
}
