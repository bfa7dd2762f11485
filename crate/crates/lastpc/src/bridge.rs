//! Closed-form two-variable geometry: PCA-line slopes from bivariate
//! moments and the conversion from a PCA slope to the regression slope,
//! with a least-squares oracle alongside.

use crate::error::{Error, Result};

/// Sample or population moments of a bivariate dataset.
#[derive(Debug, Clone, Copy)]
pub struct BivariateMoments {
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub rho: f64,
    pub mu_x: f64,
    pub mu_y: f64,
}

impl BivariateMoments {
    pub fn from_samples(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::input("need equal-length samples with n >= 2"));
        }
        let n = xs.len() as f64;
        let mu_x = xs.iter().sum::<f64>() / n;
        let mu_y = ys.iter().sum::<f64>() / n;
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for (x, y) in xs.iter().zip(ys) {
            sxx += (x - mu_x) * (x - mu_x);
            syy += (y - mu_y) * (y - mu_y);
            sxy += (x - mu_x) * (y - mu_y);
        }
        let sigma_x = (sxx / (n - 1.0)).sqrt();
        let sigma_y = (syy / (n - 1.0)).sqrt();
        if sigma_x == 0.0 || sigma_y == 0.0 {
            return Err(Error::input("zero variance in samples"));
        }
        Ok(BivariateMoments { sigma_x, sigma_y, rho: sxy / (sxx * syy).sqrt(), mu_x, mu_y })
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma_x > 0.0 && self.sigma_y > 0.0) {
            return Err(Error::input("sigma_x and sigma_y must be positive"));
        }
        if self.rho.abs() >= 1.0 {
            return Err(Error::input(format!("|rho| must be < 1, got {}", self.rho)));
        }
        Ok(())
    }
}

/// Slopes of the two PCA lines, and the shared intermediate A.
#[derive(Debug, Clone, Copy)]
pub struct PcaLineSlopes {
    /// A + sqrt(1 + A^2), the positive root.
    pub a_plus: f64,
    /// A - sqrt(1 + A^2), the negative root.
    pub a_minus: f64,
    pub a: f64,
}

/// PCA-line slopes from bivariate moments:
/// A = (sigma_x/sigma_y - sigma_y/sigma_x) / (2 rho), slopes A +- sqrt(1+A^2).
pub fn pca_slopes(m: &BivariateMoments) -> Result<PcaLineSlopes> {
    m.validate()?;
    if m.rho == 0.0 {
        return Err(Error::input(
            "rho == 0: PCA axes align with the coordinate axes (slopes 0 and infinity)",
        ));
    }
    let a = (m.sigma_x / m.sigma_y - m.sigma_y / m.sigma_x) / (2.0 * m.rho);
    let r = (1.0 + a * a).sqrt();
    Ok(PcaLineSlopes { a_plus: a + r, a_minus: a - r, a })
}

/// Regression slope implied by a PCA-line slope `b` and correlation `rho`.
///
/// With B = b - 1/b the regression slope is
/// beta = [-B rho^2 + sign(rho) sqrt(B^2 rho^4 + 4 rho^2)] / 2,
/// so that pca_slope_to_beta(pca_slopes(m), rho) == rho * sigma_y / sigma_x.
/// Both PCA-line slopes of the same moments give the same B and hence the
/// same beta.
pub fn pca_slope_to_beta(b: f64, rho: f64) -> Result<f64> {
    if b == 0.0 {
        return Err(Error::input("PCA slope b must be nonzero"));
    }
    if rho.abs() > 1.0 {
        return Err(Error::input(format!("|rho| must be <= 1, got {rho}")));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    let big_b = b - 1.0 / b;
    let radicand = big_b * big_b * rho.powi(4) + 4.0 * rho * rho;
    Ok(0.5 * (-big_b * rho * rho + rho.signum() * radicand.sqrt()))
}

/// The same conversion with the radicand `B^2 rho^4 + 4 rho^4`.
///
/// Kept for side-by-side comparison output; it does not invert the
/// slope geometry (the sigma_x == sigma_y sanity case gives rho^2
/// instead of rho), so discovery paths never use it.
pub fn pca_slope_to_beta_verbatim(b: f64, rho: f64) -> Result<f64> {
    if b == 0.0 {
        return Err(Error::input("PCA slope b must be nonzero"));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    let big_b = b - 1.0 / b;
    let radicand = (big_b * big_b + 4.0) * rho.powi(4);
    Ok(0.5 * (-big_b * rho * rho + rho.signum() * radicand.sqrt()))
}

/// Ordinary least-squares slope cov(x, y) / var(x); the independent
/// oracle for `pca_slope_to_beta`.
pub fn regression_slope_direct(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::input("need equal-length samples with n >= 2"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::input("zero variance in x"));
    }
    Ok(sxy / sxx)
}

/// Line as slope and y-intercept.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

/// Both PCA lines plus the regression line, all through (mu_x, mu_y).
pub fn pca_lines_demo(m: &BivariateMoments) -> Result<(Line, Line, Line)> {
    let slopes = pca_slopes(m)?;
    let through = |slope: f64| Line { slope, intercept: m.mu_y - slope * m.mu_x };
    let beta = m.rho * m.sigma_y / m.sigma_x;
    Ok((through(slopes.a_plus), through(slopes.a_minus), through(beta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::sampling::sample_gaussian_pairs;
    use approx::assert_abs_diff_eq;

    #[test]
    fn reference_configuration_goldens() {
        // sigma_x^2 = 2, sigma_y^2 = 3, rho = 0.8
        let m = BivariateMoments {
            sigma_x: 2.0f64.sqrt(),
            sigma_y: 3.0f64.sqrt(),
            rho: 0.8,
            mu_x: 0.0,
            mu_y: 0.0,
        };
        let s = pca_slopes(&m).unwrap();
        assert_abs_diff_eq!(s.a_plus, 0.7768836581684886, epsilon = 1e-12);
        let beta = pca_slope_to_beta(s.a_plus, m.rho).unwrap();
        // rho * sigma_y / sigma_x = 0.8 sqrt(3/2)
        assert_abs_diff_eq!(beta, 0.8 * (1.5f64).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(beta, 0.9797958971132712, epsilon = 1e-12);
    }

    #[test]
    fn pca_slopes_are_perpendicular() {
        let m = BivariateMoments {
            sigma_x: 1.3,
            sigma_y: 0.7,
            rho: -0.45,
            mu_x: 2.0,
            mu_y: -1.0,
        };
        let s = pca_slopes(&m).unwrap();
        assert_abs_diff_eq!(s.a_plus * s.a_minus, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn both_slopes_give_the_same_beta() {
        let m = BivariateMoments {
            sigma_x: 0.9,
            sigma_y: 2.4,
            rho: 0.31,
            mu_x: 0.0,
            mu_y: 0.0,
        };
        let s = pca_slopes(&m).unwrap();
        let b1 = pca_slope_to_beta(s.a_plus, m.rho).unwrap();
        let b2 = pca_slope_to_beta(s.a_minus, m.rho).unwrap();
        assert_abs_diff_eq!(b1, b2, epsilon = 1e-12);
        assert_abs_diff_eq!(b1, m.rho * m.sigma_y / m.sigma_x, epsilon = 1e-12);
    }

    #[test]
    fn beta_matches_least_squares_on_samples() {
        let table = sample_gaussian_pairs(500, 1.0, -2.0, 1.5, 0.8, -0.6, 11).unwrap();
        let xs = table.column(0);
        let ys = table.column(1);
        let m = BivariateMoments::from_samples(&xs, &ys).unwrap();
        let s = pca_slopes(&m).unwrap();
        let beta = pca_slope_to_beta(s.a_plus, m.rho).unwrap();
        let direct = regression_slope_direct(&xs, &ys).unwrap();
        assert_abs_diff_eq!(beta, direct, epsilon = 1e-10);
    }

    #[test]
    fn verbatim_variant_differs_for_unequal_sigmas() {
        // equal sigmas: slope geometry forces beta = rho, the verbatim
        // radicand gives rho^2 instead
        let m = BivariateMoments {
            sigma_x: 1.0,
            sigma_y: 1.0,
            rho: 0.5,
            mu_x: 0.0,
            mu_y: 0.0,
        };
        let s = pca_slopes(&m).unwrap();
        // A = 0, so a_plus = 1 and B = 0
        assert_abs_diff_eq!(s.a_plus, 1.0, epsilon = 1e-14);
        let fixed = pca_slope_to_beta(s.a_plus, m.rho).unwrap();
        let verbatim = pca_slope_to_beta_verbatim(s.a_plus, m.rho).unwrap();
        assert_abs_diff_eq!(fixed, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(verbatim, 0.25, epsilon = 1e-14);
    }

    #[test]
    fn zero_rho_is_degenerate_for_slopes() {
        let m = BivariateMoments {
            sigma_x: 1.0,
            sigma_y: 2.0,
            rho: 0.0,
            mu_x: 0.0,
            mu_y: 0.0,
        };
        assert!(pca_slopes(&m).is_err());
        assert_eq!(pca_slope_to_beta(1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn demo_lines_pass_through_centroid() {
        let m = BivariateMoments {
            sigma_x: 1.0,
            sigma_y: 1.5,
            rho: 0.6,
            mu_x: 3.0,
            mu_y: -2.0,
        };
        let (plus, minus, reg) = pca_lines_demo(&m).unwrap();
        for line in [plus, minus, reg] {
            assert_abs_diff_eq!(line.slope * m.mu_x + line.intercept, m.mu_y, epsilon = 1e-12);
        }
    }
}
