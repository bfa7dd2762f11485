use crate::error::{Error, Result};
use crate::numeric::special::{student_t_cdf, student_t_quantile};

/// One-sample two-sided t-test result.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value_two_sided: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub sample_mean: f64,
}

/// Two-sided one-sample t-test of H0: mean == mu0.
pub fn t_test_one_sample(samples: &[f64], mu0: f64) -> Result<TTestResult> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::input(format!("t-test needs at least 2 samples, got {n}")));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if sd == 0.0 {
        return Err(Error::input("degenerate sample: zero standard deviation"));
    }
    let se = sd / (n as f64).sqrt();
    let df = n - 1;
    let t = (mean - mu0) / se;
    let p = if t == 0.0 { 1.0 } else { 2.0 * (1.0 - student_t_cdf(t.abs(), df)?) };
    let tq = student_t_quantile(0.975, df)?;
    Ok(TTestResult {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value_two_sided: p.min(1.0),
        ci95_low: mean - tq * se,
        ci95_high: mean + tq * se,
        sample_mean: mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mean_equals_mu0_gives_p_one() {
        let r = t_test_one_sample(&[1.0, 2.0, 3.0], 2.0).unwrap();
        assert_eq!(r.t_statistic, 0.0);
        assert_eq!(r.p_value_two_sided, 1.0);
        assert!(r.ci95_low <= r.sample_mean && r.sample_mean <= r.ci95_high);
    }

    #[test]
    fn df2_closed_form() {
        // For df=2, P(T > t) = (1 - t/sqrt(2+t^2))/2.
        let r = t_test_one_sample(&[1.0, 2.0, 3.0], 0.0).unwrap();
        let t = 2.0 * 3.0f64.sqrt();
        assert_abs_diff_eq!(r.t_statistic, t, epsilon = 1e-12);
        let p = 1.0 - t / (2.0 + t * t).sqrt();
        assert_abs_diff_eq!(r.p_value_two_sided, p, epsilon = 1e-8);
        assert_abs_diff_eq!(r.p_value_two_sided, 0.07418, epsilon = 5e-6);
    }

    #[test]
    fn zero_sd_is_an_error() {
        assert!(t_test_one_sample(&[3.0, 3.0, 3.0], 0.0).is_err());
    }
}
