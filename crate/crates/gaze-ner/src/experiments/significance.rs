//! Paired one-sided t-test over per-fold F scores.

use statrs::distribution::{ContinuousCDF, StudentsT};

use super::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub p_value: f64,
    pub mean_difference: f64,
    pub significant: bool,
}

/// Tests H1: augmented > baseline on paired per-fold scores, with
/// `df = k - 1`. Zero-variance differences degenerate to p = 0 (all
/// positive), p = 1 (all negative), or p = 0.5 (all zero).
pub fn significance_test(
    baseline: &[f64],
    augmented: &[f64],
    alpha: f64,
) -> Result<TTestResult, ExperimentError> {
    if baseline.len() != augmented.len() {
        return Err(ExperimentError::LengthMismatch {
            expected: baseline.len(),
            found: augmented.len(),
        });
    }
    let n = baseline.len();
    if n < 2 {
        return Err(ExperimentError::TooFewFolds { found: n });
    }
    let diffs: Vec<f64> = augmented
        .iter()
        .zip(baseline)
        .map(|(a, b)| a - b)
        .collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();

    let (t, p) = if sd == 0.0 {
        if mean > 0.0 {
            (f64::INFINITY, 0.0)
        } else if mean < 0.0 {
            (f64::NEG_INFINITY, 1.0)
        } else {
            (0.0, 0.5)
        }
    } else {
        let t = mean / (sd / (n as f64).sqrt());
        let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("valid dof");
        (t, 1.0 - dist.cdf(t))
    };

    Ok(TTestResult {
        t_statistic: t,
        p_value: p,
        mean_difference: mean,
        significant: p < alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_are_not_significant() {
        let x = vec![0.5, 0.6, 0.7, 0.8];
        let result = significance_test(&x, &x, 0.05).unwrap();
        assert_eq!(result.p_value, 0.5);
        assert_eq!(result.t_statistic, 0.0);
        assert!(!result.significant);
    }

    #[test]
    fn constant_positive_shift_is_certain() {
        let baseline = vec![0.1, 0.2, 0.3];
        let augmented = vec![1.1, 1.2, 1.3];
        let result = significance_test(&baseline, &augmented, 0.05).unwrap();
        assert_eq!(result.p_value, 0.0);
        assert!(result.significant);
        assert!((result.mean_difference - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_negative_shift_is_certainly_not() {
        let baseline = vec![1.1, 1.2, 1.3];
        let augmented = vec![0.1, 0.2, 0.3];
        let result = significance_test(&baseline, &augmented, 0.05).unwrap();
        assert_eq!(result.p_value, 1.0);
        assert!(!result.significant);
    }

    #[test]
    fn matches_reference_t_table() {
        // Paired differences: d = [1, 2, 3, 4, 5, 0, 2, 3, 1, 3] (n = 10).
        // mean(d) = 2.4, sd(d) = 1.5055367, t = 2.4*sqrt(10)/sd = 5.0410083
        // with df = 9; one-sided p from a reference CDF: 3.4941394e-4.
        let baseline = vec![0.0; 10];
        let augmented = vec![1.0, 2.0, 3.0, 4.0, 5.0, 0.0, 2.0, 3.0, 1.0, 3.0];
        let result = significance_test(&baseline, &augmented, 0.05).unwrap();
        assert!((result.t_statistic - 5.041_008_302_5).abs() < 1e-9);
        assert!((result.p_value - 3.494_139_44e-4).abs() < 1e-9);
        assert!(result.significant);

        // df = 1 has the closed form p = 0.5 - atan(t)/pi: for t = 2 that is
        // 0.147583617650...
        let base2 = vec![0.0, 0.0];
        let aug2 = vec![1.0, 3.0]; // mean 2, sd sqrt(2), t = 2, df = 1
        let r2 = significance_test(&base2, &aug2, 0.05).unwrap();
        assert!((r2.p_value - (0.5 - 2.0f64.atan() / std::f64::consts::PI)).abs() < 1e-12);
        assert!((r2.p_value - 0.147_583_617_65).abs() < 1e-9);
    }

    #[test]
    fn too_few_folds_rejected() {
        assert!(matches!(
            significance_test(&[1.0], &[2.0], 0.05),
            Err(ExperimentError::TooFewFolds { found: 1 })
        ));
    }
}
