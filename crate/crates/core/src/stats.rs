//! Summary statistics and the two-sample Welch t-test.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the `n - 1` denominator.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn std_dev(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchTest {
    pub t: f64,
    /// Welch-Satterthwaite degrees of freedom.
    pub df: f64,
    /// Two-sided.
    pub p_value: f64,
}

/// Two-sided Welch unequal-variance t-test.
///
/// Both samples need at least two values and at least one of them must
/// have nonzero variance.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::DegenerateSample(format!(
            "need at least 2 values per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(Error::DegenerateSample("non-finite value".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (variance(a) / na, variance(b) / nb);
    let se2 = va + vb;
    if se2 <= 0.0 {
        return Err(Error::DegenerateSample("both samples have zero variance".into()));
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::DegenerateSample(format!("t distribution with df {df}: {e}")))?;
    let p_value = (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0);
    Ok(WelchTest { t, df, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identical_samples_give_p_one() {
        let a = [3.0, 4.5, 1.0, 7.25, 2.0];
        let r = welch_t_test(&a, &a).unwrap();
        assert_eq!(r.t, 0.0);
        assert_abs_diff_eq!(r.p_value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn separated_samples_with_jitter() {
        let a: Vec<f64> = (0..5).map(|i| i as f64 * 1e-9).collect();
        let b: Vec<f64> = (0..5).map(|i| 1.0 + i as f64 * 1e-9).collect();
        let r = welch_t_test(&a, &b).unwrap();
        assert!(r.p_value < 1e-6, "{r:?}");
        // Equal variances and sizes: df = 2(n - 1).
        assert_abs_diff_eq!(r.df, 8.0, epsilon = 1e-6);
    }

    #[test]
    fn textbook_value() {
        // Worked by hand: means 20 and 22, variances 2.5 and 10, n = 5 each.
        let a = [18.0, 19.0, 20.0, 21.0, 22.0];
        let b = [18.0, 20.0, 22.0, 24.0, 26.0];
        let r = welch_t_test(&a, &b).unwrap();
        assert_abs_diff_eq!(r.t, -2.0 / 2.5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.df, 6.25 / (0.25 / 4.0 + 4.0 / 4.0), epsilon = 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(welch_t_test(&[1.0], &[1.0, 2.0]).is_err());
        assert!(welch_t_test(&[1.0, 1.0], &[2.0, 2.0]).is_err());
        assert!(welch_t_test(&[1.0, f64::NAN], &[2.0, 3.0]).is_err());
    }
}
