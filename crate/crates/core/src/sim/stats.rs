//! Running moments and replication confidence intervals.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Summary {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Summary {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sample variance; zero below two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }
}

impl FromIterator<f64> for Summary {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Summary::default();
        iter.into_iter().for_each(|x| s.push(x));
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub mean: f64,
    pub half_width: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        (x - self.mean).abs() <= self.half_width
    }
}

/// Student-t interval over independent replication means.
pub fn confidence_interval(samples: &[f64], level: f64) -> Result<ConfidenceInterval> {
    if samples.len() < 2 {
        return Err(Error::InsufficientReplications { required: 2, got: samples.len() });
    }
    let summary: Summary = samples.iter().copied().collect();
    if level <= 0.0 {
        return Ok(ConfidenceInterval { mean: summary.mean(), half_width: 0.0 });
    }
    let dof = (samples.len() - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, dof)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.5 + level.min(1.0 - 1e-12) / 2.0);
    let half_width = t * summary.std_dev() / (samples.len() as f64).sqrt();
    Ok(ConfidenceInterval { mean: summary.mean(), half_width })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identical_samples_have_zero_width() {
        let ci = confidence_interval(&[4.0, 4.0, 4.0], 0.9).unwrap();
        assert_eq!(ci.mean, 4.0);
        assert_eq!(ci.half_width, 0.0);
    }

    #[test]
    fn five_samples_at_ninety_percent() {
        let ci = confidence_interval(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.9).unwrap();
        assert_relative_eq!(ci.mean, 3.0);
        // t(0.95, 4) = 2.1318, s = sqrt(2.5)
        assert_relative_eq!(ci.half_width, 2.131847 * (2.5f64 / 5.0).sqrt(), max_relative = 1e-5);
    }

    #[test]
    fn zero_level_and_too_few_samples() {
        assert_eq!(confidence_interval(&[1.0, 5.0], 0.0).unwrap().half_width, 0.0);
        assert!(matches!(
            confidence_interval(&[1.0], 0.9),
            Err(Error::InsufficientReplications { .. })
        ));
    }

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.5, 2.0, -3.0, 8.25, 0.0];
        let s: Summary = xs.iter().copied().collect();
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert_relative_eq!(s.mean(), mean, max_relative = 1e-14);
        assert_relative_eq!(s.variance(), var, max_relative = 1e-14);
    }
}
