//! Sample summaries used by the Monte Carlo reports.

/// Mean, unbiased variance and the standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Moments { n, mean: f64::NAN, variance: f64::NAN };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let variance = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Moments { n, mean, variance }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn std_error(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }

    /// Standard error of the sample variance, from the fourth central moment.
    pub fn variance_std_error(&self, xs: &[f64]) -> f64 {
        let n = self.n as f64;
        let m4 = xs.iter().map(|x| (x - self.mean).powi(4)).sum::<f64>() / n;
        let s2 = self.variance;
        ((m4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
    }
}

/// Empirical quantile with linear interpolation between order statistics
/// (Hyndman–Fan type 7). `sorted` must be ascending.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Jarque–Bera normality statistic and its asymptotic chi-square(2) p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JarqueBera {
    pub statistic: f64,
    pub p_value: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub fn jarque_bera(xs: &[f64]) -> JarqueBera {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let skewness = m3 / m2.powf(1.5);
    let excess_kurtosis = m4 / (m2 * m2) - 3.0;
    let statistic = n / 6.0 * (skewness * skewness + excess_kurtosis * excess_kurtosis / 4.0);
    // chi-square with two degrees of freedom has survival function exp(-x/2)
    JarqueBera { statistic, p_value: (-statistic / 2.0).exp(), skewness, excess_kurtosis }
}

/// Lag-1 sample autocorrelation.
pub fn lag1_autocorrelation(xs: &[f64]) -> f64 {
    let m = Moments::of(xs);
    let denom: f64 = xs.iter().map(|x| (x - m.mean).powi(2)).sum();
    let num: f64 = xs.windows(2).map(|w| (w[0] - m.mean) * (w[1] - m.mean)).sum();
    num / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_and_quantiles() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let m = Moments::of(&xs);
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 1.0), 4.0);
        assert_eq!(quantile_sorted(&xs, 0.5), 2.5);
    }

    #[test]
    fn jarque_bera_of_symmetric_two_point_sample() {
        // skewness 0, kurtosis 1 -> JB = n/6 * 4/4
        let xs: Vec<f64> = (0..60).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        let jb = jarque_bera(&xs);
        assert!(jb.skewness.abs() < 1e-12);
        assert!((jb.statistic - 10.0).abs() < 1e-9);
        assert!((jb.p_value - (-5.0f64).exp()).abs() < 1e-12);
    }
}
