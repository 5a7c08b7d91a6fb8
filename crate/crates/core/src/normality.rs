//! Lilliefors test of normality with estimated mean and variance.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{GscError, Result};

pub const MIN_SAMPLE: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lilliefors {
    /// Largest distance between the empirical CDF and the fitted normal CDF.
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Kolmogorov–Smirnov distance to a normal with the sample mean and sd.
///
/// The p-value uses the Dallal–Wilkinson approximation to the Lilliefors
/// null distribution, extended with Stephens' modification above 0.1.
pub fn lilliefors(values: &[f64]) -> Result<Lilliefors> {
    let n = values.len();
    if n < MIN_SAMPLE {
        return Err(GscError::InsufficientReplicates {
            have: n,
            need: MIN_SAMPLE,
        });
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    let sd = var.sqrt();
    if !(sd > 0.0 && sd.is_finite()) {
        return Err(GscError::DegenerateDenominator("standard deviation"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        let f = normal.cdf((v - mean) / sd);
        d = d.max((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf);
    }
    Ok(Lilliefors {
        statistic: d,
        p_value: p_value(d, n),
        n,
    })
}

fn p_value(k: f64, n: usize) -> f64 {
    let nf = n as f64;
    let (kd, nd) = if n <= 100 {
        (k, nf)
    } else {
        (k * (nf / 100.0).powf(0.49), 100.0)
    };
    let p = (-7.01256 * kd * kd * (nd + 2.78019) + 2.99587 * kd * (nd + 2.78019).sqrt() - 0.122119
        + 0.974598 / nd.sqrt()
        + 1.67997 / nd)
        .exp();
    if p <= 0.1 {
        return p;
    }
    let kk = (nf.sqrt() - 0.01 + 0.85 / nf.sqrt()) * k;
    let p = if kk <= 0.302 {
        1.0
    } else if kk <= 0.5 {
        2.76773 - 19.828315 * kk + 80.709644 * kk.powi(2) - 138.55152 * kk.powi(3)
            + 81.218052 * kk.powi(4)
    } else if kk <= 0.9 {
        -4.901232 + 40.662806 * kk - 97.490286 * kk.powi(2) + 94.029866 * kk.powi(3)
            - 32.355711 * kk.powi(4)
    } else if kk <= 1.31 {
        6.198765 - 19.558097 * kk + 23.186922 * kk.powi(2) - 12.234627 * kk.powi(3)
            + 2.423045 * kk.powi(4)
    } else {
        0.0
    };
    p.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn normal_samples_reject_near_alpha() {
        let trials = 400;
        let mut rejections = 0;
        for t in 0..trials {
            let mut rng = stream(21, t);
            let x: Vec<f64> = (0..500).map(|_| rng.sample(StandardNormal)).collect();
            if lilliefors(&x).unwrap().p_value < 0.05 {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / trials as f64;
        // binomial sd at 0.05 over 400 trials is about 0.011
        assert!(rate < 0.085, "rejection rate {rate}");
    }

    #[test]
    fn uniform_sample_is_rejected() {
        let mut rng = stream(22, 0);
        let x: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        assert!(lilliefors(&x).unwrap().p_value < 0.05);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(lilliefors(&[1.0; 30]).is_err());
        assert!(lilliefors(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn statistic_matches_hand_value() {
        // symmetric sample: distances evaluated directly
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let r = lilliefors(&x).unwrap();
        let m = 9.5;
        let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 19.0).sqrt();
        let nd = Normal::standard();
        let mut d: f64 = 0.0;
        for (i, v) in x.iter().enumerate() {
            let f = nd.cdf((v - m) / sd);
            d = d
                .max(((i + 1) as f64 / 20.0 - f).abs())
                .max((f - i as f64 / 20.0).abs());
        }
        assert!((r.statistic - d).abs() < 1e-15);
        assert!(r.p_value > 0.05);
    }
}
