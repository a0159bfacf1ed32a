//! Log-log rate fitting.

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit {
    /// Decay exponent: `value ~ k^-slope`, positive means decay.
    pub slope: f64,
    /// Coefficient of determination of the log-log fit.
    pub r2: f64,
}

/// Least squares of `ln value` against `ln k`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<Fit> {
    if points.len() < 3 {
        return Err(HarnessError::InsufficientPoints(points.len()));
    }
    if let Some(&(_, v)) = points.iter().find(|(k, v)| !(*v > 0.0) || !(*k > 0.0)) {
        return Err(HarnessError::NonPositive(v));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::InsufficientPoints(1));
    }
    let b = sxy / sxx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - my - b * (x - mx)).powi(2))
        .sum();
    // a perfectly flat series is fitted exactly
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(Fit { slope: -b, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = [100.0, 200.0, 400.0, 800.0].iter().map(|&k: &f64| (k, k.powi(-3))).collect();
        let f = fit_rate(&pts).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_has_zero_slope() {
        let pts: Vec<_> = [1.0, 2.0, 5.0].iter().map(|&k| (k, 4.2)).collect();
        assert_eq!(fit_rate(&pts).unwrap().slope, 0.0);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<_> = (0..8)
            .map(|i| {
                let k = 50.0 * 1.6f64.powi(i);
                (k, 5.0 * k.powf(-1.7) * (1.0 + 0.01 * rng.gen_range(-1.0..1.0)))
            })
            .collect();
        assert!((fit_rate(&pts).unwrap().slope - 1.7).abs() < 0.05);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(fit_rate(&[(1.0, 1.0), (2.0, 0.5)]), Err(HarnessError::InsufficientPoints(2))));
        assert!(matches!(
            fit_rate(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]),
            Err(HarnessError::NonPositive(_))
        ));
    }
}
