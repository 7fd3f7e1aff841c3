//! Offline profiling of map fusion: time [`compose_detailed`] over growing
//! numbers of maps and fit `t(k) = αk² + βk + γ` by least squares.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{compose_detailed, OccupancyGrid};
use crate::cost::FusionLatencyModel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticFit {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub r_squared: f64,
}

impl QuadraticFit {
    pub fn predict(&self, k: f64) -> f64 {
        self.alpha * k * k + self.beta * k + self.gamma
    }

    pub fn to_model(&self) -> FusionLatencyModel {
        FusionLatencyModel {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
        }
    }
}

/// Least-squares quadratic through `(k, t)` points. Needs at least three
/// distinct `k` values.
pub fn fit_quadratic(points: &[(f64, f64)]) -> Result<QuadraticFit> {
    let mut ks: Vec<f64> = points.iter().map(|p| p.0).collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    if ks.len() < 3 {
        return Err(Error::invalid(format!(
            "a quadratic fit needs at least 3 distinct map counts, got {}",
            ks.len()
        )));
    }
    if points.iter().any(|&(k, t)| !k.is_finite() || !t.is_finite()) {
        return Err(Error::invalid("profiling samples must be finite"));
    }
    let a = DMatrix::from_fn(points.len(), 3, |i, j| points[i].0.powi(2 - j as i32));
    let b = DVector::from_iterator(points.len(), points.iter().map(|p| p.1));
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::Internal(format!("least squares: {e}")))?;

    let mean = b.mean();
    let ss_tot: f64 = b.iter().map(|t| (t - mean).powi(2)).sum();
    let ss_res: f64 = (&a * &coef - &b).iter().map(|r| r * r).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(QuadraticFit {
        alpha: coef[0],
        beta: coef[1],
        gamma: coef[2],
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FusionSample {
    pub k: usize,
    /// Fastest of the repetitions, in seconds.
    pub seconds: f64,
    pub pairwise_checks: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FusionProfile {
    pub samples: Vec<FusionSample>,
    pub fit: QuadraticFit,
}

/// Times the fusion of `generator(k)` maps for every `k`, keeping the
/// fastest of `repetitions` runs, then fits the quadratic model.
pub fn profile_fusion(
    k_values: &[usize],
    repetitions: usize,
    mut generator: impl FnMut(usize) -> Result<Vec<OccupancyGrid>>,
) -> Result<FusionProfile> {
    if repetitions == 0 {
        return Err(Error::invalid("profiling needs at least one repetition"));
    }
    if let Some(k) = k_values.iter().find(|&&k| k < 2) {
        return Err(Error::invalid(format!("map count {k} is below 2")));
    }
    let mut samples = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let maps = generator(k)?;
        if maps.len() != k {
            return Err(Error::invalid(format!("generator returned {} maps for k = {k}", maps.len())));
        }
        let mut seconds = f64::INFINITY;
        let mut checks = 0;
        for _ in 0..repetitions {
            let start = Instant::now();
            let out = compose_detailed(&maps)?;
            seconds = seconds.min(start.elapsed().as_secs_f64());
            checks = out.pairwise_checks;
            std::hint::black_box(out);
        }
        samples.push(FusionSample {
            k,
            seconds,
            pairwise_checks: checks,
        });
    }
    let points: Vec<(f64, f64)> = samples.iter().map(|s| (s.k as f64, s.seconds)).collect();
    let fit = fit_quadratic(&points)?;
    Ok(FusionProfile { samples, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::synthetic::robot_maps;
    use approx::assert_abs_diff_eq;

    #[test]
    fn recovers_exact_quadratic() {
        let pts: Vec<(f64, f64)> = (2..8).map(|k| (k as f64, 0.3 * (k * k) as f64 - 0.7 * k as f64 + 2.0)).collect();
        let f = fit_quadratic(&pts).unwrap();
        assert_abs_diff_eq!(f.alpha, 0.3, epsilon = 1e-6);
        assert_abs_diff_eq!(f.beta, -0.7, epsilon = 1e-6);
        assert_abs_diff_eq!(f.gamma, 2.0, epsilon = 1e-6);
        assert_abs_diff_eq!(f.r_squared, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(f.predict(10.0), 25.0, epsilon = 1e-6);
    }

    #[test]
    fn needs_three_distinct_counts() {
        assert!(fit_quadratic(&[(2.0, 1.0), (2.0, 1.1), (3.0, 2.0)]).is_err());
        assert!(profile_fusion(&[2, 3], 1, |k| robot_maps(k, 10, 0)).is_err());
        assert!(profile_fusion(&[1, 2, 3], 1, |k| robot_maps(k, 10, 0)).is_err());
        assert!(profile_fusion(&[2, 3, 4], 0, |k| robot_maps(k, 10, 0)).is_err());
    }

    #[test]
    fn counts_pairwise_checks() {
        let p = profile_fusion(&[2, 3, 5], 1, |k| robot_maps(k, 12, 1)).unwrap();
        let checks: Vec<usize> = p.samples.iter().map(|s| s.pairwise_checks).collect();
        assert_eq!(checks, vec![1, 3, 10]);
    }
}
