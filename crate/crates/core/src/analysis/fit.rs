use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Growth shapes for max load as a function of `n` (natural logs).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ScalingModel {
    /// `ln ln n`
    LogLog,
    /// `(ln n / ln ln n)^(1/(d+1))`
    GridPower(u32),
    /// no dependence on n
    Constant,
    /// `ln n / ln ln n`
    OneChoice,
}

impl ScalingModel {
    pub fn feature(self, n: f64) -> f64 {
        let ln = n.ln();
        match self {
            ScalingModel::LogLog => ln.ln(),
            ScalingModel::GridPower(d) => (ln / ln.ln()).powf(1.0 / (f64::from(d) + 1.0)),
            ScalingModel::Constant => 0.0,
            ScalingModel::OneChoice => ln / ln.ln(),
        }
    }
}

/// `statistic ~ intercept + slope * f(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub intercept: f64,
    pub slope: f64,
    pub residual_rms: f64,
}

impl Fit {
    pub fn predict(&self, model: ScalingModel, n: f64) -> f64 {
        self.intercept + self.slope * model.feature(n)
    }
}

/// Ordinary least squares of `statistic` on the model feature.
pub fn fit_scaling(points: &[(f64, f64)], model: ScalingModel) -> Result<Fit> {
    if points.len() < 3 {
        return Err(Error::FitFailed(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(&(n, _)) = points.iter().find(|&&(n, _)| n.is_nan() || n < 16.0) {
        return Err(Error::FitFailed(format!("n must be >= 16, got {n}")));
    }
    let k = points.len() as f64;
    let ys: Vec<f64> = points.iter().map(|&(_, y)| y).collect();
    let y_mean = ys.iter().sum::<f64>() / k;
    let (intercept, slope) = if model == ScalingModel::Constant {
        (y_mean, 0.0)
    } else {
        let xs: Vec<f64> = points.iter().map(|&(n, _)| model.feature(n)).collect();
        let x_mean = xs.iter().sum::<f64>() / k;
        let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
        let scale = xs.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
        if sxx <= 1e-12 * scale * scale * k {
            return Err(Error::FitFailed("all n give the same feature value".into()));
        }
        let slope = sxy / sxx;
        (y_mean - slope * x_mean, slope)
    };
    let fit = Fit {
        intercept,
        slope,
        residual_rms: 0.0,
    };
    let sse: f64 = points
        .iter()
        .map(|&(n, y)| (y - fit.predict(model, n)).powi(2))
        .sum();
    Ok(Fit {
        residual_rms: (sse / k).sqrt(),
        ..fit
    })
}
