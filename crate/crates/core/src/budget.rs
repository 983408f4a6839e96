//! Splitting a fixed token budget between saliency retention and coverage
//! completion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::DEFAULT_NORM_EPSILON;

/// Slack accepted around `[0, 1]` before an entropy is rejected.
pub const ENTROPY_RANGE_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_TAU: f64 = 0.02;

/// Calibrated sigmoid midpoints for known vision encoders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// CLIP-style encoders (LLaVA-1.5, LLaVA-NeXT).
    Clip,
    /// Qwen2.5-VL vision tower.
    Qwen25Vl,
}

impl Preset {
    pub fn mu(self) -> f64 {
        match self {
            Preset::Clip => 0.42,
            Preset::Qwen25Vl => 0.5744,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiversityMethod {
    #[default]
    Dpp,
    Fps,
    FacilityLocation,
}

/// Where farthest-point sampling starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FpsStart {
    #[default]
    LowestIndex,
    HighestSaliency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressConfig {
    pub total_budget: usize,
    pub mu: f64,
    pub tau: f64,
    pub diversity_method: DiversityMethod,
    pub fps_start: FpsStart,
    pub epsilon: f64,
}

impl CompressConfig {
    pub fn new(total_budget: usize, preset: Preset) -> Self {
        Self {
            total_budget,
            mu: preset.mu(),
            tau: DEFAULT_TAU,
            diversity_method: DiversityMethod::Dpp,
            fps_start: FpsStart::LowestIndex,
            epsilon: DEFAULT_NORM_EPSILON,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_diversity(mut self, method: DiversityMethod) -> Self {
        self.diversity_method = method;
        self
    }

    pub fn with_fps_start(mut self, start: FpsStart) -> Self {
        self.fps_start = start;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_budget == 0 {
            return Err(Error::budget("total budget must be at least 1"));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::invalid(format!(
                "mu must lie in (0, 1), got {}",
                self.mu
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetSplit {
    pub t_sal: usize,
    pub t_cov: usize,
    pub normalized_entropy: f64,
    /// Sigmoid output before flooring.
    pub coverage_ratio: f64,
}

impl BudgetSplit {
    pub fn total(&self) -> usize {
        self.t_sal + self.t_cov
    }
}

/// Logistic function, evaluated on the branch that cannot overflow.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let z = x.exp();
        z / (1.0 + z)
    }
}

/// `t_cov = floor(T * sigmoid((h - mu) / tau))`, `t_sal = T - t_cov`.
pub fn allocate_budget(normalized_entropy: f64, config: &CompressConfig) -> Result<BudgetSplit> {
    config.validate()?;
    if !(-ENTROPY_RANGE_TOLERANCE..=1.0 + ENTROPY_RANGE_TOLERANCE).contains(&normalized_entropy) {
        return Err(Error::invalid(format!(
            "normalized entropy {normalized_entropy} outside [0, 1]"
        )));
    }
    let h = normalized_entropy.clamp(0.0, 1.0);
    let total = config.total_budget;
    let coverage_ratio = sigmoid((h - config.mu) / config.tau);
    // The exact sigmoid is strictly below 1, so the exact floor is at most T - 1
    // even when the rounded ratio reaches 1.0.
    let t_cov = ((total as f64 * coverage_ratio).floor() as usize).min(total - 1);
    Ok(BudgetSplit {
        t_sal: total - t_cov,
        t_cov,
        normalized_entropy: h,
        coverage_ratio,
    })
}

/// Split with a caller-chosen saliency share; `coverage_ratio` becomes the
/// realized coverage fraction.
pub fn fixed_split(
    t_sal: usize,
    normalized_entropy: f64,
    config: &CompressConfig,
) -> Result<BudgetSplit> {
    config.validate()?;
    let total = config.total_budget;
    if t_sal > total {
        return Err(Error::budget(format!(
            "fixed saliency budget {t_sal} exceeds total budget {total}"
        )));
    }
    Ok(BudgetSplit {
        t_sal,
        t_cov: total - t_sal,
        normalized_entropy,
        coverage_ratio: (total - t_sal) as f64 / total as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(t: usize) -> CompressConfig {
        CompressConfig::new(t, Preset::Clip)
    }

    #[test]
    fn presets() {
        assert_eq!(Preset::Clip.mu(), 0.42);
        assert_eq!(Preset::Qwen25Vl.mu(), 0.5744);
        assert_eq!(cfg(1).tau, 0.02);
    }

    #[test]
    fn midpoint_splits_evenly() {
        let s = allocate_budget(0.42, &cfg(64)).unwrap();
        assert_eq!(s.coverage_ratio, 0.5);
        assert_eq!((s.t_sal, s.t_cov), (32, 32));
    }

    #[test]
    fn saturation_either_side() {
        let c = cfg(64);
        let hi = allocate_budget(c.mu + 10.0 * c.tau, &c).unwrap();
        let expected = 1.0 / (1.0 + (-10.0f64).exp());
        assert!((hi.coverage_ratio - expected).abs() < 1e-12);
        assert!((hi.coverage_ratio - 0.9999546).abs() < 1e-7);
        assert_eq!((hi.t_sal, hi.t_cov), (1, 63));

        let lo = allocate_budget(c.mu - 10.0 * c.tau, &c).unwrap();
        assert_eq!((lo.t_sal, lo.t_cov), (64, 0));
    }

    #[test]
    fn saturated_ratio_keeps_one_salient_token() {
        let c = cfg(64).with_mu(0.01).with_tau(1e-4);
        let s = allocate_budget(1.0, &c).unwrap();
        assert_eq!(s.coverage_ratio, 1.0);
        assert_eq!((s.t_sal, s.t_cov), (1, 63));
    }

    #[test]
    fn out_of_range_entropy() {
        let c = cfg(8);
        assert!(allocate_budget(1.0 + 5e-10, &c).is_ok());
        assert!(allocate_budget(-5e-10, &c).is_ok());
        assert_eq!(
            allocate_budget(1.01, &c).unwrap_err().category(),
            "invalid-input"
        );
        assert!(allocate_budget(f64::NAN, &c).is_err());
    }

    #[test]
    fn config_validation() {
        assert_eq!(
            allocate_budget(0.5, &cfg(0)).unwrap_err().category(),
            "invalid-budget"
        );
        assert!(allocate_budget(0.5, &cfg(4).with_tau(0.0)).is_err());
        assert!(allocate_budget(0.5, &cfg(4).with_mu(1.0)).is_err());
    }

    #[test]
    fn fixed_split_bounds() {
        let s = fixed_split(12, 0.3, &cfg(64)).unwrap();
        assert_eq!((s.t_sal, s.t_cov), (12, 52));
        assert!(fixed_split(65, 0.3, &cfg(64)).is_err());
    }
}
