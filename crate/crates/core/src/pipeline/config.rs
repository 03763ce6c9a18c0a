use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FilterKind {
    /// Hard-thresholded core matrix of the channel-sum-guided SVD transform.
    #[serde(rename = "msvd")]
    MSvd,
    /// Full HOSVD of the group, core hard-thresholded.
    #[serde(rename = "hosvd-ht")]
    HosvdHard,
    /// HOSVD with factors truncated to a fixed multirank.
    #[serde(rename = "hosvd-trunc")]
    HosvdTruncate,
}

impl FilterKind {
    pub fn name(self) -> &'static str {
        match self {
            FilterKind::MSvd => "msvd",
            FilterKind::HosvdHard => "hosvd-ht",
            FilterKind::HosvdTruncate => "hosvd-trunc",
        }
    }
}

impl std::str::FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "msvd" => Ok(FilterKind::MSvd),
            "hosvd-ht" => Ok(FilterKind::HosvdHard),
            "hosvd-trunc" => Ok(FilterKind::HosvdTruncate),
            other => Err(Error::invalid(format!("unknown filter {other:?}"))),
        }
    }
}

/// Every knob of the grouping / filtering / aggregation pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub patch_size: usize,
    /// Stride of the reference grid.
    pub step: usize,
    /// Chebyshev half-width of the spatial search window.
    pub search_radius: usize,
    /// Half-width of the search window along the frame axis (video only).
    pub temporal_radius: usize,
    pub k_similar: usize,
    pub filter: FilterKind,
    /// Threshold is `tau_factor * sigma`.
    pub tau_factor: f64,
    /// Per-mode ranks for [`FilterKind::HosvdTruncate`]; missing modes keep full rank.
    pub multirank: Vec<usize>,
    pub lambda_addback: f64,
    pub iterations: usize,
    pub sigma: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            patch_size: 8,
            step: 4,
            search_radius: 19,
            temporal_radius: 2,
            k_similar: 32,
            filter: FilterKind::MSvd,
            tau_factor: 2.7,
            multirank: Vec::new(),
            lambda_addback: 0.0,
            iterations: 1,
            sigma: 0.0,
        }
    }
}

impl FilterConfig {
    pub fn tau(&self) -> f64 {
        self.tau_factor * self.sigma
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidArgument(m));
        if self.patch_size < 2 {
            return fail(format!("patch size must be >= 2, got {}", self.patch_size));
        }
        if self.step < 1 {
            return fail("step must be >= 1".into());
        }
        if self.k_similar < 1 {
            return fail("k_similar must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.lambda_addback) {
            return fail(format!("lambda must lie in [0, 1], got {}", self.lambda_addback));
        }
        if self.iterations < 1 {
            return fail("iterations must be >= 1".into());
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return fail(format!("sigma must be finite and >= 0, got {}", self.sigma));
        }
        if !(self.tau_factor >= 0.0 && self.tau_factor.is_finite()) {
            return fail(format!("tau factor must be finite and >= 0, got {}", self.tau_factor));
        }
        if self.multirank.contains(&0) {
            return fail("multirank entries must be >= 1".into());
        }
        if self.multirank.len() > 4 {
            return fail("groups have at most 4 modes".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = FilterConfig::default();
        c.validate().unwrap();
        assert_eq!((c.patch_size, c.step, c.search_radius, c.k_similar), (8, 4, 19, 32));
        assert_eq!(c.tau_factor, 2.7);
    }

    #[test]
    fn invariants_enforced() {
        let bad = [
            FilterConfig { patch_size: 1, ..Default::default() },
            FilterConfig { step: 0, ..Default::default() },
            FilterConfig { k_similar: 0, ..Default::default() },
            FilterConfig { lambda_addback: 1.5, ..Default::default() },
            FilterConfig { iterations: 0, ..Default::default() },
            FilterConfig { multirank: vec![2, 0], ..Default::default() },
            FilterConfig { sigma: -1.0, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn filter_names_roundtrip() {
        for k in [FilterKind::MSvd, FilterKind::HosvdHard, FilterKind::HosvdTruncate] {
            assert_eq!(k.name().parse::<FilterKind>().unwrap(), k);
        }
        assert!("bm3d".parse::<FilterKind>().is_err());
    }
}
