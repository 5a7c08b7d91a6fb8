//! Generators used to validate the resampling engines: a clumping Markov
//! chain with derived features, and a piecewise Neyman–Scott cluster
//! process of feature intervals.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{GscError, Result};
use crate::segmentation::{Provenance, Segmentation};
use crate::tracks::{CoordinateSpace, FeatureTrack, Interval, TrackPair};

/// Order-`w` clumping chain: `P(x_k = 1) = p0/2 + (1 - p0) * mean of the
/// previous w values`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovParams {
    pub n: usize,
    pub p0: f64,
    pub w: usize,
}

impl MarkovParams {
    pub fn new(n: usize, p0: f64, w: usize) -> Result<Self> {
        if !(p0 > 0.0 && p0 <= 1.0) {
            return Err(GscError::param("p0", format!("{p0} is not in (0, 1]")));
        }
        if w == 0 {
            return Err(GscError::param("w", "must be at least 1"));
        }
        if n == 0 {
            return Err(GscError::param("n", "must be positive"));
        }
        Ok(MarkovParams { n, p0, w })
    }
}

/// Draws a 0/1 sequence. For `k <= w` the window covers only the available
/// history and is averaged over its actual size.
pub fn simulate_markov<R: Rng + ?Sized>(params: &MarkovParams, rng: &mut R) -> Vec<u8> {
    let MarkovParams { n, p0, w } = *params;
    let mut x = Vec::with_capacity(n);
    let mut window_sum = 0usize;
    for k in 0..n {
        let p = if k == 0 {
            p0 / 2.0
        } else {
            let size = k.min(w);
            p0 / 2.0 + (1.0 - p0) * window_sum as f64 / size as f64
        };
        let bit = rng.random_bool(p.clamp(0.0, 1.0)) as u8;
        x.push(bit);
        window_sum += bit as usize;
        if k >= w {
            window_sum -= x[k - w] as usize;
        }
    }
    x
}

/// Features derived from a 0/1 sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivedFeatureRule {
    /// Start positions of the pattern `1,1,1,0,0`.
    PatternMatch,
    /// Positions `k` with more than six 1's among `x[k..k+10]`.
    RunDensity,
}

const PATTERN: [u8; 5] = [1, 1, 1, 0, 0];
const DENSITY_WINDOW: usize = 10;
const DENSITY_THRESHOLD: usize = 6;

/// Marks positions satisfying `rule` on a single-sequence space.
pub fn derive_features(x: &[u8], rule: DerivedFeatureRule) -> Result<FeatureTrack> {
    let space = Arc::new(CoordinateSpace::single("sim", x.len() as u64)?);
    let mut marks = vec![0u8; x.len()];
    match rule {
        DerivedFeatureRule::PatternMatch => {
            for (k, win) in x.windows(PATTERN.len()).enumerate() {
                marks[k] = (win == PATTERN) as u8;
            }
        }
        DerivedFeatureRule::RunDensity => {
            if x.len() >= DENSITY_WINDOW {
                let mut sum: usize = x[..DENSITY_WINDOW].iter().map(|&v| v as usize).sum();
                for k in 0..=x.len() - DENSITY_WINDOW {
                    if k > 0 {
                        sum = sum + x[k + DENSITY_WINDOW - 1] as usize - x[k - 1] as usize;
                    }
                    marks[k] = (sum > DENSITY_THRESHOLD) as u8;
                }
            }
        }
    }
    FeatureTrack::from_indicator(space, &marks)
}

/// Side of the cluster center on which features start.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetSide {
    /// Uniformly random sign.
    #[default]
    Symmetric,
    /// Always downstream of the center.
    Downstream,
}

/// One homogeneous stretch of a Neyman–Scott process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeymanScottRegion {
    /// Region length in bases.
    pub length: u64,
    /// Cluster rate per `rate_unit` bases.
    pub rate: f64,
    /// Mean number of features per cluster.
    pub cluster_size: f64,
    /// Mean distance from cluster center to feature start.
    pub offset_mean: f64,
    /// Mean feature length.
    pub feature_len_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeymanScottParams {
    pub regions: Vec<NeymanScottRegion>,
    /// Number of bases one unit of `rate` refers to.
    pub rate_unit: f64,
    pub offset_side: OffsetSide,
}

impl NeymanScottParams {
    pub fn new(regions: Vec<NeymanScottRegion>) -> Result<Self> {
        let p = NeymanScottParams {
            regions,
            rate_unit: 1.0,
            offset_side: OffsetSide::Symmetric,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_rate_unit(mut self, unit: f64) -> Result<Self> {
        self.rate_unit = unit;
        self.validate()?;
        Ok(self)
    }

    pub fn with_offset_side(mut self, side: OffsetSide) -> Self {
        self.offset_side = side;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.regions.is_empty() {
            return Err(GscError::param(
                "regions",
                "at least one region is required",
            ));
        }
        if !(self.rate_unit.is_finite() && self.rate_unit > 0.0) {
            return Err(GscError::param("rate_unit", "must be positive"));
        }
        for (i, r) in self.regions.iter().enumerate() {
            if r.length == 0 {
                return Err(GscError::param(
                    "length",
                    format!("region {i} has zero length"),
                ));
            }
            if !(r.rate.is_finite() && r.rate >= 0.0) {
                return Err(GscError::param(
                    "rate",
                    format!("region {i}: {} is invalid", r.rate),
                ));
            }
            if !(r.cluster_size.is_finite() && r.cluster_size > 0.0) {
                return Err(GscError::param(
                    "cluster_size",
                    format!("region {i} must be positive"),
                ));
            }
            if !(r.offset_mean >= 1.0 && r.offset_mean.is_finite()) {
                return Err(GscError::param(
                    "offset_mean",
                    format!("region {i} must be >= 1"),
                ));
            }
            if !(r.feature_len_mean >= 1.0 && r.feature_len_mean.is_finite()) {
                return Err(GscError::param(
                    "feature_len_mean",
                    format!("region {i} must be >= 1"),
                ));
            }
        }
        Ok(())
    }

    pub fn total_len(&self) -> u64 {
        self.regions.iter().map(|r| r.length).sum()
    }

    /// Two regions of 10,000 bases with cluster rates 0.01 and 0.02 per base,
    /// 10 features per cluster, offset mean 10 and feature length mean 5.
    pub fn two_region() -> Self {
        let r = |rate| NeymanScottRegion {
            length: 10_000,
            rate,
            cluster_size: 10.0,
            offset_mean: 10.0,
            feature_len_mean: 5.0,
        };
        NeymanScottParams::new(vec![r(0.01), r(0.02)]).unwrap()
    }

    /// One 5 Mb region with rate 0.05, 10 features per cluster, offset mean
    /// 100 and feature length mean 75. The rate is per 93 bases: about 2 kb
    /// between clusters, near 20% coverage and a mean region overlap of 0.29.
    pub fn broad_peaks() -> Self {
        NeymanScottParams::new(vec![NeymanScottRegion {
            length: 5_000_000,
            rate: 0.05,
            cluster_size: 10.0,
            offset_mean: 100.0,
            feature_len_mean: 75.0,
        }])
        .unwrap()
        .with_rate_unit(93.0)
        .unwrap()
    }

    /// Region boundaries `[0, T_1, T_1 + T_2, ..., n]`.
    pub fn true_segmentation(&self) -> Segmentation {
        let mut cuts = vec![0];
        for r in &self.regions {
            cuts.push(cuts.last().unwrap() + r.length);
        }
        Segmentation::from_cuts_unchecked(cuts, Provenance::True)
    }

    pub fn space(&self) -> Arc<CoordinateSpace> {
        Arc::new(CoordinateSpace::single("sim", self.total_len()).unwrap())
    }
}

/// Geometric variate on `{1, 2, ...}` with the given mean.
fn geometric_mean<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    1 + Geometric::new(1.0 / mean).unwrap().sample(rng)
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).unwrap().sample(rng) as u64
    }
}

/// Draws one track on the space returned by [`NeymanScottParams::space`].
pub fn simulate_neyman_scott<R: Rng + ?Sized>(
    params: &NeymanScottParams,
    space: &Arc<CoordinateSpace>,
    rng: &mut R,
) -> Result<FeatureTrack> {
    params.validate()?;
    let n = params.total_len();
    if space.len() != n {
        return Err(GscError::param(
            "space",
            format!("length {} does not match region total {n}", space.len()),
        ));
    }
    let mut intervals = Vec::new();
    let mut region_start = 0u64;
    for r in &params.regions {
        let clusters = poisson(r.rate * r.length as f64 / params.rate_unit, rng);
        for _ in 0..clusters {
            let center = region_start + rng.random_range(0..r.length);
            for _ in 0..poisson(r.cluster_size, rng) {
                let offset = geometric_mean(r.offset_mean, rng) as i64;
                let signed = match params.offset_side {
                    OffsetSide::Symmetric if rng.random_bool(0.5) => -offset,
                    _ => offset,
                };
                let len = geometric_mean(r.feature_len_mean, rng) as i64;
                let start = (center as i64 + signed).clamp(0, n as i64);
                let end = (center as i64 + signed + len).clamp(0, n as i64);
                if start < end {
                    intervals.push(Interval::new(start as u64, end as u64));
                }
            }
        }
        region_start += r.length;
    }
    FeatureTrack::from_intervals(space.clone(), intervals)
}

/// Two independent tracks from the same regions plus the true boundaries.
pub fn simulate_piecewise_pair<R: Rng + ?Sized>(
    params: &NeymanScottParams,
    rng: &mut R,
) -> Result<(TrackPair, Segmentation)> {
    let space = params.space();
    let a = simulate_neyman_scott(params, &space, rng)?;
    let b = simulate_neyman_scott(params, &space, rng)?;
    Ok((TrackPair::new(a, b)?, params.true_segmentation()))
}

/// Markov sequence with feature I (pattern) as A and feature II (density)
/// as B, both derived from the same draw.
pub fn simulate_markov_pair<R: Rng + ?Sized>(
    params: &MarkovParams,
    rng: &mut R,
) -> Result<TrackPair> {
    let x = simulate_markov(params, rng);
    let a = derive_features(&x, DerivedFeatureRule::PatternMatch)?;
    let b = derive_features(&x, DerivedFeatureRule::RunDensity)?;
    TrackPair::new(a, b)
}

/// A Markov pair whose tracks come from two independent sequences.
pub fn simulate_independent_markov_pair<R: Rng + ?Sized>(
    params: &MarkovParams,
    rng: &mut R,
) -> Result<TrackPair> {
    let x = simulate_markov(params, rng);
    let y = simulate_markov(params, rng);
    let a = derive_features(&x, DerivedFeatureRule::PatternMatch)?;
    let b = derive_features(&y, DerivedFeatureRule::RunDensity)?;
    TrackPair::new(a, b)
}
