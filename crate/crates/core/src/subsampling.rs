//! Stationary and stratified block subsampling, variance estimates,
//! confidence intervals and data-driven block-length selection.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{GscError, Result};
use crate::rng;
use crate::segmentation::Segmentation;
use crate::stats::{PairedWindow, StatisticKind};
use crate::tracks::{Interval, TrackPair};

/// Default number of redraws for a replicate with a zero denominator.
pub const DEFAULT_RETRIES: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsampleParams {
    /// Total subsample length `L`.
    pub block_len: u64,
    /// Replicate count `B`.
    pub replicates: usize,
    pub seed: u64,
    pub max_retries: u32,
}

impl SubsampleParams {
    pub fn new(block_len: u64, replicates: usize, seed: u64) -> Self {
        SubsampleParams {
            block_len,
            replicates,
            seed,
            max_retries: DEFAULT_RETRIES,
        }
    }
}

/// Draws a block start uniformly on `{0, ..., n - len}`.
pub fn draw_stationary<R: Rng + ?Sized>(n: u64, len: u64, rng: &mut R) -> Result<u64> {
    if len == 0 || len >= n {
        return Err(GscError::param(
            "block_len",
            format!("{len} must be in [1, {n})"),
        ));
    }
    Ok(rng.random_range(0..=n - len))
}

/// Per-segment block lengths `ceil(n_i * L / n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratifiedLayout {
    /// `(segment, block length)` pairs.
    pub strata: Vec<(Interval, u64)>,
    pub block_len: u64,
}

impl StratifiedLayout {
    pub fn new(seg: &Segmentation, block_len: u64) -> Result<Self> {
        Self::scaled(seg, block_len, 1)
    }

    /// Layout whose per-segment blocks must fit `copies` times into their
    /// segment.
    pub(crate) fn scaled(seg: &Segmentation, block_len: u64, copies: u64) -> Result<Self> {
        let n = seg.n();
        if block_len == 0 || block_len >= n {
            return Err(GscError::param(
                "block_len",
                format!("{block_len} must be in [1, {n})"),
            ));
        }
        let mut strata = Vec::with_capacity(seg.region_count());
        for (i, r) in seg.regions().enumerate() {
            let len = (r.len() as u128 * block_len as u128).div_ceil(n as u128) as u64;
            if len * copies > r.len() {
                return Err(GscError::Infeasible(format!(
                    "segment {i} [{}, {}) of length {} cannot hold {copies} block(s) of length {len}",
                    r.start,
                    r.end,
                    r.len()
                )));
            }
            strata.push((r, len));
        }
        Ok(StratifiedLayout { strata, block_len })
    }

    /// Sum of the per-segment block lengths; at least `L` because of the
    /// ceiling.
    pub fn realized_len(&self) -> u64 {
        self.strata.iter().map(|(_, l)| l).sum()
    }

    /// One aligned block per segment with start uniform on
    /// `{t_{i-1}, ..., t_i - lambda_i}`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<PairedWindow> {
        self.strata
            .iter()
            .map(|&(r, len)| PairedWindow::aligned(rng.random_range(r.start..=r.end - len), len))
            .collect()
    }
}

/// One block per segment of `seg`, drawn for the pair's coordinate space.
pub fn draw_stratified<R: Rng + ?Sized>(
    pair: &TrackPair,
    seg: &Segmentation,
    block_len: u64,
    rng: &mut R,
) -> Result<Vec<PairedWindow>> {
    let seg = seg.with_boundaries(pair.space())?;
    Ok(StratifiedLayout::new(&seg, block_len)?.draw(rng))
}

/// Replicate values of a statistic plus their provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateDistribution {
    pub values: Vec<f64>,
    /// Nominal subsample length `L`.
    pub block_len: u64,
    /// Total length actually drawn per replicate.
    pub realized_len: u64,
    /// Replicates abandoned after repeated zero denominators.
    pub degenerate: usize,
    pub seed: u64,
}

impl ReplicateDistribution {
    pub fn requested(&self) -> usize {
        self.values.len() + self.degenerate
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Sample standard deviation (n - 1 denominator).
    pub fn sd(&self) -> f64 {
        sample_sd(&self.values)
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Type-7 (linear interpolation) quantile.
    pub fn quantile(&self, q: f64) -> f64 {
        quantile_sorted(&self.sorted(), q)
    }

    pub fn iqr(&self) -> f64 {
        let s = self.sorted();
        quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25)
    }

    /// Maps each value `v` to `center + sqrt(L / n) (v - mean)`, the scale of
    /// the full-length statistic.
    pub fn to_full_scale(&self, center: f64, n: u64) -> ReplicateDistribution {
        let m = self.mean();
        let f = (self.block_len as f64 / n as f64).sqrt();
        ReplicateDistribution {
            values: self.values.iter().map(|v| center + f * (v - m)).collect(),
            ..self.clone()
        }
    }

    pub fn summary(&self) -> ReplicateSummary {
        let s = self.sorted();
        let probs = [
            0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.975, 0.99,
        ];
        ReplicateSummary {
            count: s.len(),
            mean: self.mean(),
            sd: self.sd(),
            iqr: if s.is_empty() {
                f64::NAN
            } else {
                quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25)
            },
            quantiles: if s.is_empty() {
                Vec::new()
            } else {
                probs.iter().map(|&p| (p, quantile_sorted(&s, p))).collect()
            },
            degenerate: self.degenerate,
            block_len: self.block_len,
            realized_len: self.realized_len,
            seed: self.seed,
        }
    }

    /// One value per line.
    pub fn write_values(&self, mut out: impl Write) -> std::io::Result<()> {
        for v in &self.values {
            writeln!(out, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub iqr: f64,
    /// `(probability, value)` pairs.
    pub quantiles: Vec<(f64, f64)>,
    pub degenerate: usize,
    pub block_len: u64,
    pub realized_len: u64,
    pub seed: u64,
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub(crate) fn sample_sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
}

pub(crate) fn quantile_sorted(s: &[f64], q: f64) -> f64 {
    let h = (s.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(s.len() - 1);
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

/// Runs replicates `0..count` in parallel, each from its own stream, and
/// keeps them in index order. `draw` returns `None` for a degenerate draw;
/// such replicates are redrawn from the same stream up to `retries` times.
pub(crate) fn run_replicates<F>(count: usize, seed: u64, retries: u32, draw: F) -> (Vec<f64>, usize)
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Option<f64> + Sync,
{
    let results: Vec<Option<f64>> = (0..count as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(seed, b);
            (0..=retries).find_map(|_| draw(&mut rng))
        })
        .collect();
    let degenerate = results.iter().filter(|r| r.is_none()).count();
    (results.into_iter().flatten().collect(), degenerate)
}

/// Stratified block subsampling of `kind` with one block per segment.
/// Sequence boundaries of the pair's space are always added as cuts.
pub fn subsample(
    pair: &TrackPair,
    seg: &Segmentation,
    kind: &StatisticKind,
    params: &SubsampleParams,
) -> Result<ReplicateDistribution> {
    if params.replicates == 0 {
        return Err(GscError::param("replicates", "must be positive"));
    }
    let seg = seg.with_boundaries(pair.space())?;
    let layout = StratifiedLayout::new(&seg, params.block_len)?;
    let (values, degenerate) =
        run_replicates(params.replicates, params.seed, params.max_retries, |rng| {
            let windows = layout.draw(rng);
            match kind.evaluate_windows(pair, &windows) {
                Ok(v) => Some(v.value),
                Err(_) => None,
            }
        });
    if degenerate > 0 {
        log::warn!("{degenerate} degenerate replicates excluded");
    }
    Ok(ReplicateDistribution {
        values,
        block_len: params.block_len,
        realized_len: layout.realized_len(),
        degenerate,
        seed: params.seed,
    })
}

/// `L / B * sum (T*_b - mean)^2`.
pub fn subsample_variance(d: &ReplicateDistribution) -> Result<f64> {
    if d.values.len() < 2 {
        return Err(GscError::InsufficientReplicates {
            have: d.values.len(),
            need: 2,
        });
    }
    let m = d.mean();
    let ss: f64 = d.values.iter().map(|v| (v - m).powi(2)).sum();
    Ok(d.block_len as f64 * ss / d.values.len() as f64)
}

/// Standard error of the full-length statistic, `sqrt(variance / n)`.
pub fn standard_error(d: &ReplicateDistribution, n: u64) -> Result<f64> {
    Ok((subsample_variance(d)? / n as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    Gaussian,
    Percentile,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: CiMethod,
}

fn check_level(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(GscError::param(
            "level",
            format!("{level} is not in (0, 1)"),
        ));
    }
    Ok(1.0 - level)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// `obs +- z_{1 - alpha/2} sigma / sqrt(n)` with `sigma^2` the subsample
/// variance.
pub fn ci_gaussian(
    obs: f64,
    d: &ReplicateDistribution,
    n: u64,
    level: f64,
) -> Result<ConfidenceInterval> {
    let alpha = check_level(level)?;
    let half = normal_quantile(1.0 - alpha / 2.0) * standard_error(d, n)?;
    Ok(ConfidenceInterval {
        lower: obs - half,
        upper: obs + half,
        level,
        method: CiMethod::Gaussian,
    })
}

/// 1-based order-statistic indices `(floor(B alpha/2) + 1, ceil(B (1 - alpha/2)))`.
pub fn percentile_indices(b: usize, alpha: f64) -> (usize, usize) {
    const EPS: f64 = 1e-9;
    let lo = (b as f64 * alpha / 2.0 + EPS).floor() as usize + 1;
    let hi = (b as f64 * (1.0 - alpha / 2.0) - EPS).ceil() as usize;
    (lo.clamp(1, b), hi.clamp(1, b))
}

/// Order statistics of the replicate values bracketing the central `level`
/// mass.
pub fn ci_percentile(d: &ReplicateDistribution, level: f64) -> Result<ConfidenceInterval> {
    let alpha = check_level(level)?;
    let need = (2.0 / alpha - 1e-9).ceil() as usize;
    if d.values.len() < need.max(2) {
        return Err(GscError::InsufficientReplicates {
            have: d.values.len(),
            need: need.max(2),
        });
    }
    let s = d.sorted();
    let (lo, hi) = percentile_indices(s.len(), alpha);
    Ok(ConfidenceInterval {
        lower: s[lo - 1],
        upper: s[hi - 1],
        level,
        method: CiMethod::Percentile,
    })
}

/// One candidate of the block-length grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSizeCandidate {
    pub step: u32,
    pub block_len: u64,
    /// IQR of `sqrt(L) (T* - T_n)`.
    pub iqr: f64,
    /// Distance to the previous candidate's IQR; `None` for the first.
    pub distance: Option<f64>,
    pub degenerate: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSizeSelection {
    pub chosen: u64,
    pub rho: f64,
    pub steps: u32,
    pub candidates: Vec<BlockSizeCandidate>,
}

/// Picks `L` from the grid `L_v = rho^v n`, `v = 1..=steps`, by minimizing
/// the change in interquartile range of the scaled replicate distribution
/// between neighbouring grid points. Ties go to the larger `L`.
pub fn select_block_size(
    pair: &TrackPair,
    seg: &Segmentation,
    kind: &StatisticKind,
    rho: f64,
    steps: u32,
    replicates: usize,
    seed: u64,
) -> Result<BlockSizeSelection> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(GscError::param("rho", format!("{rho} is not in (0, 1)")));
    }
    let n = pair.len();
    let seg = seg.with_boundaries(pair.space())?;
    let observed = kind
        .evaluate_windows(
            pair,
            &seg.regions().map(PairedWindow::from).collect::<Vec<_>>(),
        )?
        .value;
    let mut candidates: Vec<BlockSizeCandidate> = Vec::new();
    for v in 1..=steps {
        let block_len = (rho.powi(v as i32) * n as f64).round() as u64;
        if block_len == 0 || candidates.last().is_some_and(|c| c.block_len == block_len) {
            continue;
        }
        if StratifiedLayout::new(&seg, block_len).is_err() {
            continue;
        }
        let params = SubsampleParams::new(block_len, replicates, rng::child_seed(seed, v as u64));
        let d = subsample(pair, &seg, kind, &params)?;
        if d.values.len() < 4 {
            continue;
        }
        let scale = (block_len as f64).sqrt();
        let scaled: Vec<f64> = d.values.iter().map(|t| scale * (t - observed)).collect();
        let mut sorted = scaled;
        sorted.sort_by(f64::total_cmp);
        let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
        let distance = candidates.last().map(|c| (iqr - c.iqr).abs());
        candidates.push(BlockSizeCandidate {
            step: v,
            block_len,
            iqr,
            distance,
            degenerate: d.degenerate,
        });
    }
    if candidates.len() < 2 {
        return Err(GscError::Infeasible(format!(
            "only {} feasible block length(s) on the grid",
            candidates.len()
        )));
    }
    let best = candidates
        .iter()
        .filter_map(|c| c.distance.map(|d| (c.block_len, d)))
        .fold(None::<(u64, f64)>, |acc, (l, d)| match acc {
            Some((_, bd)) if d >= bd => acc,
            _ => Some((l, d)),
        })
        .unwrap();
    Ok(BlockSizeSelection {
        chosen: best.0,
        rho,
        steps,
        candidates,
    })
}
