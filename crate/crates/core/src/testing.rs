//! Tests of independence between two tracks.
//!
//! The null distribution comes from cross-paired blocks: A is read from one
//! block and B from another block of the same segment, which keeps each
//! track's local structure and destroys their alignment. Each replicate
//! averages both orientations of the pairing.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GscError, Result};
use crate::normality::{lilliefors, Lilliefors, MIN_SAMPLE};
use crate::rng;
use crate::segmentation::Segmentation;
use crate::stats::{paired_counts_unchecked, PairedWindow, StatisticKind, WindowCounts};
use crate::subsampling::{
    mean, run_replicates, sample_sd, ReplicateDistribution, ReplicateSummary, StratifiedLayout,
    DEFAULT_RETRIES,
};
use crate::tracks::{FeatureTrack, Interval, TrackPair};

/// Which independence hypothesis to center on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// Independence given segment membership; stratified null.
    #[default]
    Conditional,
    /// Independence irrespective of segment identity; null drawn over the
    /// sequence boundaries only.
    Marginal,
}

impl std::str::FromStr for Formulation {
    type Err = GscError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conditional" => Ok(Formulation::Conditional),
            "marginal" => Ok(Formulation::Marginal),
            other => Err(GscError::param(
                "formulation",
                format!("unknown formulation '{other}' (expected conditional or marginal)"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// Large overlap indicates dependence.
    #[default]
    Greater,
    TwoSided,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestParams {
    /// Block length `L`.
    pub block_len: u64,
    pub replicates: usize,
    pub seed: u64,
    pub formulation: Formulation,
    /// Outer block length of the double bootstrap as a multiple of `L`.
    pub outer_multiplier: f64,
    /// Outer block pairs for the double bootstrap; defaults to `replicates`.
    pub outer_replicates: Option<usize>,
    /// Require the two blocks of a pair not to overlap.
    pub strict_disjoint: bool,
    pub alternative: Alternative,
    pub max_retries: u32,
}

impl TestParams {
    pub fn new(block_len: u64, replicates: usize, seed: u64) -> Self {
        TestParams {
            block_len,
            replicates,
            seed,
            formulation: Formulation::Conditional,
            outer_multiplier: 5.0,
            outer_replicates: None,
            strict_disjoint: false,
            alternative: Alternative::Greater,
            max_retries: DEFAULT_RETRIES,
        }
    }

    fn validate(&self, n: u64) -> Result<()> {
        if self.block_len == 0 || 2 * self.block_len > n {
            return Err(GscError::param(
                "block_len",
                format!(
                    "{} must be positive with two blocks fitting in {n}",
                    self.block_len
                ),
            ));
        }
        if self.replicates == 0 {
            return Err(GscError::param("replicates", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: String,
    pub formulation: Formulation,
    pub alternative: Alternative,
    pub observed: f64,
    pub center: f64,
    pub alpha: f64,
    pub critical_value: f64,
    /// `None` when the null replicates have no spread.
    pub z_score: Option<f64>,
    pub p_value: f64,
    /// Standard error of the observed statistic implied by the null.
    pub standard_error: f64,
    pub block_len: u64,
    pub null: ReplicateSummary,
    /// Double bootstrap only: the outer-block distribution used for centering.
    pub outer: Option<ReplicateSummary>,
    pub normality: Option<Lilliefors>,
    #[serde(skip)]
    pub null_values: Vec<f64>,
}

/// `sum_i lambda_i Ibar_i Jbar_i / Ibar` over the segments of `seg` (plus
/// sequence boundaries).
pub fn conditional_center(pair: &TrackPair, seg: &Segmentation) -> Result<f64> {
    let seg = seg.with_boundaries(pair.space())?;
    let n = pair.len() as f64;
    let mut num = 0.0;
    for r in seg.regions() {
        let len = r.len() as f64;
        let ibar = pair.a.coverage_in(r.start, r.end) as f64 / len;
        let jbar = pair.b.coverage_in(r.start, r.end) as f64 / len;
        num += len / n * ibar * jbar;
    }
    let ibar = pair.a.coverage() as f64 / n;
    if ibar == 0.0 {
        return Err(GscError::DegenerateDenominator("coverage of A"));
    }
    Ok(num / ibar)
}

/// Grand mean of B, the center under the marginal formulation.
pub fn marginal_center(pair: &TrackPair) -> f64 {
    pair.b.coverage() as f64 / pair.len() as f64
}

/// Draws pairs of distinct block starts per segment.
#[derive(Clone, Debug)]
pub struct PairedBlockSampler {
    layout: StratifiedLayout,
    strict: bool,
}

impl PairedBlockSampler {
    pub fn new(seg: &Segmentation, block_len: u64, strict: bool) -> Result<Self> {
        let layout = StratifiedLayout::scaled(seg, block_len, if strict { 2 } else { 1 })?;
        if let Some((i, (r, _))) = layout
            .strata
            .iter()
            .enumerate()
            .find(|(_, (r, len))| r.len() - len < 1)
        {
            return Err(GscError::Infeasible(format!(
                "segment {i} [{}, {}) has room for only one block start",
                r.start, r.end
            )));
        }
        Ok(PairedBlockSampler { layout, strict })
    }

    pub fn layout(&self) -> &StratifiedLayout {
        &self.layout
    }

    /// For each segment, the pairings `(A from K1, B from K2)` and
    /// `(A from K2, B from K1)`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<(PairedWindow, PairedWindow)> {
        self.layout
            .strata
            .iter()
            .map(|&(r, len)| {
                let (k1, k2) = distinct_starts(r, len, self.strict, rng);
                (
                    PairedWindow::crossed(k1, k2, len),
                    PairedWindow::crossed(k2, k1, len),
                )
            })
            .collect()
    }
}

/// Two different starts for blocks of length `len` inside `r`, uniform over
/// ordered pairs. With `strict`, the blocks do not overlap.
fn distinct_starts<R: Rng + ?Sized>(
    r: Interval,
    len: u64,
    strict: bool,
    rng: &mut R,
) -> (u64, u64) {
    let last = r.end - len;
    if strict {
        // choose x < y from {0, ..., last - start - len + 1}, then space them
        let top = last - r.start - len + 1;
        let x = rng.random_range(0..=top);
        let mut y = rng.random_range(0..top);
        if y >= x {
            y += 1;
        }
        let (x, y) = (x.min(y), x.max(y));
        let (k1, k2) = (r.start + x, r.start + y + len - 1);
        if rng.random_bool(0.5) {
            (k1, k2)
        } else {
            (k2, k1)
        }
    } else {
        let k1 = rng.random_range(r.start..=last);
        let mut k2 = rng.random_range(r.start..last);
        if k2 >= k1 {
            k2 += 1;
        }
        (k1, k2)
    }
}

/// Null replicate `T* = F* - J*` of the overlap fraction from one draw.
///
/// `F*` averages the two orientations, each pooling joint and A coverage
/// over segments. `J*` weights each segment's B mean by its A coverage,
/// both summed over the two blocks.
pub fn null_replicate_bp(pair: &TrackPair, draws: &[(PairedWindow, PairedWindow)]) -> Result<f64> {
    let mut c1 = WindowCounts::default();
    let mut c2 = WindowCounts::default();
    let mut j_num = 0.0;
    let mut j_den = 0.0;
    for &(w1, w2) in draws {
        let x = paired_counts_unchecked(pair, w1);
        let y = paired_counts_unchecked(pair, w2);
        let a = (x.a_cov + y.a_cov) as f64;
        let b = (x.b_cov + y.b_cov) as f64;
        j_num += a * b / (2.0 * w1.len as f64);
        j_den += a;
        c1 += x;
        c2 += y;
    }
    if c1.a_cov == 0 || c2.a_cov == 0 || j_den == 0.0 {
        return Err(GscError::DegenerateDenominator("coverage of A in a block"));
    }
    let f = 0.5 * (c1.joint as f64 / c1.a_cov as f64 + c2.joint as f64 / c2.a_cov as f64);
    Ok(f - j_num / j_den)
}

fn null_segmentation(
    pair: &TrackPair,
    seg: &Segmentation,
    formulation: Formulation,
) -> Result<Segmentation> {
    match formulation {
        Formulation::Conditional => seg.with_boundaries(pair.space()),
        Formulation::Marginal => Ok(Segmentation::natural(pair.space())),
    }
}

/// Null distribution of `T*` for the overlap fraction.
pub fn null_distribution_bp(
    pair: &TrackPair,
    seg: &Segmentation,
    params: &TestParams,
) -> Result<ReplicateDistribution> {
    params.validate(pair.len())?;
    let seg = null_segmentation(pair, seg, params.formulation)?;
    let sampler = PairedBlockSampler::new(&seg, params.block_len, params.strict_disjoint)?;
    let (values, degenerate) =
        run_replicates(params.replicates, params.seed, params.max_retries, |rng| {
            null_replicate_bp(pair, &sampler.draw(rng)).ok()
        });
    Ok(ReplicateDistribution {
        values,
        block_len: params.block_len,
        realized_len: sampler.layout().realized_len(),
        degenerate,
        seed: params.seed,
    })
}

struct Decision {
    critical_value: f64,
    z_score: Option<f64>,
    p_value: f64,
}

/// Compares `observed` against `center + scale * T*`.
fn decide(
    observed: f64,
    center: f64,
    scale: f64,
    tstar: &[f64],
    alpha: f64,
    alt: Alternative,
) -> Result<Decision> {
    if tstar.is_empty() {
        return Err(GscError::InsufficientReplicates { have: 0, need: 1 });
    }
    let mut sorted = tstar.to_vec();
    sorted.sort_by(f64::total_cmp);
    let b = sorted.len();
    let tail = match alt {
        Alternative::Greater => alpha,
        Alternative::TwoSided => alpha / 2.0,
    };
    let idx = ((b as f64 * (1.0 - tail) - 1e-9).ceil() as usize).clamp(1, b);
    let critical_value = center + scale * sorted[idx - 1];

    let dev = (observed - center) / scale;
    let upper = (1 + sorted.iter().filter(|&&t| t >= dev).count()) as f64 / (b + 1) as f64;
    let p_value = match alt {
        Alternative::Greater => upper,
        Alternative::TwoSided => {
            let lower = (1 + sorted.iter().filter(|&&t| t <= dev).count()) as f64 / (b + 1) as f64;
            (2.0 * upper.min(lower)).min(1.0)
        }
    };
    let sd = if b > 1 { sample_sd(tstar) } else { 0.0 };
    let z_score = (sd > 0.0).then(|| (observed - center) / (scale * sd));
    Ok(Decision {
        critical_value,
        z_score,
        p_value,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GscError::param(
            "alpha",
            format!("{alpha} is not in (0, 1)"),
        ));
    }
    Ok(())
}

fn normality_of(values: &[f64]) -> Option<Lilliefors> {
    (values.len() >= MIN_SAMPLE)
        .then(|| lilliefors(values).ok())
        .flatten()
}

/// Test of the overlap fraction `B_n` against independence.
pub fn test_bp_overlap(
    pair: &TrackPair,
    seg: &Segmentation,
    params: &TestParams,
    alpha: f64,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    let n = pair.len();
    let observed = StatisticKind::BpOverlapFraction
        .evaluate(&paired_counts_unchecked(pair, PairedWindow::aligned(0, n)))?
        .value;
    let center = match params.formulation {
        Formulation::Conditional => conditional_center(pair, seg)?,
        Formulation::Marginal => marginal_center(pair),
    };
    let dist = null_distribution_bp(pair, seg, params)?;
    let scale = (2.0 * params.block_len as f64 / n as f64).sqrt();
    let d = decide(
        observed,
        center,
        scale,
        &dist.values,
        alpha,
        params.alternative,
    )?;
    Ok(TestResult {
        statistic: StatisticKind::BpOverlapFraction.label().to_string(),
        formulation: params.formulation,
        alternative: params.alternative,
        observed,
        center,
        alpha,
        critical_value: d.critical_value,
        z_score: d.z_score,
        p_value: d.p_value,
        standard_error: scale
            * if dist.values.len() > 1 {
                dist.sd()
            } else {
                0.0
            },
        block_len: params.block_len,
        null: dist.summary(),
        outer: None,
        normality: normality_of(&dist.values),
        null_values: dist.values,
    })
}

/// Uniform draw of two distinct starts for blocks of length `len` that do
/// not cross a sequence boundary.
fn distinct_global_starts<R: Rng + ?Sized>(
    seqs: &[(Interval, u64)],
    total: u64,
    rng: &mut R,
) -> (u64, u64) {
    let locate = |mut u: u64| {
        for &(r, count) in seqs {
            if u < count {
                return r.start + u;
            }
            u -= count;
        }
        unreachable!("start index beyond total")
    };
    let u1 = rng.random_range(0..total);
    let mut u2 = rng.random_range(0..total - 1);
    if u2 >= u1 {
        u2 += 1;
    }
    (locate(u1), locate(u2))
}

/// Region-overlap test with a double bootstrap.
///
/// Stage one centers `R_n`: pairs of long blocks of length `m L`, placed
/// anywhere within a sequence, are cross-paired in both orientations and the
/// region overlaps averaged. Stage two takes the spread from cross-paired
/// blocks of length `L` stratified by `seg`.
pub fn double_bootstrap_region_overlap(
    pair: &TrackPair,
    seg: &Segmentation,
    params: &TestParams,
    alpha: f64,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    params.validate(pair.len())?;
    if !(params.outer_multiplier >= 2.0 && params.outer_multiplier.is_finite()) {
        return Err(GscError::param(
            "outer_multiplier",
            format!("{} must be at least 2", params.outer_multiplier),
        ));
    }
    let n = pair.len();
    let observed = StatisticKind::RegionOverlap
        .evaluate(&paired_counts_unchecked(pair, PairedWindow::aligned(0, n)))?
        .value;

    // stage one
    let outer_len = (params.outer_multiplier * params.block_len as f64).round() as u64;
    let seqs: Vec<(Interval, u64)> = pair
        .space()
        .sequence_intervals()
        .filter(|r| r.len() >= outer_len)
        .map(|r| (r, r.len() - outer_len + 1))
        .collect();
    let total: u64 = seqs.iter().map(|s| s.1).sum();
    if total < 2 {
        return Err(GscError::Infeasible(format!(
            "outer blocks of length {outer_len} do not fit twice in any sequence"
        )));
    }
    let outer_seed = rng::child_seed(params.seed, 1);
    let outer_count = params.outer_replicates.unwrap_or(params.replicates);
    let (outer_values, outer_degenerate) =
        run_replicates(outer_count, outer_seed, params.max_retries, |rng| {
            let (k1, k2) = distinct_global_starts(&seqs, total, rng);
            let x = paired_counts_unchecked(pair, PairedWindow::crossed(k1, k2, outer_len));
            let y = paired_counts_unchecked(pair, PairedWindow::crossed(k2, k1, outer_len));
            if x.a_instances == 0 || y.a_instances == 0 {
                return None;
            }
            Some(
                0.5 * (x.hits as f64 / x.a_instances as f64 + y.hits as f64 / y.a_instances as f64),
            )
        });
    if outer_values.is_empty() {
        return Err(GscError::InsufficientReplicates { have: 0, need: 1 });
    }
    let center = mean(&outer_values);
    let outer = ReplicateDistribution {
        values: outer_values,
        block_len: outer_len,
        realized_len: outer_len,
        degenerate: outer_degenerate,
        seed: outer_seed,
    };

    // stage two
    let seg = seg.with_boundaries(pair.space())?;
    let sampler = PairedBlockSampler::new(&seg, params.block_len, params.strict_disjoint)?;
    let inner_seed = rng::child_seed(params.seed, 2);
    let (values, degenerate) =
        run_replicates(params.replicates, inner_seed, params.max_retries, |rng| {
            let mut c1 = WindowCounts::default();
            let mut c2 = WindowCounts::default();
            for (w1, w2) in sampler.draw(rng) {
                c1 += paired_counts_unchecked(pair, w1);
                c2 += paired_counts_unchecked(pair, w2);
            }
            if c1.a_instances == 0 || c2.a_instances == 0 {
                return None;
            }
            Some(
                0.5 * (c1.hits as f64 / c1.a_instances as f64
                    + c2.hits as f64 / c2.a_instances as f64),
            )
        });
    if values.is_empty() {
        return Err(GscError::InsufficientReplicates { have: 0, need: 1 });
    }
    let inner_mean = mean(&values);
    let tstar: Vec<f64> = values.iter().map(|v| v - inner_mean).collect();
    let inner = ReplicateDistribution {
        values,
        block_len: params.block_len,
        realized_len: sampler.layout().realized_len(),
        degenerate,
        seed: inner_seed,
    };

    let scale = (2.0 * params.block_len as f64 / n as f64).sqrt();
    let d = decide(observed, center, scale, &tstar, alpha, params.alternative)?;
    Ok(TestResult {
        statistic: StatisticKind::RegionOverlap.label().to_string(),
        formulation: Formulation::Marginal,
        alternative: params.alternative,
        observed,
        center,
        alpha,
        critical_value: d.critical_value,
        z_score: d.z_score,
        p_value: d.p_value,
        standard_error: scale
            * if inner.values.len() > 1 {
                inner.sd()
            } else {
                0.0
            },
        block_len: params.block_len,
        null: inner.summary(),
        outer: Some(outer.summary()),
        normality: normality_of(&inner.values),
        null_values: inner.values,
    })
}

/// Attempts per instance before a shuffle replicate is abandoned.
const PLACEMENT_ATTEMPTS: usize = 10_000;

/// Places instances of the given lengths uniformly inside `seq`, one at a
/// time, rejecting starts that overlap or touch an instance already placed.
fn place_instances<R: Rng + ?Sized>(
    seq: Interval,
    lengths: &[u64],
    rng: &mut R,
) -> Option<Vec<Interval>> {
    let mut placed: BTreeMap<u64, u64> = BTreeMap::new();
    for &len in lengths {
        let mut ok = false;
        for _ in 0..PLACEMENT_ATTEMPTS {
            let s = rng.random_range(seq.start..=seq.end - len);
            let e = s + len;
            let clear_before = placed.range(..=s).next_back().is_none_or(|(_, &pe)| pe < s);
            let clear_after = placed.range(s..).next().is_none_or(|(&ps, _)| e < ps);
            if clear_before && clear_after {
                placed.insert(s, e);
                ok = true;
                break;
            }
        }
        if !ok {
            return None;
        }
    }
    Some(
        placed
            .into_iter()
            .map(|(s, e)| Interval::new(s, e))
            .collect(),
    )
}

/// Null distribution from start-site shuffling: A stays fixed, and B's
/// instances are placed uniformly at random within their sequence without
/// overlapping or touching. This ignores clumping and heterogeneity and is
/// provided as the naive comparator.
///
/// Replicates are full-length statistics, so the returned distribution uses
/// `block_len = n`.
pub fn shuffle_baseline(
    pair: &TrackPair,
    kind: &StatisticKind,
    replicates: usize,
    seed: u64,
) -> Result<ReplicateDistribution> {
    let space = pair.space().clone();
    let mut per_seq: Vec<(Interval, Vec<u64>)> = Vec::new();
    for r in space.sequence_intervals() {
        let mut lengths: Vec<u64> = pair
            .b
            .runs_overlapping(r.start, r.end)
            .iter()
            .map(Interval::len)
            .collect();
        let total: u64 = lengths.iter().sum();
        if !lengths.is_empty() && total >= r.len() {
            return Err(GscError::Infeasible(format!(
                "instances of B cover {total} bases of a sequence of length {}",
                r.len()
            )));
        }
        lengths.sort_unstable_by(|a, b| b.cmp(a));
        per_seq.push((r, lengths));
    }
    let n = pair.len();
    let failures = std::sync::atomic::AtomicUsize::new(0);
    let (values, degenerate) =
        run_replicates(replicates, seed, DEFAULT_RETRIES, |rng: &mut ChaCha8Rng| {
            let mut runs = Vec::new();
            for (r, lengths) in &per_seq {
                let mut order = lengths.clone();
                order.shuffle(rng);
                order.sort_by(|a, b| b.cmp(a));
                match place_instances(*r, &order, rng) {
                    Some(v) => runs.extend(v),
                    None => {
                        failures.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                        return None;
                    }
                }
            }
            let b = FeatureTrack::from_intervals(space.clone(), runs).ok()?;
            let shuffled = TrackPair {
                a: pair.a.clone(),
                b,
            };
            kind.evaluate(&paired_counts_unchecked(
                &shuffled,
                PairedWindow::aligned(0, n),
            ))
            .ok()
            .map(|v| v.value)
        });
    let failed = failures.into_inner();
    if failed > 0 && values.is_empty() {
        return Err(GscError::Infeasible(
            "could not place the instances of B".into(),
        ));
    }
    Ok(ReplicateDistribution {
        values,
        block_len: n,
        realized_len: n,
        degenerate,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::segmentation::Provenance;
    use crate::tracks::CoordinateSpace;
    use std::sync::Arc;

    fn pair_from(n: u64, a: &[(u64, u64)], b: &[(u64, u64)]) -> TrackPair {
        let sp = Arc::new(CoordinateSpace::single("s", n).unwrap());
        let mk = |v: &[(u64, u64)]| {
            FeatureTrack::from_intervals(sp.clone(), v.iter().map(|&(s, e)| Interval::new(s, e)))
                .unwrap()
        };
        TrackPair::new(mk(a), mk(b)).unwrap()
    }

    #[test]
    fn conditional_center_examples() {
        // segments [0,10) and [10,20): Ibar 0.2 / 0.4, Jbar 0.1 / 0.3
        let p = pair_from(20, &[(0, 2), (10, 14)], &[(5, 6), (15, 18)]);
        let seg = Segmentation::new(vec![0, 10, 20], Provenance::Manual).unwrap();
        let c = conditional_center(&p, &seg).unwrap();
        assert!((c - (0.5 * 0.02 + 0.5 * 0.12) / 0.3).abs() < 1e-12);
        let single = conditional_center(&p, &Segmentation::trivial(20).unwrap()).unwrap();
        assert!((single - marginal_center(&p)).abs() < 1e-15);
        let empty_a = pair_from(20, &[], &[(1, 3)]);
        assert!(conditional_center(&empty_a, &seg).is_err());
    }

    #[test]
    fn constant_a_gives_zero_replicates() {
        let p = pair_from(1000, &[(0, 1000)], &[(10, 40), (300, 320), (700, 790)]);
        let seg = Segmentation::new(vec![0, 400, 1000], Provenance::Manual).unwrap();
        let d = null_distribution_bp(&p, &seg, &TestParams::new(100, 200, 4)).unwrap();
        assert!(d.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn swapping_orientation_leaves_replicate_unchanged() {
        let p = pair_from(
            500,
            &[(10, 60), (200, 230), (400, 480)],
            &[(50, 100), (220, 300)],
        );
        let w1 = PairedWindow::crossed(0, 250, 200);
        let w2 = PairedWindow::crossed(250, 0, 200);
        let x = null_replicate_bp(&p, &[(w1, w2)]).unwrap();
        let y = null_replicate_bp(&p, &[(w2, w1)]).unwrap();
        assert!((x - y).abs() < 1e-15);
    }

    #[test]
    fn distinct_starts_respect_constraints() {
        let r = Interval::new(100, 200);
        let mut rng = stream(3, 0);
        for _ in 0..2000 {
            let (k1, k2) = distinct_starts(r, 30, false, &mut rng);
            assert_ne!(k1, k2);
            assert!((100..=170).contains(&k1) && (100..=170).contains(&k2));
            let (k1, k2) = distinct_starts(r, 30, true, &mut rng);
            assert!(k1.abs_diff(k2) >= 30);
            assert!(k1.max(k2) <= 170 && k1.min(k2) >= 100);
        }
        // exact fit: the only disjoint pairs are (100, 150) and (150, 100)
        for _ in 0..50 {
            let (k1, k2) = distinct_starts(r, 50, true, &mut rng);
            assert_eq!(k1.min(k2), 100);
            assert_eq!(k1.max(k2), 150);
        }
    }

    #[test]
    fn decision_rule() {
        let tstar: Vec<f64> = (1..=99).map(|i| i as f64 / 100.0).collect();
        // dev = 0.5; 50 replicates are at least that large
        let d = decide(1.0, 0.5, 1.0, &tstar, 0.05, Alternative::Greater).unwrap();
        assert!((d.p_value - 51.0 / 100.0).abs() < 1e-12);
        // ceil(99 * 0.95) = 95th order statistic
        assert!((d.critical_value - 1.45).abs() < 1e-12);
        let hi = decide(2.0, 0.5, 1.0, &tstar, 0.05, Alternative::Greater).unwrap();
        assert!((hi.p_value - 0.01).abs() < 1e-12);
        let two = decide(2.0, 0.5, 1.0, &tstar, 0.05, Alternative::TwoSided).unwrap();
        assert!((two.p_value - 0.02).abs() < 1e-12);
        let flat = decide(1.0, 0.5, 1.0, &[0.0; 10], 0.05, Alternative::Greater).unwrap();
        assert!(flat.z_score.is_none());
    }

    #[test]
    fn p_value_is_monotone_in_observed() {
        let tstar: Vec<f64> = (0..200)
            .map(|i| ((i * 37) % 101) as f64 / 50.0 - 1.0)
            .collect();
        let mut last = 1.0;
        for k in 0..40 {
            let obs = -1.5 + k as f64 * 0.08;
            let p = decide(obs, 0.0, 1.0, &tstar, 0.05, Alternative::Greater)
                .unwrap()
                .p_value;
            assert!(p <= last);
            last = p;
        }
    }

    #[test]
    fn critical_value_decreases_with_alpha() {
        let tstar: Vec<f64> = (0..500)
            .map(|i| ((i * 7919) % 1000) as f64 / 1000.0)
            .collect();
        let mut last = f64::INFINITY;
        for alpha in [0.01, 0.05, 0.1, 0.2, 0.5] {
            let c = decide(0.0, 0.0, 1.0, &tstar, alpha, Alternative::Greater)
                .unwrap()
                .critical_value;
            assert!(c <= last);
            last = c;
        }
    }

    #[test]
    fn self_overlap_is_rejected() {
        let runs: Vec<(u64, u64)> = (0..200)
            .map(|k| (k * 100 + (k * 37) % 50, k * 100 + (k * 37) % 50 + 20))
            .collect();
        let p = pair_from(20_000, &runs, &runs);
        let seg = Segmentation::trivial(20_000).unwrap();
        let r = test_bp_overlap(&p, &seg, &TestParams::new(1000, 499, 8), 0.05).unwrap();
        assert!(r.p_value < 0.01, "p = {}", r.p_value);
        assert!(r.z_score.unwrap() > 5.0);
        assert!(r.observed > r.critical_value);
    }

    #[test]
    fn double_bootstrap_empty_b_centers_at_zero() {
        let p = pair_from(10_000, &[(100, 150), (4000, 4100), (8000, 8020)], &[]);
        let seg = Segmentation::trivial(10_000).unwrap();
        let r = double_bootstrap_region_overlap(&p, &seg, &TestParams::new(1000, 100, 2), 0.05);
        match r {
            Ok(r) => assert_eq!(r.center, 0.0),
            Err(e) => assert!(matches!(e, GscError::InsufficientReplicates { .. }), "{e}"),
        }
        let mut params = TestParams::new(1000, 10, 2);
        params.outer_multiplier = 20.0;
        assert!(double_bootstrap_region_overlap(&p, &seg, &params, 0.05).is_err());
    }

    #[test]
    fn shuffle_examples() {
        let p = pair_from(1000, &[(10, 50), (500, 600)], &[]);
        let d = shuffle_baseline(&p, &StatisticKind::BpOverlapFraction, 20, 1).unwrap();
        assert!(d.values.iter().all(|&v| v == 0.0));
        let full = pair_from(100, &[(10, 50)], &[(0, 100)]);
        assert!(shuffle_baseline(&full, &StatisticKind::BpOverlapFraction, 5, 1).is_err());

        let p = pair_from(2000, &[(0, 1000)], &[(10, 20), (30, 60), (900, 905)]);
        let d = shuffle_baseline(&p, &StatisticKind::MeanOverlap, 50, 9).unwrap();
        assert_eq!(d.values.len(), 50);
        assert!(d.values.iter().all(|&v| v <= 45.0 / 2000.0 + 1e-15));
        let again = shuffle_baseline(&p, &StatisticKind::MeanOverlap, 50, 9).unwrap();
        assert_eq!(d, again);
    }
}
