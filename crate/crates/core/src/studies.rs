//! Simulation studies with fixed seeds, shared by the command-line
//! `reproduce` subcommand and the acceptance suite.
//!
//! Every study is a pure function of its config. Simulated units draw from
//! `rng::stream(child_seed(seed, tag), index)` so results do not depend on
//! the thread count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GscError, Result};
use crate::normality::lilliefors;
use crate::rng::{child_seed, stream};
use crate::segmentation::{segment_pair, Segmentation, SegmentationParams, Signal};
use crate::simulate::{
    derive_features, simulate_independent_markov_pair, simulate_markov, simulate_piecewise_pair,
    DerivedFeatureRule, MarkovParams, NeymanScottParams,
};
use crate::stats::{paired_counts_unchecked, PairedWindow, StatisticKind};
use crate::subsampling::{
    mean, run_replicates, sample_sd, standard_error, subsample, SubsampleParams,
};
use crate::testing::{
    double_bootstrap_region_overlap, shuffle_baseline, test_bp_overlap, TestParams, TestResult,
};
use crate::tracks::TrackPair;

/// One row of a pass/fail table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance band.
    pub target: String,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, value: f64, target: impl Into<String>, pass: bool) -> Self {
        Check {
            name: name.to_string(),
            value,
            target: target.into(),
            pass,
        }
    }

    fn within(name: &str, value: f64, lo: f64, hi: f64) -> Self {
        Check::new(
            name,
            value,
            format!("[{lo}, {hi}]"),
            value >= lo && value <= hi,
        )
    }
}

/// Equal-width histogram for external plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub label: String,
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(label: impl Into<String>, values: &[f64], bins: usize) -> Self {
        let bins = bins.max(1);
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if values.is_empty() {
            (0.0, 1.0)
        } else if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        };
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0; bins];
        for v in values {
            let i = (((v - lo) / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
        Histogram {
            label: label.into(),
            edges,
            counts,
        }
    }

    /// `label\tlo\thi\tcount` lines.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        for (i, c) in self.counts.iter().enumerate() {
            s.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                self.label,
                self.edges[i],
                self.edges[i + 1],
                c
            ));
        }
        s
    }
}

fn sd(values: &[f64]) -> f64 {
    if values.len() < 2 {
        0.0
    } else {
        sample_sd(values)
    }
}

fn whole(pair: &TrackPair, kind: &StatisticKind) -> Result<f64> {
    Ok(kind
        .evaluate(&paired_counts_unchecked(
            pair,
            PairedWindow::aligned(0, pair.len()),
        ))?
        .value)
}

/// Runs `f` on streams `0..count` of `seed` in parallel, in index order.
fn par_streams<T: Send>(
    count: usize,
    seed: u64,
    f: impl Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| f(&mut stream(seed, i)))
        .collect()
}

// ---------------------------------------------------------------------------
// Simulation I: clumped Markov features

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sim1Config {
    pub n: usize,
    pub p0: f64,
    pub window: usize,
    /// Sequences for the Monte Carlo truth.
    pub truth_sequences: usize,
    /// Observed sequences on which the estimators are run and averaged.
    pub analysis_sequences: usize,
    pub replicates: usize,
    pub block_len: u64,
    pub seed: u64,
}

impl Default for Sim1Config {
    fn default() -> Self {
        Sim1Config {
            n: 10_000,
            p0: 0.5,
            window: 20,
            truth_sequences: 10_000,
            analysis_sequences: 10,
            replicates: 1000,
            block_len: 40,
            seed: 2010,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sim1Report {
    pub config: Sim1Config,
    pub truth_mean: f64,
    pub truth_sd: f64,
    pub bootstrap_sd: f64,
    pub randomization_sd: f64,
    pub block_sd: f64,
    pub checks: Vec<Check>,
    pub histograms: Vec<Histogram>,
}

/// Distribution of the overlap `S` of pattern sites with dense sites
/// estimated four ways: Monte Carlo truth, base-by-base bootstrap of the
/// sequence, start-site randomization of the dense sites, and concatenated
/// blocks of length `block_len`.
pub fn sim1(config: &Sim1Config) -> Result<Sim1Report> {
    let params = MarkovParams::new(config.n, config.p0, config.window)?;
    let kind = StatisticKind::BpOverlapFraction;
    let derive = |x: &[u8]| -> Result<TrackPair> {
        TrackPair::new(
            derive_features(x, DerivedFeatureRule::PatternMatch)?,
            derive_features(x, DerivedFeatureRule::RunDensity)?,
        )
    };
    let truth: Vec<f64> = par_streams(config.truth_sequences, child_seed(config.seed, 1), |rng| {
        let pair = derive(&simulate_markov(&params, rng))?;
        Ok(whole(&pair, &kind).ok())
    })?
    .into_iter()
    .flatten()
    .collect();

    let n = config.n as u64;
    let blocks = n.div_ceil(config.block_len) as usize;
    let analysis_seed = child_seed(config.seed, 2);
    let mut boot_sd = Vec::new();
    let mut rand_sd = Vec::new();
    let mut block_sd = Vec::new();
    let mut hist = Vec::new();
    for i in 0..config.analysis_sequences as u64 {
        let x = simulate_markov(&params, &mut stream(analysis_seed, i));
        let pair = derive(&x)?;
        let rep_seed = child_seed(analysis_seed, i);
        let (boot, _) = run_replicates(config.replicates, child_seed(rep_seed, 1), 10, |rng| {
            let y: Vec<u8> = (0..x.len())
                .map(|_| x[rng.random_range(0..x.len())])
                .collect();
            derive(&y).ok().and_then(|p| whole(&p, &kind).ok())
        });
        let shuffled = shuffle_baseline(&pair, &kind, config.replicates, child_seed(rep_seed, 2))?;
        let (block, _) = run_replicates(config.replicates, child_seed(rep_seed, 3), 10, |rng| {
            let windows: Vec<PairedWindow> = (0..blocks)
                .map(|_| {
                    PairedWindow::aligned(
                        rng.random_range(0..=n - config.block_len),
                        config.block_len,
                    )
                })
                .collect();
            kind.evaluate_windows(&pair, &windows).ok().map(|v| v.value)
        });
        boot_sd.push(sd(&boot));
        rand_sd.push(shuffled.sd());
        block_sd.push(sd(&block));
        if i == 0 {
            let center = |v: &[f64]| -> Vec<f64> {
                let m = mean(v);
                v.iter().map(|x| x - m).collect()
            };
            hist.push(Histogram::new("truth", &center(&truth), 40));
            hist.push(Histogram::new("bootstrap", &center(&boot), 40));
            hist.push(Histogram::new(
                "randomization",
                &center(&shuffled.values),
                40,
            ));
            hist.push(Histogram::new("block", &center(&block), 40));
        }
    }
    let truth_sd = sd(&truth);
    let (bootstrap_sd, randomization_sd, block_sd) =
        (mean(&boot_sd), mean(&rand_sd), mean(&block_sd));
    let checks = vec![
        Check::new(
            "bootstrap sd / truth",
            bootstrap_sd / truth_sd,
            "< 1",
            bootstrap_sd < truth_sd,
        ),
        Check::new(
            "randomization sd / truth",
            randomization_sd / truth_sd,
            "< 1",
            randomization_sd < truth_sd,
        ),
        Check::within("block sd / truth", block_sd / truth_sd, 0.7, 1.3),
    ];
    Ok(Sim1Report {
        config: config.clone(),
        truth_mean: mean(&truth),
        truth_sd,
        bootstrap_sd,
        randomization_sd,
        block_sd,
        checks,
        histograms: hist,
    })
}

// ---------------------------------------------------------------------------
// Simulation IIa: two homogeneous regions

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sim2aConfig {
    pub model: NeymanScottParams,
    pub statistic: StatisticKind,
    pub truth_pairs: usize,
    /// Observed pairs on which each estimator is run; estimates are averaged.
    pub analysis_pairs: usize,
    pub replicates: usize,
    pub block_len: u64,
    pub min_segment: u64,
    /// Stopping threshold `b`; the block length doubles as the variance hint.
    pub threshold: f64,
    pub signal: Signal,
    pub recovery_runs: usize,
    pub recovery_tolerance: u64,
    /// Block lengths for the normality comparison.
    pub normality_grid: Vec<u64>,
    pub normality_pairs: usize,
    pub seed: u64,
}

impl Default for Sim2aConfig {
    fn default() -> Self {
        Sim2aConfig {
            model: NeymanScottParams::two_region(),
            statistic: StatisticKind::MeanOverlap,
            truth_pairs: 2000,
            analysis_pairs: 20,
            replicates: 1000,
            block_len: 1000,
            min_segment: 2000,
            threshold: 20.0,
            signal: Signal::A,
            recovery_runs: 200,
            recovery_tolerance: 500,
            normality_grid: vec![200, 400, 800, 1600, 3200],
            normality_pairs: 10,
            seed: 2011,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sim2aReport {
    pub config: Sim2aConfig,
    pub truth_mean: f64,
    pub truth_sd: f64,
    pub shuffle_sd: f64,
    pub unsegmented_sd: f64,
    pub true_segmentation_sd: f64,
    pub estimated_segmentation_sd: f64,
    /// Fraction of runs whose estimated cuts all lie within the tolerance of
    /// the true change-point.
    pub recovery_rate: f64,
    pub normality_unsegmented_rejections: usize,
    pub normality_segmented_rejections: usize,
    pub normality_tests: usize,
    pub checks: Vec<Check>,
    pub histograms: Vec<Histogram>,
}

impl Sim2aReport {
    /// Rows of method, standard error and fold change from the truth.
    pub fn table(&self) -> Vec<(String, f64, Option<f64>)> {
        let t = self.truth_sd;
        vec![
            ("True value".into(), t, None),
            (
                "Uniform shuffle".into(),
                self.shuffle_sd,
                Some(self.shuffle_sd / t),
            ),
            (
                "Subsample, no segmentation".into(),
                self.unsegmented_sd,
                Some(self.unsegmented_sd / t),
            ),
            (
                "Subsample, true segmentation".into(),
                self.true_segmentation_sd,
                Some(self.true_segmentation_sd / t),
            ),
            (
                "Subsample, estimated segmentation".into(),
                self.estimated_segmentation_sd,
                Some(self.estimated_segmentation_sd / t),
            ),
        ]
    }
}

/// Whether `seg` has as many interior cuts as `truth`, each within `tol` of
/// a true cut and vice versa.
fn cuts_recovered(seg: &Segmentation, truth: &Segmentation, tol: u64) -> bool {
    let near = |x: u64, set: &[u64]| set.iter().any(|&y| x.abs_diff(y) <= tol);
    let (est, tru) = (seg.interior_cuts(), truth.interior_cuts());
    est.len() == tru.len() && est.iter().all(|&c| near(c, tru)) && tru.iter().all(|&c| near(c, est))
}

/// Standard error of the mean base-pair overlap on the two-region model
/// estimated by shuffling and by block subsampling with no, true and
/// estimated segmentation, plus change-point recovery and a normality
/// comparison across block lengths.
pub fn sim2a(config: &Sim2aConfig) -> Result<Sim2aReport> {
    let kind = config.statistic.clone();
    let model = &config.model;
    let seg_params = SegmentationParams::new(
        config.min_segment,
        config.threshold,
        Some(config.block_len),
        config.signal,
    )?;
    let truth: Vec<f64> = par_streams(config.truth_pairs, child_seed(config.seed, 1), |rng| {
        let (pair, _) = simulate_piecewise_pair(model, rng)?;
        Ok(whole(&pair, &kind).ok())
    })?
    .into_iter()
    .flatten()
    .collect();
    let truth_sd = sd(&truth);

    let n = model.total_len();
    let truth_seg = model.true_segmentation();
    let trivial = Segmentation::trivial(n)?;
    let analysis_seed = child_seed(config.seed, 2);
    let mut rows = Vec::new();
    let mut hist = Vec::new();
    for i in 0..config.analysis_pairs as u64 {
        let (pair, _) = simulate_piecewise_pair(model, &mut stream(analysis_seed, i))?;
        let rep_seed = child_seed(analysis_seed, i);
        let estimated = segment_pair(&pair, &seg_params)?;
        let shuffled = shuffle_baseline(&pair, &kind, config.replicates, child_seed(rep_seed, 0))?;
        let mut row = vec![shuffled.sd()];
        let mut dists = Vec::new();
        for (tag, seg) in [(1, &trivial), (2, &truth_seg), (3, &estimated)] {
            let d = subsample(
                &pair,
                seg,
                &kind,
                &SubsampleParams::new(
                    config.block_len,
                    config.replicates,
                    child_seed(rep_seed, tag),
                ),
            )?;
            row.push(standard_error(&d, n)?);
            dists.push(d);
        }
        if i == 0 {
            let obs = whole(&pair, &kind)?;
            let scale = |d: &crate::subsampling::ReplicateDistribution| -> Vec<f64> {
                let f = (d.block_len as f64 / n as f64).sqrt();
                d.values.iter().map(|v| f * (v - obs)).collect()
            };
            let m = mean(&truth);
            hist.push(Histogram::new(
                "truth",
                &truth.iter().map(|v| v - m).collect::<Vec<_>>(),
                40,
            ));
            hist.push(Histogram::new(
                "shuffle",
                &shuffled.values.iter().map(|v| v - obs).collect::<Vec<_>>(),
                40,
            ));
            for (label, d) in ["unsegmented", "true_segmentation", "estimated_segmentation"]
                .iter()
                .zip(&dists)
            {
                hist.push(Histogram::new(*label, &scale(d), 40));
            }
        }
        rows.push(row);
    }
    let col = |j: usize| mean(&rows.iter().map(|r| r[j]).collect::<Vec<_>>());

    // change-point recovery
    let recovered: Vec<bool> =
        par_streams(config.recovery_runs, child_seed(config.seed, 3), |rng| {
            let (pair, truth) = simulate_piecewise_pair(model, rng)?;
            Ok(cuts_recovered(
                &segment_pair(&pair, &seg_params)?,
                &truth,
                config.recovery_tolerance,
            ))
        })?;
    let recovery_rate =
        recovered.iter().filter(|&&r| r).count() as f64 / recovered.len().max(1) as f64;

    // normality of replicate distributions with and without segmentation
    let norm_seed = child_seed(config.seed, 4);
    let mut unseg_rej = 0;
    let mut seg_rej = 0;
    let mut tests = 0;
    for i in 0..config.normality_pairs as u64 {
        let (pair, _) = simulate_piecewise_pair(model, &mut stream(norm_seed, i))?;
        for (k, &lb) in config.normality_grid.iter().enumerate() {
            let s = child_seed(norm_seed, i * 1000 + k as u64);
            let reject = |seg: &Segmentation, tag: u64| -> Result<bool> {
                let d = subsample(
                    &pair,
                    seg,
                    &kind,
                    &SubsampleParams::new(lb, config.replicates, child_seed(s, tag)),
                )?;
                Ok(lilliefors(&d.values)
                    .map(|l| l.p_value < 0.05)
                    .unwrap_or(true))
            };
            unseg_rej += reject(&trivial, 1)? as usize;
            seg_rej += reject(&truth_seg, 2)? as usize;
            tests += 1;
        }
    }

    let (shuffle_sd, unsegmented_sd, true_segmentation_sd, estimated_segmentation_sd) =
        (col(0), col(1), col(2), col(3));
    let checks = vec![
        Check::new(
            "shuffle sd / truth",
            shuffle_sd / truth_sd,
            "<= 0.5",
            shuffle_sd <= 0.5 * truth_sd,
        ),
        Check::new(
            "unsegmented sd / truth",
            unsegmented_sd / truth_sd,
            ">= 1.15",
            unsegmented_sd >= 1.15 * truth_sd,
        ),
        Check::within(
            "true segmentation sd / truth",
            true_segmentation_sd / truth_sd,
            0.7,
            1.2,
        ),
        Check::within(
            "estimated segmentation sd / truth",
            estimated_segmentation_sd / truth_sd,
            0.7,
            1.2,
        ),
        Check::new(
            "cut recovery rate",
            recovery_rate,
            ">= 0.9",
            recovery_rate >= 0.9,
        ),
        Check::new(
            "normality rejections, unsegmented minus segmented",
            unseg_rej as f64 - seg_rej as f64,
            "> 0",
            unseg_rej > seg_rej,
        ),
    ];
    Ok(Sim2aReport {
        config: config.clone(),
        truth_mean: mean(&truth),
        truth_sd,
        shuffle_sd,
        unsegmented_sd,
        true_segmentation_sd,
        estimated_segmentation_sd,
        recovery_rate,
        normality_unsegmented_rejections: unseg_rej,
        normality_segmented_rejections: seg_rej,
        normality_tests: tests,
        checks,
        histograms: hist,
    })
}

// ---------------------------------------------------------------------------
// Simulation IIb: region overlap on broad peaks

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sim2bConfig {
    pub model: NeymanScottParams,
    pub population_pairs: usize,
    /// Inner block length as a fraction of `n`.
    pub block_fraction: f64,
    /// Outer block length as a fraction of `n`.
    pub outer_fraction: f64,
    pub replicates: usize,
    pub outer_replicates: usize,
    pub shuffle_replicates: usize,
    pub seed: u64,
}

impl Default for Sim2bConfig {
    fn default() -> Self {
        Sim2bConfig {
            model: NeymanScottParams::broad_peaks(),
            population_pairs: 5000,
            block_fraction: 0.06 * 0.15,
            outer_fraction: 0.06,
            replicates: 2000,
            outer_replicates: 2000,
            shuffle_replicates: 2000,
            seed: 2012,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub index: usize,
    pub region_overlap: f64,
    pub a_instances: u64,
    pub b_instances: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sim2bReport {
    pub config: Sim2bConfig,
    pub mean_coverage: f64,
    pub mean_instances: f64,
    pub population_mean: f64,
    pub population_sd: f64,
    pub population_normality_p: Option<f64>,
    pub average_pair: PairSummary,
    pub average_pair_test: TestResult,
    pub extreme_pair: PairSummary,
    pub extreme_z: f64,
    pub extreme_pair_test: TestResult,
    pub shuffle_mean: f64,
    pub shuffle_sd: f64,
    pub checks: Vec<Check>,
    pub histograms: Vec<Histogram>,
}

pub fn sim2b(config: &Sim2bConfig) -> Result<Sim2bReport> {
    let model = &config.model;
    let n = model.total_len();
    let pop_seed = child_seed(config.seed, 1);
    let kind = StatisticKind::RegionOverlap;
    let summaries: Vec<(f64, f64, u64, u64)> =
        par_streams(config.population_pairs, pop_seed, |rng| {
            let (pair, _) = simulate_piecewise_pair(model, rng)?;
            let r = whole(&pair, &kind)?;
            let cov = (pair.a.coverage() + pair.b.coverage()) as f64 / (2 * n) as f64;
            Ok((r, cov, pair.a.run_count() as u64, pair.b.run_count() as u64))
        })?;
    if summaries.is_empty() {
        return Err(GscError::param("population_pairs", "must be positive"));
    }
    let r: Vec<f64> = summaries.iter().map(|s| s.0).collect();
    let population_mean = mean(&r);
    let population_sd = sd(&r);
    let pick = |i: usize| PairSummary {
        index: i,
        region_overlap: summaries[i].0,
        a_instances: summaries[i].2,
        b_instances: summaries[i].3,
    };
    let closest = (0..r.len())
        .min_by(|&i, &j| {
            (r[i] - population_mean)
                .abs()
                .total_cmp(&(r[j] - population_mean).abs())
        })
        .unwrap();
    let extreme = (0..r.len())
        .max_by(|&i, &j| r[i].total_cmp(&r[j]).then(j.cmp(&i)))
        .unwrap();
    let regenerate = |i: usize| -> Result<TrackPair> {
        Ok(simulate_piecewise_pair(model, &mut stream(pop_seed, i as u64))?.0)
    };

    let block_len = ((config.block_fraction * n as f64).round() as u64).max(1);
    let mut params = TestParams::new(block_len, config.replicates, child_seed(config.seed, 2));
    params.outer_multiplier = config.outer_fraction / config.block_fraction;
    params.outer_replicates = Some(config.outer_replicates);
    let trivial = Segmentation::trivial(n)?;
    let average_pair = regenerate(closest)?;
    let average_pair_test =
        double_bootstrap_region_overlap(&average_pair, &trivial, &params, 0.05)?;
    let extreme_pair = regenerate(extreme)?;
    let extreme_pair_test =
        double_bootstrap_region_overlap(&extreme_pair, &trivial, &params, 0.05)?;
    let shuffled = shuffle_baseline(
        &extreme_pair,
        &kind,
        config.shuffle_replicates,
        child_seed(config.seed, 3),
    )?;

    let extreme_r = r[extreme];
    let sigma_hat = average_pair_test.standard_error;
    let checks = vec![
        Check::within("population mean of R_n", population_mean, 0.283, 0.303),
        Check::within("population sd of R_n", population_sd, 0.0062, 0.0082),
        Check::within(
            "double bootstrap sigma on an average pair",
            sigma_hat,
            0.00576,
            0.00864,
        ),
        Check::new(
            "shuffle mean minus extreme R_n",
            shuffled.mean() - extreme_r,
            "> 0",
            shuffled.mean() > extreme_r,
        ),
    ];
    let histograms = vec![
        Histogram::new("population", &r, 50),
        Histogram::new("average_pair_null", &average_pair_test.null_values, 50),
        Histogram::new("extreme_pair_null", &extreme_pair_test.null_values, 50),
        Histogram::new("extreme_pair_shuffle", &shuffled.values, 50),
    ];
    Ok(Sim2bReport {
        config: config.clone(),
        mean_coverage: mean(&summaries.iter().map(|s| s.1).collect::<Vec<_>>()),
        mean_instances: mean(
            &summaries
                .iter()
                .map(|s| (s.2 + s.3) as f64 / 2.0)
                .collect::<Vec<_>>(),
        ),
        population_mean,
        population_sd,
        population_normality_p: lilliefors(&r).ok().map(|l| l.p_value),
        average_pair: pick(closest),
        average_pair_test,
        extreme_pair: pick(extreme),
        extreme_z: (extreme_r - population_mean) / population_sd,
        extreme_pair_test,
        shuffle_mean: shuffled.mean(),
        shuffle_sd: shuffled.sd(),
        checks,
        histograms,
    })
}

// ---------------------------------------------------------------------------
// Size of the overlap test under independence

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeConfig {
    pub n: usize,
    pub p0: f64,
    pub window: usize,
    pub trials: usize,
    pub block_len: u64,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for SizeConfig {
    fn default() -> Self {
        SizeConfig {
            n: 10_000,
            p0: 0.9,
            window: 20,
            trials: 500,
            block_len: 500,
            replicates: 499,
            alpha: 0.05,
            seed: 2013,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeReport {
    pub config: SizeConfig,
    pub completed: usize,
    pub rejections: usize,
    pub rejection_rate: f64,
    pub p_values: Vec<f64>,
    pub checks: Vec<Check>,
}

/// Rejection rate of the overlap test on pairs whose tracks come from
/// independent Markov sequences.
pub fn size_study(config: &SizeConfig) -> Result<SizeReport> {
    let params = MarkovParams::new(config.n, config.p0, config.window)?;
    let seg = Segmentation::trivial(config.n as u64)?;
    let trial_seed = child_seed(config.seed, 1);
    let p_values: Vec<f64> = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| -> Result<Option<f64>> {
            let pair = simulate_independent_markov_pair(&params, &mut stream(trial_seed, i))?;
            if pair.a.coverage() == 0 {
                return Ok(None);
            }
            let tp = TestParams::new(
                config.block_len,
                config.replicates,
                child_seed(trial_seed, i),
            );
            Ok(test_bp_overlap(&pair, &seg, &tp, config.alpha)
                .ok()
                .map(|r| r.p_value))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let rejections = p_values.iter().filter(|&&p| p <= config.alpha).count();
    let rate = rejections as f64 / p_values.len().max(1) as f64;
    Ok(SizeReport {
        config: config.clone(),
        completed: p_values.len(),
        rejections,
        rejection_rate: rate,
        checks: vec![Check::within(
            "rejection rate at alpha 0.05",
            rate,
            0.02,
            0.10,
        )],
        p_values,
    })
}
