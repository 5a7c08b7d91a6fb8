//! Dyadic change-point segmentation of coverage series.
//!
//! A region is split at the maximizer of the mean-shift profile
//! `M(j) = (S_j - j*mu)^2 / (j (n - j))`, where `S_j` is the covered count in
//! the first `j` positions. Splitting repeats on the region with the largest
//! maximum until every region is too short or its normalized statistic falls
//! below the threshold.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{GscError, Result};
use crate::tracks::{CoordinateSpace, FeatureTrack, Interval, TrackPair};

/// Where a segmentation came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Manual,
    /// Sequence boundaries only.
    Natural,
    Dyadic,
    Merged,
    /// Known boundaries of simulated data.
    True,
}

/// Ordered cut points `0 = t_0 < t_1 < ... < t_m = n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segmentation {
    cuts: Vec<u64>,
    provenance: Provenance,
}

impl Segmentation {
    pub fn new(cuts: Vec<u64>, provenance: Provenance) -> Result<Self> {
        if cuts.len() < 2 || cuts[0] != 0 {
            return Err(GscError::param(
                "segmentation",
                "cuts must start at 0 and contain at least one region",
            ));
        }
        if let Some(w) = cuts.windows(2).find(|w| w[0] >= w[1]) {
            return Err(GscError::param(
                "segmentation",
                format!("cuts must be strictly increasing ({} then {})", w[0], w[1]),
            ));
        }
        Ok(Segmentation { cuts, provenance })
    }

    pub(crate) fn from_cuts_unchecked(cuts: Vec<u64>, provenance: Provenance) -> Self {
        debug_assert!(cuts.windows(2).all(|w| w[0] < w[1]));
        Segmentation { cuts, provenance }
    }

    /// The single region `[0, n)`.
    pub fn trivial(n: u64) -> Result<Self> {
        Self::new(vec![0, n], Provenance::Manual)
    }

    /// One region per sequence.
    pub fn natural(space: &CoordinateSpace) -> Self {
        Segmentation {
            cuts: space.boundaries().to_vec(),
            provenance: Provenance::Natural,
        }
    }

    pub fn n(&self) -> u64 {
        *self.cuts.last().unwrap()
    }

    pub fn cuts(&self) -> &[u64] {
        &self.cuts
    }

    /// Cut points strictly between 0 and n.
    pub fn interior_cuts(&self) -> &[u64] {
        &self.cuts[1..self.cuts.len() - 1]
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn region_count(&self) -> usize {
        self.cuts.len() - 1
    }

    pub fn regions(&self) -> impl ExactSizeIterator<Item = Interval> + '_ {
        self.cuts.windows(2).map(|w| Interval::new(w[0], w[1]))
    }

    /// Adds the sequence boundaries of `space` as cuts.
    pub fn with_boundaries(&self, space: &CoordinateSpace) -> Result<Segmentation> {
        if space.len() != self.n() {
            return Err(GscError::param(
                "segmentation",
                format!(
                    "covers {} bases but the space has {}",
                    self.n(),
                    space.len()
                ),
            ));
        }
        let mut cuts = self.cuts.clone();
        cuts.extend_from_slice(space.boundaries());
        cuts.sort_unstable();
        cuts.dedup();
        Ok(Segmentation {
            cuts,
            provenance: self.provenance,
        })
    }

    /// Writes one `start<TAB>end` line per region.
    pub fn write(&self, mut out: impl Write) -> std::io::Result<()> {
        for r in self.regions() {
            writeln!(out, "{}\t{}", r.start, r.end)?;
        }
        Ok(())
    }

    /// Reads the format produced by [`Segmentation::write`].
    pub fn load(path: impl AsRef<Path>) -> Result<Segmentation> {
        let path = path.as_ref();
        let io_err = |source| GscError::Io {
            path: path.to_path_buf(),
            source,
        };
        let reader = BufReader::new(File::open(path).map_err(io_err)?);
        let mut cuts = vec![0u64];
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(io_err)?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| GscError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let fields: Vec<u64> = line
                .split_whitespace()
                .take(2)
                .map(|f| {
                    f.parse()
                        .map_err(|_| parse_err(format!("invalid position '{f}'")))
                })
                .collect::<Result<_>>()?;
            let [start, end] = fields[..] else {
                return Err(parse_err("expected two columns: start end".into()));
            };
            if start != *cuts.last().unwrap() || end <= start {
                return Err(parse_err(format!(
                    "region [{start}, {end}) does not continue from {}",
                    cuts.last().unwrap()
                )));
            }
            cuts.push(end);
        }
        Segmentation::new(cuts, Provenance::Manual).map_err(|_| GscError::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "no regions".into(),
        })
    }
}

/// Which per-position series drives the segmentation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    A,
    B,
    /// Positions covered by both tracks.
    Joint,
    /// Segment A and B separately and take the union of cuts.
    #[default]
    Both,
}

impl std::str::FromStr for Signal {
    type Err = GscError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "A" => Ok(Signal::A),
            "b" | "B" => Ok(Signal::B),
            "joint" => Ok(Signal::Joint),
            "both" => Ok(Signal::Both),
            other => Err(GscError::param(
                "signal",
                format!("unknown signal '{other}' (expected a, b, joint or both)"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentationParams {
    /// Minimum region length `L_s`.
    pub min_len: u64,
    /// Stopping threshold `b` on the normalized statistic.
    pub threshold: f64,
    /// Block length `L_b` used to normalize by the block variance.
    pub block_hint: Option<u64>,
    pub signal: Signal,
}

impl SegmentationParams {
    pub fn new(
        min_len: u64,
        threshold: f64,
        block_hint: Option<u64>,
        signal: Signal,
    ) -> Result<Self> {
        if min_len == 0 {
            return Err(GscError::param("min_len", "must be positive"));
        }
        if !(threshold.is_finite() && threshold >= 0.0) {
            return Err(GscError::param(
                "threshold",
                format!("{threshold} must be >= 0"),
            ));
        }
        if threshold > 0.0 && block_hint.is_none() {
            return Err(GscError::param(
                "threshold",
                "a positive threshold needs a block length hint to normalize against",
            ));
        }
        if block_hint == Some(0) {
            return Err(GscError::param("block_hint", "must be positive"));
        }
        Ok(SegmentationParams {
            min_len,
            threshold,
            block_hint,
            signal,
        })
    }

    /// Threshold-free segmentation controlled by the minimum length only.
    pub fn min_length_only(min_len: u64) -> Result<Self> {
        Self::new(min_len, 0.0, None, Signal::Both)
    }
}

/// Threshold `b` for a family-wise level `alpha` over `tests` candidate
/// splits, from the chi-square(1) reference with a Bonferroni correction.
pub fn threshold_from_alpha(alpha: f64, tests: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GscError::param(
            "alpha",
            format!("{alpha} is not in (0, 1)"),
        ));
    }
    if tests == 0 {
        return Err(GscError::param("tests", "must be positive"));
    }
    let chi = ChiSquared::new(1.0).unwrap();
    Ok(chi.inverse_cdf(1.0 - alpha / tests as f64))
}

/// `M(j)` in terms of prefix sums: `s_j` covered in the first `j` positions
/// and `s_n` in all `n`.
pub fn glr_value(j: u64, s_j: u64, n: u64, s_n: u64) -> f64 {
    let (jf, nf) = (j as f64, n as f64);
    let (sj, sn) = (s_j as f64, s_n as f64);
    let mean = sn / nf;
    let left = sj / jf - mean;
    let right = (sn - sj) / (nf - jf) - mean;
    jf / nf * left * left + (nf - jf) / nf * right * right
}

/// Mean-shift profile of a track restricted to `[lo, hi)`.
#[derive(Clone, Copy, Debug)]
pub struct GlrProfile<'a> {
    track: &'a FeatureTrack,
    lo: u64,
    hi: u64,
    total: u64,
}

impl<'a> GlrProfile<'a> {
    pub fn new(track: &'a FeatureTrack, lo: u64, hi: u64) -> Result<Self> {
        if hi > track.len() || lo > hi {
            return Err(GscError::OutOfRange {
                lo,
                hi,
                n: track.len(),
            });
        }
        if hi - lo < 2 {
            return Err(GscError::param(
                "window",
                "profile needs at least 2 positions",
            ));
        }
        Ok(GlrProfile {
            track,
            lo,
            hi,
            total: track.coverage_in(lo, hi),
        })
    }

    pub fn len(&self) -> u64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `M(j)` for `0 < j < n`, with `j` relative to the window start.
    pub fn value(&self, j: u64) -> f64 {
        assert!(
            j > 0 && j < self.len(),
            "split {j} outside (0, {})",
            self.len()
        );
        let s_j = self.track.coverage_in(self.lo, self.lo + j);
        glr_value(j, s_j, self.len(), self.total)
    }

    /// Maximizer of `M(j)` over `min_len < j < n - min_len`, smallest `j`
    /// on ties. Returns `None` when no split is allowed.
    ///
    /// `S_j` is linear between run edges, and on each linear piece
    /// `M(j) = (a + c j)^2 / (j (n - j))` has a single stationary point at
    /// `j = a n / (c n + 2a)`. Only piece ends and the integers around that
    /// point need to be evaluated.
    pub fn argmax(&self, min_len: u64) -> Option<(u64, f64)> {
        let n = self.len();
        let j_min = min_len + 1;
        let j_max = n.checked_sub(min_len + 1)?;
        if j_min > j_max {
            return None;
        }
        let mean = self.total as f64 / n as f64;

        // piece ends: every run edge strictly inside the allowed range
        let mut edges = vec![j_min];
        for r in self.track.runs_overlapping(self.lo, self.hi) {
            for e in [r.start, r.end] {
                if e > self.lo + j_min && e < self.lo + j_max {
                    edges.push(e - self.lo);
                }
            }
        }
        edges.push(j_max);

        let mut s_p = self.track.coverage_in(self.lo, self.lo + j_min);
        let mut best: Option<(u64, u64)> = None;
        let mut consider = |j: u64, s_j: u64| {
            if best.is_none_or(|(bj, bs)| glr_greater(j, s_j, bj, bs, n, self.total)) {
                best = Some((j, s_j));
            }
        };
        let mut candidates = Vec::with_capacity(8);
        for w in edges.windows(2) {
            let (p, q) = (w[0], w[1]);
            let slope = (q > p && self.track.contains(self.lo + p)) as u64;
            candidates.clear();
            candidates.push(p);
            let a = s_p as f64 - slope as f64 * p as f64;
            let c = slope as f64 - mean;
            let denom = c * n as f64 + 2.0 * a;
            if denom != 0.0 {
                let star = a * n as f64 / denom;
                if star.is_finite() && star > p as f64 - 2.0 && star < q as f64 + 2.0 {
                    let f = star.floor() as i64;
                    for j in f - 1..=f + 2 {
                        if j > p as i64 && j < q as i64 {
                            candidates.push(j as u64);
                        }
                    }
                }
            }
            candidates.push(q);
            candidates.dedup();
            for &j in &candidates {
                consider(j, s_p + slope * (j - p));
            }
            s_p += slope * (q - p);
        }
        best.map(|(j, s_j)| (j, glr_value(j, s_j, n, self.total)))
    }
}

/// Whether `M(j1) > M(j2)`, compared exactly as
/// `(n s_j - j s_n)^2 / (j (n - j))` cross-products when they fit in 128
/// bits so that ties are real ties.
fn glr_greater(j1: u64, s1: u64, j2: u64, s2: u64, n: u64, s_n: u64) -> bool {
    let exact = || -> Option<bool> {
        let d = |j: u64, s: u64| (n as i128 * s as i128 - j as i128 * s_n as i128).unsigned_abs();
        let den = |j: u64| j as u128 * (n - j) as u128;
        let (d1, d2) = (d(j1, s1), d(j2, s2));
        let lhs = d1.checked_mul(d1)?.checked_mul(den(j2))?;
        let rhs = d2.checked_mul(d2)?.checked_mul(den(j1))?;
        Some(lhs > rhs)
    };
    exact().unwrap_or_else(|| glr_value(j1, s1, n, s_n) > glr_value(j2, s2, n, s_n))
}

/// Per-base running cursor over sorted runs, for nondecreasing queries.
struct RunCursor<'a> {
    runs: &'a [Interval],
    idx: usize,
}

impl RunCursor<'_> {
    fn covered(&mut self, pos: u64) -> bool {
        while self.idx < self.runs.len() && self.runs[self.idx].end <= pos {
            self.idx += 1;
        }
        self.idx < self.runs.len() && self.runs[self.idx].start <= pos
    }
}

/// `sum over windows (c_s * len - ell * C)^2` for every length-`ell` window
/// `[s, s + ell)` inside `[lo, hi)`, where `c_s` is the window's covered
/// count and `C` the total in `[lo, hi)`. Exact integer arithmetic.
fn sliding_sq_dev(track: &FeatureTrack, lo: u64, hi: u64, ell: u64) -> i128 {
    let len = (hi - lo) as i128;
    let total = track.coverage_in(lo, hi) as i128;
    let runs = track.runs_overlapping(lo, hi);
    let mut head = RunCursor { runs, idx: 0 };
    let mut tail = RunCursor { runs, idx: 0 };
    let mut c = track.coverage_in(lo, lo + ell) as i128;
    let ell_i = ell as i128;
    let mut acc: i128 = 0;
    for s in lo..=hi - ell {
        if s > lo {
            c += head.covered(s + ell - 1) as i128 - tail.covered(s - 1) as i128;
        }
        let d = c * len - ell_i * total;
        acc += d * d;
    }
    acc
}

/// Block-variance profile at split `t` (relative to `lo`).
///
/// Each side of length `m` is covered by every window of length
/// `ceil(m * block / n)` that fits inside it; the squared deviations of window
/// means from the side mean are weighted by `m / n^2` and summed over both
/// sides.
pub fn block_variance(track: &FeatureTrack, lo: u64, hi: u64, t: u64, block: f64) -> Result<f64> {
    if hi > track.len() || lo >= hi {
        return Err(GscError::OutOfRange {
            lo,
            hi,
            n: track.len(),
        });
    }
    let n = hi - lo;
    if t == 0 || t >= n {
        return Err(GscError::param("t", format!("split {t} outside (0, {n})")));
    }
    if !(block.is_finite() && block > 0.0) {
        return Err(GscError::param("block", "must be positive"));
    }
    let nf = n as f64;
    let mut v = 0.0;
    for (side, a, b) in [("left", lo, lo + t), ("right", lo + t, hi)] {
        let m = b - a;
        let ell = ((m as f64 * block / nf).ceil() as u64).max(1);
        if ell > m {
            return Err(GscError::Infeasible(format!(
                "block of length {ell} does not fit the {side} side of length {m}"
            )));
        }
        let sq = sliding_sq_dev(track, a, b, ell) as f64;
        let scale = (ell as f64 * m as f64).powi(2);
        v += m as f64 / (nf * nf) * (sq / scale);
    }
    Ok(v)
}

/// Best split found for one region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    /// Absolute cut position.
    pub cut: u64,
    /// Maximum of `M` over the region.
    pub glr: f64,
    /// Normalized statistic compared against the threshold.
    pub statistic: f64,
    pub accepted: bool,
}

fn candidate(
    track: &FeatureTrack,
    region: Interval,
    params: &SegmentationParams,
    total_len: u64,
) -> Result<Option<SplitCandidate>> {
    let n_r = region.len();
    if n_r <= 2 * params.min_len {
        return Ok(None);
    }
    let profile = GlrProfile::new(track, region.start, region.end)?;
    let Some((j, glr)) = profile.argmax(params.min_len) else {
        return Ok(None);
    };
    let raw = n_r as f64 * glr;
    let statistic = match params.block_hint {
        None => raw,
        Some(lb) => {
            let lambda = lb as f64 * n_r as f64 / total_len as f64;
            let v = block_variance(track, region.start, region.end, j, lambda)?;
            if v > 0.0 {
                raw / (v * lambda)
            } else if raw > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        }
    };
    Ok(Some(SplitCandidate {
        cut: region.start + j,
        glr,
        statistic,
        accepted: glr > 0.0 && statistic > params.threshold,
    }))
}

/// Dyadic segmentation of one series, starting from the sequence
/// boundaries of its space.
pub fn dyadic_segment(track: &FeatureTrack, params: &SegmentationParams) -> Result<Segmentation> {
    let n = track.len();
    if params.min_len >= n {
        return Err(GscError::param(
            "min_len",
            format!(
                "{} must be smaller than the total length {n}",
                params.min_len
            ),
        ));
    }
    if let Some(lb) = params.block_hint {
        if lb >= n {
            return Err(GscError::param(
                "block_hint",
                format!("{lb} must be smaller than the total length {n}"),
            ));
        }
    }
    let mut regions: Vec<(Interval, Option<SplitCandidate>)> = Vec::new();
    for r in track.space().sequence_intervals() {
        regions.push((r, candidate(track, r, params, n)?));
    }
    loop {
        let mut pick: Option<(usize, f64)> = None;
        for (i, (_, c)) in regions.iter().enumerate() {
            if let Some(c) = c.filter(|c| c.accepted) {
                if pick.is_none_or(|(_, g)| c.glr > g) {
                    pick = Some((i, c.glr));
                }
            }
        }
        let Some((i, _)) = pick else { break };
        let (region, c) = regions[i];
        let cut = c.unwrap().cut;
        let left = Interval::new(region.start, cut);
        let right = Interval::new(cut, region.end);
        regions[i] = (left, candidate(track, left, params, n)?);
        regions.insert(i + 1, (right, candidate(track, right, params, n)?));
    }
    let mut cuts: Vec<u64> = regions.iter().map(|(r, _)| r.start).collect();
    cuts.push(n);
    log::debug!("dyadic segmentation: {} regions", cuts.len() - 1);
    Ok(Segmentation::from_cuts_unchecked(cuts, Provenance::Dyadic))
}

/// Segments a pair according to `params.signal`.
pub fn segment_pair(pair: &TrackPair, params: &SegmentationParams) -> Result<Segmentation> {
    match params.signal {
        Signal::A => dyadic_segment(&pair.a, params),
        Signal::B => dyadic_segment(&pair.b, params),
        Signal::Joint => dyadic_segment(&pair.a.intersect(&pair.b)?, params),
        Signal::Both => {
            let sa = dyadic_segment(&pair.a, params)?;
            let sb = dyadic_segment(&pair.b, params)?;
            Ok(merge_segmentations(&sa, &sb, params.min_len)?.segmentation)
        }
    }
}

/// Union of two segmentations with short regions flagged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergedSegmentation {
    pub segmentation: Segmentation,
    /// Regions shorter than the minimum length.
    pub flagged: Vec<Interval>,
    pub flagged_len: u64,
}

pub fn merge_segmentations(
    s1: &Segmentation,
    s2: &Segmentation,
    min_len: u64,
) -> Result<MergedSegmentation> {
    if s1.n() != s2.n() {
        return Err(GscError::param(
            "segmentation",
            format!("lengths differ: {} and {}", s1.n(), s2.n()),
        ));
    }
    let mut cuts: Vec<u64> = s1.cuts.iter().chain(&s2.cuts).copied().collect();
    cuts.sort_unstable();
    cuts.dedup();
    let segmentation = Segmentation::from_cuts_unchecked(cuts, Provenance::Merged);
    let flagged: Vec<Interval> = segmentation
        .regions()
        .filter(|r| r.len() < min_len)
        .collect();
    let flagged_len = flagged.iter().map(Interval::len).sum();
    Ok(MergedSegmentation {
        segmentation,
        flagged,
        flagged_len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn series(x: &[u8]) -> FeatureTrack {
        let sp = Arc::new(CoordinateSpace::single("s", x.len() as u64).unwrap());
        FeatureTrack::from_indicator(sp, x).unwrap()
    }

    #[test]
    fn glr_examples() {
        let t = series(&[0, 0, 1, 1]);
        let p = GlrProfile::new(&t, 0, 4).unwrap();
        assert!((p.value(2) - 0.25).abs() < 1e-15);
        let c = series(&[1; 12]);
        let p = GlrProfile::new(&c, 0, 12).unwrap();
        assert!((1..12).all(|j| p.value(j) == 0.0));
        assert_eq!(p.argmax(2), Some((3, 0.0)));
    }

    #[test]
    fn argmax_finds_step() {
        let mut x = vec![0u8; 60];
        x.extend(vec![1u8; 40]);
        let t = series(&x);
        let p = GlrProfile::new(&t, 0, 100).unwrap();
        assert_eq!(p.argmax(5).unwrap().0, 60);
        assert_eq!(p.argmax(49).unwrap().0, 50);
        assert_eq!(p.argmax(50), None);
    }

    #[test]
    fn variance_profile_constant_and_shift() {
        let c = series(&[1; 40]);
        assert_eq!(block_variance(&c, 0, 40, 15, 8.0).unwrap(), 0.0);
        let x: Vec<u8> = (0..40).map(|k| ((k / 3) % 2) as u8).collect();
        let flipped: Vec<u8> = x.iter().map(|v| 1 - v).collect();
        // 1 - x has the same centred deviations as x
        let a = block_variance(&series(&x), 0, 40, 15, 8.0).unwrap();
        let b = block_variance(&series(&flipped), 0, 40, 15, 8.0).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!(a > 0.0);
        let err = block_variance(&series(&x), 0, 40, 1, 200.0).unwrap_err();
        assert!(err.to_string().contains("left"), "{err}");
    }

    #[test]
    fn homogeneous_series_stays_whole() {
        let x: Vec<u8> = (0..400).map(|k| (k % 4 == 0) as u8).collect();
        let params = SegmentationParams::new(20, 1e6, Some(40), Signal::A).unwrap();
        let s = dyadic_segment(&series(&x), &params).unwrap();
        assert_eq!(s.cuts(), &[0, 400]);
    }

    #[test]
    fn step_first_cut_is_argmax() {
        let mut x: Vec<u8> = (0..300).map(|k| (k % 7 == 0) as u8).collect();
        x.extend((0..200).map(|k| (k % 2 == 0) as u8));
        let t = series(&x);
        let params = SegmentationParams::new(10, 0.0, None, Signal::A).unwrap();
        let s = dyadic_segment(&t, &params).unwrap();
        let (j, _) = GlrProfile::new(&t, 0, 500).unwrap().argmax(10).unwrap();
        assert!(s.cuts().contains(&j));
        assert!(s.regions().all(|r| r.len() > 10));
        assert_eq!(s, dyadic_segment(&t, &params).unwrap());
    }

    #[test]
    fn params_validation() {
        assert!(SegmentationParams::new(0, 0.0, None, Signal::A).is_err());
        assert!(SegmentationParams::new(5, 3.0, None, Signal::A).is_err());
        assert!(SegmentationParams::new(5, -1.0, Some(3), Signal::A).is_err());
        let b = threshold_from_alpha(0.05, 1).unwrap();
        assert!((b - 3.841458820694124).abs() < 1e-9);
    }

    #[test]
    fn merge_examples() {
        let a = Segmentation::new(vec![0, 4, 10], Provenance::Manual).unwrap();
        let b = Segmentation::new(vec![0, 6, 10], Provenance::Manual).unwrap();
        let m = merge_segmentations(&a, &b, 1).unwrap();
        assert_eq!(m.segmentation.cuts(), &[0, 4, 6, 10]);
        let m = merge_segmentations(&a, &Segmentation::trivial(10).unwrap(), 1).unwrap();
        assert_eq!(m.segmentation.cuts(), a.cuts());
        let c = Segmentation::new(vec![0, 4, 5, 10], Provenance::Manual).unwrap();
        let m = merge_segmentations(&c, &Segmentation::trivial(10).unwrap(), 3).unwrap();
        assert_eq!(m.flagged, vec![Interval::new(4, 5)]);
        assert_eq!(m.flagged_len, 1);
        assert!(merge_segmentations(&a, &Segmentation::trivial(11).unwrap(), 1).is_err());
    }

    #[test]
    fn text_round_trip() {
        let s = Segmentation::new(vec![0, 7, 30, 31], Provenance::Dyadic).unwrap();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        s.write(&mut f).unwrap();
        let back = Segmentation::load(f.path()).unwrap();
        assert_eq!(back.cuts(), s.cuts());
    }

    #[test]
    fn natural_boundaries_are_kept() {
        let sp = Arc::new(CoordinateSpace::new([("a", 50), ("b", 70)]).unwrap());
        let t = FeatureTrack::from_intervals(sp, [Interval::new(10, 20)]).unwrap();
        let params = SegmentationParams::new(5, 0.0, None, Signal::A).unwrap();
        let s = dyadic_segment(&t, &params).unwrap();
        assert!(s.cuts().contains(&50));
    }
}
