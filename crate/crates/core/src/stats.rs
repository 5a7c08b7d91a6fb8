//! Overlap statistics of paired tracks.
//!
//! Every statistic here is a ratio of two additive counts. Windows are
//! reduced to a [`WindowCounts`] record first; counts from several windows
//! add up, and only the accumulated record is turned into a ratio. This is
//! what lets the stratified engines evaluate a statistic on a concatenation
//! of blocks without materializing it.

use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GscError, Result};
use crate::tracks::{Interval, TrackPair};

/// A per-position function `g(I_k, J_k)` given by its four values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionFn {
    pub name: String,
    /// `table[2 * i + j] = g(i, j)`.
    pub table: [f64; 4],
}

impl PositionFn {
    pub fn new(name: impl Into<String>, table: [f64; 4]) -> Result<Self> {
        if table.iter().any(|v| !v.is_finite()) {
            return Err(GscError::param("g", "values must be finite"));
        }
        Ok(PositionFn {
            name: name.into(),
            table,
        })
    }

    /// `g = I`: the coverage of A.
    pub fn coverage_a() -> Self {
        PositionFn {
            name: "coverage_a".into(),
            table: [0.0, 0.0, 1.0, 1.0],
        }
    }

    /// `g = J`: the coverage of B.
    pub fn coverage_b() -> Self {
        PositionFn {
            name: "coverage_b".into(),
            table: [0.0, 1.0, 0.0, 1.0],
        }
    }

    pub fn eval(&self, i: u8, j: u8) -> f64 {
        self.table[2 * (i as usize) + j as usize]
    }
}

/// Which overlap statistic to compute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    /// Joint coverage per base.
    MeanOverlap,
    /// Joint coverage over coverage of A.
    BpOverlapFraction,
    /// Fraction of A instances touching B.
    RegionOverlap,
    /// Mean of a per-position function of `(I, J)`.
    WindowMean(PositionFn),
}

impl StatisticKind {
    pub fn evaluate(&self, c: &WindowCounts) -> Result<StatValue> {
        let (num, den, what) = match self {
            StatisticKind::MeanOverlap => (c.joint as f64, c.len as f64, "window length"),
            StatisticKind::BpOverlapFraction => (c.joint as f64, c.a_cov as f64, "coverage of A"),
            StatisticKind::RegionOverlap => (c.hits as f64, c.a_instances as f64, "instances of A"),
            StatisticKind::WindowMean(g) => {
                let c11 = c.joint;
                let c10 = c.a_cov - c.joint;
                let c01 = c.b_cov - c.joint;
                let c00 = c.len + c.joint - c.a_cov - c.b_cov;
                let num = g.eval(0, 0) * c00 as f64
                    + g.eval(0, 1) * c01 as f64
                    + g.eval(1, 0) * c10 as f64
                    + g.eval(1, 1) * c11 as f64;
                (num, c.len as f64, "window length")
            }
        };
        StatValue::new(num, den, what)
    }

    /// Evaluates the statistic over the concatenation of `windows`.
    pub fn evaluate_windows(&self, p: &TrackPair, windows: &[PairedWindow]) -> Result<StatValue> {
        let mut total = WindowCounts::default();
        for w in windows {
            total += paired_counts(p, *w)?;
        }
        self.evaluate(&total)
    }

    pub fn label(&self) -> &str {
        match self {
            StatisticKind::MeanOverlap => "mean_overlap",
            StatisticKind::BpOverlapFraction => "bp_overlap",
            StatisticKind::RegionOverlap => "region_overlap",
            StatisticKind::WindowMean(g) => &g.name,
        }
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for StatisticKind {
    type Err = GscError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean_overlap" | "mean-overlap" => Ok(StatisticKind::MeanOverlap),
            "bp_overlap" | "bp-overlap" => Ok(StatisticKind::BpOverlapFraction),
            "region_overlap" | "region-overlap" => Ok(StatisticKind::RegionOverlap),
            "coverage_a" | "coverage-a" => Ok(StatisticKind::WindowMean(PositionFn::coverage_a())),
            "coverage_b" | "coverage-b" => Ok(StatisticKind::WindowMean(PositionFn::coverage_b())),
            other => Err(GscError::param(
                "statistic",
                format!(
                    "unknown statistic '{other}' (expected mean-overlap, bp-overlap, \
                     region-overlap, coverage-a or coverage-b)"
                ),
            )),
        }
    }
}

/// A ratio statistic with its parts kept.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatValue {
    pub value: f64,
    pub numerator: f64,
    pub denominator: f64,
}

impl StatValue {
    fn new(numerator: f64, denominator: f64, what: &'static str) -> Result<Self> {
        if denominator <= 0.0 {
            return Err(GscError::DegenerateDenominator(what));
        }
        Ok(StatValue {
            value: numerator / denominator,
            numerator,
            denominator,
        })
    }
}

/// Additive sufficient counts for every supported statistic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCounts {
    pub len: u64,
    /// Bases covered by A.
    pub a_cov: u64,
    /// Bases covered by B.
    pub b_cov: u64,
    /// Bases covered by both.
    pub joint: u64,
    /// Instances of A intersecting the window.
    pub a_instances: u64,
    /// Instances of A sharing at least one base with B.
    pub hits: u64,
}

impl AddAssign for WindowCounts {
    fn add_assign(&mut self, o: Self) {
        self.len += o.len;
        self.a_cov += o.a_cov;
        self.b_cov += o.b_cov;
        self.joint += o.joint;
        self.a_instances += o.a_instances;
        self.hits += o.hits;
    }
}

impl Add for WindowCounts {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self += o;
        self
    }
}

/// A window of A paired position by position with an equally long window
/// of B. Aligned windows have `a_start == b_start`; resampling engines pair
/// blocks drawn at different places to break dependence between the tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairedWindow {
    pub a_start: u64,
    pub b_start: u64,
    pub len: u64,
}

impl PairedWindow {
    pub fn aligned(start: u64, len: u64) -> Self {
        PairedWindow {
            a_start: start,
            b_start: start,
            len,
        }
    }

    pub fn crossed(a_start: u64, b_start: u64, len: u64) -> Self {
        PairedWindow {
            a_start,
            b_start,
            len,
        }
    }

    pub fn a_interval(&self) -> Interval {
        Interval::new(self.a_start, self.a_start + self.len)
    }

    pub fn b_interval(&self) -> Interval {
        Interval::new(self.b_start, self.b_start + self.len)
    }
}

impl From<Interval> for PairedWindow {
    fn from(iv: Interval) -> Self {
        PairedWindow::aligned(iv.start, iv.len())
    }
}

/// Counts for one paired window, in time linear in the runs it touches.
pub fn paired_counts(p: &TrackPair, w: PairedWindow) -> Result<WindowCounts> {
    let n = p.len();
    for start in [w.a_start, w.b_start] {
        if start + w.len > n {
            return Err(GscError::OutOfRange {
                lo: start,
                hi: start + w.len,
                n,
            });
        }
    }
    Ok(paired_counts_unchecked(p, w))
}

pub(crate) fn paired_counts_unchecked(p: &TrackPair, w: PairedWindow) -> WindowCounts {
    let (a_lo, a_hi) = (w.a_start, w.a_start + w.len);
    let (b_lo, b_hi) = (w.b_start, w.b_start + w.len);
    let a_runs = p.a.runs_overlapping(a_lo, a_hi);
    let b_runs = p.b.runs_overlapping(b_lo, b_hi);

    let mut joint = 0;
    let mut hits = 0;
    let mut j = 0;
    for r in a_runs {
        // A piece clipped to the window, shifted into B coordinates.
        let s = r.start.max(a_lo) - a_lo + b_lo;
        let e = r.end.min(a_hi) - a_lo + b_lo;
        while j < b_runs.len() && b_runs[j].end <= s {
            j += 1;
        }
        let mut k = j;
        let mut hit = false;
        while k < b_runs.len() && b_runs[k].start < e {
            let lo = b_runs[k].start.max(s);
            let hi = b_runs[k].end.min(e);
            joint += hi - lo;
            hit = true;
            if b_runs[k].end <= e {
                k += 1;
            } else {
                break;
            }
        }
        j = k;
        hits += hit as u64;
    }

    WindowCounts {
        len: w.len,
        a_cov: p.a.coverage_in(a_lo, a_hi),
        b_cov: p.b.coverage_in(b_lo, b_hi),
        joint,
        a_instances: a_runs.len() as u64,
        hits,
    }
}

fn aligned(p: &TrackPair, lo: u64, hi: u64) -> Result<WindowCounts> {
    if lo > hi || hi > p.len() {
        return Err(GscError::OutOfRange { lo, hi, n: p.len() });
    }
    if lo == hi {
        return Err(GscError::EmptyWindow);
    }
    Ok(paired_counts_unchecked(
        p,
        PairedWindow::aligned(lo, hi - lo),
    ))
}

/// Mean base-pair overlap: joint coverage over window length.
pub fn mean_overlap(p: &TrackPair, lo: u64, hi: u64) -> Result<StatValue> {
    StatisticKind::MeanOverlap.evaluate(&aligned(p, lo, hi)?)
}

/// Fraction of A's bases that are also covered by B.
pub fn bp_overlap_fraction(p: &TrackPair, lo: u64, hi: u64) -> Result<StatValue> {
    StatisticKind::BpOverlapFraction.evaluate(&aligned(p, lo, hi)?)
}

/// Fraction of A instances sharing at least one base with B.
pub fn region_overlap(p: &TrackPair, lo: u64, hi: u64) -> Result<StatValue> {
    StatisticKind::RegionOverlap.evaluate(&aligned(p, lo, hi)?)
}

/// Evaluates `kind` on the concatenation of disjoint aligned windows.
pub fn window_mean(kind: &StatisticKind, p: &TrackPair, windows: &[Interval]) -> Result<StatValue> {
    if windows.is_empty() {
        return Err(GscError::EmptyWindow);
    }
    let mut sorted = windows.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[1].start < w[0].end) {
        return Err(GscError::param("windows", "windows must be disjoint"));
    }
    let mut total = WindowCounts::default();
    for w in windows {
        total += aligned(p, w.start, w.end)?;
    }
    kind.evaluate(&total)
}

/// Moments entering the delta-method variance of the overlap fraction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioMoments {
    pub mean_num: f64,
    pub mean_den: f64,
    pub var_num: f64,
    pub var_den: f64,
    pub cov: f64,
}

/// Delta-method variance of `X̄ / D`.
pub fn delta_variance_bp(m: &RatioMoments) -> Result<f64> {
    if m.mean_den == 0.0 {
        return Err(GscError::DegenerateDenominator("mean of D"));
    }
    let d = m.mean_den;
    Ok(
        m.var_num / d.powi(2) + m.mean_num.powi(2) * m.var_den / d.powi(4)
            - 2.0 * m.mean_num * m.cov / d.powi(3),
    )
}
