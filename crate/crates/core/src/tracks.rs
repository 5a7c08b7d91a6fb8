//! Binary feature tracks over a linear genomic coordinate system.
//!
//! A [`CoordinateSpace`] concatenates one or more named sequences into a
//! single global axis `[0, n)`. A [`FeatureTrack`] stores the positions where
//! a feature is present as sorted, disjoint half-open runs in global
//! coordinates. Runs never cross a sequence boundary, and runs that touch at a
//! boundary are kept apart, so every run is one feature instance on one
//! sequence.
//!
//! All queries are answered from the run list plus a prefix sum of run
//! lengths; nothing is ever expanded to a dense per-base vector.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GscError, Result};

/// Half-open integer interval `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub start: u64,
    pub end: u64,
}

impl Interval {
    pub const fn new(start: u64, end: u64) -> Self {
        Interval { start, end }
    }

    pub const fn len(&self) -> u64 {
        self.end.saturating_sub(self.start)
    }

    pub const fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (start < end).then_some(Interval { start, end })
    }
}

/// Named sequences laid end to end on one global axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateSpace {
    names: Vec<String>,
    lengths: Vec<u64>,
    /// `offsets[i]` is the global coordinate of sequence `i`'s first base;
    /// the final entry is the total length.
    offsets: Vec<u64>,
    index: HashMap<String, usize>,
}

impl CoordinateSpace {
    pub fn new<S: Into<String>>(sequences: impl IntoIterator<Item = (S, u64)>) -> Result<Self> {
        let mut names = Vec::new();
        let mut lengths = Vec::new();
        let mut offsets = vec![0u64];
        let mut index = HashMap::new();
        for (name, len) in sequences {
            let name = name.into();
            if len == 0 {
                return Err(GscError::InvalidSpace(format!(
                    "sequence '{name}' has zero length"
                )));
            }
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(GscError::InvalidSpace(format!(
                    "duplicate sequence name '{name}'"
                )));
            }
            let last = *offsets.last().unwrap();
            offsets.push(last + len);
            names.push(name);
            lengths.push(len);
        }
        if names.is_empty() {
            return Err(GscError::InvalidSpace("no sequences".into()));
        }
        Ok(CoordinateSpace {
            names,
            lengths,
            offsets,
            index,
        })
    }

    /// A space made of a single sequence.
    pub fn single(name: &str, len: u64) -> Result<Self> {
        Self::new([(name, len)])
    }

    /// Reads a two-column `name length` file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| GscError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut entries = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| GscError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (Some(name), Some(len)) = (fields.next(), fields.next()) else {
                return Err(GscError::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    message: "expected two columns: name length".into(),
                });
            };
            let len: u64 = len.parse().map_err(|_| GscError::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("invalid length '{len}'"),
            })?;
            entries.push((name.to_string(), len));
        }
        Self::new(entries)
    }

    pub fn write(&self, mut out: impl Write) -> std::io::Result<()> {
        for (name, len) in self.names.iter().zip(&self.lengths) {
            writeln!(out, "{name}\t{len}")?;
        }
        Ok(())
    }

    /// Total length `n` of the concatenated axis.
    pub fn len(&self) -> u64 {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sequence_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Global extent of sequence `idx`.
    pub fn sequence_interval(&self, idx: usize) -> Interval {
        Interval::new(self.offsets[idx], self.offsets[idx + 1])
    }

    /// Global extents of all sequences in order.
    pub fn sequence_intervals(&self) -> impl Iterator<Item = Interval> + '_ {
        self.offsets.windows(2).map(|w| Interval::new(w[0], w[1]))
    }

    /// `[0, o_1, ..., n]`: sequence starts plus the total length.
    pub fn boundaries(&self) -> &[u64] {
        &self.offsets
    }

    pub fn is_boundary(&self, pos: u64) -> bool {
        self.offsets.binary_search(&pos).is_ok()
    }

    /// Index of the sequence containing global position `pos`.
    pub fn sequence_at(&self, pos: u64) -> usize {
        debug_assert!(pos < self.len());
        self.offsets.partition_point(|&o| o <= pos) - 1
    }
}

/// Binary indicator track stored as normalized runs.
#[derive(Debug, Clone)]
pub struct FeatureTrack {
    space: Arc<CoordinateSpace>,
    runs: Vec<Interval>,
    /// `covered[i]` is the total length of `runs[..i]`.
    covered: Vec<u64>,
}

impl PartialEq for FeatureTrack {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.runs == other.runs
    }
}

impl FeatureTrack {
    pub fn empty(space: Arc<CoordinateSpace>) -> Self {
        FeatureTrack {
            space,
            runs: Vec::new(),
            covered: vec![0],
        }
    }

    /// Builds a track from arbitrary intervals in global coordinates.
    ///
    /// Intervals may overlap, touch, or come unsorted. Intervals spanning a
    /// sequence boundary are split there. Empty intervals are dropped.
    pub fn from_intervals(
        space: Arc<CoordinateSpace>,
        intervals: impl IntoIterator<Item = Interval>,
    ) -> Result<Self> {
        let n = space.len();
        let mut pieces = Vec::new();
        for iv in intervals {
            if iv.is_empty() {
                continue;
            }
            if iv.end > n {
                return Err(GscError::OutOfRange {
                    lo: iv.start,
                    hi: iv.end,
                    n,
                });
            }
            let mut start = iv.start;
            while start < iv.end {
                let seq = space.sequence_at(start);
                let seq_end = space.sequence_interval(seq).end;
                let end = iv.end.min(seq_end);
                pieces.push(Interval::new(start, end));
                start = end;
            }
        }
        Ok(Self::from_pieces(space, pieces))
    }

    /// Builds a track from a per-position 0/1 indicator over the whole space.
    pub fn from_indicator(space: Arc<CoordinateSpace>, indicator: &[u8]) -> Result<Self> {
        if indicator.len() as u64 != space.len() {
            return Err(GscError::param(
                "indicator",
                format!(
                    "length {} does not match space length {}",
                    indicator.len(),
                    space.len()
                ),
            ));
        }
        let mut runs = Vec::new();
        let mut open: Option<u64> = None;
        for (k, &x) in indicator.iter().enumerate() {
            let k = k as u64;
            match (x != 0, open) {
                (true, None) => open = Some(k),
                (false, Some(s)) => {
                    runs.push(Interval::new(s, k));
                    open = None;
                }
                _ => {}
            }
        }
        if let Some(s) = open {
            runs.push(Interval::new(s, space.len()));
        }
        Self::from_intervals(space, runs)
    }

    /// Sorts and merges pieces that never cross a sequence boundary.
    fn from_pieces(space: Arc<CoordinateSpace>, mut pieces: Vec<Interval>) -> Self {
        pieces.sort_unstable();
        let mut runs: Vec<Interval> = Vec::with_capacity(pieces.len());
        for iv in pieces {
            match runs.last_mut() {
                Some(last)
                    if iv.start < last.end
                        || (iv.start == last.end && !space.is_boundary(iv.start)) =>
                {
                    last.end = last.end.max(iv.end);
                }
                _ => runs.push(iv),
            }
        }
        let mut covered = Vec::with_capacity(runs.len() + 1);
        covered.push(0);
        let mut total = 0;
        for r in &runs {
            total += r.len();
            covered.push(total);
        }
        FeatureTrack {
            space,
            runs,
            covered,
        }
    }

    pub fn space(&self) -> &Arc<CoordinateSpace> {
        &self.space
    }

    /// Length `n` of the underlying axis.
    pub fn len(&self) -> u64 {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn runs(&self) -> &[Interval] {
        &self.runs
    }

    pub fn run_count(&self) -> usize {
        self.runs.len()
    }

    /// Total covered bases.
    pub fn coverage(&self) -> u64 {
        *self.covered.last().unwrap()
    }

    /// Covered bases in `[0, x)`.
    pub(crate) fn covered_before(&self, x: u64) -> u64 {
        let idx = self.runs.partition_point(|r| r.end <= x);
        let mut total = self.covered[idx];
        if let Some(r) = self.runs.get(idx) {
            if r.start < x {
                total += x - r.start;
            }
        }
        total
    }

    /// Covered bases in `[lo, hi)` without bounds checks.
    pub(crate) fn coverage_in(&self, lo: u64, hi: u64) -> u64 {
        self.covered_before(hi) - self.covered_before(lo)
    }

    fn check_window(&self, lo: u64, hi: u64) -> Result<()> {
        if lo > hi || hi > self.len() {
            return Err(GscError::OutOfRange {
                lo,
                hi,
                n: self.len(),
            });
        }
        Ok(())
    }

    /// Number of covered bases in `[lo, hi)`.
    pub fn indicator_sum(&self, lo: u64, hi: u64) -> Result<u64> {
        self.check_window(lo, hi)?;
        Ok(self.coverage_in(lo, hi))
    }

    /// Runs that intersect `[lo, hi)`, unclipped.
    pub(crate) fn runs_overlapping(&self, lo: u64, hi: u64) -> &[Interval] {
        let first = self.runs.partition_point(|r| r.end <= lo);
        let last = self.runs.partition_point(|r| r.start < hi);
        if first >= last {
            &[]
        } else {
            &self.runs[first..last]
        }
    }

    /// Feature instances intersecting `[lo, hi)`, clipped to the window.
    ///
    /// Positions outside the window count as uncovered, so the number of
    /// instances returned equals the falling-edge count of the windowed
    /// indicator padded with a zero on each side.
    pub fn instances(&self, lo: u64, hi: u64) -> Result<Vec<Interval>> {
        self.check_window(lo, hi)?;
        let window = Interval::new(lo, hi);
        Ok(self
            .runs_overlapping(lo, hi)
            .iter()
            .filter_map(|r| r.intersect(&window))
            .collect())
    }

    pub fn instance_count(&self, lo: u64, hi: u64) -> Result<usize> {
        self.check_window(lo, hi)?;
        Ok(self.runs_overlapping(lo, hi).len())
    }

    /// Whether base `pos` is covered.
    pub fn contains(&self, pos: u64) -> bool {
        let idx = self.runs.partition_point(|r| r.end <= pos);
        self.runs.get(idx).is_some_and(|r| r.start <= pos)
    }

    /// Positions covered by both tracks.
    pub fn intersect(&self, other: &FeatureTrack) -> Result<FeatureTrack> {
        if self.space != other.space {
            return Err(GscError::SpaceMismatch);
        }
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.runs.len() && j < other.runs.len() {
            let (a, b) = (self.runs[i], other.runs[j]);
            if let Some(x) = a.intersect(&b) {
                out.push(x);
            }
            if a.end <= b.end {
                i += 1;
            } else {
                j += 1;
            }
        }
        Ok(Self::from_pieces(self.space.clone(), out))
    }

    /// Extends every run by `flank` bases on both sides, clipped to its
    /// sequence. Overlap of dilated tracks then encodes proximity within
    /// `2 * flank`.
    pub fn dilate(&self, flank: u64) -> FeatureTrack {
        let pieces = self
            .runs
            .iter()
            .map(|r| {
                let seq = self
                    .space
                    .sequence_interval(self.space.sequence_at(r.start));
                Interval::new(
                    r.start.saturating_sub(flank).max(seq.start),
                    (r.end + flank).min(seq.end),
                )
            })
            .collect();
        Self::from_pieces(self.space.clone(), pieces)
    }

    /// Keeps only runs inside the given global intervals, re-placed at new
    /// global offsets. Used to build tracks from rearranged blocks.
    pub(crate) fn with_runs(&self, space: Arc<CoordinateSpace>, runs: Vec<Interval>) -> Self {
        Self::from_pieces(space, runs)
    }

    /// Dense 0/1 expansion. Intended for small tracks and tests.
    pub fn to_indicator(&self) -> Vec<u8> {
        let mut v = vec![0u8; self.len() as usize];
        for r in &self.runs {
            v[r.start as usize..r.end as usize].fill(1);
        }
        v
    }

    /// Writes the track as three-column BED in per-sequence coordinates.
    pub fn write_bed(&self, mut out: impl Write) -> std::io::Result<()> {
        for r in &self.runs {
            let seq = self.space.sequence_at(r.start);
            let off = self.space.sequence_interval(seq).start;
            writeln!(
                out,
                "{}\t{}\t{}",
                self.space.name(seq),
                r.start - off,
                r.end - off
            )?;
        }
        Ok(())
    }
}

/// Result of reading a BED-like file.
#[derive(Debug, Clone)]
pub struct LoadedTrack {
    pub track: FeatureTrack,
    /// Records whose end extended past their sequence and were clipped.
    pub clipped: usize,
    /// Data lines read.
    pub records: usize,
}

/// Reads a whitespace-separated BED-like file (name, start, end; 0-based,
/// half-open). Extra columns are ignored, as are blank lines, `#` comments
/// and `track`/`browser` headers.
pub fn load_bed(path: impl AsRef<Path>, space: Arc<CoordinateSpace>) -> Result<LoadedTrack> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| GscError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let parse_err = |line: usize, message: String| GscError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut intervals = Vec::new();
    let mut clipped = 0;
    let mut records = 0;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|source| GscError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty()
            || trimmed.starts_with('#')
            || trimmed.starts_with("track")
            || trimmed.starts_with("browser")
        {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(parse_err(
                lineno,
                format!("expected at least 3 columns, found {}", fields.len()),
            ));
        }
        let seq = space
            .index_of(fields[0])
            .ok_or_else(|| GscError::UnknownSequence {
                path: path.to_path_buf(),
                line: lineno,
                name: fields[0].to_string(),
            })?;
        let start: u64 = fields[1]
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid start '{}'", fields[1])))?;
        let end: u64 = fields[2]
            .parse()
            .map_err(|_| parse_err(lineno, format!("invalid end '{}'", fields[2])))?;
        if end <= start {
            return Err(parse_err(
                lineno,
                format!("end {end} is not greater than start {start}"),
            ));
        }
        records += 1;
        let seq_iv = space.sequence_interval(seq);
        let seq_len = seq_iv.len();
        if end > seq_len {
            clipped += 1;
            log::warn!(
                "{}:{lineno}: interval clipped to sequence length {seq_len}",
                path.display()
            );
        }
        let (start, end) = (start.min(seq_len), end.min(seq_len));
        if start < end {
            intervals.push(Interval::new(seq_iv.start + start, seq_iv.start + end));
        }
    }
    let track = FeatureTrack::from_intervals(space, intervals)?;
    Ok(LoadedTrack {
        track,
        clipped,
        records,
    })
}

/// Two tracks over the same coordinate space: feature A (indicator `I`) and
/// feature B (indicator `J`).
#[derive(Debug, Clone, PartialEq)]
pub struct TrackPair {
    pub a: FeatureTrack,
    pub b: FeatureTrack,
}

impl TrackPair {
    pub fn new(a: FeatureTrack, b: FeatureTrack) -> Result<Self> {
        if a.space() != b.space() {
            return Err(GscError::SpaceMismatch);
        }
        Ok(TrackPair { a, b })
    }

    pub fn space(&self) -> &Arc<CoordinateSpace> {
        self.a.space()
    }

    pub fn len(&self) -> u64 {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The same pair with roles of A and B exchanged.
    pub fn swapped(&self) -> TrackPair {
        TrackPair {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    /// Rebuilds both tracks with the given blocks laid end to end, in order,
    /// on a fresh single-sequence axis.
    pub fn rearranged(&self, blocks: &[Interval]) -> Result<TrackPair> {
        let total: u64 = blocks.iter().map(Interval::len).sum();
        let space = Arc::new(CoordinateSpace::single("rearranged", total)?);
        let place = |track: &FeatureTrack| {
            let mut runs = Vec::new();
            let mut offset = 0;
            for blk in blocks {
                for r in track.runs_overlapping(blk.start, blk.end) {
                    if let Some(x) = r.intersect(blk) {
                        runs.push(Interval::new(
                            x.start - blk.start + offset,
                            x.end - blk.start + offset,
                        ));
                    }
                }
                offset += blk.len();
            }
            track.with_runs(space.clone(), runs)
        };
        Ok(TrackPair {
            a: place(&self.a),
            b: place(&self.b),
        })
    }
}
