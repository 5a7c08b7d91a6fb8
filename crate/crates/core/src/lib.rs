//! Significance testing and confidence intervals for overlap statistics of
//! paired binary genomic feature tracks.
//!
//! The genome is modelled as a concatenation of stationary, mixing segments.
//! Inference proceeds in three steps: find approximately homogeneous
//! segments ([`segmentation`]), estimate the sampling distribution of a
//! statistic by drawing one proportional block per segment
//! ([`subsampling`]), and test independence of the two tracks against a
//! null built from cross-paired blocks ([`testing`]).

pub mod error;
pub mod normality;
pub mod rng;
pub mod segmentation;
pub mod simulate;
pub mod stats;
pub mod studies;
pub mod subsampling;
pub mod testing;
pub mod tracks;

pub use error::{GscError, Result};
pub use segmentation::{Segmentation, SegmentationParams, Signal};
pub use stats::{PairedWindow, StatValue, StatisticKind, WindowCounts};
pub use tracks::{CoordinateSpace, FeatureTrack, Interval, TrackPair};
