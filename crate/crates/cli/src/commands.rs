use std::fs::{self, File};
use std::hash::BuildHasher;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use gsc::normality::lilliefors;
use gsc::rng::stream;
use gsc::segmentation::{segment_pair, Provenance};
use gsc::simulate::{
    simulate_independent_markov_pair, simulate_markov_pair, simulate_piecewise_pair, MarkovParams,
    NeymanScottParams, NeymanScottRegion,
};
use gsc::studies::{self, Check, Histogram};
use gsc::subsampling::{
    ci_gaussian, ci_percentile, select_block_size, standard_error, subsample, BlockSizeSelection,
    SubsampleParams,
};
use gsc::testing::{double_bootstrap_region_overlap, test_bp_overlap, Alternative, TestParams};
use gsc::tracks::load_bed;
use gsc::{
    CoordinateSpace, GscError, PairedWindow, Segmentation, SegmentationParams, Signal,
    StatisticKind, TrackPair,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{emit, write_json};

fn param(name: &'static str, reason: impl Into<String>) -> GscError {
    GscError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// The given seed, or a fresh one from the process's random hasher state.
fn resolve_seed(seed: &Seed) -> u64 {
    seed.seed
        .unwrap_or_else(|| std::collections::hash_map::RandomState::new().hash_one(0x5eed_u64))
}

struct Loaded {
    pair: TrackPair,
    records: (usize, usize),
    clipped: (usize, usize),
}

fn load_space(path: &Path) -> Result<Arc<CoordinateSpace>> {
    Ok(Arc::new(CoordinateSpace::load(path)?))
}

fn load_pair(inputs: &Inputs) -> Result<Loaded> {
    let space = load_space(&inputs.genome)?;
    let a = load_bed(&inputs.a, space.clone())?;
    let b = load_bed(&inputs.b, space)?;
    Ok(Loaded {
        records: (a.records, b.records),
        clipped: (a.clipped, b.clipped),
        pair: TrackPair::new(a.track, b.track)?,
    })
}

fn inputs_json(inputs: &Inputs, l: &Loaded) -> Value {
    json!({
        "genome": inputs.genome,
        "a": inputs.a,
        "b": inputs.b,
        "length": l.pair.len(),
        "sequences": l.pair.space().sequence_count(),
        "records": [l.records.0, l.records.1],
        "clipped": [l.clipped.0, l.clipped.1],
    })
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| {
        format!("cannot create {}", path.display())
    })?))
}

/// Segmentation for resampling commands: a file, the sequence boundaries,
/// or a dyadic segmentation hinted by `block_len`.
fn resolve_segmentation(
    pair: &TrackPair,
    opts: &SegmentationOpts,
    block_len: u64,
) -> Result<(Segmentation, Value)> {
    if let Some(path) = &opts.segmentation {
        let seg = Segmentation::load(path)?;
        if seg.n() != pair.len() {
            return Err(GscError::SpaceMismatch).with_context(|| {
                format!(
                    "{} covers {} bases but the genome has {}",
                    path.display(),
                    seg.n(),
                    pair.len()
                )
            });
        }
        return Ok((seg, json!({ "file": path })));
    }
    if opts.no_segmentation {
        return Ok((
            Segmentation::natural(pair.space()),
            json!({ "natural": true }),
        ));
    }
    let min_len = opts.min_segment.unwrap_or(5 * block_len);
    let params = SegmentationParams::new(min_len, opts.threshold_b, Some(block_len), opts.signal)?;
    let seg = segment_pair(pair, &params)?;
    let flagged: Vec<_> = seg.regions().filter(|r| r.len() < min_len).collect();
    let config = json!({
        "params": params,
        "flagged_regions": flagged.len(),
        "flagged_len": flagged.iter().map(|r| r.len()).sum::<u64>(),
    });
    Ok((seg, config))
}

fn region_report(pair: &TrackPair, seg: &Segmentation, min_len: u64) -> Vec<Value> {
    seg.regions()
        .map(|r| {
            let c = gsc::stats::paired_counts(pair, PairedWindow::from(r))
                .expect("region inside the space");
            json!({
                "start": r.start,
                "end": r.end,
                "mean_a": c.a_cov as f64 / r.len() as f64,
                "mean_b": c.b_cov as f64 / r.len() as f64,
                "short": r.len() < min_len,
            })
        })
        .collect()
}

pub fn segment(args: &SegmentArgs) -> Result<()> {
    let space = load_space(&args.genome)?;
    let a = load_bed(&args.a, space.clone())?;
    let b = match &args.b {
        Some(path) => load_bed(path, space.clone())?.track,
        None if args.signal == Signal::A => a.track.clone(),
        None => return Err(param("b", format!("signal {:?} needs track B", args.signal)).into()),
    };
    let pair = TrackPair::new(a.track, b)?;
    let params = SegmentationParams::new(
        args.min_segment,
        args.threshold_b,
        args.block_length,
        args.signal,
    )?;
    let seg = segment_pair(&pair, &params)?.with_boundaries(pair.space())?;
    let regions = region_report(&pair, &seg, args.min_segment);
    let flagged: Vec<&Value> = regions.iter().filter(|r| r["short"] == true).collect();
    let report = json!({
        "command": "segment",
        "config": {
            "genome": args.genome,
            "a": args.a,
            "b": args.b,
            "params": params,
        },
        "result": {
            "cuts": seg.cuts(),
            "provenance": seg.provenance(),
            "regions": regions,
            "flagged": flagged.len(),
        },
    });
    if let Some(dir) = &args.output.out {
        ensure_dir(dir)?;
        let mut f = create(&dir.join("segmentation.txt"))?;
        seg.write(&mut f)?;
        f.flush()?;
        write_json(&dir.join("report.json"), &report)?;
    }
    emit(&report, args.output.format)
}

pub fn subsample_cmd(args: &SubsampleArgs) -> Result<()> {
    let seed = resolve_seed(&args.seed);
    let loaded = load_pair(&args.inputs)?;
    let pair = &loaded.pair;
    let n = pair.len();
    let (seg, seg_config) = resolve_segmentation(pair, &args.segmentation, args.block_length)?;
    let observed = args
        .statistic
        .evaluate_windows(pair, &[PairedWindow::aligned(0, n)])?
        .value;
    let d = subsample(
        pair,
        &seg,
        &args.statistic,
        &SubsampleParams::new(args.block_length, args.replicates, seed),
    )?;
    let full = d.to_full_scale(observed, n);
    let report = json!({
        "command": "subsample",
        "seed": seed,
        "config": {
            "inputs": inputs_json(&args.inputs, &loaded),
            "statistic": args.statistic.label(),
            "block_length": args.block_length,
            "replicates": args.replicates,
            "level": args.level,
            "segmentation": seg_config,
        },
        "result": {
            "observed": observed,
            "segmentation": seg.with_boundaries(pair.space())?.cuts(),
            "replicates": d.summary(),
            "standard_error": standard_error(&d, n).ok(),
            "ci_gaussian": ci_gaussian(observed, &d, n, args.level).ok(),
            "ci_percentile": ci_percentile(&full, args.level).ok(),
            "normality": lilliefors(&d.values).ok(),
        },
    });
    if let Some(dir) = &args.output.out {
        ensure_dir(dir)?;
        let mut f = create(&dir.join("replicates.txt"))?;
        d.write_values(&mut f)?;
        f.flush()?;
        write_json(&dir.join("report.json"), &report)?;
    }
    emit(&report, args.output.format)
}

fn selection(
    pair: &TrackPair,
    seg: &Segmentation,
    kind: &StatisticKind,
    rho: f64,
    steps: u32,
    replicates: usize,
    seed: u64,
) -> Result<BlockSizeSelection> {
    Ok(select_block_size(
        pair, seg, kind, rho, steps, replicates, seed,
    )?)
}

/// Block length used to hint the segmentation before a block length has
/// been selected: the middle of the grid.
fn provisional_block(n: u64, rho: f64, steps: u32) -> u64 {
    ((rho.powi(steps.div_ceil(2) as i32) * n as f64).round() as u64).max(1)
}

pub fn select_cmd(args: &SelectArgs) -> Result<()> {
    let seed = resolve_seed(&args.seed);
    let loaded = load_pair(&args.inputs)?;
    let pair = &loaded.pair;
    let hint = provisional_block(pair.len(), args.rho, args.grid_steps);
    let (seg, seg_config) = resolve_segmentation(pair, &args.segmentation, hint)?;
    let sel = selection(
        pair,
        &seg,
        &args.statistic,
        args.rho,
        args.grid_steps,
        args.replicates,
        seed,
    )?;
    let report = json!({
        "command": "select-block-size",
        "seed": seed,
        "config": {
            "inputs": inputs_json(&args.inputs, &loaded),
            "statistic": args.statistic.label(),
            "rho": args.rho,
            "grid_steps": args.grid_steps,
            "replicates": args.replicates,
            "segmentation": seg_config,
        },
        "result": sel,
    });
    if let Some(dir) = &args.output.out {
        ensure_dir(dir)?;
        write_json(&dir.join("report.json"), &report)?;
    }
    emit(&report, args.output.format)
}

pub fn test_cmd(args: &TestArgs) -> Result<()> {
    let seed = resolve_seed(&args.seed);
    let loaded = load_pair(&args.inputs)?;
    let pair = &loaded.pair;
    let n = pair.len();
    let double = match args.statistic {
        StatisticKind::BpOverlapFraction => false,
        StatisticKind::RegionOverlap => true,
        ref other => {
            return Err(param(
                "statistic",
                format!("{other} cannot be tested; use bp-overlap or region-overlap"),
            )
            .into())
        }
    };
    let hint = args
        .block_length
        .unwrap_or_else(|| provisional_block(n, args.rho, args.grid_steps));
    let (seg, seg_config) = resolve_segmentation(pair, &args.segmentation, hint)?;
    let sel = match args.block_length {
        Some(_) => None,
        None => Some(selection(
            pair,
            &seg,
            &args.statistic,
            args.rho,
            args.grid_steps,
            args.replicates,
            gsc::rng::child_seed(seed, 7),
        )?),
    };
    let block_len = args
        .block_length
        .or(sel.as_ref().map(|s| s.chosen))
        .unwrap();
    let mut params = TestParams::new(block_len, args.replicates, seed);
    params.formulation = args.formulation;
    params.outer_multiplier = args.outer_multiplier;
    params.strict_disjoint = args.strict_disjoint;
    params.alternative = if args.two_sided {
        Alternative::TwoSided
    } else {
        Alternative::Greater
    };
    let result = if double {
        double_bootstrap_region_overlap(pair, &seg, &params, args.alpha)
    } else {
        test_bp_overlap(pair, &seg, &params, args.alpha)
    };
    let result = match (result, &sel) {
        (Ok(r), _) => r,
        (Err(e), Some(_)) => return Err(e).context(format!("selected block length {block_len}")),
        (Err(e), None) => return Err(e.into()),
    };
    let report = json!({
        "command": "test",
        "seed": seed,
        "config": {
            "inputs": inputs_json(&args.inputs, &loaded),
            "statistic": args.statistic.label(),
            "params": params,
            "alpha": args.alpha,
            "segmentation": seg_config,
        },
        "result": {
            "test": result,
            "segmentation": seg.with_boundaries(pair.space())?.cuts(),
            "block_size_selection": sel,
        },
    });
    if let Some(dir) = &args.output.out {
        ensure_dir(dir)?;
        let mut f = create(&dir.join("null.txt"))?;
        for v in &result.null_values {
            writeln!(f, "{v}")?;
        }
        f.flush()?;
        write_json(&dir.join("report.json"), &report)?;
    }
    emit(&report, args.output.format)
}

fn parse_regions(spec: &str) -> Result<Vec<NeymanScottRegion>> {
    spec.split(',')
        .map(|r| {
            let f: Vec<&str> = r.split(':').collect();
            if f.len() != 5 {
                return Err(param(
                    "regions",
                    format!("'{r}' must be length:rate:cluster_size:offset_mean:feature_len_mean"),
                )
                .into());
            }
            let num = |i: usize| -> Result<f64> {
                f[i].trim()
                    .parse::<f64>()
                    .map_err(|_| param("regions", format!("'{}' is not a number", f[i])).into())
            };
            let length = f[0]
                .trim()
                .parse::<u64>()
                .map_err(|_| param("regions", format!("'{}' is not a length", f[0])))?;
            Ok(NeymanScottRegion {
                length,
                rate: num(1)?,
                cluster_size: num(2)?,
                offset_mean: num(3)?,
                feature_len_mean: num(4)?,
            })
        })
        .collect()
}

pub fn simulate_cmd(args: &SimulateArgs) -> Result<()> {
    let seed = resolve_seed(&args.seed);
    let mut rng = stream(seed, 0);
    let (pair, truth, model): (TrackPair, Segmentation, Value) = match args.model {
        Model::TwoRegion | Model::BroadPeaks => {
            let mut params = match (&args.regions, args.model) {
                (Some(spec), _) => NeymanScottParams::new(parse_regions(spec)?)?,
                (None, Model::TwoRegion) => NeymanScottParams::two_region(),
                (None, _) => NeymanScottParams::broad_peaks(),
            };
            if let Some(unit) = args.rate_unit {
                params = params.with_rate_unit(unit)?;
            }
            let (pair, truth) = simulate_piecewise_pair(&params, &mut rng)?;
            (pair, truth, serde_json::to_value(&params)?)
        }
        Model::Markov => {
            let params = MarkovParams::new(args.length, args.p0, args.window)?;
            let pair = if args.independent {
                simulate_independent_markov_pair(&params, &mut rng)?
            } else {
                simulate_markov_pair(&params, &mut rng)?
            };
            let truth = Segmentation::new(vec![0, args.length as u64], Provenance::True)?;
            let model = json!({ "n": args.length, "p0": args.p0, "window": args.window, "independent": args.independent });
            (pair, truth, model)
        }
    };
    ensure_dir(&args.out)?;
    let out = &args.out;
    for (name, track) in [("a.bed", &pair.a), ("b.bed", &pair.b)] {
        let mut f = create(&out.join(name))?;
        track.write_bed(&mut f)?;
        f.flush()?;
    }
    let mut f = create(&out.join("genome.txt"))?;
    pair.space().write(&mut f)?;
    f.flush()?;
    let mut f = create(&out.join("truth.txt"))?;
    truth.write(&mut f)?;
    f.flush()?;
    let manifest = json!({
        "command": "simulate",
        "seed": seed,
        "config": { "model": format!("{:?}", args.model), "params": model },
        "result": {
            "files": ["a.bed", "b.bed", "genome.txt", "truth.txt"],
            "length": pair.len(),
            "instances": [pair.a.run_count(), pair.b.run_count()],
            "coverage": [pair.a.coverage(), pair.b.coverage()],
            "truth": truth.cuts(),
        },
    });
    write_json(&out.join("manifest.json"), &manifest)?;
    emit(&manifest, args.format)
}

#[derive(Serialize)]
struct StudyReport<'a, R: Serialize> {
    command: &'static str,
    study: &'static str,
    seed: u64,
    quick: bool,
    passed: bool,
    checks: &'a [Check],
    report: &'a R,
}

fn finish<R: Serialize>(
    args: &ReproduceArgs,
    study: &'static str,
    seed: u64,
    checks: &[Check],
    histograms: &[Histogram],
    report: &R,
) -> Result<()> {
    let wrapped = StudyReport {
        command: "reproduce",
        study,
        seed,
        quick: args.quick,
        passed: checks.iter().all(|c| c.pass),
        checks,
        report,
    };
    let value = serde_json::to_value(&wrapped)?;
    if let Some(dir) = &args.output.out {
        ensure_dir(dir)?;
        write_json(&dir.join(format!("{study}.json")), &value)?;
        let mut f = create(&dir.join(format!("{study}_histograms.tsv")))?;
        writeln!(f, "label\tlower\tupper\tcount")?;
        for h in histograms {
            f.write_all(h.to_tsv().as_bytes())?;
        }
        f.flush()?;
    }
    match args.output.format {
        Format::Json => emit(&value, Format::Json),
        Format::Tsv => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "check\tvalue\ttarget\tstatus")?;
            for c in checks {
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    c.name,
                    c.value,
                    c.target,
                    if c.pass { "PASS" } else { "FAIL" }
                )?;
            }
            Ok(())
        }
    }
}

pub fn reproduce(args: &ReproduceArgs) -> Result<()> {
    match args.study {
        Study::Sim1 => {
            let mut c = studies::Sim1Config::default();
            if args.quick {
                c.truth_sequences = 500;
                c.analysis_sequences = 2;
                c.replicates = 200;
            }
            c.seed = args.seed.unwrap_or(c.seed);
            let r = studies::sim1(&c)?;
            finish(args, "sim1", c.seed, &r.checks, &r.histograms, &r)
        }
        Study::Sim2a => {
            let mut c = studies::Sim2aConfig::default();
            if args.quick {
                c.truth_pairs = 200;
                c.analysis_pairs = 3;
                c.replicates = 200;
                c.recovery_runs = 20;
                c.normality_pairs = 2;
            }
            c.seed = args.seed.unwrap_or(c.seed);
            let r = studies::sim2a(&c)?;
            finish(args, "sim2a", c.seed, &r.checks, &r.histograms, &r)
        }
        Study::Sim2b => {
            let mut c = studies::Sim2bConfig::default();
            if args.quick {
                c.population_pairs = 40;
                c.replicates = 200;
                c.outer_replicates = 200;
                c.shuffle_replicates = 50;
            }
            c.seed = args.seed.unwrap_or(c.seed);
            let r = studies::sim2b(&c)?;
            finish(args, "sim2b", c.seed, &r.checks, &r.histograms, &r)
        }
        Study::Size => {
            let mut c = studies::SizeConfig::default();
            if args.quick {
                c.trials = 40;
                c.replicates = 199;
            }
            c.seed = args.seed.unwrap_or(c.seed);
            let r = studies::size_study(&c)?;
            let hist = [Histogram::new("p_values", &r.p_values, 20)];
            finish(args, "size", c.seed, &r.checks, &hist, &r)
        }
    }
}
