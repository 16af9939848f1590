//! Ensemble statistics: S₂, S₂^min, S_∞, S_∞^min over Haar, generated,
//! or file-backed state collections, with histograms and bound lines.

use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amegen::{generate_kuniform, GenConfig};
use crate::entropy::{ame_lower_bound, renyi_entropy, support_upper_bound, Order};
use crate::error::{MdentError, Result};
use crate::io::load_state;
use crate::minent::{minimize_entropy, MinEntropyConfig};
use crate::random::{random_haar_state, rng_from_seed, sub_seeds, DEFAULT_SEED};
use crate::seesaw::{s_infinity_min, SeesawConfig};
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    S2,
    S2Min,
    SInf,
    SInfMin,
}

impl Quantity {
    pub fn label(&self) -> &'static str {
        match self {
            Quantity::S2 => "S2",
            Quantity::S2Min => "S2min",
            Quantity::SInf => "Sinf",
            Quantity::SInfMin => "Sinfmin",
        }
    }

    pub fn parse(s: &str) -> Result<Quantity> {
        match s.to_ascii_lowercase().as_str() {
            "s2" => Ok(Quantity::S2),
            "s2min" => Ok(Quantity::S2Min),
            "sinf" => Ok(Quantity::SInf),
            "sinfmin" => Ok(Quantity::SInfMin),
            other => Err(MdentError::InvalidParameter(format!(
                "unknown quantity '{}'; available: S2, S2min, Sinf, Sinfmin",
                other
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Source {
    Haar,
    AmeGenerated,
    StateFiles(Vec<PathBuf>),
}

impl Source {
    fn label(&self) -> &'static str {
        match self {
            Source::Haar => "haar",
            Source::AmeGenerated => "ame_generated",
            Source::StateFiles(_) => "state_files",
        }
    }
}

/// What to sample and what to compute on it.
///
/// `S2min` always optimizes at q = 2; the per-state optimizer and generator
/// seeds are derived from `seed`, so the `seed` fields inside the nested
/// configs are ignored.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    pub source: Source,
    pub n: usize,
    pub d: usize,
    pub size: usize,
    pub quantities: Vec<Quantity>,
    pub min_config: MinEntropyConfig,
    pub seesaw_config: SeesawConfig,
    pub bins: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(source: Source, n: usize, d: usize, size: usize) -> EnsembleSpec {
        EnsembleSpec {
            source,
            n,
            d,
            size,
            quantities: vec![Quantity::S2],
            min_config: MinEntropyConfig::new(2.0),
            seesaw_config: SeesawConfig::default(),
            bins: 60,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateRecord {
    pub index: usize,
    pub seed: u64,
    /// One value per spec quantity, in spec order.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantityStats {
    pub quantity: String,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Histogram {
    pub quantity: String,
    pub lo: f64,
    pub hi: f64,
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundLines {
    /// ⌊n/2⌋·ln d.
    pub ame_lower: f64,
    /// n·ln d.
    pub max_entropy: f64,
    /// ln R_max.
    pub support_upper: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub source: String,
    pub n: usize,
    pub d: usize,
    pub size: usize,
    pub seed: u64,
    pub quantities: Vec<String>,
    pub records: Vec<StateRecord>,
    pub stats: Vec<QuantityStats>,
    pub histograms: Vec<Histogram>,
    pub bounds: BoundLines,
    /// Generator attempts that did not verify; excluded from the records.
    pub failures: usize,
}

fn kahan_push(sum: &mut f64, comp: &mut f64, x: f64) {
    let y = x - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

fn obtain_state(spec: &EnsembleSpec, index: usize, draw_seed: u64) -> Result<Option<State>> {
    match &spec.source {
        Source::Haar => {
            let mut rng = rng_from_seed(draw_seed);
            Ok(Some(random_haar_state(spec.n, spec.d, &mut rng)))
        }
        Source::AmeGenerated => {
            let mut cfg = GenConfig::new(spec.n, spec.d, spec.n / 2);
            cfg.seed = draw_seed;
            let res = generate_kuniform(&cfg)?;
            Ok(if res.success { Some(res.state) } else { None })
        }
        Source::StateFiles(paths) => {
            let loaded = load_state(&paths[index])?;
            let s = loaded.state;
            if s.n_parties() != spec.n || s.local_dim() != spec.d {
                return Err(MdentError::DimensionMismatch(format!(
                    "{} holds a ({}, {}) state, expected ({}, {})",
                    paths[index].display(),
                    s.n_parties(),
                    s.local_dim(),
                    spec.n,
                    spec.d
                )));
            }
            Ok(Some(s))
        }
    }
}

fn evaluate(spec: &EnsembleSpec, state: &State, min_seed: u64, seesaw_seed: u64) -> Result<Vec<f64>> {
    let mut values = Vec::with_capacity(spec.quantities.len());
    for q in &spec.quantities {
        let v = match q {
            Quantity::S2 => renyi_entropy(state, Order::Finite(2.0))?,
            Quantity::SInf => renyi_entropy(state, Order::Infinity)?,
            Quantity::S2Min => {
                let mut cfg = spec.min_config.clone();
                cfg.q = 2.0;
                cfg.seed = min_seed;
                minimize_entropy(state, &cfg)?.entropy
            }
            Quantity::SInfMin => {
                let mut cfg = spec.seesaw_config.clone();
                cfg.seed = seesaw_seed;
                s_infinity_min(state, &cfg)?.s_inf_min
            }
        };
        values.push(v);
    }
    Ok(values)
}

fn validate(spec: &EnsembleSpec) -> Result<usize> {
    if spec.n < 2 || spec.d < 2 {
        return Err(MdentError::InvalidParameter(format!(
            "need n >= 2 and d >= 2, got n={}, d={}",
            spec.n, spec.d
        )));
    }
    if spec.quantities.is_empty() {
        return Err(MdentError::InvalidParameter(
            "quantities must be nonempty".into(),
        ));
    }
    if spec.bins == 0 {
        return Err(MdentError::InvalidParameter("need at least one bin".into()));
    }
    let size = match &spec.source {
        Source::StateFiles(paths) => paths.len(),
        _ => spec.size,
    };
    if size == 0 {
        return Err(MdentError::InvalidParameter("empty ensemble".into()));
    }
    Ok(size)
}

/// Samples the ensemble and reduces it to records, statistics, and
/// histograms. Deterministic under the spec seed; record order is by state
/// index regardless of scheduling.
pub fn run_ensemble(spec: &EnsembleSpec) -> Result<EnsembleReport> {
    let size = validate(spec)?;
    let state_seeds = sub_seeds(spec.seed, size);

    let outcomes: Vec<Result<Option<StateRecord>>> = (0..size)
        .into_par_iter()
        .map(|index| {
            let parts = sub_seeds(state_seeds[index], 3);
            let state = match obtain_state(spec, index, parts[0])? {
                Some(s) => s,
                None => return Ok(None),
            };
            let values = evaluate(spec, &state, parts[1], parts[2])?;
            Ok(Some(StateRecord {
                index,
                seed: state_seeds[index],
                values,
            }))
        })
        .collect();

    let mut records = Vec::with_capacity(size);
    let mut failures = 0usize;
    for outcome in outcomes {
        match outcome? {
            Some(r) => records.push(r),
            None => failures += 1,
        }
    }

    let hi = spec.n as f64 * (spec.d as f64).ln();
    let mut stats = Vec::new();
    let mut histograms = Vec::new();
    for (qi, q) in spec.quantities.iter().enumerate() {
        let mut sum = 0.0;
        let mut comp = 0.0;
        let mut lo_v = f64::INFINITY;
        let mut hi_v = f64::NEG_INFINITY;
        for r in &records {
            let v = r.values[qi];
            kahan_push(&mut sum, &mut comp, v);
            lo_v = lo_v.min(v);
            hi_v = hi_v.max(v);
        }
        let count = records.len();
        let mean = if count > 0 { sum / count as f64 } else { 0.0 };
        let mut var_sum = 0.0;
        let mut var_comp = 0.0;
        for r in &records {
            let d = r.values[qi] - mean;
            kahan_push(&mut var_sum, &mut var_comp, d * d);
        }
        let std = if count > 1 {
            (var_sum / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        stats.push(QuantityStats {
            quantity: q.label().to_string(),
            mean,
            std,
            min: if count > 0 { lo_v } else { 0.0 },
            max: if count > 0 { hi_v } else { 0.0 },
        });

        let edges: Vec<f64> = (0..=spec.bins)
            .map(|b| hi * b as f64 / spec.bins as f64)
            .collect();
        let mut counts = vec![0usize; spec.bins];
        for r in &records {
            let v = r.values[qi].clamp(0.0, hi);
            let mut bin = ((v / hi) * spec.bins as f64) as usize;
            if bin >= spec.bins {
                bin = spec.bins - 1;
            }
            counts[bin] += 1;
        }
        histograms.push(Histogram {
            quantity: q.label().to_string(),
            lo: 0.0,
            hi,
            edges,
            counts,
        });
    }

    Ok(EnsembleReport {
        source: spec.source.label().to_string(),
        n: spec.n,
        d: spec.d,
        size,
        seed: spec.seed,
        quantities: spec.quantities.iter().map(|q| q.label().to_string()).collect(),
        records,
        stats,
        histograms,
        bounds: BoundLines {
            ame_lower: ame_lower_bound(spec.n, spec.d),
            max_entropy: hi,
            support_upper: support_upper_bound(spec.n, spec.d)?,
        },
        failures,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl ExportFormat {
    pub fn parse(s: &str) -> Result<ExportFormat> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(MdentError::InvalidParameter(format!(
                "unknown format '{}'; available: csv, json",
                other
            ))),
        }
    }
}

/// CSV rendering: one data row per state, then stats, histogram, and bound
/// sections. Identical reports render to identical bytes.
pub fn report_to_csv(report: &EnsembleReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# mdent ensemble source={} n={} d={} size={} seed={} failures={}\n",
        report.source, report.n, report.d, report.size, report.seed, report.failures
    ));
    out.push_str("index,seed");
    for q in &report.quantities {
        out.push_str(&format!(",{}", q));
    }
    out.push('\n');
    for r in &report.records {
        out.push_str(&format!("{},{}", r.index, r.seed));
        for v in &r.values {
            out.push_str(&format!(",{}", v));
        }
        out.push('\n');
    }
    out.push_str("# stats\nquantity,mean,std,min,max\n");
    for s in &report.stats {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.quantity, s.mean, s.std, s.min, s.max
        ));
    }
    for h in &report.histograms {
        out.push_str(&format!(
            "# histogram quantity={} lo={} hi={} bins={}\nbin_lo,bin_hi,count\n",
            h.quantity,
            h.lo,
            h.hi,
            h.counts.len()
        ));
        for (b, c) in h.counts.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", h.edges[b], h.edges[b + 1], c));
        }
    }
    out.push_str(&format!(
        "# bounds\name_lower,{}\nmax_entropy,{}\nsupport_upper,{}\n",
        report.bounds.ame_lower, report.bounds.max_entropy, report.bounds.support_upper
    ));
    out
}

pub fn export(report: &EnsembleReport, format: ExportFormat, path: &std::path::Path) -> Result<()> {
    let body = match format {
        ExportFormat::Csv => report_to_csv(report),
        ExportFormat::Json => serde_json::to_string_pretty(report)?,
    };
    fs::write(path, body)?;
    Ok(())
}

pub fn load_report(path: &std::path::Path) -> Result<EnsembleReport> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
