//! Parameter sweeps over subspace dimension, measurement count and seed,
//! producing one CSV row per cell plus a JSON summary of means and standard
//! errors.
//!
//! Cells run in parallel on the current rayon pool; output order is fixed
//! (dimension, then `m`, then seed, then operator kind) so repeated runs give
//! byte-identical files.
//!
//! Randomness is shared where it helps comparisons: the point cloud depends
//! only on (seed, d), and the operator seed only on the run seed, so every
//! `m` and every `d` sees the same draw, and a sparse operator is the
//! thinned version of the dense one.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedders::{EmbeddingOperator, OperatorKind};
use crate::error::{param, Error, Result};
use crate::metrics::{distortion_report, local_check, DistortionReport, LocalCheck, LocalCheckConfig};
use crate::rng;
use crate::sets::{gaussian_width, sample_points, Estimate, PointCloud, SetDescriptor};
use crate::theory::{required_samples, ComplexityQuery, Regime};

/// Version of the summary JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

const CLOUD_LABEL: u64 = 0xC10D;
const OPERATOR_LABEL: u64 = 0x0BE7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    /// Binary against linear distortion for dense Gaussian operators.
    Fig1aBinVsLin,
    /// Binary against normalized linear distortion.
    Fig1bNormalized,
    /// Fast binary map against dense Gaussian.
    FjltVsGaussian,
    /// Sparse Gaussian (2/3 zeros) against dense Gaussian.
    SparseVsGaussian,
    /// Local embedding check over the grid.
    LocalEmbeddingSweep,
    /// Sample-complexity formulas at estimated subspace widths.
    ComplexityTable,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 6] = [
        ExperimentName::Fig1aBinVsLin,
        ExperimentName::Fig1bNormalized,
        ExperimentName::FjltVsGaussian,
        ExperimentName::SparseVsGaussian,
        ExperimentName::LocalEmbeddingSweep,
        ExperimentName::ComplexityTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentName::Fig1aBinVsLin => "fig1a_bin_vs_lin",
            ExperimentName::Fig1bNormalized => "fig1b_normalized",
            ExperimentName::FjltVsGaussian => "fjlt_vs_gaussian",
            ExperimentName::SparseVsGaussian => "sparse_vs_gaussian",
            ExperimentName::LocalEmbeddingSweep => "local_embedding_sweep",
            ExperimentName::ComplexityTable => "complexity_table",
        }
    }

    /// Operator kinds compared in each cell.
    pub fn kinds(self) -> &'static [OperatorKind] {
        match self {
            ExperimentName::FjltVsGaussian => &[OperatorKind::DenseGaussian, OperatorKind::FastBinary],
            ExperimentName::SparseVsGaussian => &[OperatorKind::DenseGaussian, OperatorKind::SparseGaussian],
            ExperimentName::ComplexityTable => &[],
            _ => &[OperatorKind::DenseGaussian],
        }
    }

    pub fn csv_header(self) -> &'static str {
        match self {
            ExperimentName::LocalEmbeddingSweep => {
                "set,kind,n,d,p,m,seed,delta,eps,far_pairs_ok,close_pairs_ok,violations"
            }
            ExperimentName::ComplexityTable => "regime,n,d,omega_sq,delta,m_required",
            _ => DistortionReport::CSV_HEADER,
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        ExperimentName::ALL
            .into_iter()
            .find(|e| e.name() == key)
            .ok_or_else(|| param(format!("unknown experiment '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: ExperimentName,
    /// Ambient dimension.
    pub n: usize,
    /// Subspace dimensions.
    pub dims: Vec<usize>,
    /// Points per cloud.
    pub p: usize,
    pub m_grid: Vec<usize>,
    pub seeds: Vec<u64>,
    /// CSV destination for [`run`]; the summary goes next to it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    /// Target distortion for the local sweep.
    pub delta: f64,
    pub local: LocalCheckConfig,
    /// Distortion levels for the complexity table.
    pub deltas: Vec<f64>,
    /// Monte Carlo draws for widths in the complexity table.
    pub width_trials: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: ExperimentName::Fig1aBinVsLin,
            n: 128,
            dims: vec![3, 6],
            p: 200,
            m_grid: (1..=25).map(|k| 4 * k).collect(),
            seeds: (0..20).collect(),
            output_path: None,
            delta: 0.1,
            local: LocalCheckConfig::default(),
            deltas: vec![0.05, 0.1, 0.2, 0.3],
            width_trials: 2000,
        }
    }
}

impl ExperimentConfig {
    pub fn new(name: ExperimentName) -> Self {
        Self { name, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(param("n must be positive"));
        }
        if self.dims.is_empty() {
            return Err(param("dims is empty"));
        }
        if let Some(&d) = self.dims.iter().find(|&&d| d == 0 || d > self.n) {
            return Err(param(format!("subspace dimension {d} outside [1, {}]", self.n)));
        }
        if self.seeds.is_empty() {
            return Err(param("seeds is empty"));
        }
        match self.name {
            ExperimentName::ComplexityTable => {
                if self.deltas.is_empty() {
                    return Err(param("deltas is empty"));
                }
                if let Some(d) = self.deltas.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
                    return Err(param(format!("delta {d} outside (0, 1)")));
                }
                if self.width_trials == 0 {
                    return Err(param("width_trials must be positive"));
                }
            }
            _ => {
                if self.m_grid.is_empty() {
                    return Err(param("m_grid is empty"));
                }
                if self.m_grid[0] == 0 || self.m_grid.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(param("m_grid must be positive and strictly ascending"));
                }
                if self.p < 2 {
                    return Err(param(format!("p must be at least 2, got {}", self.p)));
                }
                if self.name == ExperimentName::LocalEmbeddingSweep && !(self.delta > 0.0 && self.delta < 1.0) {
                    return Err(param(format!("delta {} outside (0, 1)", self.delta)));
                }
            }
        }
        Ok(())
    }
}

/// Mean and standard error of the three distortions across seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionCell {
    pub d: usize,
    pub kind: OperatorKind,
    pub m: usize,
    pub delta_bin: Estimate,
    pub delta_lin: Estimate,
    pub delta_nlin: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalCell {
    pub d: usize,
    pub kind: OperatorKind,
    pub m: usize,
    /// Fraction of seeds with no violation of either rule.
    pub pass_rate: f64,
    pub far_pairs_ok_rate: f64,
    pub close_pairs_ok_rate: f64,
    pub violations: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub regime: Regime,
    pub n: usize,
    pub d: usize,
    pub omega_sq: f64,
    pub delta: f64,
    pub m_required: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: u32,
    pub experiment: ExperimentName,
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub distortion: Vec<DistortionCell>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub local: Vec<LocalCell>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub complexity: Vec<ComplexityRow>,
}

impl Summary {
    pub fn cell(&self, d: usize, kind: OperatorKind, m: usize) -> Option<&DistortionCell> {
        self.distortion.iter().find(|c| c.d == d && c.kind == kind && c.m == m)
    }

    /// Mean binary distortion of one cell.
    pub fn mean_bin(&self, d: usize, kind: OperatorKind, m: usize) -> Option<f64> {
        self.cell(d, kind, m).map(|c| c.delta_bin.estimate)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub csv: String,
    pub summary: Summary,
}

/// Seed of the point cloud for one (run seed, dimension) pair.
pub fn cloud_seed(seed: u64, d: usize) -> u64 {
    rng::derive(seed, &[CLOUD_LABEL, d as u64])
}

/// Seed of every operator drawn for one run seed.
pub fn operator_seed(seed: u64) -> u64 {
    rng::derive(seed, &[OPERATOR_LABEL])
}

/// Runs the sweep in memory.
pub fn execute(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    info!("running {} on {} threads", config.name, rayon::current_num_threads());
    match config.name {
        ExperimentName::ComplexityTable => complexity_table(config),
        ExperimentName::LocalEmbeddingSweep => local_sweep(config),
        _ => distortion_sweep(config),
    }
}

/// Runs the sweep and writes the CSV to `output_path` and the summary to
/// `<stem>.summary.json` beside it.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let path = config.output_path.as_deref().ok_or_else(|| param("output_path is not set"))?;
    let out = execute(config)?;
    fs::write(path, &out.csv)?;
    fs::write(summary_path(path), serde_json::to_string_pretty(&out.summary)? + "\n")?;
    Ok(out)
}

pub fn summary_path(csv_path: &Path) -> PathBuf {
    let stem = csv_path.file_stem().map_or_else(|| "experiment".into(), |s| s.to_string_lossy().into_owned());
    csv_path.with_file_name(format!("{stem}.summary.json"))
}

struct Cell {
    d_index: usize,
    m: usize,
    seed_index: usize,
    kind: OperatorKind,
}

fn clouds(config: &ExperimentConfig) -> Result<Vec<Vec<PointCloud>>> {
    config
        .dims
        .par_iter()
        .map(|&d| {
            config
                .seeds
                .par_iter()
                .map(|&s| sample_points(&SetDescriptor::subspace(config.n, d), config.p, cloud_seed(s, d)))
                .collect()
        })
        .collect()
}

fn cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for d_index in 0..config.dims.len() {
        for &m in &config.m_grid {
            for seed_index in 0..config.seeds.len() {
                for &kind in config.name.kinds() {
                    out.push(Cell { d_index, m, seed_index, kind });
                }
            }
        }
    }
    out
}

fn run_cells<T: Send>(
    config: &ExperimentConfig,
    f: impl Fn(&Cell, &PointCloud, &EmbeddingOperator, u64) -> Result<T> + Sync,
) -> Result<Vec<(Cell, T)>> {
    let clouds = clouds(config)?;
    cells(config)
        .into_par_iter()
        .map(|cell| {
            let seed = config.seeds[cell.seed_index];
            let op = EmbeddingOperator::build(cell.kind, cell.m, config.n, operator_seed(seed), None)?;
            let value = f(&cell, &clouds[cell.d_index][cell.seed_index], &op, seed)?;
            Ok((cell, value))
        })
        .collect()
}

/// Groups per-seed values by (d, kind, m) in output order.
fn group<T>(config: &ExperimentConfig, rows: &[(Cell, T)]) -> BTreeMap<(usize, usize, usize), Vec<usize>> {
    let kinds = config.name.kinds();
    let mut groups: BTreeMap<(usize, usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, (cell, _)) in rows.iter().enumerate() {
        let k = kinds.iter().position(|&k| k == cell.kind).expect("kind of this experiment");
        groups.entry((cell.d_index, k, cell.m)).or_default().push(i);
    }
    groups
}

fn distortion_sweep(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let rows = run_cells(config, |_, cloud, op, seed| distortion_report(cloud, op, seed))?;
    let mut csv = String::from(config.name.csv_header());
    csv.push('\n');
    for (_, r) in &rows {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    let kinds = config.name.kinds();
    let distortion = group(config, &rows)
        .into_iter()
        .map(|((d_index, k, m), idx)| {
            let pick = |f: fn(&DistortionReport) -> f64| {
                Estimate::from_samples(&idx.iter().map(|&i| f(&rows[i].1)).collect::<Vec<_>>())
            };
            DistortionCell {
                d: config.dims[d_index],
                kind: kinds[k],
                m,
                delta_bin: pick(|r| r.delta_bin),
                delta_lin: pick(|r| r.delta_lin),
                delta_nlin: pick(|r| r.delta_nlin),
            }
        })
        .collect();
    Ok(ExperimentOutput { csv, summary: summary(config, distortion, Vec::new(), Vec::new()) })
}

fn local_sweep(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let rows: Vec<(Cell, LocalCheck)> =
        run_cells(config, |_, cloud, op, _| local_check(cloud, op, config.delta, config.local))?;
    let mut csv = String::from(config.name.csv_header());
    csv.push('\n');
    for (cell, r) in &rows {
        csv.push_str(&format!(
            "subspace,{},{},{},{},{},{},{},{},{},{},{}\n",
            cell.kind,
            config.n,
            config.dims[cell.d_index],
            config.p,
            cell.m,
            config.seeds[cell.seed_index],
            r.delta,
            r.eps,
            r.far_pairs_ok,
            r.close_pairs_ok,
            r.violations.len()
        ));
    }
    let kinds = config.name.kinds();
    let local = group(config, &rows)
        .into_iter()
        .map(|((d_index, k, m), idx)| {
            let rate =
                |f: fn(&LocalCheck) -> bool| idx.iter().filter(|&&i| f(&rows[i].1)).count() as f64 / idx.len() as f64;
            LocalCell {
                d: config.dims[d_index],
                kind: kinds[k],
                m,
                pass_rate: rate(|r| r.far_pairs_ok && r.close_pairs_ok),
                far_pairs_ok_rate: rate(|r| r.far_pairs_ok),
                close_pairs_ok_rate: rate(|r| r.close_pairs_ok),
                violations: Estimate::from_samples(
                    &idx.iter().map(|&i| rows[i].1.violations.len() as f64).collect::<Vec<_>>(),
                ),
            }
        })
        .collect();
    Ok(ExperimentOutput { csv, summary: summary(config, Vec::new(), local, Vec::new()) })
}

/// Regimes whose formulas need only `ω²`, `δ` and the ambient dimension.
const TABLE_REGIMES: [Regime; 6] = [
    Regime::SubspaceGlobal,
    Regime::ArbitraryGlobal,
    Regime::SubspaceLocal,
    Regime::ArbitraryLocal,
    Regime::SketchedGaussian,
    Regime::SketchedFjlt,
];

fn complexity_table(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let seed = config.seeds[0];
    let widths = config
        .dims
        .iter()
        .map(|&d| {
            let w = gaussian_width(&SetDescriptor::subspace(config.n, d), config.width_trials, cloud_seed(seed, d))?;
            Ok(w.estimate * w.estimate)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut rows = Vec::new();
    for (&d, &omega_sq) in config.dims.iter().zip(&widths) {
        for regime in TABLE_REGIMES {
            for &delta in &config.deltas {
                let mut q = ComplexityQuery::new(regime, omega_sq, delta);
                q.ambient_dim = Some(config.n.max(2));
                let m_required = required_samples(&q)?;
                rows.push(ComplexityRow { regime, n: config.n, d, omega_sq, delta, m_required });
            }
        }
    }
    let mut csv = String::from(config.name.csv_header());
    csv.push('\n');
    for r in &rows {
        csv.push_str(&format!("{},{},{},{},{},{}\n", r.regime, r.n, r.d, r.omega_sq, r.delta, r.m_required));
    }
    Ok(ExperimentOutput { csv, summary: summary(config, Vec::new(), Vec::new(), rows) })
}

fn summary(
    config: &ExperimentConfig,
    distortion: Vec<DistortionCell>,
    local: Vec<LocalCell>,
    complexity: Vec<ComplexityRow>,
) -> Summary {
    let mut config = config.clone();
    config.output_path = None;
    Summary { schema: SCHEMA_VERSION, experiment: config.name, config, distortion, local, complexity }
}
