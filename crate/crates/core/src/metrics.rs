//! Distances, distortion suprema over point clouds, local-embedding checks
//! and the chained sign statistics.
//!
//! Suprema over a set are approximated by the maximum over all unordered
//! pairs of a sampled cloud. Pair loops run in parallel; ties in the maximum
//! go to the lexicographically smallest pair so reports are reproducible.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embedders::{BinaryCode, EmbeddingOperator, OperatorKind};
use crate::error::{check_dim, param, Result};
use crate::sets::{dot, PointCloud, SetDescriptor};

/// `arccos(⟨x,y⟩)/π ∈ [0, 1]`.
pub fn angular_distance(x: &[f64], y: &[f64]) -> f64 {
    dot(x, y).clamp(-1.0, 1.0).acos() / PI
}

/// Number of positions where the codes differ.
pub fn hamming(a: &BinaryCode, b: &BinaryCode) -> Result<usize> {
    check_dim(a.len(), b.len())?;
    Ok(a.words().iter().zip(b.words()).map(|(u, v)| (u ^ v).count_ones() as usize).sum())
}

/// A maximum over pairs together with the pair attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMax {
    pub value: f64,
    pub pair: Option<(usize, usize)>,
}

impl PairMax {
    const EMPTY: PairMax = PairMax { value: 0.0, pair: None };

    fn offer(self, value: f64, pair: (usize, usize)) -> Self {
        self.merge(PairMax { value, pair: Some(pair) })
    }

    /// Larger value wins; equal values go to the smaller pair.
    fn merge(self, other: Self) -> Self {
        match (self.pair, other.pair) {
            (None, _) => other,
            (_, None) => self,
            (Some(a), Some(b)) => {
                if other.value > self.value || (other.value == self.value && b < a) {
                    other
                } else {
                    self
                }
            }
        }
    }
}

/// Worst-case distortions of one operator over one cloud.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub delta_bin: f64,
    pub delta_lin: f64,
    pub delta_nlin: f64,
    pub argmax_bin: Option<(usize, usize)>,
    pub argmax_lin: Option<(usize, usize)>,
    pub argmax_nlin: Option<(usize, usize)>,
    pub kind: OperatorKind,
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    pub set: SetDescriptor,
}

impl DistortionReport {
    pub const CSV_HEADER: &'static str = "set,kind,n,d,p,m,seed,delta_bin,delta_lin,delta_nlin";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.set.kind_name(),
            self.kind,
            self.n,
            self.set.dim_param(),
            self.p,
            self.m,
            self.seed,
            self.delta_bin,
            self.delta_lin,
            self.delta_nlin
        )
    }
}

/// Per-point data every pair statistic needs.
struct Images {
    codes: Vec<BinaryCode>,
    linear: Vec<Vec<f64>>,
}

fn images(cloud: &PointCloud, op: &EmbeddingOperator) -> Result<Images> {
    check_dim(op.n(), cloud.dim())?;
    let linear: Vec<Vec<f64>> = cloud.points().par_iter().map(|x| op.apply_linear(x)).collect::<Result<_>>()?;
    let codes = linear.iter().map(|v| BinaryCode::from_signs(v)).collect();
    Ok(Images { codes, linear })
}

#[derive(Clone, Copy)]
struct PairStats {
    bin: PairMax,
    lin: PairMax,
    nlin: PairMax,
}

fn pair_stats(cloud: &PointCloud, op: &EmbeddingOperator, img: &Images) -> PairStats {
    let pts = cloud.points();
    let p = pts.len();
    let m = op.m() as f64;
    let scale = op.isometry_scale();
    let empty = PairStats { bin: PairMax::EMPTY, lin: PairMax::EMPTY, nlin: PairMax::EMPTY };
    (0..p)
        .into_par_iter()
        .map(|i| {
            let mut acc = empty;
            for j in i + 1..p {
                let ang = angular_distance(&pts[i], &pts[j]);
                let ham = img.codes[i].words().iter().zip(img.codes[j].words());
                let ham = ham.map(|(u, v)| (u ^ v).count_ones()).sum::<u32>();
                acc.bin = acc.bin.offer((f64::from(ham) / m - ang).abs(), (i, j));

                let true_dist = crate::sets::dist(&pts[i], &pts[j]);
                let mapped = scale * crate::sets::dist(&img.linear[i], &img.linear[j]);
                let gap = (mapped - true_dist).abs();
                acc.lin = acc.lin.offer(gap, (i, j));
                let ratio = if true_dist > 0.0 { ang / true_dist } else { 0.0 };
                acc.nlin = acc.nlin.offer(ratio * gap, (i, j));
            }
            acc
        })
        .reduce(
            || empty,
            |a, b| PairStats { bin: a.bin.merge(b.bin), lin: a.lin.merge(b.lin), nlin: a.nlin.merge(b.nlin) },
        )
}

/// `δ_bin = max_{pairs} |ham(sgn Ax, sgn Ay)/m − ang(x, y)|`.
pub fn binary_distortion(cloud: &PointCloud, op: &EmbeddingOperator) -> Result<PairMax> {
    let img = images(cloud, op)?;
    Ok(pair_stats(cloud, op, &img).bin)
}

/// `δ_lin = max_{pairs} |c‖Ax − Ay‖ − ‖x − y‖|` with `c` the operator's
/// isometry scale (`1/√m` for Gaussian matrices).
pub fn linear_distortion(cloud: &PointCloud, op: &EmbeddingOperator) -> Result<PairMax> {
    let img = images(cloud, op)?;
    Ok(pair_stats(cloud, op, &img).lin)
}

/// `δ_n-lin`: the linear gap of each pair weighted by `ang(x,y)/‖x − y‖`
/// before taking the maximum. Identical points contribute zero.
pub fn normalized_linear_distortion(cloud: &PointCloud, op: &EmbeddingOperator) -> Result<PairMax> {
    let img = images(cloud, op)?;
    Ok(pair_stats(cloud, op, &img).nlin)
}

/// All three distortions in a single pass over the pairs.
pub fn distortion_report(cloud: &PointCloud, op: &EmbeddingOperator, seed: u64) -> Result<DistortionReport> {
    let img = images(cloud, op)?;
    let s = pair_stats(cloud, op, &img);
    Ok(DistortionReport {
        delta_bin: s.bin.value,
        delta_lin: s.lin.value,
        delta_nlin: s.nlin.value,
        argmax_bin: s.bin.pair,
        argmax_lin: s.lin.pair,
        argmax_nlin: s.nlin.pair,
        kind: op.kind(),
        m: op.m(),
        n: op.n(),
        p: cloud.len(),
        seed,
        set: cloud.source().clone(),
    })
}

/// Constants of the local embedding check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalCheckConfig {
    /// `c` in the closeness radius `ε = c·δ/√ln(1/δ)`.
    pub eps_scale: f64,
    /// Pairs whose normalized Hamming distance is at most
    /// `separation·δ` must have angular distance at most `δ`.
    pub separation: f64,
}

impl Default for LocalCheckConfig {
    fn default() -> Self {
        Self { eps_scale: 1.0, separation: 1.0 / 32.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalRule {
    /// `ang ≤ ε` but `ham/m > δ`.
    CloseSplit,
    /// `ham/m ≤ separation·δ` but `ang > δ`.
    FarMerged,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalViolation {
    pub i: usize,
    pub j: usize,
    pub rule: LocalRule,
    pub angular: f64,
    pub hamming_frac: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalCheck {
    pub delta: f64,
    pub eps: f64,
    /// No pair with small Hamming distance is far apart in angle.
    pub far_pairs_ok: bool,
    /// No pair close in angle is split far apart by the code.
    pub close_pairs_ok: bool,
    pub violations: Vec<LocalViolation>,
}

/// Checks both local-embedding implications over every pair of the cloud.
pub fn local_check(
    cloud: &PointCloud,
    op: &EmbeddingOperator,
    delta: f64,
    config: LocalCheckConfig,
) -> Result<LocalCheck> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(param(format!("delta must lie in (0, 1), got {delta}")));
    }
    let eps = config.eps_scale * delta / (1.0 / delta).ln().sqrt();
    let img = images(cloud, op)?;
    let pts = cloud.points();
    let m = op.m() as f64;
    let violations: Vec<LocalViolation> = (0..pts.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let (pts, img) = (&pts, &img);
            (i + 1..pts.len()).filter_map(move |j| {
                let angular = angular_distance(&pts[i], &pts[j]);
                let hamming_frac = hamming(&img.codes[i], &img.codes[j]).ok()? as f64 / m;
                let rule = if angular <= eps && hamming_frac > delta {
                    LocalRule::CloseSplit
                } else if hamming_frac <= config.separation * delta && angular > delta {
                    LocalRule::FarMerged
                } else {
                    return None;
                };
                Some(LocalViolation { i, j, rule, angular, hamming_frac })
            })
        })
        .collect();
    Ok(LocalCheck {
        delta,
        eps,
        far_pairs_ok: violations.iter().all(|v| v.rule != LocalRule::FarMerged),
        close_pairs_ok: violations.iter().all(|v| v.rule != LocalRule::CloseSplit),
        violations,
    })
}

/// The chained statistics with `s(v) = sgn(Av) ∈ {±1}^m`:
///
/// * `d2 = ‖s(x) − s(y)‖² / 4`
/// * `d3 = ⟨s(x) − s(y), s(y) − s(z)⟩ / 4`
/// * `d4 = ⟨s(x) − s(y), s(z) − s(w)⟩ / 4`
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainedStats {
    pub d2: i64,
    pub d3: i64,
    pub d4: i64,
}

pub fn chained_stats(x: &[f64], y: &[f64], z: &[f64], w: &[f64], op: &EmbeddingOperator) -> Result<ChainedStats> {
    let [cx, cy, cz, cw] = [x, y, z, w].map(|v| op.embed(v));
    let (cx, cy, cz, cw) = (cx?, cy?, cz?, cw?);
    Ok(ChainedStats {
        d2: quarter_inner(&cx, &cy, &cx, &cy)?,
        d3: quarter_inner(&cx, &cy, &cy, &cz)?,
        d4: quarter_inner(&cx, &cy, &cz, &cw)?,
    })
}

/// `⟨s(a) − s(b), s(c) − s(d)⟩ / 4` on bit-packed codes. Row `i`
/// contributes `±1` when `a, b` differ and `c, d` differ there (sign `+`
/// when `a` and `c` agree), and `0` otherwise.
pub fn quarter_inner(a: &BinaryCode, b: &BinaryCode, c: &BinaryCode, d: &BinaryCode) -> Result<i64> {
    for other in [b, c, d] {
        check_dim(a.len(), other.len())?;
    }
    let mut total = 0i64;
    for k in 0..a.words().len() {
        let (wa, wb, wc, wd) = (a.words()[k], b.words()[k], c.words()[k], d.words()[k]);
        let active = (wa ^ wb) & (wc ^ wd);
        let agree = active & !(wa ^ wc);
        total += i64::from(agree.count_ones()) - i64::from((active & !agree).count_ones());
    }
    Ok(total)
}

/// Row-wise summands of [`quarter_inner`], each in `{−1, 0, 1}`.
pub fn quarter_inner_terms(a: &BinaryCode, b: &BinaryCode, c: &BinaryCode, d: &BinaryCode) -> Result<Vec<i8>> {
    for other in [b, c, d] {
        check_dim(a.len(), other.len())?;
    }
    Ok((0..a.len())
        .map(|i| {
            if a.bit(i) == b.bit(i) || c.bit(i) == d.bit(i) {
                0
            } else if a.bit(i) == c.bit(i) {
                1
            } else {
                -1
            }
        })
        .collect())
}
