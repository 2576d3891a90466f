//! Random linear maps `A: R^n → R^m` and the sign embedding `x ↦ sgn(Ax)`.
//!
//! Five ensembles are available:
//!
//! | kind | map | cost per vector |
//! |------|-----|-----------------|
//! | dense Gaussian | i.i.d. `N(0,1)` matrix | `O(mn)` |
//! | sparse Gaussian | entries 0 w.p. 2/3, else `N(0,3)` | `O(mn)` |
//! | FJLT | `S·H·R` | `O(n log n)` |
//! | sketched binary | `B·F`, `B` dense Gaussian `m × m_lin`, `F` an FJLT or a Gaussian scaled by `1/√m_lin` | `O(n log n + m·m_lin)` or `O(m_lin·n + m·m_lin)` |
//! | fast binary | `S·H·G·H·R` | `O(n log n)` |
//!
//! `S` samples rows without replacement, `H` is the normalized Hadamard
//! transform (symmetric, so it also stands for `H*`), `R` a Rademacher
//! diagonal and `G` a standard normal diagonal.

mod code;

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use code::{read_codes, write_codes, BinaryCode, MAGIC};

use crate::error::{check_dim, param, Error, Result};
use crate::rng::{self, tag};
use crate::transforms::{fwht_in_place, hadamard_rows, sample_rows, DiagonalGaussian, DiagonalSign, HadamardPlan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    DenseGaussian,
    SparseGaussian,
    Fjlt,
    /// Sketched binary embedding with an FJLT first stage.
    SketchedFjlt,
    /// Sketched binary embedding with a normalized Gaussian first stage.
    SketchedGaussian,
    FastBinary,
    /// A user-supplied matrix, taken as already normalized.
    Explicit,
}

impl OperatorKind {
    pub const BUILDABLE: [OperatorKind; 6] = [
        Self::DenseGaussian,
        Self::SparseGaussian,
        Self::Fjlt,
        Self::SketchedFjlt,
        Self::SketchedGaussian,
        Self::FastBinary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::DenseGaussian => "dense_gaussian",
            Self::SparseGaussian => "sparse_gaussian",
            Self::Fjlt => "fjlt",
            Self::SketchedFjlt => "sketched_fjlt",
            Self::SketchedGaussian => "sketched_gaussian",
            Self::FastBinary => "fast_binary",
            Self::Explicit => "explicit",
        }
    }

    pub fn needs_m_lin(self) -> bool {
        matches!(self, Self::SketchedFjlt | Self::SketchedGaussian)
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_");
        Self::BUILDABLE
            .into_iter()
            .chain([Self::Explicit])
            .find(|k| k.name() == norm)
            .ok_or_else(|| param(format!("unknown operator kind '{s}'")))
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
struct Dense {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Dense {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.data.chunks_exact(self.cols).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }
}

/// `S·H·R`.
#[derive(Clone, Debug, PartialEq)]
struct Fjlt {
    plan: HadamardPlan,
    signs: DiagonalSign,
    rows: Vec<usize>,
}

impl Fjlt {
    fn build(m: usize, n: usize, seed: u64) -> Result<Self> {
        let plan = HadamardPlan::new(n)?;
        Ok(Self { plan, signs: DiagonalSign::new(n, seed), rows: sample_rows(plan.n_padded(), m, seed)? })
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut buf = self.signs.apply_padded(x, &self.plan)?;
        hadamard_rows(&mut buf, &self.rows)
    }
}

/// `S·H·G·H·R`.
#[derive(Clone, Debug, PartialEq)]
struct FastMap {
    plan: HadamardPlan,
    signs: DiagonalSign,
    gauss: DiagonalGaussian,
    rows: Vec<usize>,
}

impl FastMap {
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut buf = self.signs.apply_padded(x, &self.plan)?;
        fwht_in_place(&mut buf);
        buf.iter_mut().zip(self.gauss.values()).for_each(|(v, g)| *v *= g);
        hadamard_rows(&mut buf, &self.rows)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum LinearMap {
    Dense(Dense),
    Fjlt(Fjlt),
    Sketched { binary: Dense, sketch: Box<LinearMap> },
    Fast(FastMap),
}

impl LinearMap {
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Dense(a) => Ok(a.apply(x)),
            Self::Fjlt(f) => f.apply(x),
            Self::Sketched { binary, sketch } => Ok(binary.apply(&sketch.apply(x)?)),
            Self::Fast(f) => f.apply(x),
        }
    }
}

/// An immutable random operator `R^n → R^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingOperator {
    kind: OperatorKind,
    m: usize,
    n: usize,
    seed: u64,
    m_lin: Option<usize>,
    /// Factor `c` with `E‖c·Ax‖² = ‖x‖²`.
    scale: f64,
    map: LinearMap,
}

impl EmbeddingOperator {
    /// Draws an operator of the given kind. Deterministic in all arguments.
    ///
    /// For [`OperatorKind::Fjlt`] the output dimension `m` is the sketch
    /// size. The Hadamard-based kinds need `m` (or `m_lin`) no larger than
    /// `n` rounded up to a power of two.
    pub fn build(kind: OperatorKind, m: usize, n: usize, seed: u64, m_lin: Option<usize>) -> Result<Self> {
        if m < 1 || n < 1 {
            return Err(param(format!("operator needs m, n >= 1, got m={m}, n={n}")));
        }
        let inv_sqrt_m = 1.0 / (m as f64).sqrt();
        let (map, scale, m_lin) = match kind {
            OperatorKind::DenseGaussian => (LinearMap::Dense(gaussian_dense(m, n, seed, 1.0)), inv_sqrt_m, None),
            OperatorKind::SparseGaussian => {
                // The dense draw for the same seed, thinned: sparse and dense
                // operators built from one seed share their Gaussian entries.
                let mut dense = gaussian_dense(m, n, seed, 1.0);
                let mut mask = rng::stream(seed, tag::MASK);
                let sd = 3f64.sqrt();
                for v in &mut dense.data {
                    *v = if mask.random_bool(1.0 / 3.0) { sd * *v } else { 0.0 };
                }
                (LinearMap::Dense(dense), inv_sqrt_m, None)
            }
            OperatorKind::Fjlt => (LinearMap::Fjlt(Fjlt::build(m, n, seed)?), 1.0, None),
            OperatorKind::SketchedFjlt | OperatorKind::SketchedGaussian => {
                let m_lin =
                    m_lin.filter(|&k| k >= 1).ok_or_else(|| param(format!("{kind} needs a sketch size m_lin >= 1")))?;
                let sketch_seed = rng::derive(seed, &[tag::SKETCH]);
                let sketch = if kind == OperatorKind::SketchedFjlt {
                    LinearMap::Fjlt(Fjlt::build(m_lin, n, sketch_seed)?)
                } else {
                    LinearMap::Dense(gaussian_dense(m_lin, n, sketch_seed, 1.0 / (m_lin as f64).sqrt()))
                };
                let binary = gaussian_dense(m, m_lin, seed, 1.0);
                (LinearMap::Sketched { binary, sketch: Box::new(sketch) }, inv_sqrt_m, Some(m_lin))
            }
            OperatorKind::FastBinary => {
                let plan = HadamardPlan::new(n)?;
                let map = FastMap {
                    plan,
                    signs: DiagonalSign::new(n, seed),
                    gauss: DiagonalGaussian::new(plan.n_padded(), seed),
                    rows: sample_rows(plan.n_padded(), m, seed)?,
                };
                (LinearMap::Fast(map), 1.0, None)
            }
            OperatorKind::Explicit => return Err(param("explicit operators are built with from_rows")),
        };
        Ok(Self { kind, m, n, seed, m_lin, scale, map })
    }

    /// Operator with the given matrix rows. Its linear output is used as is,
    /// without the `1/√m` normalization of the Gaussian ensembles.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(param("explicit operator needs a nonempty matrix"));
        }
        let mut data = Vec::with_capacity(m * n);
        for r in &rows {
            check_dim(n, r.len())?;
            data.extend_from_slice(r);
        }
        let map = LinearMap::Dense(Dense { rows: m, cols: n, data });
        Ok(Self { kind: OperatorKind::Explicit, m, n, seed: 0, m_lin: None, scale: 1.0, map })
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn m_lin(&self) -> Option<usize> {
        self.m_lin
    }

    /// Factor that turns [`apply_linear`](Self::apply_linear) into a map
    /// preserving squared norms in expectation: `1/√m` for the Gaussian
    /// ensembles, `1` for the pre-scaled Hadamard maps and explicit rows.
    pub fn isometry_scale(&self) -> f64 {
        self.scale
    }

    /// `Ax` before taking signs.
    pub fn apply_linear(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.n, x.len())?;
        self.map.apply(x)
    }

    /// `sgn(Ax)` with `sgn(0) = +1`.
    pub fn embed(&self, x: &[f64]) -> Result<BinaryCode> {
        check_dim(self.n, x.len())?;
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(BinaryCode::from_signs(&self.map.apply(x)?))
    }

    /// Embeds many vectors in parallel, keeping their order.
    pub fn embed_batch<V: AsRef<[f64]> + Sync>(&self, xs: &[V]) -> Result<Vec<BinaryCode>> {
        xs.par_iter().map(|x| self.embed(x.as_ref())).collect()
    }

    /// The first stage `Fx` of a sketched operator.
    pub fn sketch_image(&self, x: &[f64]) -> Option<Result<Vec<f64>>> {
        match &self.map {
            LinearMap::Sketched { sketch, .. } => Some(check_dim(self.n, x.len()).and_then(|_| sketch.apply(x))),
            _ => None,
        }
    }

    /// The Gaussian second stage `B` of a sketched operator, as a dense
    /// Gaussian operator on `R^{m_lin}`.
    pub fn binary_stage(&self) -> Option<EmbeddingOperator> {
        match &self.map {
            LinearMap::Sketched { binary, .. } => Some(EmbeddingOperator {
                kind: OperatorKind::DenseGaussian,
                m: binary.rows,
                n: binary.cols,
                seed: self.seed,
                m_lin: None,
                scale: 1.0 / (binary.rows as f64).sqrt(),
                map: LinearMap::Dense(binary.clone()),
            }),
            _ => None,
        }
    }
}

fn gaussian_dense(rows: usize, cols: usize, seed: u64, scale: f64) -> Dense {
    let mut rng = rng::stream(seed, tag::MATRIX);
    let data = (0..rows * cols).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
    Dense { rows, cols, data }
}
