//! Structured subsets of the unit sphere.
//!
//! A [`SetDescriptor`] names a set `K ⊂ S^{n-1}` (finite list, subspace,
//! sparse vectors, low-rank matrices, group-sparse vectors). From it we can
//! draw finite [`PointCloud`] proxies and estimate the Gaussian width
//! `ω(K) = E sup_{v∈K} gᵀv` using the exact per-draw supremum of each kind.

use std::ops::Deref;

use nalgebra::DMatrix;
use rand::seq::index;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, param, Error, Result};
use crate::rng::{self, tag, Rng};

/// Tolerance for unit norm, orthonormality and membership predicates.
pub const TOL: f64 = 1e-9;

/// A point on the unit sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Wraps `coords`, which must already have unit norm.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let norm = l2(&coords);
        if (norm - 1.0).abs() >= TOL {
            return Err(param(format!("vector norm {norm} is not 1")));
        }
        Ok(Self(coords))
    }

    /// Rescales `coords` onto the sphere.
    pub fn normalize(mut coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(param("vector has non-finite coordinates"));
        }
        let norm = l2(&coords);
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        coords.iter_mut().for_each(|c| *c /= norm);
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for UnitVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for UnitVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(v: UnitVector) -> Self {
        v.0
    }
}

/// Which structured set to work with.
///
/// Serialized as a JSON object tagged by `kind`, e.g.
/// `{"kind": "subspace", "n": 128, "d": 3}`. Group indices are 0-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetDescriptor {
    /// An explicit list of points. They are rescaled onto the sphere.
    Finite { points: Vec<Vec<f64>> },
    /// The unit sphere of a `d`-dimensional subspace of `R^n`.
    ///
    /// `basis` holds `d` orthonormal vectors of length `n`. When absent, a
    /// uniformly random basis is drawn from the seed of whatever operation
    /// consumes the descriptor (see [`SetDescriptor::resolve`]).
    Subspace {
        n: usize,
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        basis: Option<Vec<Vec<f64>>>,
    },
    /// Unit vectors with at most `s` nonzeros.
    Sparse { n: usize, s: usize },
    /// Unit-Frobenius `n1 × n2` matrices of rank at most `d`, flattened
    /// row-major into `R^{n1·n2}`.
    LowRank { n1: usize, n2: usize, d: usize },
    /// Unit vectors supported on the union of at most `d` of the `groups`.
    GroupSparse { n: usize, groups: Vec<Vec<usize>>, d: usize },
}

impl SetDescriptor {
    pub fn subspace(n: usize, d: usize) -> Self {
        Self::Subspace { n, d, basis: None }
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Self::Finite { points } => points.first().map_or(0, Vec::len),
            Self::Subspace { n, .. } | Self::Sparse { n, .. } | Self::GroupSparse { n, .. } => *n,
            Self::LowRank { n1, n2, .. } => n1 * n2,
        }
    }

    /// Short name used in CSV output.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Finite { .. } => "finite",
            Self::Subspace { .. } => "subspace",
            Self::Sparse { .. } => "sparse",
            Self::LowRank { .. } => "low_rank",
            Self::GroupSparse { .. } => "group_sparse",
        }
    }

    /// The size parameter of the set: subspace dimension, sparsity, rank,
    /// number of active groups, or number of points.
    pub fn dim_param(&self) -> usize {
        match self {
            Self::Finite { points } => points.len(),
            Self::Subspace { d, .. } | Self::LowRank { d, .. } | Self::GroupSparse { d, .. } => *d,
            Self::Sparse { s, .. } => *s,
        }
    }

    /// Largest group size `l` of a group-sparse model (1 for plain sparsity).
    pub fn max_group_size(&self) -> Option<usize> {
        match self {
            Self::GroupSparse { groups, .. } => groups.iter().map(Vec::len).max(),
            Self::Sparse { .. } => Some(1),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Finite { points } => {
                let n = self.ambient_dim();
                if points.is_empty() || n == 0 {
                    return Err(param("finite set needs at least one nonempty point"));
                }
                for p in points {
                    check_dim(n, p.len())?;
                    if p.iter().any(|c| !c.is_finite()) {
                        return Err(param("finite set point has non-finite coordinates"));
                    }
                    if l2(p) == 0.0 {
                        return Err(Error::ZeroVector);
                    }
                }
            }
            Self::Subspace { n, d, basis } => {
                if *d < 1 || d > n {
                    return Err(param(format!("subspace needs 1 <= d <= n, got d={d}, n={n}")));
                }
                if let Some(b) = basis {
                    check_orthonormal(b, *n, *d)?;
                }
            }
            Self::Sparse { n, s } => {
                if *s < 1 || s > n {
                    return Err(param(format!("sparse set needs 1 <= s <= n, got s={s}, n={n}")));
                }
            }
            Self::LowRank { n1, n2, d } => {
                if *n1 < 1 || *n2 < 1 || *d < 1 || *d > (*n1).min(*n2) {
                    return Err(param(format!(
                        "low-rank set needs 1 <= d <= min(n1, n2), got d={d}, n1={n1}, n2={n2}"
                    )));
                }
            }
            Self::GroupSparse { n, groups, d } => {
                if *n < 1 || groups.is_empty() {
                    return Err(param("group-sparse set needs n >= 1 and at least one group"));
                }
                if *d < 1 || *d > groups.len() {
                    return Err(param(format!(
                        "group-sparse set needs 1 <= d <= #groups, got d={d}, #groups={}",
                        groups.len()
                    )));
                }
                for g in groups {
                    if g.is_empty() {
                        return Err(param("empty group"));
                    }
                    if let Some(&bad) = g.iter().find(|&&i| i >= *n) {
                        return Err(param(format!("group index {bad} out of range for n={n}")));
                    }
                    let mut sorted = g.clone();
                    sorted.sort_unstable();
                    if sorted.windows(2).any(|w| w[0] == w[1]) {
                        return Err(param("group lists an index twice"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Validates and fills in anything left to chance, currently only a
    /// missing subspace basis, which is drawn uniformly from `seed`.
    pub fn resolve(&self, seed: u64) -> Result<Self> {
        self.validate()?;
        match self {
            Self::Subspace { n, d, basis: None } => Ok(Self::Subspace {
                n: *n,
                d: *d,
                basis: Some(random_orthonormal(*n, *d, &mut rng::stream(seed, tag::BASIS))),
            }),
            other => Ok(other.clone()),
        }
    }

    /// Membership predicate of the set for a unit vector, up to [`TOL`].
    ///
    /// Subspace descriptors must carry a basis.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        check_dim(self.ambient_dim(), x.len())?;
        if (l2(x) - 1.0).abs() >= TOL {
            return Ok(false);
        }
        Ok(match self {
            Self::Finite { points } => points.iter().any(|p| {
                let norm = l2(p);
                p.iter().zip(x).all(|(a, b)| (a / norm - b).abs() < TOL)
            }),
            Self::Subspace { basis: None, .. } => {
                return Err(param("subspace basis not resolved"));
            }
            Self::Subspace { basis: Some(b), .. } => {
                let mut residual = x.to_vec();
                for col in b {
                    let c = dot(col, x);
                    residual.iter_mut().zip(col).for_each(|(r, v)| *r -= c * v);
                }
                l2(&residual) < TOL
            }
            Self::Sparse { s, .. } => x.iter().filter(|c| c.abs() > TOL).count() <= *s,
            Self::LowRank { n1, n2, d } => {
                let sv = singular_values(x, *n1, *n2);
                sv.iter().skip(*d).all(|&v| v < TOL)
            }
            Self::GroupSparse { groups, d, .. } => {
                let support: Vec<usize> = (0..x.len()).filter(|&i| x[i].abs() > TOL).collect();
                coverable(&support, groups, *d)
            }
        })
    }
}

/// Finite proxy of a set: `p` points sampled on the sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<UnitVector>,
    source: SetDescriptor,
    seed: u64,
}

impl PointCloud {
    /// Builds a cloud, checking that every point belongs to `source`.
    pub fn new(points: Vec<UnitVector>, source: SetDescriptor, seed: u64) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !source.contains(p)? {
                return Err(param(format!("point {i} does not belong to the {} set", source.kind_name())));
            }
        }
        Ok(Self { points, source, seed })
    }

    /// A cloud made of the given vectors, rescaled onto the sphere. Its
    /// source is the finite set of those vectors.
    pub fn from_vectors(vectors: Vec<Vec<f64>>) -> Result<Self> {
        let source = SetDescriptor::Finite { points: vectors.clone() };
        source.validate()?;
        let points = vectors.into_iter().map(UnitVector::normalize).collect::<Result<_>>()?;
        Ok(Self { points, source, seed: 0 })
    }

    pub fn points(&self) -> &[UnitVector] {
        &self.points
    }

    pub fn source(&self) -> &SetDescriptor {
        &self.source
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.source.ambient_dim()
    }
}

/// Draws `p` points from the set described by `desc`.
///
/// Recipes: subspace points are Gaussian combinations of the basis; sparse
/// points have a uniformly chosen support of size `s`; low-rank points are
/// products of `n1×d` and `d×n2` Gaussian factors; group-sparse points fill
/// `d` uniformly chosen groups. All entries are standard normal before the
/// final normalization. The returned cloud carries the resolved descriptor.
pub fn sample_points(desc: &SetDescriptor, p: usize, seed: u64) -> Result<PointCloud> {
    if p < 1 {
        return Err(param("need at least one point"));
    }
    let source = desc.resolve(seed)?;
    let mut rng = rng::stream(seed, tag::POINTS);
    let n = source.ambient_dim();
    let mut points = Vec::with_capacity(p);
    while points.len() < p {
        let raw = match &source {
            SetDescriptor::Finite { points } => points[rng.random_range(0..points.len())].clone(),
            SetDescriptor::Subspace { basis: Some(b), .. } => {
                let mut x = vec![0.0; n];
                for col in b {
                    let c: f64 = rng.sample(StandardNormal);
                    x.iter_mut().zip(col).for_each(|(xi, v)| *xi += c * v);
                }
                x
            }
            SetDescriptor::Subspace { basis: None, .. } => unreachable!("resolved above"),
            SetDescriptor::Sparse { s, .. } => {
                let mut x = vec![0.0; n];
                for i in index::sample(&mut rng, n, *s) {
                    x[i] = rng.sample(StandardNormal);
                }
                x
            }
            SetDescriptor::LowRank { n1, n2, d } => {
                let u = gaussian_matrix(*n1, *d, &mut rng);
                let v = gaussian_matrix(*d, *n2, &mut rng);
                (u * v).transpose().as_slice().to_vec()
            }
            SetDescriptor::GroupSparse { groups, d, .. } => {
                let mut x = vec![0.0; n];
                for g in index::sample(&mut rng, groups.len(), *d) {
                    for &i in &groups[g] {
                        if x[i] == 0.0 {
                            x[i] = rng.sample(StandardNormal);
                        }
                    }
                }
                x
            }
        };
        // Exact zeros only arise with probability zero; draw again if so.
        if let Ok(u) = UnitVector::normalize(raw) {
            points.push(u);
        }
    }
    Ok(PointCloud { points, source, seed })
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: usize,
}

impl Estimate {
    /// Mean and standard error of the mean. A single sample has zero error.
    pub fn from_samples(samples: &[f64]) -> Self {
        let k = samples.len();
        let mean = samples.iter().sum::<f64>() / k as f64;
        let std_error = if k > 1 {
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        } else {
            0.0
        };
        Self { estimate: mean, std_error, trials: k }
    }
}

/// Gaussian width `E sup_{v∈K} gᵀv` by Monte Carlo over `trials` draws.
///
/// Each draw evaluates the exact supremum for the kind: the best point of a
/// finite set, `‖Pg‖` for a subspace, the root of the `s` largest `g_i²` for
/// sparse vectors, the root of the `d` largest squared singular values for
/// low-rank matrices, and the root of the `d` largest squared group norms
/// for group sparsity (exact for disjoint groups, an upper bound when
/// groups overlap).
pub fn gaussian_width(desc: &SetDescriptor, trials: usize, seed: u64) -> Result<Estimate> {
    if trials < 1 {
        return Err(param("need at least one trial"));
    }
    let set = desc.resolve(seed)?;
    let finite: Vec<UnitVector> = match &set {
        SetDescriptor::Finite { points } => points.iter().cloned().map(UnitVector::normalize).collect::<Result<_>>()?,
        _ => Vec::new(),
    };
    let n = set.ambient_dim();
    let samples: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let g = gaussian_vector(n, &mut rng::trial(seed, t));
            match &set {
                SetDescriptor::Finite { .. } => finite.iter().map(|v| dot(&g, v)).fold(f64::NEG_INFINITY, f64::max),
                SetDescriptor::Subspace { basis: Some(b), .. } => {
                    b.iter().map(|col| dot(col, &g).powi(2)).sum::<f64>().sqrt()
                }
                SetDescriptor::Subspace { basis: None, .. } => unreachable!("resolved above"),
                SetDescriptor::Sparse { s, .. } => top_sum(g.iter().map(|v| v * v).collect(), *s).sqrt(),
                SetDescriptor::LowRank { n1, n2, d } => {
                    let sv = singular_values(&g, *n1, *n2);
                    sv.iter().take(*d).map(|v| v * v).sum::<f64>().sqrt()
                }
                SetDescriptor::GroupSparse { groups, d, .. } => {
                    let norms = groups.iter().map(|grp| grp.iter().map(|&i| g[i] * g[i]).sum()).collect();
                    top_sum(norms, *d).sqrt()
                }
            }
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}

/// Gaussian width of the local set `{a − b : a, b ∈ cloud, ‖a − b‖ ≤ eps}`.
///
/// The local set always contains `0`, so each draw's supremum is at least
/// zero, and the estimate is exactly zero when no pair of distinct points is
/// within `eps`.
pub fn local_set_width(cloud: &PointCloud, eps: f64, trials: usize, seed: u64) -> Result<Estimate> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(param(format!("eps must be positive, got {eps}")));
    }
    if trials < 1 {
        return Err(param("need at least one trial"));
    }
    let pts = cloud.points();
    let mut pairs = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if dist(&pts[i], &pts[j]) <= eps {
                pairs.push((i, j));
            }
        }
    }
    if pairs.is_empty() {
        return Ok(Estimate { estimate: 0.0, std_error: 0.0, trials });
    }
    let n = cloud.dim();
    let samples: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let g = gaussian_vector(n, &mut rng::trial(seed, t));
            let proj: Vec<f64> = pts.iter().map(|p| dot(p, &g)).collect();
            pairs.iter().map(|&(i, j)| (proj[i] - proj[j]).abs()).fold(0.0, f64::max)
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}

/// Greedy `eps`-net of a cloud: indices of points such that every point of
/// the cloud lies within `eps` of one of them, and the chosen points are
/// pairwise more than `eps` apart.
pub fn greedy_net(cloud: &PointCloud, eps: f64) -> Vec<usize> {
    let pts = cloud.points();
    let mut net: Vec<usize> = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        if net.iter().all(|&c| dist(&pts[c], p) > eps) {
            net.push(i);
        }
    }
    net
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn l2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub(crate) fn gaussian_vector(n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Sum of the `k` largest entries.
fn top_sum(mut v: Vec<f64>, k: usize) -> f64 {
    if k < v.len() {
        v.select_nth_unstable_by(k, |a, b| b.total_cmp(a));
        v.truncate(k);
    }
    v.iter().sum()
}

/// Singular values, descending, of the row-major `n1 × n2` reshape of `x`.
fn singular_values(x: &[f64], n1: usize, n2: usize) -> Vec<f64> {
    let m = DMatrix::from_row_slice(n1, n2, x);
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn random_orthonormal(n: usize, d: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let q = gaussian_matrix(n, d, rng).qr().q();
    q.column_iter().map(|c| c.iter().copied().collect()).collect()
}

fn check_orthonormal(basis: &[Vec<f64>], n: usize, d: usize) -> Result<()> {
    check_dim(d, basis.len())?;
    for (i, a) in basis.iter().enumerate() {
        check_dim(n, a.len())?;
        for (j, b) in basis.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            if (dot(a, b) - target).abs() >= TOL {
                return Err(param(format!("basis vectors {i} and {j} are not orthonormal")));
            }
        }
    }
    Ok(())
}

/// Whether `support` is covered by at most `budget` of the groups. Exact
/// search: branch on the groups containing the first uncovered index.
fn coverable(support: &[usize], groups: &[Vec<usize>], budget: usize) -> bool {
    let Some(&first) = support.first() else {
        return true;
    };
    if budget == 0 {
        return false;
    }
    groups.iter().filter(|g| g.contains(&first)).any(|g| {
        let rest: Vec<usize> = support.iter().copied().filter(|i| !g.contains(i)).collect();
        coverable(&rest, groups, budget - 1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn one_dimensional_subspace_has_two_points() {
        let desc = SetDescriptor::Subspace { n: 4, d: 1, basis: Some(vec![e(4, 0)]) };
        for seed in 0..5 {
            let cloud = sample_points(&desc, 3, seed).unwrap();
            for p in cloud.points() {
                assert!(p[0] == 1.0 || p[0] == -1.0, "{p:?}");
                assert!(p[1..].iter().all(|&c| c == 0.0));
            }
        }
    }

    #[test]
    fn sparse_points_respect_support_size() {
        let cloud = sample_points(&SetDescriptor::Sparse { n: 128, s: 2 }, 200, 3).unwrap();
        assert_eq!(cloud.len(), 200);
        for p in cloud.points() {
            assert!(p.iter().filter(|&&c| c != 0.0).count() <= 2);
            assert!((l2(p) - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn every_kind_samples_members() {
        let descs = [
            SetDescriptor::Finite { points: vec![vec![3.0, 4.0], vec![0.0, -2.0]] },
            SetDescriptor::subspace(20, 4),
            SetDescriptor::Sparse { n: 30, s: 5 },
            SetDescriptor::LowRank { n1: 6, n2: 5, d: 2 },
            SetDescriptor::GroupSparse {
                n: 12,
                groups: vec![vec![0, 1, 2], vec![3, 4], vec![5, 6, 7], vec![8, 9, 10, 11]],
                d: 2,
            },
        ];
        for desc in &descs {
            let cloud = sample_points(desc, 25, 11).unwrap();
            for p in cloud.points() {
                assert!((l2(p) - 1.0).abs() < TOL);
                assert!(cloud.source().contains(p).unwrap(), "{} point not a member", desc.kind_name());
            }
        }
    }

    #[test]
    fn membership_rejects_outsiders() {
        let sparse = SetDescriptor::Sparse { n: 4, s: 1 };
        let half = std::f64::consts::FRAC_1_SQRT_2;
        assert!(!sparse.contains(&[half, half, 0.0, 0.0]).unwrap());
        let low = SetDescriptor::LowRank { n1: 2, n2: 2, d: 1 };
        assert!(!low.contains(&[half, 0.0, 0.0, half]).unwrap());
        assert!(low.contains(&[0.5, 0.5, 0.5, 0.5]).unwrap());
        let groups = SetDescriptor::GroupSparse { n: 4, groups: vec![vec![0, 1], vec![2], vec![3]], d: 1 };
        assert!(groups.contains(&[half, half, 0.0, 0.0]).unwrap());
        assert!(!groups.contains(&[half, 0.0, half, 0.0]).unwrap());
        let sub = SetDescriptor::Subspace { n: 3, d: 1, basis: Some(vec![e(3, 2)]) };
        assert!(!sub.contains(&e(3, 0)).unwrap());
        assert!(SetDescriptor::subspace(3, 1).contains(&e(3, 0)).is_err());
    }

    #[test]
    fn invalid_descriptors_are_rejected() {
        let bad = [
            SetDescriptor::Sparse { n: 4, s: 5 },
            SetDescriptor::Sparse { n: 4, s: 0 },
            SetDescriptor::subspace(3, 4),
            SetDescriptor::LowRank { n1: 2, n2: 3, d: 3 },
            SetDescriptor::GroupSparse { n: 3, groups: vec![vec![0, 3]], d: 1 },
            SetDescriptor::GroupSparse { n: 3, groups: vec![vec![0]], d: 2 },
            SetDescriptor::Subspace { n: 2, d: 2, basis: Some(vec![vec![1.0, 0.0], vec![1.0, 0.0]]) },
            SetDescriptor::Finite { points: vec![] },
            SetDescriptor::Finite { points: vec![vec![0.0, 0.0]] },
        ];
        for desc in &bad {
            assert!(sample_points(desc, 1, 0).is_err(), "{desc:?} accepted");
        }
        assert!(sample_points(&SetDescriptor::Sparse { n: 4, s: 1 }, 0, 0).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let desc = SetDescriptor::subspace(128, 3);
        let a = sample_points(&desc, 200, 7).unwrap();
        let b = sample_points(&desc, 200, 7).unwrap();
        let c = sample_points(&desc, 200, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        // Pairwise angles spread over (0, 1).
        let angles: Vec<f64> = (1..200)
            .map(|j| dot(&a.points()[0], &a.points()[j]).clamp(-1.0, 1.0).acos() / std::f64::consts::PI)
            .collect();
        let lo = angles.iter().cloned().fold(1.0, f64::min);
        let hi = angles.iter().cloned().fold(0.0, f64::max);
        assert!(lo > 0.0 && lo < 0.1 && hi > 0.9 && hi < 1.0, "{lo} {hi}");
    }

    #[test]
    fn descriptor_json_shape() {
        let d: SetDescriptor = serde_json::from_str(r#"{"kind":"subspace","n":128,"d":3}"#).unwrap();
        assert_eq!(d, SetDescriptor::subspace(128, 3));
        assert_eq!(serde_json::to_string(&d).unwrap(), r#"{"kind":"subspace","n":128,"d":3}"#);
        let f: SetDescriptor = serde_json::from_str(r#"{"kind":"finite","points":[[1.0,0.0]]}"#).unwrap();
        assert_eq!(f.ambient_dim(), 2);
        let g: SetDescriptor =
            serde_json::from_str(r#"{"kind":"group_sparse","n":4,"groups":[[0,1],[2,3]],"d":1}"#).unwrap();
        assert_eq!(g.max_group_size(), Some(2));
        assert!(serde_json::from_str::<UnitVector>("[1.0, 1.0]").is_err());
    }

    #[test]
    fn width_of_single_point_is_centered() {
        let desc = SetDescriptor::Finite { points: vec![e(5, 0)] };
        let w = gaussian_width(&desc, 20_000, 4).unwrap();
        assert!(w.estimate.abs() < 4.0 * w.std_error, "{w:?}");
        assert!((w.std_error * (20_000f64).sqrt() - 1.0).abs() < 0.05);
    }

    #[test]
    fn width_of_two_coordinates_matches_folded_normal_max() {
        // E max(|g1|, |g2|) = 2/sqrt(pi); see the quadrature check below.
        let w = gaussian_width(&SetDescriptor::Sparse { n: 2, s: 1 }, 1_000_000, 9).unwrap();
        let exact = 2.0 / std::f64::consts::PI.sqrt();
        assert!((w.estimate - exact).abs() < 3.0 * w.std_error, "{w:?} vs {exact}");
    }

    #[test]
    fn folded_normal_max_by_quadrature() {
        // E max(|g1|,|g2|) = ∫ 2 t φ_|g|(t) F_|g|(t) dt with φ_|g| = 2φ.
        let h = 1e-4;
        let mut total = 0.0;
        let mut cdf = 0.0;
        let pdf = |t: f64| 2.0 * (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut t = 0.0;
        while t < 12.0 {
            let mid = t + h / 2.0;
            let mass = pdf(mid) * h;
            total += mid * 2.0 * pdf(mid) * (cdf + mass / 2.0) * h;
            cdf += mass;
            t += h;
        }
        assert!((total - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-6, "{total}");
    }

    #[test]
    fn subspace_width_is_near_root_dimension() {
        let w = gaussian_width(&SetDescriptor::subspace(128, 9), 10_000, 1).unwrap();
        assert!(w.estimate > 8f64.sqrt() - 3.0 * w.std_error && w.estimate < 3.0 + 3.0 * w.std_error, "{w:?}");
    }

    #[test]
    fn width_closed_forms_agree_with_dense_clouds() {
        // Sup over a large sampled cloud never exceeds the exact supremum.
        for desc in [
            SetDescriptor::Sparse { n: 6, s: 2 },
            SetDescriptor::LowRank { n1: 3, n2: 3, d: 1 },
            SetDescriptor::GroupSparse { n: 6, groups: vec![vec![0, 1], vec![2, 3], vec![4, 5]], d: 1 },
        ] {
            let exact = gaussian_width(&desc, 400, 5).unwrap().estimate;
            let cloud = sample_points(&desc, 4000, 6).unwrap();
            let pts: Vec<Vec<f64>> = cloud.points().iter().map(|p| p.to_vec()).collect();
            let approx = gaussian_width(&SetDescriptor::Finite { points: pts }, 400, 5).unwrap().estimate;
            assert!(approx <= exact + 1e-9, "{} {approx} > {exact}", desc.kind_name());
            assert!(approx > 0.8 * exact, "{} {approx} vs {exact}", desc.kind_name());
        }
    }

    #[test]
    fn finite_width_grows_with_the_set() {
        let small = SetDescriptor::Finite { points: vec![e(4, 0), e(4, 1)] };
        let big = SetDescriptor::Finite { points: vec![e(4, 0), e(4, 1), e(4, 2)] };
        let a = gaussian_width(&small, 500, 2).unwrap().estimate;
        let b = gaussian_width(&big, 500, 2).unwrap().estimate;
        assert!(b >= a);
    }

    #[test]
    fn local_width_of_two_axes() {
        let cloud = PointCloud::from_vectors(vec![e(3, 0), e(3, 1)]).unwrap();
        let w = local_set_width(&cloud, 2.0, 200_000, 3).unwrap();
        let exact = 2.0 / std::f64::consts::PI.sqrt();
        assert!((w.estimate - exact).abs() < 3.0 * w.std_error, "{w:?}");
        let empty = local_set_width(&cloud, 1.0, 100, 3).unwrap();
        assert_eq!(empty.estimate, 0.0);
        assert!(local_set_width(&cloud, 0.0, 10, 3).is_err());
    }

    #[test]
    fn local_width_monotone_and_bounded() {
        let cloud = sample_points(&SetDescriptor::subspace(16, 3), 60, 4).unwrap();
        let pts: Vec<Vec<f64>> = cloud.points().iter().map(|p| p.to_vec()).collect();
        let global = gaussian_width(&SetDescriptor::Finite { points: pts }, 4000, 8).unwrap();
        let mut last = 0.0;
        for eps in [0.1, 0.3, 0.6, 1.0, 1.5, 2.0] {
            let w = local_set_width(&cloud, eps, 4000, 8).unwrap();
            assert!(w.estimate >= last);
            assert!(w.estimate <= 2.0 * global.estimate + 3.0 * (w.std_error + 2.0 * global.std_error));
            last = w.estimate;
        }
    }

    #[test]
    fn greedy_net_covers_and_separates() {
        let cloud = sample_points(&SetDescriptor::subspace(8, 2), 300, 1).unwrap();
        let net = greedy_net(&cloud, 0.3);
        let pts = cloud.points();
        for p in pts {
            assert!(net.iter().any(|&c| dist(&pts[c], p) <= 0.3));
        }
        for (a, &i) in net.iter().enumerate() {
            for &j in &net[a + 1..] {
                assert!(dist(&pts[i], &pts[j]) > 0.3);
            }
        }
    }
}
