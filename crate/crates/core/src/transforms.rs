//! Walsh–Hadamard transform plus the diagonal and row-sampling factors used
//! by the FJLT and the fast binary map.
//!
//! Conventions shared by every caller:
//! * inputs of length `n` are zero-padded to the next power of two,
//! * the Hadamard matrix is scaled by `1/√n_padded` so it is orthogonal and
//!   its own inverse,
//! * sampling `m` rows rescales by `√(n_padded/m)`, so the composite sketch
//!   preserves squared norms in expectation.

use rand::seq::index;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, param, Result};
use crate::rng::{self, tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HadamardPlan {
    n_padded: usize,
    original_n: usize,
}

impl HadamardPlan {
    pub fn new(original_n: usize) -> Result<Self> {
        if original_n == 0 {
            return Err(param("Hadamard transform needs a nonempty input"));
        }
        Ok(Self { n_padded: original_n.next_power_of_two(), original_n })
    }

    pub fn n_padded(&self) -> usize {
        self.n_padded
    }

    pub fn original_n(&self) -> usize {
        self.original_n
    }

    /// `x` zero-padded to `n_padded`.
    pub fn pad(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.original_n, x.len())?;
        let mut buf = Vec::with_capacity(self.n_padded);
        buf.extend_from_slice(x);
        buf.resize(self.n_padded, 0.0);
        Ok(buf)
    }
}

/// Normalized Walsh–Hadamard transform of `x`, zero-padded per `plan`.
pub fn fwht(x: &[f64], plan: &HadamardPlan) -> Result<Vec<f64>> {
    let mut buf = plan.pad(x)?;
    fwht_in_place(&mut buf);
    Ok(buf)
}

/// In-place normalized transform.
///
/// # Panics
/// If the length is not a power of two.
pub fn fwht_in_place(buf: &mut [f64]) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "length {n} is not a power of two");
    // Stages commute, so finish all short spans one cache-sized chunk at a
    // time before the long spans sweep the whole buffer.
    let chunk = n.min(CACHE_CHUNK);
    for c in buf.chunks_exact_mut(chunk) {
        butterflies(c, 1, chunk);
    }
    long_butterflies(buf, chunk);
    let scale = 1.0 / (n as f64).sqrt();
    buf.iter_mut().for_each(|v| *v *= scale);
}

const CACHE_CHUNK: usize = 1 << 11;

/// Unnormalized stages with spans `from, 2·from, …` below `buf.len()`,
/// where `from` is a power of two. Viewing `buf` as rows of length `from`,
/// these stages mix rows only, so they run over narrow column tiles that
/// stay in cache.
fn long_butterflies(buf: &mut [f64], from: usize) {
    const TILE: usize = 64;
    let rows = buf.len() / from;
    if rows < 2 {
        return;
    }
    let tile = TILE.min(from);
    for c0 in (0..from).step_by(tile) {
        let mut h = 1;
        while h < rows {
            for r0 in (0..rows).step_by(2 * h) {
                for r in r0..r0 + h {
                    let (a, b) = (r * from + c0, (r + h) * from + c0);
                    let (lo, hi) = buf.split_at_mut(b);
                    for (x, y) in lo[a..a + tile].iter_mut().zip(hi[..tile].iter_mut()) {
                        let (u, v) = (*x, *y);
                        *x = u + v;
                        *y = u - v;
                    }
                }
            }
            h *= 2;
        }
    }
}

/// Unnormalized butterfly stages with spans `from, 2·from, …` below `to`.
fn butterflies(buf: &mut [f64], from: usize, to: usize) {
    let mut h = from;
    while h < to {
        for block in buf.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// Gathers `rows` from `x` (read as zero-padded to the next power of two)
/// and rescales by `√(n_padded / rows.len())`.
pub fn subsample(x: &[f64], rows: &[usize]) -> Result<Vec<f64>> {
    if rows.is_empty() {
        return Err(param("no rows to sample"));
    }
    let n_padded = x.len().max(1).next_power_of_two();
    if let Some(&bad) = rows.iter().find(|&&r| r >= n_padded) {
        return Err(param(format!("row {bad} out of range for padded length {n_padded}")));
    }
    let scale = (n_padded as f64 / rows.len() as f64).sqrt();
    Ok(rows.iter().map(|&r| x.get(r).copied().unwrap_or(0.0) * scale).collect())
}

/// `subsample(fwht(buf), rows)` without computing the unused outputs.
///
/// Runs only the butterfly stages of span `≥ B`, then finishes each
/// requested row with a direct `B`-term sum inside its block, where
/// `B ≈ n/m`. Cost is about `n·log(m) + n` instead of `n·log(n)`.
/// `buf` is overwritten.
///
/// # Panics
/// If the length is not a power of two.
pub fn hadamard_rows(buf: &mut [f64], rows: &[usize]) -> Result<Vec<f64>> {
    let n = buf.len();
    assert!(n.is_power_of_two(), "length {n} is not a power of two");
    if rows.is_empty() {
        return Err(param("no rows to sample"));
    }
    if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
        return Err(param(format!("row {bad} out of range for padded length {n}")));
    }
    let block = (n / rows.len()).next_power_of_two().min(n);
    if block < CACHE_CHUNK {
        butterflies(buf, block, CACHE_CHUNK.min(n));
    }
    long_butterflies(buf, block.max(CACHE_CHUNK.min(n)));
    // (1/√n)·√(n/m)
    let scale = 1.0 / (rows.len() as f64).sqrt();
    Ok(rows
        .iter()
        .map(|&r| {
            let start = r & !(block - 1);
            let low = r & (block - 1);
            let sum: f64 = buf[start..start + block]
                .iter()
                .enumerate()
                .map(|(j, v)| if (j & low).count_ones().is_multiple_of(2) { *v } else { -*v })
                .sum();
            sum * scale
        })
        .collect())
}

/// `count` distinct rows of `0..n_padded`, uniformly at random, ascending.
pub fn sample_rows(n_padded: usize, count: usize, seed: u64) -> Result<Vec<usize>> {
    if count == 0 || count > n_padded {
        return Err(param(format!("cannot sample {count} distinct rows out of {n_padded}")));
    }
    let mut rng = rng::stream(seed, tag::ROWS);
    let mut rows = index::sample(&mut rng, n_padded, count).into_vec();
    rows.sort_unstable();
    Ok(rows)
}

/// Diagonal matrix of independent Rademacher signs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSign {
    signs: Vec<f64>,
    seed: u64,
}

impl DiagonalSign {
    pub fn new(n: usize, seed: u64) -> Self {
        let mut rng = rng::stream(seed, tag::SIGNS);
        let signs = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        Self { signs, seed }
    }

    /// All-plus diagonal, i.e. the identity.
    pub fn ones(n: usize) -> Self {
        Self { signs: vec![1.0; n], seed: 0 }
    }

    pub fn signs(&self) -> &[f64] {
        &self.signs
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `Rx` zero-padded to the transform length of `plan`, in one buffer.
    pub fn apply_padded(&self, x: &[f64], plan: &HadamardPlan) -> Result<Vec<f64>> {
        check_dim(self.signs.len(), x.len())?;
        check_dim(plan.original_n(), x.len())?;
        let mut buf = vec![0.0; plan.n_padded()];
        for ((b, v), s) in buf.iter_mut().zip(x).zip(&self.signs) {
            *b = v * s;
        }
        Ok(buf)
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.signs.len(), x.len())?;
        Ok(x.iter().zip(&self.signs).map(|(v, s)| v * s).collect())
    }
}

/// Diagonal matrix of independent standard normal entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalGaussian {
    values: Vec<f64>,
    seed: u64,
}

impl DiagonalGaussian {
    pub fn new(n: usize, seed: u64) -> Self {
        let mut rng = rng::stream(seed, tag::GAUSS_DIAG);
        Self { values: (0..n).map(|_| rng.sample(StandardNormal)).collect(), seed }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.values.len(), x.len())?;
        Ok(x.iter().zip(&self.values).map(|(v, g)| v * g).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{gaussian_vector, l2};
    use proptest::prelude::*;

    /// Dense Sylvester–Hadamard matrix, for checking the fast path.
    fn hadamard_matrix(n: usize) -> Vec<Vec<f64>> {
        let s = 1.0 / (n as f64).sqrt();
        (0..n).map(|i| (0..n).map(|j| if (i & j).count_ones() % 2 == 0 { s } else { -s }).collect()).collect()
    }

    #[test]
    fn small_cases() {
        let h = fwht(&[1.0, 0.0], &HadamardPlan::new(2).unwrap()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((h[0] - r).abs() < 1e-15 && (h[1] - r).abs() < 1e-15);
        let h = fwht(&[1.0; 4], &HadamardPlan::new(4).unwrap()).unwrap();
        assert_eq!(h, vec![2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn matches_dense_matrix() {
        let mut rng = rng::stream(1, 0);
        for n in [1, 2, 8, 32] {
            let x = gaussian_vector(n, &mut rng);
            let fast = fwht(&x, &HadamardPlan::new(n).unwrap()).unwrap();
            let dense: Vec<f64> =
                hadamard_matrix(n).iter().map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
            for (a, b) in fast.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn involution_at_64() {
        let plan = HadamardPlan::new(64).unwrap();
        let x = gaussian_vector(64, &mut rng::stream(2, 0));
        let back = fwht(&fwht(&x, &plan).unwrap(), &plan).unwrap();
        for (a, b) in back.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pads_non_power_of_two() {
        let plan = HadamardPlan::new(5).unwrap();
        assert_eq!(plan.n_padded(), 8);
        let y = fwht(&[1.0, 2.0, 3.0, 4.0, 5.0], &plan).unwrap();
        assert_eq!(y.len(), 8);
        assert!((l2(&y) - 55f64.sqrt()).abs() < 1e-12);
        assert!(fwht(&[1.0; 4], &plan).is_err());
        assert!(HadamardPlan::new(0).is_err());
    }

    #[test]
    fn subsample_gathers_and_scales() {
        let s = subsample(&[3.0, 1.0, 4.0], &[0, 2]).unwrap();
        let k = 2f64.sqrt();
        assert_eq!(s, vec![3.0 * k, 4.0 * k]);
        // Reading the padded slot gives zero.
        assert_eq!(subsample(&[3.0, 1.0, 4.0], &[3]).unwrap(), vec![0.0]);
        let x = [1.0, -2.0, 0.5, 7.0];
        assert_eq!(subsample(&x, &[0, 1, 2, 3]).unwrap(), x.to_vec());
        assert!(subsample(&x, &[4]).is_err());
        assert!(subsample(&x, &[]).is_err());
    }

    #[test]
    fn row_sampling() {
        let rows = sample_rows(16, 5, 3).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.windows(2).all(|w| w[0] < w[1]));
        assert!(rows.iter().all(|&r| r < 16));
        assert_eq!(rows, sample_rows(16, 5, 3).unwrap());
        assert!(sample_rows(4, 5, 0).is_err());
        assert!(sample_rows(4, 0, 0).is_err());
    }

    #[test]
    fn subsampled_norm_is_unbiased() {
        // x = H·R·u for a fixed unit u; average ‖Sx‖² over row draws.
        let n = 64;
        let m = 8;
        let plan = HadamardPlan::new(n).unwrap();
        let u = gaussian_vector(n, &mut rng::stream(5, 0));
        let r = DiagonalSign::new(n, 5);
        let x = fwht(&r.apply(&u).unwrap(), &plan).unwrap();
        let target = l2(&x).powi(2);
        let draws = 10_000;
        let samples: Vec<f64> = (0..draws)
            .map(|t| {
                let rows = sample_rows(n, m, 1000 + t).unwrap();
                l2(&subsample(&x, &rows).unwrap()).powi(2)
            })
            .collect();
        let est = crate::sets::Estimate::from_samples(&samples);
        assert!((est.estimate - target).abs() < 3.0 * est.std_error, "{est:?} vs {target}");
    }

    #[test]
    fn diagonals() {
        let d = DiagonalSign::new(1000, 4);
        assert!(d.signs().iter().all(|&s| s == 1.0 || s == -1.0));
        let plus = d.signs().iter().filter(|&&s| s > 0.0).count();
        assert!((400..600).contains(&plus));
        assert_eq!(d, DiagonalSign::new(1000, 4));
        let x = gaussian_vector(1000, &mut rng::stream(4, 1));
        assert!((l2(&d.apply(&x).unwrap()) - l2(&x)).abs() < 1e-12);
        assert!(d.apply(&x[..10]).is_err());
        let g = DiagonalGaussian::new(10, 4);
        assert_eq!(g.apply(&[1.0; 10]).unwrap(), g.values().to_vec());
    }

    proptest! {
        #[test]
        fn preserves_norm(x in prop::collection::vec(-100.0f64..100.0, 1..300)) {
            let plan = HadamardPlan::new(x.len()).unwrap();
            let y = fwht(&x, &plan).unwrap();
            prop_assert!((l2(&y) - l2(&x)).abs() < 1e-10 * (1.0 + l2(&x)));
        }

        #[test]
        fn is_linear(
            pair in (1usize..200).prop_flat_map(|n| (
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(-10.0f64..10.0, n),
            )),
            a in -5.0f64..5.0,
            b in -5.0f64..5.0,
        ) {
            let (x, y) = pair;
            let plan = HadamardPlan::new(x.len()).unwrap();
            let mix: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
            let lhs = fwht(&mix, &plan).unwrap();
            let fx = fwht(&x, &plan).unwrap();
            let fy = fwht(&y, &plan).unwrap();
            for i in 0..lhs.len() {
                prop_assert!((lhs[i] - (a * fx[i] + b * fy[i])).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pruned_rows_match_full_transform() {
        for (n, count) in [(1usize, 1usize), (8, 3), (64, 1), (64, 64), (256, 17), (1024, 64)] {
            let x: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
            let rows = sample_rows(n, count, n as u64).unwrap();
            let mut full = x.clone();
            fwht_in_place(&mut full);
            let expected = subsample(&full, &rows).unwrap();
            let got = hadamard_rows(&mut x.clone(), &rows).unwrap();
            for (a, b) in got.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-9, "{n} {count}: {a} vs {b}");
            }
        }
        assert!(hadamard_rows(&mut [1.0, 2.0], &[]).is_err());
        assert!(hadamard_rows(&mut [1.0, 2.0], &[2]).is_err());
    }
}
