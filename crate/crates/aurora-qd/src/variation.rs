//! Parent selection and the directional (iso+line) variation operator
//! shared by the GA, MAP-Elites and all AURORA variants.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::types::Genotype;

/// Scales of the isotropic and directional noise terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationParams {
    pub sigma1: f64,
    pub sigma2: f64,
}

impl Default for VariationParams {
    fn default() -> Self {
        // Maze defaults.
        Self {
            sigma1: 0.2,
            sigma2: 0.0,
        }
    }
}

/// Draw `count` parent pairs uniformly with replacement; the two members of
/// a pair are drawn independently.
pub fn select_uniform<'a, T>(
    pool: &'a [T],
    count: usize,
    rng: &mut impl Rng,
) -> Result<Vec<(&'a T, &'a T)>> {
    if pool.is_empty() {
        return Err(Error::EmptyRepertoire);
    }
    Ok((0..count)
        .map(|_| {
            let i = rng.random_range(0..pool.len());
            let j = rng.random_range(0..pool.len());
            (&pool[i], &pool[j])
        })
        .collect())
}

/// Directional variation: `x1 + sigma1 * eps + sigma2 * zeta * (x2 - x1)`
/// with `eps` an i.i.d. standard-normal vector and `zeta` a single
/// standard-normal scalar.
pub fn iso_line_dd(
    x1: &Genotype,
    x2: &Genotype,
    params: &VariationParams,
    rng: &mut impl Rng,
) -> Result<Genotype> {
    if x1.dim() != x2.dim() {
        return Err(Error::DimensionMismatch {
            expected: x1.dim(),
            got: x2.dim(),
        });
    }
    let zeta: f64 = if params.sigma2 != 0.0 {
        rng.sample(StandardNormal)
    } else {
        0.0
    };
    let out = x1
        .params
        .iter()
        .zip(&x2.params)
        .map(|(&a, &b)| {
            let eps: f64 = rng.sample(StandardNormal);
            a + params.sigma1 * eps + params.sigma2 * zeta * (b - a)
        })
        .collect();
    Ok(Genotype::new(out))
}

/// Batch of offspring, one per parent pair, each drawn from its own rng
/// sub-stream so generation order never affects the result.
pub fn vary_batch(
    pairs: &[(&Genotype, &Genotype)],
    params: &VariationParams,
    base: RngStream,
) -> Result<Vec<Genotype>> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, (x1, x2))| iso_line_dd(x1, x2, params, &mut base.substream(i as u64).rng()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geno(v: &[f64]) -> Genotype {
        Genotype::new(v.to_vec())
    }

    #[test]
    fn degenerate_noise_copies_parent() {
        let p = VariationParams {
            sigma1: 0.0,
            sigma2: 0.0,
        };
        let x1 = geno(&[1.0, -2.0, 3.0]);
        let x2 = geno(&[5.0, 5.0, 5.0]);
        let child = iso_line_dd(&x1, &x2, &p, &mut RngStream::new(0, 0).rng()).unwrap();
        assert_eq!(child, x1);
    }

    #[test]
    fn iso_term_moments_match_maze_defaults() {
        // sigma1 = 0.2, sigma2 = 0: per-coordinate variance of the offset
        // should be sigma1^2 = 0.04, mean ~ 0.
        let p = VariationParams::default();
        let x1 = geno(&[0.0, 0.0]);
        let x2 = geno(&[1.0, 1.0]);
        let mut rng = RngStream::new(42, 0).rng();
        let n = 100_000;
        let mut sum = [0.0f64; 2];
        let mut sumsq = [0.0f64; 2];
        for _ in 0..n {
            let c = iso_line_dd(&x1, &x2, &p, &mut rng).unwrap();
            for k in 0..2 {
                sum[k] += c.params[k];
                sumsq[k] += c.params[k] * c.params[k];
            }
        }
        for k in 0..2 {
            let mean = sum[k] / n as f64;
            let var = sumsq[k] / n as f64 - mean * mean;
            assert!(mean.abs() < 0.005, "mean {mean}");
            assert!((var - 0.04).abs() < 0.002, "var {var}");
        }
    }

    #[test]
    fn directional_term_stays_on_line() {
        let p = VariationParams {
            sigma1: 0.0,
            sigma2: 1.0,
        };
        let x1 = geno(&[0.0, 0.0]);
        let x2 = geno(&[1.0, 0.0]);
        let mut rng = RngStream::new(7, 0).rng();
        let n = 100_000;
        let mut sumsq = 0.0f64;
        let mut sum = 0.0f64;
        for _ in 0..n {
            let c = iso_line_dd(&x1, &x2, &p, &mut rng).unwrap();
            assert_eq!(c.params[1], 0.0);
            sum += c.params[0];
            sumsq += c.params[0] * c.params[0];
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn sigma2_zero_makes_x2_irrelevant() {
        let p = VariationParams {
            sigma1: 0.2,
            sigma2: 0.0,
        };
        let x1 = geno(&[1.0, 2.0, 3.0]);
        let a = iso_line_dd(&x1, &geno(&[9.0, 9.0, 9.0]), &p, &mut RngStream::new(5, 1).rng())
            .unwrap();
        let b = iso_line_dd(&x1, &geno(&[-4.0, 0.0, 2.0]), &p, &mut RngStream::new(5, 1).rng())
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn selection_is_uniform() {
        // Binomial concentration: each index's frequency within 3 sigma of 1/N.
        let pool: Vec<usize> = (0..8).collect();
        let mut rng = RngStream::new(11, 0).rng();
        let draws = 100_000;
        let pairs = select_uniform(&pool, draws, &mut rng).unwrap();
        let mut counts = vec![0usize; pool.len()];
        for (a, b) in &pairs {
            counts[**a] += 1;
            counts[**b] += 1;
        }
        let total = (2 * draws) as f64;
        let p = 1.0 / pool.len() as f64;
        let sigma = (p * (1.0 - p) / total).sqrt();
        for &c in &counts {
            let freq = c as f64 / total;
            assert!((freq - p).abs() < 3.0 * sigma + 1e-9, "freq {freq}");
        }
    }

    #[test]
    fn selection_replays_exactly() {
        let pool: Vec<u32> = (0..5).collect();
        let a: Vec<(u32, u32)> = select_uniform(&pool, 50, &mut RngStream::new(1, 2).rng())
            .unwrap()
            .iter()
            .map(|(x, y)| (**x, **y))
            .collect();
        let b: Vec<(u32, u32)> = select_uniform(&pool, 50, &mut RngStream::new(1, 2).rng())
            .unwrap()
            .iter()
            .map(|(x, y)| (**x, **y))
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn singleton_pool_forces_self_pairs() {
        let pool = [7u32];
        let pairs = select_uniform(&pool, 10, &mut RngStream::new(0, 0).rng()).unwrap();
        assert!(pairs.iter().all(|(a, b)| **a == 7 && **b == 7));
    }

    #[test]
    fn empty_pool_errors() {
        let pool: [u32; 0] = [];
        assert!(select_uniform(&pool, 1, &mut RngStream::new(0, 0).rng()).is_err());
    }

    #[test]
    fn offspring_dimension_matches_parent() {
        let p = VariationParams::default();
        let x1 = geno(&[0.0; 42].to_vec());
        let c = iso_line_dd(&x1, &x1, &p, &mut RngStream::new(0, 0).rng()).unwrap();
        assert_eq!(c.dim(), 42);
    }
}
