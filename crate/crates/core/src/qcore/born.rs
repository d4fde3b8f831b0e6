use rand::Rng;

use super::state::{inner_product, QuantumState};
use crate::error::{Error, Result};
use crate::rng;

const ORTHONORMAL_TOL: f64 = 1e-10;

/// Born-rule sampler for a fixed state and measurement basis.
#[derive(Debug, Clone)]
pub struct BornSampler {
    probabilities: Vec<f64>,
    cumulative: Vec<f64>,
}

impl BornSampler {
    /// `basis` must be a complete orthonormal basis of the state's layout.
    pub fn new(s: &QuantumState, basis: &[QuantumState]) -> Result<Self> {
        if basis.len() != s.dim() {
            return Err(Error::BasisNotOrthonormal {
                deviation: (s.dim() as f64 - basis.len() as f64).abs(),
            });
        }
        let mut deviation = 0.0f64;
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate().skip(i) {
                let expected = if i == j { 1.0 } else { 0.0 };
                let g = inner_product(a, b)?;
                deviation = deviation.max((g - expected).norm());
            }
        }
        if deviation > ORTHONORMAL_TOL {
            return Err(Error::BasisNotOrthonormal { deviation });
        }
        let probabilities = basis
            .iter()
            .map(|a| inner_product(a, s).map(|z| z.norm_sqr()))
            .collect::<Result<Vec<_>>>()?;
        let mut acc = 0.0;
        let cumulative = probabilities
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self {
            probabilities,
            cumulative,
        })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().unwrap_or(&0.0);
        let u = rng.random::<f64>() * total;
        let k = self.cumulative.partition_point(|&c| c <= u);
        // Guard against round-off at the top end and zero-probability tails.
        let k = k.min(self.cumulative.len() - 1);
        if self.probabilities[k] > 0.0 {
            k
        } else {
            (0..=k).rev().find(|&j| self.probabilities[j] > 0.0).unwrap_or(k)
        }
    }
}

/// One Born-rule outcome index for `s` measured in `basis`.
pub fn born_sample(s: &QuantumState, basis: &[QuantumState], seed: u64) -> Result<usize> {
    let sampler = BornSampler::new(s, basis)?;
    Ok(sampler.sample(&mut rng::seeded(seed)))
}

/// `n` independent outcomes from one seeded stream.
pub fn born_samples(
    s: &QuantumState,
    basis: &[QuantumState],
    n: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let sampler = BornSampler::new(s, basis)?;
    let mut r = rng::seeded(seed);
    Ok((0..n).map(|_| sampler.sample(&mut r)).collect())
}

/// The computational basis of a layout, in index order.
pub fn computational_basis(layout: &super::layout::HilbertLayout) -> Vec<QuantumState> {
    (0..layout.dim())
        .map(|k| QuantumState::basis_index(layout.clone(), k).expect("index in range"))
        .collect()
}
