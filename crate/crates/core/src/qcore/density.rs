use num_complex::Complex64;

use super::layout::HilbertLayout;
use super::operator::CMatrix;
use super::state::QuantumState;
use crate::error::{Error, Result};

/// Reduced density matrix over a subset of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: HilbertLayout,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(h)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Tr ρ²
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }
}

/// Traces out every mode not in `keep`; kept modes appear in `keep` order.
pub fn partial_trace<S: AsRef<str>>(s: &QuantumState, keep: &[S]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    let layout = s.layout();
    let kept_layout = layout.sublayout(keep)?;
    let kept: Vec<usize> = keep
        .iter()
        .map(|k| layout.position(k.as_ref()))
        .collect::<Result<_>>()?;
    let traced: Vec<usize> = (0..layout.len()).filter(|k| !kept.contains(k)).collect();

    let env_dim: usize = traced.iter().map(|&k| layout.modes()[k].dim()).product();
    let sys_dim = kept_layout.dim();
    // Reshape amplitudes into (sys × env).
    let mut psi = CMatrix::zeros(sys_dim, env_dim);
    for (index, amp) in s.amplitudes().iter().enumerate() {
        let d = layout.digits(index);
        let sys = kept
            .iter()
            .fold(0, |acc, &k| acc * layout.modes()[k].dim() + d[k]);
        let env = traced
            .iter()
            .fold(0, |acc, &k| acc * layout.modes()[k].dim() + d[k]);
        psi[(sys, env)] = *amp;
    }
    Ok(DensityMatrix {
        layout: kept_layout,
        matrix: &psi * psi.adjoint(),
    })
}
