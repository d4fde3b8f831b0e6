use num_complex::Complex64;

use super::layout::HilbertLayout;
use crate::error::{Error, Result};

/// Tolerance for "is normalized" checks.
pub const NORM_TOL: f64 = 1e-10;

/// Pure state: dense amplitudes over a layout, big-endian index order.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    layout: HilbertLayout,
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn new(layout: HilbertLayout, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { layout, amplitudes })
    }

    pub fn zero(layout: HilbertLayout) -> Self {
        let dim = layout.dim();
        Self {
            layout,
            amplitudes: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    pub fn basis_index(layout: HilbertLayout, index: usize) -> Result<Self> {
        let dim = layout.dim();
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut s = Self::zero(layout);
        s.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Basis ket with one label per mode, e.g. `["L", "H"]`.
    pub fn basis<S: AsRef<str>>(layout: HilbertLayout, labels: &[S]) -> Result<Self> {
        let index = layout.index_of_labels(labels)?;
        Self::basis_index(layout, index)
    }

    /// Linear combination of labeled basis kets.
    pub fn from_terms<S: AsRef<str>>(
        layout: HilbertLayout,
        terms: &[(Complex64, &[S])],
    ) -> Result<Self> {
        let mut s = Self::zero(layout);
        for (c, labels) in terms {
            let k = s.layout.index_of_labels(labels)?;
            s.amplitudes[k] += c;
        }
        Ok(s)
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude<S: AsRef<str>>(&self, labels: &[S]) -> Result<Complex64> {
        Ok(self.amplitudes[self.layout.index_of_labels(labels)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOL
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm: self.norm() })
        }
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n <= f64::EPSILON {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            layout: self.layout.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_layout(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&other.amplitudes)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub(crate) fn same_layout(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch(format!(
                "{:?} vs {:?}",
                self.layout, other.layout
            )));
        }
        Ok(())
    }

    /// Same amplitudes reinterpreted over another layout of equal shape.
    pub fn relabel(&self, layout: HilbertLayout) -> Result<Self> {
        Self::new(layout, self.amplitudes.clone())
    }
}

/// `a ⊗ b`: layout is a's modes followed by b's.
pub fn tensor_product(a: &QuantumState, b: &QuantumState) -> Result<QuantumState> {
    let layout = a.layout.concat(&b.layout)?;
    let amplitudes = a
        .amplitudes
        .iter()
        .flat_map(|x| b.amplitudes.iter().map(move |y| x * y))
        .collect();
    QuantumState::new(layout, amplitudes)
}

/// ⟨a|b⟩, conjugate-linear in `a`.
pub fn inner_product(a: &QuantumState, b: &QuantumState) -> Result<Complex64> {
    a.same_layout(b)?;
    Ok(a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::layout::Mode;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_product() {
        let l = QuantumState::basis(HilbertLayout::single_path("path"), &["L"]).unwrap();
        let h = QuantumState::basis(HilbertLayout::single_polarization("pol"), &["H"]).unwrap();
        let lh = tensor_product(&l, &h).unwrap();
        assert_eq!(lh.dim(), 4);
        assert_eq!(lh.amplitude(&["L", "H"]).unwrap(), c(1.0, 0.0));
        assert_eq!(lh.norm_sqr(), 1.0);
    }

    #[test]
    fn colliding_names() {
        let a = QuantumState::basis(HilbertLayout::single_path("x"), &["L"]).unwrap();
        assert_eq!(
            tensor_product(&a, &a).unwrap_err(),
            Error::DuplicateModeName("x".into())
        );
    }

    #[test]
    fn inner_product_layouts_must_match() {
        let a = QuantumState::basis(HilbertLayout::single_path("x"), &["L"]).unwrap();
        let b = QuantumState::basis(HilbertLayout::single_path("y"), &["L"]).unwrap();
        assert!(matches!(inner_product(&a, &b), Err(Error::LayoutMismatch(_))));
    }

    #[test]
    fn conjugate_linear_first_slot() {
        let layout = HilbertLayout::new(vec![Mode::path("p")]).unwrap();
        let a = QuantumState::new(layout.clone(), vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let b = QuantumState::basis(layout, &["L"]).unwrap();
        assert_eq!(inner_product(&a, &b).unwrap(), c(0.0, -1.0));
        assert_eq!(inner_product(&b, &a).unwrap(), c(0.0, 1.0));
    }

    #[test]
    fn zero_cannot_normalize() {
        let z = QuantumState::zero(HilbertLayout::single_path("p"));
        assert_eq!(z.normalize().unwrap_err(), Error::ZeroNorm);
    }
}
