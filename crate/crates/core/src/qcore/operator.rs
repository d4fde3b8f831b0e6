use nalgebra::DMatrix;
use num_complex::Complex64;

use super::layout::HilbertLayout;
use super::state::QuantumState;
use crate::error::{Error, Result};

pub const UNITARY_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-12;

pub type CMatrix = DMatrix<Complex64>;

/// Dense complex operator over a layout.
///
/// `hermitian` / `unitary` are marks, verified when set and propagated only
/// where the algebra guarantees them.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    layout: HilbertLayout,
    matrix: CMatrix,
    hermitian: bool,
    unitary: bool,
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl LinearOperator {
    pub fn new(layout: HilbertLayout, matrix: CMatrix) -> Result<Self> {
        let dim = layout.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self {
            layout,
            matrix,
            hermitian: false,
            unitary: false,
        })
    }

    pub fn new_hermitian(layout: HilbertLayout, matrix: CMatrix) -> Result<Self> {
        Self::new(layout, matrix)?.mark_hermitian()
    }

    pub fn new_unitary(layout: HilbertLayout, matrix: CMatrix) -> Result<Self> {
        Self::new(layout, matrix)?.mark_unitary()
    }

    pub fn identity(layout: HilbertLayout) -> Self {
        let dim = layout.dim();
        Self {
            layout,
            matrix: CMatrix::identity(dim, dim),
            hermitian: true,
            unitary: true,
        }
    }

    /// Build from a row-major array of entries.
    pub fn from_rows(layout: HilbertLayout, rows: &[Complex64]) -> Result<Self> {
        let dim = layout.dim();
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: rows.len(),
            });
        }
        Self::new(layout, CMatrix::from_row_slice(dim, dim, rows))
    }

    /// `|ket⟩⟨bra|`
    pub fn outer(ket: &QuantumState, bra: &QuantumState) -> Result<Self> {
        ket.same_layout(bra)?;
        let k = nalgebra::DVector::from_column_slice(ket.amplitudes());
        let b = nalgebra::DVector::from_column_slice(bra.amplitudes());
        Self::new(ket.layout().clone(), &k * b.adjoint())
    }

    pub fn mark_hermitian(mut self) -> Result<Self> {
        let deviation = self.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn mark_unitary(mut self) -> Result<Self> {
        let deviation = self.unitary_deviation();
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        self.unitary = true;
        Ok(self)
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_marked_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_marked_unitary(&self) -> bool {
        self.unitary
    }

    pub fn hermitian_deviation(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    /// max |(U†U − I)_ij|
    pub fn unitary_deviation(&self) -> f64 {
        let dim = self.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - CMatrix::identity(dim, dim)))
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    fn same_layout(&self, other: &HilbertLayout) -> Result<()> {
        if &self.layout != other {
            return Err(Error::LayoutMismatch(format!(
                "{:?} vs {:?}",
                self.layout, other
            )));
        }
        Ok(())
    }

    /// Matrix-vector product; no renormalization.
    pub fn apply(&self, s: &QuantumState) -> Result<QuantumState> {
        self.same_layout(s.layout())?;
        let v = nalgebra::DVector::from_column_slice(s.amplitudes());
        let out = &self.matrix * v;
        QuantumState::new(self.layout.clone(), out.iter().copied().collect())
    }

    /// `self · other` (other acts first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.same_layout(&other.layout)?;
        Ok(Self {
            layout: self.layout.clone(),
            matrix: &self.matrix * &other.matrix,
            hermitian: false,
            unitary: self.unitary && other.unitary,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_layout(&other.layout)?;
        Ok(Self {
            layout: self.layout.clone(),
            matrix: &self.matrix + &other.matrix,
            hermitian: self.hermitian && other.hermitian,
            unitary: false,
        })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            layout: self.layout.clone(),
            matrix: &self.matrix * c,
            hermitian: self.hermitian && c.im == 0.0,
            unitary: self.unitary && c.norm() == 1.0,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            layout: self.layout.clone(),
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
            unitary: self.unitary,
        }
    }

    /// Same matrix over a layout with identical dimensions.
    pub fn relabel(&self, layout: HilbertLayout) -> Result<Self> {
        let mut op = Self::new(layout, self.matrix.clone())?;
        op.hermitian = self.hermitian;
        op.unitary = self.unitary;
        Ok(op)
    }

    /// Spectral decomposition of a Hermitian operator into (eigenvalue,
    /// eigenprojector) pairs. Eigenvalues within `snap_tol` of an integer are
    /// snapped to it; eigenvalues closer than `snap_tol` share a projector.
    pub fn spectral_decomposition(&self, snap_tol: f64) -> Result<Vec<SpectralComponent>> {
        let deviation = self.hermitian_deviation();
        if deviation > HERMITIAN_TOL.max(1e-10) {
            return Err(Error::NotHermitian { deviation });
        }
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = nalgebra::SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let mut components: Vec<SpectralComponent> = Vec::new();
        for k in order {
            let mut lambda = eig.eigenvalues[k];
            if (lambda - lambda.round()).abs() <= snap_tol {
                lambda = lambda.round();
            }
            let v = eig.eigenvectors.column(k);
            let p = v * v.adjoint();
            match components.last_mut() {
                Some(last) if (last.eigenvalue - lambda).abs() <= snap_tol => {
                    last.projector += p;
                }
                _ => components.push(SpectralComponent {
                    eigenvalue: lambda,
                    projector: p,
                }),
            }
        }
        Ok(components)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let deviation = self.hermitian_deviation();
        if deviation > 1e-10 {
            return Err(Error::NotHermitian { deviation });
        }
        let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(h)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }
}

#[derive(Debug, Clone)]
pub struct SpectralComponent {
    pub eigenvalue: f64,
    pub projector: CMatrix,
}

/// `op ⊗ I` on the modes of `layout` not in `targets`, permuted into
/// `layout` order. The i-th target carries the i-th mode of `op`'s layout.
pub fn embed_operator<S: AsRef<str>>(
    op: &LinearOperator,
    targets: &[S],
    layout: &HilbertLayout,
) -> Result<LinearOperator> {
    if targets.len() != op.layout.len() {
        return Err(Error::DimensionMismatch {
            expected: op.layout.len(),
            found: targets.len(),
        });
    }
    let positions = targets
        .iter()
        .map(|t| layout.position(t.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    for (i, &p) in positions.iter().enumerate() {
        if positions[..i].contains(&p) {
            return Err(Error::DuplicateModeName(targets[i].as_ref().to_string()));
        }
        let (have, want) = (layout.modes()[p].dim(), op.layout.modes()[i].dim());
        if have != want {
            return Err(Error::DimensionMismatch {
                expected: want,
                found: have,
            });
        }
    }

    let dim = layout.dim();
    let mut matrix = CMatrix::zeros(dim, dim);
    let sub_index = |digits: &[usize]| {
        positions
            .iter()
            .zip(op.layout.modes())
            .fold(0, |acc, (&p, m)| acc * m.dim() + digits[p])
    };
    for row in 0..dim {
        let rd = layout.digits(row);
        for col in 0..dim {
            let cd = layout.digits(col);
            let spectator_match = (0..layout.len())
                .filter(|k| !positions.contains(k))
                .all(|k| rd[k] == cd[k]);
            if spectator_match {
                matrix[(row, col)] = op.matrix[(sub_index(&rd), sub_index(&cd))];
            }
        }
    }
    Ok(LinearOperator {
        layout: layout.clone(),
        matrix,
        hermitian: op.hermitian,
        unitary: op.unitary,
    })
}

/// `|s⟩⟨s|` for a normalized state.
pub fn projector(s: &QuantumState) -> Result<LinearOperator> {
    s.ensure_normalized()?;
    let mut p = LinearOperator::outer(s, s)?;
    p.hermitian = true;
    Ok(p)
}
