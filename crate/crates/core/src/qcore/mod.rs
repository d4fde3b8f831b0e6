//! Dense state and operator algebra over labeled mode layouts.
//!
//! Amplitudes are stored densely in big-endian index order over the layout's
//! mode list. Basis order is (L, R) for path modes and (H, V) for
//! polarization modes unless a mode declares other labels.

mod born;
mod density;
mod layout;
mod operator;
mod state;

pub use born::{born_sample, born_samples, computational_basis, BornSampler};
pub use density::{partial_trace, DensityMatrix};
pub use layout::{HilbertLayout, Mode, ModeKind};
pub use operator::{
    embed_operator, projector, CMatrix, LinearOperator, SpectralComponent, HERMITIAN_TOL,
    UNITARY_TOL,
};
pub use state::{inner_product, tensor_product, QuantumState, NORM_TOL};

pub use num_complex::Complex64;

/// Shorthand for `Complex64::new(re, im)`.
pub const fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
