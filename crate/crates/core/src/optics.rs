//! Idealized optical elements as unitaries on path/polarization modes.
//!
//! Conventions:
//! - beam splitter: `(1/√2)[[1, i], [i, 1]]` on (L, R), i.e. a reflection
//!   picks up a factor `i` on either side;
//! - half-wave plate: `|H⟩ ↔ |V⟩`;
//! - phase shifter: factor `i` on the selected port;
//! - polarizing beam splitter: `|x,H⟩ → |x,H⟩`, `|x,V⟩ → |x̄,V⟩`;
//! - mirror: identity on amplitudes (a per-arm global phase cancels in every
//!   weak value).

use std::fmt;

use crate::error::{Error, Result};
use crate::qcore::{
    c64, embed_operator, inner_product, CMatrix, Complex64, HilbertLayout, LinearOperator, Mode,
    ModeKind, QuantumState,
};

/// Residual threshold below which a Gram–Schmidt candidate counts as dependent.
pub const DEPENDENCE_TOL: f64 = 1e-8;
/// Allowed mismatch between input and output Gram matrices.
pub const ISOMETRY_TOL: f64 = 1e-10;

fn require_kind(mode: &Mode, kind: ModeKind, element: &'static str) -> Result<()> {
    if mode.kind() != kind || mode.dim() != 2 {
        return Err(Error::WrongModeKind {
            mode: mode.name().to_string(),
            element,
        });
    }
    Ok(())
}

fn local(modes: &[&Mode], rows: &[Complex64]) -> Result<LinearOperator> {
    let layout = HilbertLayout::new(modes.iter().map(|m| (*m).clone()).collect())?;
    LinearOperator::from_rows(layout, rows)?.mark_unitary()
}

/// 50:50 symmetric beam splitter on a path mode.
pub fn beam_splitter(mode: &Mode) -> Result<LinearOperator> {
    beam_splitter_with_reflectivity(mode, 0.5)
}

/// `[[t, i·r], [i·r, t]]` with `r = √R`, `t = √(1−R)`.
pub fn beam_splitter_with_reflectivity(mode: &Mode, reflectivity: f64) -> Result<LinearOperator> {
    require_kind(mode, ModeKind::Path, "beam splitter")?;
    if !(0.0..=1.0).contains(&reflectivity) {
        return Err(Error::NotUnitary {
            deviation: reflectivity,
        });
    }
    let t = c64((1.0 - reflectivity).sqrt(), 0.0);
    let r = c64(0.0, reflectivity.sqrt());
    local(&[mode], &[t, r, r, t])
}

pub fn half_wave_plate(mode: &Mode) -> Result<LinearOperator> {
    require_kind(mode, ModeKind::Polarization, "half-wave plate")?;
    let (o, z) = (c64(1.0, 0.0), c64(0.0, 0.0));
    local(&[mode], &[z, o, o, z])
}

/// Multiplies the amplitude of `port` by `i`.
pub fn phase_shifter(mode: &Mode, port: &str) -> Result<LinearOperator> {
    require_kind(mode, ModeKind::Path, "phase shifter")?;
    let k = mode.label_index(port)?;
    let mut diag = [c64(1.0, 0.0); 2];
    diag[k] = c64(0.0, 1.0);
    let z = c64(0.0, 0.0);
    local(&[mode], &[diag[0], z, z, diag[1]])
}

/// Transmits H (path unchanged), reflects V (path flipped). Acts on the
/// joint (path, polarization) space in that order.
pub fn polarizing_beam_splitter(path: &Mode, pol: &Mode) -> Result<LinearOperator> {
    require_kind(path, ModeKind::Path, "polarizing beam splitter")?;
    require_kind(pol, ModeKind::Polarization, "polarizing beam splitter")?;
    let (o, z) = (c64(1.0, 0.0), c64(0.0, 0.0));
    // basis order: (0,H) (0,V) (1,H) (1,V)
    #[rustfmt::skip]
    let rows = [
        o, z, z, z,
        z, z, z, o,
        z, z, o, z,
        z, o, z, z,
    ];
    local(&[path, pol], &rows)
}

pub fn mirror(mode: &Mode) -> Result<LinearOperator> {
    require_kind(mode, ModeKind::Path, "mirror")?;
    Ok(LinearOperator::identity(HilbertLayout::new(vec![
        mode.clone(),
    ])?))
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    BeamSplitter { reflectivity: f64 },
    PhaseShifter { port: String },
    HalfWavePlate,
    PolarizingBeamSplitter,
    Mirror,
}

impl ElementKind {
    pub fn keyword(&self) -> &'static str {
        match self {
            ElementKind::BeamSplitter { .. } => "bs",
            ElementKind::PhaseShifter { .. } => "ps",
            ElementKind::HalfWavePlate => "hwp",
            ElementKind::PolarizingBeamSplitter => "pbs",
            ElementKind::Mirror => "mirror",
        }
    }

    fn arity(&self) -> usize {
        match self {
            ElementKind::PolarizingBeamSplitter => 2,
            _ => 1,
        }
    }
}

/// Restricts an element to one arm: it acts only on the branch where `mode`
/// is in basis state `label`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arm {
    pub mode: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpticalElement {
    pub kind: ElementKind,
    pub targets: Vec<String>,
    pub arm: Option<Arm>,
}

impl OpticalElement {
    pub fn new(kind: ElementKind, targets: &[&str]) -> Self {
        Self {
            kind,
            targets: targets.iter().map(|t| t.to_string()).collect(),
            arm: None,
        }
    }

    pub fn in_arm(mut self, mode: &str, label: &str) -> Self {
        self.arm = Some(Arm {
            mode: mode.to_string(),
            label: label.to_string(),
        });
        self
    }

    /// Full-layout unitary of this element.
    pub fn unitary(&self, layout: &HilbertLayout) -> Result<LinearOperator> {
        if self.targets.len() != self.kind.arity() {
            return Err(Error::DimensionMismatch {
                expected: self.kind.arity(),
                found: self.targets.len(),
            });
        }
        let modes = self
            .targets
            .iter()
            .map(|t| layout.mode(t))
            .collect::<Result<Vec<_>>>()?;
        let op = match &self.kind {
            ElementKind::BeamSplitter { reflectivity } => {
                beam_splitter_with_reflectivity(modes[0], *reflectivity)?
            }
            ElementKind::PhaseShifter { port } => phase_shifter(modes[0], port)?,
            ElementKind::HalfWavePlate => half_wave_plate(modes[0])?,
            ElementKind::PolarizingBeamSplitter => polarizing_beam_splitter(modes[0], modes[1])?,
            ElementKind::Mirror => mirror(modes[0])?,
        };
        let full = embed_operator(&op, &self.targets, layout)?;
        match &self.arm {
            None => Ok(full),
            Some(arm) => {
                if self.targets.contains(&arm.mode) {
                    return Err(Error::WrongModeKind {
                        mode: arm.mode.clone(),
                        element: "arm selector (mode is also a target)",
                    });
                }
                let arm_mode = layout.mode(&arm.mode)?;
                let sub = HilbertLayout::new(vec![arm_mode.clone()])?;
                let ket = QuantumState::basis(sub, &[arm.label.as_str()])?;
                let p = embed_operator(&crate::qcore::projector(&ket)?, &[&arm.mode], layout)?;
                let rest = LinearOperator::identity(layout.clone()).add(&p.scale(c64(-1.0, 0.0)))?;
                p.compose(&full)?.add(&rest)?.mark_unitary()
            }
        }
    }
}

impl fmt::Display for OpticalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.kind.keyword())?;
        write!(f, "{}", self.targets.join(", "))?;
        match &self.kind {
            ElementKind::BeamSplitter { reflectivity } if *reflectivity != 0.5 => {
                write!(f, ", {reflectivity}")?
            }
            ElementKind::PhaseShifter { port } => write!(f, ", {port}")?,
            _ => {}
        }
        write!(f, ")")?;
        if let Some(arm) = &self.arm {
            write!(f, " @ {}={}", arm.mode, arm.label)?;
        }
        Ok(())
    }
}

/// An element known only by how it routes particular states.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingConstraint {
    pub input: QuantumState,
    pub output: QuantumState,
}

impl RoutingConstraint {
    pub fn new(input: QuantumState, output: QuantumState) -> Self {
        Self { input, output }
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vnorm(a: &[Complex64]) -> f64 {
    a.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

/// Modified Gram–Schmidt of `v` against `basis`; returns the residual.
fn residual(basis: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    let mut r = v.to_vec();
    for b in basis {
        let c = dot(b, &r);
        for (x, y) in r.iter_mut().zip(b) {
            *x -= c * y;
        }
    }
    r
}

/// Extends an orthonormal set to a full basis with canonical basis vectors in
/// index order, skipping near-dependent candidates.
fn extend_basis(mut basis: Vec<Vec<Complex64>>, dim: usize) -> Vec<Vec<Complex64>> {
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut e = vec![c64(0.0, 0.0); dim];
        e[k] = c64(1.0, 0.0);
        let mut r = residual(&basis, &e);
        // second pass for numerical orthogonality
        r = residual(&basis, &r);
        let n = vnorm(&r);
        if n > DEPENDENCE_TOL {
            basis.push(r.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// A unitary on `layout` satisfying every constraint `U·input = output`.
///
/// Inputs are orthonormalized with Gram–Schmidt and the same combinations are
/// applied to the outputs; the unconstrained complement is filled by pairing
/// canonical-order completions of both sides. Output states may live on a
/// differently-labeled layout of the same dimension (e.g. detector ports);
/// only their amplitudes are used.
pub fn complete_partial_isometry(
    layout: &HilbertLayout,
    constraints: &[RoutingConstraint],
) -> Result<LinearOperator> {
    let dim = layout.dim();
    for c in constraints {
        if c.input.layout() != layout {
            return Err(Error::LayoutMismatch(format!(
                "constraint input over {:?}, expected {:?}",
                c.input.layout(),
                layout
            )));
        }
        if c.output.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: c.output.dim(),
            });
        }
    }

    let mut mismatch = 0.0f64;
    for a in constraints {
        for b in constraints {
            let gin = inner_product(&a.input, &b.input)?;
            let gout = dot(a.output.amplitudes(), b.output.amplitudes());
            mismatch = mismatch.max((gin - gout).norm());
        }
    }
    if mismatch > ISOMETRY_TOL {
        return Err(Error::ConstraintsNotIsometric { mismatch });
    }

    // Orthonormalize inputs, carrying the outputs along.
    let mut ins: Vec<Vec<Complex64>> = Vec::new();
    let mut outs: Vec<Vec<Complex64>> = Vec::new();
    for c in constraints {
        let mut u = c.input.amplitudes().to_vec();
        let mut v = c.output.amplitudes().to_vec();
        for (bi, bo) in ins.iter().zip(&outs) {
            let coef = dot(bi, &u);
            for (x, y) in u.iter_mut().zip(bi) {
                *x -= coef * y;
            }
            for (x, y) in v.iter_mut().zip(bo) {
                *x -= coef * y;
            }
        }
        let n = vnorm(&u);
        if n <= DEPENDENCE_TOL {
            continue;
        }
        // Re-orthogonalize the output against earlier outputs; any correction
        // here is below the isometry tolerance.
        let v = residual(&outs, &v);
        let nv = vnorm(&v);
        ins.push(u.into_iter().map(|x| x / n).collect());
        outs.push(v.into_iter().map(|x| x / nv).collect());
    }

    let ins = extend_basis(ins, dim);
    let outs = extend_basis(outs, dim);
    let mut m = CMatrix::zeros(dim, dim);
    for (u, v) in ins.iter().zip(&outs) {
        for r in 0..dim {
            for c in 0..dim {
                m[(r, c)] += v[r] * u[c].conj();
            }
        }
    }
    LinearOperator::new_unitary(layout.clone(), m)
}
