use std::fmt;

use crate::error::Result;
use crate::qcore::{c64, embed_operator, Complex64, HilbertLayout, LinearOperator};
use crate::weakval::{position_projector, sigma_z, ArmObservable};

/// Symbolic observable, kept alongside its matrix so scenarios serialize
/// back to the text they were written in.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorExpr {
    Identity,
    Projector { mode: String, label: String },
    SigmaZ { mode: String },
    Scaled(Complex64, Box<OperatorExpr>),
    Product(Box<OperatorExpr>, Box<OperatorExpr>),
    Sum(Box<OperatorExpr>, Box<OperatorExpr>),
    Difference(Box<OperatorExpr>, Box<OperatorExpr>),
}

impl OperatorExpr {
    pub fn projector(mode: &str, label: &str) -> Self {
        Self::Projector {
            mode: mode.into(),
            label: label.into(),
        }
    }

    pub fn sigma_z(mode: &str) -> Self {
        Self::SigmaZ { mode: mode.into() }
    }

    pub fn times(self, other: Self) -> Self {
        Self::Product(Box::new(self), Box::new(other))
    }

    pub fn for_arm(obs: ArmObservable) -> Self {
        match obs.parts() {
            (path, label, None) => Self::projector(path, label),
            (path, label, Some(pol)) => Self::projector(path, label).times(Self::sigma_z(pol)),
        }
    }

    pub fn build(&self, layout: &HilbertLayout) -> Result<LinearOperator> {
        Ok(match self {
            Self::Identity => LinearOperator::identity(layout.clone()),
            Self::Projector { mode, label } => position_projector(layout, mode, label)?,
            Self::SigmaZ { mode } => {
                embed_operator(&sigma_z(layout.mode(mode)?)?, &[mode], layout)?
            }
            Self::Scaled(c, e) => e.build(layout)?.scale(*c),
            Self::Product(a, b) => {
                let p = a.build(layout)?.compose(&b.build(layout)?)?;
                // products of commuting Hermitian factors stay Hermitian
                let hermitian = p.hermitian_deviation() <= crate::qcore::HERMITIAN_TOL;
                if hermitian {
                    p.mark_hermitian()?
                } else {
                    p
                }
            }
            Self::Sum(a, b) => a.build(layout)?.add(&b.build(layout)?)?,
            Self::Difference(a, b) => a
                .build(layout)?
                .add(&b.build(layout)?.scale(c64(-1.0, 0.0)))?,
        })
    }

    fn is_atomic(&self) -> bool {
        matches!(
            self,
            Self::Identity | Self::Projector { .. } | Self::SigmaZ { .. }
        )
    }
}

/// Complex literal in the `.qcc` grammar, exact under re-parsing.
pub(crate) struct ComplexLiteral(pub Complex64);

impl fmt::Display for ComplexLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}*i)", self.0.re, self.0.im)
    }
}

struct Operand<'a>(&'a OperatorExpr);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_atomic() {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

impl fmt::Display for OperatorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => write!(f, "id"),
            Self::Projector { mode, label } => write!(f, "proj({mode}, {label})"),
            Self::SigmaZ { mode } => write!(f, "sigma_z({mode})"),
            Self::Scaled(c, e) => write!(f, "{} * {}", ComplexLiteral(*c), Operand(e)),
            Self::Product(a, b) => write!(f, "{} * {}", Operand(a), Operand(b)),
            Self::Sum(a, b) => write!(f, "{} + {}", Operand(a), Operand(b)),
            Self::Difference(a, b) => write!(f, "{} - {}", Operand(a), Operand(b)),
        }
    }
}
