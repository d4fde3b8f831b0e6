use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeKind {
    Path,
    Polarization,
}

impl ModeKind {
    pub fn keyword(self) -> &'static str {
        match self {
            ModeKind::Path => "path",
            ModeKind::Polarization => "polarization",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "path" => Some(ModeKind::Path),
            "polarization" | "pol" => Some(ModeKind::Polarization),
            _ => None,
        }
    }
}

/// A named degree of freedom. Labels name the basis states in index order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mode {
    name: String,
    kind: ModeKind,
    labels: Vec<String>,
}

impl Mode {
    pub fn new(name: impl Into<String>, kind: ModeKind, labels: &[&str]) -> Self {
        Self {
            name: name.into(),
            kind,
            labels: labels.iter().map(|l| l.to_string()).collect(),
        }
    }

    /// Path mode with basis (L, R).
    pub fn path(name: impl Into<String>) -> Self {
        Self::new(name, ModeKind::Path, &["L", "R"])
    }

    /// Polarization mode with basis (H, V).
    pub fn polarization(name: impl Into<String>) -> Self {
        Self::new(name, ModeKind::Polarization, &["H", "V"])
    }

    pub fn with_labels(mut self, labels: &[&str]) -> Self {
        self.labels = labels.iter().map(|l| l.to_string()).collect();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ModeKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel {
                mode: self.name.clone(),
                label: label.to_string(),
            })
    }
}

/// Ordered list of modes. Index order is big-endian in list order: the last
/// mode varies fastest.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HilbertLayout {
    modes: Arc<[Mode]>,
}

impl HilbertLayout {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].iter().any(|o| o.name == m.name) {
                return Err(Error::DuplicateModeName(m.name.clone()));
            }
            if m.dim() == 0 {
                return Err(Error::DimensionMismatch {
                    expected: 2,
                    found: 0,
                });
            }
            for (j, l) in m.labels.iter().enumerate() {
                if m.labels[..j].contains(l) {
                    return Err(Error::UnknownLabel {
                        mode: m.name.clone(),
                        label: format!("{l} (duplicated)"),
                    });
                }
            }
        }
        Ok(Self {
            modes: modes.into(),
        })
    }

    /// Single path mode named `name`, basis (L, R).
    pub fn single_path(name: &str) -> Self {
        Self::new(vec![Mode::path(name)]).expect("single mode")
    }

    pub fn single_polarization(name: &str) -> Self {
        Self::new(vec![Mode::polarization(name)]).expect("single mode")
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.modes.iter().map(Mode::dim).product()
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m.name == name)
            .ok_or_else(|| Error::UnknownMode(name.to_string()))
    }

    pub fn mode(&self, name: &str) -> Result<&Mode> {
        Ok(&self.modes[self.position(name)?])
    }

    /// Concatenation `self ⊗ other`.
    pub fn concat(&self, other: &HilbertLayout) -> Result<Self> {
        let mut modes = self.modes.to_vec();
        modes.extend(other.modes.iter().cloned());
        Self::new(modes)
    }

    /// Layout of just the named modes, in the given order.
    pub fn sublayout<S: AsRef<str>>(&self, names: &[S]) -> Result<Self> {
        let modes = names
            .iter()
            .map(|n| self.mode(n.as_ref()).cloned())
            .collect::<Result<Vec<_>>>()?;
        Self::new(modes)
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.modes.len()];
        for (k, m) in self.modes.iter().enumerate().rev() {
            digits[k] = index % m.dim();
            index /= m.dim();
        }
        digits
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(self.modes.iter())
            .fold(0, |acc, (d, m)| acc * m.dim() + d)
    }

    /// Index of the basis ket named by one label per mode.
    pub fn index_of_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<usize> {
        if labels.len() != self.modes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.modes.len(),
                found: labels.len(),
            });
        }
        let digits = self
            .modes
            .iter()
            .zip(labels)
            .map(|(m, l)| m.label_index(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.index_of(&digits))
    }

    pub fn labels_of(&self, index: usize) -> Vec<&str> {
        self.digits(index)
            .into_iter()
            .zip(self.modes.iter())
            .map(|(d, m)| m.labels[d].as_str())
            .collect()
    }
}

impl fmt::Debug for HilbertLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.modes.iter().map(|m| m.name.as_str()))
            .finish()
    }
}
