//! Exact weak values `⟨post|A|pre⟩ / ⟨post|pre⟩` and the interferometer
//! observables they are evaluated on.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{
    c64, embed_operator, inner_product, projector, Complex64, HilbertLayout, LinearOperator, Mode,
    ModeKind, QuantumState,
};

/// Default bound on |⟨post|pre⟩| below which the weak value is undefined.
pub const OVERLAP_FLOOR: f64 = 1e-12;

/// Standard mode names for the one- and two-photon setups.
pub const PATH: &str = "path";
pub const POL: &str = "pol";
pub const PATH_PRIME: &str = "path'";
pub const POL_PRIME: &str = "pol'";

pub fn weak_value(a: &LinearOperator, pre: &QuantumState, post: &QuantumState) -> Result<Complex64> {
    weak_value_with_floor(a, pre, post, OVERLAP_FLOOR)
}

pub fn weak_value_with_floor(
    a: &LinearOperator,
    pre: &QuantumState,
    post: &QuantumState,
    floor: f64,
) -> Result<Complex64> {
    let overlap = checked_overlap(pre, post, floor)?;
    let numerator = inner_product(post, &a.apply(pre)?)?;
    Ok(numerator / overlap)
}

fn checked_overlap(pre: &QuantumState, post: &QuantumState, floor: f64) -> Result<Complex64> {
    let overlap = inner_product(post, pre)?;
    if overlap.norm() <= floor {
        return Err(Error::OrthogonalSelection {
            overlap: overlap.norm(),
            floor,
        });
    }
    Ok(overlap)
}

/// |⟨post|pre⟩|²
pub fn postselection_probability(pre: &QuantumState, post: &QuantumState) -> Result<f64> {
    Ok(inner_product(post, pre)?.norm_sqr())
}

/// Circular basis `|±⟩ = (|H⟩ ± i|V⟩)/√2` on a single polarization mode.
pub fn circular_basis(pol: &Mode) -> Result<(QuantumState, QuantumState)> {
    if pol.kind() != ModeKind::Polarization || pol.dim() != 2 {
        return Err(Error::WrongModeKind {
            mode: pol.name().to_string(),
            element: "circular basis",
        });
    }
    let layout = HilbertLayout::new(vec![pol.clone()])?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let plus = QuantumState::new(layout.clone(), vec![c64(r, 0.0), c64(0.0, r)])?;
    let minus = QuantumState::new(layout, vec![c64(r, 0.0), c64(0.0, -r)])?;
    Ok((plus, minus))
}

/// `σ_z = |+⟩⟨+| − |−⟩⟨−|` on a single polarization mode.
pub fn sigma_z(pol: &Mode) -> Result<LinearOperator> {
    let (plus, minus) = circular_basis(pol)?;
    projector(&plus)?
        .add(&projector(&minus)?.scale(c64(-1.0, 0.0)))?
        .mark_hermitian()
}

/// `|label⟩⟨label|` on `path_mode`, identity elsewhere.
pub fn position_projector(
    layout: &HilbertLayout,
    path_mode: &str,
    label: &str,
) -> Result<LinearOperator> {
    let mode = layout.mode(path_mode)?;
    let ket = QuantumState::basis(HilbertLayout::new(vec![mode.clone()])?, &[label])?;
    embed_operator(&projector(&ket)?, &[path_mode], layout)
}

/// `Π_label ⊗ σ_z` on (`path_mode`, `pol_mode`).
pub fn polarization_observable(
    layout: &HilbertLayout,
    path_mode: &str,
    label: &str,
    pol_mode: &str,
) -> Result<LinearOperator> {
    let pi = position_projector(layout, path_mode, label)?;
    let sz = embed_operator(&sigma_z(layout.mode(pol_mode)?)?, &[pol_mode], layout)?;
    pi.compose(&sz)?.mark_hermitian()
}

/// The eight which-arm observables of the one- and two-photon setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArmObservable {
    PiL,
    PiR,
    PiLPrime,
    PiRPrime,
    SigmaZL,
    SigmaZR,
    SigmaZPrimeLPrime,
    SigmaZPrimeRPrime,
}

impl ArmObservable {
    pub const SINGLE_CAT: [ArmObservable; 4] = [Self::PiL, Self::PiR, Self::SigmaZL, Self::SigmaZR];
    pub const GRIN_SWAP: [ArmObservable; 8] = [
        Self::PiL,
        Self::PiR,
        Self::PiLPrime,
        Self::PiRPrime,
        Self::SigmaZL,
        Self::SigmaZR,
        Self::SigmaZPrimeLPrime,
        Self::SigmaZPrimeRPrime,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::PiL => "Pi_L",
            Self::PiR => "Pi_R",
            Self::PiLPrime => "Pi_L'",
            Self::PiRPrime => "Pi_R'",
            Self::SigmaZL => "sigma_z^L",
            Self::SigmaZR => "sigma_z^R",
            Self::SigmaZPrimeLPrime => "sigma_z'^L'",
            Self::SigmaZPrimeRPrime => "sigma_z'^R'",
        }
    }

    /// (path mode, arm label, polarization mode if σ-type)
    pub fn parts(self) -> (&'static str, &'static str, Option<&'static str>) {
        match self {
            Self::PiL => (PATH, "L", None),
            Self::PiR => (PATH, "R", None),
            Self::PiLPrime => (PATH_PRIME, "L'", None),
            Self::PiRPrime => (PATH_PRIME, "R'", None),
            Self::SigmaZL => (PATH, "L", Some(POL)),
            Self::SigmaZR => (PATH, "R", Some(POL)),
            Self::SigmaZPrimeLPrime => (PATH_PRIME, "L'", Some(POL_PRIME)),
            Self::SigmaZPrimeRPrime => (PATH_PRIME, "R'", Some(POL_PRIME)),
        }
    }

    pub fn build(self, layout: &HilbertLayout) -> Result<LinearOperator> {
        match self.parts() {
            (path, label, None) => position_projector(layout, path, label),
            (path, label, Some(pol)) => polarization_observable(layout, path, label, pol),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakValueEntry {
    pub name: String,
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakValueReport {
    pub entries: Vec<WeakValueEntry>,
    #[serde(serialize_with = "ser_complex")]
    pub postselection_amplitude: Complex64,
    pub postselection_probability: f64,
}

impl WeakValueReport {
    pub fn get(&self, name: &str) -> Option<Complex64> {
        self.entries.iter().find(|e| e.name == name).map(|e| e.value)
    }
}

/// Weak values of every named observable for one pre/post pair.
pub fn weak_value_report(
    pre: &QuantumState,
    post: &QuantumState,
    observables: &[(String, LinearOperator)],
) -> Result<WeakValueReport> {
    weak_value_report_with_floor(pre, post, observables, OVERLAP_FLOOR)
}

pub fn weak_value_report_with_floor(
    pre: &QuantumState,
    post: &QuantumState,
    observables: &[(String, LinearOperator)],
    floor: f64,
) -> Result<WeakValueReport> {
    let amplitude = inner_product(post, pre)?;
    let entries = if observables.is_empty() {
        Vec::new()
    } else {
        checked_overlap(pre, post, floor)?;
        observables
            .iter()
            .map(|(name, op)| {
                Ok(WeakValueEntry {
                    name: name.clone(),
                    value: weak_value_with_floor(op, pre, post, floor)?,
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    Ok(WeakValueReport {
        entries,
        postselection_amplitude: amplitude,
        postselection_probability: amplitude.norm_sqr(),
    })
}

/// Best postselection found by [`search_postselections`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchHit {
    pub postselection: QuantumState,
    pub weak_value: Complex64,
}

/// Brute-force search for the postselection maximizing `Re A_w`.
///
/// Candidates are all kets whose amplitudes have real and imaginary parts
/// drawn from `levels`, normalized; candidates with `|⟨post|pre⟩|` at or below
/// `min_overlap` are skipped. Returns `None` if every candidate is skipped.
pub fn search_postselections(
    a: &LinearOperator,
    pre: &QuantumState,
    levels: &[f64],
    min_overlap: f64,
) -> Result<Option<SearchHit>> {
    let dim = pre.dim();
    let values: Vec<Complex64> = levels
        .iter()
        .flat_map(|&re| levels.iter().map(move |&im| c64(re, im)))
        .collect();
    let total = values.len().checked_pow(dim as u32).ok_or_else(|| {
        Error::InvalidArgument(format!("search grid too large for dimension {dim}"))
    })?;
    let mut best: Option<SearchHit> = None;
    let mut amps = vec![c64(0.0, 0.0); dim];
    for mut code in 0..total {
        for z in amps.iter_mut() {
            *z = values[code % values.len()];
            code /= values.len();
        }
        let Ok(post) = QuantumState::new(pre.layout().clone(), amps.clone())?.normalize() else {
            continue;
        };
        match weak_value_with_floor(a, pre, &post, min_overlap) {
            Ok(w) => {
                if best.as_ref().is_none_or(|b| w.re > b.weak_value.re) {
                    best = Some(SearchHit {
                        postselection: post,
                        weak_value: w,
                    });
                }
            }
            Err(Error::OrthogonalSelection { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(best)
}
