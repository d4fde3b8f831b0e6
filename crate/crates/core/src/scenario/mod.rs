//! Pre/post-selection scenarios: the built-in one-photon ("single cat") and
//! two-photon ("grin swap") setups, the `.qcc` text format, the detector
//! network of the one-photon postselection block, and the runner that
//! evaluates weak values exactly, through the pointer model, or by Monte
//! Carlo.

mod expr;
mod format;
mod network;

use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optics::OpticalElement;
use crate::pointer::{self, PointerGrid};
use crate::qcore::{c64, inner_product, tensor_product, HilbertLayout, LinearOperator, Mode, QuantumState};
use crate::rng;
use crate::weakval::{self, ArmObservable, WeakValueReport, PATH, PATH_PRIME, POL, POL_PRIME};

pub use expr::OperatorExpr;
pub use format::{parse_scenario, serialize_scenario};
pub use network::{single_cat_detector_network, DetectorNetwork, NetworkStage};

pub const SINGLE_CAT: &str = "single-cat";
pub const GRIN_SWAP: &str = "grin-swap";

#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub name: String,
    pub expr: OperatorExpr,
    pub operator: LinearOperator,
}

impl Observable {
    pub fn new(name: impl Into<String>, expr: OperatorExpr, layout: &HilbertLayout) -> Result<Self> {
        let operator = expr.build(layout)?;
        Ok(Self {
            name: name.into(),
            expr,
            operator,
        })
    }
}

/// Coupling strength and pointer grid used by the pointer-based modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointerConfig {
    pub g: f64,
    pub grid: PointerGrid,
}

impl Default for PointerConfig {
    fn default() -> Self {
        Self {
            g: pointer::DEFAULT_G,
            grid: PointerGrid::default(),
        }
    }
}

/// A validated pre/post-selection setup.
///
/// `source` is the state as written; `preselection` is `source` after the
/// element pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub layout: HilbertLayout,
    pub source: QuantumState,
    pub elements: Vec<OpticalElement>,
    pub preselection: QuantumState,
    pub postselection: QuantumState,
    pub observables: Vec<Observable>,
    pub pointer: PointerConfig,
}

impl Scenario {
    /// Normalizes both states, applies `elements` to `source` and checks the
    /// selection is not orthogonal. Failures are wrapped in
    /// [`Error::Validation`].
    pub fn new(
        name: impl Into<String>,
        source: QuantumState,
        elements: Vec<OpticalElement>,
        postselection: QuantumState,
        observables: Vec<Observable>,
        pointer: PointerConfig,
    ) -> Result<Self> {
        Self::build(
            name.into(),
            source,
            elements,
            postselection,
            observables,
            pointer,
        )
        .map_err(|e| match e {
            Error::Validation(_) => e,
            other => Error::Validation(Box::new(other)),
        })
    }

    fn build(
        name: String,
        source: QuantumState,
        elements: Vec<OpticalElement>,
        postselection: QuantumState,
        observables: Vec<Observable>,
        pointer: PointerConfig,
    ) -> Result<Self> {
        let layout = source.layout().clone();
        let source = source.normalize()?;
        let postselection = postselection.normalize()?;
        if postselection.layout() != &layout {
            return Err(Error::LayoutMismatch(format!(
                "postselection over {:?}, preselection over {:?}",
                postselection.layout(),
                layout
            )));
        }
        let mut preselection = source.clone();
        for e in &elements {
            preselection = e.unitary(&layout)?.apply(&preselection)?;
        }
        let overlap = inner_product(&postselection, &preselection)?.norm();
        if overlap <= weakval::OVERLAP_FLOOR {
            return Err(Error::OrthogonalSelection {
                overlap,
                floor: weakval::OVERLAP_FLOOR,
            });
        }
        for o in &observables {
            if o.operator.layout() != &layout {
                return Err(Error::LayoutMismatch(format!(
                    "observable `{}` over {:?}",
                    o.name,
                    o.operator.layout()
                )));
            }
        }
        for (i, o) in observables.iter().enumerate() {
            if observables[..i].iter().any(|p| p.name == o.name) {
                return Err(Error::UnknownObservable(format!("{} (duplicated)", o.name)));
            }
        }
        if pointer.g.is_nan() || pointer.g <= 0.0 {
            return Err(Error::ZeroCoupling);
        }
        Ok(Self {
            name,
            layout,
            source,
            elements,
            preselection,
            postselection,
            observables,
            pointer,
        })
    }

    pub fn observable(&self, name: &str) -> Result<&Observable> {
        self.observables
            .iter()
            .find(|o| o.name == name)
            .ok_or_else(|| Error::UnknownObservable(name.to_string()))
    }

    pub fn named_operators(&self) -> Vec<(String, LinearOperator)> {
        self.observables
            .iter()
            .map(|o| (o.name.clone(), o.operator.clone()))
            .collect()
    }

    /// Structure equal and every amplitude within `tol`.
    pub fn approx_eq(&self, other: &Scenario, tol: f64) -> bool {
        let close = |a: &QuantumState, b: &QuantumState| {
            a.layout() == b.layout()
                && a.amplitudes()
                    .iter()
                    .zip(b.amplitudes())
                    .all(|(x, y)| (x - y).norm() <= tol)
        };
        let ops_close = |a: &LinearOperator, b: &LinearOperator| {
            a.layout() == b.layout()
                && a.matrix()
                    .iter()
                    .zip(b.matrix().iter())
                    .all(|(x, y)| (x - y).norm() <= tol)
        };
        self.name == other.name
            && self.layout == other.layout
            && self.elements == other.elements
            && self.pointer == other.pointer
            && close(&self.source, &other.source)
            && close(&self.preselection, &other.preselection)
            && close(&self.postselection, &other.postselection)
            && self.observables.len() == other.observables.len()
            && self
                .observables
                .iter()
                .zip(&other.observables)
                .all(|(a, b)| a.name == b.name && a.expr == b.expr && ops_close(&a.operator, &b.operator))
    }
}

fn arm_observables(layout: &HilbertLayout, which: &[ArmObservable]) -> Result<Vec<Observable>> {
    which
        .iter()
        .map(|&o| Observable::new(o.name(), OperatorExpr::for_arm(o), layout))
        .collect()
}

fn half(prime: bool) -> Result<HilbertLayout> {
    if prime {
        HilbertLayout::new(vec![
            Mode::path(PATH_PRIME).with_labels(&["L'", "R'"]),
            Mode::polarization(POL_PRIME).with_labels(&["H'", "V'"]),
        ])
    } else {
        HilbertLayout::new(vec![Mode::path(PATH), Mode::polarization(POL)])
    }
}

/// `(path, pol)` with bases (L, R), (H, V).
pub fn single_cat_layout() -> HilbertLayout {
    half(false).expect("static layout")
}

/// `(path, pol, path', pol')` with primed labels on the second photon.
pub fn grin_swap_layout() -> HilbertLayout {
    half(false)
        .and_then(|a| a.concat(&half(true)?))
        .expect("static layout")
}

/// Photon after the input beam splitter: `(i|L⟩ + |R⟩)|H⟩/√2`.
pub fn single_cat_preselection() -> QuantumState {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    QuantumState::from_terms(
        single_cat_layout(),
        &[(c64(0.0, r), &["L", "H"][..]), (c64(r, 0.0), &["R", "H"][..])],
    )
    .expect("static state")
}

/// `(|L⟩|H⟩ + |R⟩|V⟩)/√2`
pub fn single_cat_postselection() -> QuantumState {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    QuantumState::from_terms(
        single_cat_layout(),
        &[(c64(r, 0.0), &["L", "H"][..]), (c64(r, 0.0), &["R", "V"][..])],
    )
    .expect("static state")
}

/// `(i|L⟩+|R⟩)|H⟩/√2 ⊗ (|L'⟩+i|R'⟩)|H'⟩/√2`
pub fn grin_swap_preselection() -> QuantumState {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let first = single_cat_preselection();
    let second = QuantumState::from_terms(
        half(true).expect("static layout"),
        &[(c64(r, 0.0), &["L'", "H'"][..]), (c64(0.0, r), &["R'", "H'"][..])],
    )
    .expect("static state");
    tensor_product(&first, &second).expect("disjoint modes")
}

/// Four-qubit cluster state used as the two-photon postselection.
pub fn grin_swap_postselection() -> QuantumState {
    QuantumState::from_terms(
        grin_swap_layout(),
        &[
            (c64(0.5, 0.0), &["L", "H", "R'", "H'"][..]),
            (c64(0.5, 0.0), &["R", "V", "R'", "H'"][..]),
            (c64(0.5, 0.0), &["L", "H", "L'", "V'"][..]),
            (c64(-0.5, 0.0), &["R", "V", "L'", "V'"][..]),
        ],
    )
    .expect("static state")
}

pub fn builtin_single_cat() -> Scenario {
    let layout = single_cat_layout();
    Scenario::new(
        SINGLE_CAT,
        single_cat_preselection(),
        Vec::new(),
        single_cat_postselection(),
        arm_observables(&layout, &ArmObservable::SINGLE_CAT).expect("static observables"),
        PointerConfig::default(),
    )
    .expect("valid built-in")
}

pub fn builtin_grin_swap() -> Scenario {
    let layout = grin_swap_layout();
    Scenario::new(
        GRIN_SWAP,
        grin_swap_preselection(),
        Vec::new(),
        grin_swap_postselection(),
        arm_observables(&layout, &ArmObservable::GRIN_SWAP).expect("static observables"),
        PointerConfig::default(),
    )
    .expect("valid built-in")
}

pub fn builtin(name: &str) -> Option<Scenario> {
    match name {
        SINGLE_CAT => Some(builtin_single_cat()),
        GRIN_SWAP => Some(builtin_grin_swap()),
        _ => None,
    }
}

/// Reads and parses a `.qcc` file. The scenario name defaults to the file stem.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".into());
    format::parse_scenario_named(&text, &stem)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Exact,
    Pointer,
    MonteCarlo,
}

impl RunMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RunMode::Exact => "exact",
            RunMode::Pointer => "pointer",
            RunMode::MonteCarlo => "montecarlo",
        }
    }
}

/// Overrides for a run; `None` falls back to the scenario's pointer config.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunParams {
    pub g: Option<f64>,
    pub grid: Option<PointerGrid>,
    pub seed: u64,
    pub samples: Option<usize>,
    /// Evaluate only the observable at this index. Monte Carlo stream
    /// numbering is unaffected.
    pub only: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableResult {
    pub name: String,
    pub weak_value: num_complex::Complex64,
    /// Pointer-based estimate of the real part.
    pub estimate: Option<f64>,
    /// Momentum-based estimate of the imaginary part (pointer mode only).
    pub estimate_im: Option<f64>,
    pub std_error: Option<f64>,
    pub acceptance_rate: Option<f64>,
    pub accepted: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub scenario: String,
    pub mode: RunMode,
    pub g: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub report: WeakValueReport,
    pub results: Vec<ObservableResult>,
}

/// Evaluates every observable of `s` in the requested mode. Monte Carlo runs
/// give observable `k` the stream seeded `seed + k`.
pub fn run_scenario(s: &Scenario, mode: RunMode, params: &RunParams) -> Result<ScenarioRun> {
    let wrap = |e: Error| Error::Scenario {
        scenario: s.name.clone(),
        source: Box::new(e),
    };
    let report =
        weakval::weak_value_report(&s.preselection, &s.postselection, &s.named_operators())
            .map_err(wrap)?;
    let g = params.g.unwrap_or(s.pointer.g);
    let grid = params.grid.unwrap_or(s.pointer.grid);

    let selected: Vec<usize> = match params.only {
        Some(k) if k >= s.observables.len() => {
            return Err(wrap(Error::InvalidArgument(format!(
                "observable index {k} out of range ({} observables)",
                s.observables.len()
            ))))
        }
        Some(k) => vec![k],
        None => (0..s.observables.len()).collect(),
    };

    let results: Vec<ObservableResult> = match mode {
        RunMode::Exact => selected
            .iter()
            .map(|&k| {
                let e = &report.entries[k];
                ObservableResult {
                    name: e.name.clone(),
                    weak_value: e.value,
                    estimate: None,
                    estimate_im: None,
                    std_error: None,
                    acceptance_rate: None,
                    accepted: None,
                }
            })
            .collect(),
        RunMode::Pointer => selected
            .par_iter()
            .map(|&k| {
                let (o, e) = (&s.observables[k], &report.entries[k]);
                let run =
                    pointer::pointer_run(&s.preselection, &s.postselection, &o.operator, g, &grid)?;
                Ok(ObservableResult {
                    name: o.name.clone(),
                    weak_value: e.value,
                    estimate: Some(run.estimate_re()),
                    estimate_im: Some(run.estimate_im()),
                    std_error: None,
                    acceptance_rate: None,
                    accepted: None,
                })
            })
            .collect::<Result<_>>()
            .map_err(wrap)?,
        RunMode::MonteCarlo => {
            let trials = params.samples.ok_or(Error::EmptySamples).map_err(wrap)?;
            if trials == 0 {
                return Err(wrap(Error::EmptySamples));
            }
            selected
                .par_iter()
                .map(|&k| {
                    let (o, e) = (&s.observables[k], &report.entries[k]);
                    let run = pointer::pointer_run(
                        &s.preselection,
                        &s.postselection,
                        &o.operator,
                        g,
                        &grid,
                    )?;
                    let mut stream = rng::stream(params.seed, k);
                    let outcome = pointer::simulate_trials(&run.postselected, trials, &mut stream);
                    if outcome.readings.is_empty() {
                        return Err(Error::NoAcceptedTrials { trials });
                    }
                    let est = pointer::estimate_weak_value(&outcome.readings, g)?;
                    Ok(ObservableResult {
                        name: o.name.clone(),
                        weak_value: e.value,
                        estimate: Some(est.estimate),
                        estimate_im: None,
                        std_error: Some(est.std_error),
                        acceptance_rate: Some(outcome.acceptance_rate()),
                        accepted: Some(outcome.accepted()),
                    })
                })
                .collect::<Result<_>>()
                .map_err(wrap)?
        }
    };

    let pointer_based = mode != RunMode::Exact;
    let monte_carlo = mode == RunMode::MonteCarlo;
    Ok(ScenarioRun {
        scenario: s.name.clone(),
        mode,
        g: pointer_based.then_some(g),
        seed: monte_carlo.then_some(params.seed),
        samples: if monte_carlo { params.samples } else { None },
        report,
        results,
    })
}
