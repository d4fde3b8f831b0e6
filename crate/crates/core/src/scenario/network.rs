use crate::error::{Error, Result};
use crate::optics::{complete_partial_isometry, ElementKind, OpticalElement, RoutingConstraint};
use crate::qcore::{c64, HilbertLayout, LinearOperator, QuantumState};
use crate::weakval::{PATH, POL};

/// One step of a network. Synthesized elements carry no `element`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkStage {
    pub name: String,
    pub element: Option<OpticalElement>,
    pub unitary: LinearOperator,
}

/// A unitary pipeline followed by named port projectors that resolve the
/// identity.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorNetwork {
    pub layout: HilbertLayout,
    pub stages: Vec<NetworkStage>,
    pub ports: Vec<(String, LinearOperator)>,
}

impl DetectorNetwork {
    pub fn stage_index(&self, name: &str) -> Option<usize> {
        self.stages.iter().position(|s| s.name == name)
    }

    /// Runs `input` through the stages from `from` on.
    pub fn propagate_from(&self, input: &QuantumState, from: usize) -> Result<QuantumState> {
        let mut s = input.clone();
        for stage in &self.stages[from.min(self.stages.len())..] {
            s = stage.unitary.apply(&s)?;
        }
        Ok(s)
    }

    pub fn propagate(&self, input: &QuantumState) -> Result<QuantumState> {
        self.propagate_from(input, 0)
    }

    /// Click probability of every port for a normalized input entering at
    /// stage `from`.
    pub fn port_probabilities_from(
        &self,
        input: &QuantumState,
        from: usize,
    ) -> Result<Vec<(String, f64)>> {
        input.ensure_normalized()?;
        let out = self.propagate_from(input, from)?;
        self.ports
            .iter()
            .map(|(name, p)| {
                let v = p.apply(&out)?;
                Ok((name.clone(), v.norm_sqr()))
            })
            .collect()
    }

    pub fn port_probabilities(&self, input: &QuantumState) -> Result<Vec<(String, f64)>> {
        self.port_probabilities_from(input, 0)
    }

    pub fn port(&self, name: &str) -> Option<&LinearOperator> {
        self.ports.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }
}

fn element_stage(name: &str, element: OpticalElement, layout: &HilbertLayout) -> Result<NetworkStage> {
    Ok(NetworkStage {
        name: name.to_string(),
        unitary: element.unitary(layout)?,
        element: Some(element),
    })
}

fn basis_projector(layout: &HilbertLayout, kets: &[[&str; 2]]) -> Result<LinearOperator> {
    let mut m = LinearOperator::identity(layout.clone()).scale(c64(0.0, 0.0));
    for labels in kets {
        let k = QuantumState::basis(layout.clone(), labels)?;
        m = m.add(&crate::qcore::projector(&k)?)?;
    }
    m.mark_hermitian()
}

/// The one-photon postselection block on the `(path, pol)` layout:
/// a half-wave plate in arm R, a phase shifter on port R, the routing beam
/// splitter `BS2` and a polarizing beam splitter.
///
/// `BS2` is completed from the single requirement that `(|L⟩+i|R⟩)/√2` leaves
/// through path index 0, the exit facing the PBS; index 1 is the `D2` exit.
/// After the PBS, `D1` sees `|L,H⟩`, `D3` sees `|R,V⟩` and `D2` collects the
/// rest.
pub fn single_cat_detector_network() -> Result<DetectorNetwork> {
    let layout = super::single_cat_layout();
    let path_only = HilbertLayout::single_path(PATH);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let incident = QuantumState::from_terms(
        path_only.clone(),
        &[(c64(r, 0.0), &["L"][..]), (c64(0.0, r), &["R"][..])],
    )?;
    let toward_pbs = QuantumState::basis(path_only.clone(), &["L"])?;
    let bs2 = complete_partial_isometry(&path_only, &[RoutingConstraint::new(incident, toward_pbs)])?;
    let bs2 = crate::qcore::embed_operator(&bs2, &[PATH], &layout)?;
    if !bs2.is_marked_unitary() {
        return Err(Error::NotUnitary {
            deviation: bs2.unitary_deviation(),
        });
    }

    let stages = vec![
        element_stage(
            "HWP",
            OpticalElement::new(ElementKind::HalfWavePlate, &[POL]).in_arm(PATH, "R"),
            &layout,
        )?,
        element_stage(
            "PS",
            OpticalElement::new(ElementKind::PhaseShifter { port: "R".into() }, &[PATH]),
            &layout,
        )?,
        NetworkStage {
            name: "BS2".into(),
            element: None,
            unitary: bs2,
        },
        element_stage(
            "PBS",
            OpticalElement::new(ElementKind::PolarizingBeamSplitter, &[PATH, POL]),
            &layout,
        )?,
    ];
    let ports = vec![
        ("D1".to_string(), basis_projector(&layout, &[["L", "H"]])?),
        ("D2".to_string(), basis_projector(&layout, &[["R", "H"], ["L", "V"]])?),
        ("D3".to_string(), basis_projector(&layout, &[["R", "V"]])?),
    ];
    Ok(DetectorNetwork {
        layout,
        stages,
        ports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ports_resolve_identity() {
        let n = single_cat_detector_network().unwrap();
        let mut sum = n.ports[0].1.clone();
        for (_, p) in &n.ports[1..] {
            sum = sum.add(p).unwrap();
        }
        let id = LinearOperator::identity(n.layout.clone());
        assert!((sum.matrix() - id.matrix()).norm() < 1e-15);
    }

    #[test]
    fn postselected_state_clicks_d1() {
        let n = single_cat_detector_network().unwrap();
        let probs = n.port_probabilities(&super::super::single_cat_postselection()).unwrap();
        assert!((probs[0].1 - 1.0).abs() < 1e-12, "{probs:?}");
    }

    #[test]
    fn d2_dark_for_matched_input() {
        let n = single_cat_detector_network().unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let input = QuantumState::from_terms(
            n.layout.clone(),
            &[(c64(r, 0.0), &["L", "H"][..]), (c64(0.0, r), &["R", "H"][..])],
        )
        .unwrap();
        let at = n.stage_index("BS2").unwrap();
        let probs = n.port_probabilities_from(&input, at).unwrap();
        assert!(probs[1].1 < 1e-12);
    }
}
