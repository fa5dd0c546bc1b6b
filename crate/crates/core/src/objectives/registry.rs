//! Named benchmark problems.
//!
//! Hubbard problems are `H1`..`H6`; the bare ID and the `-d` suffix are
//! noise-free, the `-n` suffix attaches the default shot/readout noise.
//! Synthetic problems are `sphere-<d>`, `rastrigin-2`, `ackley-<d>` and
//! `twowells-<d>`, again with optional `-d`/`-n` suffixes.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use crate::design::SearchDomain;
use crate::error::{OptError, Result};
use crate::objectives::hubbard::{HubbardSpec, HvaModel};
use crate::objectives::noise::{NoiseSpec, NoisyObjective};
use crate::objectives::synthetic::{synthetic_suite, SyntheticKind, SyntheticProblem};
use crate::objectives::Objective;

#[derive(Debug, Clone)]
pub enum ProblemSource {
    Hubbard(Arc<HvaModel>),
    Synthetic(Arc<SyntheticProblem>),
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub id: String,
    pub description: String,
    pub domain: SearchDomain,
    /// Known global minimum of the noise-free objective (exact ground energy
    /// for Hubbard problems).
    pub reference_min: f64,
    /// Known global minimizers, where available.
    pub minimizers: Vec<Vec<f64>>,
    /// `(min, max)` bracket of the objective, used by the noise model.
    pub value_range: (f64, f64),
    /// Noise applied unless the caller overrides it.
    pub default_noise: Option<NoiseSpec>,
    pub source: ProblemSource,
}

/// Summary line for listings.
#[derive(Debug, Clone, Serialize)]
pub struct ProblemInfo {
    pub id: String,
    pub dim: usize,
    pub reference_min: f64,
    pub noisy: bool,
    pub description: String,
}

struct HubbardEntry {
    name: &'static str,
    spec: fn() -> HubbardSpec,
    what: &'static str,
    /// Per-coordinate bounds of the search box.
    bounds: (f64, f64),
}

// The two-site landscapes repeat with period pi/2 in the hopping angle and pi
// in the interaction angle; [0, pi/4]^2 holds exactly one ground-state well.
const TWO_SITE_BOUNDS: (f64, f64) = (0.0, PI / 4.0);
// Larger ansatz landscapes: multistart descents from this box all reach the
// same minimum value.
const GRID_BOUNDS: (f64, f64) = (-PI / 4.0, PI / 4.0);

const HUBBARD: &[HubbardEntry] = &[
    HubbardEntry {
        name: "H1",
        bounds: TWO_SITE_BOUNDS,
        spec: || HubbardSpec::new(2, 1, 1, 0, 1),
        what: "2x1 grid, one up electron, 1 layer",
    },
    HubbardEntry {
        name: "H2",
        bounds: TWO_SITE_BOUNDS,
        spec: || HubbardSpec::new(2, 1, 1, 1, 1),
        what: "2x1 grid, half filling, 1 layer",
    },
    HubbardEntry {
        name: "H3",
        bounds: GRID_BOUNDS,
        spec: || HubbardSpec::new(2, 2, 1, 1, 4).with_closing_interaction(),
        what: "2x2 grid, (1,1) filling, 4 layers + closing interaction",
    },
    HubbardEntry {
        name: "H4",
        bounds: GRID_BOUNDS,
        spec: || HubbardSpec::new(2, 2, 2, 2, 7),
        what: "2x2 grid, half filling, 7 layers",
    },
    HubbardEntry {
        name: "H5",
        bounds: GRID_BOUNDS,
        spec: || HubbardSpec::new(2, 2, 3, 3, 4).with_closing_interaction(),
        what: "2x2 grid, (3,3) filling, 4 layers + closing interaction",
    },
    HubbardEntry {
        name: "H6",
        bounds: GRID_BOUNDS,
        spec: || HubbardSpec::new(3, 2, 1, 1, 10),
        what: "3x2 grid, (1,1) filling, 10 layers",
    },
];

const SYNTHETIC_DIMS: &[(&str, SyntheticKind, &[usize])] = &[
    ("sphere", SyntheticKind::Sphere, &[2, 5, 9]),
    ("rastrigin", SyntheticKind::Rastrigin2, &[2]),
    ("ackley", SyntheticKind::ShiftedAckley, &[2, 5, 9]),
    ("twowells", SyntheticKind::TwoWellsND, &[2, 5, 9]),
];

fn split_suffix(id: &str) -> (&str, bool) {
    if let Some(base) = id.strip_suffix("-n") {
        (base, true)
    } else if let Some(base) = id.strip_suffix("-d") {
        (base, false)
    } else {
        (id, false)
    }
}

/// Resolve a registry ID.
pub fn lookup(id: &str) -> Result<Problem> {
    let (base, noisy) = split_suffix(id.trim());
    let base = base.strip_suffix("-ish").unwrap_or(base);
    let default_noise = noisy.then(NoiseSpec::default);

    if let Some(entry) = HUBBARD.iter().find(|e| e.name.eq_ignore_ascii_case(base)) {
        let spec = (entry.spec)();
        let model = HvaModel::new(&spec)?;
        let d = model.n_params();
        return Ok(Problem {
            id: id.to_string(),
            description: format!("Hubbard {} ({d} parameters)", entry.what),
            domain: SearchDomain::cube(d, entry.bounds.0, entry.bounds.1)?,
            reference_min: model.ground_energy(),
            minimizers: Vec::new(),
            value_range: model.spectrum_range(),
            default_noise,
            source: ProblemSource::Hubbard(Arc::new(model)),
        });
    }

    let unknown = || OptError::UnknownProblem(id.to_string());
    let (family, dim) = base.rsplit_once('-').ok_or_else(unknown)?;
    let d: usize = dim.parse().map_err(|_| unknown())?;
    let kind = SYNTHETIC_DIMS
        .iter()
        .find(|(name, _, _)| name.eq_ignore_ascii_case(family))
        .map(|(_, k, _)| *k)
        .ok_or_else(unknown)?;
    let p = synthetic_suite(kind, d)?;
    Ok(Problem {
        id: id.to_string(),
        description: format!("{} in {d} dimensions", kind.as_str()),
        domain: p.domain().clone(),
        reference_min: p.min_value(),
        minimizers: p.minimizers().to_vec(),
        value_range: p.value_range(),
        default_noise,
        source: ProblemSource::Synthetic(Arc::new(p)),
    })
}

/// Representative registry IDs (synthetic families accept other dimensions too).
pub fn list() -> Vec<String> {
    let mut out = Vec::new();
    for e in HUBBARD {
        out.push(e.name.to_string());
        out.push(format!("{}-n", e.name));
    }
    for (name, _, dims) in SYNTHETIC_DIMS {
        for d in *dims {
            out.push(format!("{name}-{d}"));
            out.push(format!("{name}-{d}-n"));
        }
    }
    out
}

impl Problem {
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn info(&self) -> ProblemInfo {
        ProblemInfo {
            id: self.id.clone(),
            dim: self.dim(),
            reference_min: self.reference_min,
            noisy: self.default_noise.is_some(),
            description: self.description.clone(),
        }
    }

    /// Noise-free objective.
    pub fn clean_objective(&self) -> Arc<dyn Objective> {
        match &self.source {
            ProblemSource::Hubbard(m) => m.clone(),
            ProblemSource::Synthetic(p) => p.clone(),
        }
    }

    /// Objective with `noise` applied (`None` gives the noise-free objective).
    pub fn objective(&self, noise: Option<&NoiseSpec>) -> Result<Arc<dyn Objective>> {
        let clean = self.clean_objective();
        match noise {
            None => Ok(clean),
            Some(n) => Ok(Arc::new(NoisyObjective::new(clean, n.clone(), self.value_range)?)),
        }
    }

    /// Objective with the registry's default noise, on the given stream.
    pub fn default_objective(&self, rng_stream: u64) -> Result<Arc<dyn Objective>> {
        let noise = self.default_noise.clone().map(|n| n.with_stream(rng_stream));
        self.objective(noise.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hubbard_ids_resolve() {
        let h1 = lookup("H1").unwrap();
        assert_eq!(h1.dim(), 2);
        assert!((h1.reference_min + 1.0).abs() < 1e-12);
        let h2 = lookup("H2-d").unwrap();
        assert!((h2.reference_min - (1.0 - 5f64.sqrt())).abs() < 1e-10);
        assert!(h2.default_noise.is_none());
        let h3 = lookup("H3-n").unwrap();
        assert_eq!(h3.dim(), 9);
        assert!(h3.default_noise.is_some());
        assert_eq!(lookup("H3-ish").unwrap().dim(), 9);
    }

    #[test]
    fn synthetic_ids_resolve() {
        let s = lookup("sphere-5").unwrap();
        assert_eq!(s.dim(), 5);
        assert_eq!(s.reference_min, 0.0);
        assert_eq!(lookup("twowells-9").unwrap().dim(), 9);
        assert_eq!(lookup("sphere-3").unwrap().dim(), 3);
    }

    #[test]
    fn every_listed_id_resolves() {
        for id in list() {
            lookup(&id).unwrap_or_else(|e| panic!("{id}: {e}"));
        }
    }

    #[test]
    fn unknown_ids_rejected() {
        for id in ["H9", "cube-3", "sphere-x", "", "rastrigin-3"] {
            assert!(lookup(id).is_err(), "{id}");
        }
    }

    #[test]
    fn noisy_objective_differs_by_counter() {
        let p = lookup("H2-n").unwrap();
        let f = p.default_objective(3).unwrap();
        let x = [0.1, 0.2];
        assert_ne!(f.evaluate(&x, 0).unwrap(), f.evaluate(&x, 1).unwrap());
        assert_eq!(f.evaluate(&x, 0).unwrap(), f.evaluate(&x, 0).unwrap());
    }
}
