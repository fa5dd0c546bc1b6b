//! Choosing diverse, low-valued starting points for multistart local search.

use serde::{Deserialize, Serialize};

use crate::design::{distance, EvaluatedSample, SearchDomain};
use crate::error::{OptError, Result};

/// Weights `w_j` trading value (`w`) against distance (`1 - w`) for the
/// second and later starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightPattern {
    weights: Vec<f64>,
}

pub const DEFAULT_CYCLE: [f64; 4] = [0.3, 0.5, 0.7, 0.95];

impl WeightPattern {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(0.0..1.0).contains(*w)) {
            return Err(OptError::InvalidArgument(format!("weights must lie in [0, 1), got {w}")));
        }
        Ok(Self { weights })
    }

    /// The default cycle repeated or truncated to `b_start - 1` entries.
    pub fn default_for(b_start: usize) -> Self {
        Self {
            weights: DEFAULT_CYCLE.iter().copied().cycle().take(b_start.saturating_sub(1)).collect(),
        }
    }

    /// A constant weight for `b_start - 1` steps.
    pub fn constant(w: f64, b_start: usize) -> Result<Self> {
        Self::new(vec![w; b_start.saturating_sub(1)])
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Affine rescale to `[0, 1]`; all zeros when every value is equal.
pub fn scale_values(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(OptError::InvalidArgument("cannot scale an empty list".into()));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return Ok(vec![0.0; values.len()]);
    }
    Ok(values.iter().map(|v| (v - lo) / (hi - lo)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DistanceMetric {
    /// Euclidean in the original parameter units.
    #[default]
    Original,
    /// Euclidean after mapping the domain to the unit cube.
    UnitCube,
}

/// Select `b_start` starting points from `archive`, in selection order.
///
/// Returns indices into `archive`.
pub fn select_start_indices(
    archive: &[EvaluatedSample],
    pattern: &WeightPattern,
    b_start: usize,
    metric: DistanceMetric,
    domain: Option<&SearchDomain>,
) -> Result<Vec<usize>> {
    if archive.is_empty() {
        return Err(OptError::InvalidArgument("archive is empty".into()));
    }
    if b_start == 0 {
        return Err(OptError::InvalidArgument("b_start must be positive".into()));
    }
    if b_start > archive.len() {
        return Err(OptError::InvalidArgument(format!(
            "b_start = {b_start} exceeds archive size {}",
            archive.len()
        )));
    }
    if pattern.len() < b_start - 1 {
        return Err(OptError::InvalidArgument(format!(
            "weight pattern has {} entries, need {}",
            pattern.len(),
            b_start - 1
        )));
    }
    let points: Vec<Vec<f64>> = match (metric, domain) {
        (DistanceMetric::UnitCube, Some(dom)) => archive.iter().map(|s| dom.to_unit(&s.theta)).collect(),
        (DistanceMetric::UnitCube, None) => {
            return Err(OptError::InvalidArgument("unit-cube distances need the domain".into()))
        }
        (DistanceMetric::Original, _) => archive.iter().map(|s| s.theta.clone()).collect(),
    };
    let values: Vec<f64> = archive.iter().map(|s| s.value).collect();
    let v_e = scale_values(&values)?;

    // argmin by (score, eval_index)
    let pick = |candidates: &mut dyn Iterator<Item = (usize, f64)>| {
        candidates
            .min_by(|a, b| a.1.total_cmp(&b.1).then(archive[a.0].eval_index.cmp(&archive[b.0].eval_index)))
            .map(|(i, _)| i)
    };

    let first = pick(&mut values.iter().copied().enumerate()).expect("nonempty archive");
    let mut selected = vec![first];
    let mut taken = vec![false; archive.len()];
    taken[first] = true;
    let mut min_dist: Vec<f64> = points.iter().map(|p| distance(p, &points[first])).collect();

    for step in 0..b_start - 1 {
        let w = pattern.weights()[step];
        let open: Vec<usize> = (0..archive.len()).filter(|&i| !taken[i]).collect();
        let dmax = open.iter().map(|&i| min_dist[i]).fold(f64::NEG_INFINITY, f64::max);
        let dmin = open.iter().map(|&i| min_dist[i]).fold(f64::INFINITY, f64::min);
        let v_delta = |i: usize| if dmax == dmin { 0.0 } else { (dmax - min_dist[i]) / (dmax - dmin) };
        let next = pick(&mut open.iter().map(|&i| (i, w * v_e[i] + (1.0 - w) * v_delta(i)))).expect("open set nonempty");
        selected.push(next);
        taken[next] = true;
        for i in 0..archive.len() {
            min_dist[i] = min_dist[i].min(distance(&points[i], &points[next]));
        }
    }
    Ok(selected)
}

/// Starting points (parameter vectors) chosen by [`select_start_indices`]
/// with Euclidean distances in the original units.
pub fn select_starts(archive: &[EvaluatedSample], pattern: &WeightPattern, b_start: usize) -> Result<Vec<Vec<f64>>> {
    let idx = select_start_indices(archive, pattern, b_start, DistanceMetric::Original, None)?;
    Ok(idx.into_iter().map(|i| archive[i].theta.clone()).collect())
}
