//! Search domains, evaluated samples, and space-filling initial designs.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, OptError, Result};
use crate::rng;

/// Axis-aligned box `[lower, upper]` in parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(OptError::InvalidDomain("zero-dimensional domain".into()));
        }
        if lower.len() != upper.len() {
            return Err(OptError::InvalidDomain(format!(
                "lower has {} entries, upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(OptError::InvalidDomain(format!(
                    "dimension {j}: need finite lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval `[lo, hi]` in every one of `dim` dimensions.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn unit(dim: usize) -> Result<Self> {
        Self::cube(dim, 0.0, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn widths(&self) -> Vec<f64> {
        (0..self.dim()).map(|j| self.width(j)).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| 0.5 * (lo + hi))
            .collect()
    }

    pub fn diagonal(&self) -> f64 {
        self.widths().iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
    }

    /// Map a point of the box to the unit cube.
    pub fn to_unit(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .enumerate()
            .map(|(j, x)| (x - self.lower[j]) / self.width(j))
            .collect()
    }

    /// Map a unit-cube point back into the box.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(j, v)| self.lower[j] + v * self.width(j))
            .collect()
    }

    /// Smallest distance from `theta` to any face of the box.
    pub fn distance_to_boundary(&self, theta: &[f64]) -> f64 {
        theta
            .iter()
            .enumerate()
            .map(|(j, x)| (x - self.lower[j]).min(self.upper[j] - x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Which stage of a run produced a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    InitDesign,
    GpIteration,
    LocalSearch,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::InitDesign => "InitDesign",
            Phase::GpIteration => "GpIteration",
            Phase::LocalSearch => "LocalSearch",
        }
    }
}

/// One objective evaluation together with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedSample {
    pub theta: Vec<f64>,
    pub value: f64,
    /// 1-based global evaluation counter within a run.
    pub eval_index: usize,
    pub phase: Phase,
    /// Index of the local search that produced this sample, if any.
    pub seed_index: Option<usize>,
}

/// Latin hypercube design of `n` points in `domain`.
///
/// Each axis is cut into `n` equal bins; an independent random permutation
/// per axis assigns bins to points and each coordinate is drawn uniformly
/// inside its bin.
pub fn latin_hypercube(domain: &SearchDomain, n: usize, rng_seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(OptError::InvalidArgument("latin hypercube needs n >= 1".into()));
    }
    let d = domain.dim();
    let mut rng = rng::seeded(rng_seed);
    let mut points = vec![vec![0.0; d]; n];
    let mut bins: Vec<usize> = (0..n).collect();
    for j in 0..d {
        bins.shuffle(&mut rng);
        let (lo, w) = (domain.lower()[j], domain.width(j));
        for (i, point) in points.iter_mut().enumerate() {
            let u: f64 = rng.random();
            let x = lo + w * (bins[i] as f64 + u) / n as f64;
            // rounding can push the top bin a hair past the bound
            point[j] = x.min(domain.upper()[j]);
        }
    }
    Ok(points)
}

/// Clamp each coordinate of `theta` into the box.
pub fn clip_to_domain(theta: &[f64], domain: &SearchDomain) -> Result<Vec<f64>> {
    check_dim(domain.dim(), theta.len())?;
    Ok(theta
        .iter()
        .enumerate()
        .map(|(j, x)| x.clamp(domain.lower()[j], domain.upper()[j]))
        .collect())
}

/// The box `center ± half_width` intersected with `domain`.
pub fn sub_box(center: &[f64], half_width: f64, domain: &SearchDomain) -> Result<SearchDomain> {
    check_dim(domain.dim(), center.len())?;
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(OptError::InvalidArgument(format!(
            "sub-box half width must be positive, got {half_width}"
        )));
    }
    let center = clip_to_domain(center, domain)?;
    let lower = center
        .iter()
        .zip(domain.lower())
        .map(|(c, lo)| (c - half_width).max(*lo))
        .collect();
    let upper = center
        .iter()
        .zip(domain.upper())
        .map(|(c, hi)| (c + half_width).min(*hi))
        .collect();
    SearchDomain::new(lower, upper)
}

/// Euclidean distance.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin_counts(points: &[Vec<f64>], domain: &SearchDomain, j: usize) -> Vec<usize> {
        let n = points.len();
        let mut counts = vec![0; n];
        for p in points {
            let t = (p[j] - domain.lower()[j]) / domain.width(j);
            let b = ((t * n as f64).floor() as usize).min(n - 1);
            counts[b] += 1;
        }
        counts
    }

    #[test]
    fn domain_rejects_bad_bounds() {
        assert!(SearchDomain::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(SearchDomain::new(vec![0.0], vec![1.0, 2.0]).is_err());
        assert!(SearchDomain::new(vec![], vec![]).is_err());
        assert!(SearchDomain::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn lhs_single_point() {
        let dom = SearchDomain::unit(2).unwrap();
        let pts = latin_hypercube(&dom, 1, 7).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(dom.contains(&pts[0]));
    }

    #[test]
    fn lhs_four_points_axis_zero() {
        let dom = SearchDomain::unit(2).unwrap();
        let pts = latin_hypercube(&dom, 4, 7).unwrap();
        assert_eq!(bin_counts(&pts, &dom, 0), vec![1, 1, 1, 1]);
    }

    #[test]
    fn lhs_rectangular_domain() {
        let dom = SearchDomain::new(vec![-2.0, 0.0], vec![2.0, 10.0]).unwrap();
        let pts = latin_hypercube(&dom, 8, 3).unwrap();
        assert!(pts.iter().all(|p| dom.contains(p)));
        for j in 0..2 {
            assert_eq!(bin_counts(&pts, &dom, j), vec![1; 8]);
        }
    }

    #[test]
    fn lhs_rejects_zero() {
        let dom = SearchDomain::unit(2).unwrap();
        assert!(latin_hypercube(&dom, 0, 1).is_err());
    }

    #[test]
    fn clip_examples() {
        let unit = SearchDomain::unit(2).unwrap();
        assert_eq!(clip_to_domain(&[1.5, -0.2], &unit).unwrap(), vec![1.0, 0.0]);
        assert_eq!(clip_to_domain(&[0.5, 0.5], &unit).unwrap(), vec![0.5, 0.5]);
        let dom = SearchDomain::new(vec![-2.0, 0.0], vec![2.0, 10.0]).unwrap();
        assert_eq!(clip_to_domain(&[-3.0, 12.0], &dom).unwrap(), vec![-2.0, 10.0]);
        assert!(clip_to_domain(&[0.0], &dom).is_err());
    }

    #[test]
    fn sub_box_examples() {
        let unit = SearchDomain::unit(2).unwrap();
        let b = sub_box(&[0.5, 0.5], 0.05, &unit).unwrap();
        for j in 0..2 {
            assert!((b.lower()[j] - 0.45).abs() < 1e-15);
            assert!((b.upper()[j] - 0.55).abs() < 1e-15);
        }
        let b = sub_box(&[0.02, 0.5], 0.05, &unit).unwrap();
        assert_eq!(b.lower()[0], 0.0);
        assert!((b.upper()[0] - 0.07).abs() < 1e-15);
        assert!((b.lower()[1] - 0.45).abs() < 1e-15);
        let b = sub_box(&[1.0, 1.0], 0.2, &unit).unwrap();
        assert_eq!(b.lower(), &[0.8, 0.8]);
        assert_eq!(b.upper(), &[1.0, 1.0]);
        assert!(sub_box(&[0.5, 0.5], 0.0, &unit).is_err());
        assert!(sub_box(&[0.5, 0.5], -1.0, &unit).is_err());
    }
}
