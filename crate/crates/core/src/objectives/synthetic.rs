//! Synthetic test functions with known global minima.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::design::SearchDomain;
use crate::error::{check_dim, OptError, Result};
use crate::objectives::Objective;

pub const MAX_SYNTHETIC_DIM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SyntheticKind {
    Sphere,
    Rastrigin2,
    ShiftedAckley,
    TwoWellsND,
}

impl SyntheticKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SyntheticKind::Sphere => "Sphere",
            SyntheticKind::Rastrigin2 => "Rastrigin2",
            SyntheticKind::ShiftedAckley => "ShiftedAckley",
            SyntheticKind::TwoWellsND => "TwoWellsND",
        }
    }
}

/// Parameters of the two-Gaussian landscape on `[0,1]^d`.
pub const TWO_WELLS_GLOBAL_CENTER: f64 = 0.2;
pub const TWO_WELLS_LOCAL_CENTER: f64 = 0.65;
pub const TWO_WELLS_GLOBAL_DEPTH: f64 = 1.0;
pub const TWO_WELLS_LOCAL_DEPTH: f64 = 0.8;
pub const TWO_WELLS_WIDTH: f64 = 0.35;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticProblem {
    kind: SyntheticKind,
    domain: SearchDomain,
    /// Sphere/Ackley: optimum location; TwoWells: the two well centers.
    centers: Vec<Vec<f64>>,
    minimizers: Vec<Vec<f64>>,
    min_value: f64,
    local_minima: Vec<(Vec<f64>, f64)>,
    value_range: (f64, f64),
}

/// Build one of the synthetic objectives in dimension `d`.
pub fn synthetic_suite(kind: SyntheticKind, d: usize) -> Result<SyntheticProblem> {
    let unsupported = || OptError::Unsupported(format!("{} is not available in dimension {d}", kind.as_str()));
    match kind {
        SyntheticKind::Rastrigin2 if d != 2 => return Err(unsupported()),
        SyntheticKind::TwoWellsND if !(2..=MAX_SYNTHETIC_DIM).contains(&d) => return Err(unsupported()),
        _ if !(1..=MAX_SYNTHETIC_DIM).contains(&d) => return Err(unsupported()),
        _ => {}
    }
    let p = match kind {
        SyntheticKind::Sphere => {
            let c = sphere_center(d);
            let worst: f64 = c.iter().map(|v| v.max(1.0 - v).powi(2)).sum();
            SyntheticProblem {
                kind,
                domain: SearchDomain::unit(d)?,
                centers: vec![c.clone()],
                minimizers: vec![c],
                min_value: 0.0,
                local_minima: Vec::new(),
                value_range: (0.0, worst),
            }
        }
        SyntheticKind::Rastrigin2 => SyntheticProblem {
            kind,
            domain: SearchDomain::cube(2, -2.0, 2.0)?,
            centers: vec![vec![0.0, 0.0]],
            minimizers: vec![vec![0.0, 0.0]],
            min_value: 0.0,
            local_minima: Vec::new(),
            value_range: (0.0, 44.5),
        },
        SyntheticKind::ShiftedAckley => {
            let c = ackley_shift(d);
            SyntheticProblem {
                kind,
                domain: SearchDomain::cube(d, -2.0, 2.0)?,
                centers: vec![c.clone()],
                minimizers: vec![c],
                min_value: 0.0,
                local_minima: Vec::new(),
                value_range: (0.0, 20.0 + E),
            }
        }
        SyntheticKind::TwoWellsND => {
            let a = vec![TWO_WELLS_GLOBAL_CENTER; d];
            let b = vec![TWO_WELLS_LOCAL_CENTER; d];
            let mut p = SyntheticProblem {
                kind,
                domain: SearchDomain::unit(d)?,
                centers: vec![a.clone(), b.clone()],
                minimizers: Vec::new(),
                min_value: 0.0,
                local_minima: Vec::new(),
                value_range: (-TWO_WELLS_GLOBAL_DEPTH, 0.0),
            };
            // Both wells are symmetric about the line through the two centers,
            // so every minimum lies on it.
            let mut minima = p.minima_on_line(&a, &b);
            minima.sort_by(|x, y| x.1.total_cmp(&y.1));
            let (xg, fg) = minima.remove(0);
            p.minimizers = vec![xg];
            p.min_value = fg;
            p.local_minima = minima;
            p.value_range = (fg, 0.0);
            p
        }
    };
    Ok(p)
}

fn sphere_center(d: usize) -> Vec<f64> {
    // Deterministic, off-center in every coordinate.
    (0..d).map(|j| 0.3 + 0.4 * ((j as f64 + 1.0) * 0.618_033_988_749_895).fract()).collect()
}

fn ackley_shift(d: usize) -> Vec<f64> {
    (0..d).map(|j| if j % 2 == 0 { 0.37 } else { -0.29 }).collect()
}

impl SyntheticProblem {
    pub fn kind(&self) -> SyntheticKind {
        self.kind
    }

    pub fn domain(&self) -> &SearchDomain {
        &self.domain
    }

    /// Global minimizers.
    pub fn minimizers(&self) -> &[Vec<f64>] {
        &self.minimizers
    }

    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    /// Known non-global local minima (only tracked for the two-well landscape).
    pub fn local_minima(&self) -> &[(Vec<f64>, f64)] {
        &self.local_minima
    }

    /// Bracket `(min, max)` of the function over its domain.
    pub fn value_range(&self) -> (f64, f64) {
        self.value_range
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self.kind {
            SyntheticKind::Sphere => x.iter().zip(&self.centers[0]).map(|(a, c)| (a - c).powi(2)).sum(),
            SyntheticKind::Rastrigin2 => {
                10.0 * x.len() as f64 + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
            }
            SyntheticKind::ShiftedAckley => {
                let n = x.len() as f64;
                let z = x.iter().zip(&self.centers[0]).map(|(a, c)| a - c);
                let sq: f64 = z.clone().map(|v| v * v).sum::<f64>() / n;
                let cs: f64 = z.map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
                // Rounding can leave a residue of order 1e-15 at the optimum.
                (-20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E).max(0.0)
            }
            SyntheticKind::TwoWellsND => {
                let s2 = 2.0 * TWO_WELLS_WIDTH * TWO_WELLS_WIDTH;
                let ra: f64 = x.iter().zip(&self.centers[0]).map(|(a, c)| (a - c).powi(2)).sum();
                let rb: f64 = x.iter().zip(&self.centers[1]).map(|(a, c)| (a - c).powi(2)).sum();
                -TWO_WELLS_GLOBAL_DEPTH * (-ra / s2).exp() - TWO_WELLS_LOCAL_DEPTH * (-rb / s2).exp()
            }
        }
    }

    /// Local minima of the restriction to the line `a + t (b - a)`, `t` in `[-1, 2]`.
    fn minima_on_line(&self, a: &[f64], b: &[f64]) -> Vec<(Vec<f64>, f64)> {
        let point = |t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };
        let f = |t: f64| self.value(&point(t));
        let n = 3000;
        let ts: Vec<f64> = (0..=n).map(|i| -1.0 + 3.0 * i as f64 / n as f64).collect();
        let fs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut out = Vec::new();
        for i in 1..n {
            if !(fs[i] <= fs[i - 1] && fs[i] < fs[i + 1]) {
                continue;
            }
            // Golden-section search on the bracketing grid cells.
            let (mut lo, mut hi) = (ts[i - 1], ts[i + 1]);
            let mut x1 = hi - g * (hi - lo);
            let mut x2 = lo + g * (hi - lo);
            let (mut f1, mut f2) = (f(x1), f(x2));
            for _ in 0..100 {
                if f1 < f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - g * (hi - lo);
                    f1 = f(x1);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + g * (hi - lo);
                    f2 = f(x2);
                }
            }
            let t = 0.5 * (lo + hi);
            out.push((point(t), f(t)));
        }
        out
    }
}

impl Objective for SyntheticProblem {
    fn dim(&self) -> usize {
        self.domain.dim()
    }

    fn evaluate(&self, theta: &[f64], _counter: u64) -> Result<f64> {
        check_dim(self.dim(), theta.len())?;
        Ok(self.value(theta))
    }
}
