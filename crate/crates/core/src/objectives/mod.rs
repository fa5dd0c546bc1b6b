//! Benchmark objectives: Fermi-Hubbard VQE energies, synthetic test
//! functions, and a scalar noise model.

pub mod hubbard;
pub mod noise;
pub mod registry;
pub mod synthetic;

use std::sync::Arc;

use crate::error::{check_dim, Result};

pub use hubbard::{HubbardSpec, HvaModel};
pub use noise::{apply_noise, NoiseSpec, NoisyObjective, Shots};
pub use registry::{list, lookup, Problem, ProblemInfo, ProblemSource};
pub use synthetic::{synthetic_suite, SyntheticKind, SyntheticProblem};

/// A black-box objective to be minimized.
///
/// `counter` identifies the evaluation. Deterministic objectives ignore it;
/// stochastic ones key their noise on it, so an evaluation is reproducible
/// regardless of which thread performs it or in which order.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn evaluate(&self, theta: &[f64], counter: u64) -> Result<f64>;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn evaluate(&self, theta: &[f64], counter: u64) -> Result<f64> {
        (**self).evaluate(theta, counter)
    }
}

impl<T: Objective + ?Sized> Objective for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn evaluate(&self, theta: &[f64], counter: u64) -> Result<f64> {
        (**self).evaluate(theta, counter)
    }
}

impl<T: Objective + ?Sized> Objective for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn evaluate(&self, theta: &[f64], counter: u64) -> Result<f64> {
        (**self).evaluate(theta, counter)
    }
}

/// Adapter turning a closure into an [`Objective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&[f64], u64) -> f64 + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, theta: &[f64], counter: u64) -> Result<f64> {
        check_dim(self.dim, theta.len())?;
        Ok((self.f)(theta, counter))
    }
}

/// Deterministic objective from a plain function of `theta`.
pub fn from_fn<F>(dim: usize, f: F) -> FnObjective<impl Fn(&[f64], u64) -> f64 + Send + Sync>
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    FnObjective {
        dim,
        f: move |x: &[f64], _| f(x),
    }
}

/// Objective whose value may depend on the evaluation counter.
pub fn from_keyed_fn<F>(dim: usize, f: F) -> FnObjective<F>
where
    F: Fn(&[f64], u64) -> f64 + Send + Sync,
{
    FnObjective { dim, f }
}
