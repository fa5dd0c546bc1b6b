//! Scalar measurement-noise model for energy estimates.
//!
//! Readout misclassification pulls the estimate toward the middle of the
//! spectrum (an upward bias near the ground state); finite sampling adds
//! zero-mean Gaussian jitter whose width scales like `1/sqrt(shots)`.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{OptError, Result};
use crate::objectives::Objective;
use crate::rng;

/// Samples per energy estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Finite(u64),
    Infinite,
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Finite(n) => s.serialize_u64(*n),
            Shots::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Count(u64),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Count(0) => Err(serde::de::Error::custom("shots must be positive")),
            Repr::Count(n) => Ok(Shots::Finite(n)),
            Repr::Word(w) if w.eq_ignore_ascii_case("infinite") => Ok(Shots::Infinite),
            Repr::Word(w) => Err(serde::de::Error::custom(format!(
                "shots must be a positive integer or \"infinite\", got {w:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(default = "default_shots")]
    pub shots: Shots,
    /// Residual readout misclassification rate.
    #[serde(default = "default_misclass")]
    pub misclass: f64,
    #[serde(default)]
    pub rng_stream: u64,
}

fn default_shots() -> Shots {
    Shots::Finite(8192)
}

fn default_misclass() -> f64 {
    0.003
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            shots: default_shots(),
            misclass: default_misclass(),
            rng_stream: 0,
        }
    }
}

impl NoiseSpec {
    pub fn noise_free() -> Self {
        Self {
            shots: Shots::Infinite,
            misclass: 0.0,
            rng_stream: 0,
        }
    }

    pub fn with_stream(mut self, rng_stream: u64) -> Self {
        self.rng_stream = rng_stream;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.misclass) {
            return Err(OptError::InvalidArgument(format!(
                "misclassification rate must lie in [0, 0.5), got {}",
                self.misclass
            )));
        }
        if self.shots == Shots::Finite(0) {
            return Err(OptError::InvalidArgument("shots must be positive".into()));
        }
        Ok(())
    }

    /// Standard deviation of the sampling jitter for a spectrum `(E_min, E_max)`.
    pub fn shot_std(&self, value_range: (f64, f64)) -> f64 {
        match self.shots {
            Shots::Infinite => 0.0,
            Shots::Finite(n) => (value_range.1 - value_range.0) / (2.0 * (n as f64).sqrt()),
        }
    }
}

/// Noisy estimate of `clean_value`, deterministic in `(noise.rng_stream, counter)`.
///
/// `value_range` brackets the spectrum; the misclassification bias is
/// `misclass * (E_mid - clean_value)` and the jitter is normal with standard
/// deviation `(E_max - E_min) / (2 sqrt(shots))`.
pub fn apply_noise(clean_value: f64, noise: &NoiseSpec, value_range: (f64, f64), counter: u64) -> f64 {
    let mid = 0.5 * (value_range.0 + value_range.1);
    let bias = noise.misclass * (mid - clean_value);
    let sd = noise.shot_std(value_range);
    let jitter = if sd > 0.0 {
        let mut r = rng::seeded(rng::derive(noise.rng_stream, counter));
        Normal::new(0.0, sd).expect("positive std").sample(&mut r)
    } else {
        0.0
    };
    clean_value + bias + jitter
}

/// Wraps a deterministic objective with [`apply_noise`].
pub struct NoisyObjective<O> {
    inner: O,
    noise: NoiseSpec,
    value_range: (f64, f64),
}

impl<O: Objective> NoisyObjective<O> {
    pub fn new(inner: O, noise: NoiseSpec, value_range: (f64, f64)) -> Result<Self> {
        noise.validate()?;
        Ok(Self {
            inner,
            noise,
            value_range,
        })
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: Objective> Objective for NoisyObjective<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn evaluate(&self, theta: &[f64], counter: u64) -> Result<f64> {
        let clean = self.inner.evaluate(theta, counter)?;
        Ok(apply_noise(clean, &self.noise, self.value_range, counter))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_free_limit_is_identity() {
        let n = NoiseSpec::noise_free();
        assert_eq!(apply_noise(-1.234, &n, (-3.0, 5.0), 17), -1.234);
    }

    #[test]
    fn bias_is_upward_at_ground_state() {
        let n = NoiseSpec {
            shots: Shots::Infinite,
            misclass: 0.003,
            rng_stream: 0,
        };
        let noisy = apply_noise(-2.0, &n, (-2.0, 2.0), 0);
        assert!((noisy - (-2.0 + 0.003 * 2.0)).abs() < 1e-15);
        assert!(noisy > -2.0);
    }

    #[test]
    fn shot_std_for_8192_shots() {
        let n = NoiseSpec::default();
        assert!((n.shot_std((-2.0, 2.0)) - 0.0221).abs() < 1e-4);
    }

    #[test]
    fn same_key_same_value() {
        let n = NoiseSpec::default().with_stream(5);
        let a = apply_noise(0.1, &n, (-1.0, 1.0), 42);
        let b = apply_noise(0.1, &n, (-1.0, 1.0), 42);
        let c = apply_noise(0.1, &n, (-1.0, 1.0), 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn shots_serde() {
        #[derive(Deserialize, Serialize)]
        struct W {
            s: Shots,
        }
        let w: W = toml::from_str("s = 8192").unwrap();
        assert_eq!(w.s, Shots::Finite(8192));
        let w: W = toml::from_str("s = \"infinite\"").unwrap();
        assert_eq!(w.s, Shots::Infinite);
        assert!(toml::from_str::<W>("s = 0").is_err());
        assert!(toml::from_str::<W>("s = \"many\"").is_err());
    }

    #[test]
    fn misclass_range_checked() {
        let mut n = NoiseSpec::default();
        n.misclass = 0.5;
        assert!(n.validate().is_err());
    }
}
