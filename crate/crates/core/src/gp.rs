//! Gaussian-process regression with a squared-exponential correlation and an
//! optional white-noise nugget.
//!
//! The process is `s(x) = mu + Z(x)` with `corr(Z(a), Z(b)) = exp(-sum_j tau_j (a_j - b_j)^2)`.
//! `mu` and `sigma^2` have closed-form generalized-least-squares estimates for
//! fixed correlation parameters, so the likelihood is profiled over them and
//! only the length scales `tau` and the nugget are searched numerically.
//!
//! The nugget is dimensionless: it is added to the unit diagonal of the
//! correlation matrix, so the observation-noise variance it implies is
//! `sigma2_hat * sigma_noise`.
//!
//! Inputs are mapped to the unit cube and outputs standardized before
//! fitting. The reported `tau` therefore refers to unit-cube coordinates (see
//! [`InputScaling`]); `mu_hat` and `sigma2_hat` are reported in the original
//! output units.

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::design::SearchDomain;
use crate::error::{check_dim, OptError, Result};
use crate::rng;

/// Initial diagonal jitter; escalated by 10x on Cholesky failure.
pub const JITTER_START: f64 = 1e-12;
/// Largest jitter tried before giving up.
pub const JITTER_MAX: f64 = 1e-4;
/// Floor on the profiled process variance (constant training data).
pub const SIGMA2_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    SquaredExponential,
    SquaredExponentialPlusWhiteNoise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Search range for every length scale `tau_j`.
    pub length_scale_bounds: (f64, f64),
    /// Search range for the relative nugget `sigma_noise`.
    pub nugget_bounds: (f64, f64),
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self::with_white_noise()
    }
}

impl KernelSpec {
    pub fn squared_exponential() -> Self {
        Self {
            kind: KernelKind::SquaredExponential,
            length_scale_bounds: (1e-3, 1e3),
            nugget_bounds: (1e-8, 1.0),
        }
    }

    pub fn with_white_noise() -> Self {
        Self {
            kind: KernelKind::SquaredExponentialPlusWhiteNoise,
            ..Self::squared_exponential()
        }
    }

    pub fn has_nugget(&self) -> bool {
        self.kind == KernelKind::SquaredExponentialPlusWhiteNoise
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("length_scale_bounds", self.length_scale_bounds),
            ("nugget_bounds", self.nugget_bounds),
        ] {
            if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                return Err(OptError::InvalidArgument(format!(
                    "{name} must satisfy 0 < lower < upper, got ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpHyperparams {
    /// Length scales in unit-cube input coordinates.
    pub tau: Vec<f64>,
    /// Relative nugget on the correlation diagonal; 0 for the plain SE kernel.
    pub sigma_noise: f64,
    /// Profiled process mean, original output units.
    pub mu_hat: f64,
    /// Profiled process variance, original output units.
    pub sigma2_hat: f64,
}

impl GpHyperparams {
    /// Standard deviation of the observation noise implied by the nugget.
    pub fn noise_std(&self) -> f64 {
        (self.sigma2_hat * self.sigma_noise).sqrt()
    }
}

/// Affine map `u = (x - offset) / scale` applied to inputs before fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputScaling {
    pub offset: Vec<f64>,
    pub scale: Vec<f64>,
}

impl InputScaling {
    pub fn identity(dim: usize) -> Self {
        Self {
            offset: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    pub fn from_domain(domain: &SearchDomain) -> Self {
        Self {
            offset: domain.lower().to_vec(),
            scale: domain.widths(),
        }
    }

    /// Bounding box of the data; degenerate axes keep unit scale.
    pub fn from_data(xs: &[Vec<f64>]) -> Self {
        let d = xs[0].len();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for x in xs {
            for j in 0..d {
                lo[j] = lo[j].min(x[j]);
                hi[j] = hi[j].max(x[j]);
            }
        }
        let scale = lo
            .iter()
            .zip(&hi)
            .map(|(l, h)| if h - l > 0.0 { h - l } else { 1.0 })
            .collect();
        Self { offset: lo, scale }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, v)| (v - self.offset[j]) / self.scale[j])
            .collect()
    }
}

/// Options for hyperparameter estimation beyond the kernel itself.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Number of log-uniform random starting points.
    pub restarts: usize,
    /// Projected-gradient iterations per start.
    pub max_iters: usize,
    /// Extra starting point, e.g. the previous fit's hyperparameters.
    pub warm_start: Option<(Vec<f64>, f64)>,
    /// Input normalization; `None` uses the data's bounding box.
    pub scaling: Option<InputScaling>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iters: 60,
            warm_start: None,
            scaling: None,
        }
    }
}

/// A fitted, immutable GP surrogate.
#[derive(Debug, Clone)]
pub struct GpModel {
    hyper: GpHyperparams,
    kernel: KernelKind,
    train_x: Vec<Vec<f64>>,
    train_y: Vec<f64>,
    scaling: InputScaling,
    /// Training inputs after scaling, row-major `k x d`.
    unit_x: Vec<f64>,
    y_center: f64,
    y_scale: f64,
    chol: DMatrix<f64>,
    jitter: f64,
    /// `R^-1 (z - mu)` for standardized outputs `z`.
    alpha: Vec<f64>,
    /// `L^-1 1`.
    l_inv_one: Vec<f64>,
    /// `R^-1 1`.
    rinv_one: Vec<f64>,
    one_rinv_one: f64,
    mu_z: f64,
    sigma2_z: f64,
}

/// Squared-exponential correlation `exp(-sum_j tau_j |a_j - b_j|^2)`.
pub fn correlation(theta_m: &[f64], theta_l: &[f64], tau: &[f64]) -> Result<f64> {
    check_dim(theta_m.len(), theta_l.len())?;
    check_dim(theta_m.len(), tau.len())?;
    Ok(sq_exp(theta_m, theta_l, tau))
}

#[inline]
fn sq_exp(a: &[f64], b: &[f64], tau: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..a.len() {
        let t = a[j] - b[j];
        s += tau[j] * t * t;
    }
    (-s).exp()
}

/// Profiled Gaussian log marginal likelihood of raw data for fixed `tau` and
/// relative nugget. `mu` and `sigma^2` are replaced by their closed-form
/// maximizers.
pub fn log_marginal_likelihood(
    train_x: &[Vec<f64>],
    train_y: &[f64],
    tau: &[f64],
    sigma_noise: f64,
) -> Result<f64> {
    validate_training(train_x, train_y)?;
    check_dim(train_x[0].len(), tau.len())?;
    let d = tau.len();
    let flat: Vec<f64> = train_x.iter().flatten().copied().collect();
    let diffs = PairwiseSq::new(&flat, train_y.len(), d);
    let z = DVector::from_column_slice(train_y);
    let eval = profile(&diffs, &z, tau, sigma_noise, false)?;
    Ok(eval.lml)
}

fn validate_training(train_x: &[Vec<f64>], train_y: &[f64]) -> Result<()> {
    if train_x.len() < 2 {
        return Err(OptError::TooFewPoints {
            needed: 2,
            got: train_x.len(),
        });
    }
    check_dim(train_x.len(), train_y.len())?;
    let d = train_x[0].len();
    if d == 0 {
        return Err(OptError::InvalidArgument("zero-dimensional inputs".into()));
    }
    for x in train_x {
        check_dim(d, x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(OptError::InvalidArgument("non-finite training input".into()));
        }
    }
    if train_y.iter().any(|v| !v.is_finite()) {
        return Err(OptError::InvalidArgument("non-finite training output".into()));
    }
    Ok(())
}

/// Squared coordinate differences for every pair, laid out per dimension.
struct PairwiseSq {
    k: usize,
    d: usize,
    /// `sq[j][m * k + l] = (x_m[j] - x_l[j])^2`
    sq: Vec<Vec<f64>>,
}

impl PairwiseSq {
    fn new(flat: &[f64], k: usize, d: usize) -> Self {
        let mut sq = vec![vec![0.0; k * k]; d];
        for (j, plane) in sq.iter_mut().enumerate() {
            for m in 0..k {
                for l in 0..m {
                    let t = flat[m * d + j] - flat[l * d + j];
                    plane[m * k + l] = t * t;
                    plane[l * k + m] = t * t;
                }
            }
        }
        Self { k, d, sq }
    }

    fn correlation_matrix(&self, tau: &[f64]) -> DMatrix<f64> {
        let k = self.k;
        let mut c = DMatrix::<f64>::identity(k, k);
        for m in 0..k {
            for l in 0..m {
                let mut s = 0.0;
                for j in 0..self.d {
                    s += tau[j] * self.sq[j][m * k + l];
                }
                let v = (-s).exp();
                c[(m, l)] = v;
                c[(l, m)] = v;
            }
        }
        c
    }
}

struct Profile {
    lml: f64,
    /// Gradient w.r.t. `(log tau_1..d, log sigma_noise)`; nugget entry only
    /// present when requested.
    grad: Vec<f64>,
    chol: DMatrix<f64>,
    jitter: f64,
    alpha: Vec<f64>,
    l_inv_one: Vec<f64>,
    one_rinv_one: f64,
    mu: f64,
    sigma2: f64,
}

fn cholesky_with_jitter(c: &DMatrix<f64>, nugget: f64) -> Result<(DMatrix<f64>, f64)> {
    let mut jitter = JITTER_START;
    loop {
        let mut r = c.clone();
        for i in 0..r.nrows() {
            r[(i, i)] += nugget + jitter;
        }
        if let Some(ch) = nalgebra::linalg::Cholesky::new(r) {
            return Ok((ch.unpack(), jitter));
        }
        if jitter >= JITTER_MAX {
            return Err(OptError::NotPositiveDefinite { jitter });
        }
        jitter *= 10.0;
    }
}

/// Solve `L v = b` in place for lower-triangular column-major `L`.
fn forward_solve(l: &DMatrix<f64>, v: &mut [f64]) {
    let k = v.len();
    let data = l.as_slice();
    for j in 0..k {
        let col = &data[j * k..(j + 1) * k];
        let vj = v[j] / col[j];
        v[j] = vj;
        if vj != 0.0 {
            for (vi, lij) in v[j + 1..].iter_mut().zip(&col[j + 1..]) {
                *vi -= vj * lij;
            }
        }
    }
}

/// Solve `L^T v = b` in place.
fn backward_solve(l: &DMatrix<f64>, v: &mut [f64]) {
    let k = v.len();
    let data = l.as_slice();
    for j in (0..k).rev() {
        let col = &data[j * k..(j + 1) * k];
        let mut s = v[j];
        for (vi, lij) in v[j + 1..].iter().zip(&col[j + 1..]) {
            s -= vi * lij;
        }
        v[j] = s / col[j];
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn profile(
    diffs: &PairwiseSq,
    z: &DVector<f64>,
    tau: &[f64],
    nugget: f64,
    with_grad: bool,
) -> Result<Profile> {
    let k = diffs.k;
    let c = diffs.correlation_matrix(tau);
    let (chol, jitter) = cholesky_with_jitter(&c, nugget)?;

    let mut l_inv_one = vec![1.0; k];
    forward_solve(&chol, &mut l_inv_one);
    let mut l_inv_z = z.as_slice().to_vec();
    forward_solve(&chol, &mut l_inv_z);
    let one_rinv_one = dot(&l_inv_one, &l_inv_one);
    let mu = dot(&l_inv_one, &l_inv_z) / one_rinv_one;

    let mut alpha: Vec<f64> = z.iter().map(|v| v - mu).collect();
    forward_solve(&chol, &mut alpha);
    let quad = dot(&alpha, &alpha);
    backward_solve(&chol, &mut alpha);
    let sigma2 = (quad / k as f64).max(SIGMA2_FLOOR);

    let log_det: f64 = (0..k).map(|i| chol[(i, i)].ln()).sum::<f64>() * 2.0;
    let kf = k as f64;
    let lml = -0.5 * kf * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0) - 0.5 * log_det;

    let mut grad = Vec::new();
    if with_grad {
        // d lml / dp = 1/2 sum_ml W_ml dR_ml, W = alpha alpha^T / sigma2 - R^-1
        let r_inv = {
            let ch = nalgebra::linalg::Cholesky::pack_dirty(chol.clone());
            ch.inverse()
        };
        let mut g = vec![0.0; diffs.d + 1];
        for m in 0..k {
            for l in 0..m {
                let w = alpha[m] * alpha[l] / sigma2 - r_inv[(m, l)];
                let cml = c[(m, l)];
                let base = m * k + l;
                for (j, gj) in g.iter_mut().take(diffs.d).enumerate() {
                    // both (m,l) and (l,m) contribute
                    *gj -= w * tau[j] * diffs.sq[j][base] * cml;
                }
            }
        }
        let trace_w: f64 = (0..k)
            .map(|i| alpha[i] * alpha[i] / sigma2 - r_inv[(i, i)])
            .sum();
        g[diffs.d] = 0.5 * nugget * trace_w;
        grad = g;
    }

    Ok(Profile {
        lml,
        grad,
        chol,
        jitter,
        alpha,
        l_inv_one,
        one_rinv_one,
        mu,
        sigma2,
    })
}

/// Box-constrained projected gradient ascent with Barzilai-Borwein steps.
fn ascend<F>(mut f: F, x0: Vec<f64>, lo: &[f64], hi: &[f64], max_iters: usize) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let project = |x: &[f64]| -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, v)| v.clamp(lo[i], hi[i]))
            .collect()
    };
    let mut x = project(&x0);
    let Some((mut fx, mut g)) = f(&x) else {
        return (x, f64::NEG_INFINITY);
    };
    let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut step = if gmax > 0.0 { 1.0 / gmax } else { 1.0 };

    for _ in 0..max_iters {
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi + step * gi).collect();
            let xn = project(&trial);
            let moved: f64 = xn.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if moved < 1e-10 {
                break;
            }
            let predicted: f64 = g.iter().zip(xn.iter().zip(&x)).map(|(gi, (a, b))| gi * (a - b)).sum();
            if let Some((fn_, gn)) = f(&xn) {
                if fn_ >= fx + 1e-4 * predicted {
                    accepted = Some((xn, fn_, gn));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn)) = accepted else {
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let ss = dot(&s, &s);
        step = if sy < 0.0 { (-ss / sy).clamp(1e-6, 1e3) } else { (step * 2.0).min(1e3) };
        let improvement = fn_ - fx;
        x = xn;
        fx = fn_;
        g = gn;
        if improvement.abs() <= 1e-10 * (1.0 + fx.abs()) && ss.sqrt() < 1e-6 {
            break;
        }
    }
    (x, fx)
}

/// Fit a GP by maximum likelihood with default options.
pub fn fit(train_x: &[Vec<f64>], train_y: &[f64], spec: &KernelSpec, rng_seed: u64) -> Result<GpModel> {
    fit_with(train_x, train_y, spec, rng_seed, &FitOptions::default())
}

/// Fit a GP by maximum likelihood over `log tau` (and `log sigma_noise` when
/// the white-noise kernel is active), using multistart projected-gradient
/// ascent.
pub fn fit_with(
    train_x: &[Vec<f64>],
    train_y: &[f64],
    spec: &KernelSpec,
    rng_seed: u64,
    options: &FitOptions,
) -> Result<GpModel> {
    validate_training(train_x, train_y)?;
    spec.validate()?;
    let d = train_x[0].len();
    let scaling = options
        .scaling
        .clone()
        .unwrap_or_else(|| InputScaling::from_data(train_x));
    check_dim(d, scaling.dim())?;
    let prepared = Prepared::new(train_x, train_y, scaling);
    let nugget = spec.has_nugget();

    let (tl, th) = (spec.length_scale_bounds.0.ln(), spec.length_scale_bounds.1.ln());
    let (nl, nh) = (spec.nugget_bounds.0.ln(), spec.nugget_bounds.1.ln());
    let n_par = if nugget { d + 1 } else { d };
    let mut lo = vec![tl; d];
    let mut hi = vec![th; d];
    if nugget {
        lo.push(nl);
        hi.push(nh);
    }

    let objective = |p: &[f64]| -> Option<(f64, Vec<f64>)> {
        let tau: Vec<f64> = p[..d].iter().map(|v| v.exp()).collect();
        let nug = if nugget { p[d].exp() } else { 0.0 };
        let prof = profile(&prepared.diffs, &prepared.z, &tau, nug, true).ok()?;
        let mut g = prof.grad;
        g.truncate(n_par);
        prof.lml.is_finite().then_some((prof.lml, g))
    };

    let mut rng = rng::seeded(rng_seed);
    let mut starts: Vec<Vec<f64>> = Vec::with_capacity(options.restarts + 1);
    if let Some((tau, nug)) = &options.warm_start {
        if tau.len() == d {
            let mut p: Vec<f64> = tau.iter().map(|t| t.max(1e-300).ln()).collect();
            if nugget {
                p.push(nug.max(spec.nugget_bounds.0).ln());
            }
            starts.push(p);
        }
    }
    for _ in 0..options.restarts.max(1) {
        starts.push((0..n_par).map(|i| rng.random_range(lo[i]..=hi[i])).collect());
    }

    let mut best: Option<(Vec<f64>, f64)> = None;
    for s in starts {
        let (p, v) = ascend(objective, s, &lo, &hi, options.max_iters);
        if v.is_finite() && best.as_ref().is_none_or(|(_, bv)| v > *bv) {
            best = Some((p, v));
        }
    }
    let Some((p, _)) = best else {
        return Err(OptError::NotPositiveDefinite { jitter: JITTER_MAX });
    };
    let tau: Vec<f64> = p[..d].iter().map(|v| v.exp()).collect();
    let nug = if nugget { p[d].exp() } else { 0.0 };
    GpModel::from_prepared(prepared, spec.kind, tau, nug)
}

struct Prepared {
    train_x: Vec<Vec<f64>>,
    train_y: Vec<f64>,
    scaling: InputScaling,
    unit_x: Vec<f64>,
    diffs: PairwiseSq,
    z: DVector<f64>,
    y_center: f64,
    y_scale: f64,
}

impl Prepared {
    fn new(train_x: &[Vec<f64>], train_y: &[f64], scaling: InputScaling) -> Self {
        let k = train_x.len();
        let d = train_x[0].len();
        let unit_x: Vec<f64> = train_x.iter().flat_map(|x| scaling.apply(x)).collect();
        let diffs = PairwiseSq::new(&unit_x, k, d);
        let mean = train_y.iter().sum::<f64>() / k as f64;
        let var = train_y.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / k as f64;
        let y_scale = if var > 0.0 { var.sqrt() } else { 1.0 };
        let z = DVector::from_iterator(k, train_y.iter().map(|y| (y - mean) / y_scale));
        Self {
            train_x: train_x.to_vec(),
            train_y: train_y.to_vec(),
            scaling,
            unit_x,
            diffs,
            z,
            y_center: mean,
            y_scale,
        }
    }
}

impl GpModel {
    /// Build a model with fixed correlation parameters (no likelihood search).
    ///
    /// `tau` refers to the coordinates produced by `scaling`.
    pub fn with_hyperparams(
        train_x: &[Vec<f64>],
        train_y: &[f64],
        kind: KernelKind,
        tau: &[f64],
        sigma_noise: f64,
        scaling: InputScaling,
    ) -> Result<Self> {
        validate_training(train_x, train_y)?;
        check_dim(train_x[0].len(), tau.len())?;
        check_dim(train_x[0].len(), scaling.dim())?;
        let nug = match kind {
            KernelKind::SquaredExponential => 0.0,
            KernelKind::SquaredExponentialPlusWhiteNoise => sigma_noise,
        };
        let prepared = Prepared::new(train_x, train_y, scaling);
        Self::from_prepared(prepared, kind, tau.to_vec(), nug)
    }

    fn from_prepared(p: Prepared, kind: KernelKind, tau: Vec<f64>, nugget: f64) -> Result<Self> {
        let prof = profile(&p.diffs, &p.z, &tau, nugget, false)?;
        let mut rinv_one = prof.l_inv_one.clone();
        backward_solve(&prof.chol, &mut rinv_one);
        let hyper = GpHyperparams {
            tau,
            sigma_noise: nugget,
            mu_hat: p.y_center + p.y_scale * prof.mu,
            sigma2_hat: p.y_scale * p.y_scale * prof.sigma2,
        };
        Ok(Self {
            hyper,
            kernel: kind,
            train_x: p.train_x,
            train_y: p.train_y,
            scaling: p.scaling,
            unit_x: p.unit_x,
            y_center: p.y_center,
            y_scale: p.y_scale,
            chol: prof.chol,
            jitter: prof.jitter,
            alpha: prof.alpha,
            rinv_one,
            l_inv_one: prof.l_inv_one,
            one_rinv_one: prof.one_rinv_one,
            mu_z: prof.mu,
            sigma2_z: prof.sigma2,
        })
    }

    pub fn hyper(&self) -> &GpHyperparams {
        &self.hyper
    }

    pub fn kernel(&self) -> KernelKind {
        self.kernel
    }

    pub fn dim(&self) -> usize {
        self.scaling.dim()
    }

    pub fn len(&self) -> usize {
        self.train_y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_y.is_empty()
    }

    pub fn train_x(&self) -> &[Vec<f64>] {
        &self.train_x
    }

    pub fn train_y(&self) -> &[f64] {
        &self.train_y
    }

    pub fn scaling(&self) -> &InputScaling {
        &self.scaling
    }

    /// Diagonal jitter that made the correlation matrix factorizable.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Lower Cholesky factor of `R + jitter I` (standardized units).
    pub fn cholesky_factor(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// Correlation vector between a raw input and every training input.
    pub fn correlations(&self, theta: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), theta.len())?;
        let u = self.scaling.apply(theta);
        Ok(self.correlations_unit(&u))
    }

    fn correlations_unit(&self, u: &[f64]) -> Vec<f64> {
        let d = u.len();
        self.unit_x
            .chunks_exact(d)
            .map(|xi| sq_exp(u, xi, &self.hyper.tau))
            .collect()
    }

    /// Mean prediction and mean squared error at `theta_new`.
    pub fn predict(&self, theta_new: &[f64]) -> Result<(f64, f64)> {
        check_dim(self.dim(), theta_new.len())?;
        let u = self.scaling.apply(theta_new);
        let mut r = self.correlations_unit(&u);
        let mean_z = self.mu_z + dot(&r, &self.alpha);
        forward_solve(&self.chol, &mut r);
        let rr = dot(&r, &r);
        let one_r = dot(&self.l_inv_one, &r);
        let mse_z = self.sigma2_z * (1.0 - rr + (1.0 - one_r).powi(2) / self.one_rinv_one);
        let mean = self.y_center + self.y_scale * mean_z;
        let mse = (self.y_scale * self.y_scale * mse_z).max(0.0);
        Ok((mean, mse))
    }

    /// Prediction with an early exit.
    ///
    /// `keep` receives the mean and an upper bound on the MSE (the exact MSE
    /// without its non-negative `r^T R^-1 r` term), both available in `O(k)`.
    /// If it returns false the `O(k^2)` exact MSE is skipped and `None` is
    /// returned.
    pub fn predict_screened(
        &self,
        theta_new: &[f64],
        keep: impl FnOnce(f64, f64) -> bool,
    ) -> Result<Option<(f64, f64)>> {
        check_dim(self.dim(), theta_new.len())?;
        let u = self.scaling.apply(theta_new);
        let mut r = self.correlations_unit(&u);
        let mean_z = self.mu_z + dot(&r, &self.alpha);
        let mean = self.y_center + self.y_scale * mean_z;
        let one_r = dot(&self.rinv_one, &r);
        let v2 = self.y_scale * self.y_scale;
        let bound = v2 * self.sigma2_z * (1.0 + (1.0 - one_r).powi(2) / self.one_rinv_one);
        if !keep(mean, bound) {
            return Ok(None);
        }
        forward_solve(&self.chol, &mut r);
        let rr = dot(&r, &r);
        let mse_z = self.sigma2_z * (1.0 - rr + (1.0 - one_r).powi(2) / self.one_rinv_one);
        Ok(Some((mean, (v2 * mse_z).max(0.0))))
    }

    pub fn predict_mean(&self, theta_new: &[f64]) -> Result<f64> {
        check_dim(self.dim(), theta_new.len())?;
        let u = self.scaling.apply(theta_new);
        let r = self.correlations_unit(&u);
        Ok(self.y_center + self.y_scale * (self.mu_z + dot(&r, &self.alpha)))
    }

    /// JSON dump of hyperparameters and training data, for debugging.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kernel": self.kernel,
            "hyper": self.hyper,
            "scaling": self.scaling,
            "jitter": self.jitter,
            "train_x": self.train_x,
            "train_y": self.train_y,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sin_data(n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let xs: Vec<Vec<f64>> = (0..n).map(|i| vec![3.0 * i as f64 / (n - 1) as f64]).collect();
        let ys = xs.iter().map(|x| (3.0 * x[0]).sin()).collect();
        (xs, ys)
    }

    #[test]
    fn correlation_examples() {
        assert_eq!(correlation(&[0.3, 0.7], &[0.3, 0.7], &[5.0, 2.0]).unwrap(), 1.0);
        assert_relative_eq!(correlation(&[0.0], &[1.0], &[1.0]).unwrap(), 0.367_879_441_171_442_3, epsilon = 1e-15);
        assert_relative_eq!(
            correlation(&[0.0, 0.0], &[1.0, 2.0], &[0.5, 0.25]).unwrap(),
            (-1.5f64).exp(),
            epsilon = 1e-15
        );
        assert!(correlation(&[0.0], &[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn fit_rejects_too_few_points() {
        let err = fit(&[vec![0.0]], &[1.0], &KernelSpec::default(), 0).unwrap_err();
        assert!(matches!(err, OptError::TooFewPoints { .. }));
    }

    #[test]
    fn constant_data_is_handled() {
        let xs: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 * 0.2, (i * i) as f64 * 0.03]).collect();
        let ys = vec![2.5; 5];
        let m = fit(&xs, &ys, &KernelSpec::squared_exponential(), 1).unwrap();
        assert_relative_eq!(m.hyper().mu_hat, 2.5, epsilon = 1e-9);
        assert!(m.hyper().sigma2_hat <= 1e-10);
        let (mean, mse) = m.predict(&[0.33, 0.1]).unwrap();
        assert_relative_eq!(mean, 2.5, epsilon = 1e-9);
        assert!(mse.is_finite() && mse >= 0.0);
    }

    #[test]
    fn noise_free_fit_interpolates_sin() {
        let (xs, ys) = sin_data(20);
        let m = fit(&xs, &ys, &KernelSpec::squared_exponential(), 3).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            let (mean, mse) = m.predict(x).unwrap();
            assert!((mean - y).abs() <= 1e-6 * (1.0 + y.abs()), "{mean} vs {y}; tau {:?} jitter {}", m.hyper().tau, m.jitter());
            assert!(mse <= 1e-8, "mse {mse}");
        }
    }

    #[test]
    fn far_prediction_reverts_to_mean() {
        let (xs, ys) = sin_data(8);
        let m = fit(&xs, &ys, &KernelSpec::squared_exponential(), 3).unwrap();
        let far = [1e4];
        let (mean, mse) = m.predict(&far).unwrap();
        assert!(m.correlations(&far).unwrap().iter().all(|r| *r < 1e-12));
        let h = m.hyper();
        assert_relative_eq!(mean, h.mu_hat, max_relative = 1e-9, epsilon = 1e-12);
        let expected = h.sigma2_hat * (1.0 + 1.0 / m.one_rinv_one);
        assert_relative_eq!(mse, expected, max_relative = 1e-9);
    }

    #[test]
    fn nugget_gives_positive_training_mse() {
        let (xs, ys) = sin_data(10);
        let m = GpModel::with_hyperparams(
            &xs,
            &ys,
            KernelKind::SquaredExponentialPlusWhiteNoise,
            &[20.0],
            1e-2,
            InputScaling::from_data(&xs),
        )
        .unwrap();
        for x in &xs {
            assert!(m.predict(x).unwrap().1 > 0.0);
        }
    }

    #[test]
    fn cholesky_reconstructs_regularized_matrix() {
        let (xs, ys) = sin_data(12);
        let m = fit(&xs, &ys, &KernelSpec::default(), 9).unwrap();
        let l = m.cholesky_factor();
        let rebuilt = l * l.transpose();
        let k = m.len();
        for a in 0..k {
            for b in 0..k {
                let mut r = correlation(&m.scaling.apply(&xs[a]), &m.scaling.apply(&xs[b]), &m.hyper.tau).unwrap();
                if a == b {
                    r += m.hyper.sigma_noise + m.jitter();
                }
                assert!((rebuilt[(a, b)] - r).abs() <= 1e-8 * r.abs().max(1.0));
            }
        }
    }

    #[test]
    fn lml_gradient_matches_finite_differences() {
        let xs: Vec<Vec<f64>> = (0..9).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()]).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x[0] * x[0] - 0.5 * x[1]).collect();
        let p = Prepared::new(&xs, &ys, InputScaling::from_data(&xs));
        let logp = [0.3f64, -0.7, (1e-3f64).ln()];
        let eval = |lp: &[f64]| {
            let tau = [lp[0].exp(), lp[1].exp()];
            profile(&p.diffs, &p.z, &tau, lp[2].exp(), true).unwrap()
        };
        let base = eval(&logp);
        for i in 0..3 {
            let h = 1e-5;
            let mut up = logp;
            up[i] += h;
            let mut dn = logp;
            dn[i] -= h;
            let fd = (eval(&up).lml - eval(&dn).lml) / (2.0 * h);
            assert!((fd - base.grad[i]).abs() <= 1e-4 * (1.0 + fd.abs()), "param {i}: fd {fd} vs {}", base.grad[i]);
        }
    }
}
