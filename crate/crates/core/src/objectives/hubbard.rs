//! Fermi-Hubbard model on a periodic grid, restricted to a fixed
//! `(n_up, n_down)` occupation sector, and a Hamiltonian-variational ansatz
//! energy evaluated by exact statevector evolution.
//!
//! Basis: every up-spin bitstring with `n_up` bits set, in increasing integer
//! order, crossed with every down-spin bitstring likewise; the up string is
//! the major index. Site `s = y * nx + x` is bit `s`. Fermionic signs follow
//! the Jordan-Wigner order with all up modes before all down modes, so a hop
//! only sees the occupied modes of its own species strictly between the two
//! sites.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, OptError, Result};
use crate::objectives::Objective;

/// Largest sector dimension we are willing to diagonalize densely.
pub const SECTOR_DIM_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubbardSpec {
    pub nx: usize,
    pub ny: usize,
    pub n_up: usize,
    pub n_down: usize,
    /// Hopping amplitude.
    pub t: f64,
    /// On-site interaction.
    pub u: f64,
    /// Ansatz repetitions; each contributes one interaction and one hopping angle.
    pub layers: usize,
    /// Append one final interaction angle, giving an odd parameter count.
    #[serde(default)]
    pub closing_interaction: bool,
}

impl HubbardSpec {
    pub fn new(nx: usize, ny: usize, n_up: usize, n_down: usize, layers: usize) -> Self {
        Self {
            nx,
            ny,
            n_up,
            n_down,
            t: 1.0,
            u: 2.0,
            layers,
            closing_interaction: false,
        }
    }

    pub fn with_closing_interaction(mut self) -> Self {
        self.closing_interaction = true;
        self
    }

    pub fn sites(&self) -> usize {
        self.nx * self.ny
    }

    /// Number of ansatz angles.
    pub fn n_params(&self) -> usize {
        2 * self.layers + usize::from(self.closing_interaction)
    }

    pub fn sector_dim(&self) -> usize {
        binomial(self.sites(), self.n_up) * binomial(self.sites(), self.n_down)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(OptError::InvalidArgument("grid must have at least one site".into()));
        }
        if self.sites() > 32 {
            return Err(OptError::InvalidArgument("at most 32 sites are supported".into()));
        }
        if self.n_up > self.sites() || self.n_down > self.sites() {
            return Err(OptError::InvalidArgument(format!(
                "filling ({}, {}) exceeds {} sites",
                self.n_up,
                self.n_down,
                self.sites()
            )));
        }
        if self.layers == 0 {
            return Err(OptError::InvalidArgument("ansatz needs at least one layer".into()));
        }
        let dim = self.sector_dim();
        if dim > SECTOR_DIM_CAP {
            return Err(OptError::SectorTooLarge {
                dim,
                cap: SECTOR_DIM_CAP,
            });
        }
        Ok(())
    }

    /// Nearest-neighbour pairs `(i, j)` with `i < j` on the periodic grid,
    /// each counted once even when wrap-around duplicates a bond.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut set = BTreeSet::new();
        for y in 0..self.ny {
            for x in 0..self.nx {
                let s = y * self.nx + x;
                let right = y * self.nx + (x + 1) % self.nx;
                let up = ((y + 1) % self.ny) * self.nx + x;
                for n in [right, up] {
                    if n != s {
                        set.insert((s.min(n), s.max(n)));
                    }
                }
            }
        }
        set.into_iter().collect()
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// Bitstrings of `sites` bits with exactly `count` set, ascending.
fn strings_with_count(sites: usize, count: usize) -> Vec<u32> {
    if count == 0 {
        return vec![0];
    }
    let limit = 1u64 << sites;
    let mut out = Vec::new();
    let mut b: u64 = (1u64 << count) - 1;
    // Gosper's hack: next larger integer with the same popcount
    while b < limit {
        out.push(b as u32);
        let c = b & b.wrapping_neg();
        let r = b + c;
        b = (((r ^ b) >> 2) / c) | r;
    }
    out
}

/// Real symmetric matrix stored as a full list of nonzero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    pub dim: usize,
    /// `(row, col, value)`; both triangles present.
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSymmetric {
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries
            .iter()
            .filter(|(r, c, _)| *r == row && *c == col)
            .map(|e| e.2)
            .sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let d = self.to_dense();
        (0..self.dim).all(|i| (0..i).all(|j| (d[(i, j)] - d[(j, i)]).abs() <= tol))
    }
}

/// The sector Hamiltonian split into hopping and interaction parts.
#[derive(Debug, Clone)]
pub struct SectorHamiltonian {
    pub hopping: SparseSymmetric,
    /// Diagonal of the interaction term, `U * (number of doubly occupied sites)`.
    pub interaction: Vec<f64>,
    pub up_strings: Vec<u32>,
    pub down_strings: Vec<u32>,
}

impl SectorHamiltonian {
    pub fn dim(&self) -> usize {
        self.interaction.len()
    }

    pub fn full(&self) -> SparseSymmetric {
        let mut entries = self.hopping.entries.clone();
        entries.extend(
            self.interaction
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i, i, *v)),
        );
        SparseSymmetric {
            dim: self.dim(),
            entries,
        }
    }
}

/// Single-species hopping: `(from, to, sign)` for every allowed hop.
fn species_hops(strings: &[u32], bonds: &[(usize, usize)]) -> Vec<(usize, usize, f64)> {
    let index = |b: u32| strings.binary_search(&b).expect("hop preserves particle number");
    let mut out = Vec::new();
    for (col, &b) in strings.iter().enumerate() {
        for &(i, j) in bonds {
            for (dst, src) in [(i, j), (j, i)] {
                if b & (1 << src) != 0 && b & (1 << dst) == 0 {
                    let nb = b ^ (1 << src) ^ (1 << dst);
                    let (lo, hi) = (src.min(dst), src.max(dst));
                    let between = ((1u64 << hi) - (1u64 << (lo + 1))) as u32;
                    let sign = if (b & between).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    out.push((index(nb), col, sign));
                }
            }
        }
    }
    out
}

pub fn sector_hamiltonian(spec: &HubbardSpec) -> Result<SectorHamiltonian> {
    spec.validate()?;
    let sites = spec.sites();
    let ups = strings_with_count(sites, spec.n_up);
    let downs = strings_with_count(sites, spec.n_down);
    let nd = downs.len();
    let bonds = spec.bonds();

    let mut entries = Vec::new();
    for (r, c, sign) in species_hops(&ups, &bonds) {
        for k in 0..nd {
            entries.push((r * nd + k, c * nd + k, -spec.t * sign));
        }
    }
    for (r, c, sign) in species_hops(&downs, &bonds) {
        for k in 0..ups.len() {
            entries.push((k * nd + r, k * nd + c, -spec.t * sign));
        }
    }
    if spec.t == 0.0 {
        entries.clear();
    }
    let dim = ups.len() * nd;
    let mut interaction = Vec::with_capacity(dim);
    for &a in &ups {
        for &b in &downs {
            interaction.push(spec.u * (a & b).count_ones() as f64);
        }
    }
    Ok(SectorHamiltonian {
        hopping: SparseSymmetric { dim, entries },
        interaction,
        up_strings: ups,
        down_strings: downs,
    })
}

/// `H = -t sum_<ij>,s (c+_is c_js + h.c.) + U sum_i n_i,up n_i,down` on the
/// filling sector.
pub fn hubbard_hamiltonian(spec: &HubbardSpec) -> Result<SparseSymmetric> {
    Ok(sector_hamiltonian(spec)?.full())
}

/// Eigenpairs sorted ascending by eigenvalue; ties keep solver order.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Full spectrum of the sector Hamiltonian, ascending.
pub fn spectrum(spec: &HubbardSpec) -> Result<Vec<f64>> {
    let h = hubbard_hamiltonian(spec)?;
    Ok(sorted_eigen(h.to_dense()).0)
}

pub fn ground_energy(spec: &HubbardSpec) -> Result<f64> {
    Ok(spectrum(spec)?[0])
}

/// Cached operators for repeated ansatz evaluations of one spec.
#[derive(Debug, Clone)]
pub struct HvaModel {
    spec: HubbardSpec,
    interaction: Vec<f64>,
    /// Eigenvalues of the hopping part.
    hop_values: Vec<f64>,
    /// Row-major eigenvectors of the hopping part: `hop_vectors[i * n + m]`.
    hop_vectors: Vec<f64>,
    /// Reference state expressed in the hopping eigenbasis (real).
    initial: Vec<f64>,
    ground: f64,
    spectrum_min: f64,
    spectrum_max: f64,
}

impl HvaModel {
    pub fn new(spec: &HubbardSpec) -> Result<Self> {
        let h = sector_hamiltonian(spec)?;
        let n = h.dim();
        let (hop_values, hop_vecs) = sorted_eigen(h.hopping.to_dense());
        let (full_values, _) = sorted_eigen(h.full().to_dense());

        // Reference state: lowest hopping eigenvector, sign-fixed so that its
        // largest-magnitude entry is positive.
        let mut psi0: Vec<f64> = hop_vecs.column(0).iter().copied().collect();
        let mut pivot = 0;
        for i in 1..n {
            if psi0[i].abs() > psi0[pivot].abs() + 1e-12 {
                pivot = i;
            }
        }
        if psi0[pivot] < 0.0 {
            psi0.iter_mut().for_each(|v| *v = -*v);
        }
        let mut hop_vectors = vec![0.0; n * n];
        for i in 0..n {
            for m in 0..n {
                hop_vectors[i * n + m] = hop_vecs[(i, m)];
            }
        }
        let initial: Vec<f64> = (0..n)
            .map(|m| (0..n).map(|i| hop_vecs[(i, m)] * psi0[i]).sum())
            .collect();
        Ok(Self {
            spec: spec.clone(),
            interaction: h.interaction,
            hop_values,
            hop_vectors,
            initial,
            ground: full_values[0],
            spectrum_min: full_values[0],
            spectrum_max: *full_values.last().expect("nonempty sector"),
        })
    }

    pub fn spec(&self) -> &HubbardSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.interaction.len()
    }

    pub fn n_params(&self) -> usize {
        self.spec.n_params()
    }

    /// Exact ground energy of the sector.
    pub fn ground_energy(&self) -> f64 {
        self.ground
    }

    /// `(E_min, E_max)` of the sector spectrum.
    pub fn spectrum_range(&self) -> (f64, f64) {
        (self.spectrum_min, self.spectrum_max)
    }

    /// Reference state in the occupation basis.
    pub fn reference_state(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|m| self.hop_vectors[i * n + m] * self.initial[m]).sum())
            .collect()
    }

    /// Ansatz state as `(re, im)` in the occupation basis.
    ///
    /// Starting from the hopping ground state, each layer applies
    /// `exp(-i theta[2l+1] H_U)` and then `exp(-i theta[2l] H_t)`; with
    /// `closing_interaction` a final `exp(-i theta[2L] H_U)` follows.
    pub fn state(&self, theta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_dim(self.n_params(), theta.len())?;
        let n = self.dim();
        // The state is carried in the hopping eigenbasis between layers, where
        // exp(-i a H_t) is diagonal.
        let mut re = self.initial.clone();
        let mut im = vec![0.0; n];
        let mut occ_re = vec![0.0; n];
        let mut occ_im = vec![0.0; n];
        let layers = self.spec.layers;
        for l in 0..layers {
            let (hop, int) = (theta[2 * l], theta[2 * l + 1]);
            self.to_occupation(&re, &im, &mut occ_re, &mut occ_im);
            self.phase_interaction(int, &mut occ_re, &mut occ_im);
            self.to_eigen(&occ_re, &occ_im, &mut re, &mut im);
            for m in 0..n {
                let (s, c) = (-hop * self.hop_values[m]).sin_cos();
                let (a, b) = (re[m], im[m]);
                re[m] = a * c - b * s;
                im[m] = a * s + b * c;
            }
        }
        self.to_occupation(&re, &im, &mut occ_re, &mut occ_im);
        if self.spec.closing_interaction {
            self.phase_interaction(theta[2 * layers], &mut occ_re, &mut occ_im);
        }
        Ok((occ_re, occ_im))
    }

    fn phase_interaction(&self, angle: f64, re: &mut [f64], im: &mut [f64]) {
        for k in 0..re.len() {
            let (s, c) = (-angle * self.interaction[k]).sin_cos();
            let (a, b) = (re[k], im[k]);
            re[k] = a * c - b * s;
            im[k] = a * s + b * c;
        }
    }

    fn to_occupation(&self, re: &[f64], im: &[f64], out_re: &mut [f64], out_im: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let row = &self.hop_vectors[i * n..(i + 1) * n];
            let (mut a, mut b) = (0.0, 0.0);
            for m in 0..n {
                a += row[m] * re[m];
                b += row[m] * im[m];
            }
            out_re[i] = a;
            out_im[i] = b;
        }
    }

    fn to_eigen(&self, re: &[f64], im: &[f64], out_re: &mut [f64], out_im: &mut [f64]) {
        let n = self.dim();
        out_re.iter_mut().for_each(|v| *v = 0.0);
        out_im.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            let row = &self.hop_vectors[i * n..(i + 1) * n];
            let (a, b) = (re[i], im[i]);
            for m in 0..n {
                out_re[m] += row[m] * a;
                out_im[m] += row[m] * b;
            }
        }
    }

    /// `<psi(theta)| H |psi(theta)>` for the normalized ansatz state.
    pub fn energy(&self, theta: &[f64]) -> Result<f64> {
        let (re, im) = self.state(theta)?;
        let n = self.dim();
        let mut er = vec![0.0; n];
        let mut ei = vec![0.0; n];
        self.to_eigen(&re, &im, &mut er, &mut ei);
        let mut e = 0.0;
        let mut norm = 0.0;
        for m in 0..n {
            let p = er[m] * er[m] + ei[m] * ei[m];
            e += self.hop_values[m] * p;
        }
        for k in 0..n {
            let p = re[k] * re[k] + im[k] * im[k];
            e += self.interaction[k] * p;
            norm += p;
        }
        Ok(e / norm)
    }
}

impl Objective for HvaModel {
    fn dim(&self) -> usize {
        self.n_params()
    }

    fn evaluate(&self, theta: &[f64], _counter: u64) -> Result<f64> {
        self.energy(theta)
    }
}

/// One-shot ansatz energy; builds (and discards) the cached operators.
pub fn hva_energy(spec: &HubbardSpec, theta: &[f64]) -> Result<f64> {
    HvaModel::new(spec)?.energy(theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_single_electron_matrix() {
        let spec = HubbardSpec::new(2, 1, 1, 0, 1);
        let h = hubbard_hamiltonian(&spec).unwrap().to_dense();
        assert_eq!(h.nrows(), 2);
        assert_eq!(h[(0, 0)], 0.0);
        assert_eq!(h[(1, 1)], 0.0);
        assert_eq!(h[(0, 1)], -1.0);
        assert_eq!(h[(1, 0)], -1.0);
        assert!((ground_energy(&spec).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_site_half_filling_ground_energy() {
        let spec = HubbardSpec::new(2, 1, 1, 1, 1);
        assert_eq!(spec.sector_dim(), 4);
        let e = ground_energy(&spec).unwrap();
        assert!((e - (1.0 - 5f64.sqrt())).abs() < 1e-12, "{e}");
    }

    #[test]
    fn bonds_are_counted_once() {
        assert_eq!(HubbardSpec::new(2, 1, 1, 0, 1).bonds(), vec![(0, 1)]);
        assert_eq!(HubbardSpec::new(2, 2, 1, 0, 1).bonds().len(), 4);
        assert_eq!(HubbardSpec::new(3, 2, 1, 0, 1).bonds().len(), 9);
        assert_eq!(HubbardSpec::new(1, 1, 1, 0, 1).bonds().len(), 0);
    }

    #[test]
    fn zero_hopping_is_diagonal() {
        let mut spec = HubbardSpec::new(2, 2, 2, 2, 1);
        spec.t = 0.0;
        let h = sector_hamiltonian(&spec).unwrap();
        assert!(h.hopping.entries.is_empty());
        let min_double = h.up_strings.iter().flat_map(|a| h.down_strings.iter().map(move |b| (a & b).count_ones())).min().unwrap();
        assert_eq!(ground_energy(&spec).unwrap(), spec.u * min_double as f64);
    }

    #[test]
    fn sector_cap_enforced() {
        // C(16, 8)^2 is far above the cap
        let spec = HubbardSpec::new(4, 4, 8, 8, 1);
        assert!(matches!(spec.validate(), Err(OptError::SectorTooLarge { .. })));
        let spec = HubbardSpec::new(2, 1, 3, 0, 1);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn zero_angles_give_reference_energy() {
        let spec = HubbardSpec::new(2, 1, 1, 1, 1);
        let model = HvaModel::new(&spec).unwrap();
        let e = model.energy(&[0.0, 0.0]).unwrap();
        let h = sector_hamiltonian(&spec).unwrap();
        let psi = model.reference_state();
        let ht = h.hopping.to_dense();
        let mut expect = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                expect += psi[i] * ht[(i, j)] * psi[j];
            }
            expect += h.interaction[i] * psi[i] * psi[i];
        }
        assert!((e - expect).abs() < 1e-12);
        // U = 0 ground state, so hopping contributes -2 and half the weight is doubly occupied
        assert!((e - (-2.0 + 1.0)).abs() < 1e-12, "{e}");
    }

    #[test]
    fn wrong_theta_length_rejected() {
        let model = HvaModel::new(&HubbardSpec::new(2, 1, 1, 1, 2)).unwrap();
        assert!(model.energy(&[0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn ansatz_state_is_normalized() {
        let model = HvaModel::new(&HubbardSpec::new(2, 2, 1, 1, 2).with_closing_interaction()).unwrap();
        let (re, im) = model.state(&[0.3, -1.1, 2.0, 0.7, 0.25]).unwrap();
        let norm: f64 = re.iter().zip(&im).map(|(a, b)| a * a + b * b).sum();
        assert!((norm - 1.0).abs() < 1e-10);
    }
}
