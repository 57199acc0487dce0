//! Exact diagonalisation in Fock space for chains of at most 12 sites.
//!
//! Basis states are bitstrings with bit `j - 1` holding the occupation of site
//! `j`. Operators follow the ordered-string convention: `c_j` and `c_j^dag`
//! pick up `(-1)^m` where `m` counts occupied sites below `j`.
//!
//! Real-space couplings are written out from each model's definition;
//! nothing here reuses the momentum-space formulas of the engine except the
//! fractal dispersion, whose real-space kernel is its inverse Fourier
//! transform.

pub mod validation;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::analysis::Partition;
use crate::lattice::{
    dispersion, oriented_distance, ring_distance, KitaevHopping, ModelSpec,
    OccupationRule, Variant,
};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues};
use crate::{Error, Result};

pub const MAX_ORACLE_SITES: usize = 12;

/// Minimum many-body gap above the ground state for it to be used as a reference.
pub const MIN_ORACLE_GAP: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `H = sum hopping (coef c_i^dag c_j) + sum pairing (coef c_i c_j + h.c.) + constant`,
/// with 0-based site indices.
#[derive(Debug, Clone)]
pub struct QuadraticTerms {
    pub n_sites: usize,
    pub hopping: Vec<(usize, usize, Complex64)>,
    pub pairing: Vec<(usize, usize, Complex64)>,
    pub constant: f64,
}

fn weight(distance: usize, exponent: f64) -> f64 {
    (distance as f64).powf(-exponent)
}

/// Hopping amplitude `a_r` on `c_i^dag c_{i+r}` for the number-conserving models.
fn translation_kernel(spec: &ModelSpec) -> Result<Vec<Complex64>> {
    let n = spec.n_sites();
    let half = n / 2;
    let mut a = vec![ZERO; n];
    match spec.variant {
        Variant::PowerLawHopping { alpha, t } => {
            for (r, slot) in a.iter_mut().enumerate().skip(1) {
                let d = ring_distance(r, n);
                // The bond at distance N/2 is reached from both sides of the ring.
                let mult = if d == half { 2.0 } else { 1.0 };
                *slot = Complex64::new(-mult * t * weight(d, alpha), 0.0);
            }
        }
        Variant::PhaseModulatedHopping { alpha, phi, t } => {
            for (r, slot) in a.iter_mut().enumerate().skip(1) {
                let d = ring_distance(r, n);
                *slot = if d == half {
                    Complex64::new(-2.0 * t * weight(d, alpha) * (phi * half as f64).cos(), 0.0)
                } else {
                    let o = oriented_distance(r as i64, n)? as f64;
                    -t * weight(d, alpha) * Complex64::from_polar(1.0, -o * phi)
                };
            }
        }
        Variant::SelectiveHopping { s1, s2, t1, t2, r } => {
            let n_i = n as i64;
            for (s, t) in [(s1 as i64, t1), (s2 as i64, t2)] {
                for q in -(r as i64)..=(r as i64) {
                    for offset in [s + q, -(s + q)] {
                        a[offset.rem_euclid(n_i) as usize] -= Complex64::new(t, 0.0);
                    }
                }
            }
        }
        Variant::FractalDispersion { .. } => {
            let g = spec.geometry;
            let modes: Vec<(f64, f64)> = g
                .mode_labels()
                .into_iter()
                .map(|label| {
                    let k = g.momentum(label);
                    dispersion(spec, k, label).map(|e| (k, e))
                })
                .collect::<Result<_>>()?;
            for (r, slot) in a.iter_mut().enumerate() {
                *slot = modes
                    .iter()
                    .map(|&(k, e)| e * Complex64::from_polar(1.0, k * r as f64))
                    .sum::<Complex64>()
                    / n as f64;
            }
        }
        Variant::KitaevChain { .. } => unreachable!("pairing models use kitaev_terms"),
    }
    Ok(a)
}

fn kitaev_terms(spec: &ModelSpec) -> QuadraticTerms {
    let n = spec.n_sites();
    let Variant::KitaevChain {
        alpha,
        hopping,
        t,
        delta,
    } = spec.variant
    else {
        unreachable!("kitaev_terms on a hopping-only model")
    };
    let mu = spec.mu().expect("pairing model carries a chemical potential");
    let boundary_sign = |target: usize| if target >= n { -1.0 } else { 1.0 };

    let mut terms = QuadraticTerms {
        n_sites: n,
        hopping: Vec::new(),
        pairing: Vec::new(),
        constant: 0.0,
    };
    let (reach, beta) = match hopping {
        KitaevHopping::NearestNeighbor => (1, f64::INFINITY),
        KitaevHopping::PowerLaw { beta } => (n / 2, beta),
    };
    for j in 0..n {
        // -t sum_l w(l) (c_j^dag c_{j+l} + h.c.), each bond once.
        for l in 1..=reach {
            let w = if reach == 1 { 1.0 } else { weight(l, beta) };
            let coef = Complex64::new(-t * w * boundary_sign(j + l), 0.0);
            let target = (j + l) % n;
            terms.hopping.push((j, target, coef));
            terms.hopping.push((target, j, coef.conj()));
        }
        // (Delta / 2) sum_l |l|_p^-alpha (c_j c_{j+l} + h.c.) over every offset.
        for l in 1..n {
            let coef = 0.5 * delta * weight(ring_distance(l, n), alpha) * boundary_sign(j + l);
            terms.pairing.push((j, (j + l) % n, Complex64::new(coef, 0.0)));
        }
        // -mu (n_j - 1/2)
        terms.hopping.push((j, j, Complex64::new(-mu, 0.0)));
    }
    terms.constant = 0.5 * mu * n as f64;
    terms
}

/// Real-space quadratic Hamiltonian of `spec`.
pub fn real_space_terms(spec: &ModelSpec) -> Result<QuadraticTerms> {
    spec.validate()?;
    check_size(spec.n_sites())?;
    if spec.variant.has_pairing() {
        return Ok(kitaev_terms(spec));
    }
    let n = spec.n_sites();
    let a = translation_kernel(spec)?;
    let mut hopping = Vec::new();
    for i in 0..n {
        for (r, &coef) in a.iter().enumerate() {
            if coef != ZERO {
                hopping.push((i, (i + r) % n, coef));
            }
        }
    }
    Ok(QuadraticTerms {
        n_sites: n,
        hopping,
        pairing: Vec::new(),
        constant: 0.0,
    })
}

fn check_size(n_sites: usize) -> Result<()> {
    if n_sites > MAX_ORACLE_SITES {
        return Err(Error::InvalidArgument(format!(
            "exact diagonalisation is limited to {MAX_ORACLE_SITES} sites, got {n_sites}"
        )));
    }
    Ok(())
}

fn parity_below(state: u32, site: usize) -> f64 {
    if (state & ((1u32 << site) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `c_site |state>` as `(new_state, sign)`, or `None` if the site is empty.
pub(crate) fn annihilate(state: u32, site: usize) -> Option<(u32, f64)> {
    (state >> site & 1 == 1).then(|| (state ^ (1 << site), parity_below(state, site)))
}

/// `c_site^dag |state>`, or `None` if the site is occupied.
pub(crate) fn create(state: u32, site: usize) -> Option<(u32, f64)> {
    (state >> site & 1 == 0).then(|| (state | (1 << site), parity_below(state, site)))
}

/// `coef c_i^dag c_j |state>`.
fn hop(state: u32, i: usize, j: usize) -> Option<(u32, f64)> {
    let (s1, a) = annihilate(state, j)?;
    let (s2, b) = create(s1, i)?;
    Some((s2, a * b))
}

/// `c_i c_j |state>`.
fn pair_annihilate(state: u32, i: usize, j: usize) -> Option<(u32, f64)> {
    let (s1, a) = annihilate(state, j)?;
    let (s2, b) = annihilate(s1, i)?;
    Some((s2, a * b))
}

/// `c_j^dag c_i^dag |state>`, the adjoint of `c_i c_j`.
fn pair_create(state: u32, i: usize, j: usize) -> Option<(u32, f64)> {
    let (s1, a) = create(state, i)?;
    let (s2, b) = create(s1, j)?;
    Some((s2, a * b))
}

fn apply_terms(terms: &QuadraticTerms, state: u32, mut emit: impl FnMut(u32, Complex64)) {
    for &(i, j, coef) in &terms.hopping {
        if let Some((s, sign)) = hop(state, i, j) {
            emit(s, coef * sign);
        }
    }
    for &(i, j, coef) in &terms.pairing {
        if let Some((s, sign)) = pair_annihilate(state, i, j) {
            emit(s, coef * sign);
        }
        if let Some((s, sign)) = pair_create(state, i, j) {
            emit(s, coef.conj() * sign);
        }
    }
    emit(state, Complex64::new(terms.constant, 0.0));
}

/// Dense matrix of `terms` restricted to the basis states in `basis`.
fn sector_matrix(terms: &QuadraticTerms, basis: &[u32]) -> Result<DMatrix<Complex64>> {
    let dim_full = 1usize << terms.n_sites;
    let mut index = vec![usize::MAX; dim_full];
    for (k, &b) in basis.iter().enumerate() {
        index[b as usize] = k;
    }
    let mut h = DMatrix::from_element(basis.len(), basis.len(), ZERO);
    let mut leak = false;
    for (col, &b) in basis.iter().enumerate() {
        apply_terms(terms, b, |s, v| match index[s as usize] {
            usize::MAX => leak |= v != ZERO,
            row => h[(row, col)] += v,
        });
    }
    if leak {
        return Err(Error::InvalidArgument(
            "Hamiltonian does not preserve the requested sector".into(),
        ));
    }
    Ok(h)
}

/// Full `2^N x 2^N` Fock-space Hamiltonian of `spec`.
pub fn oracle_hamiltonian(spec: &ModelSpec) -> Result<DMatrix<Complex64>> {
    let terms = real_space_terms(spec)?;
    let basis: Vec<u32> = (0..1u32 << terms.n_sites).collect();
    sector_matrix(&terms, &basis)
}

/// Many-body ground state with its energy and the gap to the first excitation
/// in the sectors that were searched.
#[derive(Debug, Clone)]
pub struct FockState {
    pub n_sites: usize,
    /// Amplitudes over all `2^N` basis states, unit norm.
    pub amplitudes: DVector<Complex64>,
    pub energy: f64,
    pub gap: f64,
}

fn sector_ground(terms: &QuadraticTerms, basis: &[u32]) -> Result<(f64, f64, DVector<Complex64>)> {
    let h = sector_matrix(terms, basis)?;
    let (values, vectors) = hermitian_eigen(h)?;
    let second = values.get(1).copied().unwrap_or(f64::INFINITY);
    Ok((values[0], second, vectors[0].clone()))
}

fn embed(n_sites: usize, basis: &[u32], v: &DVector<Complex64>) -> DVector<Complex64> {
    let mut full = DVector::from_element(1 << n_sites, ZERO);
    for (k, &b) in basis.iter().enumerate() {
        full[b as usize] = v[k];
    }
    full
}

/// Ground state of `spec` by exact diagonalisation.
///
/// Number-conserving models are solved in the particle-number sector fixed by
/// the filling (or, under a chemical potential, in every sector); pairing
/// models in both fermion-parity sectors. States with a many-body gap below
/// [`MIN_ORACLE_GAP`] are rejected.
pub fn oracle_ground_state(spec: &ModelSpec) -> Result<FockState> {
    let terms = real_space_terms(spec)?;
    let n = terms.n_sites;
    let all: Vec<u32> = (0..1u32 << n).collect();
    let sectors: Vec<Vec<u32>> = match spec.occupation {
        OccupationRule::FixedFilling(f) if !spec.variant.has_pairing() => {
            let particles = (f * n as f64).round() as u32;
            vec![all.iter().copied().filter(|b| b.count_ones() == particles).collect()]
        }
        _ if spec.variant.has_pairing() => (0..2)
            .map(|p| all.iter().copied().filter(|b| b.count_ones() % 2 == p).collect())
            .collect(),
        _ => (0..=n as u32)
            .map(|k| all.iter().copied().filter(|b| b.count_ones() == k).collect())
            .collect(),
    };
    let mut levels: Vec<(f64, f64, usize, DVector<Complex64>)> = Vec::new();
    for (s, basis) in sectors.iter().enumerate() {
        let (e0, e1, v) = sector_ground(&terms, basis)?;
        levels.push((e0, e1, s, v));
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (energy, own_second, sector, vector) = levels[0].clone();
    let other_best = levels.get(1).map_or(f64::INFINITY, |l| l.0);
    let gap = own_second.min(other_best) - energy;
    if gap < MIN_ORACLE_GAP {
        return Err(Error::DegenerateGroundState { gap });
    }
    Ok(FockState {
        n_sites: n,
        amplitudes: embed(n, &sectors[sector], &vector),
        energy,
        gap,
    })
}

impl FockState {
    /// `<psi| op |psi>` for an operator given by its action on basis states.
    fn expectation(&self, op: impl Fn(u32) -> Option<(u32, f64)>) -> Complex64 {
        let mut acc = ZERO;
        for (b, amp) in self.amplitudes.iter().enumerate() {
            if *amp == ZERO {
                continue;
            }
            if let Some((s, sign)) = op(b as u32) {
                acc += self.amplitudes[s as usize].conj() * amp * sign;
            }
        }
        acc
    }

    fn site_index(&self, site: usize) -> usize {
        assert!(
            (1..=self.n_sites).contains(&site),
            "site {site} outside 1..={}",
            self.n_sites
        );
        site - 1
    }

    /// `<c_i^dag c_j>` for 1-based sites.
    pub fn hopping_correlator(&self, i: usize, j: usize) -> Complex64 {
        let (i, j) = (self.site_index(i), self.site_index(j));
        self.expectation(|b| hop(b, i, j))
    }

    /// `<c_i c_j>` for 1-based sites.
    pub fn anomalous_correlator(&self, i: usize, j: usize) -> Complex64 {
        let (i, j) = (self.site_index(i), self.site_index(j));
        self.expectation(|b| pair_annihilate(b, i, j))
    }

    /// `<n_i n_j> - <n_i><n_j>` for 1-based sites.
    pub fn density_covariance(&self, i: usize, j: usize) -> f64 {
        let (i, j) = (self.site_index(i), self.site_index(j));
        let count = |mask: u32| -> f64 {
            self.amplitudes
                .iter()
                .enumerate()
                .filter(|(b, _)| *b as u32 & mask == mask)
                .map(|(_, a)| a.norm_sqr())
                .sum()
        };
        count(1 << i | 1 << j) - count(1 << i) * count(1 << j)
    }

    /// `<(-1)^N_F>`.
    pub fn parity(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(b, a)| if b.count_ones() % 2 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

/// Von Neumann entropy of the 1-based `sites` by explicit partial trace.
///
/// Modes are first reordered so that the subsystem precedes its complement;
/// each basis state picks up the sign of that permutation, which makes the
/// trace valid for non-contiguous subsystems. The smaller of the two sides is
/// traced out.
pub fn oracle_reduced_entropy(state: &FockState, sites: &[usize]) -> Result<f64> {
    let n = state.n_sites;
    let mut sub = vec![false; n];
    for &s in sites {
        if s == 0 || s > n || std::mem::replace(&mut sub[s - 1], true) {
            return Err(Error::InvalidArgument(format!(
                "invalid or repeated site {s} for a {n}-site chain"
            )));
        }
    }
    let inside: Vec<usize> = (0..n).filter(|&j| sub[j]).collect();
    let outside: Vec<usize> = (0..n).filter(|&j| !sub[j]).collect();
    if inside.is_empty() || outside.is_empty() {
        return Ok(0.0);
    }
    let compress = |b: u32, modes: &[usize]| -> usize {
        modes
            .iter()
            .enumerate()
            .map(|(k, &m)| ((b >> m & 1) as usize) << k)
            .sum()
    };
    let mut psi = DMatrix::from_element(1 << inside.len(), 1 << outside.len(), ZERO);
    for (b, amp) in state.amplitudes.iter().enumerate() {
        if *amp == ZERO {
            continue;
        }
        let b = b as u32;
        // Moving each occupied subsystem mode past the occupied complement
        // modes below it.
        let swaps: u32 = inside
            .iter()
            .filter(|&&m| b >> m & 1 == 1)
            .map(|&m| outside.iter().filter(|&&e| e < m && b >> e & 1 == 1).count() as u32)
            .sum();
        let sign = if swaps % 2 == 0 { 1.0 } else { -1.0 };
        psi[(compress(b, &inside), compress(b, &outside))] = amp * sign;
    }
    let rho = if psi.nrows() <= psi.ncols() {
        &psi * psi.adjoint()
    } else {
        psi.adjoint() * &psi
    };
    let eigenvalues = hermitian_eigenvalues(rho)?;
    Ok(eigenvalues
        .iter()
        .filter(|&&p| p > 1e-300)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        .max(0.0))
}

pub fn oracle_mi(state: &FockState, p: Partition) -> Result<f64> {
    let a = p.sites_a(state.n_sites)?;
    let b = p.sites_b(state.n_sites)?;
    let ab: Vec<usize> = a.iter().chain(&b).copied().collect();
    Ok(oracle_reduced_entropy(state, &a)? + oracle_reduced_entropy(state, &b)?
        - oracle_reduced_entropy(state, &ab)?)
}

/// Ground energy of the quadratic theory: the sum of occupied single-particle
/// energies, or `-(1/2) sum_k E_k` for pairing models.
pub fn quadratic_ground_energy(spec: &ModelSpec) -> Result<f64> {
    let state = crate::groundstate::ground_state(spec)?;
    let grid = &state.grid;
    Ok(match &state.occupation {
        crate::groundstate::Occupation::OccupiedSet(labels) => grid
            .labels
            .iter()
            .zip(&grid.energies)
            .filter(|(l, _)| labels.binary_search(l).is_ok())
            .map(|(_, e)| e)
            .sum(),
        crate::groundstate::Occupation::BdgAngles(_) => -0.5 * grid.energies.iter().sum::<f64>(),
    })
}
