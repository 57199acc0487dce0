//! Ground states of the quadratic chains and their real-space two-point functions.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::lattice::{ModeGrid, ModelSpec, OccupationRule, Variant};
use crate::{Error, Result};

/// Global sign `s` in `F_ab = (1/N) sum_k e^{ik(a-b)} s (i/2) sin 2theta_k`.
/// Fixed by comparison with exact diagonalisation of small chains.
pub(crate) const ANOMALOUS_SIGN: f64 = -1.0;

/// Relative width of the band around the Fermi level inside which energies
/// count as degenerate.
const DEGENERACY_TOL: f64 = 1e-10;

/// Bogoliubov energies below this are treated as zero modes.
const GAPLESS_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub enum Occupation {
    /// Sorted labels `n_k` of the filled modes.
    OccupiedSet(Vec<i64>),
    /// `theta_k` per mode, in grid order.
    BdgAngles(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct GroundStateData {
    pub grid: ModeGrid,
    pub occupation: Occupation,
    pub achieved_filling: f64,
    /// Set when the fixed-filling rule had to choose among modes degenerate at
    /// the Fermi level.
    pub degenerate_fermi_level: bool,
    weights: ModeWeights,
}

#[derive(Debug, Clone)]
enum ModeWeights {
    Occupied(Vec<usize>),
    Bdg { density: Vec<f64>, half_sin2: Vec<f64> },
}

impl GroundStateData {
    pub fn n_sites(&self) -> usize {
        self.grid.n_sites()
    }

    pub fn has_pairing(&self) -> bool {
        matches!(self.occupation, Occupation::BdgAngles(_))
    }
}

fn energy_order(grid: &ModeGrid, a: usize, b: usize) -> std::cmp::Ordering {
    let (na, nb) = (grid.labels[a], grid.labels[b]);
    grid.energies[a]
        .total_cmp(&grid.energies[b])
        .then(na.abs().cmp(&nb.abs()))
        .then(nb.cmp(&na))
}

fn tie_order(grid: &ModeGrid, a: usize, b: usize) -> std::cmp::Ordering {
    let (na, nb) = (grid.labels[a], grid.labels[b]);
    na.abs().cmp(&nb.abs()).then(nb.cmp(&na))
}

/// Fills the modes of a hopping-only grid.
///
/// At fixed filling the `round(f N)` lowest modes are taken. Energies within
/// a relative `1e-10` of the Fermi level are treated as one degenerate shell,
/// filled in order of ascending `|n_k|`, positive `n_k` first; when the shell
/// does not fit completely the state is flagged and a warning logged.
pub fn occupy_modes(grid: &ModeGrid, rule: OccupationRule) -> Result<GroundStateData> {
    if grid.bdg_terms.is_some() {
        return Err(Error::InvalidArgument(
            "pairing grids are filled through bdg_angles".into(),
        ));
    }
    if let Some(i) = grid.energies.iter().position(|e| !e.is_finite()) {
        return Err(Error::NonFiniteEnergy {
            label: grid.labels[i],
        });
    }
    let n = grid.len();
    let mut degenerate = false;
    let mut chosen: Vec<usize> = match rule {
        OccupationRule::FixedFilling(f) => {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::InvalidArgument(format!(
                    "filling must lie in [0, 1], got {f}"
                )));
            }
            let target = (f * n as f64).round() as usize;
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| energy_order(grid, a, b));
            if target == 0 || target == n {
                order.truncate(target);
                order
            } else {
                let fermi = grid.energies[order[target - 1]];
                let tol = DEGENERACY_TOL * fermi.abs().max(1.0);
                let below: Vec<usize> = order
                    .iter()
                    .copied()
                    .filter(|&i| grid.energies[i] < fermi - tol)
                    .collect();
                let mut shell: Vec<usize> = order
                    .iter()
                    .copied()
                    .filter(|&i| (grid.energies[i] - fermi).abs() <= tol)
                    .collect();
                shell.sort_by(|&a, &b| tie_order(grid, a, b));
                let slots = target - below.len();
                if shell.len() > slots {
                    degenerate = true;
                    log::warn!(
                        "Fermi level at energy {fermi:.12} is {}-fold degenerate with {slots} \
                         particle(s) to place; filling by ascending |n_k|",
                        shell.len()
                    );
                }
                below.into_iter().chain(shell.into_iter().take(slots)).collect()
            }
        }
        OccupationRule::ChemicalPotential(mu) => {
            (0..n).filter(|&i| grid.energies[i] < mu).collect()
        }
    };
    chosen.sort_unstable();
    let mut labels: Vec<i64> = chosen.iter().map(|&i| grid.labels[i]).collect();
    labels.sort_unstable();
    Ok(GroundStateData {
        grid: grid.clone(),
        occupation: Occupation::OccupiedSet(labels),
        achieved_filling: chosen.len() as f64 / n as f64,
        degenerate_fermi_level: degenerate,
        weights: ModeWeights::Occupied(chosen),
    })
}

/// Bogoliubov angles of the pairing ground state.
///
/// `2 theta_k = atan2(Delta f_alpha(k + pi), xi_k)` with `xi_k = -2t h(k + pi) - mu`,
/// so that `sin^2 theta_k = (1 - xi_k / E_k) / 2` is the mode occupation and a
/// large positive `mu` fills the band.
pub fn bdg_angles(spec: &ModelSpec, grid: &ModeGrid) -> Result<GroundStateData> {
    if !matches!(spec.variant, Variant::KitaevChain { .. }) {
        return Err(Error::InvalidArgument(
            "Bogoliubov angles require a pairing model".into(),
        ));
    }
    spec.validate()?;
    let mu = spec.mu().expect("validated pairing model has a chemical potential");
    let grid = match grid.mu {
        Some(m) if m == mu => grid.clone(),
        _ => grid.with_mu(mu)?,
    };
    let terms = grid
        .bdg_terms
        .as_ref()
        .expect("pairing grid carries Bogoliubov terms");
    let n = grid.len();
    let mut theta = Vec::with_capacity(n);
    let mut density = Vec::with_capacity(n);
    let mut half_sin2 = Vec::with_capacity(n);
    for (i, t) in terms.iter().enumerate() {
        let xi = t.xi(mu);
        let e = xi.hypot(t.gap);
        if !e.is_finite() {
            return Err(Error::NonFiniteEnergy {
                label: grid.labels[i],
            });
        }
        if e < GAPLESS_TOL {
            return Err(Error::GaplessMode { k: grid.momenta[i] });
        }
        // `+ 0.0` maps a signed zero pairing term onto the theta = pi/2 branch.
        let two_theta = (t.gap + 0.0).atan2(xi);
        let th = 0.5 * two_theta;
        theta.push(th);
        density.push(th.sin().powi(2));
        half_sin2.push(0.5 * two_theta.sin());
    }
    let filling = density.iter().sum::<f64>() / n as f64;
    let mut grid = grid;
    grid.bogoliubov_angles = Some(theta.clone());
    Ok(GroundStateData {
        grid,
        occupation: Occupation::BdgAngles(theta),
        achieved_filling: filling,
        degenerate_fermi_level: false,
        weights: ModeWeights::Bdg { density, half_sin2 },
    })
}

pub fn ground_state(spec: &ModelSpec) -> Result<GroundStateData> {
    let grid = ModeGrid::build(spec)?;
    ground_state_on(spec, &grid)
}

/// Ground state of `spec` on an already built grid of the same model.
pub fn ground_state_on(spec: &ModelSpec, grid: &ModeGrid) -> Result<GroundStateData> {
    if spec.variant.has_pairing() {
        bdg_angles(spec, grid)
    } else {
        occupy_modes(grid, spec.occupation)
    }
}

/// Mean occupation `(1/N) sum_k sin^2 theta_k` of the pairing ground state.
pub fn filling_from_mu(spec: &ModelSpec) -> Result<f64> {
    if !spec.variant.has_pairing() {
        return Err(Error::InvalidArgument(
            "filling_from_mu requires a pairing model".into(),
        ));
    }
    Ok(ground_state(spec)?.achieved_filling)
}

/// Two-point functions restricted to `sites` (1-based, in the given order).
#[derive(Debug, Clone)]
pub struct CorrelationData {
    pub sites: Vec<usize>,
    /// `C_ab = <c_a^dag c_b>`.
    pub c: DMatrix<Complex64>,
    /// `F_ab = <c_a c_b>`, present for pairing models.
    pub f: Option<DMatrix<Complex64>>,
}

impl CorrelationData {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

fn check_sites(sites: &[usize], n_sites: usize) -> Result<()> {
    let mut seen = vec![false; n_sites + 1];
    for &s in sites {
        if s == 0 || s > n_sites {
            return Err(Error::InvalidArgument(format!(
                "site {s} outside 1..={n_sites}"
            )));
        }
        if std::mem::replace(&mut seen[s], true) {
            return Err(Error::InvalidArgument(format!("site {s} listed twice")));
        }
    }
    Ok(())
}

/// `(C(r), F(r))` for displacement `r = a - b >= 0`.
fn displacement_correlators(state: &GroundStateData, r: i64, sign: f64) -> (Complex64, Complex64) {
    let grid = &state.grid;
    let inv_n = 1.0 / grid.n_sites() as f64;
    match &state.weights {
        ModeWeights::Occupied(idx) => {
            let c: Complex64 = idx
                .iter()
                .map(|&i| Complex64::from_polar(1.0, grid.phase_angle(i, r)))
                .sum();
            (c * inv_n, Complex64::new(0.0, 0.0))
        }
        ModeWeights::Bdg { density, half_sin2 } => {
            let mut c = Complex64::new(0.0, 0.0);
            let mut f = Complex64::new(0.0, 0.0);
            for i in 0..grid.len() {
                let phase = Complex64::from_polar(1.0, grid.phase_angle(i, r));
                c += phase * density[i];
                f += phase * Complex64::new(0.0, sign * half_sin2[i]);
            }
            if r == 0 {
                f = Complex64::new(0.0, 0.0);
            }
            (c * inv_n, f * inv_n)
        }
    }
}

pub fn correlation_matrix(state: &GroundStateData, sites: &[usize]) -> Result<CorrelationData> {
    correlation_matrix_signed(state, sites, ANOMALOUS_SIGN)
}

/// As [`correlation_matrix`] with an explicit anomalous sign; used to check
/// that the oracle comparison is sensitive to it.
pub(crate) fn correlation_matrix_signed(
    state: &GroundStateData,
    sites: &[usize],
    sign: f64,
) -> Result<CorrelationData> {
    let n_sites = state.n_sites();
    check_sites(sites, n_sites)?;
    let mut table: HashMap<i64, (Complex64, Complex64)> = HashMap::new();
    for &a in sites {
        for &b in sites {
            let r = (a as i64 - b as i64).abs();
            table
                .entry(r)
                .or_insert_with(|| displacement_correlators(state, r, sign));
        }
    }
    let l = sites.len();
    let pairing = state.has_pairing();
    let mut c = DMatrix::zeros(l, l);
    let mut f = DMatrix::zeros(l, l);
    for (x, &a) in sites.iter().enumerate() {
        for (y, &b) in sites.iter().enumerate() {
            let r = a as i64 - b as i64;
            let (cr, fr) = table[&r.abs()];
            if r >= 0 {
                c[(x, y)] = cr;
                f[(x, y)] = fr;
            } else {
                c[(x, y)] = cr.conj();
                f[(x, y)] = -fr;
            }
        }
    }
    Ok(CorrelationData {
        sites: sites.to_vec(),
        c,
        f: pairing.then_some(f),
    })
}

/// Connected density correlator `<n_i n_j> - <n_i><n_j> = |F_ij|^2 - |C_ij|^2`
/// for distinct sites, from Wick's theorem.
pub fn density_covariance(state: &GroundStateData, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::InvalidArgument(format!(
            "density covariance needs distinct sites, got {i} twice"
        )));
    }
    let corr = correlation_matrix(state, &[i, j])?;
    let anomalous = corr.f.as_ref().map_or(0.0, |f| f[(0, 1)].norm_sqr());
    Ok(anomalous - corr.c[(0, 1)].norm_sqr())
}

/// Real antisymmetric `Gamma` with `M = 1 + i Gamma`, `M_pq = <a_p a_q>` over the
/// Majorana operators `a_{2q} = c_q + c_q^dag`, `a_{2q+1} = i (c_q - c_q^dag)`
/// (0-based within the site list).
#[derive(Debug, Clone)]
pub struct MajoranaMatrix {
    pub gamma: DMatrix<f64>,
}

impl MajoranaMatrix {
    /// `M = 1 + i Gamma`.
    pub fn to_complex(&self) -> DMatrix<Complex64> {
        let n = self.gamma.nrows();
        DMatrix::from_fn(n, n, |p, q| {
            Complex64::new(if p == q { 1.0 } else { 0.0 }, self.gamma[(p, q)])
        })
    }
}

pub fn majorana_matrix(corr: &CorrelationData) -> Result<MajoranaMatrix> {
    let f = corr.f.as_ref().ok_or(Error::MissingAnomalous)?;
    let c = &corr.c;
    let l = corr.len();
    let mut gamma = DMatrix::zeros(2 * l, 2 * l);
    for a in 0..l {
        for b in 0..l {
            let (cab, fab) = (c[(a, b)], f[(a, b)]);
            let delta = if a == b { 1.0 } else { 0.0 };
            gamma[(2 * a, 2 * b)] = 2.0 * cab.im + 2.0 * fab.im;
            gamma[(2 * a, 2 * b + 1)] = 2.0 * fab.re + 2.0 * cab.re - delta;
            gamma[(2 * a + 1, 2 * b)] = 2.0 * fab.re - 2.0 * cab.re + delta;
            gamma[(2 * a + 1, 2 * b + 1)] = 2.0 * cab.im - 2.0 * fab.im;
        }
    }
    Ok(MajoranaMatrix { gamma })
}
