//! Chain geometry, hopping and pairing kernels, and momentum-space spectra.
//!
//! All spectra are defined directly in momentum space. Real-space kernels are
//! only ever assembled by the Fock-space oracle.

use std::f64::consts::PI;

use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Periodic,
    Antiperiodic,
}

/// Ring of `n_sites` sites. Only even lengths are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainGeometry {
    n_sites: usize,
    boundary: Boundary,
}

impl ChainGeometry {
    pub fn new(n_sites: usize, boundary: Boundary) -> Result<Self> {
        if n_sites < 2 || n_sites % 2 != 0 {
            return Err(Error::InvalidModel(format!(
                "chain length must be a positive even integer, got {n_sites}"
            )));
        }
        Ok(Self { n_sites, boundary })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Integer mode labels in increasing-momentum order.
    ///
    /// Periodic chains use `n = -N/2, ..., N/2 - 1`; antiperiodic chains use
    /// `n = 0, ..., N - 1`.
    pub fn mode_labels(&self) -> Vec<i64> {
        let n = self.n_sites as i64;
        match self.boundary {
            Boundary::Periodic => (-n / 2..n / 2).collect(),
            Boundary::Antiperiodic => (0..n).collect(),
        }
    }

    pub fn momentum(&self, label: i64) -> f64 {
        let n = self.n_sites as f64;
        match self.boundary {
            Boundary::Periodic => 2.0 * PI * label as f64 / n,
            Boundary::Antiperiodic => -PI + 2.0 * PI * (label as f64 + 0.5) / n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum KitaevHopping {
    NearestNeighbor,
    /// Hopping `t / d^beta` over every ring distance `d`.
    PowerLaw { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Variant {
    /// `t_ij = t / |i-j|_p^alpha`. `alpha = inf` is the nearest-neighbour chain.
    PowerLawHopping { alpha: f64, t: f64 },
    /// `eps_k = -t sin(1 / k^gamma)` with odd `gamma`.
    FractalDispersion { gamma: u32, t: f64 },
    /// Power-law hopping with a phase `phi` per unit of oriented distance.
    PhaseModulatedHopping { alpha: f64, phi: f64, t: f64 },
    /// Hopping to windows of `2r + 1` sites centred at offsets `s1` and `s2`.
    SelectiveHopping {
        s1: usize,
        s2: usize,
        t1: f64,
        t2: f64,
        r: usize,
    },
    /// Kitaev chain with pairing decaying as `|i-j|_p^-alpha`.
    KitaevChain {
        alpha: f64,
        hopping: KitaevHopping,
        t: f64,
        delta: f64,
    },
}

impl Variant {
    pub fn has_pairing(&self) -> bool {
        matches!(self, Variant::KitaevChain { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::PowerLawHopping { .. } => "power_law",
            Variant::FractalDispersion { .. } => "fractal",
            Variant::PhaseModulatedHopping { .. } => "phase_modulated",
            Variant::SelectiveHopping { .. } => "selective",
            Variant::KitaevChain { .. } => "kitaev",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum OccupationRule {
    FixedFilling(f64),
    ChemicalPotential(f64),
}

/// Full description of one chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSpec {
    pub geometry: ChainGeometry,
    pub variant: Variant,
    pub occupation: OccupationRule,
}

impl ModelSpec {
    pub fn new(geometry: ChainGeometry, variant: Variant, occupation: OccupationRule) -> Result<Self> {
        let spec = Self {
            geometry,
            variant,
            occupation,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn power_law(n_sites: usize, alpha: f64, t: f64, filling: f64) -> Result<Self> {
        Self::new(
            ChainGeometry::new(n_sites, Boundary::Periodic)?,
            Variant::PowerLawHopping { alpha, t },
            OccupationRule::FixedFilling(filling),
        )
    }

    /// Nearest-neighbour tight-binding chain with unit hopping.
    pub fn tight_binding(n_sites: usize, filling: f64) -> Result<Self> {
        Self::power_law(n_sites, f64::INFINITY, 1.0, filling)
    }

    pub fn fractal(n_sites: usize, gamma: u32, t: f64, filling: f64) -> Result<Self> {
        Self::new(
            ChainGeometry::new(n_sites, Boundary::Periodic)?,
            Variant::FractalDispersion { gamma, t },
            OccupationRule::FixedFilling(filling),
        )
    }

    pub fn phase_modulated(n_sites: usize, alpha: f64, phi: f64, t: f64, filling: f64) -> Result<Self> {
        Self::new(
            ChainGeometry::new(n_sites, Boundary::Periodic)?,
            Variant::PhaseModulatedHopping { alpha, phi, t },
            OccupationRule::FixedFilling(filling),
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn selective(
        n_sites: usize,
        s1: usize,
        s2: usize,
        t1: f64,
        t2: f64,
        r: usize,
        filling: f64,
    ) -> Result<Self> {
        Self::new(
            ChainGeometry::new(n_sites, Boundary::Periodic)?,
            Variant::SelectiveHopping { s1, s2, t1, t2, r },
            OccupationRule::FixedFilling(filling),
        )
    }

    /// Antipodal hopping (`s1 = N/2`, `t2 = 0`, unit `t1`) with window half-width `r`.
    pub fn antipodal(n_sites: usize, r: usize, filling: f64) -> Result<Self> {
        Self::selective(n_sites, n_sites / 2, 0, 1.0, 0.0, r, filling)
    }

    /// Kitaev chain in the `Delta = 2t = 1` convention with nearest-neighbour hopping.
    pub fn kitaev(n_sites: usize, alpha: f64, mu: f64) -> Result<Self> {
        Self::new(
            ChainGeometry::new(n_sites, Boundary::Antiperiodic)?,
            Variant::KitaevChain {
                alpha,
                hopping: KitaevHopping::NearestNeighbor,
                t: 0.5,
                delta: 1.0,
            },
            OccupationRule::ChemicalPotential(mu),
        )
    }

    /// Kitaev chain with both pairing (`alpha`) and hopping (`beta`) long-ranged.
    pub fn kitaev_long_range_hopping(n_sites: usize, alpha: f64, beta: f64, mu: f64) -> Result<Self> {
        Self::new(
            ChainGeometry::new(n_sites, Boundary::Antiperiodic)?,
            Variant::KitaevChain {
                alpha,
                hopping: KitaevHopping::PowerLaw { beta },
                t: 0.5,
                delta: 1.0,
            },
            OccupationRule::ChemicalPotential(mu),
        )
    }

    pub fn n_sites(&self) -> usize {
        self.geometry.n_sites()
    }

    pub fn mu(&self) -> Option<f64> {
        match self.occupation {
            OccupationRule::ChemicalPotential(mu) => Some(mu),
            OccupationRule::FixedFilling(_) => None,
        }
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        let mut spec = *self;
        spec.occupation = OccupationRule::ChemicalPotential(mu);
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_filling(&self, filling: f64) -> Result<Self> {
        let mut spec = *self;
        spec.occupation = OccupationRule::FixedFilling(filling);
        spec.validate()?;
        Ok(spec)
    }

    /// Replaces the decay exponent: the pairing exponent for Kitaev chains,
    /// the hopping exponent for power-law and phase-modulated hopping.
    pub fn with_alpha(&self, new_alpha: f64) -> Result<Self> {
        let mut spec = *self;
        match &mut spec.variant {
            Variant::PowerLawHopping { alpha, .. }
            | Variant::PhaseModulatedHopping { alpha, .. }
            | Variant::KitaevChain { alpha, .. } => *alpha = new_alpha,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "variant {} has no decay exponent",
                    other.name()
                )))
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Multiplies every energy scale (hoppings, pairing, chemical potential) by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rescaling factor must be positive, got {lambda}"
            )));
        }
        let mut spec = *self;
        match &mut spec.variant {
            Variant::PowerLawHopping { t, .. }
            | Variant::FractalDispersion { t, .. }
            | Variant::PhaseModulatedHopping { t, .. } => *t *= lambda,
            Variant::SelectiveHopping { t1, t2, .. } => {
                *t1 *= lambda;
                *t2 *= lambda;
            }
            Variant::KitaevChain { t, delta, .. } => {
                *t *= lambda;
                *delta *= lambda;
            }
        }
        if let OccupationRule::ChemicalPotential(mu) = &mut spec.occupation {
            *mu *= lambda;
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites();
        let invalid = |msg: String| Err(Error::InvalidModel(msg));
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && !v.is_nan() {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!("{name} must be > 0, got {v}")))
            }
        };
        let finite = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidModel(format!("{name} must be finite, got {v}")))
            }
        };

        if self.variant.has_pairing() {
            if self.geometry.boundary() != Boundary::Antiperiodic {
                return invalid("pairing models require antiperiodic boundary conditions".into());
            }
            match self.occupation {
                OccupationRule::ChemicalPotential(mu) => finite("mu", mu)?,
                OccupationRule::FixedFilling(_) => {
                    return invalid("pairing models are filled through a chemical potential".into())
                }
            }
        } else {
            if self.geometry.boundary() != Boundary::Periodic {
                return invalid("hopping-only models require periodic boundary conditions".into());
            }
            match self.occupation {
                OccupationRule::FixedFilling(f) => {
                    if !(f > 0.0 && f < 1.0) {
                        return invalid(format!("filling must lie in (0, 1), got {f}"));
                    }
                    let particles = f * n as f64;
                    if (particles - particles.round()).abs() > 1e-9 {
                        return invalid(format!(
                            "filling {f} times {n} sites is not an integer particle number"
                        ));
                    }
                }
                OccupationRule::ChemicalPotential(_) => {
                    return invalid("hopping-only models are specified at fixed filling".into())
                }
            }
        }

        match self.variant {
            Variant::PowerLawHopping { alpha, t } => {
                positive("alpha", alpha)?;
                finite("t", t)?;
            }
            Variant::FractalDispersion { gamma, t } => {
                if gamma % 2 == 0 {
                    return invalid(format!("gamma must be a positive odd integer, got {gamma}"));
                }
                finite("t", t)?;
            }
            Variant::PhaseModulatedHopping { alpha, phi, t } => {
                positive("alpha", alpha)?;
                finite("phi", phi)?;
                finite("t", t)?;
            }
            Variant::SelectiveHopping { s1, s2, t1, t2, .. } => {
                if s1 >= n || s2 >= n {
                    return invalid(format!("hopping offsets must be below {n}, got s1={s1}, s2={s2}"));
                }
                finite("t1", t1)?;
                finite("t2", t2)?;
            }
            Variant::KitaevChain {
                alpha,
                hopping,
                t,
                delta,
            } => {
                positive("alpha", alpha)?;
                if let KitaevHopping::PowerLaw { beta } = hopping {
                    positive("beta", beta)?;
                }
                finite("t", t)?;
                finite("delta", delta)?;
            }
        }
        Ok(())
    }
}

/// Ring distance `min(|i-j|, N-|i-j|)` between 1-based sites.
pub fn periodic_distance(i: usize, j: usize, n_sites: usize) -> Result<usize> {
    if i == 0 || j == 0 || i > n_sites || j > n_sites {
        return Err(Error::InvalidArgument(format!(
            "sites ({i}, {j}) outside 1..={n_sites}"
        )));
    }
    let raw = i.abs_diff(j);
    Ok(raw.min(n_sites - raw))
}

pub(crate) fn ring_distance(offset: usize, n_sites: usize) -> usize {
    let m = offset % n_sites;
    m.min(n_sites - m)
}

/// Signed offset along the shorter arc: `m` when `|m| <= N - |m|`, otherwise
/// the wrapped arm `m - N sign(m)`.
pub fn oriented_distance(m: i64, n_sites: usize) -> Result<i64> {
    let n = n_sites as i64;
    if m.abs() >= n {
        return Err(Error::InvalidArgument(format!(
            "offset {m} must satisfy |m| < {n_sites}"
        )));
    }
    if m.abs() <= n - m.abs() {
        Ok(m)
    } else {
        Ok(m - n * m.signum())
    }
}

fn check_exponent(alpha: f64) -> Result<()> {
    if alpha > 0.0 && !alpha.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("exponent must be > 0, got {alpha}")))
    }
}

/// `j^-alpha` for `j = 1..=count`. `alpha = inf` keeps only `j = 1`.
pub(crate) fn inverse_powers(alpha: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|j| (j as f64).powf(-alpha)).collect()
}

/// `sum_{n=1}^{N/2} cos(angle(n)) n^-alpha` with precomputed weights.
fn cosine_series(weights: &[f64], angle: impl Fn(usize) -> f64) -> f64 {
    weights
        .iter()
        .enumerate()
        .map(|(i, w)| w * angle(i + 1).cos())
        .sum()
}

/// `sum_{m=1}^{N-1} sin(angle(m)) |m|_p^-alpha` with weights indexed by ring distance.
fn sine_series(weights: &[f64], n_sites: usize, angle: impl Fn(usize) -> f64) -> f64 {
    (1..n_sites)
        .map(|m| weights[ring_distance(m, n_sites) - 1] * angle(m).sin())
        .sum()
}

/// Finite-chain polylogarithm `sum_{n=1}^{N/2} cos(nk) / n^alpha`.
pub fn ell_alpha(k: f64, alpha: f64, n_sites: usize) -> Result<f64> {
    check_exponent(alpha)?;
    let w = inverse_powers(alpha, n_sites / 2);
    Ok(cosine_series(&w, |n| n as f64 * k))
}

/// `sum_{m=1}^{N-1} sin(mk) / |m|_p^alpha`.
pub fn f_alpha(k: f64, alpha: f64, n_sites: usize) -> Result<f64> {
    check_exponent(alpha)?;
    let w = inverse_powers(alpha, n_sites / 2);
    Ok(sine_series(&w, n_sites, |m| m as f64 * k))
}

/// `2 pi (n j mod N) / N`: the exact reduction of `j k` for a periodic-grid label.
fn periodic_angle(label: i64, j: usize, n_sites: usize) -> f64 {
    let n = n_sites as i64;
    let reduced = (label * j as i64).rem_euclid(n);
    2.0 * PI * reduced as f64 / n_sites as f64
}

/// `pi ((2n+1) j mod 2N) / N`: the exact reduction of `j (k + pi)` for an
/// antiperiodic-grid label.
fn shifted_antiperiodic_angle(label: i64, j: usize, n_sites: usize) -> f64 {
    let two_n = 2 * n_sites as i64;
    let reduced = ((2 * label + 1) * j as i64).rem_euclid(two_n);
    PI * reduced as f64 / n_sites as f64
}

/// Dirichlet kernel `sum_{q=-r}^{r} cos(q k) = sin((r + 1/2) k) / sin(k / 2)`
/// evaluated termwise on a periodic-grid label; equals `2r + 1` at `k = 0`.
fn window_factor(label: i64, r: usize, n_sites: usize) -> f64 {
    1.0 + 2.0 * (1..=r).map(|q| periodic_angle(label, q, n_sites).cos()).sum::<f64>()
}

/// Momentum-space kernel of a pairing model at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BdgTerms {
    /// Kinetic energy `-2t h(k + pi)` without the chemical potential.
    pub kinetic: f64,
    /// Pairing amplitude `Delta f_alpha(k + pi)`.
    pub gap: f64,
}

impl BdgTerms {
    pub fn xi(&self, mu: f64) -> f64 {
        self.kinetic - mu
    }

    pub fn energy(&self, mu: f64) -> f64 {
        self.xi(mu).hypot(self.gap)
    }
}

struct SeriesWeights {
    hopping: Option<Vec<f64>>,
    pairing: Vec<f64>,
}

fn kitaev_weights(variant: &Variant, n_sites: usize) -> Option<SeriesWeights> {
    match *variant {
        Variant::KitaevChain { alpha, hopping, .. } => Some(SeriesWeights {
            hopping: match hopping {
                KitaevHopping::NearestNeighbor => None,
                KitaevHopping::PowerLaw { beta } => Some(inverse_powers(beta, n_sites / 2)),
            },
            pairing: inverse_powers(alpha, n_sites / 2),
        }),
        _ => None,
    }
}

fn kitaev_terms(
    variant: &Variant,
    weights: &SeriesWeights,
    n_sites: usize,
    angle: impl Fn(usize) -> f64,
) -> BdgTerms {
    let Variant::KitaevChain { t, delta, .. } = *variant else {
        unreachable!("kitaev_terms called on a hopping-only variant")
    };
    let hop = match &weights.hopping {
        None => angle(1).cos(),
        Some(w) => cosine_series(w, &angle),
    };
    BdgTerms {
        kinetic: -2.0 * t * hop,
        gap: delta * sine_series(&weights.pairing, n_sites, &angle),
    }
}

/// Bogoliubov quasiparticle energy of a pairing model at momentum `k`.
///
/// In the `Delta = 2t = 1` convention with nearest-neighbour hopping this is
/// `sqrt((mu - cos k)^2 + f_alpha(k + pi)^2)`; power-law hopping replaces
/// `cos k` by `-ell_beta(k + pi)`.
pub fn bogoliubov_spectrum(spec: &ModelSpec, k: f64) -> Result<f64> {
    spec.validate()?;
    let n = spec.n_sites();
    let (Some(weights), Some(mu)) = (kitaev_weights(&spec.variant, n), spec.mu()) else {
        return Err(Error::InvalidArgument(
            "Bogoliubov spectrum requires a pairing model".into(),
        ));
    };
    let q = k + PI;
    Ok(kitaev_terms(&spec.variant, &weights, n, |j| j as f64 * q).energy(mu))
}

/// Single-particle energy `eps_k` of mode `n_k` (Bogoliubov energy for pairing models).
pub fn dispersion(spec: &ModelSpec, k: f64, n_k: i64) -> Result<f64> {
    spec.validate()?;
    let geometry = spec.geometry;
    let labels = geometry.mode_labels();
    if !labels.contains(&n_k) {
        return Err(Error::InvalidArgument(format!("mode label {n_k} is not on the grid")));
    }
    if (geometry.momentum(n_k) - k).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "momentum {k} does not match grid label {n_k}"
        )));
    }
    let n = spec.n_sites();
    if let Some(weights) = kitaev_weights(&spec.variant, n) {
        let mu = spec.mu().expect("validated pairing model has a chemical potential");
        let terms = kitaev_terms(&spec.variant, &weights, n, |j| {
            shifted_antiperiodic_angle(n_k, j, n)
        });
        return Ok(terms.energy(mu));
    }
    let weights = match spec.variant {
        Variant::PowerLawHopping { alpha, .. } | Variant::PhaseModulatedHopping { alpha, .. } => {
            inverse_powers(alpha, n / 2)
        }
        _ => Vec::new(),
    };
    Ok(hopping_energy(&spec.variant, &weights, n, k, n_k))
}

fn hopping_energy(variant: &Variant, weights: &[f64], n_sites: usize, k: f64, n_k: i64) -> f64 {
    match *variant {
        Variant::PowerLawHopping { t, .. } => {
            -2.0 * t * cosine_series(weights, |j| periodic_angle(n_k, j, n_sites))
        }
        Variant::FractalDispersion { gamma, t } => {
            if n_k == 0 {
                0.0
            } else {
                -t * (1.0 / k.powi(gamma as i32)).sin()
            }
        }
        Variant::PhaseModulatedHopping { phi, t, .. } => {
            -2.0 * t * cosine_series(weights, |j| periodic_angle(n_k, j, n_sites) + j as f64 * phi)
        }
        Variant::SelectiveHopping { s1, s2, t1, t2, r } => {
            let arms = t1 * periodic_angle(n_k, s1, n_sites).cos()
                + t2 * periodic_angle(n_k, s2, n_sites).cos();
            -2.0 * arms * window_factor(n_k, r, n_sites)
        }
        Variant::KitaevChain { .. } => unreachable!("pairing handled separately"),
    }
}

/// Brillouin-zone modes with their energies.
#[derive(Debug, Clone)]
pub struct ModeGrid {
    pub geometry: ChainGeometry,
    /// Integer labels `n_k`, one per mode.
    pub labels: Vec<i64>,
    /// Momenta, strictly increasing.
    pub momenta: Vec<f64>,
    /// `eps_k` (single-particle energies, or Bogoliubov energies for pairing models).
    pub energies: Vec<f64>,
    /// `theta_k`, filled in once a pairing ground state is built.
    pub bogoliubov_angles: Option<Vec<f64>>,
    /// Kinetic and pairing terms per mode (pairing models only).
    pub bdg_terms: Option<Vec<BdgTerms>>,
    /// Chemical potential the Bogoliubov energies were evaluated at.
    pub mu: Option<f64>,
}

impl ModeGrid {
    pub fn build(spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        let geometry = spec.geometry;
        let n = geometry.n_sites();
        let labels = geometry.mode_labels();
        let momenta: Vec<f64> = labels.iter().map(|&l| geometry.momentum(l)).collect();

        if let Some(weights) = kitaev_weights(&spec.variant, n) {
            let mu = spec.mu().expect("validated pairing model has a chemical potential");
            let terms: Vec<BdgTerms> = labels
                .iter()
                .map(|&label| {
                    kitaev_terms(&spec.variant, &weights, n, |j| {
                        shifted_antiperiodic_angle(label, j, n)
                    })
                })
                .collect();
            let energies = terms.iter().map(|t| t.energy(mu)).collect();
            return Ok(Self {
                geometry,
                labels,
                momenta,
                energies,
                bogoliubov_angles: None,
                bdg_terms: Some(terms),
                mu: Some(mu),
            });
        }

        let weights = match spec.variant {
            Variant::PowerLawHopping { alpha, .. } | Variant::PhaseModulatedHopping { alpha, .. } => {
                inverse_powers(alpha, n / 2)
            }
            _ => Vec::new(),
        };
        let energies: Vec<f64> = labels
            .iter()
            .zip(&momenta)
            .map(|(&label, &k)| hopping_energy(&spec.variant, &weights, n, k, label))
            .collect();
        if let Some(i) = energies.iter().position(|e| !e.is_finite()) {
            return Err(Error::NonFiniteEnergy { label: labels[i] });
        }
        Ok(Self {
            geometry,
            labels,
            momenta,
            energies,
            bogoliubov_angles: None,
            bdg_terms: None,
            mu: None,
        })
    }

    /// Same pairing kernel re-evaluated at another chemical potential; the
    /// momentum sums do not depend on `mu` and are reused.
    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        let Some(terms) = &self.bdg_terms else {
            return Err(Error::InvalidArgument(
                "only pairing grids carry a chemical potential".into(),
            ));
        };
        if !mu.is_finite() {
            return Err(Error::InvalidArgument(format!("mu must be finite, got {mu}")));
        }
        let mut grid = self.clone();
        grid.energies = terms.iter().map(|t| t.energy(mu)).collect();
        grid.bogoliubov_angles = None;
        grid.mu = Some(mu);
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_sites(&self) -> usize {
        self.geometry.n_sites()
    }

    pub(crate) fn phase_angle(&self, index: usize, displacement: i64) -> f64 {
        let n = self.n_sites();
        let label = self.labels[index];
        match self.geometry.boundary() {
            Boundary::Periodic => {
                let reduced = (label * displacement).rem_euclid(n as i64);
                2.0 * PI * reduced as f64 / n as f64
            }
            Boundary::Antiperiodic => {
                let reduced = ((2 * label + 1) * displacement).rem_euclid(2 * n as i64);
                PI * reduced as f64 / n as f64
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kahan_sum(terms: impl Iterator<Item = f64>) -> f64 {
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for x in terms {
            let y = x - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }

    #[test]
    fn periodic_distance_examples() {
        assert_eq!(periodic_distance(1, 3, 10).unwrap(), 2);
        assert_eq!(periodic_distance(1, 9, 10).unwrap(), 2);
        assert_eq!(periodic_distance(1, 6, 10).unwrap(), 5);
        assert!(periodic_distance(0, 3, 10).is_err());
        assert!(periodic_distance(1, 11, 10).is_err());
    }

    #[test]
    fn oriented_distance_examples() {
        assert_eq!(oriented_distance(3, 1004).unwrap(), 3);
        assert_eq!(oriented_distance(1000, 1004).unwrap(), -4);
        assert_eq!(oriented_distance(-3, 1004).unwrap(), -3);
        assert_eq!(oriented_distance(-1000, 1004).unwrap(), 4);
        assert!(oriented_distance(1004, 1004).is_err());
        assert!(oriented_distance(-1005, 1004).is_err());
    }

    #[test]
    fn odd_chains_rejected() {
        assert!(ChainGeometry::new(7, Boundary::Periodic).is_err());
        assert!(ChainGeometry::new(0, Boundary::Periodic).is_err());
    }

    #[test]
    fn ell_alpha_converges_to_zeta_and_eta() {
        // Tail of sum 1/n^2 beyond N/2 = 100000 is ~1e-5.
        let n = 200_000;
        let zeta2 = PI * PI / 6.0;
        assert!((ell_alpha(0.0, 2.0, n).unwrap() - zeta2).abs() < 2e-5);
        assert!((ell_alpha(PI, 2.0, n).unwrap() + PI * PI / 12.0).abs() < 1e-9);
        let k = 0.7;
        assert!((ell_alpha(k, 1e4, 100).unwrap() - k.cos()).abs() < 1e-15);
    }

    #[test]
    fn f_alpha_limits() {
        for &n in &[10usize, 200] {
            assert_eq!(f_alpha(0.0, 0.5, n).unwrap(), 0.0);
        }
        // Distance 1 occurs twice on the ring (m = 1 and m = N - 1).
        let (k, n) = (0.37f64, 50usize);
        let expected = k.sin() + ((n - 1) as f64 * k).sin();
        assert!((f_alpha(k, 1e4, n).unwrap() - expected).abs() < 1e-14);
        // On the antiperiodic grid the two arms add up to 2 sin k.
        let g = ChainGeometry::new(n, Boundary::Antiperiodic).unwrap();
        for label in g.mode_labels() {
            let q = g.momentum(label);
            assert!((f_alpha(q, 1e4, n).unwrap() - 2.0 * q.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn f_alpha_matches_reverse_compensated_sum() {
        let (k, alpha, n) = (PI / 2.0, 0.5, 200usize);
        let forward = f_alpha(k, alpha, n).unwrap();
        let reverse = kahan_sum((1..n).rev().map(|m| {
            let d = m.min(n - m) as f64;
            (m as f64 * k).sin() / d.powf(alpha)
        }));
        assert!((forward - reverse).abs() <= 1e-12 * reverse.abs().max(1.0));
    }

    #[test]
    fn antipodal_spectrum_closed_forms() {
        let n = 20;
        let r0 = ModelSpec::antipodal(n, 0, 0.5).unwrap();
        let r1 = ModelSpec::antipodal(n, 1, 0.5).unwrap();
        let g = r0.geometry;
        for label in g.mode_labels() {
            let k = g.momentum(label);
            let sign = if label.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            assert_eq!(dispersion(&r0, k, label).unwrap(), -2.0 * sign);
            let closed = -2.0 * sign * (1.0 + 2.0 * (2.0 * PI * label as f64 / n as f64).cos());
            assert!((dispersion(&r1, k, label).unwrap() - closed).abs() < 1e-12);
        }
        let k1 = g.momentum(1);
        assert_eq!(dispersion(&r0, k1, 1).unwrap(), 2.0);
    }

    #[test]
    fn selective_matches_tangent_form_off_singular_points() {
        // Written form: -2 [t1 cos(k s1) + t2 cos(k s2)] cos(kr) [1 + tan(kr)/tan(k/2)].
        let (n, s1, s2, t1, t2, r) = (60usize, 15usize, 12usize, 1.0, 0.7, 3usize);
        let spec = ModelSpec::selective(n, s1, s2, t1, t2, r, 0.5).unwrap();
        let g = spec.geometry;
        for label in g.mode_labels() {
            let k = g.momentum(label);
            let e = dispersion(&spec, k, label).unwrap();
            if label == 0 {
                assert!((e + 2.0 * (t1 + t2) * (2 * r + 1) as f64).abs() < 1e-12);
                continue;
            }
            let kr = k * r as f64;
            if kr.cos().abs() < 1e-6 {
                continue;
            }
            let written = -2.0
                * (t1 * (k * s1 as f64).cos() + t2 * (k * s2 as f64).cos())
                * kr.cos()
                * (1.0 + kr.tan() / (k / 2.0).tan());
            assert!((e - written).abs() < 1e-9, "n_k = {label}: {e} vs {written}");
        }
    }

    #[test]
    fn dispersion_examples() {
        let fractal = ModelSpec::fractal(1000, 1, 1.3, 0.5).unwrap();
        // k = 2/pi lies on no grid, so evaluate the closed form directly.
        assert!((-(1.3f64) * (1.0 / (2.0 / PI)).sin() + 1.3).abs() < 1e-15);
        assert_eq!(dispersion(&fractal, 0.0, 0).unwrap(), 0.0);

        let pl = ModelSpec::power_law(200_000, 2.0, 1.0, 0.5).unwrap();
        let e = dispersion(&pl, -PI, -100_000).unwrap();
        assert!((e - PI * PI / 6.0).abs() < 1e-9);
    }

    #[test]
    fn bogoliubov_examples() {
        let sr = ModelSpec::kitaev(2004, 1e4, 1.5).unwrap();
        assert!((bogoliubov_spectrum(&sr, 0.0).unwrap() - 0.5).abs() < 1e-12);
        let tb = ModelSpec::tight_binding(10, 0.5).unwrap();
        assert!(bogoliubov_spectrum(&tb, 0.1).is_err());
    }

    fn lowest_energy(spec: &ModelSpec) -> (f64, f64) {
        let g = ModeGrid::build(spec).unwrap();
        let i = (0..g.len()).min_by(|&a, &b| g.energies[a].total_cmp(&g.energies[b])).unwrap();
        (g.momenta[i], g.energies[i])
    }

    #[test]
    fn gap_closes_at_critical_points() {
        // mu = 1: minimum at the grid points next to k = 0, vanishing with N.
        let (k_small, e_small) = lowest_energy(&ModelSpec::kitaev(200, 1e4, 1.0).unwrap());
        let (k_large, e_large) = lowest_energy(&ModelSpec::kitaev(2004, 1e4, 1.0).unwrap());
        assert!(k_small.abs() < 0.02 && k_large.abs() < 2e-3);
        assert!(e_large < 5e-3 && e_large < e_small / 5.0);
        // Long-range pairing with alpha = 2 at mu = -1: minimum next to k = pi,
        // closing like q ln(1/q) in the distance q to it.
        let (_, e_small) = lowest_energy(&ModelSpec::kitaev(200, 2.0, -1.0).unwrap());
        let (k, e) = lowest_energy(&ModelSpec::kitaev(2004, 2.0, -1.0).unwrap());
        assert!((k.abs() - PI).abs() < 2e-3);
        assert!(e < 0.05 && e < e_small / 4.0);
    }

    #[test]
    fn grid_reduction_agrees_with_real_momentum() {
        let spec = ModelSpec::kitaev_long_range_hopping(64, 0.8, 1.7, 0.3).unwrap();
        let grid = ModeGrid::build(&spec).unwrap();
        for (i, &k) in grid.momenta.iter().enumerate() {
            let direct = bogoliubov_spectrum(&spec, k).unwrap();
            assert!((grid.energies[i] - direct).abs() < 1e-12);
        }
        let pl = ModelSpec::power_law(64, 1.3, 0.9, 0.25).unwrap();
        let grid = ModeGrid::build(&pl).unwrap();
        for (i, &k) in grid.momenta.iter().enumerate() {
            let direct = -2.0 * 0.9 * ell_alpha(k, 1.3, 64).unwrap();
            assert!((grid.energies[i] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn long_range_hopping_reduces_to_nearest_neighbour() {
        let a = ModeGrid::build(&ModelSpec::kitaev(40, 2.5, 0.4).unwrap()).unwrap();
        let b = ModeGrid::build(&ModelSpec::kitaev_long_range_hopping(40, 2.5, 1e4, 0.4).unwrap()).unwrap();
        for (x, y) in a.energies.iter().zip(&b.energies) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn momenta_strictly_increasing() {
        for spec in [
            ModelSpec::tight_binding(12, 0.5).unwrap(),
            ModelSpec::kitaev(12, 1.0, 0.5).unwrap(),
        ] {
            let g = ModeGrid::build(&spec).unwrap();
            assert_eq!(g.len(), 12);
            assert!(g.momenta.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn spec_validation() {
        assert!(ModelSpec::power_law(10, 2.0, 1.0, 0.25).is_err()); // 2.5 particles
        assert!(ModelSpec::fractal(10, 2, 1.0, 0.5).is_err());
        assert!(ModelSpec::power_law(10, -1.0, 1.0, 0.5).is_err());
        let bad = ModelSpec {
            geometry: ChainGeometry::new(10, Boundary::Periodic).unwrap(),
            variant: Variant::KitaevChain {
                alpha: 1.0,
                hopping: KitaevHopping::NearestNeighbor,
                t: 0.5,
                delta: 1.0,
            },
            occupation: OccupationRule::ChemicalPotential(0.0),
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn periodic_distance_symmetric_and_bounded(n in 1usize..200, a in 1usize..400, b in 1usize..400) {
            let n = 2 * n;
            let (i, j) = (1 + a % n, 1 + b % n);
            let d = periodic_distance(i, j, n).unwrap();
            prop_assert_eq!(d, periodic_distance(j, i, n).unwrap());
            prop_assert!(d <= n / 2);
        }

        #[test]
        fn oriented_distance_antisymmetric(n in 2usize..500, m in 1i64..1000) {
            let n = 2 * n;
            let m = 1 + m % (n as i64 - 1);
            prop_assume!(2 * m != n as i64);
            let d = oriented_distance(m, n).unwrap();
            prop_assert_eq!(d + oriented_distance(-m, n).unwrap(), 0);
            prop_assert_eq!(d.unsigned_abs() as usize, ring_distance(m as usize, n));
        }

        #[test]
        fn real_kernel_dispersions_are_even(n in 2usize..80, alpha in 0.1f64..4.0, r in 0usize..4) {
            let n = 2 * n;
            let specs = [
                ModelSpec::power_law(n, alpha, 1.0, 0.5).unwrap(),
                ModelSpec::selective(n, n / 3, n / 4, 1.0, 0.4, r, 0.5).unwrap(),
                ModelSpec::antipodal(n, r, 0.5).unwrap(),
            ];
            for spec in &specs {
                let g = spec.geometry;
                for label in 1..(n as i64 / 2) {
                    let e1 = dispersion(spec, g.momentum(label), label).unwrap();
                    let e2 = dispersion(spec, g.momentum(-label), -label).unwrap();
                    prop_assert!((e1 - e2).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn bogoliubov_nonnegative(mu in -3.0f64..3.0, alpha in 0.2f64..5.0, k in -3.1f64..3.1) {
            let spec = ModelSpec::kitaev(40, alpha, mu).unwrap();
            let e = bogoliubov_spectrum(&spec, k).unwrap();
            prop_assert!(e >= 0.0);
            let f = f_alpha(k + PI, alpha, 40).unwrap();
            if f.abs() < 1e-15 {
                prop_assert!((e - (mu - k.cos()).abs()).abs() < 1e-12);
            }
        }

        #[test]
        fn ell_alpha_matches_compensated_sum(k in -3.1f64..3.1, alpha in 0.2f64..4.0, n in 1usize..300) {
            let n = 2 * n;
            let direct = ell_alpha(k, alpha, n).unwrap();
            let reference = kahan_sum((1..=n / 2).map(|j| (j as f64 * k).cos() / (j as f64).powf(alpha)));
            prop_assert!((direct - reference).abs() <= 1e-12 * reference.abs().max(1.0));
        }
    }
}
