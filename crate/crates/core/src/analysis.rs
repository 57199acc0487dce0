//! Mutual information, parameter sweeps, entropy scaling fits and reference curves.

use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::subsystem_entropy;
use crate::groundstate::{
    correlation_matrix, density_covariance, ground_state, ground_state_on, GroundStateData,
};
use crate::lattice::{ModeGrid, ModelSpec};
use crate::{Error, Result};

/// Step applied to `mu` when a sweep point lands on a gapless ground state.
pub const GAPLESS_MU_SHIFT: f64 = 1e-6;

/// Two blocks of `l` sites separated by `gap` sites: `A = [a, a+l-1]`,
/// `B = [a+l+gap, a+2l+gap-1]`, indices taken around the ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Partition {
    pub l: usize,
    pub gap: usize,
    pub a_start: usize,
}

impl Partition {
    pub fn new(l: usize, gap: usize) -> Self {
        Self { l, gap, a_start: 1 }
    }

    pub fn starting_at(mut self, a_start: usize) -> Self {
        self.a_start = a_start;
        self
    }

    pub fn check(&self, n_sites: usize) -> Result<()> {
        if self.l == 0 {
            return Err(Error::InvalidArgument("block length must be >= 1".into()));
        }
        if 2 * self.l + self.gap > n_sites {
            return Err(Error::InvalidArgument(format!(
                "2l + d = {} exceeds the chain length {n_sites}",
                2 * self.l + self.gap
            )));
        }
        if self.a_start == 0 || self.a_start > n_sites {
            return Err(Error::InvalidArgument(format!(
                "a_start {} outside 1..={n_sites}",
                self.a_start
            )));
        }
        Ok(())
    }

    fn wrap(&self, offset: usize, n_sites: usize) -> usize {
        (self.a_start - 1 + offset) % n_sites + 1
    }

    pub fn sites_a(&self, n_sites: usize) -> Result<Vec<usize>> {
        self.check(n_sites)?;
        Ok((0..self.l).map(|o| self.wrap(o, n_sites)).collect())
    }

    pub fn sites_b(&self, n_sites: usize) -> Result<Vec<usize>> {
        self.check(n_sites)?;
        let first = self.l + self.gap;
        Ok((first..first + self.l).map(|o| self.wrap(o, n_sites)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MIRecord {
    pub l: usize,
    pub d: usize,
    pub x: f64,
    /// `l / d`; infinite for adjacent blocks.
    pub l_over_d: f64,
    pub s_a: f64,
    pub s_b: f64,
    pub s_ab: f64,
    pub mi: f64,
}

/// `x = l^2 / (l + d)^2` for `l >= 1`.
pub fn four_point_ratio(l: usize, d: usize) -> f64 {
    let (l, d) = (l as f64, d as f64);
    (l * l) / ((l + d) * (l + d))
}

fn check_ratio(x: f64) -> Result<()> {
    if (0.0..1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "four-point ratio must lie in [0, 1), got {x}"
        )))
    }
}

/// Free Dirac fermion mutual information `(1/3) ln(1 / (1 - x))`.
pub fn reference_dirac(x: f64) -> Result<f64> {
    check_ratio(x)?;
    Ok(-(-x).ln_1p() / 3.0)
}

/// Holographic mutual information: `0` for `x < 1/2`, else `(c/3) ln(x / (1 - x))`.
pub fn reference_holographic(x: f64, c: f64) -> Result<f64> {
    check_ratio(x)?;
    if !(c > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "central charge must be positive, got {c}"
        )));
    }
    if x < 0.5 {
        return Ok(0.0);
    }
    Ok(c / 3.0 * (x / (1.0 - x)).ln())
}

pub fn mutual_information(state: &GroundStateData, p: Partition) -> Result<MIRecord> {
    let n = state.n_sites();
    let a = p.sites_a(n)?;
    let b = p.sites_b(n)?;
    let union: Vec<usize> = a.iter().chain(&b).copied().collect();
    let entropy = |sites: &[usize]| -> Result<f64> {
        Ok(subsystem_entropy(&correlation_matrix(state, sites)?)?.entropy)
    };
    let s_a = entropy(&a)?;
    let s_b = entropy(&b)?;
    let s_ab = entropy(&union)?;
    Ok(MIRecord {
        l: p.l,
        d: p.gap,
        x: four_point_ratio(p.l, p.gap),
        l_over_d: p.l as f64 / p.gap as f64,
        s_a,
        s_b,
        s_ab,
        mi: s_a + s_b - s_ab,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Distance,
    Mu,
    Alpha,
    SubsystemSize,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Distance => "distance",
            SweepAxis::Mu => "mu",
            SweepAxis::Alpha => "alpha",
            SweepAxis::SubsystemSize => "subsystem_size",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    /// Value of the swept parameter as requested.
    pub param: f64,
    pub record: MIRecord,
    pub filling: f64,
    /// The point was evaluated at `mu + GAPLESS_MU_SHIFT` because the
    /// requested parameters gave a gapless ground state.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedPoint {
    pub param: f64,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub model: ModelSpec,
    pub axis: SweepAxis,
    /// Sorted by `param`.
    pub points: Vec<SweepPoint>,
    pub skipped: Vec<SkippedPoint>,
}

fn as_count(axis: SweepAxis, value: f64) -> Result<usize> {
    if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
        Ok(value as usize)
    } else {
        Err(Error::InvalidArgument(format!(
            "{} values must be non-negative integers, got {value}",
            axis.name()
        )))
    }
}

fn wrap_point(axis: SweepAxis, value: f64) -> impl Fn(Error) -> Error {
    move |e| Error::SweepPoint {
        axis: axis.name(),
        value,
        source: Box::new(e),
    }
}

/// Ground state of `spec`, retried at `mu + GAPLESS_MU_SHIFT` when gapless.
fn gapped_state(spec: &ModelSpec, grid: Option<&ModeGrid>) -> Result<(GroundStateData, bool)> {
    let build = |s: &ModelSpec| match grid {
        Some(g) => ground_state_on(s, g),
        None => ground_state(s),
    };
    match build(spec) {
        Err(Error::GaplessMode { k }) => {
            let mu = spec.mu().expect("only pairing models can be gapless");
            log::warn!("gapless mode at k = {k} for mu = {mu}; shifting mu by {GAPLESS_MU_SHIFT}");
            let shifted = spec.with_mu(mu + GAPLESS_MU_SHIFT)?;
            Ok((build(&shifted)?, true))
        }
        other => other.map(|s| (s, false)),
    }
}

/// Runs a sweep along `axis`. `l` and `d` are the fixed block length and
/// gap; the swept one of them is ignored. Points whose partition does not fit
/// on the chain are skipped with a warning; any other failure aborts the
/// sweep with the offending parameter attached.
pub fn sweep(
    spec: &ModelSpec,
    axis: SweepAxis,
    values: &[f64],
    l: usize,
    d: usize,
    a_start: usize,
) -> Result<SweepResult> {
    spec.validate()?;
    let n = spec.n_sites();
    if matches!(axis, SweepAxis::Mu) && !spec.variant.has_pairing() {
        return Err(Error::InvalidArgument(
            "mu sweeps require a pairing model".into(),
        ));
    }

    let mut skipped = Vec::new();
    let mut jobs: Vec<(f64, Partition)> = Vec::new();
    for &v in values {
        let p = match axis {
            SweepAxis::Distance => Partition::new(l, as_count(axis, v)?),
            SweepAxis::SubsystemSize => Partition::new(as_count(axis, v)?, d),
            SweepAxis::Mu | SweepAxis::Alpha => Partition::new(l, d),
        }
        .starting_at(a_start);
        match p.check(n) {
            Ok(()) => jobs.push((v, p)),
            Err(e) if matches!(axis, SweepAxis::Distance | SweepAxis::SubsystemSize) => {
                log::warn!("skipping {} = {v}: {e}", axis.name());
                skipped.push(SkippedPoint {
                    param: v,
                    reason: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }

    let mut points: Vec<SweepPoint> = match axis {
        SweepAxis::Distance | SweepAxis::SubsystemSize => {
            let (state, flagged) = gapped_state(spec, None)?;
            jobs.par_iter()
                .map(|&(v, p)| {
                    let record = mutual_information(&state, p).map_err(wrap_point(axis, v))?;
                    Ok(SweepPoint {
                        param: v,
                        record,
                        filling: state.achieved_filling,
                        flagged,
                    })
                })
                .collect::<Result<_>>()?
        }
        SweepAxis::Mu => {
            let grid = ModeGrid::build(spec)?;
            jobs.par_iter()
                .map(|&(v, p)| {
                    let wrap = wrap_point(axis, v);
                    let s = spec.with_mu(v).map_err(&wrap)?;
                    let (state, flagged) = gapped_state(&s, Some(&grid)).map_err(&wrap)?;
                    let record = mutual_information(&state, p).map_err(&wrap)?;
                    Ok(SweepPoint {
                        param: v,
                        record,
                        filling: state.achieved_filling,
                        flagged,
                    })
                })
                .collect::<Result<_>>()?
        }
        SweepAxis::Alpha => jobs
            .par_iter()
            .map(|&(v, p)| {
                let wrap = wrap_point(axis, v);
                let s = spec.with_alpha(v).map_err(&wrap)?;
                let (state, flagged) = gapped_state(&s, None).map_err(&wrap)?;
                let record = mutual_information(&state, p).map_err(&wrap)?;
                Ok(SweepPoint {
                    param: v,
                    record,
                    filling: state.achieved_filling,
                    flagged,
                })
            })
            .collect::<Result<_>>()?,
    };
    points.sort_by(|a, b| a.param.total_cmp(&b.param));
    skipped.sort_by(|a, b| a.param.total_cmp(&b.param));
    Ok(SweepResult {
        model: *spec,
        axis,
        points,
        skipped,
    })
}

pub fn sweep_distance(spec: &ModelSpec, l: usize, d_values: &[usize]) -> Result<SweepResult> {
    let values: Vec<f64> = d_values.iter().map(|&d| d as f64).collect();
    sweep(spec, SweepAxis::Distance, &values, l, 0, 1)
}

pub fn sweep_subsystem_size(spec: &ModelSpec, l_values: &[usize], d: usize) -> Result<SweepResult> {
    let values: Vec<f64> = l_values.iter().map(|&l| l as f64).collect();
    sweep(spec, SweepAxis::SubsystemSize, &values, 0, d, 1)
}

pub fn sweep_mu(spec: &ModelSpec, mu_values: &[f64], l: usize, d: usize) -> Result<SweepResult> {
    sweep(spec, SweepAxis::Mu, mu_values, l, d, 1)
}

pub fn sweep_alpha(spec: &ModelSpec, alpha_values: &[f64], l: usize, d: usize) -> Result<SweepResult> {
    sweep(spec, SweepAxis::Alpha, alpha_values, l, d, 1)
}

/// Power-law fit `S = prefactor * l^exponent`, solved as a least-squares line
/// in `(ln l, ln S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Residual norm of the log-log fit.
    pub residual: f64,
    /// Root-mean-square misfit in entropy units.
    pub entropy_misfit: f64,
    pub l_values: Vec<usize>,
    pub entropies: Vec<f64>,
}

/// Logarithmic fit `S = coefficient * ln l + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogFit {
    pub coefficient: f64,
    pub offset: f64,
    /// Root-mean-square misfit in entropy units.
    pub entropy_misfit: f64,
}

fn block_entropies(spec: &ModelSpec, l_values: &[usize]) -> Result<(Vec<usize>, Vec<f64>)> {
    if l_values.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "scaling fits need at least 5 block lengths, got {}",
            l_values.len()
        )));
    }
    let n = spec.n_sites();
    if let Some(&bad) = l_values.iter().find(|&&l| l == 0 || l > n / 4) {
        return Err(Error::InvalidArgument(format!(
            "block length {bad} outside 1..={}",
            n / 4
        )));
    }
    let state = ground_state(spec)?;
    let entropies = l_values
        .par_iter()
        .map(|&l| {
            let sites: Vec<usize> = (1..=l).collect();
            Ok(subsystem_entropy(&correlation_matrix(&state, &sites)?)?.entropy)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((l_values.to_vec(), entropies))
}

/// Ordinary least squares `y = slope * x + intercept`.
fn line_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "scaling fit needs at least two distinct block lengths".into(),
        ));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v * v, c + 1));
    (sum / count.max(1) as f64).sqrt()
}

/// Fits `S(l) ~ l^beta` for contiguous blocks starting at site 1. Blocks with
/// non-positive entropy are dropped with a warning.
pub fn ee_scaling_fit(spec: &ModelSpec, l_values: &[usize]) -> Result<ScalingFit> {
    let (ls, entropies) = block_entropies(spec, l_values)?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (&l, &s) in ls.iter().zip(&entropies) {
        if s > 0.0 {
            x.push((l as f64).ln());
            y.push(s.ln());
        } else {
            log::warn!("block length {l} has entropy {s}; excluded from the fit");
        }
    }
    let (beta, ln_a) = line_fit(&x, &y)?;
    let residual = x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - beta * a - ln_a).powi(2))
        .sum::<f64>()
        .sqrt();
    let prefactor = ln_a.exp();
    let entropy_misfit = rms(
        ls.iter()
            .zip(&entropies)
            .map(|(&l, &s)| s - prefactor * (l as f64).powf(beta)),
    );
    Ok(ScalingFit {
        exponent: beta,
        prefactor,
        residual,
        entropy_misfit,
        l_values: ls,
        entropies,
    })
}

/// Fits `S(l) = c ln l + b` over the same blocks as [`ee_scaling_fit`], for
/// comparing against logarithmic growth.
pub fn log_scaling_fit(spec: &ModelSpec, l_values: &[usize]) -> Result<LogFit> {
    let (ls, entropies) = block_entropies(spec, l_values)?;
    let x: Vec<f64> = ls.iter().map(|&l| (l as f64).ln()).collect();
    let (coefficient, offset) = line_fit(&x, &entropies)?;
    let entropy_misfit = rms(
        x.iter()
            .zip(&entropies)
            .map(|(a, s)| s - coefficient * a - offset),
    );
    Ok(LogFit {
        coefficient,
        offset,
        entropy_misfit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    /// Mutual information of the partition.
    pub lhs: f64,
    /// `cov(n_i, n_j)^2 / 2` for unit-norm number operators.
    pub rhs: f64,
    pub covariance: f64,
    pub holds: bool,
}

/// Checks `I(A:B) >= <n_i n_j>_c^2 / 2` for `i` in `A` and `j` in `B`.
pub fn mi_correlation_bound_check(
    state: &GroundStateData,
    p: Partition,
    i: usize,
    j: usize,
) -> Result<BoundCheck> {
    let n = state.n_sites();
    if !p.sites_a(n)?.contains(&i) || !p.sites_b(n)?.contains(&j) {
        return Err(Error::InvalidArgument(format!(
            "sites ({i}, {j}) must lie in blocks A and B respectively"
        )));
    }
    let lhs = mutual_information(state, p)?.mi;
    let covariance = density_covariance(state, i, j)?;
    let rhs = 0.5 * covariance * covariance;
    Ok(BoundCheck {
        lhs,
        rhs,
        covariance,
        holds: lhs >= rhs - 1e-10,
    })
}
