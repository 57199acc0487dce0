//! Cross-validation of every engine path against exact diagonalisation.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{
    oracle_ground_state, oracle_mi, oracle_reduced_entropy, quadratic_ground_energy, FockState,
    MAX_ORACLE_SITES, MIN_ORACLE_GAP,
};
use crate::analysis::Partition;
use crate::entropy::subsystem_entropy;
use crate::groundstate::{correlation_matrix_signed, ground_state, GroundStateData, ANOMALOUS_SIGN};
use crate::lattice::{ModeGrid, ModelSpec};
use crate::{Error, Result};

/// Largest deviation accepted for any engine/oracle comparison.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub spec: ModelSpec,
}

/// Fixed-filling spec with the particle number closest to `target * N` whose
/// Fermi level is non-degenerate.
fn closed_shell(build: impl Fn(f64) -> Result<ModelSpec>, n: usize, target: f64) -> Option<ModelSpec> {
    let probe = build(0.5).ok()?;
    let grid = ModeGrid::build(&probe).ok()?;
    let mut energies = grid.energies.clone();
    energies.sort_by(f64::total_cmp);
    let ideal = target * n as f64;
    let mut candidates: Vec<usize> = (1..n).collect();
    candidates.sort_by(|a, b| {
        (*a as f64 - ideal)
            .abs()
            .total_cmp(&(*b as f64 - ideal).abs())
            .then(a.cmp(b))
    });
    candidates
        .into_iter()
        .find(|&p| energies[p] - energies[p - 1] >= MIN_ORACLE_GAP)
        .and_then(|p| build(p as f64 / n as f64).ok())
}

/// Small chains covering every model family, for even sizes `4..=max_sites`.
pub fn catalog(max_sites: usize) -> Vec<CatalogEntry> {
    let mut out = Vec::new();
    for n in (4..=max_sites.min(MAX_ORACLE_SITES)).step_by(2) {
        let mut push = |name: &str, spec: Option<ModelSpec>| {
            if let Some(spec) = spec {
                out.push(CatalogEntry {
                    name: format!("{name} N={n}"),
                    spec,
                });
            }
        };
        push("tight-binding", closed_shell(|f| ModelSpec::tight_binding(n, f), n, 0.3));
        push(
            "power-law a=0.5",
            closed_shell(|f| ModelSpec::power_law(n, 0.5, 1.0, f), n, 0.3),
        );
        push(
            "power-law a=2",
            closed_shell(|f| ModelSpec::power_law(n, 2.0, 1.0, f), n, 0.3),
        );
        push(
            "fractal g=1",
            closed_shell(|f| ModelSpec::fractal(n, 1, 1.0, f), n, 0.5),
        );
        push("antipodal", ModelSpec::antipodal(n, 0, 0.5).ok());
        push(
            "phase-modulated",
            closed_shell(|f| ModelSpec::phase_modulated(n, 1.5, 0.4, 1.0, f), n, 0.3),
        );
        push(
            "selective",
            closed_shell(|f| ModelSpec::selective(n, n / 2 - 1, 1, 1.0, 0.5, 1, f), n, 0.3),
        );
        push("kitaev a=0.5 mu=1.5", ModelSpec::kitaev(n, 0.5, 1.5).ok());
        push("kitaev a=1000 mu=1.5", ModelSpec::kitaev(n, 1000.0, 1.5).ok());
        push(
            "kitaev a=1.5 b=0.5 mu=0.3",
            ModelSpec::kitaev_long_range_hopping(n, 1.5, 0.5, 0.3).ok(),
        );
    }
    out
}

#[derive(Debug, Clone)]
pub struct CheckRow {
    pub case: String,
    pub check: &'static str,
    /// Number of compared values.
    pub samples: usize,
    pub max_deviation: f64,
    pub passed: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub rows: Vec<CheckRow>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.passed)
    }

    pub fn max_deviation(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.max_deviation)
            .fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.rows.iter().map(|r| r.case.len()).max().unwrap_or(4).max(4);
        writeln!(f, "{:<width$}  {:<22} {:>7}  {:>12}  result", "case", "check", "samples", "max |dev|")?;
        for r in &self.rows {
            write!(
                f,
                "{:<width$}  {:<22} {:>7}  {:>12.3e}  {}",
                r.case,
                r.check,
                r.samples,
                r.max_deviation,
                if r.passed { "PASS" } else { "FAIL" }
            )?;
            if let Some(note) = &r.note {
                write!(f, "  ({note})")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Tracker {
    samples: usize,
    max: f64,
}

impl Tracker {
    fn add(&mut self, engine: f64, oracle: f64) {
        self.samples += 1;
        let d = (engine - oracle).abs();
        self.max = if d.is_nan() { f64::NAN } else { self.max.max(d) };
    }

    fn add_complex(&mut self, engine: Complex64, oracle: Complex64) {
        self.add((engine - oracle).norm(), 0.0);
    }
}

/// Site subsets for entropy comparisons: every contiguous block starting at
/// site 1 plus an evenly strided selection of all bitmasks.
fn subsets(n: usize) -> Vec<Vec<usize>> {
    let to_sites = |mask: usize| -> Vec<usize> { (0..n).filter(|j| mask >> j & 1 == 1).map(|j| j + 1).collect() };
    let full = 1usize << n;
    let stride = (full / 97).max(1) | 1;
    let mut masks: Vec<usize> = (1..n).map(|l| (1 << l) - 1).collect();
    masks.extend((1..full - 1).step_by(stride));
    masks.sort_unstable();
    masks.dedup();
    masks.into_iter().map(to_sites).collect()
}

fn partitions(n: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    for l in 1..=n / 2 {
        for gap in 0..=n - 2 * l {
            for start in [1, 2] {
                out.push(Partition::new(l, gap).starting_at(start));
            }
        }
    }
    out
}

struct Case<'a> {
    name: &'a str,
    state: &'a GroundStateData,
    fock: &'a FockState,
    sign: f64,
    rows: Vec<CheckRow>,
}

impl Case<'_> {
    fn record(&mut self, check: &'static str, result: Result<Tracker>) {
        let row = match result {
            Ok(t) => CheckRow {
                case: self.name.to_string(),
                check,
                samples: t.samples,
                max_deviation: t.max,
                passed: t.max < ORACLE_TOLERANCE,
                note: None,
            },
            Err(e) => CheckRow {
                case: self.name.to_string(),
                check,
                samples: 0,
                max_deviation: f64::NAN,
                passed: false,
                note: Some(e.to_string()),
            },
        };
        self.rows.push(row);
    }

    fn engine_entropy(&self, sites: &[usize]) -> Result<f64> {
        Ok(subsystem_entropy(&correlation_matrix_signed(self.state, sites, self.sign)?)?.entropy)
    }
}

fn check_case(entry: &CatalogEntry, sign: f64) -> Vec<CheckRow> {
    let failure = |check: &'static str, e: Error| {
        vec![CheckRow {
            case: entry.name.clone(),
            check,
            samples: 0,
            max_deviation: f64::NAN,
            passed: false,
            note: Some(e.to_string()),
        }]
    };
    let state = match ground_state(&entry.spec) {
        Ok(s) => s,
        Err(e) => return failure("engine ground state", e),
    };
    let fock = match oracle_ground_state(&entry.spec) {
        Ok(f) => f,
        Err(e) => return failure("oracle ground state", e),
    };
    let n = entry.spec.n_sites();
    let all_sites: Vec<usize> = (1..=n).collect();
    let mut case = Case {
        name: &entry.name,
        state: &state,
        fock: &fock,
        sign,
        rows: Vec::new(),
    };

    case.record(
        "ground energy",
        quadratic_ground_energy(&entry.spec).map(|e| {
            let mut t = Tracker::default();
            t.add(e, case.fock.energy);
            t
        }),
    );

    let corr = correlation_matrix_signed(case.state, &all_sites, sign);
    case.record(
        "C entries",
        corr.as_ref().map_err(clone_err).map(|c| {
            let mut t = Tracker::default();
            for (a, &i) in all_sites.iter().enumerate() {
                for (b, &j) in all_sites.iter().enumerate() {
                    t.add_complex(c.c[(a, b)], case.fock.hopping_correlator(i, j));
                }
            }
            t
        }),
    );
    if let Ok(Some(f)) = corr.as_ref().map(|c| c.f.as_ref()) {
        let mut t = Tracker::default();
        for (a, &i) in all_sites.iter().enumerate() {
            for (b, &j) in all_sites.iter().enumerate() {
                if i != j {
                    t.add_complex(f[(a, b)], case.fock.anomalous_correlator(i, j));
                }
            }
        }
        case.record("F entries", Ok(t));
        let mut t = Tracker::default();
        t.add(case.fock.parity().abs(), 1.0);
        case.record("definite parity", Ok(t));
    }

    let path = if state.has_pairing() { "entropy (Majorana)" } else { "entropy (C)" };
    let sets = subsets(n);
    let entropies = (|| {
        let mut t = Tracker::default();
        for s in &sets {
            t.add(case.engine_entropy(s)?, oracle_reduced_entropy(case.fock, s)?);
        }
        Ok(t)
    })();
    case.record(path, entropies);

    if !state.has_pairing() {
        // Majorana path with a zero anomalous block.
        let cross = (|| {
            let mut t = Tracker::default();
            for s in &sets {
                let mut c = correlation_matrix_signed(case.state, s, sign)?;
                c.f = Some(DMatrix::zeros(s.len(), s.len()));
                t.add(subsystem_entropy(&c)?.entropy, oracle_reduced_entropy(case.fock, s)?);
            }
            Ok(t)
        })();
        case.record("entropy (Majorana, F=0)", cross);
    }

    let mi = (|| {
        let mut t = Tracker::default();
        for p in partitions(n) {
            let engine = if sign == ANOMALOUS_SIGN {
                crate::analysis::mutual_information(case.state, p)?.mi
            } else {
                let a = p.sites_a(n)?;
                let b = p.sites_b(n)?;
                let ab: Vec<usize> = a.iter().chain(&b).copied().collect();
                case.engine_entropy(&a)? + case.engine_entropy(&b)? - case.engine_entropy(&ab)?
            };
            t.add(engine, oracle_mi(case.fock, p)?);
        }
        Ok(t)
    })();
    case.record("mutual information", mi);

    let cov = corr.as_ref().map_err(clone_err).map(|c| {
        let mut t = Tracker::default();
        for a in 0..n {
            for b in a + 1..n {
                let anomalous = c.f.as_ref().map_or(0.0, |f| f[(a, b)].norm_sqr());
                let engine = anomalous - c.c[(a, b)].norm_sqr();
                t.add(engine, case.fock.density_covariance(a + 1, b + 1));
            }
        }
        t
    });
    case.record("density covariance", cov);

    case.rows
}

fn clone_err(e: &Error) -> Error {
    Error::InvalidArgument(e.to_string())
}

/// Runs the catalogue for sizes up to `max_sites`. `flip_anomalous_sign`
/// evaluates the engine with the opposite anomalous-correlator sign, which
/// must make the pairing cases fail.
pub fn validate(max_sites: usize, flip_anomalous_sign: bool) -> Result<ValidationReport> {
    if !(4..=MAX_ORACLE_SITES).contains(&max_sites) {
        return Err(Error::InvalidArgument(format!(
            "max_sites must lie in 4..={MAX_ORACLE_SITES}, got {max_sites}"
        )));
    }
    let sign = if flip_anomalous_sign { -ANOMALOUS_SIGN } else { ANOMALOUS_SIGN };
    let entries = catalog(max_sites);
    let rows = {
        use rayon::prelude::*;
        entries
            .par_iter()
            .map(|e| check_case(e, sign))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    Ok(ValidationReport { rows })
}
