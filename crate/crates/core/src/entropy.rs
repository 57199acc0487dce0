//! Von Neumann entropies of site subsets.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::groundstate::{majorana_matrix, CorrelationData};
use crate::linalg::hermitian_eigenvalues;
use crate::{Error, Result, CLAMP_TOLERANCE};

/// Which spectrum an entropy was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Eigenvalues `C_gamma` of the restricted correlation matrix.
    Correlation,
    /// Majorana pair values `nu_n`.
    Majorana,
}

#[derive(Debug, Clone)]
pub struct EntropyResult {
    pub sites: Vec<usize>,
    /// Natural-log units.
    pub entropy: f64,
    pub spectrum: Vec<f64>,
    pub kind: SpectrumKind,
}

fn clamp_unit(p: f64) -> Result<f64> {
    if !(-CLAMP_TOLERANCE..=1.0 + CLAMP_TOLERANCE).contains(&p) {
        return Err(Error::SpectrumOutOfRange {
            value: p,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// `-p ln p - (1-p) ln(1-p)` with `0 ln 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    let p = clamp_unit(p)?;
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    // ln(1 - p) through ln_1p keeps precision for small p.
    let q = 1.0 - p;
    let tail = if q > 0.0 { -q * (-p).ln_1p() } else { 0.0 };
    Ok(term(p) + tail)
}

/// Majorana pair values `nu_n >= 0` of a real antisymmetric `Gamma`.
///
/// `i Gamma` is Hermitian with spectrum `{+nu_n, -nu_n}`; the sorted spectrum
/// is paired from both ends and each pair is checked before being halved.
pub(crate) fn majorana_nus(gamma: &DMatrix<f64>) -> Result<Vec<f64>> {
    let dim = gamma.nrows();
    let ig = DMatrix::from_fn(dim, dim, |p, q| Complex64::new(0.0, gamma[(p, q)]));
    let ev = hermitian_eigenvalues(ig)?;
    let mut nus = Vec::with_capacity(dim / 2);
    for i in 0..dim / 2 {
        let (lo, hi) = (ev[i], ev[dim - 1 - i]);
        if (lo + hi).abs() > CLAMP_TOLERANCE {
            return Err(Error::UnpairedMajoranaSpectrum(lo, hi));
        }
        let nu = 0.5 * (hi - lo);
        if nu > 1.0 + CLAMP_TOLERANCE {
            return Err(Error::SpectrumOutOfRange {
                value: nu,
                lo: 0.0,
                hi: 1.0,
            });
        }
        nus.push(nu.min(1.0));
    }
    nus.reverse();
    Ok(nus)
}

/// Entanglement entropy of the sites in `corr`.
///
/// Without anomalous correlators this sums binary entropies of the
/// eigenvalues of `C`; otherwise it uses `(1 + nu_n) / 2` over the Majorana
/// pair values.
pub fn subsystem_entropy(corr: &CorrelationData) -> Result<EntropyResult> {
    if corr.is_empty() {
        return Err(Error::InvalidArgument("entropy of an empty site set".into()));
    }
    let (spectrum, kind, entropy) = match &corr.f {
        None => {
            let ev = hermitian_eigenvalues(corr.c.clone())?;
            let s = ev.iter().map(|&p| binary_entropy(p)).sum::<Result<f64>>()?;
            let clamped = ev.iter().map(|&p| clamp_unit(p)).collect::<Result<Vec<_>>>()?;
            (clamped, SpectrumKind::Correlation, s)
        }
        Some(_) => {
            let gamma = majorana_matrix(corr)?.gamma;
            let nus = majorana_nus(&gamma)?;
            let s = nus
                .iter()
                .map(|&nu| binary_entropy(0.5 * (1.0 + nu)))
                .sum::<Result<f64>>()?;
            (nus, SpectrumKind::Majorana, s)
        }
    };
    Ok(EntropyResult {
        sites: corr.sites.clone(),
        entropy: entropy.max(0.0),
        spectrum,
        kind,
    })
}
