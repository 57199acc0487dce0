//! Acceptance criteria. Each test prints one PASS/FAIL line straight to
//! stdout (bypassing the harness capture) and then asserts the verdict.

use std::f64::consts::LN_2;
use std::io::Write;

use fermichain::oracle::validation::{catalog, validate, ORACLE_TOLERANCE};
use fermichain::{
    correlation_matrix, ee_scaling_fit, filling_from_mu, ground_state, mi_correlation_bound_check,
    mutual_information, reference_dirac, subsystem_entropy, sweep_alpha, sweep_distance, sweep_mu,
    ModelSpec, Partition, SweepResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: u32, name: &str, passed: bool, detail: &str) {
    let line = format!(
        "acceptance criterion {id:>2} {name:<34} {}  {detail}\n",
        if passed { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(passed, "criterion {id} ({name}) failed: {detail}");
}

/// Indices of strict local maxima over a 3-point window.
fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])
        .collect()
}

fn mi_values(result: &SweepResult) -> Vec<f64> {
    result.points.iter().map(|p| p.record.mi).collect()
}

#[test]
fn criterion_01_oracle_equivalence() {
    let start = std::time::Instant::now();
    let report = validate(10, false).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let families = [
        "tight-binding",
        "power-law a=0.5",
        "power-law a=2",
        "fractal g=1",
        "antipodal",
        "phase-modulated",
        "kitaev a=0.5 mu=1.5",
        "kitaev a=1000 mu=1.5",
    ];
    let entries = catalog(10);
    let mut missing = Vec::new();
    for n in [6, 8, 10] {
        for f in families {
            let name = format!("{f} N={n}");
            if !entries.iter().any(|e| e.name == name) {
                missing.push(name);
            }
        }
    }
    let entropy_rows = report
        .rows
        .iter()
        .filter(|r| r.check.starts_with("entropy") || r.check == "mutual information")
        .count();
    let passed = report.all_passed() && missing.is_empty() && entropy_rows > 0 && elapsed < 60.0;
    verdict(
        1,
        "oracle equivalence",
        passed,
        &format!(
            "{} checks, max deviation {:.2e} (tol {ORACLE_TOLERANCE:e}), missing cases {:?}, {elapsed:.1}s",
            report.rows.len(),
            report.max_deviation(),
            missing
        ),
    );
}

#[test]
fn criterion_02_alpha_independence() {
    let d: Vec<usize> = (1..=200).collect();
    let a = sweep_distance(&ModelSpec::power_law(2004, 2.0, 1.0, 0.25).unwrap(), 10, &d).unwrap();
    let b = sweep_distance(&ModelSpec::power_law(2004, 10.0, 1.0, 0.25).unwrap(), 10, &d).unwrap();
    let max_dev = a
        .points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| (p.record.mi - q.record.mi).abs())
        .fold(0.0, f64::max);
    let passed = a.points.len() == 200 && b.points.len() == 200 && max_dev < 1e-10;
    verdict(2, "alpha independence", passed, &format!("max |I(2) - I(10)| = {max_dev:.2e} over 200 gaps"));
}

#[test]
fn criterion_03_dirac_comparison() {
    let spec = ModelSpec::tight_binding(2004, 0.25).unwrap();
    let state = ground_state(&spec).unwrap();
    let mut max_dev = Vec::new();
    let mut worst_rel = 0.0f64;
    for l in [10usize, 20, 50] {
        let mut dev = 0.0f64;
        for d in 0..=(2004 / 2 - l) {
            let x = fermichain::four_point_ratio(l, d);
            if !(0.05..=0.9).contains(&x) {
                continue;
            }
            let mi = mutual_information(&state, Partition::new(l, d)).unwrap().mi;
            let reference = reference_dirac(x).unwrap();
            dev = dev.max((mi - reference).abs());
            if l == 50 && (0.2..=0.8).contains(&x) {
                worst_rel = worst_rel.max((mi - reference).abs() / reference);
            }
        }
        max_dev.push(dev);
    }
    let monotone = max_dev.windows(2).all(|w| w[1] < w[0]);
    let passed = monotone && worst_rel < 0.10;
    verdict(
        3,
        "Dirac comparison",
        passed,
        &format!(
            "max |I - I_dirac| for l=10,20,50: {:.4}, {:.4}, {:.4}; worst relative at l=50: {:.4}",
            max_dev[0], max_dev[1], max_dev[2], worst_rel
        ),
    );
}

#[test]
fn criterion_04_gapped_kitaev_plateau() {
    let spec = ModelSpec::kitaev(2004, 1000.0, 1.5).unwrap();
    let l = 10;
    let d: Vec<usize> = (0..=(2004 / 2 - l)).collect();
    let res = sweep_distance(&spec, l, &d).unwrap();
    let mut low: Vec<(f64, f64)> = Vec::new();
    let mut high: Vec<(f64, f64)> = Vec::new();
    for p in &res.points {
        let x = p.record.x;
        if x < 0.4 {
            low.push((x, p.record.mi));
        } else if x > 0.6 {
            high.push((x, p.record.mi));
        }
    }
    let (x_worst, i_worst) = low
        .iter()
        .copied()
        .fold((f64::NAN, 0.0f64), |acc, (x, i)| if i.abs() > acc.1.abs() { (x, i) } else { acc });
    high.sort_by(|a, b| a.0.total_cmp(&b.0));
    let increasing = high.windows(2).all(|w| w[1].1 > w[0].1);
    let plateau = i_worst.abs() < 1e-6;
    verdict(
        4,
        "gapped Kitaev plateau",
        plateau && increasing,
        &format!(
            "max I for x<0.4 = {i_worst:.3e} at x = {x_worst:.3} (needs < 1e-6); increasing for x>0.6: {increasing} over {} points",
            high.len()
        ),
    );
}

#[test]
fn criterion_05_antipodal_vanishing_mi() {
    let spec = ModelSpec::antipodal(1000, 0, 0.5).unwrap();
    let state = ground_state(&spec).unwrap();
    let l = 10;
    let d: Vec<usize> = (0..=(1000 / 2 - l)).collect();
    let res = sweep_distance(&spec, l, &d).unwrap();
    let (d_worst, i_worst) = res
        .points
        .iter()
        .map(|p| (p.record.d, p.record.mi))
        .fold((0, 0.0f64), |acc, (d, i)| if i.abs() > acc.1.abs() { (d, i) } else { acc });
    let nonzero = res.points.iter().filter(|p| p.record.mi.abs() >= 1e-9).count();
    let sites: Vec<usize> = (1..=l).collect();
    let s = subsystem_entropy(&correlation_matrix(&state, &sites).unwrap()).unwrap().entropy;
    let volume = (s - l as f64 * LN_2).abs() < 1e-9;
    verdict(
        5,
        "antipodal vanishing MI",
        i_worst.abs() < 1e-9 && volume,
        &format!(
            "max |I| = {:.4} at d = {d_worst} ({} of {} gaps with |I| >= 1e-9); S(l) - l ln 2 = {:.2e}",
            i_worst.abs(),
            nonzero,
            res.points.len(),
            s - l as f64 * LN_2
        ),
    );
}

#[test]
fn criterion_06_fractal_scaling() {
    let half = ModelSpec::fractal(1004, 1, 1.0, 0.5).unwrap();
    let ls: Vec<usize> = (8..=64).collect();
    let fit = ee_scaling_fit(&half, &ls).unwrap();
    let beta_ok = (fit.exponent - 0.5).abs() <= 0.1;

    let quarter = ModelSpec::fractal(1004, 1, 1.0, 0.25).unwrap();
    let d: Vec<usize> = (1..=(1004 / 2 - 10)).collect();
    let res = sweep_distance(&quarter, 10, &d).unwrap();
    let mut curve: Vec<(f64, f64)> = res.points.iter().map(|p| (p.record.x, p.record.mi)).collect();
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values: Vec<f64> = curve.iter().map(|c| c.1).collect();
    let maxima: Vec<f64> = local_maxima(&values).into_iter().map(|i| curve[i].0).collect();
    let small_x = maxima.iter().filter(|&&x| x < 0.2).count();
    verdict(
        6,
        "fractal scaling",
        beta_ok && small_x >= 1,
        &format!(
            "beta = {:.4} (prefactor {:.4}); {} interior maxima of I(x), {small_x} at x < 0.2",
            fit.exponent,
            fit.prefactor,
            maxima.len()
        ),
    );
}

#[test]
fn criterion_07_criticality_detection() {
    let mus: Vec<f64> = (0..=300).map(|i| -3.0 + 0.02 * i as f64).collect();
    let peaks = |alpha: f64| -> Vec<f64> {
        let spec = ModelSpec::kitaev(2000, alpha, 0.0).unwrap();
        let res = sweep_mu(&spec, &mus, 16, 4).unwrap();
        local_maxima(&mi_values(&res))
            .into_iter()
            .map(|i| res.points[i].param)
            .collect()
    };
    let near = |m: f64, target: f64| (m - target).abs() <= 0.04 + 1e-9;
    let short = peaks(10.0);
    let short_ok = short.iter().any(|&m| near(m, 1.0))
        && short.iter().any(|&m| near(m, -1.0))
        && short.iter().all(|&m| near(m, 1.0) || near(m, -1.0));
    let long = peaks(0.5);
    let long_ok = long.len() == 1 && near(long[0], 1.0);
    let fmt = |v: &[f64]| v.iter().map(|m| format!("{m:.2}")).collect::<Vec<_>>().join(" ");
    verdict(
        7,
        "criticality detection",
        short_ok && long_ok,
        &format!(
            "alpha=10 maxima at [{}] ({}); alpha=0.5 maxima at [{}] ({})",
            fmt(&short),
            if short_ok { "ok" } else { "not at +-1" },
            fmt(&long),
            if long_ok { "ok" } else { "expected exactly one, at 1" }
        ),
    );
}

#[test]
fn criterion_08_long_range_enhancement() {
    let spec = ModelSpec::kitaev(1000, 3.0, 2.5).unwrap();
    let res = sweep_alpha(&spec, &[0.3, 3.0], 16, 4).unwrap();
    let (long, short) = (res.points[0].record.mi, res.points[1].record.mi);
    let ratio = long / short;
    verdict(
        8,
        "long-range pairing enhancement",
        ratio > 10.0,
        &format!("I(0.3) = {long:.4e}, I(3) = {short:.4e}, ratio {ratio:.1}"),
    );
}

fn random_spec(rng: &mut ChaCha8Rng, n: usize) -> fermichain::Result<ModelSpec> {
    // Odd particle numbers keep the symmetric dispersions non-degenerate.
    let particles = 2 * rng.random_range(3..n / 4) + 1;
    let f = particles as f64 / n as f64;
    match rng.random_range(0..6) {
        0 => ModelSpec::power_law(n, rng.random_range(0.3..4.0), 1.0, f),
        1 => ModelSpec::fractal(n, 1, 1.0, f),
        2 => ModelSpec::phase_modulated(n, rng.random_range(0.5..3.0), rng.random_range(-1.0..1.0), 1.0, f),
        3 => ModelSpec::selective(n, rng.random_range(1..n / 2), rng.random_range(0..n / 2), 1.0, 0.4, rng.random_range(0..3), f),
        4 => ModelSpec::kitaev(n, rng.random_range(0.3..5.0), rng.random_range(-2.5..2.5)),
        _ => ModelSpec::kitaev_long_range_hopping(
            n,
            rng.random_range(0.5..4.0),
            rng.random_range(0.8..4.0),
            rng.random_range(-2.0..2.0),
        ),
    }
}

#[test]
fn criterion_09_property_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let mut failures: Vec<String> = Vec::new();
    let mut instances = 0;
    let mut bound_checks = 0;
    while instances < 120 {
        let n = 2 * rng.random_range(20..60);
        let Ok(spec) = random_spec(&mut rng, n) else { continue };
        let Ok(state) = ground_state(&spec) else { continue };
        let l = rng.random_range(1..=n / 6);
        let gap = rng.random_range(0..=n - 2 * l);
        let start = rng.random_range(1..=n);
        let p = Partition::new(l, gap).starting_at(start);
        let a = p.sites_a(n).unwrap();
        let b = p.sites_b(n).unwrap();
        instances += 1;
        let mut fail = |what: &str| failures.push(format!("{what} for {spec:?} l={l} d={gap} start={start}"));

        let r = mutual_information(&state, p).unwrap();
        if r.mi < -1e-9 {
            fail("negative MI");
        }
        if r.mi != r.s_a + r.s_b - r.s_ab {
            fail("MI not assembled from entropies");
        }
        if r.s_a + r.s_b < r.s_ab - 1e-10 {
            fail("subadditivity");
        }
        // B first, then A: the same sites with roles exchanged.
        let swapped = Partition { l, gap: n - 2 * l - gap, a_start: b[0] };
        let rs = mutual_information(&state, swapped).unwrap();
        if (rs.s_a - r.s_b).abs() > 1e-12 || (rs.s_b - r.s_a).abs() > 1e-12 || (rs.mi - r.mi).abs() > 1e-8 {
            fail("A/B symmetry or ring reflection");
        }
        let shifted = mutual_information(&state, Partition::new(l, gap).starting_at(1 + (start + 7) % n)).unwrap();
        if (shifted.mi - r.mi).abs() > 1e-10 {
            fail("translation");
        }
        let i = a[rng.random_range(0..a.len())];
        let j = b[rng.random_range(0..b.len())];
        let check = mi_correlation_bound_check(&state, p, i, j).unwrap();
        bound_checks += 1;
        if !check.holds {
            fail("correlation bound");
        }
        let lambda = rng.random_range(0.2..5.0);
        let scaled = ground_state(&spec.scaled(lambda).unwrap()).unwrap();
        let rr = mutual_information(&scaled, p).unwrap();
        if (rr.mi - r.mi).abs() > 1e-12 || (rr.s_ab - r.s_ab).abs() > 1e-12 {
            fail("rescaling invariance");
        }
    }
    verdict(
        9,
        "property suite",
        failures.is_empty() && bound_checks >= 100,
        &format!(
            "{instances} random instances, {bound_checks} bound checks, {} violations{}",
            failures.len(),
            failures.first().map(|f| format!(": first {f}")).unwrap_or_default()
        ),
    );
}

#[test]
fn criterion_10_filling_curve() {
    let filling = filling_from_mu(&ModelSpec::kitaev(2004, 1000.0, 1.5).unwrap()).unwrap();
    let value_ok = (filling - 0.5567).abs() <= 0.0005;
    let mus: Vec<f64> = (0..=300).map(|i| -3.0 + 0.02 * i as f64).collect();
    let mut monotone = true;
    for alpha in [0.5, 2.0, 10.0] {
        let curve: Vec<f64> = mus
            .iter()
            .map(|&mu| filling_from_mu(&ModelSpec::kitaev(2004, alpha, mu).unwrap()).unwrap())
            .collect();
        monotone &= curve.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    }
    verdict(
        10,
        "filling curve",
        value_ok && monotone,
        &format!(
            "filling at alpha=1000, mu=1.5: {filling:.4} (target 0.5567 +- 0.0005); monotone in mu for alpha 0.5, 2, 10: {monotone}"
        ),
    );
}
