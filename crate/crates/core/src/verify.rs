//! The acceptance battery, shared by the `verify` command and the
//! `acceptance` test target.
//!
//! Each criterion reports pass/fail, a one-line detail and its runtime.
//! Runtime budgets count toward passing. `tolerance_scale` multiplies every
//! numeric tolerance; values other than 1 exist only to exercise the
//! failure path.

use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use crate::boxdim::{
    dyadic_cover_count, estimate_image_boxdim_seeds, mean_slope, regression_dimension, CountSeries,
};
use crate::cascade::{Cascade, CascadeConfig};
use crate::error::Result;
use crate::exec::Exec;
use crate::oracle::literal_stopping_count;
use crate::path::DyadicPath;
use crate::rng::{mix64, unit_open};
use crate::sets::{cells_at_level, enumerate_points, PointSetSpec};
use crate::theory::{
    asymptotic_ratio, bounds_table_with, hausdorff_image_dim, legendre_psi,
    lognormal_sequence_dim_closed_form, sequence_image_dim,
};
use crate::weights::WeightModel;

/// Log-normal variance just below the critical value `ln 4`.
pub fn near_critical_sigma2() -> f64 {
    4f64.ln() - 0.01
}

/// Log-normal and two-point laws close to criticality, with strongly separated bounds.
pub fn near_critical_models() -> [WeightModel; 2] {
    [
        WeightModel::LogNormal {
            sigma2: near_critical_sigma2(),
        },
        WeightModel::TwoPoint { xi: 0.99 },
    ]
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub tolerance_scale: f64,
    pub exec: Exec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tolerance_scale: 1.0,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} {} {} [{:.2}s / {}s]: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

pub type Check = fn(&VerifyOptions) -> Result<(bool, String)>;

/// `(id, title, budget in seconds, check)` for every criterion.
pub const CRITERIA: [(&str, &str, u64, Check); 9] = [
    (
        "A1",
        "closed form vs variational sequence dimension",
        1,
        a1_closed_form,
    ),
    (
        "A2",
        "root-equation endpoints and residual",
        1,
        a2_root_equation,
    ),
    (
        "A3",
        "sandwich S1 < dim < S2 near criticality",
        5,
        a3_sandwich,
    ),
    ("A4", "asymptotic ratio at d = 1e-4", 1, a4_asymptotics),
    (
        "A5",
        "deterministic box-dimension estimator",
        10,
        a5_deterministic_boxdim,
    ),
    (
        "A6",
        "adaptive cover equals literal stopping family",
        30,
        a6_stopping_family,
    ),
    (
        "A7",
        "large-deviation path-count exponent",
        60,
        a7_path_counts,
    ),
    ("A8", "Monte Carlo image dimensions", 300, a8_image_dims),
    (
        "A9",
        "simulator additivity, mean mass, determinism",
        60,
        a9_simulator,
    ),
];

pub fn run_criterion(index: usize, opts: &VerifyOptions) -> CriterionResult {
    let (id, title, budget, check) = CRITERIA[index];
    let budget = Duration::from_secs(budget);
    let start = Instant::now();
    let outcome = check(opts);
    let elapsed = start.elapsed();
    let (ok, mut detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = elapsed <= budget;
    if !in_time {
        detail.push_str("; over runtime budget");
    }
    CriterionResult {
        id,
        title,
        passed: ok && in_time,
        detail,
        elapsed,
        budget,
    }
}

pub fn run_all(opts: &VerifyOptions) -> Vec<CriterionResult> {
    (0..CRITERIA.len())
        .map(|i| run_criterion(i, opts))
        .collect()
}

fn a1_closed_form(o: &VerifyOptions) -> Result<(bool, String)> {
    let tol = 1e-6 * o.tolerance_scale;
    let mut worst = 0.0f64;
    for sigma2 in [0.2, LN_2, 1.3] {
        let model = WeightModel::log_normal(sigma2)?;
        for p in [0.25, 0.5, 1.0, 2.0, 5.0] {
            let diff = (lognormal_sequence_dim_closed_form(sigma2, p)?
                - sequence_image_dim(&model, p)?)
            .abs();
            worst = worst.max(diff);
        }
    }
    Ok((
        worst < tol,
        format!("max |Δ| = {worst:.3e} (tol {tol:.0e})"),
    ))
}

fn a2_root_equation(o: &VerifyOptions) -> Result<(bool, String)> {
    let end_tol = 1e-12 * o.tolerance_scale;
    let res_tol = 1e-10 * o.tolerance_scale;
    let mut worst_end = 0.0f64;
    let mut worst_res = 0.0f64;
    for model in near_critical_models() {
        worst_end = worst_end
            .max(hausdorff_image_dim(&model, 0.0)?.abs())
            .max((hausdorff_image_dim(&model, 1.0)? - 1.0).abs());
        for i in 0..100 {
            let d = f64::from(i) / 99.0;
            let s = hausdorff_image_dim(&model, d)?;
            worst_res = worst_res.max((s - model.log2_moment(s)? - d).abs());
        }
    }
    Ok((
        worst_end <= end_tol && worst_res < res_tol,
        format!("endpoint error {worst_end:.1e}, max residual {worst_res:.1e}"),
    ))
}

fn a3_sandwich(o: &VerifyOptions) -> Result<(bool, String)> {
    let slack = 1e-9 / o.tolerance_scale.max(f64::MIN_POSITIVE);
    let grid: Vec<f64> = (0..200)
        .map(|i| 0.05 + (5.0 - 0.05) * f64::from(i) / 199.0)
        .collect();
    let mut min_gap = f64::INFINITY;
    for model in near_critical_models() {
        for row in bounds_table_with(&model, &grid, o.exec)? {
            min_gap = min_gap.min(row.dim - row.s1).min(row.s2 - row.dim);
        }
    }
    let row = bounds_table_with(&WeightModel::log_normal(LN_2)?, &[1.0], o.exec)?[0];
    let ref_tol = 1e-5 * o.tolerance_scale;
    let ref_ok = (row.s1 - 1.0 / 3.0).abs() < ref_tol
        && (row.dim - 0.35425).abs() < ref_tol
        && (row.s2 - (3.0 - 5f64.sqrt()) / 2.0).abs() < ref_tol;
    Ok((
        min_gap > slack && ref_ok,
        format!(
            "min gap {min_gap:.4e} over 400 rows; p=1 row ({:.6}, {:.6}, {:.6})",
            row.s1, row.dim, row.s2
        ),
    ))
}

fn a4_asymptotics(o: &VerifyOptions) -> Result<(bool, String)> {
    let tol = 0.01 * o.tolerance_scale;
    let ratios = near_critical_models()
        .iter()
        .map(|m| asymptotic_ratio(m, 1e-4))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        ratios.iter().all(|r| (r - 1.0).abs() <= tol),
        format!("ratios {:.6}, {:.6}", ratios[0], ratios[1]),
    ))
}

/// Slope of `log2 N_{2^-n}` over `n ∈ [8, 20]` for an enumerated point set.
pub fn deterministic_slope(spec: &PointSetSpec) -> Result<f64> {
    let pts = enumerate_points(spec)?;
    let series = CountSeries::new(
        (8..=20)
            .map(|n| Ok((n, dyadic_cover_count(&pts, n)?)))
            .collect::<Result<Vec<_>>>()?,
    );
    Ok(regression_dimension(&series, (8, 20))?.slope)
}

fn a5_deterministic_boxdim(o: &VerifyOptions) -> Result<(bool, String)> {
    let seq = deterministic_slope(&PointSetSpec::power_sequence(1.0, 1 << 20)?)?;
    let cantor = deterministic_slope(&PointSetSpec::cantor(1.0 / 3.0, 14)?)?;
    let cantor_target = 2f64.ln() / 3f64.ln();
    Ok((
        (seq - 0.5).abs() <= 0.05 * o.tolerance_scale
            && (cantor - cantor_target).abs() <= 0.03 * o.tolerance_scale,
        format!("E_a(1) slope {seq:.4} (0.5 ± 0.05), Cantor slope {cantor:.4} ({cantor_target:.4} ± 0.03)"),
    ))
}

fn a6_stopping_family(_o: &VerifyOptions) -> Result<(bool, String)> {
    let depth = 12;
    let model = WeightModel::log_normal(LN_2)?;
    let sets = [
        PointSetSpec::power_sequence(1.0, 0)?,
        PointSetSpec::cantor(0.25, 0)?,
        PointSetSpec::thyrse(1.0, 0)?,
        PointSetSpec::cantor(1.0 / 3.0, 0)?,
    ];
    let cells: Vec<Vec<u64>> = sets
        .iter()
        .map(|s| cells_at_level(s, depth))
        .collect::<Result<_>>()?;
    let mut mismatches = 0;
    for i in 0..100u64 {
        let h = mix64(0xA6 ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let seed = mix64(h);
        let c = Cascade::new(CascadeConfig::new(model, seed, depth))?.with_exec(Exec::Sequential);
        let total = c.total_mass();
        let r = total * (-14.0 * unit_open(h)).exp2();
        let set_cells = &cells[(i % 4) as usize];
        let fast = crate::boxdim::image_cover_counts(&c, set_cells, &[r])?.1[0].count;
        if fast != literal_stopping_count(&c, set_cells, r)? {
            mismatches += 1;
        }
    }
    Ok((
        mismatches == 0,
        format!("{mismatches} mismatches in 100 (seed, r) pairs"),
    ))
}

/// Per-seed slopes of `log2 count` against `n` over `n ∈ [n_lo, n_hi]`.
pub fn path_count_slopes(
    model: &WeightModel,
    seeds: &[u64],
    x: f64,
    delta: f64,
    window: (u32, u32),
    exec: Exec,
) -> Result<Vec<f64>> {
    exec.map(seeds, |&seed| {
        let c = Cascade::new(CascadeConfig::new(*model, seed, window.1))?.with_exec(exec);
        let counts = c.large_product_counts(window.1, x, delta)?;
        let series = CountSeries::new(
            (window.0..=window.1)
                .map(|n| (n, counts[n as usize - 1]))
                .collect(),
        );
        Ok(regression_dimension(&series, window)?.slope)
    })
    .into_iter()
    .collect()
}

fn a7_path_counts(o: &VerifyOptions) -> Result<(bool, String)> {
    let model = WeightModel::log_normal(LN_2)?;
    let (x, delta) = (0.25, 0.05);
    let target = 1.0 + legendre_psi(&model, x)?.value;
    let seeds: Vec<u64> = (0..8).collect();
    let slopes = path_count_slopes(&model, &seeds, x, delta, (12, 22), o.exec)?;
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    Ok((
        (mean - target).abs() <= 0.15 * o.tolerance_scale,
        format!("mean slope {mean:.4} vs 1+ψ(x) = {target:.5} (± 0.15)"),
    ))
}

/// Seed-averaged image box dimension with the default window.
pub fn monte_carlo_image_dim(
    model: &WeightModel,
    spec: &PointSetSpec,
    depth: u32,
    seeds: &[u64],
    max_exponent: u32,
    exec: Exec,
) -> Result<f64> {
    let template = Cascade::new(CascadeConfig::new(*model, seeds[0], depth))?;
    let exps: Vec<u32> = (1..=max_exponent).collect();
    let est = estimate_image_boxdim_seeds(&template, seeds, spec, &exps, None, exec)?;
    Ok(mean_slope(&est))
}

fn a8_image_dims(o: &VerifyOptions) -> Result<(bool, String)> {
    let model = WeightModel::log_normal(LN_2)?;
    let seeds: Vec<u64> = (0..8).collect();
    let tol = 0.1 * o.tolerance_scale;
    let cantor_target = hausdorff_image_dim(&model, 0.5)?;
    let cantor = monte_carlo_image_dim(
        &model,
        &PointSetSpec::cantor(0.25, 0)?,
        22,
        &seeds,
        16,
        o.exec,
    )?;
    let seq_target = sequence_image_dim(&model, 1.0)?;
    let seq = monte_carlo_image_dim(
        &model,
        &PointSetSpec::power_sequence(1.0, 0)?,
        22,
        &seeds,
        16,
        o.exec,
    )?;
    Ok((
        (cantor - cantor_target).abs() <= tol && (seq - seq_target).abs() <= tol,
        format!(
            "Cantor(1/4) {cantor:.4} vs {cantor_target:.5}; seq:p=1 {seq:.4} vs {seq_target:.5} (± 0.1)"
        ),
    ))
}

/// Bit patterns of a fixed battery of queries on one realization.
pub fn determinism_fingerprint(model: &WeightModel, seed: u64, exec: Exec) -> Result<Vec<u64>> {
    let c = Cascade::new(CascadeConfig::new(*model, seed, 16))?.with_exec(exec);
    let mut out = vec![c.total_mass().to_bits()];
    for j in [1u64, 777, 32_768, 65_535] {
        out.push(c.cdf_at_index(j)?.to_bits());
    }
    out.extend(c.large_product_counts(16, 0.25, 0.05)?);
    let paths: Vec<DyadicPath> = (0..64)
        .map(|i| DyadicPath::new(i * 3 % 64, 6))
        .collect::<Result<_>>()?;
    out.extend(
        c.image_lengths_at_level(&paths)?
            .iter()
            .map(|m| m.mass.to_bits()),
    );
    let spec = PointSetSpec::power_sequence(1.0, 0)?;
    let exps: Vec<u32> = (1..=10).collect();
    let est = estimate_image_boxdim_seeds(&c, &[seed, seed + 1], &spec, &exps, None, exec)?;
    out.extend(est.iter().map(|e| e.estimate.slope.to_bits()));
    Ok(out)
}

fn fingerprint_on_threads(model: &WeightModel, threads: usize) -> Result<Vec<u64>> {
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::error::Error::Resource(e.to_string()))?;
        pool.install(|| determinism_fingerprint(model, 2024, Exec::Parallel))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        determinism_fingerprint(model, 2024, Exec::Parallel)
    }
}

/// Largest additivity violation `|m(𝐢) - m(𝐢0) - m(𝐢1)|` over all `|𝐢| < K`.
pub fn additivity_violation(c: &Cascade) -> Result<f64> {
    let mut worst = 0.0f64;
    for level in 0..c.depth() {
        for idx in 0..(1u64 << level) {
            let p = DyadicPath::new(idx, level)?;
            let m = c.interval_mass(p)?.mass;
            let sum = c.interval_mass(p.child(0))?.mass + c.interval_mass(p.child(1))?.mass;
            worst = worst.max((m - sum).abs());
        }
    }
    Ok(worst)
}

/// Mean and standard error of the total mass over `n_seeds` realizations.
pub fn total_mass_mean(
    model: &WeightModel,
    depth: u32,
    n_seeds: u64,
    exec: Exec,
) -> Result<(f64, f64)> {
    let seeds: Vec<u64> = (0..n_seeds).collect();
    let masses = exec
        .map(&seeds, |&s| {
            Ok(Cascade::new(CascadeConfig::new(*model, s, depth))?
                .with_exec(Exec::Sequential)
                .total_mass())
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let n = masses.len() as f64;
    let mean = masses.iter().sum::<f64>() / n;
    let var = masses.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

fn a9_simulator(o: &VerifyOptions) -> Result<(bool, String)> {
    let models = [WeightModel::log_normal(LN_2)?, WeightModel::two_point(0.5)?];
    let mut notes = Vec::new();
    let mut ok = true;
    for model in &models {
        for depth in [4, 8, 12] {
            let c = Cascade::new(CascadeConfig::new(*model, 31 + u64::from(depth), depth))?;
            let v = additivity_violation(&c)?;
            ok &= v == 0.0;
            if v != 0.0 {
                notes.push(format!("additivity off by {v:e} at K={depth}"));
            }
        }
        let (mean, se) = total_mass_mean(model, 10, 10_000, o.exec)?;
        let z = (mean - 1.0).abs() / se;
        ok &= z <= 3.0 * o.tolerance_scale;
        notes.push(format!("{model}: mean mass {mean:.4} ± {se:.4}"));
        let base = determinism_fingerprint(model, 2024, Exec::Sequential)?;
        let same = base == determinism_fingerprint(model, 2024, Exec::Sequential)?
            && base == fingerprint_on_threads(model, 1)?
            && base == fingerprint_on_threads(model, 4)?;
        ok &= same;
        if !same {
            notes.push("runs differ across schedules".into());
        }
    }
    if ok {
        notes.insert(
            0,
            "additivity exact, deterministic on 1 and 4 threads".into(),
        );
    }
    Ok((ok, notes.join("; ")))
}
