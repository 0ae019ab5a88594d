//! Cover counting at dyadic scales and log-log regression.
//!
//! For a deterministic set the count at scale `2^-n` is the number of
//! level-`n` dyadic cells it meets. For an image `f(E)` the count at value
//! scale `r` is the size of the stopping family
//! `S_r = {I_𝐢 meeting E : |f(I_𝐢)| < r ≤ |f(I_{𝐢⁻})|}` obtained by
//! splitting every interval of mass at least `r`. Intervals still at least
//! `r` at the address depth `K` are kept and counted as depth-capped.

use crate::cascade::Cascade;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::path::DyadicPath;
use crate::sets::{cell_of, cells_at_level, least_squares, PointSetSpec};

/// Share of depth-capped intervals above which a scale is flagged.
pub const CAPPED_WARN_FRACTION: f64 = 0.01;
/// Coarsest scales dropped by the default regression window.
pub const DEFAULT_DROP_COARSE: usize = 4;
/// Fewest scales a regression window may contain.
pub const MIN_WINDOW_SCALES: usize = 4;

/// Cover counts `N_{2^-n}` indexed by scale exponent `n`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CountSeries {
    pub entries: Vec<(u32, u64)>,
}

impl CountSeries {
    pub fn new(entries: Vec<(u32, u64)>) -> Self {
        CountSeries { entries }
    }

    pub fn scales(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|e| e.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimEstimate {
    pub slope: f64,
    pub stderr: f64,
    pub window: (u32, u32),
    pub series: CountSeries,
}

/// Stopping-family size at one value scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverCount {
    pub count: u64,
    /// Counted intervals that were still at least `r` at depth `K`.
    pub capped: u64,
}

impl CoverCount {
    pub fn capped_fraction(&self) -> f64 {
        self.capped as f64 / self.count as f64
    }

    /// True when the depth cap distorts this scale.
    pub fn resolution_warning(&self) -> bool {
        self.capped_fraction() > CAPPED_WARN_FRACTION
    }
}

/// Image box-dimension estimate for one cascade realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageDimEstimate {
    pub seed: u64,
    pub total_mass: f64,
    pub estimate: DimEstimate,
    pub covers: Vec<CoverCount>,
    /// Scale exponents carrying a resolution warning.
    pub warned: Vec<u32>,
}

/// Number of level-`n` dyadic cells meeting the sorted `points`.
pub fn dyadic_cover_count(points: &[f64], n: u32) -> Result<u64> {
    if n > 52 {
        return Err(Error::Domain(format!(
            "scale exponent {n} too fine for f64 points"
        )));
    }
    if let Some(x) = points.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Domain(format!("point {x} outside [0, 1]")));
    }
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Shape("points must be sorted".into()));
    }
    let mut count = 0u64;
    let mut last = None;
    for &x in points {
        let c = cell_of(x, n);
        if last != Some(c) {
            count += 1;
            last = Some(c);
        }
    }
    Ok(count)
}

/// Count series `N_{2^-n}` of a sorted point list over the given exponents.
pub fn point_count_series(points: &[f64], exponents: &[u32]) -> Result<CountSeries> {
    exponents
        .iter()
        .map(|&n| Ok((n, dyadic_cover_count(points, n)?)))
        .collect::<Result<Vec<_>>>()
        .map(CountSeries::new)
}

struct NodeCovers {
    mass: f64,
    counts: Vec<u64>,
    capped: Vec<u64>,
}

fn cover_visit(
    c: &Cascade,
    path: DyadicPath,
    log2_prod: f64,
    cells: &[u64],
    rs: &[f64],
) -> NodeCovers {
    let depth = c.depth();
    if path.len() == depth {
        let mass = c.subtree_mass(path, log2_prod);
        return NodeCovers {
            mass,
            counts: vec![1; rs.len()],
            capped: rs.iter().map(|&r| u64::from(mass >= r)).collect(),
        };
    }
    let (c0, c1) = (path.child(0), path.child(1));
    let (l0, l1) = (log2_prod + c.log2_weight(c0), log2_prod + c.log2_weight(c1));
    let split = cells.partition_point(|&x| x < c1.cell_range(depth).start);
    let (left, right) = cells.split_at(split);
    let visit = |child: DyadicPath, lp: f64, sub: &[u64]| {
        if sub.is_empty() {
            Err(c.subtree_mass(child, lp))
        } else {
            Ok(cover_visit(c, child, lp, sub, rs))
        }
    };
    let (a, b) = if c.exec().is_parallel() && depth - path.len() >= 12 {
        c.exec()
            .join(|| visit(c0, l0, left), || visit(c1, l1, right))
    } else {
        (visit(c0, l0, left), visit(c1, l1, right))
    };
    let child_mass = |v: &std::result::Result<NodeCovers, f64>| match v {
        Ok(n) => n.mass,
        Err(m) => *m,
    };
    let mass = child_mass(&a) + child_mass(&b);
    let mut counts = vec![0u64; rs.len()];
    let mut capped = vec![0u64; rs.len()];
    for (i, &r) in rs.iter().enumerate() {
        if mass < r {
            counts[i] = 1;
            continue;
        }
        for child in [&a, &b].into_iter().flatten() {
            counts[i] += child.counts[i];
            capped[i] += child.capped[i];
        }
    }
    NodeCovers {
        mass,
        counts,
        capped,
    }
}

/// Stopping-family sizes for every value scale in `rs`, for the set whose
/// level-`K` cells are `cells` (sorted, deduplicated).
pub fn image_cover_counts(
    c: &Cascade,
    cells: &[u64],
    rs: &[f64],
) -> Result<(f64, Vec<CoverCount>)> {
    let n_cells = 1u64 << c.depth();
    if cells.is_empty() {
        return Err(Error::Domain("empty set".into()));
    }
    if cells.windows(2).any(|w| w[1] <= w[0]) || cells[cells.len() - 1] >= n_cells {
        return Err(Error::Shape(
            "cells must be sorted, distinct and on the level-K grid".into(),
        ));
    }
    if let Some(r) = rs.iter().find(|r| r.is_nan() || **r <= 0.0) {
        return Err(Error::Domain(format!("scale must be positive, got {r}")));
    }
    let root = cover_visit(c, DyadicPath::ROOT, 0.0, cells, rs);
    let covers = rs
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            if r >= root.mass {
                CoverCount {
                    count: 1,
                    capped: 0,
                }
            } else {
                CoverCount {
                    count: root.counts[i],
                    capped: root.capped[i],
                }
            }
        })
        .collect();
    Ok((root.mass, covers))
}

/// Size of the stopping family `S_r` for the set `spec` at value scale `r`.
pub fn adaptive_image_cover(c: &Cascade, spec: &PointSetSpec, r: f64) -> Result<CoverCount> {
    let cells = cells_at_level(spec, c.depth())?;
    Ok(image_cover_counts(c, &cells, &[r])?.1[0])
}

/// Least-squares slope of `log2 count` against `n` over `window` (inclusive).
pub fn regression_dimension(series: &CountSeries, window: (u32, u32)) -> Result<DimEstimate> {
    let (lo, hi) = window;
    if lo >= hi {
        return Err(Error::Window(format!("empty window [{lo}, {hi}]")));
    }
    let pts: Vec<(f64, f64)> = series
        .entries
        .iter()
        .filter(|(n, _)| (lo..=hi).contains(n))
        .map(|&(n, count)| (f64::from(n), (count.max(1) as f64).log2()))
        .collect();
    if pts.len() < MIN_WINDOW_SCALES {
        return Err(Error::Window(format!(
            "window [{lo}, {hi}] holds {} scales, need {MIN_WINDOW_SCALES}",
            pts.len()
        )));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let stderr = (ssr / (m - 2.0) / sxx).sqrt();
    Ok(DimEstimate {
        slope,
        stderr,
        window,
        series: series.clone(),
    })
}

/// Default window: drop the coarsest scales, then stop before the first
/// scale carrying a resolution warning.
pub fn default_window(exponents: &[u32], warned: &[u32]) -> Result<(u32, u32)> {
    let mut sorted = exponents.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let usable: Vec<u32> = sorted
        .into_iter()
        .skip(DEFAULT_DROP_COARSE)
        .take_while(|n| !warned.contains(n))
        .collect();
    if usable.len() < MIN_WINDOW_SCALES {
        return Err(Error::Window(format!(
            "only {} unwarned scales after dropping the {DEFAULT_DROP_COARSE} coarsest",
            usable.len()
        )));
    }
    Ok((usable[0], usable[usable.len() - 1]))
}

/// Covers of `f(E)` at value scales `r = 2^-n · μ([0,1])` for each exponent.
pub fn image_count_series(
    c: &Cascade,
    spec: &PointSetSpec,
    r_exponents: &[u32],
) -> Result<(f64, CountSeries, Vec<CoverCount>)> {
    let cells = cells_at_level(spec, c.depth())?;
    let total = c.total_mass();
    let rs: Vec<f64> = r_exponents
        .iter()
        .map(|&n| total * (-f64::from(n)).exp2())
        .collect();
    let (_, covers) = image_cover_counts(c, &cells, &rs)?;
    let series = CountSeries::new(
        r_exponents
            .iter()
            .zip(&covers)
            .map(|(&n, cc)| (n, cc.count))
            .collect(),
    );
    Ok((total, series, covers))
}

fn warned_scales(r_exponents: &[u32], covers: &[CoverCount]) -> Vec<u32> {
    r_exponents
        .iter()
        .zip(covers)
        .filter(|(_, cc)| cc.resolution_warning())
        .map(|(&n, _)| n)
        .collect()
}

/// Image box-dimension estimate for one realization. `window = None` uses
/// [`default_window`].
pub fn estimate_image_boxdim(
    c: &Cascade,
    spec: &PointSetSpec,
    r_exponents: &[u32],
    window: Option<(u32, u32)>,
) -> Result<ImageDimEstimate> {
    let (total_mass, series, covers) = image_count_series(c, spec, r_exponents)?;
    let warned = warned_scales(r_exponents, &covers);
    let window = match window {
        Some(w) => w,
        None => default_window(r_exponents, &warned)?,
    };
    Ok(ImageDimEstimate {
        seed: c.seed(),
        total_mass,
        estimate: regression_dimension(&series, window)?,
        covers,
        warned,
    })
}

/// Estimates over several seeds sharing one window. Without an explicit
/// window, a scale is dropped if any seed flags it.
pub fn estimate_image_boxdim_seeds(
    template: &Cascade,
    seeds: &[u64],
    spec: &PointSetSpec,
    r_exponents: &[u32],
    window: Option<(u32, u32)>,
    exec: Exec,
) -> Result<Vec<ImageDimEstimate>> {
    let cells = cells_at_level(spec, template.depth())?;
    let runs = exec
        .map(seeds, |&seed| {
            let mut cfg = *template.config();
            cfg.seed = seed;
            let c = Cascade::new(cfg)?.with_exec(exec);
            let total = c.total_mass();
            let rs: Vec<f64> = r_exponents
                .iter()
                .map(|&n| total * (-f64::from(n)).exp2())
                .collect();
            let (_, covers) = image_cover_counts(&c, &cells, &rs)?;
            Ok((seed, total, covers))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let window = match window {
        Some(w) => w,
        None => {
            let mut all_warned: Vec<u32> = runs
                .iter()
                .flat_map(|(_, _, covers)| warned_scales(r_exponents, covers))
                .collect();
            all_warned.sort_unstable();
            all_warned.dedup();
            default_window(r_exponents, &all_warned)?
        }
    };
    runs.into_iter()
        .map(|(seed, total_mass, covers)| {
            let series = CountSeries::new(
                r_exponents
                    .iter()
                    .zip(&covers)
                    .map(|(&n, cc)| (n, cc.count))
                    .collect(),
            );
            Ok(ImageDimEstimate {
                seed,
                total_mass,
                estimate: regression_dimension(&series, window)?,
                warned: warned_scales(r_exponents, &covers),
                covers,
            })
        })
        .collect()
}

/// Mean slope over seeds.
pub fn mean_slope(estimates: &[ImageDimEstimate]) -> f64 {
    estimates.iter().map(|e| e.estimate.slope).sum::<f64>() / estimates.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::CascadeConfig;
    use crate::oracle::literal_stopping_count;
    use crate::sets::enumerate_points;
    use crate::weights::WeightModel;
    use std::f64::consts::LN_2;

    #[test]
    fn cover_count_examples() {
        assert_eq!(dyadic_cover_count(&[0.0, 1.0], 1).unwrap(), 2);
        assert_eq!(dyadic_cover_count(&[0.0, 1.0], 0).unwrap(), 1);
        assert!(dyadic_cover_count(&[0.0, 1.5], 1).is_err());
        assert!(dyadic_cover_count(&[0.5, 0.0], 1).is_err());
    }

    #[test]
    fn harmonic_sequence_count_near_sqrt() {
        let pts = enumerate_points(&PointSetSpec::power_sequence(1.0, 1 << 20).unwrap()).unwrap();
        let count = dyadic_cover_count(&pts, 10).unwrap();
        // direct-count oracle: distinct floor(1024/k), k ≤ 2^20, plus cell 0
        let mut cells: Vec<u64> = (1..=(1u64 << 20)).map(|k| (1024 / k).min(1023)).collect();
        cells.push(0);
        cells.sort_unstable();
        cells.dedup();
        assert_eq!(count, cells.len() as u64);
        assert!(
            count as f64 <= 2.0 * 32.0 && count as f64 >= 32.0 / 2.0,
            "{count}"
        );
    }

    #[test]
    fn cantor_count_grows_like_its_dimension() {
        let spec = PointSetSpec::cantor(1.0 / 3.0, 12).unwrap();
        let pts = enumerate_points(&spec).unwrap();
        let count = dyadic_cover_count(&pts, 8).unwrap();
        // direct count: cells met by the depth-12 construction intervals
        let mut intervals = vec![(0.0f64, 1.0f64)];
        for _ in 0..12 {
            intervals = intervals
                .iter()
                .flat_map(|&(a, b)| [(a, a + (b - a) / 3.0), (b - (b - a) / 3.0, b)])
                .collect();
        }
        let mut cells: Vec<u64> = intervals
            .iter()
            .flat_map(|&(a, b)| cell_of(a, 8)..=cell_of(b, 8))
            .collect();
        cells.sort_unstable();
        cells.dedup();
        assert_eq!(count, cells.len() as u64);
        // N_r ≍ r^{-log2/log3}; the dyadic grid straddles most level-5 intervals
        let expect = (8.0 * 2f64.ln() / 3f64.ln()).exp2();
        let ratio = count as f64 / expect;
        assert!((0.5..=2.5).contains(&ratio), "{count} vs {expect}");
    }

    #[test]
    fn regression_recovers_exact_powers() {
        let series = CountSeries::new((0..20).map(|n| (n, 1u64 << (n / 2 * 2 / 2))).collect());
        let even = CountSeries::new(
            series
                .entries
                .iter()
                .filter(|(n, _)| n % 2 == 0)
                .map(|&(n, _)| (n, 1u64 << (n / 2)))
                .collect(),
        );
        let est = regression_dimension(&even, (0, 18)).unwrap();
        assert!((est.slope - 0.5).abs() < 1e-12);
        assert!(est.stderr < 1e-12);
        let full = CountSeries::new((0..20).map(|n| (n, 1u64 << n)).collect());
        assert!((regression_dimension(&full, (2, 19)).unwrap().slope - 1.0).abs() < 1e-12);
        assert!(matches!(
            regression_dimension(&full, (2, 4)),
            Err(Error::Window(_))
        ));
        assert!(regression_dimension(&full, (4, 4)).is_err());
    }

    #[test]
    fn default_window_drops_coarse_and_warned() {
        let exps: Vec<u32> = (1..=14).collect();
        assert_eq!(default_window(&exps, &[]).unwrap(), (5, 14));
        assert_eq!(default_window(&exps, &[12, 13, 14]).unwrap(), (5, 11));
        assert!(default_window(&exps, &[7]).is_err());
    }

    fn cascade(model: WeightModel, seed: u64, depth: u32) -> Cascade {
        Cascade::new(CascadeConfig::new(model, seed, depth)).unwrap()
    }

    #[test]
    fn root_scale_gives_one() {
        let c = cascade(WeightModel::two_point(0.5).unwrap(), 1, 8);
        let spec = PointSetSpec::power_sequence(1.0, 0).unwrap();
        let total = c.total_mass();
        assert_eq!(adaptive_image_cover(&c, &spec, total).unwrap().count, 1);
        assert_eq!(
            adaptive_image_cover(&c, &spec, 10.0 * total).unwrap().count,
            1
        );
    }

    #[test]
    fn stopping_family_preserves_mass() {
        // E = [0, 1]: the stopped intervals partition the total mass, each
        // stopped mass lies in [r·min W / 2, r)
        let model = WeightModel::two_point(0.5).unwrap();
        for seed in 0..5 {
            let c = cascade(model, seed, 14);
            let grid: Vec<f64> = (0..1 << 14).map(|i| i as f64 / 16384.0).collect();
            let spec = PointSetSpec::explicit(grid).unwrap();
            let total = c.total_mass();
            for r in [total / 8.0, total / 16.0, total / 32.0] {
                let cc = adaptive_image_cover(&c, &spec, r).unwrap();
                assert_eq!(cc.capped, 0);
                let covered = cc.count as f64 * r;
                assert!(covered > total && covered <= 4.0 * total, "r={r}");
                assert_eq!(
                    cc.count,
                    literal_stopping_count(&c, &cells_at_level(&spec, 14).unwrap(), r).unwrap()
                );
            }
        }
    }

    #[test]
    fn counts_nonincreasing_in_r() {
        let c = cascade(WeightModel::log_normal(LN_2).unwrap(), 5, 14);
        let spec = PointSetSpec::power_sequence(1.0, 0).unwrap();
        let total = c.total_mass();
        let rs: Vec<f64> = (0..12).map(|n| total * (-(n as f64)).exp2()).collect();
        let cells = cells_at_level(&spec, 14).unwrap();
        let (_, covers) = image_cover_counts(&c, &cells, &rs).unwrap();
        assert!(covers.windows(2).all(|w| w[0].count <= w[1].count));
    }

    #[test]
    fn matches_literal_definition() {
        let model = WeightModel::log_normal(LN_2).unwrap();
        let spec = PointSetSpec::cantor(0.25, 0).unwrap();
        let cells = cells_at_level(&spec, 10).unwrap();
        for seed in 0..10 {
            let c = cascade(model, seed, 10);
            let total = c.total_mass();
            for k in 0..12 {
                let r = total * (-(k as f64) * 0.9).exp2();
                let fast = image_cover_counts(&c, &cells, &[r]).unwrap().1[0].count;
                assert_eq!(fast, literal_stopping_count(&c, &cells, r).unwrap());
            }
        }
    }

    #[test]
    fn seed_estimates_share_window_and_are_schedule_free() {
        let model = WeightModel::log_normal(0.3).unwrap();
        let template = cascade(model, 0, 14);
        let spec = PointSetSpec::cantor(0.25, 0).unwrap();
        let exps: Vec<u32> = (1..=10).collect();
        let a = estimate_image_boxdim_seeds(
            &template,
            &[1, 2, 3],
            &spec,
            &exps,
            None,
            Exec::Sequential,
        )
        .unwrap();
        let b =
            estimate_image_boxdim_seeds(&template, &[1, 2, 3], &spec, &exps, None, Exec::Parallel)
                .unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|e| e.estimate.window == a[0].estimate.window));
        let single = estimate_image_boxdim(
            &cascade(model, 2, 14),
            &spec,
            &exps,
            Some(a[1].estimate.window),
        )
        .unwrap();
        assert_eq!(single.estimate, a[1].estimate);
    }
}
