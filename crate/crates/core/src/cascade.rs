//! Lazy realization of one cascade sample.
//!
//! The weight `W_𝐢` of every node is a hash of `(seed, 𝐢)`, so nothing is
//! stored. The realized measure is the level-`D` approximant
//! `μ_D(I_𝐣) = 2^-D W_{j_1} ⋯ W_{j_1…j_D}` on leaves at depth `D`, and every
//! coarser interval carries the sum of its leaves, added pairwise in a
//! fixed left-then-right order. Under [`TailRule::Unit`] the leaf depth is
//! the address depth `K` (leaf tails `L̂ = 1`); [`TailRule::Extended`]`(m)`
//! pushes the leaves down to `K + m`, so each level-`K` tail is the depth-`m`
//! martingale approximant of `L_𝐢`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::path::DyadicPath;
use crate::rng::{inverse_normal_cdf, mix64, unit_open};
use crate::weights::{WeightModel, WeightSampler};

/// Largest address depth `K`.
pub const MAX_DEPTH: u32 = 40;
/// Largest leaf depth `K + m`.
pub const MAX_LEAF_DEPTH: u32 = 48;
/// Subtrees with at least this many levels below them are split across threads.
const PAR_MIN_LEVELS: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailRule {
    #[default]
    Unit,
    Extended(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeConfig {
    pub model: WeightModel,
    pub seed: u64,
    pub depth: u32,
    pub tail: TailRule,
}

impl CascadeConfig {
    pub fn new(model: WeightModel, seed: u64, depth: u32) -> Self {
        CascadeConfig {
            model,
            seed,
            depth,
            tail: TailRule::Unit,
        }
    }

    pub fn with_tail(mut self, tail: TailRule) -> Self {
        self.tail = tail;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassResult {
    pub path: DyadicPath,
    pub mass: f64,
}

/// A validated cascade realization.
#[derive(Debug, Clone)]
pub struct Cascade {
    cfg: CascadeConfig,
    sampler: WeightSampler,
    leaf_depth: u32,
    exec: Exec,
}

impl Cascade {
    pub fn new(cfg: CascadeConfig) -> Result<Self> {
        cfg.model.require_subcritical()?;
        if cfg.depth == 0 {
            return Err(Error::Domain("truncation depth must be ≥ 1".into()));
        }
        if cfg.depth > MAX_DEPTH {
            return Err(Error::Depth {
                requested: cfg.depth,
                limit: MAX_DEPTH,
            });
        }
        let leaf_depth = match cfg.tail {
            TailRule::Unit => cfg.depth,
            TailRule::Extended(m) => cfg.depth.saturating_add(m),
        };
        if leaf_depth > MAX_LEAF_DEPTH {
            return Err(Error::Depth {
                requested: leaf_depth,
                limit: MAX_LEAF_DEPTH,
            });
        }
        Ok(Cascade {
            sampler: cfg.model.sampler(),
            cfg,
            leaf_depth,
            exec: Exec::default(),
        })
    }

    /// Selects how subtree sums are spread over threads. Results do not
    /// depend on this choice.
    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn config(&self) -> &CascadeConfig {
        &self.cfg
    }

    pub fn model(&self) -> &WeightModel {
        &self.cfg.model
    }

    pub fn seed(&self) -> u64 {
        self.cfg.seed
    }

    /// Address depth `K`.
    pub fn depth(&self) -> u32 {
        self.cfg.depth
    }

    pub fn leaf_depth(&self) -> u32 {
        self.leaf_depth
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    #[inline]
    pub fn log2_weight(&self, path: DyadicPath) -> f64 {
        self.sampler.log2_weight(self.cfg.seed, path)
    }

    /// `Σ_j log2 W_{i_1…i_j}` over the nonempty prefixes of `path`.
    pub fn log2_prefix_product(&self, path: DyadicPath) -> f64 {
        (1..=path.len()).fold(0.0, |acc, j| acc + self.log2_weight(path.prefix(j)))
    }

    fn check_path(&self, path: DyadicPath) -> Result<()> {
        if path.len() > self.cfg.depth {
            Err(Error::Depth {
                requested: path.len(),
                limit: self.cfg.depth,
            })
        } else {
            Ok(())
        }
    }

    /// Mass of the subtree at `path`, whose prefix log-product is `log2_prod`.
    pub(crate) fn subtree_mass(&self, path: DyadicPath, log2_prod: f64) -> f64 {
        if path.len() == self.leaf_depth {
            return (log2_prod - f64::from(path.len())).exp2();
        }
        let (c0, c1) = (path.child(0), path.child(1));
        let (l0, l1) = (
            log2_prod + self.log2_weight(c0),
            log2_prod + self.log2_weight(c1),
        );
        if self.exec.is_parallel() && self.leaf_depth - path.len() >= PAR_MIN_LEVELS {
            let (m0, m1) = self
                .exec
                .join(|| self.subtree_mass(c0, l0), || self.subtree_mass(c1, l1));
            m0 + m1
        } else {
            self.subtree_mass(c0, l0) + self.subtree_mass(c1, l1)
        }
    }

    /// Approximation of `μ(I_𝐢) = |f(I_𝐢)|`.
    pub fn interval_mass(&self, path: DyadicPath) -> Result<MassResult> {
        self.check_path(path)?;
        Ok(MassResult {
            path,
            mass: self.subtree_mass(path, self.log2_prefix_product(path)),
        })
    }

    /// Realized total mass `μ([0, 1])`.
    pub fn total_mass(&self) -> f64 {
        self.subtree_mass(DyadicPath::ROOT, 0.0)
    }

    /// `f_K(x) = μ([0, x))` for `x` on the level-`K` grid.
    pub fn cdf_value(&self, x: f64) -> Result<f64> {
        let depth = self.cfg.depth;
        let scaled = x * (depth as f64).exp2();
        if !(0.0..=1.0).contains(&x) || scaled.fract() != 0.0 {
            return Err(Error::Grid { x, depth });
        }
        self.cdf_at_index(scaled as u64)
    }

    /// `f_K(j 2^-K)` for `0 ≤ j ≤ 2^K`.
    pub fn cdf_at_index(&self, j: u64) -> Result<f64> {
        let depth = self.cfg.depth;
        let n_cells = 1u64 << depth;
        if j > n_cells {
            return Err(Error::Grid {
                x: j as f64 / n_cells as f64,
                depth,
            });
        }
        if j == n_cells {
            return Ok(self.total_mass());
        }
        let target = DyadicPath::new(j, depth)?;
        let mut acc = 0.0;
        let mut node = DyadicPath::ROOT;
        let mut log2_prod = 0.0;
        for level in 1..=depth {
            let bit = target.digit(level);
            if bit == 1 {
                let left = node.child(0);
                acc += self.subtree_mass(left, log2_prod + self.log2_weight(left));
            }
            node = node.child(bit);
            log2_prod += self.log2_weight(node);
        }
        Ok(acc)
    }

    /// Number of level-`n` paths with `W_{i_1} ⋯ W_{i_1…i_n} ≥ 2^{-(x+δ)n}`.
    pub fn count_large_product_paths(&self, n: u32, x: f64, delta: f64) -> Result<u64> {
        if n == 0 {
            return Err(Error::Domain("path length must be ≥ 1".into()));
        }
        Ok(self.large_product_counts(n, x, delta)?[n as usize - 1])
    }

    /// The counts of [`Self::count_large_product_paths`] for every
    /// `n = 1..=n_max`, from a single traversal.
    pub fn large_product_counts(&self, n_max: u32, x: f64, delta: f64) -> Result<Vec<u64>> {
        if n_max > self.cfg.depth {
            return Err(Error::Depth {
                requested: n_max,
                limit: self.cfg.depth,
            });
        }
        if !(x + delta).is_finite() || delta < 0.0 {
            return Err(Error::Domain(format!("bad threshold x={x}, delta={delta}")));
        }
        let mut counts = vec![0u64; n_max as usize];
        self.count_below(DyadicPath::ROOT, 0.0, n_max, -(x + delta), &mut counts);
        Ok(counts)
    }

    fn count_below(
        &self,
        path: DyadicPath,
        log2_prod: f64,
        n_max: u32,
        rate: f64,
        counts: &mut [u64],
    ) {
        if path.len() == n_max {
            return;
        }
        let children = [path.child(0), path.child(1)];
        let logs = children.map(|c| log2_prod + self.log2_weight(c));
        let level = path.len() + 1;
        for l in logs {
            if l >= rate * f64::from(level) {
                counts[level as usize - 1] += 1;
            }
        }
        if self.exec.is_parallel() && n_max - path.len() >= PAR_MIN_LEVELS {
            let mut right = vec![0u64; counts.len()];
            self.exec.join(
                || self.count_below(children[0], logs[0], n_max, rate, counts),
                || self.count_below(children[1], logs[1], n_max, rate, &mut right),
            );
            for (c, r) in counts.iter_mut().zip(right) {
                *c += r;
            }
        } else {
            self.count_below(children[0], logs[0], n_max, rate, counts);
            self.count_below(children[1], logs[1], n_max, rate, counts);
        }
    }

    /// Batch [`Self::interval_mass`]; shared prefixes are evaluated once.
    pub fn image_lengths_at_level(&self, paths: &[DyadicPath]) -> Result<Vec<MassResult>> {
        for &p in paths {
            self.check_path(p)?;
        }
        let mut prefix_logs: HashMap<DyadicPath, f64> = HashMap::new();
        prefix_logs.insert(DyadicPath::ROOT, 0.0);
        let mut distinct = Vec::new();
        for &p in paths {
            if prefix_logs.contains_key(&p) && distinct.contains(&p) {
                continue;
            }
            self.memo_prefix(p, &mut prefix_logs);
            if !distinct.contains(&p) {
                distinct.push(p);
            }
        }
        let masses = self
            .exec
            .map(&distinct, |&p| self.subtree_mass(p, prefix_logs[&p]));
        let by_path: HashMap<DyadicPath, f64> = distinct.into_iter().zip(masses).collect();
        Ok(paths
            .iter()
            .map(|&path| MassResult {
                path,
                mass: by_path[&path],
            })
            .collect())
    }

    fn memo_prefix(&self, path: DyadicPath, memo: &mut HashMap<DyadicPath, f64>) -> f64 {
        if let Some(&v) = memo.get(&path) {
            return v;
        }
        let parent = path.parent().expect("root is memoized");
        let v = self.memo_prefix(parent, memo) + self.log2_weight(path);
        memo.insert(path, v);
        v
    }
}

/// `Σ_{j=1..k} log2 W_{0^j}` along the all-zeros stem.
///
/// Uses the same node hash as [`Cascade`] for `k` within the path width and
/// extends it to arbitrary stem lengths.
pub fn stem_log2_product(model: &WeightModel, seed: u64, k: u64) -> f64 {
    let sampler = model.sampler();
    (1..=k)
        .map(|j| {
            if j <= u64::from(crate::path::MAX_PATH_LEN) {
                sampler.log2_weight(seed, DyadicPath::new(0, j as u32).expect("valid stem"))
            } else {
                stem_weight_beyond(model, seed, j)
            }
        })
        .sum()
}

fn stem_weight_beyond(model: &WeightModel, seed: u64, j: u64) -> f64 {
    let h = mix64(mix64(seed ^ 0x5EED_57E3_0000_0000) ^ j);
    match *model {
        WeightModel::LogNormal { sigma2 } => {
            (-sigma2 / 2.0 + sigma2.sqrt() * inverse_normal_cdf(unit_open(h)))
                / std::f64::consts::LN_2
        }
        WeightModel::TwoPoint { xi } => {
            if h >> 63 == 0 {
                (1.0 - xi).log2()
            } else {
                (1.0 + xi).log2()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn cascade(model: WeightModel, seed: u64, depth: u32) -> Cascade {
        Cascade::new(CascadeConfig::new(model, seed, depth)).unwrap()
    }

    fn ln2() -> WeightModel {
        WeightModel::log_normal(LN_2).unwrap()
    }

    #[test]
    fn rejects_bad_configs() {
        let critical = WeightModel::log_normal(4f64.ln()).unwrap();
        assert!(matches!(
            Cascade::new(CascadeConfig::new(critical, 0, 4)),
            Err(Error::Regime { .. })
        ));
        assert!(Cascade::new(CascadeConfig::new(ln2(), 0, 0)).is_err());
        assert!(Cascade::new(CascadeConfig::new(ln2(), 0, 41)).is_err());
        let cfg = CascadeConfig::new(ln2(), 0, 40).with_tail(TailRule::Extended(9));
        assert!(Cascade::new(cfg).is_err());
    }

    #[test]
    fn mass_is_product_formula_at_leaves() {
        let c = cascade(ln2(), 11, 5);
        let path = DyadicPath::from_bits(&[1, 0, 0, 1, 1]).unwrap();
        let product: f64 = (1..=5)
            .map(|j| ln2().sample_weight(11, path.prefix(j)).unwrap())
            .product();
        let mass = c.interval_mass(path).unwrap().mass;
        assert!((mass - product / 32.0).abs() < 1e-15 * product);
    }

    #[test]
    fn children_sum_to_parent_exactly() {
        let c = cascade(WeightModel::two_point(0.7).unwrap(), 3, 6);
        for level in 0..6u32 {
            for idx in 0..(1u64 << level) {
                let p = DyadicPath::new(idx, level).unwrap();
                let m = c.interval_mass(p).unwrap().mass;
                let m0 = c.interval_mass(p.child(0)).unwrap().mass;
                let m1 = c.interval_mass(p.child(1)).unwrap().mass;
                assert_eq!(m, m0 + m1);
            }
        }
    }

    #[test]
    fn extended_tail_nests_with_shallower_tail() {
        // K=4 with m=2 realizes the same leaves as K=5 with m=1 and K=6 unit
        let m = ln2();
        let a = Cascade::new(CascadeConfig::new(m, 5, 4).with_tail(TailRule::Extended(2))).unwrap();
        let b = Cascade::new(CascadeConfig::new(m, 5, 5).with_tail(TailRule::Extended(1))).unwrap();
        let u = cascade(m, 5, 6);
        for idx in 0..16 {
            let p = DyadicPath::new(idx, 4).unwrap();
            let ma = a.interval_mass(p).unwrap().mass;
            assert_eq!(ma, b.interval_mass(p).unwrap().mass);
            assert_eq!(ma, u.interval_mass(p).unwrap().mass);
            assert_eq!(
                ma,
                b.interval_mass(p.child(0)).unwrap().mass
                    + b.interval_mass(p.child(1)).unwrap().mass
            );
        }
    }

    #[test]
    fn depth_errors() {
        let c = cascade(ln2(), 0, 3);
        let deep = DyadicPath::new(0, 4).unwrap();
        assert!(matches!(c.interval_mass(deep), Err(Error::Depth { .. })));
        assert!(c.count_large_product_paths(4, 0.1, 0.0).is_err());
        assert!(c.image_lengths_at_level(&[deep]).is_err());
    }

    #[test]
    fn cdf_endpoints_and_grid() {
        let c = cascade(ln2(), 9, 8);
        assert_eq!(c.cdf_value(0.0).unwrap(), 0.0);
        assert_eq!(c.cdf_value(1.0).unwrap(), c.total_mass());
        assert_eq!(
            c.cdf_value(0.5).unwrap(),
            c.interval_mass(DyadicPath::from_bits(&[0]).unwrap())
                .unwrap()
                .mass
        );
        assert!(matches!(c.cdf_value(1.0 / 3.0), Err(Error::Grid { .. })));
        assert!(c.cdf_value(1.5).is_err());
    }

    #[test]
    fn cdf_is_monotone_exhaustively() {
        let c = cascade(ln2(), 21, 10);
        let values: Vec<f64> = (0..=1024).map(|j| c.cdf_at_index(j).unwrap()).collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
        // brute force: cumulative sums of leaf masses
        let mut acc = 0.0;
        for j in 0..1024u64 {
            let err = (values[j as usize] - acc).abs();
            assert!(err <= 1e-12 * values[1024], "j={j}");
            acc += c
                .interval_mass(DyadicPath::new(j, 10).unwrap())
                .unwrap()
                .mass;
        }
    }

    #[test]
    fn path_count_extremes() {
        let c = cascade(WeightModel::two_point(0.5).unwrap(), 4, 3);
        assert_eq!(c.count_large_product_paths(1, 25.0, 25.0).unwrap(), 2);
        assert_eq!(c.count_large_product_paths(1, -50.0, 0.0).unwrap(), 0);
    }

    #[test]
    fn path_counts_match_enumeration() {
        let c = cascade(ln2(), 17, 10);
        let (x, delta) = (0.25, 0.05);
        let counts = c.large_product_counts(10, x, delta).unwrap();
        for n in 1..=10u32 {
            let brute = (0..(1u64 << n))
                .filter(|&i| {
                    let p = DyadicPath::new(i, n).unwrap();
                    c.log2_prefix_product(p) >= -(x + delta) * f64::from(n)
                })
                .count() as u64;
            assert_eq!(counts[n as usize - 1], brute, "n={n}");
        }
    }

    #[test]
    fn batch_masses_match_singletons() {
        let c = cascade(ln2(), 2, 7);
        let paths: Vec<DyadicPath> = [&[0u8, 1, 1][..], &[0, 1], &[1], &[0, 1, 1], &[]]
            .iter()
            .map(|b| DyadicPath::from_bits(b).unwrap())
            .collect();
        let batch = c.image_lengths_at_level(&paths).unwrap();
        for (r, &p) in batch.iter().zip(&paths) {
            assert_eq!(r.path, p);
            assert_eq!(r.mass, c.interval_mass(p).unwrap().mass);
        }
        let level1 = c
            .image_lengths_at_level(&[
                DyadicPath::from_bits(&[0]).unwrap(),
                DyadicPath::from_bits(&[1]).unwrap(),
            ])
            .unwrap();
        assert_eq!(level1[0].mass + level1[1].mass, c.total_mass());
        let mut rev = paths.clone();
        rev.reverse();
        let rev_batch = c.image_lengths_at_level(&rev).unwrap();
        let mut expect = batch.clone();
        expect.reverse();
        assert_eq!(rev_batch, expect);
    }

    #[test]
    fn schedules_agree_bitwise() {
        let cfg = CascadeConfig::new(ln2(), 77, 16);
        let seq = Cascade::new(cfg).unwrap().with_exec(Exec::Sequential);
        let par = Cascade::new(cfg).unwrap().with_exec(Exec::Parallel);
        assert_eq!(seq.total_mass().to_bits(), par.total_mass().to_bits());
        assert_eq!(
            seq.large_product_counts(16, 0.2, 0.0).unwrap(),
            par.large_product_counts(16, 0.2, 0.0).unwrap()
        );
    }

    #[test]
    fn stem_agrees_with_tree_weights() {
        let m = ln2();
        let c = cascade(m, 8, 20);
        let p = DyadicPath::new(0, 20).unwrap();
        assert_eq!(stem_log2_product(&m, 8, 20), c.log2_prefix_product(p));
    }
}
