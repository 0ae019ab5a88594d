//! Deterministic subsets `E ⊂ [0, 1]`: power sequences `{n^-p}`, the thyrse
//! sets `E^α`, Cantor sets and explicit point lists.

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Largest number of points any enumeration may produce.
pub const MAX_POINTS: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq)]
pub enum SetKind {
    /// `{n^-p : n ≥ 1} ∪ {0}`.
    PowerSequence {
        p: f64,
    },
    /// `E^α = {0.0^{k-1} 1 𝐣 : k ≥ 1, 𝐣 ∈ {0,1}^⌊αk⌋} ∪ {0}`.
    Thyrse {
        alpha: f64,
    },
    /// Two-piece symmetric Cantor set keeping `[0, ratio]` and `[1-ratio, 1]`.
    Cantor {
        ratio: f64,
    },
    Explicit(Vec<f64>),
}

/// A set together with the cutoff used by [`enumerate_points`]: the largest
/// index `n` for power sequences, the largest stem level `k` for thyrse
/// sets, and the construction depth for Cantor sets.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSetSpec {
    pub kind: SetKind,
    pub cutoff: u32,
}

/// Outcome of a finite-range separation check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Separation {
    True,
    False,
    /// No index `n ≥ n0` could be decided with the given ranges.
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpEstimate {
    /// `-ln a_N / ln N` at the last index.
    pub exponent: f64,
    /// Least-squares slope of `-ln a_n` against `ln n` over the second half.
    pub tail_slope: f64,
}

impl PointSetSpec {
    pub fn power_sequence(p: f64, n_max: u32) -> Result<Self> {
        check_positive(p, "p")?;
        Ok(PointSetSpec {
            kind: SetKind::PowerSequence { p },
            cutoff: n_max,
        })
    }

    pub fn thyrse(alpha: f64, k_max: u32) -> Result<Self> {
        check_positive(alpha, "alpha")?;
        Ok(PointSetSpec {
            kind: SetKind::Thyrse { alpha },
            cutoff: k_max,
        })
    }

    pub fn cantor(ratio: f64, depth: u32) -> Result<Self> {
        if !(ratio > 0.0 && ratio <= 0.5) {
            return Err(Error::Domain(format!(
                "Cantor ratio must lie in (0, 1/2], got {ratio}"
            )));
        }
        Ok(PointSetSpec {
            kind: SetKind::Cantor { ratio },
            cutoff: depth,
        })
    }

    pub fn explicit(points: Vec<f64>) -> Result<Self> {
        if let Some(x) = points.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Domain(format!("point {x} outside [0, 1]")));
        }
        Ok(PointSetSpec {
            kind: SetKind::Explicit(points),
            cutoff: 0,
        })
    }

    /// Parses `seq:p=<v>`, `thyrse:alpha=<v>`, `cantor:ratio=<v>` or
    /// `file:<path>`. `cutoff` becomes the enumeration cutoff.
    pub fn parse(spec: &str, cutoff: u32) -> Result<Self> {
        let spec = spec.trim();
        if let Some(path) = spec.strip_prefix("file:") {
            return Self::explicit(read_points(Path::new(path))?);
        }
        let (family, param) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("set spec `{spec}` lacks `:`")))?;
        let (key, value) = param
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("set spec `{spec}` lacks `=`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad number in set spec `{spec}`")))?;
        match (family, key) {
            ("seq", "p") => Self::power_sequence(value, cutoff),
            ("thyrse", "alpha") => Self::thyrse(value, cutoff),
            ("cantor", "ratio") => Self::cantor(value, cutoff),
            _ => Err(Error::Parse(format!("unknown set spec `{spec}`"))),
        }
    }

    /// Box dimension of the (infinite) set, where it is known in closed form.
    pub fn box_dimension(&self) -> Option<f64> {
        match self.kind {
            SetKind::PowerSequence { p } => Some(1.0 / (1.0 + p)),
            SetKind::Thyrse { alpha } => Some(alpha / (1.0 + alpha)),
            SetKind::Cantor { ratio } => Some(2f64.ln() / (1.0 / ratio).ln()),
            SetKind::Explicit(_) => None,
        }
    }
}

impl fmt::Display for PointSetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SetKind::PowerSequence { p } => write!(f, "seq:p={p}"),
            SetKind::Thyrse { alpha } => write!(f, "thyrse:alpha={alpha}"),
            SetKind::Cantor { ratio } => write!(f, "cantor:ratio={ratio}"),
            SetKind::Explicit(v) => write!(f, "explicit[{} points]", v.len()),
        }
    }
}

fn check_positive(v: f64, name: &str) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

/// Reads newline-separated decimals in `[0, 1]`; blank lines and `#` comments are skipped.
pub fn read_points(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad point `{l}` in {}", path.display())))
        })
        .collect()
}

/// Thyrse points at stem level `k`: `2^-k + m 2^-(k+L)`, `m < 2^L`, `L = ⌊αk⌋`.
fn thyrse_level(alpha: f64, k: u32) -> (u32, impl Iterator<Item = f64>) {
    let branch = (alpha * f64::from(k)).floor() as u32;
    let base = (-f64::from(k)).exp2();
    let step = (-f64::from(k + branch)).exp2();
    (
        branch,
        (0..(1u64 << branch)).map(move |m| base + m as f64 * step),
    )
}

fn cantor_intervals(ratio: f64, depth: u32) -> Result<Vec<(f64, f64)>> {
    if depth >= 26 {
        return Err(Error::Resource(format!(
            "Cantor depth {depth} exceeds 2^26 intervals"
        )));
    }
    let mut intervals = vec![(0.0, 1.0)];
    for _ in 0..depth {
        intervals = intervals
            .iter()
            .flat_map(|&(a, b)| {
                let len = (b - a) * ratio;
                [(a, a + len), (b - len, b)]
            })
            .collect();
    }
    Ok(intervals)
}

/// Points of the set up to its cutoff, sorted increasingly and deduplicated.
pub fn enumerate_points(spec: &PointSetSpec) -> Result<Vec<f64>> {
    let mut pts = match &spec.kind {
        SetKind::PowerSequence { p } => {
            check_positive(*p, "p")?;
            if spec.cutoff as usize > MAX_POINTS {
                return Err(Error::Resource(format!(
                    "n_max {} exceeds 2^26",
                    spec.cutoff
                )));
            }
            let mut v: Vec<f64> = (1..=spec.cutoff).map(|n| f64::from(n).powf(-p)).collect();
            v.push(0.0);
            v
        }
        SetKind::Thyrse { alpha } => {
            check_positive(*alpha, "alpha")?;
            let total: f64 = (1..=spec.cutoff)
                .map(|k| (alpha * f64::from(k)).floor().exp2())
                .sum();
            if total > MAX_POINTS as f64 {
                return Err(Error::Resource(format!(
                    "thyrse set has {total} points, over 2^26"
                )));
            }
            let mut v = vec![0.0];
            for k in 1..=spec.cutoff {
                v.extend(thyrse_level(*alpha, k).1);
            }
            v
        }
        SetKind::Cantor { ratio } => cantor_intervals(*ratio, spec.cutoff)?
            .into_iter()
            .flat_map(|(a, b)| [a, b])
            .collect(),
        SetKind::Explicit(v) => {
            if let Some(x) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::Domain(format!("point {x} outside [0, 1]")));
            }
            v.clone()
        }
    };
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    Ok(pts)
}

/// Number of thyrse points whose stem level is `k`.
pub fn thyrse_level_count(alpha: f64, k: u32) -> u64 {
    1u64 << thyrse_level(alpha, k).0
}

#[inline]
pub(crate) fn cell_of(x: f64, level: u32) -> u64 {
    let n = 1u64 << level;
    ((x * n as f64).floor() as u64).min(n - 1)
}

/// Sorted indices of the level-`level` dyadic cells `[j 2^-level, (j+1) 2^-level)`
/// that meet the set.
///
/// Unlike [`enumerate_points`] this describes the whole infinite set at
/// that resolution: once the gaps of a power sequence drop below the cell
/// width, every cell between 0 and the current point is hit, so the tail
/// is filled in directly. Cantor sets are resolved from construction
/// intervals finer than one cell (taken half-open).
pub fn cells_at_level(spec: &PointSetSpec, level: u32) -> Result<Vec<u64>> {
    if level > 40 {
        return Err(Error::Depth {
            requested: level,
            limit: 40,
        });
    }
    let width = (-f64::from(level)).exp2();
    let mut cells = match &spec.kind {
        SetKind::PowerSequence { p } => {
            check_positive(*p, "p")?;
            let mut v = Vec::new();
            let mut n: u64 = 1;
            loop {
                let a = (n as f64).powf(-p);
                let next = ((n + 1) as f64).powf(-p);
                if a - next < width {
                    v.extend(0..=cell_of(a, level));
                    break;
                }
                v.push(cell_of(a, level));
                n += 1;
                if n as usize > MAX_POINTS {
                    return Err(Error::Resource(
                        "power sequence gaps shrink too slowly".into(),
                    ));
                }
            }
            v
        }
        SetKind::Thyrse { alpha } => {
            check_positive(*alpha, "alpha")?;
            let mut v = vec![0u64];
            for k in 1..=level {
                let (branch, _) = thyrse_level(*alpha, k);
                let start = 1u64 << (level - k);
                if branch >= level - k {
                    v.extend(start..2 * start);
                } else {
                    let stride = 1u64 << (level - k - branch);
                    v.extend((0..(1u64 << branch)).map(|m| start + m * stride));
                }
            }
            v
        }
        SetKind::Cantor { ratio } => {
            let depth = ((f64::from(level) * 2f64.ln()) / (1.0 / ratio).ln()).ceil() as u32 + 2;
            let scale = (f64::from(level)).exp2();
            let mut v = Vec::new();
            for (a, b) in cantor_intervals(*ratio, depth)? {
                let first = cell_of(a, level);
                let last = ((b * scale).ceil() as u64).saturating_sub(1).max(first);
                v.extend(first..=last.min((1u64 << level) - 1));
            }
            v
        }
        SetKind::Explicit(pts) => {
            if let Some(x) = pts.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::Domain(format!("point {x} outside [0, 1]")));
            }
            pts.iter().map(|&x| cell_of(x, level)).collect()
        }
    };
    cells.sort_unstable();
    cells.dedup();
    Ok(cells)
}

fn check_decreasing(seq: &[f64]) -> Result<()> {
    if seq
        .windows(2)
        .any(|w| w[1].partial_cmp(&w[0]) != Some(Ordering::Less))
    {
        return Err(Error::Shape("sequence is not strictly decreasing".into()));
    }
    Ok(())
}

/// Estimates `p` for a sequence in `S_p` (indices start at 1).
pub fn sp_exponent(seq: &[f64]) -> Result<SpEstimate> {
    if seq.len() < 16 {
        return Err(Error::Shape(format!(
            "need at least 16 terms, got {}",
            seq.len()
        )));
    }
    check_decreasing(seq)?;
    if seq[seq.len() - 1] <= 0.0 {
        return Err(Error::Shape("sequence terms must be positive".into()));
    }
    let n = seq.len() as f64;
    let exponent = -seq[seq.len() - 1].ln() / n.ln();
    let half = seq.len() / 2;
    let xs: Vec<f64> = (half..seq.len()).map(|i| ((i + 1) as f64).ln()).collect();
    let ys: Vec<f64> = seq[half..].iter().map(|a| -a.ln()).collect();
    let (slope, _) = least_squares(&xs, &ys);
    Ok(SpEstimate {
        exponent,
        tail_slope: slope,
    })
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Whether `b` eventually separates `a`: for every `n ≥ n0` some `b_m`
/// lies in `[a_{n+1}, a_n]`. Indices are 1-based.
///
/// Only gaps that lie within the range of `b` are decidable; the result is
/// [`Separation::Unknown`] when none is.
pub fn eventually_separates(a: &[f64], b: &[f64], n0: usize) -> Separation {
    if a.len() < 2 || b.is_empty() || n0 == 0 {
        return Separation::Unknown;
    }
    let b_min = b[b.len() - 1];
    let mut decided = 0usize;
    for n in n0..a.len() {
        let (hi, lo) = (a[n - 1], a[n]);
        if lo < b_min && hi < b_min {
            break;
        }
        decided += 1;
        // b is decreasing: first index with b_m ≤ hi
        let idx = b.partition_point(|&v| v > hi);
        if idx == b.len() || b[idx] < lo {
            return Separation::False;
        }
    }
    if decided == 0 {
        Separation::Unknown
    } else {
        Separation::True
    }
}

/// True iff the gaps `a_n - a_{n+1}` are nonincreasing, up to rounding.
pub fn decreasing_gaps(a: &[f64]) -> bool {
    a.windows(3).all(|w| {
        let (g0, g1) = (w[0] - w[1], w[1] - w[2]);
        g1 <= g0 + 8.0 * f64::EPSILON * w[0].abs().max(w[1].abs())
    })
}
