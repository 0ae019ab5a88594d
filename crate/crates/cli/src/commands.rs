use std::cmp::Ordering;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use cascade_dim::boxdim::{
    estimate_image_boxdim_seeds, mean_slope, regression_dimension, CountSeries,
};
use cascade_dim::cascade::{Cascade, CascadeConfig};
use cascade_dim::sets::PointSetSpec;
use cascade_dim::table::{fmt_f64, write_table};
use cascade_dim::theory::{bounds_table_with, image_dim_target, legendre_psi};
use cascade_dim::verify::{run_all, VerifyOptions};
use cascade_dim::{Error, Exec, Result, SigmaConvention, WeightModel};

use crate::args::{
    BoxdimArgs, LdpArgs, LegendreArgs, ModelArgs, SeedArgs, SigmaFlag, TheoryArgs, VerifyArgs,
};
use crate::manifest::RunManifest;

/// Deepest level `simulate-ldp` accepts; the traversal visits `2^n` paths per seed.
pub const LDP_MAX_N: u32 = 26;

fn model(args: &ModelArgs) -> Result<WeightModel> {
    let convention = match args.sigma_convention {
        SigmaFlag::Sigma => SigmaConvention::Sigma,
        SigmaFlag::Sigma2 => SigmaConvention::Sigma2,
    };
    let m = WeightModel::parse_with(&args.model, convention)?;
    m.require_subcritical()?;
    Ok(m)
}

pub fn parse_seeds(args: &SeedArgs) -> Result<Vec<u64>> {
    if let Some(s) = args.seed {
        return Ok(vec![s]);
    }
    let bad = || Error::Parse(format!("bad seed list `{}`", args.seeds));
    let mut out = Vec::new();
    for part in args.seeds.split(',').map(str::trim) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) =
                    (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn parse_window(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::Parse(format!("window `{s}` is not `lo:hi`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

fn grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 || lo.partial_cmp(&hi) != Some(Ordering::Less) {
        return Err(Error::Domain(format!(
            "grid needs lo < hi and steps ≥ 2, got [{lo}, {hi}] with {steps}"
        )));
    }
    let last = steps - 1;
    Ok((0..steps)
        .map(|i| {
            if i == last {
                hi
            } else {
                lo + (hi - lo) * i as f64 / last as f64
            }
        })
        .collect())
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn theory_curves(a: &TheoryArgs, exec: Exec) -> Result<()> {
    let m = model(&a.model)?;
    if a.p_min.is_nan() || a.p_min <= 0.0 {
        return Err(Error::Domain(format!("p-min must be > 0, got {}", a.p_min)));
    }
    let rows = bounds_table_with(&m, &grid(a.p_min, a.p_max, a.steps)?, exec)?;
    let manifest = RunManifest::new(Some(m.to_string()), vec![], None);
    write_table(
        sink(a.out.as_deref())?,
        &manifest.lines(),
        &["p", "s1", "dim", "s2"],
        rows.iter()
            .map(|r| vec![fmt_f64(r.p), fmt_f64(r.s1), fmt_f64(r.dim), fmt_f64(r.s2)]),
    )
}

pub fn legendre(a: &LegendreArgs) -> Result<()> {
    let m = model(&a.model)?;
    let xs = match a.x {
        Some(x) => vec![x],
        None => grid(a.x_min, a.x_max.unwrap_or_else(|| m.gamma()), a.steps)?,
    };
    let rows = xs
        .iter()
        .map(|&x| {
            let r = legendre_psi(&m, x)?;
            Ok(vec![fmt_f64(r.x), fmt_f64(r.value), fmt_f64(r.minimizer_t)])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut comments = RunManifest::new(Some(m.to_string()), vec![], None).lines();
    comments.push(format!("gamma: {}", fmt_f64(m.gamma())));
    write_table(
        sink(a.out.as_deref())?,
        &comments,
        &["x", "psi", "t_star"],
        rows,
    )
}

/// `<out>.scales.csv` next to the summary file.
pub fn scales_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.scales.csv"))
}

pub fn simulate_boxdim(a: &BoxdimArgs, exec: Exec) -> Result<()> {
    let m = model(&a.model)?;
    let spec = PointSetSpec::parse(&a.set, 0)?;
    let seeds = parse_seeds(&a.seeds)?;
    let window = a.window.as_deref().map(parse_window).transpose()?;
    if a.n < 2 {
        return Err(Error::Domain(format!("n must be ≥ 2, got {}", a.n)));
    }
    let exps: Vec<u32> = (1..=a.n).collect();
    let template = Cascade::new(CascadeConfig::new(m, seeds[0], a.depth))?;
    let est = estimate_image_boxdim_seeds(&template, &seeds, &spec, &exps, window, exec)?;
    let target = image_dim_target(&m, &spec)?
        .map(fmt_f64)
        .unwrap_or_default();

    let mut comments = RunManifest::new(Some(m.to_string()), seeds.clone(), Some(a.depth)).lines();
    comments.push(format!("set: {spec}"));
    let flag = |b: bool| if b { "1" } else { "0" }.to_string();
    let mut rows: Vec<Vec<String>> = est
        .iter()
        .map(|e| {
            let d = &e.estimate;
            vec![
                e.seed.to_string(),
                fmt_f64(d.slope),
                fmt_f64(d.stderr),
                d.window.0.to_string(),
                d.window.1.to_string(),
                target.clone(),
                flag(!e.warned.is_empty()),
            ]
        })
        .collect();
    let n = est.len() as f64;
    let mean = mean_slope(&est);
    let spread = if est.len() > 1 {
        (est.iter()
            .map(|e| (e.estimate.slope - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0)
            / n)
            .sqrt()
    } else {
        f64::NAN
    };
    let w = est[0].estimate.window;
    rows.push(vec![
        "mean".into(),
        fmt_f64(mean),
        fmt_f64(spread),
        w.0.to_string(),
        w.1.to_string(),
        target,
        flag(est.iter().any(|e| !e.warned.is_empty())),
    ]);
    write_table(
        sink(Some(&a.out))?,
        &comments,
        &["seed", "slope", "stderr", "n_lo", "n_hi", "target", "warn"],
        rows,
    )?;

    let scale_rows = est.iter().flat_map(|e| {
        exps.iter().zip(&e.covers).map(move |(n, c)| {
            vec![
                e.seed.to_string(),
                n.to_string(),
                c.count.to_string(),
                flag(c.resolution_warning()),
            ]
        })
    });
    write_table(
        sink(Some(&scales_path(&a.out)))?,
        &comments,
        &["seed", "n", "count", "warn"],
        scale_rows,
    )
}

pub fn simulate_ldp(a: &LdpArgs, exec: Exec) -> Result<()> {
    if a.n > LDP_MAX_N {
        return Err(Error::Resource(format!(
            "n = {} exceeds the limit {LDP_MAX_N}",
            a.n
        )));
    }
    if a.n < 1 {
        return Err(Error::Domain("n must be ≥ 1".into()));
    }
    let m = model(&a.model)?;
    let seeds = parse_seeds(&a.seeds)?;
    let target = 1.0 + legendre_psi(&m, a.x)?.value;
    let per_seed = exec
        .map(&seeds, |&seed| {
            Cascade::new(CascadeConfig::new(m, seed, a.n))?
                .with_exec(exec)
                .large_product_counts(a.n, a.x, a.delta)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mean_counts: Vec<f64> = (0..a.n as usize)
        .map(|i| per_seed.iter().map(|c| c[i] as f64).sum::<f64>() / seeds.len() as f64)
        .collect();

    let window = match &a.window {
        Some(w) => Some(parse_window(w)?),
        None if a.n >= 4 => Some((a.n.saturating_sub(10).max(1), a.n)),
        None => None,
    };
    let mut comments = RunManifest::new(Some(m.to_string()), seeds.clone(), Some(a.n)).lines();
    comments.push(format!("x: {}, delta: {}", fmt_f64(a.x), fmt_f64(a.delta)));
    let rows: Vec<Vec<String>> = mean_counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let n = i as f64 + 1.0;
            let ratio = if c > 0.0 {
                fmt_f64(c.log2() / n)
            } else {
                String::new()
            };
            vec![(i + 1).to_string(), fmt_f64(c), ratio, fmt_f64(target)]
        })
        .collect();
    let mut out = sink(a.out.as_deref())?;
    write_table(
        &mut out,
        &comments,
        &["n", "count", "log2count_over_n", "target"],
        rows,
    )?;
    if let Some(w) = window {
        let slopes = per_seed
            .iter()
            .map(|counts| {
                let s =
                    CountSeries::new((w.0..=w.1).map(|n| (n, counts[n as usize - 1])).collect());
                Ok(regression_dimension(&s, w)?.slope)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
        writeln!(
            out,
            "# slope over n in [{}, {}], mean of {} seeds: {}",
            w.0,
            w.1,
            slopes.len(),
            fmt_f64(mean)
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Returns whether every criterion passed.
pub fn verify(a: &VerifyArgs, exec: Exec) -> Result<bool> {
    let opts = VerifyOptions {
        tolerance_scale: a.tolerance_scale,
        exec,
    };
    let results = run_all(&opts);
    for r in &results {
        println!("{}", r.line());
    }
    let all = results.iter().all(|r| r.passed);
    println!(
        "{}",
        if all {
            "all criteria passed"
        } else {
            "verification FAILED"
        }
    );
    if let Some(path) = &a.out {
        let mut comments = RunManifest::new(None, vec![], None).lines();
        comments.push(format!("tolerance scale: {}", fmt_f64(a.tolerance_scale)));
        comments.extend(results.iter().map(|r| {
            format!(
                "{} elapsed {:.3}s of {}s budget",
                r.id,
                r.elapsed.as_secs_f64(),
                r.budget.as_secs()
            )
        }));
        let rows = results.iter().map(|r| {
            vec![
                r.id.to_string(),
                if r.passed { "pass" } else { "fail" }.into(),
                r.detail.clone(),
            ]
        });
        write_table(
            sink(Some(path))?,
            &comments,
            &["id", "result", "detail"],
            rows,
        )?;
    }
    Ok(all)
}
